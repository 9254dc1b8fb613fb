"""Tests for toolkit configuration."""

import os
import pytest
from pathlib import Path
from app.toolkit_config import ToolkitConfig
from app.exceptions import ConfigurationError


@pytest.fixture(autouse=True)
def clean_env(monkeypatch, tmp_path):
    """Run every test in an empty directory without CHARGED_DROP_ variables."""
    for key in list(os.environ):
        if key.startswith('CHARGED_DROP_'):
            monkeypatch.delenv(key)
    monkeypatch.chdir(tmp_path)


def test_config_default_values():
    """Test configuration uses default values."""
    config = ToolkitConfig()

    assert config.log_dir == 'logs'
    assert config.results_dir == 'results'
    assert config.tolerance == 1e-6
    assert config.max_iter == 50_000
    assert config.weight_floor == 1e-12
    assert config.threads >= 1
    assert config.csv_digits == 17
    assert config.auto_save is True


def test_config_creates_directories():
    """Test configuration creates necessary directories."""
    config = ToolkitConfig()

    assert Path(config.log_dir).exists()
    assert Path(config.results_dir).exists()


def test_config_without_directories():
    """Directories are optional."""
    ToolkitConfig(create_dirs=False)
    assert not Path('logs').exists()


def test_config_from_env(monkeypatch):
    """Test configuration loads from environment variables."""
    monkeypatch.setenv('CHARGED_DROP_LOG_DIR', 'custom_logs')
    monkeypatch.setenv('CHARGED_DROP_RESULTS_DIR', 'custom_results')
    monkeypatch.setenv('CHARGED_DROP_TOLERANCE', '1e-8')
    monkeypatch.setenv('CHARGED_DROP_MAX_ITER', '1000')
    monkeypatch.setenv('CHARGED_DROP_THREADS', '3')
    monkeypatch.setenv('CHARGED_DROP_CSV_DIGITS', '12')
    monkeypatch.setenv('CHARGED_DROP_AUTO_SAVE', 'false')
    monkeypatch.setenv('CHARGED_DROP_WEIGHT_FLOOR', '1e-6')

    config = ToolkitConfig()

    assert config.log_dir == 'custom_logs'
    assert config.results_dir == 'custom_results'
    assert config.tolerance == 1e-8
    assert config.max_iter == 1000
    assert config.threads == 3
    assert config.float_format == '%.12g'
    assert config.auto_save is False
    assert config.weight_floor == 1e-6


def test_config_bool_variations(monkeypatch):
    """Test boolean configuration accepts the usual spellings."""
    for value in ['true', 'True', '1', 'yes', 'On']:
        monkeypatch.setenv('CHARGED_DROP_AUTO_SAVE', value)
        assert ToolkitConfig().auto_save is True
    for value in ['false', 'FALSE', '0', 'no', 'off']:
        monkeypatch.setenv('CHARGED_DROP_AUTO_SAVE', value)
        assert ToolkitConfig().auto_save is False


def test_config_invalid_int(monkeypatch):
    """Test invalid integer value raises error naming the key."""
    monkeypatch.setenv('CHARGED_DROP_MAX_ITER', 'not_a_number')

    with pytest.raises(ConfigurationError, match="CHARGED_DROP_MAX_ITER"):
        ToolkitConfig()


def test_config_invalid_float(monkeypatch):
    """Test invalid float value raises error."""
    monkeypatch.setenv('CHARGED_DROP_TOLERANCE', 'tiny')

    with pytest.raises(ConfigurationError, match="Invalid float value"):
        ToolkitConfig()


def test_config_rejects_nonpositive_tolerance(monkeypatch):
    monkeypatch.setenv('CHARGED_DROP_TOLERANCE', '0')
    with pytest.raises(ConfigurationError, match="Tolerance"):
        ToolkitConfig()


def test_config_rejects_weight_floor_outside_unit_interval(monkeypatch):
    monkeypatch.setenv('CHARGED_DROP_WEIGHT_FLOOR', '1.5')
    with pytest.raises(ConfigurationError, match="weight_floor"):
        ToolkitConfig()


def test_config_to_dict():
    """Resolved settings go into every manifest."""
    data = ToolkitConfig(create_dirs=False).to_dict()
    assert data['tolerance'] == 1e-6
    assert data['csv_digits'] == 17
    assert set(data) == {'tolerance', 'max_iter', 'weight_floor', 'threads', 'csv_digits'}

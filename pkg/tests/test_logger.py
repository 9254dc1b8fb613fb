"""Tests for logger module."""

import logging
from pathlib import Path
import tempfile
from app.logger import Logger


def _reset():
    Logger._logger = None
    logging.getLogger('charged_drop').handlers.clear()


def test_get_logger():
    """Test getting logger instance."""
    logger = Logger.get_logger()
    assert logger is not None
    assert isinstance(logger, logging.Logger)
    assert logger.name == 'charged_drop'


def test_logger_singleton():
    """Test logger returns same instance."""
    logger1 = Logger.get_logger()
    logger2 = Logger.get_logger()
    assert logger1 is logger2


def test_logger_creates_log_directory():
    """Test logger creates log directory."""
    with tempfile.TemporaryDirectory() as tmpdir:
        log_dir = Path(tmpdir) / 'test_logs'
        _reset()

        logger = Logger.get_logger(log_dir=str(log_dir), log_file='test.log')

        assert log_dir.exists()
        handler_types = [type(h).__name__ for h in logger.handlers]
        assert 'FileHandler' in handler_types
        assert 'StreamHandler' in handler_types
        _reset()


def test_logger_level():
    """Test logger level is set correctly."""
    _reset()
    logger = Logger.get_logger()
    assert logger.level == logging.DEBUG


def test_child_logger_propagates_without_handlers():
    """Library modules log through children of the application logger."""
    child = Logger.get_child('app.equilibrium')
    assert child.name == 'charged_drop.equilibrium'
    assert child.handlers == []
    assert child.parent is logging.getLogger('charged_drop')

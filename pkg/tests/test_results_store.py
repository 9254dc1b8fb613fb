"""Tests for the results store."""

import pandas as pd
import pytest
import tempfile
from pathlib import Path
from app.results_store import ResultsStore
from app.sweep_record import SweepRecord
from app.experiments import nonexistence_sweep
from app.exceptions import SerializationError
from app.lattice import unit_ball_volume


def _record(kind: str, value: float = 1.0) -> SweepRecord:
    return SweepRecord(kind, {'N': 1}, {'total': value}, {'ok': True})


def test_store_init():
    """Test store initialization."""
    store = ResultsStore()
    assert len(store) == 0
    assert store.get_records() == []


def test_add_record():
    """Test adding a record."""
    store = ResultsStore()
    record = _record('splitting')
    store.add_record(record)
    assert len(store) == 1
    assert store.get_records() == [record]


def test_get_records_returns_copy():
    """Test getting records returns a copy."""
    store = ResultsStore()
    store.add_record(_record('a'))
    records = store.get_records()
    records.append(_record('b'))
    assert len(store) == 1


def test_to_frame_union_of_columns():
    """Records of different kinds share one table."""
    store = ResultsStore()
    store.add_record(SweepRecord('a', {'N': 1}, {'x': 1.0}))
    store.add_record(SweepRecord('b', {'M': 2}, {'y': 2.0}))
    frame = store.to_frame()
    assert list(frame.columns) == ['kind', 'param.N', 'energy.x', 'param.M', 'energy.y']
    assert len(frame) == 2


def test_save_and_load():
    """Test saving and loading records at full precision."""
    records = nonexistence_sweep(3, 0.5, unit_ball_volume(3), 1.0, 1.0, [16, 64, 256])
    store = ResultsStore()
    store.extend(records)

    with tempfile.TemporaryDirectory() as tmpdir:
        filepath = Path(tmpdir) / 'nested' / 'results.csv'
        store.save_to_csv(str(filepath))

        loaded = ResultsStore()
        loaded.load_from_csv(str(filepath))

    assert loaded.get_records() == records


def test_save_with_provenance_columns(tmp_path):
    """Provenance becomes constant meta.* columns that loading ignores."""
    store = ResultsStore()
    store.extend([_record('a', 1.0), _record('b', 2.0)])
    filepath = tmp_path / 'results.csv'
    store.save_to_csv(str(filepath), provenance={'version': '0.1.0', 'tolerance': 1e-6,
                                                 'max_iter': 500, 'weight_floor': 1e-12})
    frame = pd.read_csv(filepath, dtype={'meta.version': str})
    assert list(frame.columns[-4:]) == ['meta.version', 'meta.tolerance', 'meta.max_iter', 'meta.weight_floor']
    assert set(frame['meta.version']) == {'0.1.0'}
    assert set(frame['meta.weight_floor']) == {1e-12}

    loaded = ResultsStore()
    loaded.load_from_csv(str(filepath))
    assert loaded.get_records() == store.get_records()


def test_save_empty_store():
    """Test saving an empty store raises."""
    with pytest.raises(SerializationError, match="No records"):
        ResultsStore().save_to_csv('/tmp/never_written.csv')


def test_load_nonexistent_file():
    """Test loading nonexistent file raises error."""
    with pytest.raises(SerializationError, match="not found"):
        ResultsStore().load_from_csv('/nonexistent/path/results.csv')


def test_manifest_round_trip():
    """Manifests are sorted JSON with non-finite floats spelled out."""
    with tempfile.TemporaryDirectory() as tmpdir:
        filepath = Path(tmpdir) / 'manifest.json'
        ResultsStore.write_manifest(str(filepath), {'b': float('inf'), 'a': {'nan': float('nan')}, 'c': (1, 2)})
        text = filepath.read_text()
        manifest = ResultsStore.read_manifest(str(filepath))
    assert text.index('"a"') < text.index('"b"')
    assert manifest == {'a': {'nan': 'nan'}, 'b': 'inf', 'c': [1, 2]}


def test_read_manifest_missing():
    with pytest.raises(SerializationError, match="Failed to read manifest"):
        ResultsStore.read_manifest('/nonexistent/manifest.json')

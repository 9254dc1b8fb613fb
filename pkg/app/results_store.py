"""Result collection with pandas CSV serialization and a JSON run manifest."""

import json
import math
from pathlib import Path
from typing import Any, Dict, List, Optional
import pandas as pd

from app.exceptions import SerializationError
from app.sweep_record import SweepRecord


PROVENANCE_PREFIX = 'meta.'


def with_provenance(frame: pd.DataFrame, provenance: Optional[Dict[str, Any]]) -> pd.DataFrame:
    """Append one constant meta.<key> column per provenance entry (artifact version, tolerances)."""
    frame = frame.copy()
    for key, value in (provenance or {}).items():
        frame[PROVENANCE_PREFIX + key] = value
    return frame


def _json_default(value: Any):
    if hasattr(value, 'item'):
        return value.item()
    if hasattr(value, 'tolist'):
        return value.tolist()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def _json_safe(value: Any) -> Any:
    """Replace non-finite floats by strings; JSON has no NaN or infinity."""
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


class ResultsStore:
    """Collects sweep records in production order and saves/loads them."""

    def __init__(self):
        self._records: List[SweepRecord] = []

    def add_record(self, record: SweepRecord):
        self._records.append(record)

    def extend(self, records: List[SweepRecord]):
        for record in records:
            self.add_record(record)

    def get_records(self) -> List[SweepRecord]:
        """Return a copy of the stored records."""
        return self._records.copy()

    def to_frame(self) -> pd.DataFrame:
        """One row per record; columns in order of first appearance."""
        rows = [record.to_dict() for record in self._records]
        columns: List[str] = []
        for row in rows:
            columns.extend(key for key in row if key not in columns)
        return pd.DataFrame(rows, columns=columns)

    def save_to_csv(self, filepath: str, float_format: str = "%.17g",
                    provenance: Optional[Dict[str, Any]] = None):
        """
        Save records to CSV at full precision, with the provenance as meta.* columns.

        Raises:
            SerializationError: If there is nothing to save or writing fails
        """
        if not self._records:
            raise SerializationError("No records to save")
        try:
            Path(filepath).parent.mkdir(parents=True, exist_ok=True)
            with_provenance(self.to_frame(), provenance).to_csv(filepath, index=False, float_format=float_format)
        except OSError as e:
            raise SerializationError(f"Failed to save results: {str(e)}")

    def load_from_csv(self, filepath: str):
        """
        Replace the stored records with those in a CSV written by save_to_csv.

        Raises:
            SerializationError: If the file is missing or malformed
        """
        if not Path(filepath).exists():
            raise SerializationError(f"Results file not found: {filepath}")
        try:
            frame = pd.read_csv(filepath)
            records = [SweepRecord.from_dict(row.to_dict()) for _, row in frame.iterrows()]
        except (KeyError, ValueError, pd.errors.ParserError) as e:
            raise SerializationError(f"Failed to load results: {str(e)}")
        self._records = records

    @staticmethod
    def write_manifest(filepath: str, manifest: Dict[str, Any]):
        """
        Write a deterministic JSON manifest (sorted keys, no timestamps).

        Raises:
            SerializationError: If writing fails
        """
        try:
            Path(filepath).parent.mkdir(parents=True, exist_ok=True)
            with open(filepath, 'w', encoding='utf-8') as handle:
                json.dump(_json_safe(manifest), handle, indent=2, sort_keys=True, default=_json_default)
                handle.write('\n')
        except (OSError, TypeError) as e:
            raise SerializationError(f"Failed to write manifest: {str(e)}")

    @staticmethod
    def read_manifest(filepath: str) -> Dict[str, Any]:
        """
        Raises:
            SerializationError: If the file is missing or not valid JSON
        """
        try:
            with open(filepath, 'r', encoding='utf-8') as handle:
                return json.load(handle)
        except (OSError, json.JSONDecodeError) as e:
            raise SerializationError(f"Failed to read manifest: {str(e)}")

    def __len__(self) -> int:
        return len(self._records)

"""SweepRecord class to represent one experiment outcome."""

from typing import Any, Dict

PARAM_PREFIX = 'param.'
ENERGY_PREFIX = 'energy.'
VERDICT_PREFIX = 'verdict.'


def _plain(value: Any) -> Any:
    """Unwrap numpy scalars so records stay JSON- and CSV-friendly."""
    if hasattr(value, 'item') and not isinstance(value, (str, bytes)):
        return value.item()
    return value


def _parse_bool(value: Any) -> bool:
    if isinstance(value, str):
        return value.strip().lower() in ('true', '1', 'yes')
    return bool(value)


class SweepRecord:
    """
    Parameters, energies and named verdicts of one experiment point.

    Every record carries the full parameter set needed to regenerate it.
    """

    def __init__(self, kind: str, parameters: Dict[str, Any] = None,
                 energies: Dict[str, float] = None, verdicts: Dict[str, bool] = None):
        """
        Initialize a record.

        Args:
            kind: Experiment name (e.g., 'nonexistence', 'stability')
            parameters: Inputs of this point (N, beta, Q, delta, mode, ...)
            energies: Computed quantities
            verdicts: Named boolean outcomes
        """
        self.kind = kind
        self.parameters = {k: _plain(v) for k, v in (parameters or {}).items()}
        self.energies = {k: float(v) for k, v in (energies or {}).items()}
        self.verdicts = {k: bool(v) for k, v in (verdicts or {}).items()}

    def __repr__(self) -> str:
        return (f"SweepRecord(kind='{self.kind}', parameters={self.parameters}, "
                f"energies={self.energies}, verdicts={self.verdicts})")

    def __str__(self) -> str:
        params = ", ".join(f"{k}={v}" for k, v in self.parameters.items())
        passed = sum(self.verdicts.values())
        return f"{self.kind}({params}): {passed}/{len(self.verdicts)} verdicts true"

    def __eq__(self, other) -> bool:
        if not isinstance(other, SweepRecord):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    @property
    def passed(self) -> bool:
        """True when every verdict holds."""
        return all(self.verdicts.values())

    def to_dict(self) -> dict:
        """Flatten into prefixed columns for serialization."""
        data = {'kind': self.kind}
        data.update({PARAM_PREFIX + k: v for k, v in self.parameters.items()})
        data.update({ENERGY_PREFIX + k: v for k, v in self.energies.items()})
        data.update({VERDICT_PREFIX + k: v for k, v in self.verdicts.items()})
        return data

    @classmethod
    def from_dict(cls, data: dict) -> 'SweepRecord':
        """Create a SweepRecord from flattened columns; missing (NaN) cells are dropped."""
        parameters, energies, verdicts = {}, {}, {}
        for key, value in data.items():
            if value is None or (isinstance(value, float) and value != value):
                continue
            value = _plain(value)
            if key.startswith(PARAM_PREFIX):
                parameters[key[len(PARAM_PREFIX):]] = value
            elif key.startswith(ENERGY_PREFIX):
                energies[key[len(ENERGY_PREFIX):]] = float(value)
            elif key.startswith(VERDICT_PREFIX):
                verdicts[key[len(VERDICT_PREFIX):]] = _parse_bool(value)
        return cls(str(data['kind']), parameters, energies, verdicts)

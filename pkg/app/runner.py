"""Experiment runner with Observer pattern implementation."""

from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Protocol

from app.logger import Logger
from app.results_store import ResultsStore
from app.sweep_record import SweepRecord
from app.toolkit_config import ToolkitConfig
from app.exceptions import SerializationError


class RecordObserver(Protocol):
    """Protocol for sweep record observers."""

    def update(self, record: SweepRecord):
        """Called when a new record is produced."""
        ...


class LoggingObserver:
    """Observer that logs records."""

    def __init__(self, logger):
        """Initialize with a logger instance."""
        self.logger = logger

    def update(self, record: SweepRecord):
        """Log the record with its verdicts."""
        verdicts = ", ".join(f"{k}={v}" for k, v in record.verdicts.items()) or "none"
        self.logger.info(f"Record produced: {record} | Verdicts: {verdicts}")


class AutoSaveObserver:
    """Observer that rewrites the results CSV after every record."""

    def __init__(self, store: ResultsStore, filepath: str, float_format: str = "%.17g", logger=None,
                 provenance: Optional[Dict[str, Any]] = None):
        """
        Initialize with store and filepath.

        Args:
            store: ResultsStore instance
            filepath: Path of the CSV file
            float_format: printf-style float format
            logger: Logger receiving save failures
            provenance: Version and tolerances written as meta.* columns
        """
        self.store = store
        self.filepath = filepath
        self.float_format = float_format
        self.logger = logger or Logger.get_child('runner')
        self.provenance = provenance if provenance is not None else {}
        Path(filepath).parent.mkdir(parents=True, exist_ok=True)

    def update(self, record: SweepRecord):
        """Auto-save; failures are logged, never raised."""
        try:
            self.store.save_to_csv(self.filepath, self.float_format, self.provenance)
        except SerializationError as e:
            self.logger.warning(f"Auto-save failed: {str(e)}")


class ExperimentRunner:
    """Runs experiments, stores their records and notifies observers."""

    RESULTS_FILE = "results.csv"

    def __init__(self, config: ToolkitConfig = None, results_dir: Optional[str] = None,
                 provenance: Optional[Dict[str, Any]] = None):
        """
        Initialize the runner.

        Args:
            config: ToolkitConfig instance (creates default if None)
            results_dir: Output directory overriding the configured one
            provenance: Artifact version and resolved tolerances stamped on every CSV
        """
        self.config = config or ToolkitConfig()
        self.results_dir = Path(results_dir or self.config.results_dir)
        self.logger = Logger.get_logger(log_dir=self.config.log_dir)
        self.provenance: Dict[str, Any] = dict(provenance or {})
        self.store = ResultsStore()
        self._observers: List[RecordObserver] = []
        self._setup_observers()

    def _setup_observers(self):
        self.add_observer(LoggingObserver(self.logger))
        if self.config.auto_save:
            self.add_observer(AutoSaveObserver(
                self.store, str(self.results_path), self.config.float_format, self.logger, self.provenance
            ))

    @property
    def results_path(self) -> Path:
        return self.results_dir / self.RESULTS_FILE

    def add_observer(self, observer: RecordObserver):
        self._observers.append(observer)

    def remove_observer(self, observer: RecordObserver):
        self._observers.remove(observer)

    def _notify_observers(self, record: SweepRecord):
        for observer in self._observers:
            observer.update(record)

    def record(self, record: SweepRecord) -> SweepRecord:
        """Store one record and notify observers."""
        self.store.add_record(record)
        self._notify_observers(record)
        return record

    def run(self, experiment: Callable[..., object], *args, **kwargs) -> List[SweepRecord]:
        """
        Run an experiment returning one record or a list of them.

        Returns:
            The records in production order
        """
        name = getattr(experiment, '__name__', 'experiment')
        self.logger.info(f"Running {name}")
        outcome = experiment(*args, **kwargs)
        records = [outcome] if isinstance(outcome, SweepRecord) else list(outcome)
        for record in records:
            self.record(record)
        self.logger.info(f"{name} produced {len(records)} record(s)")
        return records

    def save_results(self, filepath: str = None):
        """Save all records to CSV."""
        filepath = filepath or str(self.results_path)
        self.store.save_to_csv(filepath, self.config.float_format, self.provenance)
        self.logger.info(f"Results saved to {filepath}")

    def get_records(self) -> List[SweepRecord]:
        return self.store.get_records()

"""Configuration management using environment variables."""

import os
from pathlib import Path
from dotenv import load_dotenv
from app.exceptions import ConfigurationError


class ToolkitConfig:
    """Manages toolkit configuration from environment variables."""

    def __init__(self, create_dirs: bool = True):
        """
        Load configuration from the environment and an optional .env file.

        Args:
            create_dirs: Create the log and results directories when True
        """
        load_dotenv()

        # Base directories
        self.log_dir = os.getenv('CHARGED_DROP_LOG_DIR', 'logs')
        self.results_dir = os.getenv('CHARGED_DROP_RESULTS_DIR', 'results')

        # Solver settings
        self.tolerance = self._get_float('CHARGED_DROP_TOLERANCE', 1e-6)
        self.max_iter = self._get_int('CHARGED_DROP_MAX_ITER', 50_000)
        self.weight_floor = self._get_float('CHARGED_DROP_WEIGHT_FLOOR', 1e-12)
        self.threads = self._get_int('CHARGED_DROP_THREADS', os.cpu_count() or 1)

        # Output settings
        self.csv_digits = self._get_int('CHARGED_DROP_CSV_DIGITS', 17)
        self.auto_save = self._get_bool('CHARGED_DROP_AUTO_SAVE', True)

        if self.tolerance <= 0:
            raise ConfigurationError(f"Tolerance must be positive: {self.tolerance}")
        if self.max_iter < 1:
            raise ConfigurationError(f"max_iter must be at least 1: {self.max_iter}")
        if self.threads < 1:
            raise ConfigurationError(f"threads must be at least 1: {self.threads}")
        if not 0.0 <= self.weight_floor < 1.0:
            raise ConfigurationError(f"weight_floor must lie in [0, 1): {self.weight_floor}")

        if create_dirs:
            Path(self.log_dir).mkdir(parents=True, exist_ok=True)
            Path(self.results_dir).mkdir(parents=True, exist_ok=True)

    @property
    def float_format(self) -> str:
        """printf-style float format used for every CSV."""
        return f"%.{self.csv_digits}g"

    def to_dict(self) -> dict:
        """Resolved settings, embedded in every run manifest."""
        return {
            'tolerance': self.tolerance,
            'max_iter': self.max_iter,
            'weight_floor': self.weight_floor,
            'threads': self.threads,
            'csv_digits': self.csv_digits,
        }

    def _get_int(self, key: str, default: int) -> int:
        """Get integer value from environment."""
        value = os.getenv(key)
        if value is None:
            return default
        try:
            return int(value)
        except ValueError:
            raise ConfigurationError(f"Invalid integer value for {key}: {value}")

    def _get_float(self, key: str, default: float) -> float:
        """Get float value from environment."""
        value = os.getenv(key)
        if value is None:
            return default
        try:
            return float(value)
        except ValueError:
            raise ConfigurationError(f"Invalid float value for {key}: {value}")

    def _get_bool(self, key: str, default: bool) -> bool:
        """Get boolean value from environment."""
        value = os.getenv(key)
        if value is None:
            return default
        return value.lower() in ('true', '1', 'yes', 'on')

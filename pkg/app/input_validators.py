"""Input validation module."""

from typing import Dict, List, Tuple
from app.exceptions import ValidationError


class InputValidator:
    """Validates user inputs coming from flags and key-value files."""

    KERNEL_FAMILIES = ('riesz', 'logarithmic')

    @staticmethod
    def validate_number(value: str, max_value: float = None) -> float:
        """
        Validate and convert a string to a float.

        Args:
            value: String representation of a number
            max_value: Maximum allowed absolute value (optional)

        Returns:
            Validated float value

        Raises:
            ValidationError: If validation fails
        """
        try:
            num = float(value)
        except (TypeError, ValueError):
            raise ValidationError(f"Invalid number: '{value}'")

        if num != num:
            raise ValidationError(f"Invalid number: '{value}'")
        if max_value is not None and abs(num) > max_value:
            raise ValidationError(f"Number {num} exceeds maximum allowed value {max_value}")

        return num

    @staticmethod
    def validate_positive(value: str) -> float:
        """Validate a strictly positive number."""
        num = InputValidator.validate_number(value)
        if num <= 0:
            raise ValidationError(f"Expected a positive number, got '{value}'")
        return num

    @staticmethod
    def validate_int(value: str, minimum: int = None) -> int:
        """Validate an integer, optionally bounded from below."""
        try:
            num = int(str(value).strip())
        except (TypeError, ValueError):
            raise ValidationError(f"Invalid integer: '{value}'")
        if minimum is not None and num < minimum:
            raise ValidationError(f"Integer {num} is below the minimum {minimum}")
        return num

    @staticmethod
    def validate_number_list(value: str) -> List[float]:
        """Validate a comma-separated list of numbers."""
        items = [item for item in str(value).split(',') if item.strip()]
        if not items:
            raise ValidationError(f"Empty number list: '{value}'")
        return [InputValidator.validate_number(item.strip()) for item in items]

    @staticmethod
    def validate_int_list(value: str, minimum: int = None) -> List[int]:
        """Validate a comma-separated list of integers."""
        items = [item for item in str(value).split(',') if item.strip()]
        if not items:
            raise ValidationError(f"Empty integer list: '{value}'")
        return [InputValidator.validate_int(item, minimum) for item in items]

    @staticmethod
    def validate_modes(value: str) -> List[Tuple[int, int]]:
        """
        Validate a list of harmonic modes written as 'l:m' pairs.

        A bare 'l' means the zonal mode (l, 0).
        """
        modes = []
        for item in str(value).split(','):
            item = item.strip()
            if not item:
                continue
            parts = item.split(':')
            if len(parts) == 1:
                parts.append('0')
            if len(parts) != 2:
                raise ValidationError(f"Invalid mode: '{item}' (expected l:m)")
            l = InputValidator.validate_int(parts[0], 0)
            m = InputValidator.validate_int(parts[1])
            if abs(m) > l:
                raise ValidationError(f"Invalid mode: '{item}' (|m| must not exceed l)")
            modes.append((l, m))
        if not modes:
            raise ValidationError(f"Empty mode list: '{value}'")
        return modes

    @staticmethod
    def validate_coefficients(value: str) -> Dict[Tuple[int, int], float]:
        """Validate harmonic coefficients written as 'l:m:value' triples."""
        coeffs = {}
        for item in str(value).split(','):
            item = item.strip()
            if not item:
                continue
            parts = item.split(':')
            if len(parts) != 3:
                raise ValidationError(f"Invalid coefficient: '{item}' (expected l:m:value)")
            (l, m), = InputValidator.validate_modes(f"{parts[0]}:{parts[1]}")
            coeffs[(l, m)] = InputValidator.validate_number(parts[2])
        return coeffs

    @staticmethod
    def validate_kernel_family(value: str) -> str:
        """Validate a kernel family name."""
        family = str(value).strip().lower()
        if family not in InputValidator.KERNEL_FAMILIES:
            raise ValidationError(
                f"Unknown kernel family: '{value}' (expected one of {', '.join(InputValidator.KERNEL_FAMILIES)})"
            )
        return family

"""Tests for input validators."""

import pytest
from app.input_validators import InputValidator
from app.exceptions import ValidationError


def test_validate_number_valid():
    """Test validating valid numbers."""
    assert InputValidator.validate_number("42") == 42.0
    assert InputValidator.validate_number("3.14") == 3.14
    assert InputValidator.validate_number("-10") == -10.0


def test_validate_number_invalid():
    """Test validating invalid numbers."""
    with pytest.raises(ValidationError, match="Invalid number"):
        InputValidator.validate_number("abc")

    with pytest.raises(ValidationError, match="Invalid number"):
        InputValidator.validate_number("12.34.56")

    with pytest.raises(ValidationError, match="Invalid number"):
        InputValidator.validate_number("nan")


def test_validate_number_with_max_value():
    """Test validation with max value constraint."""
    assert InputValidator.validate_number("100", max_value=1000) == 100.0

    with pytest.raises(ValidationError, match="exceeds maximum"):
        InputValidator.validate_number("-2000", max_value=1000)


def test_validate_positive():
    assert InputValidator.validate_positive("0.5") == 0.5
    with pytest.raises(ValidationError, match="positive"):
        InputValidator.validate_positive("0")


def test_validate_int():
    assert InputValidator.validate_int(" 12 ") == 12
    assert InputValidator.validate_int("12", minimum=12) == 12
    with pytest.raises(ValidationError, match="below the minimum"):
        InputValidator.validate_int("11", minimum=12)
    with pytest.raises(ValidationError, match="Invalid integer"):
        InputValidator.validate_int("1.5")


def test_validate_lists():
    """Comma lists skip empty items and validate each entry."""
    assert InputValidator.validate_number_list("0.5, 2,3.7,") == [0.5, 2.0, 3.7]
    assert InputValidator.validate_int_list("16,64,256") == [16, 64, 256]
    with pytest.raises(ValidationError, match="Empty"):
        InputValidator.validate_number_list(" , ")
    with pytest.raises(ValidationError, match="Invalid integer"):
        InputValidator.validate_int_list("16,x")


def test_validate_modes():
    """Modes are 'l:m' pairs; a bare degree is the zonal mode."""
    assert InputValidator.validate_modes("2:0,3:-2,4") == [(2, 0), (3, -2), (4, 0)]


def test_validate_modes_invalid():
    with pytest.raises(ValidationError, match="must not exceed"):
        InputValidator.validate_modes("2:3")
    with pytest.raises(ValidationError, match="expected l:m"):
        InputValidator.validate_modes("2:1:0")
    with pytest.raises(ValidationError, match="Empty mode list"):
        InputValidator.validate_modes("")


def test_validate_coefficients():
    coeffs = InputValidator.validate_coefficients("2:0:0.05, 3:-1:-0.01")
    assert coeffs == {(2, 0): 0.05, (3, -1): -0.01}
    with pytest.raises(ValidationError, match="expected l:m:value"):
        InputValidator.validate_coefficients("2:0")


def test_validate_kernel_family():
    assert InputValidator.validate_kernel_family(" Riesz ") == 'riesz'
    assert InputValidator.validate_kernel_family("logarithmic") == 'logarithmic'
    with pytest.raises(ValidationError, match="Unknown kernel family"):
        InputValidator.validate_kernel_family("gaussian")

"""Tests for custom exceptions."""

import math
import pytest
from app.exceptions import (
    ChargedDropError,
    ContractError,
    SingularityError,
    ConvergenceError,
    ValidationError,
    ConfigurationError,
    SerializationError,
)


def test_charged_drop_error():
    """Test ChargedDropError base exception."""
    error = ChargedDropError("Test error")
    assert str(error) == "Test error"
    assert isinstance(error, Exception)


def test_contract_error():
    """Test ContractError exception."""
    error = ContractError("Precondition failed")
    assert str(error) == "Precondition failed"
    assert isinstance(error, ChargedDropError)


def test_singularity_error_is_contract_error():
    """Coincident points are a contract violation."""
    error = SingularityError("coincident")
    assert isinstance(error, ContractError)
    assert isinstance(error, ChargedDropError)


def test_convergence_error_carries_solution():
    """Test ConvergenceError keeps the partial solution and residual."""
    error = ConvergenceError("stopped", solution="partial", residual=1e-3)
    assert str(error) == "stopped"
    assert error.solution == "partial"
    assert error.residual == 1e-3
    assert isinstance(error, ChargedDropError)


def test_convergence_error_defaults():
    """Test ConvergenceError defaults."""
    error = ConvergenceError("stopped")
    assert error.solution is None
    assert math.isnan(error.residual)


@pytest.mark.parametrize("error_class", [ValidationError, ConfigurationError, SerializationError])
def test_other_errors(error_class):
    """Test the remaining categories derive from the base class."""
    error = error_class("message")
    assert str(error) == "message"
    assert isinstance(error, ChargedDropError)
    assert not isinstance(error, ContractError)

"""Custom exceptions for the charged-drop toolkit."""


class ChargedDropError(Exception):
    """Base exception for toolkit errors."""
    pass


class ContractError(ChargedDropError):
    """Exception raised when a precondition or invariant is violated."""
    pass


class SingularityError(ContractError):
    """Exception raised when a Riesz kernel is evaluated at coincident points."""
    pass


class ConvergenceError(ChargedDropError):
    """Exception raised when the equilibrium solver stops above tolerance."""

    def __init__(self, message: str, solution=None, residual: float = float('nan')):
        """
        Initialize with the partial solution and its final residual.

        Args:
            message: Human-readable description
            solution: Last EquilibriumSolution reached by the solver
            residual: Relative EL residual at termination
        """
        super().__init__(message)
        self.solution = solution
        self.residual = residual


class ValidationError(ChargedDropError):
    """Exception raised when input validation fails."""
    pass


class ConfigurationError(ChargedDropError):
    """Exception raised when configuration loading fails."""
    pass


class SerializationError(ChargedDropError):
    """Exception raised when results cannot be written or read."""
    pass

from abc import ABC
from typing import Optional

__all__ = (
    "AetException",
    "ConfigurationError",
    "MeshError",
    "InvalidFieldError",
    "SolverError",
    "SingularSystemError",
    "ConvergenceError",
    "StaleLinearizationError",
    "CheckFailure",
    "POSSIBLE_ERRORS",
)


class AetException(Exception, ABC):
    """This abstract class can be subclassed to define errors that
    terminate an experiment with a specific process exit code and a
    detailed error string to report to the user.

    Attributes:
        exit_code: The process exit code used by the command line tools.
        title: A descriptive title for this exception.
        detail: An optional string containing the details of the error.

    """

    exit_code: int
    title: str
    detail: Optional[str] = None

    def __init__(self, detail: Optional[str] = None) -> None:
        if getattr(self, "exit_code", None) is None:
            raise AttributeError(
                f"Exception class {self.__class__.__name__} is missing required `exit_code` attribute."
            )
        super().__init__(detail)
        self.detail = detail

    def __str__(self) -> str:
        return self.detail if self.detail is not None else self.__repr__()

    def __repr__(self) -> str:
        class_name = self.__class__.__name__
        return f"{class_name}(exit_code={self.exit_code!r}, detail={self.detail!r})"


class ConfigurationError(AetException, ValueError):
    """2 Invalid or missing experiment configuration"""

    exit_code: int = 2
    title: str = "Configuration Error"


class MeshError(AetException, ValueError):
    """2 Mesh cannot be generated or is invalid"""

    exit_code: int = 2
    title: str = "Mesh Error"


class InvalidFieldError(AetException, ValueError):
    """2 A field does not satisfy the preconditions of an operation"""

    exit_code: int = 2
    title: str = "Invalid Field"


class SolverError(AetException, RuntimeError):
    """3 A linear or nonlinear solve failed"""

    exit_code: int = 3
    title: str = "Solver Error"


class SingularSystemError(SolverError):
    """3 The assembled system is singular"""

    title: str = "Singular System"


class ConvergenceError(SolverError):
    """3 An iterative solver did not converge within its iteration cap"""

    title: str = "Convergence Error"


class StaleLinearizationError(SolverError):
    """3 A linearization is used with data that does not belong to it"""

    title: str = "Stale Linearization"


class CheckFailure(AetException, AssertionError):
    """4 One or more diagnostic checks failed"""

    exit_code: int = 4
    title: str = "Check Failure"


"""A tuple of the errors that terminate an experiment with a dedicated exit code."""
POSSIBLE_ERRORS: tuple[type[AetException], ...] = (
    ConfigurationError,
    MeshError,
    InvalidFieldError,
    SolverError,
    SingularSystemError,
    ConvergenceError,
    StaleLinearizationError,
    CheckFailure,
)

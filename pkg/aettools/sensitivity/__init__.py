# pylint: disable=undefined-variable
from .diagnostics import *  # noqa: F403
from .frechet import *  # noqa: F403
from .gram import *  # noqa: F403
from .state import *  # noqa: F403

__all__ = (
    diagnostics.__all__  # type: ignore[name-defined] # noqa: F405
    + frechet.__all__  # type: ignore[name-defined] # noqa: F405
    + gram.__all__  # type: ignore[name-defined] # noqa: F405
    + state.__all__  # type: ignore[name-defined] # noqa: F405
)

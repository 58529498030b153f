# pylint: disable=undefined-variable
from .assembly import *  # noqa: F403
from .fields import *  # noqa: F403
from .operations import *  # noqa: F403
from .solvers import *  # noqa: F403

__all__ = (
    assembly.__all__  # type: ignore[name-defined] # noqa: F405
    + fields.__all__  # type: ignore[name-defined] # noqa: F405
    + operations.__all__  # type: ignore[name-defined] # noqa: F405
    + solvers.__all__  # type: ignore[name-defined] # noqa: F405
)

# pylint: disable=undefined-variable
from .electrodes import *  # noqa: F403
from .patterns import *  # noqa: F403
from .power import *  # noqa: F403
from .solvers import *  # noqa: F403

__all__ = (
    electrodes.__all__  # type: ignore[name-defined] # noqa: F405
    + patterns.__all__  # type: ignore[name-defined] # noqa: F405
    + power.__all__  # type: ignore[name-defined] # noqa: F405
    + solvers.__all__  # type: ignore[name-defined] # noqa: F405
)

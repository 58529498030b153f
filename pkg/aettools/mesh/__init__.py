# pylint: disable=undefined-variable
from .generators import *  # noqa: F403
from .io import *  # noqa: F403
from .queries import *  # noqa: F403
from .types import *  # noqa: F403

__all__ = (
    generators.__all__  # type: ignore[name-defined] # noqa: F405
    + io.__all__  # type: ignore[name-defined] # noqa: F405
    + queries.__all__  # type: ignore[name-defined] # noqa: F405
    + types.__all__  # type: ignore[name-defined] # noqa: F405
)

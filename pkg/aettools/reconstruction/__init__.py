# pylint: disable=undefined-variable
from .loops import *  # noqa: F403
from .measurements import *  # noqa: F403
from .records import *  # noqa: F403
from .step import *  # noqa: F403

__all__ = (
    loops.__all__  # type: ignore[name-defined] # noqa: F405
    + measurements.__all__  # type: ignore[name-defined] # noqa: F405
    + records.__all__  # type: ignore[name-defined] # noqa: F405
    + step.__all__  # type: ignore[name-defined] # noqa: F405
)

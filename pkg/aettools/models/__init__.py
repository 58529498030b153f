# pylint: disable=undefined-variable
from .electrodes import *  # noqa: F403
from .experiment import *  # noqa: F403
from .lm import *  # noqa: F403
from .noise import *  # noqa: F403
from .patterns import *  # noqa: F403
from .phantom import *  # noqa: F403
from .records import *  # noqa: F403

__all__ = (
    electrodes.__all__  # type: ignore[name-defined] # noqa: F405
    + experiment.__all__  # type: ignore[name-defined] # noqa: F405
    + lm.__all__  # type: ignore[name-defined] # noqa: F405
    + noise.__all__  # type: ignore[name-defined] # noqa: F405
    + patterns.__all__  # type: ignore[name-defined] # noqa: F405
    + phantom.__all__  # type: ignore[name-defined] # noqa: F405
    + records.__all__  # type: ignore[name-defined] # noqa: F405
)

# pylint: disable=undefined-variable
from .metrics import *  # noqa: F403
from .mollifier import *  # noqa: F403
from .noise import *  # noqa: F403
from .specs import *  # noqa: F403

__all__ = (
    metrics.__all__  # type: ignore[name-defined] # noqa: F405
    + mollifier.__all__  # type: ignore[name-defined] # noqa: F405
    + noise.__all__  # type: ignore[name-defined] # noqa: F405
    + specs.__all__  # type: ignore[name-defined] # noqa: F405
)

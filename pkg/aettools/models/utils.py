import inspect
import warnings
from typing import Any, Optional

from pydantic import Field
from pydantic_core import PydanticUndefined

__all__ = ("PhysicalField", "UNIT_SCHEMA_KEY")

_PYDANTIC_FIELD_KWARGS = list(inspect.signature(Field).parameters.keys())

UNIT_SCHEMA_KEY = "x-aet-unit"


def PhysicalField(
    default: Any = PydanticUndefined,
    *,
    description: Optional[str] = None,
    unit: Optional[str] = None,
    **kwargs: Any,
) -> Any:
    """A wrapper around `pydantic.Field` that does the following:

    - Forbids any extra keys that `pydantic.Field` would not accept.
    - Emits a warning when no description is provided.
    - Records the physical unit of the field in the JSON schema under
      `x-aet-unit`, so that experiment files are self-documenting.

    Arguments:
        default: The only non-keyword argument allowed for Field.
        description: The description of the `Field`; if this is not
            specified then a `UserWarning` will be emitted.
        unit: SI unit of the quantity, e.g. `"m"` or `"S/m"`.
        **kwargs: Extra keyword arguments to be passed to `Field`.

    Raises:
        RuntimeError: If `**kwargs` contains a key not found in the
            function signature of `Field`.

    Returns:
        The pydantic `Field`.

    """
    _banned = [k for k in kwargs if k not in _PYDANTIC_FIELD_KWARGS]
    if _banned:
        raise RuntimeError(
            f"Not creating PhysicalField({default!r}, **{kwargs!r}) with "
            f"forbidden keywords {_banned}."
        )

    if description is None:
        warnings.warn(
            f"No description provided for PhysicalField specified by {default!r}, "
            f"**{kwargs!r}."
        )
    else:
        kwargs["description"] = description

    json_schema_extra: dict[str, Any] = kwargs.pop("json_schema_extra", {})
    if unit is not None:
        json_schema_extra[UNIT_SCHEMA_KEY] = unit
    if json_schema_extra:
        kwargs["json_schema_extra"] = json_schema_extra

    return Field(default, **kwargs)

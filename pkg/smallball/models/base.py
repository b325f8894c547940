"""
smallball: shared field types and the model base class
"""

from fractions import Fraction
from typing import Any, Tuple, Union

from pydantic import BaseModel, ConfigDict, PlainSerializer, PlainValidator, WithJsonSchema
from typing_extensions import Annotated

from smallball.utils import format_real, parse_rational, parse_real


def _validate_real(value: Any) -> Union[Fraction, float]:
    return parse_real(value)


def _validate_rational(value: Any) -> Fraction:
    return parse_rational(value)


Real = Annotated[
    Union[Fraction, float],
    PlainValidator(_validate_real),
    PlainSerializer(format_real, when_used="json"),
    WithJsonSchema({"anyOf": [{"type": "number"}, {"type": "string", "pattern": r"^-?\d+(/\d+)?$"}]}),
]
"""Exact rational when given an int, Fraction or "p/q" string; float otherwise."""

Rational = Annotated[
    Fraction,
    PlainValidator(_validate_rational),
    PlainSerializer(format_real, when_used="json"),
    WithJsonSchema({"anyOf": [{"type": "number"}, {"type": "string", "pattern": r"^-?\d+(/\d+)?$"}]}),
]
"""Always an exact rational; floats are read through their decimal form."""

Point = Tuple[Real, ...]


class SmallballModel(BaseModel):
    """Base for all smallball models: immutable, exact-number friendly."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

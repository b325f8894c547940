"""
Utility functions for smallball
"""

import enum
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Sequence, Type, TypeVar, Union

from pydantic import BaseModel

T = TypeVar('T', bound=BaseModel)

Number = Union[Fraction, float]

_MASK64 = (1 << 64) - 1
_SEED_MULTIPLIER = 6364136223846793005
_SEED_INCREMENT = 1442695040888963407


def parse_rational(value: Any) -> Fraction:
    """
    Parse a value as an exact rational.

    Accepts ints, Fractions, "p/q" or decimal strings, and floats. Floats are
    read through their shortest decimal representation, so 0.1 becomes 1/10.

    Raises:
        ValueError: If the value cannot be read as a finite rational
    """
    if isinstance(value, bool):
        raise ValueError(f"Expected a rational, got {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"Expected a finite rational, got {value!r}")
        return Fraction(str(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"Invalid rational string {value!r}") from e
    raise ValueError(f"Expected a rational, got {type(value).__name__}")


def parse_real(value: Any) -> Number:
    """
    Parse a coordinate value.

    Ints, Fractions and strings become exact Fractions; floats stay floats so
    that irrational-looking inputs are not silently rationalised.
    """
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"Expected a finite number, got {value!r}")
        return value
    return parse_rational(value)


def format_real(value: Any) -> Any:
    """Format a number for JSON output: Fractions as "p/q" strings, floats unchanged."""
    if isinstance(value, Fraction):
        return str(value)
    return value


def format_csv_fields(*args: Any) -> List[str]:
    """Format values as CSV fields (17 significant digits for floats)."""
    formatted = []
    for arg in args:
        if arg is None:
            formatted.append("")
        elif isinstance(arg, bool):
            formatted.append("true" if arg else "false")
        elif isinstance(arg, float):
            formatted.append(format(arg, ".17g"))
        elif isinstance(arg, (dict, list, tuple)):
            formatted.append(json.dumps(to_jsonable(arg), sort_keys=True))
        else:
            formatted.append(str(arg))
    return formatted


def strict_floor(x: Number) -> int:
    """Largest integer k with k < x (differs from math.floor at integers)."""
    return math.ceil(x) - 1


def derive_seed(master: int, index: int) -> int:
    """Derive the seed of substream `index` from a master seed by fixed 64-bit arithmetic."""
    return ((master & _MASK64) * _SEED_MULTIPLIER + (index + 1) * _SEED_INCREMENT) & _MASK64


def as_point(value: Any) -> tuple:
    """Coerce a scalar or a sequence into a coordinate tuple."""
    if isinstance(value, (list, tuple)):
        return tuple(value)
    return (value,)


def lcm_many(values: Sequence[int]) -> int:
    """Least common multiple of a sequence of positive integers."""
    result = 1
    for v in values:
        result = result * v // math.gcd(result, v)
    return result


def validate_response(response: Any, model: Type[T]) -> T:
    """
    Validate raw data against a Pydantic model.

    Args:
        response: The data to validate
        model: The Pydantic model to validate against

    Returns:
        The validated model instance
    """
    if isinstance(response, model):
        return response

    return model.model_validate(response)


def load_json(path: Union[str, Path]) -> Dict[str, Any]:
    """Read a JSON document from disk."""
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def load_model(path: Union[str, Path], model: Type[T]) -> T:
    """Read a JSON document and validate it against a model."""
    return validate_response(load_json(path), model)


def dump_json(data: Any) -> str:
    """Serialize to deterministic JSON text (sorted keys, LF line ending)."""
    return json.dumps(to_jsonable(data), indent=2, sort_keys=True) + "\n"


def to_jsonable(value: Any) -> Any:
    """Recursively convert exact numbers, tuples, enums and models into JSON-ready data."""
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if hasattr(value, "item") and callable(value.item):
        return value.item()
    return value

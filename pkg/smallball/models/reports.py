"""
smallball: report models shared by every inequality check
"""

import enum
import math
from typing import Any, Dict, List, Optional

from pydantic import Field, field_serializer, model_validator

from smallball.models.base import Real, SmallballModel
from smallball.utils import to_jsonable


class InequalityId(str, enum.Enum):
    """Fixed vocabulary naming the inequality a report is about."""
    SMOOTHING = "lemma1"
    SMOOTHING_ATOM = "eq11366"
    BETA_BOUND = "thm1"
    INVERSE_CARDINALITY = "thm2"
    K1_STRUCTURE = "thm3"
    K1_LOG_N = "thm4"
    SINGLE_Q_CARDINALITY = "eq12sp"
    WINDOW_REGULARITY = "window-regularity"
    COORDINATE_PRODUCT = "coordinate-product"


class BoundReport(SmallballModel):
    """
    Outcome of checking one inequality whose absolute constant is unspecified.

    Instead of asserting lhs <= c * rhs for an unknown c, the report records
    the implied constant lhs / rhs_unconstanted. A vacuous report has no finite
    right-hand side (and therefore no implied constant).
    """
    inequality_id: InequalityId = Field(..., description="Which inequality was checked")
    lhs: Real = Field(..., description="Left-hand side value")
    rhs_unconstanted: Optional[Real] = Field(None, description="Right-hand side without its constant")
    implied_constant: Optional[Real] = Field(None, description="lhs / rhs_unconstanted")
    vacuous: bool = Field(False, description="True when the bound carries no information")
    params: Dict[str, Any] = Field(default_factory=dict, description="Parameter echo")
    flags: List[str] = Field(default_factory=list, description="Hypothesis violations and notes")
    extras: Dict[str, Any] = Field(default_factory=dict, description="Intermediate quantities and provenance")

    @model_validator(mode="after")
    def _check_consistency(self) -> "BoundReport":
        values = [self.lhs, self.rhs_unconstanted, self.implied_constant]
        for v in values:
            if v is not None and (v < 0 or (isinstance(v, float) and not math.isfinite(v))):
                raise ValueError("report values must be finite and non-negative")
        if self.vacuous and self.implied_constant is not None:
            raise ValueError("a vacuous report has no implied constant")
        return self

    @field_serializer("params", "extras", when_used="json")
    def _serialize_mapping(self, value: Dict[str, Any]) -> Dict[str, Any]:
        return to_jsonable(value)

    @classmethod
    def build(
        cls,
        inequality_id: InequalityId,
        lhs: Any,
        rhs: Optional[Any],
        params: Dict[str, Any],
        flags: Optional[List[str]] = None,
        extras: Optional[Dict[str, Any]] = None,
    ) -> "BoundReport":
        """Assemble a report, deriving the implied constant and the vacuous flag from rhs."""
        flags = list(flags or [])
        vacuous = rhs is None or (isinstance(rhs, float) and not math.isfinite(rhs)) or rhs == 0
        if vacuous:
            rhs_value = None if rhs is None or (isinstance(rhs, float) and not math.isfinite(rhs)) else rhs
            if "vacuous" not in flags:
                flags.append("vacuous")
            return cls(inequality_id=inequality_id, lhs=lhs, rhs_unconstanted=rhs_value,
                       implied_constant=None, vacuous=True, params=params, flags=flags,
                       extras=extras or {})
        return cls(inequality_id=inequality_id, lhs=lhs, rhs_unconstanted=rhs,
                   implied_constant=lhs / rhs, vacuous=False, params=params, flags=flags,
                   extras=extras or {})

"""
smallball: models for concentration-function results
"""

import enum
from typing import Any, Dict, List, Optional

from pydantic import Field, field_serializer, model_validator

from smallball.models.base import Point, Real, SmallballModel
from smallball.models.reports import BoundReport
from smallball.utils import to_jsonable


class Method(str, enum.Enum):
    """How a value was obtained"""
    EXACT = "exact"
    MONTE_CARLO = "monte-carlo"


class ConcentrationResult(SmallballModel):
    """
    Q(F, lambda) = sup_x P(Y in x + lambda*B) for the closed ball B of radius 1/2.

    Exact values carry stderr 0. A Monte Carlo estimate can also have stderr 0
    when every sample lands in the best ball (a point mass, for instance).
    """
    value: Real = Field(..., description="Concentration value in (0, 1]")
    method: Method = Field(..., description="exact or monte-carlo")
    stderr: float = Field(0.0, ge=0, description="Binomial standard error sqrt(p(1-p)/N); always 0 for exact values")
    optimal_center: Point = Field(..., description="A center achieving (or estimating) the supremum")
    params: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_result(self) -> "ConcentrationResult":
        if not 0 < self.value <= 1:
            raise ValueError("a concentration value lies in (0, 1]")
        if self.method == Method.EXACT and self.stderr != 0:
            raise ValueError("exact results carry no standard error")
        return self

    @field_serializer("params", when_used="json")
    def _serialize_params(self, value: Dict[str, Any]) -> Dict[str, Any]:
        return to_jsonable(value)


class MCConfig(SmallballModel):
    """Monte Carlo settings"""
    sample_count: int = Field(100_000, ge=1, description="Total number of samples")
    seed: int = Field(0, ge=0, lt=2 ** 64, description="Master seed")
    center_grid_resolution: int = Field(256, ge=1, description="Number of sample-anchored candidate centers (d >= 2)")
    substreams: int = Field(4, ge=1, description="Independent seeded substreams the budget is split across")


class CoordinateBounds(SmallballModel):
    """Per-coordinate concentration values q_j = Q(F_a^(j), tau) and their aggregates"""
    tau: Real
    q: List[ConcentrationResult] = Field(..., description="One result per coordinate")
    zero_projection: List[bool] = Field(..., description="Coordinates where every a_kj vanishes")
    min_q: Real
    product_q: Real
    independent: bool = Field(..., description="Each a_k has at most one non-zero coordinate")
    joint: Optional[ConcentrationResult] = Field(None, description="Q(F_a, tau) when available")
    product_report: Optional[BoundReport] = None
    flags: List[str] = Field(default_factory=list)

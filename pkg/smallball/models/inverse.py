"""
smallball: models for planted instances and structure reports
"""

from typing import Any, Dict, List, Optional

from pydantic import Field, field_serializer, model_validator

from smallball.models.base import Rational, Real, SmallballModel
from smallball.models.dist import WeightVector
from smallball.models.gap import CoverageReport, ProductRegion, SymmetricGAP
from smallball.models.reports import BoundReport
from smallball.utils import to_jsonable


class PlantedInstance(SmallballModel):
    """A weight vector built around a known GAP, plus far-away outliers"""
    weights: WeightVector
    gap: SymmetricGAP = Field(..., description="Ground-truth progression")
    noise: float = Field(0.0, ge=0, description="Half-width of the uniform perturbation (max-norm)")
    outlier_fraction: float = Field(0.0, ge=0, lt=1)
    seed: int = Field(..., ge=0)
    outlier_indices: List[int] = Field(default_factory=list, description="1-based indices of outlier entries")

    @model_validator(mode="after")
    def _check_instance(self) -> "PlantedInstance":
        if self.gap.d != self.weights.d:
            raise ValueError("planted GAP and weights must share the dimension")
        if any(not 1 <= i <= self.weights.n for i in self.outlier_indices):
            raise ValueError("outlier indices must lie in 1..n")
        return self


class InversePrincipleReport(SmallballModel):
    """
    A fitted GAP for the coefficient multiset with its coverage and cardinality
    bookkeeping. Produced by fit_gap (structure only) and by the inverse
    cardinality harness (with q_j values, hypothesis flags and bound reports).
    """
    gap: SymmetricGAP
    coverage: CoverageReport
    rank: int = Field(..., ge=0, description="Number of non-zero generators")
    cardinality: Optional[int] = Field(None, description="Enumerated |K|")
    n_prime: int = Field(..., ge=1)
    tolerance: Real
    q: List[Real] = Field(default_factory=list, description="q_j = Q(F_a^(j), tau) per coordinate")
    cardinality_components: List[float] = Field(default_factory=list,
                                                description="max(1/(q_j rho sqrt(n')), 1) per coordinate")
    passes: Dict[str, bool] = Field(default_factory=dict, description="Pass flag per clause")
    reports: List[BoundReport] = Field(default_factory=list)
    params: Dict[str, Any] = Field(default_factory=dict)
    flags: List[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.passes) and all(self.passes.values())

    @field_serializer("params", when_used="json")
    def _serialize_params(self, value: Dict[str, Any]) -> Dict[str, Any]:
        return to_jsonable(value)


class StructureReport(SmallballModel):
    """Outcome of a K_1 product-structure harness: rank and outside-mass reports plus the witness region"""
    region: ProductRegion
    rank: int = Field(..., ge=0)
    outside_mass: Rational = Field(..., description="M* mass outside the witness region")
    p: Rational = Field(..., description="p(1), or p(0) in the tau = delta = 0 branch")
    q: List[Real]
    rank_report: BoundReport
    mass_report: BoundReport
    flags: List[str] = Field(default_factory=list)
    extras: Dict[str, Any] = Field(default_factory=dict)

    @field_serializer("extras", when_used="json")
    def _serialize_extras(self, value: Dict[str, Any]) -> Dict[str, Any]:
        return to_jsonable(value)

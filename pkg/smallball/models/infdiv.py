"""
smallball: models for the infinitely divisible smoothing law H^lambda
"""

from typing import Any, Dict, Optional

from pydantic import Field, field_serializer, model_validator

from smallball.models.base import Real, SmallballModel
from smallball.models.concentration import ConcentrationResult, Method
from smallball.models.dist import WeightVector
from smallball.utils import to_jsonable


class SmoothingLaw(SmallballModel):
    """
    Symmetric compound Poisson law with Levy measure (lambda/4) * M*.

    Its characteristic function is exp(-(lambda/2) * sum_k (1 - cos<t, a_k>)).
    """
    weights: WeightVector = Field(..., description="The coefficient vector a")
    intensity: Real = Field(..., description="lambda >= 0")

    @model_validator(mode="after")
    def _check_intensity(self) -> "SmoothingLaw":
        if self.intensity < 0:
            raise ValueError("the intensity lambda must be non-negative")
        return self

    @property
    def d(self) -> int:
        return self.weights.d

    @property
    def jump_rate(self) -> float:
        """Poisson rate of each of the 2n jump directions."""
        return float(self.intensity) / 4


class AtomMassResult(SmallballModel):
    """H^lambda{0} with a certificate: truncated-tail mass for exact, stderr for Monte Carlo"""
    value: float = Field(..., ge=0, le=1)
    method: Method
    error: float = Field(..., ge=0, description="Truncation tail bound or standard error")
    params: Dict[str, Any] = Field(default_factory=dict)

    @field_serializer("params", when_used="json")
    def _serialize_params(self, value: Dict[str, Any]) -> Dict[str, Any]:
        return to_jsonable(value)


class SmoothingEstimate(SmallballModel):
    """Upper estimate of Q(H^lambda, delta) with its provenance"""
    delta: Real
    esseen_integral: Optional[float] = Field(
        None, ge=0, description="delta * integral of the cf over |t| <= 1/delta; None when it did not converge")
    esseen_bound: Optional[float] = Field(None, ge=0, le=1, description="min(1, C_E * integral)")
    monte_carlo: Optional[ConcentrationResult] = None
    value: float = Field(..., ge=0, le=1, description="min(Esseen bound, MC estimate + 3 stderr)")
    source: str = Field(..., description="'esseen' or 'monte-carlo'")

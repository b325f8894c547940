"""
smallball: models for symmetric generalized arithmetic progressions (GAPs)
"""

import enum
import math
from fractions import Fraction
from typing import Any, Dict, List, Tuple

from pydantic import Field, field_serializer, field_validator, model_validator

from smallball.models.base import Point, Rational, Real, SmallballModel
from smallball.utils import to_jsonable


class Norm(str, enum.Enum):
    """Norm used for distances to a region"""
    EUCLIDEAN = "euclidean"
    MAX = "max"


class SymmetricGAP(SmallballModel):
    """
    K = {sum_j m_j g_j : m_j integer, -L_j <= m_j <= L_j}.

    Limits are positive reals; only floor(L_j) matters for the point set and
    the volume, so Vol can exceed |K| even without collisions.
    """
    d: int = Field(1, ge=1, description="Ambient dimension")
    generators: Tuple[Point, ...] = Field(..., description="g_1 ... g_r, points of R^d")
    limits: Tuple[Real, ...] = Field(..., description="L_1 ... L_r, positive reals")

    @model_validator(mode="before")
    @classmethod
    def _lift_generators(cls, data: Any) -> Any:
        if isinstance(data, dict) and "generators" in data:
            data = dict(data)
            data["generators"] = [g if isinstance(g, (list, tuple)) else [g] for g in data["generators"]]
            if "d" not in data and data["generators"]:
                data["d"] = len(data["generators"][0])
        return data

    @model_validator(mode="after")
    def _check_gap(self) -> "SymmetricGAP":
        if not self.generators:
            raise ValueError("a GAP needs rank r >= 1")
        if len(self.generators) != len(self.limits):
            raise ValueError("generators and limits must have the same length")
        if any(len(g) != self.d for g in self.generators):
            raise ValueError(f"every generator must have {self.d} coordinates")
        if any(L <= 0 for L in self.limits):
            raise ValueError("limits must be positive")
        return self

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def integer_limits(self) -> Tuple[int, ...]:
        return tuple(math.floor(L) for L in self.limits)

    @property
    def volume(self) -> int:
        """Vol(K) = prod_j (2 floor(L_j) + 1)."""
        return math.prod(2 * L + 1 for L in self.integer_limits)

    def scalar_generators(self) -> List[Any]:
        if self.d != 1:
            raise ValueError("scalar_generators() requires d == 1")
        return [g[0] for g in self.generators]

    @classmethod
    def zero(cls, d: int = 1) -> "SymmetricGAP":
        """The trivial progression {0} of volume 1."""
        return cls(d=d, generators=(tuple(0 for _ in range(d)),), limits=(Fraction(1, 2),))


class GAPFamily(SmallballModel):
    """All symmetric GAPs in R^d of rank <= rank_cap and volume <= volume_cap"""
    rank_cap: int = Field(..., ge=1)
    volume_cap: int = Field(..., ge=1)
    d: int = Field(1, ge=1)

    def __contains__(self, gap: SymmetricGAP) -> bool:
        return gap.d == self.d and gap.rank <= self.rank_cap and gap.volume <= self.volume_cap


class CoverageReport(SmallballModel):
    """How many entries a_k lie within `tolerance` of a region"""
    n: int = Field(..., ge=0)
    covered_count: int = Field(..., ge=0)
    uncovered_indices: List[int] = Field(default_factory=list, description="1-based indices of entries left out")
    tolerance: Real
    norm: Norm = Norm.MAX

    @model_validator(mode="after")
    def _check_counts(self) -> "CoverageReport":
        if self.covered_count + len(self.uncovered_indices) != self.n:
            raise ValueError("covered_count + |uncovered_indices| must equal n")
        return self


class PointSetRegion(SmallballModel):
    """An explicit finite point set used as a region"""
    d: int = Field(1, ge=1)
    points: Tuple[Point, ...]

    @field_validator("points", mode="before")
    @classmethod
    def _lift_points(cls, value: Any) -> Any:
        return [p if isinstance(p, (list, tuple)) else [p] for p in value]


class ProductRegion(SmallballModel):
    """
    The product x_j [K_1(u^(j))]_{delta_j} of per-coordinate neighborhoods.

    `combined` is the same K_1 progression written in R^d: each block
    generator embedded on its own coordinate axis.
    """
    blocks: Tuple[SymmetricGAP, ...] = Field(..., description="One one-dimensional GAP per coordinate")
    deltas: Tuple[Real, ...] = Field(..., description="Per-coordinate neighborhood radii")
    combined: SymmetricGAP

    @model_validator(mode="after")
    def _check_region(self) -> "ProductRegion":
        if len(self.blocks) != len(self.deltas):
            raise ValueError("one delta per block is required")
        if any(b.d != 1 for b in self.blocks):
            raise ValueError("product blocks must be one-dimensional")
        if any(delta < 0 for delta in self.deltas):
            raise ValueError("deltas must be non-negative")
        if self.combined.d != len(self.blocks):
            raise ValueError("combined GAP dimension must equal the number of blocks")
        return self

    @property
    def d(self) -> int:
        return len(self.blocks)

    @property
    def rank(self) -> int:
        """Number of non-zero generators across the blocks."""
        return sum(1 for b in self.blocks for g in b.generators if g[0] != 0)


class BetaResult(SmallballModel):
    """Outcome of the beta_{r,m}(W, tau) search"""
    value: Rational = Field(..., description="Mass of W outside the tau-neighborhood of the witness")
    witness: SymmetricGAP
    r: int = Field(..., ge=1)
    m: int = Field(..., ge=1)
    tau: Real
    exhaustive: bool = Field(..., description="Every rank was searched exhaustively")
    candidate_count: int = Field(..., ge=0)
    params: Dict[str, Any] = Field(default_factory=dict)

    @field_serializer("params", when_used="json")
    def _serialize_params(self, value: Dict[str, Any]) -> Dict[str, Any]:
        return to_jsonable(value)

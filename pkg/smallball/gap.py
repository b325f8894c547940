"""
smallball: symmetric generalized arithmetic progressions

Enumeration of K = {sum_j m_j g_j : |m_j| <= L_j}, the K_1(u) progressions
(all limits 1) and their coordinate products, distances and
tau-neighborhood coverage, outside mass of an atomic measure, and the
beta_{r,m}(W, tau) infimum

    beta_{r,m}(W, tau) = inf over GAPs K of rank <= r and volume <= m of W{R \\ [K]_tau}

with the resulting concentration bound
    Q(F_a, tau) <= c3(r) (1 + floor*(kappa/delta)) (1/(m sqrt(beta)) + beta^{-(r+1)/2}),
beta = beta_{r,m}(M, delta), M = (p(tau/kappa)/4) M*.

Neighborhoods are closed: a point at distance exactly tau is inside.
"""

import bisect
import logging
import math
from fractions import Fraction
from itertools import product
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

from smallball.concentration import q_weighted_sum
from smallball.dist import (
    DEFAULT_MAX_ATOMS,
    DEFAULT_MITM_THRESHOLD,
    check_spread,
    levy_base_measure,
    symmetrize,
    tail_mass,
)
from smallball.exceptions import GapCapExceeded, InvalidParameterError, UnsupportedRankError
from smallball.models.concentration import MCConfig
from smallball.models.dist import AtomicMeasure, DiscreteDist, WeightVector
from smallball.models.gap import (
    BetaResult,
    CoverageReport,
    Norm,
    PointSetRegion,
    ProductRegion,
    SymmetricGAP,
)
from smallball.models.reports import BoundReport, InequalityId
from smallball.search import DEFAULT_DEPTH, DEFAULT_EXHAUSTIVE_BUDGET, GapSearch, candidate_generators
from smallball.utils import as_point, parse_real, strict_floor

logger = logging.getLogger(__name__)

DEFAULT_GAP_CAP = 1_000_000
DEFAULT_MAX_RANK = 4

Region = Union[SymmetricGAP, ProductRegion, PointSetRegion]


def gap_points(K: SymmetricGAP, cap: int = DEFAULT_GAP_CAP) -> List[tuple]:
    """
    All distinct points of K, sorted; |K| <= Vol(K).

    Raises:
        GapCapExceeded: If Vol(K) > cap
    """
    if K.volume > cap:
        raise GapCapExceeded(K.volume, cap)
    ranges = [range(-L, L + 1) for L in K.integer_limits]
    points = set()
    for coefficients in product(*ranges):
        points.add(tuple(
            sum((m * g[i] for m, g in zip(coefficients, K.generators)), 0) for i in range(K.d)
        ))
    return sorted(points)


def k1_construct(u: Sequence[Any]) -> SymmetricGAP:
    """K_1(u) = {sum_j n_j u_j : n_j in {-1, 0, 1}}: rank r, every limit 1, volume 3^r."""
    if len(u) == 0:
        raise InvalidParameterError("K_1(u) needs at least one generator")
    return SymmetricGAP.model_validate({"generators": list(u), "limits": [1] * len(u)})


def product_k1(u_blocks: Sequence[Sequence[Any]], deltas: Sequence[Any]) -> ProductRegion:
    """
    The region x_j [K_1(u^(j))]_{delta_j} for one generator list per coordinate.

    An empty block stands for K_1(0) = {0}. The combined K_1(u) of rank
    R = sum_j r_j has generators with a single non-zero coordinate each.
    """
    if len(u_blocks) != len(deltas):
        raise InvalidParameterError("one delta per coordinate block is required")
    if not u_blocks:
        raise InvalidParameterError("at least one coordinate block is required")
    d = len(u_blocks)
    blocks = [k1_construct([parse_real(g) for g in block] or [0]) for block in u_blocks]

    combined = []
    for j, block in enumerate(blocks):
        for g in block.scalar_generators():
            combined.append(tuple(g if i == j else 0 for i in range(d)))
    return ProductRegion(
        blocks=tuple(blocks),
        deltas=tuple(parse_real(x) for x in deltas),
        combined=SymmetricGAP(d=d, generators=tuple(combined), limits=(1,) * len(combined)),
    )


def _gap_key(diff: Sequence[Any], norm: Norm) -> Any:
    # distance for the max norm, squared distance for the euclidean norm
    if norm == Norm.MAX:
        return max(abs(x) for x in diff)
    return sum(x * x for x in diff)


def _threshold(tol: Any, norm: Norm) -> Any:
    return tol if norm == Norm.MAX else tol * tol


def _rank1_scalar_distance(x: Any, g: Any, L: int) -> Any:
    if g == 0 or L == 0:
        return abs(x)
    base = math.floor(x / g)
    best = None
    for m in (base, base + 1):
        m = max(-L, min(L, m))
        gap = abs(x - m * g)
        best = gap if best is None else min(best, gap)
    return best


def _rank1_key(x: Sequence[Any], g: Sequence[Any], L: int, norm: Norm) -> Any:
    def f(m: int) -> Any:
        return _gap_key([xi - m * gi for xi, gi in zip(x, g)], norm)

    # f is convex in m, so its integer minimum is where the forward difference turns non-negative
    lo, hi = -L, L
    while lo < hi:
        mid = (lo + hi) // 2
        if f(mid + 1) >= f(mid):
            hi = mid
        else:
            lo = mid + 1
    return f(lo)


def _gap_locator(K: SymmetricGAP, norm: Norm, cap: int) -> Callable[[tuple], Any]:
    """Function mapping a point to its (squared, for euclidean) distance from K."""
    if K.rank == 1:
        g, L = K.generators[0], K.integer_limits[0]
        if K.d == 1:
            if norm == Norm.MAX:
                return lambda x: _rank1_scalar_distance(x[0], g[0], L)
            return lambda x: _rank1_scalar_distance(x[0], g[0], L) ** 2
        return lambda x: _rank1_key(x, g, L, norm)

    points = gap_points(K, cap)
    if K.d == 1:
        line = [p[0] for p in points]

        def nearest(x: tuple) -> Any:
            i = bisect.bisect_left(line, x[0])
            best = min(abs(x[0] - line[j]) for j in (i - 1, i) if 0 <= j < len(line))
            return best if norm == Norm.MAX else best * best

        return nearest
    return lambda x: min(_gap_key([xi - pi for xi, pi in zip(x, p)], norm) for p in points)


def _region_locator(region: Region, norm: Norm, cap: int) -> Callable[[tuple], Any]:
    if isinstance(region, SymmetricGAP):
        return _gap_locator(region, norm, cap)
    if isinstance(region, PointSetRegion):
        points = region.points
        return lambda x: min(_gap_key([xi - pi for xi, pi in zip(x, p)], norm) for p in points)

    blocks = [_gap_locator(b, Norm.MAX, cap) for b in region.blocks]
    deltas = region.deltas

    def excess(x: tuple) -> Any:
        parts = [max(0, locate((xj,)) - delta) for locate, xj, delta in zip(blocks, x, deltas)]
        return _gap_key(parts, norm)

    return excess


def as_region(region: Any, d: int = 1) -> Region:
    """Accept a GAP, a product region, a point-set region or a plain list of points."""
    if isinstance(region, (SymmetricGAP, ProductRegion, PointSetRegion)):
        return region
    return PointSetRegion(d=d, points=tuple(as_point(p) for p in region))


def gap_distance(x: Any, region: Any, norm: Norm = Norm.MAX, cap: int = DEFAULT_GAP_CAP) -> float:
    """Distance from x to a region (exact for the max norm)."""
    point = tuple(parse_real(v) for v in as_point(x))
    region = as_region(region, len(point))
    key = _region_locator(region, norm, cap)(point)
    return key if norm == Norm.MAX else math.sqrt(key)


def coverage(a: WeightVector, region: Any, tol: Any, norm: Norm = Norm.MAX,
             cap: int = DEFAULT_GAP_CAP) -> CoverageReport:
    """
    Count the entries a_k within tol of the region (closed neighborhood).

    Raises:
        InvalidParameterError: If tol < 0 or dimensions differ
        GapCapExceeded: If a GAP of rank >= 2 is too large to enumerate
    """
    tol = parse_real(tol)
    if tol < 0:
        raise InvalidParameterError(f"tol must be non-negative, got {tol}")
    region = as_region(region, a.d)
    if region.d != a.d:
        raise InvalidParameterError("region and weight vector dimensions differ")

    locate = _region_locator(region, norm, cap)
    threshold = _threshold(tol, norm)
    uncovered = [k for k, entry in enumerate(a.entries, start=1) if locate(tuple(entry)) > threshold]
    return CoverageReport(n=a.n, covered_count=a.n - len(uncovered), uncovered_indices=uncovered,
                          tolerance=tol, norm=norm)


def measure_outside(W: AtomicMeasure, region: Any, tol: Any = 0, norm: Norm = Norm.MAX,
                    cap: int = DEFAULT_GAP_CAP) -> Fraction:
    """Total mass of the atoms of W outside the closed tol-neighborhood of the region."""
    tol = parse_real(tol)
    if tol < 0:
        raise InvalidParameterError(f"tol must be non-negative, got {tol}")
    region = as_region(region, W.d)
    if region.d != W.d:
        raise InvalidParameterError("region and measure dimensions differ")

    locate = _region_locator(region, norm, cap)
    threshold = _threshold(tol, norm)
    return sum((m for x, m in W.items() if locate(x) > threshold), Fraction(0))


def _check_family(r: int, m: int, tau: Any, max_rank: int) -> None:
    if r < 1 or m < 1:
        raise InvalidParameterError("rank cap r and volume cap m must be at least 1")
    if r > max_rank:
        raise UnsupportedRankError(f"rank {r} exceeds the supported maximum {max_rank}")
    if tau < 0:
        raise InvalidParameterError(f"tau must be non-negative, got {tau}")


def beta(
    W: AtomicMeasure,
    r: int,
    m: int,
    tau: Any = 0,
    depth: int = DEFAULT_DEPTH,
    exhaustive_budget: int = DEFAULT_EXHAUSTIVE_BUDGET,
    max_rank: int = DEFAULT_MAX_RANK,
) -> BetaResult:
    """
    beta_{r,m}(W, tau) for a one-dimensional atomic measure, with a witness GAP.

    The value is the outside mass of a genuine family member, so it never
    falls below the true infimum; it equals the brute-force optimum over the
    candidate family whenever every rank is searched exhaustively.

    Raises:
        InvalidParameterError: If W is not one-dimensional or r, m, tau are out of range
        UnsupportedRankError: If r > max_rank
    """
    tau = parse_real(tau)
    _check_family(r, m, tau, max_rank)
    if W.d != 1:
        raise InvalidParameterError("beta is defined here for measures on the line")

    engine = GapSearch(W.scalar_atoms(), list(W.masses), tau, depth=depth, exhaustive_budget=exhaustive_budget)
    outcome = engine.search(r, m)
    if not outcome.exhaustive:
        logger.warning("beta_{%d,%d} is a greedy upper value, not a certified infimum", r, m)

    witness = SymmetricGAP(d=1, generators=tuple((g,) for g in outcome.generators), limits=outcome.limits)
    return BetaResult(
        value=outcome.value,
        witness=witness,
        r=r,
        m=m,
        tau=tau,
        exhaustive=outcome.exhaustive,
        candidate_count=outcome.candidate_count,
        params={"depth": depth, "exhaustive_budget": exhaustive_budget},
    )


def beta_oracle(W: AtomicMeasure, r: int, m: int, tau: Any = 0, depth: int = DEFAULT_DEPTH) -> Fraction:
    """
    Brute-force beta over every difference-generated GAP of rank <= 2.

    Tries every candidate generator subset with every integer limit vector
    inside the volume cap, measuring outside mass by enumeration.
    """
    tau = parse_real(tau)
    _check_family(r, m, tau, 2)
    values = W.scalar_atoms()
    best = measure_outside(W, SymmetricGAP.zero(), tau)
    candidates = candidate_generators(values, depth)

    for L in range(1, (m - 1) // 2 + 1):
        for g in candidates:
            K = SymmetricGAP(d=1, generators=((g,),), limits=(L,))
            best = min(best, measure_outside(W, K, tau))
    if r >= 2:
        pairs = [(L1, L2) for L1 in range(1, m) for L2 in range(1, m) if (2 * L1 + 1) * (2 * L2 + 1) <= m]
        for i, g1 in enumerate(candidates):
            for g2 in candidates[i + 1:]:
                for L1, L2 in pairs:
                    K = SymmetricGAP(d=1, generators=((g1,), (g2,)), limits=(L1, L2))
                    best = min(best, measure_outside(W, K, tau))
    return best


def beta_bound(
    a: WeightVector,
    dist: DiscreteDist,
    tau: Any,
    kappa: Any,
    delta: Any,
    r: int,
    m: int,
    depth: int = DEFAULT_DEPTH,
    exhaustive_budget: int = DEFAULT_EXHAUSTIVE_BUDGET,
    max_rank: int = DEFAULT_MAX_RANK,
    mc: Optional[MCConfig] = None,
    max_atoms: int = DEFAULT_MAX_ATOMS,
    mitm_threshold: int = DEFAULT_MITM_THRESHOLD,
) -> BoundReport:
    """
    Compare Q(F_a, tau) with (1 + floor*(kappa/delta)) (1/(m sqrt(beta)) + beta^{-(r+1)/2}).

    beta = beta_{r,m}(M, delta) with M = (p(tau/kappa)/4) M*. The spread
    condition is checked with C1 = tau/kappa, C2 = inf, C3 = p(tau/kappa).
    A zero p or a zero beta makes the bound vacuous.
    """
    tau, kappa, delta = parse_real(tau), parse_real(kappa), parse_real(delta)
    if kappa <= 0 or delta <= 0:
        raise InvalidParameterError("kappa and delta must be positive")
    if tau < 0:
        raise InvalidParameterError(f"tau must be non-negative, got {tau}")
    if a.d != 1:
        raise InvalidParameterError("the beta bound is evaluated for d == 1")

    G = symmetrize(dist)
    threshold = tau / kappa
    p = tail_mass(G, threshold)
    factor = 1 + strict_floor(kappa / delta)
    lhs = q_weighted_sum(a, dist, tau, mc, max_atoms, mitm_threshold)

    params = {"tau": tau, "kappa": kappa, "delta": delta, "r": r, "m": m, "n": a.n}
    extras: Dict[str, Any] = {"p": p, "factor": factor, "lhs_method": lhs.method}
    flags: List[str] = []
    if p == 0 or not check_spread(G, threshold, math.inf, p):
        flags.append("p-zero")
        return BoundReport.build(InequalityId.BETA_BOUND, lhs.value, None, params, flags=flags, extras=extras)

    M = levy_base_measure(a).scaled(p / 4)
    result = beta(M, r, m, delta, depth=depth, exhaustive_budget=exhaustive_budget, max_rank=max_rank)
    extras.update({"beta": result.value, "witness": result.witness, "exhaustive": result.exhaustive})
    if not result.exhaustive:
        flags.append("beta-greedy")
    if result.value == 0:
        flags.append("beta-zero")
        return BoundReport.build(InequalityId.BETA_BOUND, lhs.value, None, params, flags=flags, extras=extras)

    b = float(result.value)
    rhs = factor * (1 / (m * math.sqrt(b)) + b ** (-(r + 1) / 2))
    return BoundReport.build(InequalityId.BETA_BOUND, lhs.value, rhs, params, flags=flags, extras=extras)

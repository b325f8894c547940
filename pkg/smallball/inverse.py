"""
smallball: inverse-principle engine

Fits low-rank symmetric GAPs to a coefficient multiset, generates planted
instances with known structure, and assembles the structure checks:

- inverse cardinality: a GAP K covering all but d*n' entries within
  tau*rho_n, with |K| <= prod_j max{q_j^{-1} rho_n^{-1} (n')^{-1/2}, 1}
- K_1 structure: blocks u^(j) with R = sum_j r_j and
  p(1) M*{R^d \\ x_j [K_1(u^(j))]_{delta_j}} against
  sum_j (|log q_j| + log(tau_j/delta_j) + 1) and its cubes
- K_1 log-n form: the same search against d((A+B) log n + 1) and its cube

Existence claims are checked constructively: a failed search is reported
as "not found", never as a counterexample.
"""

import logging
import math
from fractions import Fraction
from itertools import product
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from smallball.concentration import q_coordinate_bounds, q_weighted_sum
from smallball.dist import (
    DEFAULT_MAX_ATOMS,
    DEFAULT_MITM_THRESHOLD,
    check_spread,
    levy_base_measure,
    project,
    symmetrize,
    tail_mass,
)
from smallball.exceptions import InvalidParameterError, UnsupportedRankError
from smallball.gap import coverage, gap_points, measure_outside, product_k1
from smallball.models.concentration import MCConfig
from smallball.models.dist import DiscreteDist, WeightVector
from smallball.models.gap import ProductRegion, SymmetricGAP
from smallball.models.inverse import InversePrincipleReport, PlantedInstance, StructureReport
from smallball.models.reports import BoundReport, InequalityId
from smallball.search import (
    DEFAULT_DEPTH,
    DEFAULT_EXHAUSTIVE_BUDGET,
    GapSearch,
    SearchOutcome,
    candidate_generators,
)
from smallball.utils import parse_rational, parse_real

logger = logging.getLogger(__name__)

DEFAULT_RANK_CAP = 4
DEFAULT_VOLUME_CAP = 100
DEFAULT_PLANT_LIMIT = 3
DEFAULT_RATIO_THRESHOLD = 10.0
OUTLIER_DISTANCE_FACTOR = 10
RANDOM_GENERATOR_RANGE = (1, 1000)


def _entry(values: Sequence[Any]) -> Tuple[Any, ...]:
    return tuple(int(v) if isinstance(v, np.integer) else float(v) if isinstance(v, np.floating) else v
                 for v in values)


def _plant_generators(rank: int, d: int, generators: Union[None, str, Sequence[Any]],
                      rng: np.random.Generator) -> List[Tuple[Any, ...]]:
    if generators is None or generators == "random":
        low, high = RANDOM_GENERATOR_RANGE
        return [_entry(row) for row in rng.integers(low, high, size=(rank, d))]
    if isinstance(generators, str):
        raise InvalidParameterError(f"unsupported generators value {generators!r}")
    if len(generators) != rank:
        raise InvalidParameterError(f"expected {rank} generators, got {len(generators)}")
    lifted = [tuple(parse_real(x) for x in (g if isinstance(g, (list, tuple)) else [g])) for g in generators]
    if any(len(g) != d for g in lifted):
        raise InvalidParameterError(f"every generator must have {d} coordinates")
    return lifted


def plant(
    rank: int,
    n: int,
    d: int = 1,
    generators: Union[None, str, Sequence[Any]] = None,
    limits: Optional[Sequence[Any]] = None,
    noise: float = 0.0,
    outlier_fraction: float = 0.0,
    seed: int = 0,
) -> PlantedInstance:
    """
    Build n entries around a known GAP, deterministically from `seed`.

    Non-outliers are GAP points sum_j m_j g_j with m_j uniform in
    [-L_j, L_j], plus uniform noise in [-noise, noise]^d (exact values when
    noise is 0). ceil(outlier_fraction * n) entries are replaced by points
    at least 10x the GAP diameter away in every coordinate.

    Raises:
        InvalidParameterError: On degenerate generators or mismatched counts
    """
    if rank < 1 or n < 1 or d < 1:
        raise InvalidParameterError("rank, n and d must be at least 1")
    if noise < 0:
        raise InvalidParameterError(f"noise must be non-negative, got {noise}")
    if not 0 <= outlier_fraction < 1:
        raise InvalidParameterError(f"outlier_fraction must lie in [0, 1), got {outlier_fraction}")

    rng = np.random.default_rng(seed)
    gens = _plant_generators(rank, d, generators, rng)
    if all(x == 0 for g in gens for x in g):
        raise InvalidParameterError("planted GAP has only zero generators")
    lims = [int(parse_rational(L)) for L in (limits or [DEFAULT_PLANT_LIMIT] * rank)]
    if len(lims) != rank or any(L < 1 for L in lims):
        raise InvalidParameterError("one positive integer limit per generator is required")
    gap = SymmetricGAP(d=d, generators=tuple(gens), limits=tuple(lims))

    coefficients = np.stack([rng.integers(-L, L + 1, size=n) for L in lims], axis=1)
    entries: List[Tuple[Any, ...]] = []
    for row in coefficients:
        point = [sum((int(m) * g[i] for m, g in zip(row, gens)), 0) for i in range(d)]
        if noise > 0:
            point = [x + float(e) for x, e in zip(point, rng.uniform(-noise, noise, size=d))]
        entries.append(_entry(point))

    count = math.ceil(parse_rational(outlier_fraction) * n)
    outliers: List[int] = []
    if count:
        diameter = max(max(2 * sum(L * abs(g[i]) for g, L in zip(gens, lims)) for i in range(d)), 1)
        chosen = sorted(int(k) for k in rng.choice(n, size=count, replace=False))
        for k in chosen:
            signs = rng.choice([-1, 1], size=d)
            steps = rng.integers(0, OUTLIER_DISTANCE_FACTOR, size=d)
            entries[k] = _entry([int(s) * diameter * (OUTLIER_DISTANCE_FACTOR + int(t))
                                 for s, t in zip(signs, steps)])
        outliers = [k + 1 for k in chosen]

    logger.debug("planted rank-%d GAP with %d entries, %d outliers", rank, n, len(outliers))
    return PlantedInstance(
        weights=WeightVector(d=d, entries=tuple(entries)),
        gap=gap,
        noise=noise,
        outlier_fraction=outlier_fraction,
        seed=seed,
        outlier_indices=outliers,
    )


def _integer_root(value: int, d: int) -> int:
    root = max(1, int(round(value ** (1 / d))))
    while root ** d > value and root > 1:
        root -= 1
    while (root + 1) ** d <= value:
        root += 1
    return root


def _nonzero_pairs(outcome: SearchOutcome) -> List[Tuple[Any, Any]]:
    return [(g, L) for g, L in zip(outcome.generators, outcome.limits) if g != 0]


def fit_gap(
    a: WeightVector,
    tol: Any,
    n_prime: int,
    rank_cap: int = DEFAULT_RANK_CAP,
    volume_cap: int = DEFAULT_VOLUME_CAP,
    depth: int = DEFAULT_DEPTH,
    exhaustive_budget: int = DEFAULT_EXHAUSTIVE_BUDGET,
) -> InversePrincipleReport:
    """
    Search for a GAP covering at least n - d*n' entries within tol (max norm).

    Every coordinate gets its own one-dimensional search with rank cap
    max(1, rank_cap // d) and volume cap floor(volume_cap^(1/d)); the
    per-coordinate progressions are placed on the coordinate axes, so the
    product has rank <= rank_cap and volume <= volume_cap. The coverage in
    the report is an independent recount. Failing the coverage clause is a
    report with passes["coverage"] = False, not an exception.

    Raises:
        InvalidParameterError: If tol < 0 or n' is outside 1..n
    """
    tol = parse_real(tol)
    if tol < 0:
        raise InvalidParameterError(f"tol must be non-negative, got {tol}")
    if not 1 <= n_prime <= a.n:
        raise InvalidParameterError(f"n' must lie in 1..{a.n}, got {n_prime}")
    if rank_cap < 1 or volume_cap < 1:
        raise InvalidParameterError("rank_cap and volume_cap must be at least 1")

    coord_rank = max(1, rank_cap // a.d)
    coord_volume = _integer_root(volume_cap, a.d)
    flags: List[str] = []
    generators: List[Tuple[Any, ...]] = []
    limits: List[Any] = []
    for j in range(a.d):
        outcome = GapSearch(a.column(j + 1), [1] * a.n, tol, depth=depth,
                            exhaustive_budget=exhaustive_budget).search(coord_rank, coord_volume)
        if not outcome.exhaustive:
            flags.append(f"greedy-search:{j + 1}")
        for g, L in _nonzero_pairs(outcome):
            generators.append(tuple(g if i == j else 0 for i in range(a.d)))
            limits.append(L)

    if generators:
        gap = SymmetricGAP(d=a.d, generators=tuple(generators), limits=tuple(limits))
    else:
        gap = SymmetricGAP.zero(a.d)
    report = coverage(a, gap, tol)
    cardinality = len(gap_points(gap))
    rank = len(generators)
    passes = {
        "coverage": report.covered_count >= a.n - a.d * n_prime,
        "rank": rank <= rank_cap,
        "volume": cardinality <= volume_cap,
    }
    if not passes["coverage"]:
        logger.info("no GAP within the caps covers n - d*n' = %d entries", a.n - a.d * n_prime)
    return InversePrincipleReport(
        gap=gap,
        coverage=report,
        rank=rank,
        cardinality=cardinality,
        n_prime=n_prime,
        tolerance=tol,
        passes=passes,
        params={"rank_cap": rank_cap, "volume_cap": volume_cap, "depth": depth},
        flags=flags,
    )


def fit_oracle(a: WeightVector, tol: Any, rank_cap: int = 2, volume_cap: int = DEFAULT_VOLUME_CAP,
               depth: int = DEFAULT_DEPTH) -> int:
    """
    Brute-force best coverage count over every difference-generated GAP of
    rank <= 2 (d == 1, small n).
    """
    tol = parse_real(tol)
    if a.d != 1:
        raise InvalidParameterError("fit_oracle handles d == 1 only")
    if rank_cap > 2:
        raise UnsupportedRankError("fit_oracle enumerates rank <= 2 only")
    candidates = candidate_generators(a.scalars(), depth)
    best = coverage(a, SymmetricGAP.zero(), tol).covered_count

    for k in range(1, rank_cap + 1):
        shapes = [lv for lv in product(range(1, volume_cap + 1), repeat=k)
                  if math.prod(2 * L + 1 for L in lv) <= volume_cap]
        for i, g1 in enumerate(candidates):
            rest = candidates[i + 1:] if k == 2 else [None]
            for g2 in rest:
                gens = ((g1,),) if g2 is None else ((g1,), (g2,))
                for lv in shapes:
                    K = SymmetricGAP(d=1, generators=gens, limits=lv)
                    best = max(best, coverage(a, K, tol).covered_count)
    return best


def _default_n_prime(n: int, eps: float, theta: float) -> int:
    lower = eps * n ** theta
    return min(n, max(1, round(math.sqrt(max(lower, 0) * n))))


def verify_inverse_cardinality(
    a: WeightVector,
    dist: DiscreteDist,
    tau: Any,
    eps: float,
    theta: float,
    A: float,
    B: float,
    rho: float,
    n_prime: Optional[int] = None,
    rank_cap: int = DEFAULT_RANK_CAP,
    volume_cap: int = DEFAULT_VOLUME_CAP,
    ratio_threshold: float = DEFAULT_RATIO_THRESHOLD,
    depth: int = DEFAULT_DEPTH,
    exhaustive_budget: int = DEFAULT_EXHAUSTIVE_BUDGET,
    mc: Optional[MCConfig] = None,
    max_atoms: int = DEFAULT_MAX_ATOMS,
    mitm_threshold: int = DEFAULT_MITM_THRESHOLD,
) -> InversePrincipleReport:
    """
    Fit a GAP with tol = tau*rho_n and compare |K| with the constant-free
    cardinality bound, plus the single-q comparison max{q^{-1}(n')^{-1/2}, 1}.

    Hypothesis violations (spread with C1 = 1, q_j >= n^{-A},
    n^{-B} <= rho_n <= 1, eps n^theta <= n' <= n) are flagged; the harness
    still runs.
    """
    tau = parse_real(tau)
    n = a.n
    if n_prime is None:
        n_prime = _default_n_prime(n, eps, theta)
    flags: List[str] = []

    G = symmetrize(dist)
    p1 = tail_mass(G, 1)
    if not check_spread(G, 1, math.inf, p1) or p1 == 0:
        flags.append("spread-condition-failed")
    if not n ** (-B) <= rho <= 1:
        flags.append("rho-hypothesis-failed")
    if not eps * n ** theta <= n_prime <= n:
        flags.append("n-prime-out-of-range")

    bounds = q_coordinate_bounds(a, dist, tau, mc, max_atoms, mitm_threshold)
    q = [r.value for r in bounds.q]
    for j, value in enumerate(q, start=1):
        if value < n ** (-A):
            flags.append(f"q-hypothesis-failed:{j}")

    fit = fit_gap(a, tau * rho, n_prime, rank_cap, volume_cap, depth, exhaustive_budget)
    flags.extend(fit.flags)

    components = [max(1 / (float(v) * rho * math.sqrt(n_prime)), 1.0) for v in q]
    params = {"tau": tau, "eps": eps, "theta": theta, "A": A, "B": B, "rho": rho, "n_prime": n_prime, "n": n}
    cardinality_report = BoundReport.build(
        InequalityId.INVERSE_CARDINALITY,
        fit.cardinality,
        math.prod(components),
        params,
        flags=[f for f in flags if not f.startswith("greedy")],
        extras={"components": components, "rank": fit.rank, "covered": fit.coverage.covered_count},
    )

    single_q = bounds.joint.value if bounds.joint is not None else bounds.min_q
    single_flags = [] if bounds.joint is not None else ["joint-q-unavailable"]
    single_report = BoundReport.build(
        InequalityId.SINGLE_Q_CARDINALITY,
        fit.cardinality,
        max(1 / (float(single_q) * math.sqrt(n_prime)), 1.0),
        params,
        flags=single_flags,
        extras={"q": single_q},
    )

    passes = dict(fit.passes)
    constant = cardinality_report.implied_constant
    passes["cardinality"] = constant is not None and constant <= ratio_threshold
    return InversePrincipleReport(
        gap=fit.gap,
        coverage=fit.coverage,
        rank=fit.rank,
        cardinality=fit.cardinality,
        n_prime=n_prime,
        tolerance=fit.tolerance,
        q=q,
        cardinality_components=components,
        passes=passes,
        reports=[cardinality_report, single_report],
        params={**params, "rank_cap": rank_cap, "volume_cap": volume_cap, "ratio_threshold": ratio_threshold},
        flags=flags,
    )


class K1Search(NamedTuple):
    """Best K_1 product region found for M*"""
    region: ProductRegion
    outside: Fraction
    history: List[Fraction]


def search_k1_region(
    a: WeightVector,
    deltas: Sequence[Any],
    rank_cap: int = DEFAULT_RANK_CAP,
    depth: int = DEFAULT_DEPTH,
    exhaustive_budget: int = DEFAULT_EXHAUSTIVE_BUDGET,
) -> K1Search:
    """
    Blocks u^(j) (all limits 1) leaving the least M*-mass outside the
    product of per-coordinate delta_j-neighborhoods.

    Each coordinate is searched on its own marginal of M* for every
    per-coordinate rank cap up to `rank_cap`; the product regions are then
    measured exactly and the best is kept, so the outside mass never grows
    with `rank_cap`.
    """
    if len(deltas) != a.d:
        raise InvalidParameterError("one delta per coordinate is required")
    deltas = [parse_real(x) for x in deltas]
    M = levy_base_measure(a)
    engines = [
        GapSearch(marginal.scalar_atoms(), list(marginal.masses), delta, depth=depth,
                  exhaustive_budget=exhaustive_budget)
        for marginal, delta in ((M.coordinate(j + 1), deltas[j]) for j in range(a.d))
    ]

    region = product_k1([[] for _ in range(a.d)], deltas)
    best = ((measure_outside(M, region), 0), region)
    history = [best[0][0]]
    for cap in range(1, rank_cap + 1):
        blocks = [[g for g, _ in _nonzero_pairs(engine.search(cap, 3 ** cap, k1=True))] for engine in engines]
        region = product_k1(blocks, deltas)
        key = (measure_outside(M, region), region.rank)
        if key < best[0]:
            best = (key, region)
        history.append(best[0][0])
    return K1Search(best[1], best[0][0], history)


def _log_terms(q: Sequence[Any], taus: Sequence[Any], deltas: Sequence[Any]) -> Tuple[List[float], List[str]]:
    terms: List[float] = []
    flags: List[str] = []
    for j, (qj, t, dl) in enumerate(zip(q, taus, deltas), start=1):
        if t == 0 and dl == 0:
            ratio_log = 0.0
        elif dl == 0:
            flags.append(f"delta-zero:{j}")
            ratio_log = math.inf
        else:
            ratio_log = math.log(t / dl)
        terms.append(abs(math.log(qj)) + ratio_log + 1)
    return terms, flags


def _check_tolerances(a: WeightVector, taus: Sequence[Any], deltas: Sequence[Any]) -> Tuple[List[Any], List[Any]]:
    if len(taus) != a.d or len(deltas) != a.d:
        raise InvalidParameterError(f"expected {a.d} values of tau and delta")
    taus = [parse_real(t) for t in taus]
    deltas = [parse_real(x) for x in deltas]
    if any(not t >= dl >= 0 for t, dl in zip(taus, deltas)):
        raise InvalidParameterError("tolerances must satisfy tau_j >= delta_j >= 0")
    return taus, deltas


def _k1_setup(
    a: WeightVector,
    dist: DiscreteDist,
    taus: Sequence[Any],
    deltas: Sequence[Any],
    mc: Optional[MCConfig],
    max_atoms: int,
    mitm_threshold: int,
) -> Tuple[Fraction, List[Any], List[str], bool]:
    G = symmetrize(dist)
    flags: List[str] = []
    zero_branch = all(t == 0 and dl == 0 for t, dl in zip(taus, deltas))
    threshold = 0 if zero_branch else 1
    p = tail_mass(G, threshold)
    if p == 0 or not check_spread(G, threshold, math.inf, p):
        flags.append("p-zero")

    q: List[Any] = []
    for j in range(1, a.d + 1):
        proj = project(a, j)
        if proj.is_zero:
            q.append(Fraction(1))
        else:
            q.append(q_weighted_sum(proj, dist, taus[j - 1], mc, max_atoms, mitm_threshold).value)
    return p, q, flags, zero_branch


def verify_k1_structure(
    a: WeightVector,
    dist: DiscreteDist,
    taus: Sequence[Any],
    deltas: Sequence[Any],
    rank_cap: int = DEFAULT_RANK_CAP,
    depth: int = DEFAULT_DEPTH,
    exhaustive_budget: int = DEFAULT_EXHAUSTIVE_BUDGET,
    mc: Optional[MCConfig] = None,
    max_atoms: int = DEFAULT_MAX_ATOMS,
    mitm_threshold: int = DEFAULT_MITM_THRESHOLD,
) -> StructureReport:
    """
    Rank and outside-mass reports for the best K_1 product region.

    With all tau_j = delta_j = 0, log(tau_j/delta_j) is taken as 0 and p(1)
    is replaced by p(0). delta_j = 0 < tau_j makes the log term infinite and
    the reports vacuous.
    """
    taus, deltas = _check_tolerances(a, taus, deltas)
    p, q, flags, zero_branch = _k1_setup(a, dist, taus, deltas, mc, max_atoms, mitm_threshold)
    found = search_k1_region(a, deltas, rank_cap, depth, exhaustive_budget)
    terms, log_flags = _log_terms(q, taus, deltas)
    flags.extend(log_flags)

    finite = all(math.isfinite(t) for t in terms)
    rank_rhs = sum(terms) if finite else None
    mass_rhs = sum(t ** 3 for t in terms) if finite else None
    params = {"taus": taus, "deltas": deltas, "rank_cap": rank_cap, "n": a.n, "d": a.d}
    rank_report = BoundReport.build(InequalityId.K1_STRUCTURE, found.region.rank, rank_rhs, params,
                                    flags=list(flags), extras={"clause": "rank", "terms": terms})
    mass_report = BoundReport.build(InequalityId.K1_STRUCTURE, p * found.outside, mass_rhs, params,
                                    flags=list(flags), extras={"clause": "mass", "p": p})
    return StructureReport(
        region=found.region,
        rank=found.region.rank,
        outside_mass=found.outside,
        p=p,
        q=q,
        rank_report=rank_report,
        mass_report=mass_report,
        flags=flags,
        extras={"p_threshold": 0 if zero_branch else 1, "history": found.history},
    )


def verify_k1_log_n(
    a: WeightVector,
    dist: DiscreteDist,
    taus: Sequence[Any],
    deltas: Sequence[Any],
    A: float,
    B: float,
    rank_cap: int = DEFAULT_RANK_CAP,
    depth: int = DEFAULT_DEPTH,
    exhaustive_budget: int = DEFAULT_EXHAUSTIVE_BUDGET,
    mc: Optional[MCConfig] = None,
    max_atoms: int = DEFAULT_MAX_ATOMS,
    mitm_threshold: int = DEFAULT_MITM_THRESHOLD,
) -> StructureReport:
    """
    The K_1 search against d((A+B) log n + 1) and its cube.

    Hypotheses tau_j/delta_j <= n^B and q_j >= n^{-A} are flagged per
    coordinate. The extras carry the count of entries implied by the outside
    mass (n - M*{outside}/2) next to an exact recount of entries inside the
    region.
    """
    taus, deltas = _check_tolerances(a, taus, deltas)
    p, q, flags, zero_branch = _k1_setup(a, dist, taus, deltas, mc, max_atoms, mitm_threshold)
    n, d = a.n, a.d
    for j, (qj, t, dl) in enumerate(zip(q, taus, deltas), start=1):
        if qj < n ** (-A):
            flags.append(f"q-hypothesis-failed:{j}")
        if t > 0 and (dl == 0 or t / dl > n ** B):
            flags.append(f"ratio-hypothesis-failed:{j}")

    found = search_k1_region(a, deltas, rank_cap, depth, exhaustive_budget)
    rhs = d * ((A + B) * math.log(n) + 1)
    params = {"taus": taus, "deltas": deltas, "A": A, "B": B, "rank_cap": rank_cap, "n": n, "d": d}

    implied_count = n - found.outside / 2
    inside = coverage(a, found.region, 0).covered_count
    missing = n - inside
    log_cube = math.log(n) ** 3
    extras: Dict[str, Any] = {
        "implied_count": implied_count,
        "exact_count": inside,
        "consequence_ratio": missing / log_cube if log_cube > 0 else None,
        "p_threshold": 0 if zero_branch else 1,
        "history": found.history,
    }
    rank_report = BoundReport.build(InequalityId.K1_LOG_N, found.region.rank, rhs, params,
                                    flags=list(flags), extras={"clause": "rank"})
    mass_report = BoundReport.build(InequalityId.K1_LOG_N, p * found.outside, rhs ** 3, params,
                                    flags=list(flags), extras={"clause": "mass", "p": p})
    return StructureReport(
        region=found.region,
        rank=found.region.rank,
        outside_mass=found.outside,
        p=p,
        q=q,
        rank_report=rank_report,
        mass_report=mass_report,
        flags=flags,
        extras=extras,
    )

"""
smallball: the smoothing law H^lambda

H^lambda is the symmetric compound Poisson law with Levy measure
(lambda/4) * M*, M* = sum_k (E_{a_k} + E_{-a_k}). Equivalently
S = sum_k (N_k+ - N_k-) a_k with all N_k+-, N_k- independent Poisson(lambda/4),
so each jump difference is Skellam(lambda/4, lambda/4) and the characteristic
function is exp(-(lambda/2) * sum_k (1 - cos<t, a_k>)).

The module evaluates that characteristic function, bounds Q(H^lambda, delta)
through the Esseen integral, samples H^lambda, computes the atom H^lambda{0}
and assembles the smoothing inequalities
    Q(F_a, tau) <= c1(d) (1 + floor*(kappa/delta))^d Q(H^{p(tau/kappa)}, delta)
    Q(F_a, 0)   <= c1(d) H^{p(0)}{0}
where floor*(x) is the largest integer strictly below x.
"""

import logging
import math
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy import integrate
from scipy.stats import skellam

from smallball.concentration import (
    Sampler,
    joint_q_at_zero,
    q_exact,
    q_monte_carlo,
    q_weighted_sum,
)
from smallball.dist import DEFAULT_MAX_ATOMS, DEFAULT_MITM_THRESHOLD, symmetrize, tail_mass, weighted_sum_law
from smallball.exceptions import AtomBudgetExceeded, InvalidParameterError, QuadratureError
from smallball.models.concentration import MCConfig, Method
from smallball.models.dist import DiscreteDist, WeightVector
from smallball.models.infdiv import AtomMassResult, SmoothingEstimate, SmoothingLaw
from smallball.models.reports import BoundReport, InequalityId
from smallball.utils import as_point, derive_seed, lcm_many, parse_real, strict_floor

logger = logging.getLogger(__name__)

DEFAULT_ESSEEN_CONSTANT = 2.0
DEFAULT_ZERO_MASS_TOL = 1e-10
DEFAULT_ZERO_MASS_ATOMS = 200_000
QUAD_LIMIT = 500
MAX_BREAKPOINTS = 100
ZERO_SNAP_RELATIVE = 1e-9
GAUSS_NODES = 32
MAX_GAUSS_NODES = 512
BLOCK_VALUES = 4_000_000


def _coefficients(law: SmoothingLaw) -> np.ndarray:
    return np.array([[float(x) for x in e] for e in law.weights.entries])


def h_cf(law: SmoothingLaw, t: Any) -> float:
    """Characteristic function of H^lambda at t (a scalar when d == 1, else a d-vector)."""
    t = np.array([float(x) for x in as_point(t)])
    if len(t) != law.d:
        raise InvalidParameterError(f"t must have {law.d} coordinates")
    phases = _coefficients(law) @ t
    return math.exp(-float(law.intensity) / 2 * float(np.sum(1 - np.cos(phases))))


def _periodic_integral(coefficients: np.ndarray, half: float, upper: float) -> float:
    """
    Integral of the cf over [0, upper] as a sum over periods of the fastest summand.

    Each period gets a Gauss-Legendre rule; the node count doubles until two
    successive rules agree.
    """
    period = 2 * math.pi / float(np.abs(coefficients).max())
    edges = np.arange(0.0, upper, period)
    widths = np.minimum(edges + period, upper) - edges
    previous = None
    nodes = GAUSS_NODES
    while nodes <= MAX_GAUSS_NODES:
        x, w = np.polynomial.legendre.leggauss(nodes)
        total = 0.0
        block = max(1, BLOCK_VALUES // (nodes * len(coefficients)))
        for start in range(0, len(edges), block):
            lo, wd = edges[start:start + block], widths[start:start + block]
            t = lo[:, None] + (x[None, :] + 1) * wd[:, None] / 2
            values = np.exp(-half * (1 - np.cos(t[:, :, None] * coefficients)).sum(axis=-1))
            total += float((values @ w * wd / 2).sum())
        if previous is not None and abs(total - previous) <= 1e-9 * max(abs(total), 1e-300):
            return total
        previous = total
        nodes *= 2
    raise QuadratureError(f"Esseen integral did not settle over {len(edges)} periods")


def esseen_integral(law: SmoothingLaw, delta: Any) -> float:
    """
    I = delta * integral over |t| <= 1/delta of the characteristic function.

    The integrand is even, positive and smooth. Short ranges go to adaptive
    quadrature on [0, 1/delta] with breakpoints at the periods 2*pi*j/|a_k|;
    ranges covering more than MAX_BREAKPOINTS periods of the fastest summand
    are integrated period by period.

    Raises:
        InvalidParameterError: If d != 1 or delta <= 0
        QuadratureError: If the integral does not converge
    """
    if law.d != 1:
        raise InvalidParameterError("the Esseen integral is one-dimensional")
    delta = float(delta)
    if delta <= 0:
        raise InvalidParameterError(f"delta must be positive, got {delta}")
    if law.intensity == 0:
        return 2.0

    coefficients = _coefficients(law)[:, 0]
    coefficients = coefficients[coefficients != 0]
    half = float(law.intensity) / 2
    upper = 1 / delta
    if len(coefficients) == 0:
        return 2.0
    if upper * float(np.abs(coefficients).max()) / (2 * math.pi) > MAX_BREAKPOINTS:
        return 2 * delta * _periodic_integral(coefficients, half, upper)

    def integrand(t: float) -> float:
        return math.exp(-half * float(np.sum(1 - np.cos(t * coefficients))))

    breakpoints: List[float] = []
    for c in sorted({abs(c) for c in coefficients}):
        period = 2 * math.pi / c
        breakpoints.extend(period * j for j in range(1, int(upper / period) + 1) if period * j < upper)
    breakpoints = sorted(set(breakpoints))[:MAX_BREAKPOINTS]

    result = integrate.quad(integrand, 0.0, upper, limit=QUAD_LIMIT, epsabs=1e-11, epsrel=1e-10,
                            points=breakpoints or None, full_output=1)
    if len(result) > 3:
        raise QuadratureError(f"Esseen integral did not converge: {result[3]}")
    return 2 * delta * result[0]


def esseen_bound(law: SmoothingLaw, delta: Any, constant: float = DEFAULT_ESSEEN_CONSTANT) -> float:
    """Upper estimate min(1, C_E * I) of Q(H^lambda, delta)."""
    return min(1.0, constant * esseen_integral(law, delta))


def _jump_differences(law: SmoothingLaw, rng: np.random.Generator, size: int) -> np.ndarray:
    rate = law.jump_rate
    shape = (size, law.weights.n)
    return rng.poisson(rate, size=shape) - rng.poisson(rate, size=shape)


def sample_h_batch(law: SmoothingLaw, size: int, rng: np.random.Generator) -> np.ndarray:
    """`size` draws of H^lambda as a (size, d) array."""
    return _jump_differences(law, rng, size) @ _coefficients(law)


def sample_h(law: SmoothingLaw, seed: int) -> Tuple[float, ...]:
    """One draw of H^lambda; deterministic given the seed."""
    rng = np.random.default_rng(seed)
    return tuple(float(v) for v in sample_h_batch(law, 1, rng)[0])


def smoothing_sampler(law: SmoothingLaw) -> Sampler:
    """Sampler for H^lambda in the form q_monte_carlo expects."""
    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        samples = sample_h_batch(law, size, rng)
        return samples[:, 0] if law.d == 1 else samples

    return draw


def _jump_groups(a: WeightVector) -> List[Tuple[Tuple[Any, ...], int]]:
    # D * b and D * (-b) have the same law, and a sum of m independent
    # Skellam(mu, mu) is Skellam(m*mu, m*mu), so equal directions are merged
    groups: Dict[Tuple[Any, ...], int] = {}
    for entry in a.entries:
        if all(x == 0 for x in entry):
            continue
        lead = next(x for x in entry if x != 0)
        key = tuple(entry) if lead > 0 else tuple(-x for x in entry)
        groups[key] = groups.get(key, 0) + 1
    return sorted(groups.items())


def _truncation_radius(rate: float, tail: float) -> int:
    """Smallest R with P(|D| > R) < tail for D ~ Skellam(rate, rate)."""
    guess = skellam.isf(tail / 2, rate, rate)
    radius = int(guess) if math.isfinite(guess) and guess > 0 else 0
    while 2 * skellam.sf(radius, rate, rate) >= tail:
        radius += 1
    return radius


def _snap_tolerance(law: SmoothingLaw) -> Optional[float]:
    """Grid spacing under which float sums count as equal; None for exact weights."""
    entries = law.weights.entries
    if all(isinstance(x, (int, Fraction)) for e in entries for x in e):
        return None
    return ZERO_SNAP_RELATIVE * float(np.abs(_coefficients(law)).max())


def _zero_mass_enumerated(law: SmoothingLaw, tol: float, max_atoms: int) -> Tuple[float, float]:
    groups = _jump_groups(law.weights)
    share = tol / len(groups)
    atol = _snap_tolerance(law)

    def key(point: Tuple[Any, ...]) -> Tuple[Any, ...]:
        if atol is None:
            return point
        return tuple(int(round(float(x) / atol)) for x in point)

    zero = tuple(0 for _ in range(law.d))
    # grid key -> (representative point, mass)
    table: Dict[Tuple[Any, ...], Tuple[Tuple[Any, ...], float]] = {key(zero): (zero, 1.0)}
    dropped = 0.0
    for direction, multiplicity in groups:
        rate = law.jump_rate * multiplicity
        radius = _truncation_radius(rate, share)
        if len(table) * (2 * radius + 1) > max_atoms:
            raise AtomBudgetExceeded(len(table) * (2 * radius + 1), max_atoms)
        ks = range(-radius, radius + 1)
        pmf = skellam.pmf(np.arange(-radius, radius + 1), rate, rate)
        dropped += 2 * float(skellam.sf(radius, rate, rate))

        grown: Dict[Tuple[Any, ...], Tuple[Tuple[Any, ...], float]] = {}
        for point, w in table.values():
            for k, p in zip(ks, pmf):
                target = tuple(x + k * b for x, b in zip(point, direction))
                slot = key(target)
                rep, mass = grown.get(slot, (target, 0.0))
                grown[slot] = (rep, mass + w * float(p))
        table = grown
    return table.get(key(zero), (zero, 0.0))[1], dropped


def _zero_mass_monte_carlo(law: SmoothingLaw, cfg: MCConfig) -> Tuple[float, float]:
    entries = law.weights.entries
    atol = _snap_tolerance(law)
    exact = atol is None
    if exact:
        scale = lcm_many([Fraction(x).denominator for e in entries for x in e])
        coefficients = np.array([[int(x * scale) for x in e] for e in entries], dtype=np.int64)
    else:
        coefficients = _coefficients(law)

    base, extra = divmod(cfg.sample_count, cfg.substreams)
    zeros = 0
    for i in range(cfg.substreams):
        size = base + (1 if i < extra else 0)
        if size == 0:
            continue
        rng = np.random.default_rng(derive_seed(cfg.seed, i))
        sums = _jump_differences(law, rng, size) @ coefficients
        if exact:
            zeros += int(np.all(sums == 0, axis=1).sum())
        else:
            zeros += int(np.all(np.rint(sums / atol) == 0, axis=1).sum())

    value = zeros / cfg.sample_count
    return value, math.sqrt(value * (1 - value) / cfg.sample_count)


def mass_at_zero(
    law: SmoothingLaw,
    tol: float = DEFAULT_ZERO_MASS_TOL,
    max_atoms: int = DEFAULT_ZERO_MASS_ATOMS,
    mc: Optional[MCConfig] = None,
    allow_mc: bool = True,
) -> AtomMassResult:
    """
    H^lambda{0}, the atom of the smoothing law at the origin.

    Each merged jump direction contributes a Skellam difference truncated at a
    radius whose two-sided tail is below tol / (number of directions); the
    truncated laws are convolved and the mass landing on 0 is read off. The
    reported error bounds the total truncated mass, so the true value lies in
    [value, value + error]. Float weights are compared on a grid of spacing
    1e-9 * max|a_k|, so sums such as 0.1 + 0.2 - 0.3 land on the origin.
    When the enumeration outgrows `max_atoms` the value is estimated by Monte
    Carlo with the same zero test and the error is the binomial standard error.

    Raises:
        InvalidParameterError: If tol <= 0
        AtomBudgetExceeded: If enumeration is too large and allow_mc is False
    """
    if tol <= 0:
        raise InvalidParameterError(f"tol must be positive, got {tol}")
    params: Dict[str, Any] = {"lambda": law.intensity, "tol": tol, "n": law.weights.n, "d": law.d}
    if law.intensity == 0:
        return AtomMassResult(value=1.0, method=Method.EXACT, error=0.0, params=params)

    try:
        value, dropped = _zero_mass_enumerated(law, tol, max_atoms)
        return AtomMassResult(value=min(1.0, value), method=Method.EXACT, error=dropped, params=params)
    except AtomBudgetExceeded as e:
        if not allow_mc:
            raise
        logger.warning("%s; estimating H{0} by Monte Carlo", e)

    cfg = mc or MCConfig()
    value, stderr = _zero_mass_monte_carlo(law, cfg)
    params.update({"sample_count": cfg.sample_count, "seed": cfg.seed})
    return AtomMassResult(value=value, method=Method.MONTE_CARLO, error=stderr, params=params)


def q_h_estimate(
    law: SmoothingLaw,
    delta: Any,
    mc: Optional[MCConfig] = None,
    esseen_constant: float = DEFAULT_ESSEEN_CONSTANT,
) -> SmoothingEstimate:
    """
    Upper estimate of Q(H^lambda, delta): min(Esseen bound, MC + 3 stderr).

    Monte Carlo is skipped when `mc` is None, unless the Esseen integral fails
    to converge; the estimate then rests on sampling alone (default settings
    when `mc` is None) and its source says so.
    """
    delta = parse_real(delta)
    try:
        integral: Optional[float] = esseen_integral(law, delta)
    except QuadratureError as e:
        logger.warning("%s; estimating Q(H, %s) by Monte Carlo", e, delta)
        integral = None

    estimate = None
    bound = None if integral is None else min(1.0, esseen_constant * integral)
    value, source = (1.0, "monte-carlo") if bound is None else (bound, "esseen")
    if mc is not None or bound is None:
        estimate = q_monte_carlo(smoothing_sampler(law), delta, mc or MCConfig())
        upper = min(1.0, float(estimate.value) + 3 * estimate.stderr)
        if bound is None or upper < bound:
            value, source = upper, "monte-carlo"

    return SmoothingEstimate(delta=delta, esseen_integral=integral, esseen_bound=bound,
                             monte_carlo=estimate, value=value, source=source)


def smoothing_bound(
    a: WeightVector,
    dist: DiscreteDist,
    tau: Any,
    kappa: Any,
    delta: Any,
    mc: Optional[MCConfig] = None,
    esseen_constant: float = DEFAULT_ESSEEN_CONSTANT,
    max_atoms: int = DEFAULT_MAX_ATOMS,
    mitm_threshold: int = DEFAULT_MITM_THRESHOLD,
) -> BoundReport:
    """
    Compare Q(F_a, tau) with (1 + floor*(kappa/delta))^d Q(H^{p(tau/kappa)}, delta).

    The right-hand side uses q_h_estimate; the report records the implied
    constant c1. A zero p(tau/kappa) makes the bound vacuous.

    Raises:
        InvalidParameterError: If kappa <= 0, delta <= 0, tau < 0 or d != 1
    """
    tau, kappa, delta = parse_real(tau), parse_real(kappa), parse_real(delta)
    if kappa <= 0 or delta <= 0:
        raise InvalidParameterError("kappa and delta must be positive")
    if tau < 0:
        raise InvalidParameterError(f"tau must be non-negative, got {tau}")
    if a.d != 1:
        raise InvalidParameterError("the smoothing bound is evaluated for d == 1")

    p = tail_mass(symmetrize(dist), tau / kappa)
    factor = (1 + strict_floor(kappa / delta)) ** a.d
    lhs_result = q_weighted_sum(a, dist, tau, mc, max_atoms, mitm_threshold)
    lhs = lhs_result.value

    params = {"tau": tau, "kappa": kappa, "delta": delta, "n": a.n, "d": a.d}
    extras: Dict[str, Any] = {"p": p, "factor": factor, "lhs_method": lhs_result.method,
                             "lhs_stderr": lhs_result.stderr}
    if p == 0:
        return BoundReport.build(InequalityId.SMOOTHING, lhs, None, params, flags=["p-zero"], extras=extras)

    estimate = q_h_estimate(SmoothingLaw(weights=a, intensity=p), delta, mc, esseen_constant)
    extras.update({
        "esseen_integral": estimate.esseen_integral,
        "esseen_bound": estimate.esseen_bound,
        "q_h": estimate.value,
        "rhs_source": estimate.source,
    })
    if estimate.monte_carlo is not None:
        extras.update({"mc_value": estimate.monte_carlo.value, "mc_stderr": estimate.monte_carlo.stderr})
    return BoundReport.build(InequalityId.SMOOTHING, lhs, factor * estimate.value, params, extras=extras)


def smoothing_atom_bound(
    a: WeightVector,
    dist: DiscreteDist,
    tol: float = DEFAULT_ZERO_MASS_TOL,
    mc: Optional[MCConfig] = None,
    max_atoms: int = DEFAULT_MAX_ATOMS,
) -> BoundReport:
    """
    Compare Q(F_a, 0), the heaviest atom of F_a, with H^{p(0)}{0}.

    Works in any dimension: the left-hand side comes from the exact joint law.
    """
    p = tail_mass(symmetrize(dist), 0)
    if a.d == 1:
        lhs = q_exact(weighted_sum_law(a, dist, max_atoms), 0).value
    else:
        lhs = joint_q_at_zero(a, dist, max_atoms).value

    params = {"tol": tol, "n": a.n, "d": a.d}
    extras: Dict[str, Any] = {"p": p}
    if p == 0:
        return BoundReport.build(InequalityId.SMOOTHING_ATOM, lhs, None, params, flags=["p-zero"], extras=extras)

    atom = mass_at_zero(SmoothingLaw(weights=a, intensity=p), tol, mc=mc)
    extras.update({"rhs_method": atom.method, "rhs_error": atom.error})
    return BoundReport.build(InequalityId.SMOOTHING_ATOM, lhs, atom.value, params, extras=extras)

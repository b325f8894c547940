"""
smallball: the concentration function Q(F, lambda)

Q(F, lambda) = sup_x P(Y in x + lambda*B), B the closed centered ball of
radius 1/2. In one dimension x + lambda*B is the closed interval
[x - lambda/2, x + lambda/2], and for an atomic law the supremum is attained
with the left end of the window on an atom, which is what the exact sliding
window uses.
"""

import logging
import math
from fractions import Fraction
from functools import reduce
from typing import Any, Callable, List, Optional

import numpy as np

from smallball.dist import (
    DEFAULT_MAX_ATOMS,
    DEFAULT_MITM_THRESHOLD,
    project,
    vector_sum_law,
    weighted_sum_law,
)
from smallball.exceptions import AtomBudgetExceeded, DegenerateEstimateError, InvalidParameterError
from smallball.models.concentration import ConcentrationResult, CoordinateBounds, MCConfig, Method
from smallball.models.dist import DiscreteDist, WeightVector
from smallball.models.reports import BoundReport, InequalityId
from smallball.utils import derive_seed, parse_real

logger = logging.getLogger(__name__)

Sampler = Callable[[np.random.Generator, int], np.ndarray]
"""Draws `size` samples with the given generator: shape (size,) or (size, d)."""

MEAN_SHIFT_ROUNDS = 10


def _check_lambda(lam: Any) -> Any:
    lam = parse_real(lam)
    if lam < 0:
        raise InvalidParameterError(f"lambda must be non-negative, got {lam}")
    return lam


def q_exact(F: DiscreteDist, lam: Any) -> ConcentrationResult:
    """
    Exact Q(F, lambda) for a one-dimensional discrete law.

    Two pointers sweep the sorted atoms; the window [x_i, x_i + lambda]
    always starts at an atom. The value is an exact rational.

    Raises:
        InvalidParameterError: If lambda is negative
    """
    lam = _check_lambda(lam)
    atoms, weights = F.atoms, F.weights

    best = Fraction(0)
    best_left = 0
    window = Fraction(0)
    j = 0
    for i in range(len(atoms)):
        while j < len(atoms) and atoms[j] - atoms[i] <= lam:
            window += weights[j]
            j += 1
        if window > best:
            best, best_left = window, i
        window -= weights[i]

    center = atoms[best_left] + lam / 2
    return ConcentrationResult(value=best, method=Method.EXACT, optimal_center=(center,),
                               params={"lambda": lam})


def q_brute_force(F: DiscreteDist, lam: Any) -> Fraction:
    """Oracle for q_exact: tries every atom as window center, left end and right end."""
    lam = _check_lambda(lam)
    half = lam / 2
    best = Fraction(0)
    for x in F.atoms:
        for c in (x - half, x, x + half):
            mass = sum((w for y, w in F.items() if c - half <= y <= c + half), Fraction(0))
            best = max(best, mass)
    return best


def discrete_sampler(F: DiscreteDist) -> Sampler:
    """Sampler for a one-dimensional discrete law."""
    atoms = np.array([float(x) for x in F.atoms])
    probs = np.array([float(w) for w in F.weights])
    probs = probs / probs.sum()

    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.choice(atoms, size=size, p=probs)

    return draw


def weighted_sum_sampler(a: WeightVector, dist: DiscreteDist) -> Sampler:
    """Sampler for S_a = sum_k X_k a_k; one-dimensional output when d == 1."""
    atoms = np.array([float(x) for x in dist.atoms])
    probs = np.array([float(w) for w in dist.weights])
    probs = probs / probs.sum()
    coefficients = np.array([[float(x) for x in e] for e in a.entries])

    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        X = rng.choice(atoms, size=(size, a.n), p=probs)
        S = X @ coefficients
        return S[:, 0] if a.d == 1 else S

    return draw


def uniform_sampler(low: float = 0.0, high: float = 1.0, d: int = 1) -> Sampler:
    """Sampler for the uniform law on [low, high]^d."""
    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        if d == 1:
            return rng.uniform(low, high, size=size)
        return rng.uniform(low, high, size=(size, d))

    return draw


def point_sampler(x: float = 0.0) -> Sampler:
    """Sampler for a point mass."""
    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        return np.full(size, float(x))

    return draw


def draw_samples(sampler: Sampler, cfg: MCConfig) -> np.ndarray:
    """Split the sample budget across seeded substreams and concatenate them in substream order."""
    base, extra = divmod(cfg.sample_count, cfg.substreams)
    chunks = []
    for i in range(cfg.substreams):
        size = base + (1 if i < extra else 0)
        if size == 0:
            continue
        rng = np.random.default_rng(derive_seed(cfg.seed, i))
        chunks.append(np.asarray(sampler(rng, size), dtype=float))
    return np.concatenate(chunks, axis=0)


def _most_frequent(samples: np.ndarray) -> tuple:
    if samples.ndim == 1:
        values, counts = np.unique(samples, return_counts=True)
        k = int(counts.argmax())
        return int(counts[k]), (float(values[k]),)
    values, counts = np.unique(samples, axis=0, return_counts=True)
    k = int(counts.argmax())
    return int(counts[k]), tuple(float(v) for v in values[k])


def _window_1d(samples: np.ndarray, lam: float) -> tuple:
    xs = np.sort(samples)
    right = np.searchsorted(xs, xs + lam, side="right")
    counts = right - np.arange(len(xs))
    k = int(counts.argmax())
    return int(counts[k]), (float(xs[k] + lam / 2),)


def _ball_counts(samples: np.ndarray, centers: np.ndarray, radius: float) -> np.ndarray:
    counts = np.empty(len(centers), dtype=np.int64)
    r2 = radius * radius
    block = max(1, 4_000_000 // max(1, samples.size))
    for start in range(0, len(centers), block):
        c = centers[start:start + block]
        d2 = ((samples[None, :, :] - c[:, None, :]) ** 2).sum(axis=-1)
        counts[start:start + block] = (d2 <= r2).sum(axis=1)
    return counts


def _candidate_centers(samples: np.ndarray, resolution: int) -> np.ndarray:
    # distinct samples strided through the whole draw, plus the sample mean
    distinct = np.unique(samples, axis=0)
    if len(distinct) > resolution:
        picks = np.linspace(0, len(samples) - 1, num=max(1, resolution - 1)).astype(np.int64)
        distinct = np.unique(samples[picks], axis=0)
    return np.vstack([distinct, samples.mean(axis=0)[None, :]])


def _ball_nd(samples: np.ndarray, lam: float, resolution: int) -> tuple:
    radius = lam / 2
    centers = _candidate_centers(samples, resolution)
    counts = _ball_counts(samples, centers, radius)
    k = int(counts.argmax())
    best, center = int(counts[k]), centers[k]

    # mean-shift refinement of the best anchored center
    for _ in range(MEAN_SHIFT_ROUNDS):
        inside = samples[((samples - center) ** 2).sum(axis=1) <= radius * radius]
        shifted = inside.mean(axis=0)
        count = int(_ball_counts(samples, shifted[None, :], radius)[0])
        if count <= best:
            break
        best, center = count, shifted
    return best, tuple(float(v) for v in center)


def q_monte_carlo(sampler: Sampler, lam: Any, cfg: Optional[MCConfig] = None) -> ConcentrationResult:
    """
    Monte Carlo estimate of Q for a law given only through a sampler.

    One-dimensional samples are scanned with an exact sliding window over the
    sorted sample; in higher dimension candidate centers are up to
    `center_grid_resolution` distinct samples spread through the whole draw,
    plus the sample mean, and the best is refined by mean shift. The standard
    error is the binomial one. Bit-identical for a fixed seed.

    Raises:
        InvalidParameterError: If lambda is negative
        DegenerateEstimateError: If lambda == 0 and no two samples coincide
    """
    cfg = cfg or MCConfig()
    lam = float(_check_lambda(lam))
    samples = draw_samples(sampler, cfg)
    if samples.ndim == 2 and samples.shape[1] == 1:
        samples = samples[:, 0]
    N = len(samples)

    if lam == 0:
        count, center = _most_frequent(samples)
        if count == 1 and N > 1:
            raise DegenerateEstimateError("lambda = 0 and no repeated samples: the law looks continuous")
    elif samples.ndim == 1:
        count, center = _window_1d(samples, lam)
    else:
        count, center = _ball_nd(samples, lam, cfg.center_grid_resolution)

    value = count / N
    stderr = math.sqrt(value * (1 - value) / N)
    logger.debug("MC estimate of Q at lambda=%s: %s +- %s (N=%d)", lam, value, stderr, N)
    return ConcentrationResult(
        value=value,
        method=Method.MONTE_CARLO,
        stderr=stderr,
        optimal_center=center,
        params={"lambda": lam, "sample_count": N, "seed": cfg.seed, "substreams": cfg.substreams},
    )


def q_window_regularity(F: DiscreteDist, lam: Any, m: int) -> BoundReport:
    """
    Check Q(F, m*lambda) <= m * Q(F, lambda) exactly.

    The report's right-hand side is Q(F, lambda), so the implied constant is
    at most m whenever the covering property holds.
    """
    if m < 1:
        raise InvalidParameterError(f"m must be a positive integer, got {m}")
    lam = _check_lambda(lam)
    lhs = q_exact(F, m * lam).value
    rhs = q_exact(F, lam).value
    holds = lhs <= m * rhs
    return BoundReport.build(
        InequalityId.WINDOW_REGULARITY,
        lhs,
        rhs,
        params={"lambda": lam, "m": m},
        flags=[] if holds else ["window-regularity-violated"],
        extras={"bound": m * rhs, "holds": holds},
    )


def q_weighted_sum(
    a: WeightVector,
    dist: DiscreteDist,
    tau: Any,
    mc: Optional[MCConfig] = None,
    max_atoms: int = DEFAULT_MAX_ATOMS,
    mitm_threshold: int = DEFAULT_MITM_THRESHOLD,
) -> ConcentrationResult:
    """Q(F_a, tau) for d == 1: exact when the law fits the atom budget, Monte Carlo otherwise."""
    try:
        return q_exact(weighted_sum_law(a, dist, max_atoms, mitm_threshold), tau)
    except AtomBudgetExceeded as e:
        logger.warning("%s; estimating Q by Monte Carlo", e)
        return q_monte_carlo(weighted_sum_sampler(a, dist), tau, mc)


def joint_q_at_zero(a: WeightVector, dist: DiscreteDist, max_atoms: int = DEFAULT_MAX_ATOMS) -> ConcentrationResult:
    """Exact Q(F_a, 0) in any dimension: the heaviest atom of the joint law."""
    law = vector_sum_law(a, dist, max_atoms)
    k = max(range(len(law.masses)), key=lambda i: law.masses[i])
    return ConcentrationResult(value=law.masses[k], method=Method.EXACT, optimal_center=law.atoms[k],
                               params={"lambda": Fraction(0)})


def q_coordinate_bounds(
    a: WeightVector,
    dist: DiscreteDist,
    tau: Any,
    mc: Optional[MCConfig] = None,
    max_atoms: int = DEFAULT_MAX_ATOMS,
    mitm_threshold: int = DEFAULT_MITM_THRESHOLD,
) -> CoordinateBounds:
    """
    Per-coordinate values q_j = Q(F_a^(j), tau) with their minimum and product.

    The product is an exact upper bound for Q(F_a, tau) only when the
    coordinates of S_a are independent (every a_k has at most one non-zero
    coordinate); otherwise it is reported without being asserted. The joint
    value is computed exactly at tau = 0, or by Monte Carlo when `mc` is given.
    """
    tau = _check_lambda(tau)
    flags: List[str] = []
    q: List[ConcentrationResult] = []
    zero: List[bool] = []

    for j in range(1, a.d + 1):
        proj = project(a, j)
        if proj.is_zero:
            flags.append(f"zero-projection:{j}")
            zero.append(True)
            q.append(ConcentrationResult(value=Fraction(1), method=Method.EXACT, optimal_center=(Fraction(0),),
                                         params={"lambda": tau}))
            continue
        zero.append(False)
        q.append(q_weighted_sum(proj, dist, tau, mc, max_atoms, mitm_threshold))

    values = [r.value for r in q]
    min_q = min(values)
    product_q = reduce(lambda x, y: x * y, values)
    independent = a.has_single_coordinate_entries()

    joint: Optional[ConcentrationResult] = None
    if a.d == 1:
        joint = q[0]
    elif tau == 0:
        try:
            joint = joint_q_at_zero(a, dist, max_atoms)
        except AtomBudgetExceeded as e:
            logger.warning("%s; joint value not computed", e)
    elif mc is not None:
        joint = q_monte_carlo(weighted_sum_sampler(a, dist), tau, mc)

    product_report = None
    if joint is not None:
        margin = 3 * joint.stderr
        if any(v < joint.value - margin for v in values):
            flags.append("coordinate-below-joint")
        if not independent:
            flags.append("dependent-coordinates")
        elif joint.value - margin > product_q:
            flags.append("product-upper-bound-violated")
        product_report = BoundReport.build(
            InequalityId.COORDINATE_PRODUCT,
            joint.value,
            product_q,
            params={"tau": tau, "d": a.d, "n": a.n},
            flags=[f for f in flags if not f.startswith("zero-projection")],
            extras={"min_q": min_q, "independent": independent, "joint_method": joint.method},
        )

    return CoordinateBounds(
        tau=tau,
        q=q,
        zero_projection=zero,
        min_q=min_q,
        product_q=product_q,
        independent=independent,
        joint=joint,
        product_report=product_report,
        flags=flags,
    )

"""
smallball: probability-law primitives

Exact discrete laws with rational weights, the symmetrization
G = L(X1 - X2), the tail mass p(delta), the spread condition, exact laws of
weighted sums S_a = sum_k X_k a_k, coordinate projections and the symmetric
base measure M* = sum_k (E_{a_k} + E_{-a_k}).

Atoms are coalesced by exact equality only; no epsilon merging is done
anywhere, since merging would change Q at lambda = 0.
"""

import logging
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Tuple, Union

from smallball.exceptions import AtomBudgetExceeded, InvalidDistributionError, InvalidParameterError
from smallball.models.dist import AtomicMeasure, DiscreteDist, WeightVector
from smallball.utils import load_json, parse_rational, parse_real

logger = logging.getLogger(__name__)

DEFAULT_MAX_ATOMS = 1_000_000
DEFAULT_MITM_THRESHOLD = 16

NAMED_LAWS: Dict[str, Tuple[List[Any], List[str]]] = {
    "rademacher": ([-1, 1], ["1/2", "1/2"]),
    "bernoulli": ([0, 1], ["1/2", "1/2"]),
    "lazy": ([-1, 0, 1], ["1/4", "1/2", "1/4"]),
    "uniform3": ([0, 1, 2], ["1/3", "1/3", "1/3"]),
    "point": ([0], ["1"]),
}


def _from_table(table: Dict[Any, Fraction]) -> DiscreteDist:
    atoms = sorted(table)
    return DiscreteDist.trusted(atoms, [table[x] for x in atoms])


def make_discrete(atoms: Sequence[Any], weights: Sequence[Any]) -> DiscreteDist:
    """
    Build a discrete law, coalescing equal atoms and sorting.

    Args:
        atoms: Support points (ints, Fractions, "p/q" strings or floats)
        weights: Positive rationals summing to exactly 1

    Raises:
        InvalidDistributionError: On empty input, length mismatch, non-positive
            weights or weights that do not sum to 1 (never renormalized)
    """
    if len(atoms) != len(weights):
        raise InvalidDistributionError("atoms and weights must have the same length")
    if not atoms:
        raise InvalidDistributionError("a distribution needs at least one atom")

    table: Dict[Any, Fraction] = {}
    for raw_x, raw_w in zip(atoms, weights):
        try:
            x = parse_real(raw_x)
            w = parse_rational(raw_w)
        except ValueError as e:
            raise InvalidDistributionError(str(e)) from e
        if w <= 0:
            raise InvalidDistributionError(f"weight {w} at atom {x} is not positive")
        table[x] = table.get(x, Fraction(0)) + w

    total = sum(table.values(), Fraction(0))
    if total != 1:
        raise InvalidDistributionError(f"weights sum to {total}, not 1")
    return _from_table(table)


def named_law(name: str) -> DiscreteDist:
    """One of the built-in laws: rademacher, bernoulli, lazy, uniform3, point."""
    try:
        atoms, weights = NAMED_LAWS[name]
    except KeyError:
        raise InvalidDistributionError(f"unknown named law {name!r}") from None
    return make_discrete(atoms, weights)


def load_distribution(source: Union[str, Path]) -> DiscreteDist:
    """Load a law from a built-in name or a JSON file {"atoms": [...], "weights": ["p/q", ...]}."""
    name = str(source)
    if name in NAMED_LAWS:
        return named_law(name)
    raw = load_json(source)
    if not isinstance(raw, dict) or "atoms" not in raw or "weights" not in raw:
        raise InvalidDistributionError(f"{source}: expected keys 'atoms' and 'weights'")
    return make_discrete(raw["atoms"], raw["weights"])


def load_weights(source: Union[str, Path]) -> WeightVector:
    """Load a weight vector from a JSON file {"d": 1, "entries": [...]}."""
    return WeightVector.model_validate(load_json(source))


def point_mass(x: Any = 0) -> DiscreteDist:
    return DiscreteDist.trusted([parse_real(x)], [Fraction(1)])


def reflect(dist: DiscreteDist) -> DiscreteDist:
    """Law of -X."""
    return _from_table({-x: w for x, w in dist.items()})


def scale(dist: DiscreteDist, c: Any) -> DiscreteDist:
    """Law of c*X; c = 0 gives the point mass at 0."""
    if c == 0:
        return point_mass(0)
    return _from_table({x * c: w for x, w in dist.items()})


def convolve(f: DiscreteDist, g: DiscreteDist, max_atoms: int = DEFAULT_MAX_ATOMS) -> DiscreteDist:
    """
    Exact law of X + Y for independent X ~ f, Y ~ g.

    Raises:
        AtomBudgetExceeded: If the coalesced support grows past max_atoms
    """
    table: Dict[Any, Fraction] = {}
    for x, wx in f.items():
        for y, wy in g.items():
            s = x + y
            table[s] = table.get(s, Fraction(0)) + wx * wy
        if len(table) > max_atoms:
            raise AtomBudgetExceeded(len(table), max_atoms)
    return _from_table(table)


def symmetrize(dist: DiscreteDist) -> DiscreteDist:
    """G = L(X1 - X2): the law convolved with its reflection; symmetric about 0."""
    return convolve(dist, reflect(dist))


def tail_mass(G: DiscreteDist, delta: Any) -> Fraction:
    """
    p(delta) = G{z : |z| > delta}, the mass strictly outside [-delta, delta].

    Raises:
        InvalidParameterError: If delta is negative
    """
    if delta < 0:
        raise InvalidParameterError(f"delta must be non-negative, got {delta}")
    if not G.is_symmetric():
        logger.warning("tail_mass called on a non-symmetric law; computing anyway")
    return sum((w for x, w in G.items() if abs(x) > delta), Fraction(0))


def check_spread(G: DiscreteDist, c1: Any, c2: Any = math.inf, c3: Any = 0) -> bool:
    """
    True iff G{x : c1 < |x| < c2} >= c3.

    Raises:
        InvalidParameterError: If c1 >= c2, c1 < 0 or c3 < 0
    """
    if c1 < 0 or c3 < 0:
        raise InvalidParameterError("c1 and c3 must be non-negative")
    if c1 >= c2:
        raise InvalidParameterError(f"c1 ({c1}) must be smaller than c2 ({c2})")
    mass = sum((w for x, w in G.items() if c1 < abs(x) < c2), Fraction(0))
    return mass >= c3


def _subset_sum_table(coefficients: Sequence[Any], p0: Fraction, p1: Fraction,
                      max_atoms: int) -> Dict[Any, Fraction]:
    """Law of sum_{k in T} c_k where k joins T independently with probability p1."""
    table: Dict[Any, Fraction] = {0: Fraction(1)}
    for c in coefficients:
        grown: Dict[Any, Fraction] = {}
        for s, w in table.items():
            grown[s] = grown.get(s, Fraction(0)) + w * p0
            grown[s + c] = grown.get(s + c, Fraction(0)) + w * p1
        if len(grown) > max_atoms:
            raise AtomBudgetExceeded(len(grown), max_atoms)
        table = grown
    return table


def _two_point_law(coefficients: Sequence[Any], dist: DiscreteDist, max_atoms: int) -> DiscreteDist:
    # S = x0 * sum(a) + (x1 - x0) * T, T a random subset sum; halves are enumerated
    # separately and merged
    (x0, x1), (p0, p1) = dist.atoms, dist.weights
    half = len(coefficients) // 2
    left = _subset_sum_table(coefficients[:half], p0, p1, max_atoms)
    right = _subset_sum_table(coefficients[half:], p0, p1, max_atoms)
    logger.debug("meet-in-the-middle merge of %d x %d subset sums", len(left), len(right))

    shift = x0 * sum(coefficients)
    step = x1 - x0
    table: Dict[Any, Fraction] = {}
    for s, ws in left.items():
        for t, wt in right.items():
            atom = shift + step * (s + t)
            table[atom] = table.get(atom, Fraction(0)) + ws * wt
        if len(table) > max_atoms:
            raise AtomBudgetExceeded(len(table), max_atoms)
    return _from_table(table)


def weighted_sum_law(
    a: WeightVector,
    dist: DiscreteDist,
    max_atoms: int = DEFAULT_MAX_ATOMS,
    mitm_threshold: int = DEFAULT_MITM_THRESHOLD,
) -> DiscreteDist:
    """
    Exact law F_a of S_a = sum_k X_k a_k for a one-dimensional weight vector.

    Iterated convolution with atom coalescing; a two-atom law with more than
    mitm_threshold coefficients goes through a meet-in-the-middle merge of the
    subset-sum laws of both halves.

    Raises:
        InvalidParameterError: If a is not one-dimensional
        AtomBudgetExceeded: If the support outgrows max_atoms (use Monte Carlo)
    """
    if a.d != 1:
        raise InvalidParameterError("weighted_sum_law needs d == 1; project first")
    coefficients = a.scalars()
    if len(dist) == 2 and len(coefficients) > mitm_threshold:
        return _two_point_law(coefficients, dist, max_atoms)

    law = point_mass(0)
    for c in coefficients:
        law = convolve(law, scale(dist, c), max_atoms)
    return law


def vector_sum_law(a: WeightVector, dist: DiscreteDist, max_atoms: int = DEFAULT_MAX_ATOMS) -> AtomicMeasure:
    """Exact joint law of S_a in R^d, as a normalized atomic measure."""
    table: Dict[Tuple[Any, ...], Fraction] = {tuple(0 for _ in range(a.d)): Fraction(1)}
    for entry in a.entries:
        grown: Dict[Tuple[Any, ...], Fraction] = {}
        for s, w in table.items():
            for x, p in dist.items():
                point = tuple(si + x * ai for si, ai in zip(s, entry))
                grown[point] = grown.get(point, Fraction(0)) + w * p
        if len(grown) > max_atoms:
            raise AtomBudgetExceeded(len(grown), max_atoms)
        table = grown
    atoms = sorted(table)
    return AtomicMeasure(d=a.d, atoms=tuple(atoms), masses=tuple(table[x] for x in atoms))


def project(a: WeightVector, j: int) -> WeightVector:
    """
    Coordinate j (1-based) of every a_k, as a one-dimensional weight vector.

    The projection may vanish identically; check `is_zero` before using it.

    Raises:
        InvalidParameterError: If j is outside 1..d
    """
    if not 1 <= j <= a.d:
        raise InvalidParameterError(f"coordinate index {j} outside 1..{a.d}")
    return WeightVector.model_construct(d=1, entries=tuple((e[j - 1],) for e in a.entries))


def levy_base_measure(a: WeightVector) -> AtomicMeasure:
    """M* = sum_k (E_{a_k} + E_{-a_k}); symmetric, total mass 2n."""
    table: Dict[Tuple[Any, ...], Fraction] = {}
    for entry in a.entries:
        for point in (tuple(entry), tuple(-x for x in entry)):
            table[point] = table.get(point, Fraction(0)) + 1
    atoms = sorted(table)
    return AtomicMeasure(d=a.d, atoms=tuple(atoms), masses=tuple(table[x] for x in atoms), symmetric=True)


def measure_from_points(points: Iterable[Any], d: int = 1) -> AtomicMeasure:
    """Counting measure of a multiset of points (unit mass per occurrence)."""
    table: Dict[Tuple[Any, ...], Fraction] = {}
    for p in points:
        key = tuple(p) if isinstance(p, (list, tuple)) else (p,)
        table[key] = table.get(key, Fraction(0)) + 1
    atoms = sorted(table)
    return AtomicMeasure(d=d, atoms=tuple(atoms), masses=tuple(table[x] for x in atoms))

"""
smallball: GAP search engine

Finds a one-dimensional symmetric GAP of rank <= r and volume <= m that
leaves the least mass of a weighted point set outside its closed
tau-neighborhood. Used by beta (weights = a measure W) and by fit_gap
(unit weights, so the outside mass counts uncovered entries).

Candidate generators are |x_i| / k and |x_i - x_j| / k for k = 1..depth.
For every rank the limits run over the maximal integer vectors with
prod(2 L_j + 1) <= m; enlarging a limit never uncovers a point. A rank is
searched exhaustively over generator subsets when
comb(C, rank) * (number of limit vectors) fits the budget, otherwise by a
beam over the best solutions of the rank below, so the result is monotone
in the rank cap. The winner is tightened afterwards: each limit shrinks while
the outside mass stays the same.

Rational inputs are multiplied by a common denominator times lcm(1..depth),
which makes every candidate an integer and every membership test exact
(int64, or Python ints when int64 could overflow). Float inputs run in
float64.
"""

import logging
import math
from fractions import Fraction
from itertools import combinations
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from smallball.utils import lcm_many

logger = logging.getLogger(__name__)

DEFAULT_DEPTH = 6
DEFAULT_EXHAUSTIVE_BUDGET = 20_000
DEFAULT_BEAM_WIDTH = 8
DEFAULT_MAX_CANDIDATES = 4096

# elements per broadcast block in the membership kernel
CHUNK = 1 << 22
_INT64_SAFE = 1 << 62


class SearchOutcome(NamedTuple):
    """Best GAP found, in the units of the input"""
    value: Any
    generators: Tuple[Any, ...]
    limits: Tuple[Any, ...]
    exhaustive: bool
    candidate_count: int


class _Solution(NamedTuple):
    key: tuple
    value: Any
    indices: Tuple[int, ...]
    limits: Tuple[int, ...]


def limit_vectors(rank: int, volume_cap: int) -> List[Tuple[int, ...]]:
    """All maximal ordered vectors of positive integers L with prod(2 L_j + 1) <= volume_cap."""
    found: List[Tuple[int, ...]] = []

    def extend(prefix: Tuple[int, ...], budget: int) -> None:
        if len(prefix) == rank:
            volume = math.prod(2 * L + 1 for L in prefix)
            if all(volume // (2 * L + 1) * (2 * L + 3) > volume_cap for L in prefix):
                found.append(prefix)
            return
        rest = 3 ** (rank - len(prefix) - 1)
        top = (budget // rest - 1) // 2
        for L in range(1, top + 1):
            extend(prefix + (L,), budget // (2 * L + 1))

    extend((), volume_cap)
    return found


def _raw_candidates(values: Sequence[Any], depth: int, divide) -> List[Any]:
    magnitudes = {abs(x) for x in values if x != 0}
    magnitudes.update(abs(x - y) for i, x in enumerate(values) for y in values[i + 1:] if x != y)
    return sorted({divide(v, k) for v in magnitudes for k in range(1, depth + 1)})


def candidate_generators(values: Sequence[Any], depth: int = DEFAULT_DEPTH) -> List[Any]:
    """
    Candidate generators |x_i| / k and |x_i - x_j| / k (k = 1..depth), sorted.

    Exact (Fraction) when every value is rational, float otherwise.
    """
    if any(isinstance(v, float) for v in values):
        return _raw_candidates([float(v) for v in values], depth, lambda v, k: v / k)
    return _raw_candidates([Fraction(v) for v in values], depth, lambda v, k: v / k)


class GapSearch:
    """Search for the GAP leaving the least weighted mass outside its tau-neighborhood."""

    def __init__(
        self,
        values: Sequence[Any],
        masses: Sequence[Any],
        tau: Any,
        depth: int = DEFAULT_DEPTH,
        exhaustive_budget: int = DEFAULT_EXHAUSTIVE_BUDGET,
        beam_width: int = DEFAULT_BEAM_WIDTH,
        max_candidates: int = DEFAULT_MAX_CANDIDATES,
    ):
        if len(values) != len(masses):
            raise ValueError("values and masses must have the same length")
        self.depth = depth
        self.exhaustive_budget = exhaustive_budget
        self.beam_width = beam_width

        merged: Dict[Any, Any] = {}
        for x, w in zip(values, masses):
            merged[x] = merged.get(x, 0) + w
        values = sorted(merged)

        self.exact = not isinstance(tau, float) and not any(isinstance(v, float) for v in values)
        if self.exact:
            denominators = [Fraction(v).denominator for v in values] + [Fraction(tau).denominator]
            self.scale = lcm_many(denominators) * lcm_many(range(1, depth + 1))
            self._xs: List[Any] = [int(Fraction(v) * self.scale) for v in values]
            self._tau: Any = int(Fraction(tau) * self.scale)
            candidates = _raw_candidates(self._xs, depth, lambda v, k: v // k)
        else:
            self.scale = 1
            self._xs = [float(v) for v in values]
            self._tau = float(tau)
            candidates = candidate_generators(self._xs, depth)

        weights = [merged[v] for v in values]
        self.exact_masses = not any(isinstance(w, float) for w in weights)
        if self.exact_masses:
            self.mass_scale = lcm_many([Fraction(w).denominator for w in weights])
            self._ws: List[Any] = [int(Fraction(w) * self.mass_scale) for w in weights]
        else:
            self.mass_scale = 1
            self._ws = [float(w) for w in weights]

        if len(candidates) > max_candidates and self._tau > 0:
            candidates = self._cluster(candidates, self._tau)
            logger.debug("clustered candidate generators down to %d", len(candidates))
        self._candidates = candidates

    @staticmethod
    def _cluster(candidates: List[Any], resolution: Any) -> List[Any]:
        kept = [candidates[0]]
        for c in candidates[1:]:
            if c - kept[-1] > resolution:
                kept.append(c)
        return kept

    @property
    def candidate_count(self) -> int:
        return len(self._candidates)

    @property
    def candidates(self) -> List[Any]:
        """Candidate generators in the units of the input."""
        return [self._unscale(c) for c in self._candidates]

    def _unscale(self, v: Any) -> Any:
        return Fraction(v, self.scale) if self.exact else v

    def _unscale_mass(self, v: Any) -> Any:
        return Fraction(int(v), self.mass_scale) if self.exact_masses else float(v)

    def _prepare(self, volume_cap: int) -> None:
        if not self.exact:
            dtype: Any = np.float64
        else:
            largest = max([abs(x) for x in self._xs] + list(self._candidates) + [self._tau, 1])
            if 4 * largest * (volume_cap + 2) < _INT64_SAFE:
                dtype = np.int64
            else:
                logger.warning("integerised GAP search would overflow int64; using Python integers")
                dtype = object
        mass_dtype: Any = np.float64
        if self.exact_masses:
            mass_dtype = np.int64 if sum(self._ws) < _INT64_SAFE else object

        self._X = np.array(self._xs, dtype=dtype)
        self._G = np.array(self._candidates, dtype=dtype)
        self._W = np.array(self._ws, dtype=mass_dtype)
        self._T = self._tau

    def _outside(self, prefix: Sequence[int], prefix_limits: Sequence[int], last_limit: int,
                 cand_idx: np.ndarray) -> np.ndarray:
        """Outside mass for prefix generators plus each candidate in cand_idx as the last generator."""
        X, N = self._X, self._X.size
        R = X[None, :]
        for i, L in zip(prefix, prefix_limits):
            steps = np.array([m * self._G[i] for m in range(-L, L + 1)], dtype=X.dtype)
            R = (R[:, None, :] - steps[None, :, None]).reshape(-1, N)

        G = self._G[cand_idx]
        covered = np.zeros((len(G), N), dtype=bool)
        cand_block = max(1, CHUNK // max(1, N))
        for c0 in range(0, len(G), cand_block):
            g = G[c0:c0 + cand_block][None, :, None]
            rows = max(1, CHUNK // max(1, g.size * N))
            for r0 in range(0, len(R), rows):
                block = R[r0:r0 + rows][:, None, :]
                q = block // g
                lo = np.minimum(np.maximum(q, -last_limit), last_limit)
                hi = np.minimum(np.maximum(q + 1, -last_limit), last_limit)
                dist = np.minimum(np.abs(block - lo * g), np.abs(block - hi * g))
                covered[c0:c0 + cand_block] |= (dist <= self._T).any(axis=0)
        return np.where(covered, 0, self._W[None, :]).sum(axis=1)

    def _key(self, value: Any, indices: Tuple[int, ...], limits: Tuple[int, ...]) -> tuple:
        pairs = sorted((self._candidates[i], L) for i, L in zip(indices, limits))
        volume = math.prod(2 * L + 1 for L in limits)
        return (value, len(indices), volume, tuple(g for g, _ in pairs), tuple(L for _, L in pairs))

    def _collect(self, pool: List[_Solution], prefix: Tuple[int, ...], lv: Tuple[int, ...],
                 cand_idx: np.ndarray) -> None:
        values = self._outside(prefix, lv[:-1], lv[-1], cand_idx)
        order = np.argsort(values, kind="stable")
        lowest = values[order[0]]
        picked = [int(j) for j in order[:self.beam_width]]
        picked += [int(j) for j in order[self.beam_width:] if values[j] == lowest]
        batch = []
        for j in picked:
            indices = prefix + (int(cand_idx[j]),)
            value = values[j].item() if hasattr(values[j], "item") else values[j]
            batch.append(_Solution(self._key(value, indices, lv), value, indices, lv))
        batch.sort(key=lambda s: s.key)
        pool.extend(batch[:self.beam_width])

    def _tighten(self, solution: _Solution) -> _Solution:
        """Shrink each limit while the outside mass stays the same."""
        indices, limits = solution.indices, list(solution.limits)
        for pos in range(len(indices)):
            others = [p for p in range(len(indices)) if p != pos]
            prefix = tuple(indices[p] for p in others)
            while limits[pos] > 1:
                trial = self._outside(prefix, [limits[p] for p in others], limits[pos] - 1,
                                      np.array([indices[pos]]))[0]
                if trial != solution.value:
                    break
                limits[pos] -= 1
        tightened = tuple(limits)
        return _Solution(self._key(solution.value, indices, tightened), solution.value, indices, tightened)

    def _zero_solution(self, k1: bool) -> _Solution:
        value = sum(w for x, w in zip(self._xs, self._ws) if abs(x) > self._tau)
        limit = 1 if k1 else 0
        return _Solution((value, 1, 2 * limit + 1, (0,), (limit,)), value, (), (limit,))

    def search(self, rank_cap: int, volume_cap: int, k1: bool = False) -> SearchOutcome:
        """
        Best GAP of rank <= rank_cap and volume <= volume_cap.

        With k1=True every limit is fixed to 1 (the K_1(u) form) and volume_cap
        only bounds the rank through 3^rank <= volume_cap.
        """
        self._prepare(volume_cap)
        C = len(self._candidates)
        best = self._zero_solution(k1)
        ties: List[_Solution] = []
        beam: List[_Solution] = []
        exhaustive = True

        for k in range(1, rank_cap + 1):
            if k1:
                lvs = [(1,) * k] if 3 ** k <= volume_cap else []
            else:
                lvs = limit_vectors(k, volume_cap)
            if not lvs or C < k:
                break

            pool: List[_Solution] = []
            if k == 1 or math.comb(C, k) * len(lvs) <= self.exhaustive_budget:
                for prefix in combinations(range(C), k - 1):
                    start = prefix[-1] + 1 if prefix else 0
                    if start >= C:
                        continue
                    idx = np.arange(start, C)
                    for lv in lvs:
                        self._collect(pool, prefix, lv, idx)
            else:
                exhaustive = False
                logger.warning("rank %d GAP search over %d candidates is greedy (beam of %d)",
                               k, C, self.beam_width)
                for parent in beam:
                    used = set(parent.indices)
                    idx = np.array([i for i in range(C) if i not in used], dtype=np.int64)
                    if idx.size == 0:
                        continue
                    for lv in lvs:
                        self._collect(pool, parent.indices, lv, idx)
            if not pool:
                break

            pool.sort(key=lambda s: s.key)
            beam = []
            seen = set()
            for s in pool:
                canonical = s.key[3:]
                if canonical in seen:
                    continue
                seen.add(canonical)
                beam.append(s)
                if len(beam) == self.beam_width:
                    break
            if beam[0].key < best.key:
                best = beam[0]
                ties = [s for s in beam if s.value == best.value]

        # limit vectors are maximal; among the tied best, keep the smallest progression
        if not k1 and best.indices:
            best = min((self._tighten(s) for s in ties), key=lambda s: s.key)
        return self._outcome(best, exhaustive, k1)

    def _outcome(self, best: _Solution, exhaustive: bool, k1: bool) -> SearchOutcome:
        value = self._unscale_mass(best.value)
        if not best.indices:
            limit: Any = 1 if k1 else Fraction(1, 2)
            generators: Tuple[Any, ...] = (self._unscale(0) if self.exact else 0.0,)
            return SearchOutcome(value, generators, (limit,), exhaustive, len(self._candidates))
        pairs = sorted((self._candidates[i], L) for i, L in zip(best.indices, best.limits))
        return SearchOutcome(
            value,
            tuple(self._unscale(g) for g, _ in pairs),
            tuple(L for _, L in pairs),
            exhaustive,
            len(self._candidates),
        )


def search_gap(
    values: Sequence[Any],
    masses: Sequence[Any],
    tau: Any,
    rank_cap: int,
    volume_cap: int,
    depth: int = DEFAULT_DEPTH,
    exhaustive_budget: int = DEFAULT_EXHAUSTIVE_BUDGET,
    k1: bool = False,
    beam_width: Optional[int] = None,
) -> SearchOutcome:
    """One-shot wrapper around GapSearch."""
    engine = GapSearch(values, masses, tau, depth=depth, exhaustive_budget=exhaustive_budget,
                       beam_width=beam_width or DEFAULT_BEAM_WIDTH)
    return engine.search(rank_cap, volume_cap, k1=k1)

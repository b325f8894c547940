"""
smallball: models for probability laws, coefficient vectors and atomic measures
"""

from fractions import Fraction
from typing import Any, Dict, Iterator, List, Sequence, Tuple, Union

from pydantic import Field, field_validator, model_validator

from smallball.models.base import Point, Rational, Real, SmallballModel


class DiscreteDist(SmallballModel):
    """Finitely supported probability law on the real line"""
    atoms: Tuple[Real, ...] = Field(..., description="Support points, strictly increasing")
    weights: Tuple[Rational, ...] = Field(..., description="Positive rational masses summing to 1")

    @model_validator(mode="after")
    def _check_law(self) -> "DiscreteDist":
        if not self.atoms:
            raise ValueError("a distribution needs at least one atom")
        if len(self.atoms) != len(self.weights):
            raise ValueError("atoms and weights must have the same length")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be positive")
        if any(b <= a for a, b in zip(self.atoms, self.atoms[1:])):
            raise ValueError("atoms must be strictly increasing")
        if sum(self.weights, Fraction(0)) != 1:
            raise ValueError("weights must sum to exactly 1")
        return self

    @classmethod
    def trusted(cls, atoms: Sequence[Any], weights: Sequence[Fraction]) -> "DiscreteDist":
        """Build from already sorted, coalesced, normalized data without re-validation."""
        return cls.model_construct(atoms=tuple(atoms), weights=tuple(weights))

    def __len__(self) -> int:
        return len(self.atoms)

    def items(self) -> Iterator[Tuple[Any, Fraction]]:
        return zip(self.atoms, self.weights)

    def as_dict(self) -> Dict[Any, Fraction]:
        return dict(zip(self.atoms, self.weights))

    def mass_at(self, x: Any) -> Fraction:
        return self.as_dict().get(x, Fraction(0))

    @property
    def max_weight(self) -> Fraction:
        return max(self.weights)

    @property
    def diameter(self) -> Any:
        return self.atoms[-1] - self.atoms[0]

    def is_symmetric(self) -> bool:
        masses = self.as_dict()
        return all(masses.get(-x) == w for x, w in masses.items())


class WeightVector(SmallballModel):
    """The coefficient multiset a = (a_1, ..., a_n), each a_k in R^d"""
    d: int = Field(..., ge=1, description="Ambient dimension")
    entries: Tuple[Point, ...] = Field(..., description="n points of R^d; duplicates allowed")

    @model_validator(mode="before")
    @classmethod
    def _lift_scalars(cls, data: Any) -> Any:
        if isinstance(data, dict) and "entries" in data:
            data = dict(data)
            data["entries"] = [e if isinstance(e, (list, tuple)) else [e] for e in data["entries"]]
            data.setdefault("d", len(data["entries"][0]) if data["entries"] else 1)
        return data

    @model_validator(mode="after")
    def _check_vector(self) -> "WeightVector":
        if not self.entries:
            raise ValueError("a weight vector needs n >= 1 entries")
        if any(len(e) != self.d for e in self.entries):
            raise ValueError(f"every entry must have {self.d} coordinates")
        if self.is_zero:
            raise ValueError("the weight vector must not be identically zero")
        return self

    @classmethod
    def of(cls, values: Sequence[Any]) -> "WeightVector":
        """Build from scalars (d=1) or from equal-length sequences."""
        return cls.model_validate({"entries": list(values)})

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def is_zero(self) -> bool:
        return all(x == 0 for e in self.entries for x in e)

    def scalars(self) -> List[Any]:
        """The entries of a one-dimensional vector as plain numbers."""
        if self.d != 1:
            raise ValueError("scalars() requires d == 1")
        return [e[0] for e in self.entries]

    def column(self, j: int) -> List[Any]:
        """Coordinate j (1-based) of every entry."""
        return [e[j - 1] for e in self.entries]

    def has_single_coordinate_entries(self) -> bool:
        """True when every a_k has at most one non-zero coordinate (independent coordinates of S_a)."""
        return all(sum(1 for x in e if x != 0) <= 1 for e in self.entries)

    def scaled(self, s: Union[Fraction, float, int]) -> "WeightVector":
        return WeightVector(d=self.d, entries=tuple(tuple(x * s for x in e) for e in self.entries))


class AtomicMeasure(SmallballModel):
    """Non-negative finite atomic measure on R^d (not normalized)"""
    d: int = Field(..., ge=1)
    atoms: Tuple[Point, ...] = Field(..., description="Atom positions, sorted")
    masses: Tuple[Rational, ...] = Field(..., description="Positive masses")
    symmetric: bool = Field(False, description="Built as a symmetric measure (mass of A equals mass of -A)")

    @model_validator(mode="after")
    def _check_measure(self) -> "AtomicMeasure":
        if len(self.atoms) != len(self.masses):
            raise ValueError("atoms and masses must have the same length")
        if any(m <= 0 for m in self.masses):
            raise ValueError("masses must be positive")
        if any(len(x) != self.d for x in self.atoms):
            raise ValueError(f"every atom must have {self.d} coordinates")
        if self.symmetric:
            table = dict(zip(self.atoms, self.masses))
            for x, m in table.items():
                if table.get(tuple(-c for c in x)) != m:
                    raise ValueError("measure flagged symmetric but mass(A) != mass(-A)")
        return self

    @field_validator("atoms", mode="before")
    @classmethod
    def _lift_atoms(cls, value: Any) -> Any:
        return [x if isinstance(x, (list, tuple)) else [x] for x in value]

    @property
    def total_mass(self) -> Fraction:
        return sum(self.masses, Fraction(0))

    def items(self) -> Iterator[Tuple[Point, Fraction]]:
        return zip(self.atoms, self.masses)

    def scalar_atoms(self) -> List[Any]:
        if self.d != 1:
            raise ValueError("scalar_atoms() requires d == 1")
        return [x[0] for x in self.atoms]

    def scaled(self, c: Fraction) -> "AtomicMeasure":
        """The measure c*W; a zero factor yields the zero measure."""
        if c == 0:
            return AtomicMeasure(d=self.d, atoms=(), masses=(), symmetric=self.symmetric)
        return AtomicMeasure(
            d=self.d,
            atoms=self.atoms,
            masses=tuple(m * c for m in self.masses),
            symmetric=self.symmetric,
        )

    def coordinate(self, j: int) -> "AtomicMeasure":
        """Image of the measure under the projection onto coordinate j (1-based)."""
        table: Dict[Any, Fraction] = {}
        for x, m in self.items():
            table[x[j - 1]] = table.get(x[j - 1], Fraction(0)) + m
        keys = sorted(table)
        return AtomicMeasure(d=1, atoms=tuple((k,) for k in keys), masses=tuple(table[k] for k in keys),
                             symmetric=self.symmetric)

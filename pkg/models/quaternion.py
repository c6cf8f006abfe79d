"""
Value types for a rational quaternion algebra and an order inside it.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, Sequence, Tuple

import sympy

from utils.validators import ConfigurationError, parse_rational

StdCoords = Tuple[Fraction, Fraction, Fraction, Fraction]


@dataclass(frozen=True)
class AlgebraSpec:
    """The algebra (a, b): i² = a, j² = b, ij = −ji, standard basis {1, i, j, ij}."""

    a: Fraction
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, 'a', parse_rational(self.a))
        object.__setattr__(self, 'b', parse_rational(self.b))
        if self.a == 0 or self.b == 0:
            raise ConfigurationError(f"Structure constants must be nonzero, got ({self.a}, {self.b})")
        if self.a < 0 and self.b < 0:
            raise ConfigurationError(
                f"Algebra ({self.a}, {self.b}) is definite; one of a, b must be positive"
            )

    def multiply(self, x: Sequence[Fraction], y: Sequence[Fraction]) -> StdCoords:
        """Product of two elements given in standard coordinates."""
        a, b = self.a, self.b
        x0, x1, x2, x3 = x
        y0, y1, y2, y3 = y
        return (
            x0 * y0 + a * x1 * y1 + b * x2 * y2 - a * b * x3 * y3,
            x0 * y1 + x1 * y0 - b * x2 * y3 + b * x3 * y2,
            x0 * y2 + x2 * y0 + a * x1 * y3 - a * x3 * y1,
            x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1,
        )

    def norm(self, x: Sequence[Fraction]) -> Fraction:
        x0, x1, x2, x3 = x
        return x0 * x0 - self.a * x1 * x1 - self.b * x2 * x2 + self.a * self.b * x3 * x3

    @staticmethod
    def trace(x: Sequence[Fraction]) -> Fraction:
        return 2 * x[0]

    def to_dict(self) -> Dict[str, str]:
        return {'a': str(self.a), 'b': str(self.b)}


@dataclass(frozen=True)
class OrderBasis:
    """Four basis vectors e0..e3, each given by its standard coordinates (one row per vector)."""

    rows: Tuple[StdCoords, ...]
    source: str = field(default='', compare=False)

    def __post_init__(self):
        rows = tuple(tuple(parse_rational(entry) for entry in row) for row in self.rows)
        if len(rows) != 4 or any(len(row) != 4 for row in rows):
            raise ConfigurationError("Order basis must be a 4x4 matrix")
        object.__setattr__(self, 'rows', rows)
        if self.determinant == 0:
            raise ConfigurationError("Order basis is singular")

    @cached_property
    def _matrix(self) -> sympy.Matrix:
        return sympy.Matrix(4, 4, lambda r, c: sympy.Rational(self.rows[r][c].numerator,
                                                               self.rows[r][c].denominator))

    @cached_property
    def determinant(self) -> Fraction:
        det = self._matrix.det()
        return Fraction(int(det.p), int(det.q))

    @cached_property
    def inverse_rows(self) -> Tuple[StdCoords, ...]:
        """Rows of E⁻¹, so that basis coordinates are std · E⁻¹."""
        inverse = self._matrix.inv()
        return tuple(
            tuple(Fraction(int(inverse[r, c].p), int(inverse[r, c].q)) for c in range(4))
            for r in range(4)
        )

    def to_standard(self, coords: Sequence[int]) -> StdCoords:
        return tuple(
            sum((Fraction(coords[r]) * self.rows[r][k] for r in range(4)), Fraction(0))
            for k in range(4)
        )

    def to_basis(self, std: Sequence[Fraction]) -> StdCoords:
        inverse = self.inverse_rows
        return tuple(
            sum((Fraction(std[k]) * inverse[k][r] for k in range(4)), Fraction(0))
            for r in range(4)
        )

    @classmethod
    def standard(cls) -> 'OrderBasis':
        """The basis {1, i, j, ij} itself."""
        identity = tuple(tuple(Fraction(int(r == c)) for c in range(4)) for r in range(4))
        return cls(rows=identity, source='standard basis')

    def to_dict(self) -> Dict:
        return {'rows': [[str(entry) for entry in row] for row in self.rows], 'source': self.source}


@dataclass(frozen=True, order=True)
class OrderElement:
    """Integer coordinates with respect to the active order basis."""

    coords: Tuple[int, int, int, int]

    def __post_init__(self):
        coords = tuple(int(c) for c in self.coords)
        if len(coords) != 4:
            raise ConfigurationError("Order elements have four coordinates")
        object.__setattr__(self, 'coords', coords)

    def __neg__(self) -> 'OrderElement':
        return OrderElement(tuple(-c for c in self.coords))

    def to_list(self):
        return list(self.coords)

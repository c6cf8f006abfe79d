"""
Points of the upper half-plane and positive-determinant 2×2 real matrices acting on them.
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from utils.validators import ValidationError, parse_point


@dataclass(frozen=True)
class PlanePoint:
    """z = x + iy with y > 0."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValidationError(f"Non-finite point ({self.x}, {self.y})")
        if self.y <= 0:
            raise ValidationError(f"Point ({self.x}, {self.y}) is not in the upper half-plane")

    @classmethod
    def parse(cls, text: str) -> 'PlanePoint':
        return cls(*parse_point(text))

    @classmethod
    def i(cls) -> 'PlanePoint':
        return cls(0.0, 1.0)

    def as_complex(self) -> complex:
        return complex(self.x, self.y)

    def to_list(self):
        return [self.x, self.y]


@dataclass(frozen=True)
class Isometry:
    """Matrix [[a, b], [c, d]] with ad − bc > 0, acting by Möbius maps."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if not self.det > 0:
            raise ValidationError(f"Isometry needs positive determinant, got {self.det}")

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @classmethod
    def from_matrix(cls, m) -> 'Isometry':
        m = np.asarray(m, dtype=float)
        return cls(float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]))

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def entries(self) -> Tuple[float, float, float, float]:
        return self.a, self.b, self.c, self.d

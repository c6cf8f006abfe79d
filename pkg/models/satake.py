"""
Satake parameters, the Hecke eigenvalue sequences they generate, and amplifier supports.
"""

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, List, Tuple

from config.settings import Config
from utils.validators import InputValidator, ValidationError, require

TEMPERED = 'tempered'
NONTEMPERED = 'nontempered'
SINGULAR = 'singular'


@dataclass(frozen=True)
class SatakeParameter:
    """
    λ(p) = α + α⁻¹ with α = e^{iθ} (tempered), ±e^{θ} (nontempered) or ±1 (singular).

    Use the classmethod constructors; tempered angles within the singular window of 0 or π
    come back as singular parameters.
    """

    kind: str
    theta: float = 0.0
    sign: int = 1

    def __post_init__(self):
        if self.kind not in (TEMPERED, NONTEMPERED, SINGULAR):
            raise ValidationError(f"Unknown Satake kind {self.kind!r}")
        if self.sign not in (1, -1):
            raise ValidationError(f"Sign must be ±1, got {self.sign}")
        if self.kind == TEMPERED and not 0.0 < self.theta < math.pi:
            raise ValidationError(f"Tempered angle must lie in (0, π), got {self.theta}")
        if self.kind == NONTEMPERED and not self.theta > 0.0:
            raise ValidationError(f"Nontempered parameter needs θ > 0, got {self.theta}")

    @classmethod
    def tempered(cls, theta: float, window: float = Config.SINGULAR_WINDOW) -> 'SatakeParameter':
        if abs(theta) <= window:
            return cls(SINGULAR, 0.0, 1)
        if abs(theta - math.pi) <= window:
            return cls(SINGULAR, 0.0, -1)
        return cls(TEMPERED, theta, 1)

    @classmethod
    def nontempered(cls, theta: float, sign: int = 1) -> 'SatakeParameter':
        return cls(NONTEMPERED, theta, sign)

    @classmethod
    def singular(cls, sign: int = 1) -> 'SatakeParameter':
        return cls(SINGULAR, 0.0, sign)

    @property
    def alpha(self) -> complex:
        if self.kind == TEMPERED:
            return complex(math.cos(self.theta), math.sin(self.theta))
        if self.kind == NONTEMPERED:
            return complex(self.sign * math.exp(self.theta), 0.0)
        return complex(self.sign, 0.0)

    @property
    def lambda_p(self) -> float:
        """λ(p) = α + α⁻¹, always real."""
        if self.kind == TEMPERED:
            return 2.0 * math.cos(self.theta)
        if self.kind == NONTEMPERED:
            return self.sign * 2.0 * math.cosh(self.theta)
        return 2.0 * self.sign

    def closed_form(self, n: int) -> float:
        """λ(pⁿ) = (αⁿ⁺¹ − α⁻ⁿ⁻¹)/(α − α⁻¹), or its limit (n+1)·signⁿ."""
        if n < 0:
            return 0.0
        if self.kind == TEMPERED:
            return math.sin((n + 1) * self.theta) / math.sin(self.theta)
        parity = self.sign ** n
        if self.kind == NONTEMPERED:
            return parity * math.sinh((n + 1) * self.theta) / math.sinh(self.theta)
        return float(parity * (n + 1))

    def separation(self) -> float:
        """|α² − 1|."""
        return abs(self.alpha ** 2 - 1)

    def to_dict(self) -> Dict:
        return {'kind': self.kind, 'theta': self.theta, 'sign': self.sign}


@dataclass(frozen=True)
class EigenvalueSequence:
    """λ(pⁿ) for n = 0..length, cached from the closed form."""

    p: int
    parameter: SatakeParameter
    length: int
    values: Tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        require(InputValidator.validate_prime(self.p))
        if self.length < 0:
            raise ValidationError("Sequence length must be nonnegative")
        object.__setattr__(self, 'values',
                           tuple(self.parameter.closed_form(n) for n in range(self.length + 1)))

    def __getitem__(self, n: int) -> float:
        if n < 0:
            return 0.0
        if n <= self.length:
            return self.values[n]
        return self.parameter.closed_form(n)

    def extended(self, length: int) -> 'EigenvalueSequence':
        if length <= self.length:
            return self
        return EigenvalueSequence(self.p, self.parameter, length)


@dataclass(frozen=True)
class AmplifierSupport:
    """M(P, L): products Π p^{k_p} with 1 ≤ k_p ≤ L."""

    primes: Tuple[int, ...]
    L: int

    def __post_init__(self):
        if not self.primes:
            raise ValidationError("Amplifier support needs at least one prime")
        for p in self.primes:
            require(InputValidator.validate_prime(p))
        if len(set(self.primes)) != len(self.primes):
            raise ValidationError("Amplifier primes must be distinct")
        if self.L < 1:
            raise ValidationError(f"L must be at least 1, got {self.L}")
        object.__setattr__(self, 'primes', tuple(sorted(self.primes)))

    def exponent_vectors(self) -> List[Tuple[int, ...]]:
        return list(product(range(1, self.L + 1), repeat=len(self.primes)))

    def modulus(self, exponents: Tuple[int, ...]) -> int:
        value = 1
        for p, k in zip(self.primes, exponents):
            value *= p ** k
        return value

    def members(self) -> List[int]:
        return sorted(self.modulus(e) for e in self.exponent_vectors())

    def __len__(self) -> int:
        return self.L ** len(self.primes)


@dataclass(frozen=True)
class AmplifierExpansion:
    """Formal combination Σ coefficient·T(M) with M supported on the amplifier primes."""

    primes: Tuple[int, ...]
    L: int
    terms: Tuple[Tuple[int, float], ...]
    exponents: Tuple[Tuple[int, ...], ...] = field(compare=False, default=())

    def coefficient(self, modulus: int) -> float:
        for m, c in self.terms:
            if m == modulus:
                return c
        return 0.0

    def moduli(self) -> List[int]:
        return [m for m, _ in self.terms]

    def to_rows(self) -> List[Dict]:
        rows = []
        for (modulus, coefficient), exps in zip(self.terms, self.exponents or [()] * len(self.terms)):
            row = {'modulus': str(modulus), 'coefficient': coefficient}
            for p, e in zip(self.primes, exps):
                row[f'ord_{p}'] = e
            rows.append(row)
        return rows

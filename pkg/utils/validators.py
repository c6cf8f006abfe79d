"""
Input validation utilities for Amplifier Lab.
Exception hierarchy plus parsers for the values accepted on the command line and in lab files.
"""

import math
import re
from fractions import Fraction
from typing import List, Sequence, Tuple

from sympy import isprime


class LabError(Exception):
    """Base class for every error raised by the lab."""
    exit_code = 1


class ValidationError(LabError, ValueError):
    """Invalid input: bad flag value, malformed point, composite prime."""
    exit_code = 2


class ConfigurationError(ValidationError):
    """Lab file cannot be parsed or violates its invariants."""


class PlanError(ValidationError):
    """Planner input leaves no room for an amplifier (L < 1)."""


class InvariantViolation(LabError):
    """A checked mathematical invariant failed."""
    exit_code = 1


class QuadratureError(InvariantViolation):
    """Node doubling did not stabilise the window transform."""


class EnumerationError(InvariantViolation):
    """The pulled-back form is numerically degenerate."""


_RATIONAL_RE = re.compile(r'^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$')


class InputValidator:
    """Validates scalar inputs shared by several commands."""

    MAX_TREE_PRIME = 97
    MIN_WINDOW_NODES = 256

    @staticmethod
    def validate_prime(value: int) -> Tuple[bool, str]:
        """Validate that value is a rational prime."""
        if isinstance(value, bool) or not isinstance(value, int):
            return False, f"Prime must be an integer, got {value!r}"
        if not isprime(value):
            return False, f"{value} is not prime"
        return True, ""

    @staticmethod
    def validate_positive(value: float, name: str) -> Tuple[bool, str]:
        """Validate a strictly positive finite real."""
        try:
            number = float(value)
        except (TypeError, ValueError):
            return False, f"{name} must be a number"
        if not math.isfinite(number) or number <= 0:
            return False, f"{name} must be positive and finite, got {value}"
        return True, ""

    @staticmethod
    def validate_norm(value: int) -> Tuple[bool, str]:
        """Validate a target reduced norm."""
        if isinstance(value, bool) or not isinstance(value, int):
            return False, "Norm must be an integer"
        if value < 1:
            return False, f"Norm must be at least 1, got {value}"
        return True, ""

    @staticmethod
    def validate_nodes(nodes: int) -> Tuple[bool, str]:
        """Validate a window quadrature node count."""
        if nodes < InputValidator.MIN_WINDOW_NODES:
            return False, f"Node count must be at least {InputValidator.MIN_WINDOW_NODES}"
        if nodes % 16:
            return False, "Node count must be a multiple of the 16-point panel rule"
        return True, ""

    @classmethod
    def validate_count_query(cls, norm: int, t: float) -> List[str]:
        """
        Validate the arguments of a counting query.

        Returns:
            List of error messages (empty if valid)
        """
        errors = []
        for valid, message in (cls.validate_norm(norm), cls.validate_positive(t, 't')):
            if not valid:
                errors.append(message)
        return errors


def require(check: Tuple[bool, str]) -> None:
    """Raise ValidationError when a validator reports failure."""
    valid, message = check
    if not valid:
        raise ValidationError(message)


def parse_rational(text) -> Fraction:
    """Parse "num/den" (or an integer) into an exact Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    match = _RATIONAL_RE.match(str(text))
    if not match:
        raise ValidationError(f"Not a rational of the form num/den: {text!r}")
    numerator, denominator = match.group(1), match.group(2) or '1'
    if int(denominator) == 0:
        raise ValidationError(f"Zero denominator in {text!r}")
    return Fraction(int(numerator), int(denominator))


def parse_point(text: str) -> Tuple[float, float]:
    """Parse an upper half-plane point given as "x,y"."""
    parts = str(text).split(',')
    if len(parts) != 2:
        raise ValidationError(f"Point must be given as x,y: {text!r}")
    try:
        x, y = float(parts[0]), float(parts[1])
    except ValueError:
        raise ValidationError(f"Point coordinates must be decimals: {text!r}")
    if not (math.isfinite(x) and math.isfinite(y)) or y <= 0:
        raise ValidationError(f"Point must lie in the upper half-plane: {text!r}")
    return x, y


def parse_primes(text) -> Tuple[int, ...]:
    """Parse "2,3" (or a sequence) into a sorted tuple of distinct primes."""
    if isinstance(text, str):
        items = [item for item in text.split(',') if item.strip()]
    else:
        items = list(text)
    if not items:
        raise ValidationError("Prime set must not be empty")
    try:
        primes = [int(str(item).strip()) for item in items]
    except ValueError:
        raise ValidationError(f"Primes must be integers: {text!r}")
    for prime in primes:
        require(InputValidator.validate_prime(prime))
    if len(set(primes)) != len(primes):
        raise ValidationError(f"Repeated prime in {text!r}")
    return tuple(sorted(primes))


def parse_floats(text) -> List[float]:
    """Parse a comma separated list of reals."""
    if not isinstance(text, str):
        return [float(item) for item in text]
    try:
        values = [float(item) for item in text.split(',') if item.strip()]
    except ValueError:
        raise ValidationError(f"Expected comma separated reals: {text!r}")
    if not values or not all(math.isfinite(value) for value in values):
        raise ValidationError(f"Expected finite reals: {text!r}")
    return values


def ensure_primes(values: Sequence[int]) -> Tuple[int, ...]:
    """Validate an already-parsed prime collection."""
    return parse_primes(list(values))

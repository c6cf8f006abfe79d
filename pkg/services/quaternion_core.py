"""
Exact arithmetic in an order of a rational quaternion algebra.
All products, norms and traces run on integers; only the splitting embedding uses floats.
"""

import logging
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import numpy as np

from models.quaternion import AlgebraSpec, OrderBasis, OrderElement
from utils.validators import ConfigurationError, ValidationError

logger = logging.getLogger(__name__)


class OrderReport:
    """Result of checking the order axioms for a basis."""

    def __init__(self):
        self.violations: List[Dict] = []
        self.checked = 0

    def add(self, kind: str, detail: str, value: Sequence[Fraction]):
        self.violations.append({
            'kind': kind,
            'detail': detail,
            'value': [str(v) for v in value],
        })

    @property
    def valid(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        if self.valid:
            return f"order axioms hold ({self.checked} checks)"
        first = self.violations[0]
        return f"{len(self.violations)} violation(s), first: {first['kind']} {first['detail']}"

    def to_dict(self) -> Dict:
        return {'valid': self.valid, 'checks': self.checked, 'violations': self.violations}


def _is_integral(values: Sequence[Fraction]) -> bool:
    return all(Fraction(v).denominator == 1 for v in values)


def verify_order(algebra: AlgebraSpec, basis: OrderBasis) -> OrderReport:
    """
    Check closure, integrality and unit membership for a candidate order basis.

    Every violation is reported with the offending product or value; nothing is raised.
    """
    report = OrderReport()
    rows = basis.rows

    for r in range(4):
        for s in range(4):
            report.checked += 1
            product = algebra.multiply(rows[r], rows[s])
            coords = basis.to_basis(product)
            if not _is_integral(coords):
                report.add('closure', f"e{r}*e{s} has basis coordinates {[str(c) for c in coords]}",
                           product)

    for r in range(4):
        report.checked += 2
        norm = algebra.norm(rows[r])
        trace = algebra.trace(rows[r])
        if norm.denominator != 1:
            report.add('integrality', f"N(e{r}) = {norm}", rows[r])
        if trace.denominator != 1:
            report.add('integrality', f"tr(e{r}) = {trace}", rows[r])

    report.checked += 1
    one = basis.to_basis((Fraction(1), Fraction(0), Fraction(0), Fraction(0)))
    if not _is_integral(one):
        report.add('unit', f"1 has basis coordinates {[str(c) for c in one]}", one)

    if report.valid:
        logger.info(f"✅ Order basis verified: {report.summary()}")
    else:
        logger.warning(f"❌ Order basis rejected: {report.summary()}")
    return report


def splitting_images(algebra: AlgebraSpec) -> np.ndarray:
    """
    Images of 1, i, j, ij under a fixed embedding into 2×2 real matrices.

    With b > 0: j ↦ diag(√b, −√b), i ↦ [[0, 1], [a, 0]]; otherwise the roles of i and j swap.
    """
    a, b = float(algebra.a), float(algebra.b)
    identity = np.eye(2)
    if b > 0:
        root = np.sqrt(b)
        image_i = np.array([[0.0, 1.0], [a, 0.0]])
        image_j = np.array([[root, 0.0], [0.0, -root]])
    else:
        root = np.sqrt(a)
        image_i = np.array([[root, 0.0], [0.0, -root]])
        image_j = np.array([[0.0, 1.0], [b, 0.0]])
    return np.stack([identity, image_i, image_j, image_i @ image_j])


class QuaternionOrder:
    """An order with precomputed integer structure constants."""

    def __init__(self, algebra: AlgebraSpec, basis: OrderBasis, validate: bool = True):
        """
        Initialize the order.

        Args:
            algebra: Structure constants (a, b)
            basis: Order basis in standard coordinates
            validate: Raise ConfigurationError if the order axioms fail
        """
        self.algebra = algebra
        self.basis = basis
        self.report = verify_order(algebra, basis)
        if validate and not self.report.valid:
            raise ConfigurationError(f"Invalid order basis: {self.report.summary()}")

        rows = basis.rows
        self._structure = np.zeros((4, 4, 4), dtype=object)
        for r in range(4):
            for s in range(4):
                coords = basis.to_basis(algebra.multiply(rows[r], rows[s]))
                self._structure[r, s] = [int(c) if c.denominator == 1 else c for c in coords]

        self._traces = [algebra.trace(row) for row in rows]
        self._conjugation = []
        for r in range(4):
            std = tuple(-v for v in rows[r])
            std = (std[0] + self._traces[r],) + std[1:]
            self._conjugation.append(basis.to_basis(std))

        gram = [[algebra.norm(tuple(x + y for x, y in zip(rows[r], rows[s])))
                 - algebra.norm(rows[r]) - algebra.norm(rows[s])
                 for s in range(4)] for r in range(4)]
        self._trace_form = gram

        self.one = OrderElement(tuple(int(c) for c in basis.to_basis((1, 0, 0, 0)))) \
            if self.report.valid else None
        self.standard_matrix = np.array([[float(v) for v in row] for row in rows])
        self.basis_images = np.einsum('rk,kab->rab', self.standard_matrix, splitting_images(algebra))

    def trace_form(self) -> np.ndarray:
        """Integer matrix G with N(c) = cᵀGc / 2."""
        for row in self._trace_form:
            for entry in row:
                if entry.denominator != 1:
                    raise ConfigurationError("Trace form is not integral on this basis")
        return np.array([[int(v) for v in row] for row in self._trace_form], dtype=np.int64)

    def multiply(self, x: OrderElement, y: OrderElement) -> OrderElement:
        """Exact product xy in basis coordinates."""
        out = [0, 0, 0, 0]
        for r, xr in enumerate(x.coords):
            if not xr:
                continue
            for s, ys in enumerate(y.coords):
                if not ys:
                    continue
                for k in range(4):
                    out[k] += xr * ys * self._structure[r, s, k]
        return OrderElement(tuple(int(v) for v in out))

    def conjugate(self, x: OrderElement) -> OrderElement:
        out = [Fraction(0)] * 4
        for r, xr in enumerate(x.coords):
            for k in range(4):
                out[k] += xr * self._conjugation[r][k]
        return OrderElement(tuple(int(v) for v in out))

    def reduced_norm(self, x: OrderElement) -> int:
        value = self.algebra.norm(self.basis.to_standard(x.coords))
        if value.denominator != 1:
            raise ConfigurationError(f"Non-integral norm {value} for {x.coords}")
        return int(value)

    def reduced_trace(self, x: OrderElement) -> int:
        value = sum((xr * self._traces[r] for r, xr in enumerate(x.coords)), Fraction(0))
        if value.denominator != 1:
            raise ConfigurationError(f"Non-integral trace {value} for {x.coords}")
        return int(value)

    def scalar(self, n: int) -> OrderElement:
        """The central element n·1."""
        return OrderElement(tuple(n * c for c in self.one.coords))

    def embed(self, x: OrderElement) -> np.ndarray:
        """Floating-point image of x as a 2×2 real matrix."""
        return np.tensordot(np.asarray(x.coords, dtype=float), self.basis_images, axes=1)

    def to_standard(self, x: OrderElement):
        return self.basis.to_standard(x.coords)

    def to_order_coords(self, std: Sequence) -> OrderElement:
        """Element with the given standard coordinates; it must lie in the order."""
        coords = self.basis.to_basis([Fraction(v) for v in std])
        if any(c.denominator != 1 for c in coords):
            raise ValidationError(f"{[str(v) for v in std]} does not lie in the order")
        return OrderElement(tuple(int(c) for c in coords))

    def is_central(self, x: OrderElement) -> bool:
        std = self.to_standard(x)
        return std[1] == std[2] == std[3] == 0


def load_order(lab_config, validate: bool = True) -> QuaternionOrder:
    """Build the order described by a lab configuration."""
    return QuaternionOrder(lab_config.algebra, lab_config.basis, validate=validate)


def describe(order: QuaternionOrder, x: OrderElement) -> Dict:
    """JSON-ready description of an element."""
    return {
        'coords': list(x.coords),
        'standard': [str(v) for v in order.to_standard(x)],
        'norm': order.reduced_norm(x),
        'trace': order.reduced_trace(x),
    }


def random_element(order: QuaternionOrder, rng: np.random.Generator, bound: int = 20,
                   exclude_zero: Optional[bool] = True) -> OrderElement:
    """Uniform element of the coordinate box [−bound, bound]⁴."""
    while True:
        coords = tuple(int(v) for v in rng.integers(-bound, bound + 1, size=4))
        if not exclude_zero or any(coords):
            return OrderElement(coords)

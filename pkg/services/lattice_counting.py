"""
Counting order elements of reduced norm N that move a point z by less than t.

M(N, t; z) = #{γ : N(γ) = N, u(γz, z) < t}. By the Frobenius identity
‖σ_z⁻¹ τ(γ) σ_z‖²_F = 2N(1 + 2u(γz, z)), so the search region is the ellipsoid
Q_z(γ) < 2N(1 + 2t), enumerated by Cholesky backtracking over the order coordinates.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from sympy import integer_nthroot

from config.settings import Config
from models.plane import PlanePoint
from models.quaternion import OrderElement
from services.hyperbolic_plane import displacement, inverse, transporter
from services.quaternion_core import QuaternionOrder
from tasks.parallel import resolve_threads, run_tasks, split_range
from utils.validators import (EnumerationError, InputValidator, LabError, ValidationError,
                              require)

logger = logging.getLogger(__name__)

try:
    from numba import jit
    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False
    logger.warning("⚠️  numba not installed - lattice enumeration runs in pure Python")


def _isqrt(n):
    root = int(math.sqrt(float(n)))
    while root * root > n:
        root -= 1
    while (root + 1) * (root + 1) <= n:
        root += 1
    return root


def _enumerate_slab(U, G, target, radius, lo3, hi3, out):
    """
    Backtrack over c3 in [lo3, hi3], then c2, c1 inside the ellipsoid ‖Uc‖² ≤ radius,
    and solve cᵀGc = target for c0 exactly. Returns the number of solutions found;
    only the first out.shape[0] are written.
    """
    capacity = out.shape[0]
    found = 0
    g00 = G[0, 0]
    for c3 in range(lo3, hi3 + 1):
        y3 = U[3, 3] * c3
        r3 = radius - y3 * y3
        if r3 < 0.0:
            continue
        center2 = -(U[2, 3] * c3) / U[2, 2]
        width2 = math.sqrt(r3) / U[2, 2]
        for c2 in range(int(math.floor(center2 - width2)), int(math.ceil(center2 + width2)) + 1):
            y2 = U[2, 2] * c2 + U[2, 3] * c3
            r2 = r3 - y2 * y2
            if r2 < 0.0:
                continue
            center1 = -(U[1, 2] * c2 + U[1, 3] * c3) / U[1, 1]
            width1 = math.sqrt(r2) / U[1, 1]
            for c1 in range(int(math.floor(center1 - width1)),
                            int(math.ceil(center1 + width1)) + 1):
                y1 = U[1, 1] * c1 + U[1, 2] * c2 + U[1, 3] * c3
                r1 = r2 - y1 * y1
                if r1 < 0.0:
                    continue
                center0 = -(U[0, 1] * c1 + U[0, 2] * c2 + U[0, 3] * c3) / U[0, 0]
                width0 = math.sqrt(r1) / U[0, 0]
                lo0 = int(math.floor(center0 - width0))
                hi0 = int(math.ceil(center0 + width0))

                half_b = G[0, 1] * c1 + G[0, 2] * c2 + G[0, 3] * c3
                rest = (G[1, 1] * c1 * c1 + G[2, 2] * c2 * c2 + G[3, 3] * c3 * c3
                        + 2 * (G[1, 2] * c1 * c2 + G[1, 3] * c1 * c3 + G[2, 3] * c2 * c3)
                        - target)

                if g00 == 0:
                    if half_b == 0:
                        if rest == 0:
                            for c0 in range(lo0, hi0 + 1):
                                if found < capacity:
                                    out[found, 0] = c0
                                    out[found, 1] = c1
                                    out[found, 2] = c2
                                    out[found, 3] = c3
                                found += 1
                        continue
                    numerator = -rest
                    denominator = 2 * half_b
                    if numerator % denominator == 0:
                        c0 = numerator // denominator
                        if lo0 <= c0 <= hi0:
                            if found < capacity:
                                out[found, 0] = c0
                                out[found, 1] = c1
                                out[found, 2] = c2
                                out[found, 3] = c3
                            found += 1
                    continue

                disc = half_b * half_b - g00 * rest
                if disc < 0:
                    continue
                root = _isqrt(disc)
                if root * root != disc:
                    continue
                for sign in (1, -1):
                    if sign == -1 and root == 0:
                        break
                    numerator = -half_b + sign * root
                    if numerator % g00 != 0:
                        continue
                    c0 = numerator // g00
                    if c0 < lo0 or c0 > hi0:
                        continue
                    if found < capacity:
                        out[found, 0] = c0
                        out[found, 1] = c1
                        out[found, 2] = c2
                        out[found, 3] = c3
                    found += 1
    return found


if HAS_NUMBA:
    _isqrt = jit(nopython=True, nogil=True, cache=True)(_isqrt)
    _enumerate_kernel = jit(nopython=True, nogil=True, cache=True)(_enumerate_slab)
else:
    _enumerate_kernel = _enumerate_slab


@dataclass(frozen=True)
class CountQuery:
    """Arguments of M(N, t; z)."""

    N: int
    t: float
    z: PlanePoint

    def __post_init__(self):
        errors = InputValidator.validate_count_query(self.N, self.t)
        if errors:
            raise ValidationError('; '.join(errors))

    def search_radius(self, margin: float) -> float:
        """2N(1 + 2t) inflated by the enumeration margin."""
        return 2.0 * self.N * (1.0 + 2.0 * self.t) * (1.0 + margin)

    def to_dict(self) -> Dict:
        return {'N': self.N, 't': self.t, 'z': self.z.to_list()}


@dataclass(frozen=True, eq=False)
class PulledBackForm:
    """Gram matrix of γ ↦ ‖σ_z⁻¹ τ(γ) σ_z‖²_F in order coordinates, with its Cholesky factor."""

    z: PlanePoint
    matrix: np.ndarray
    upper: np.ndarray

    def evaluate(self, coords) -> float:
        c = np.asarray(coords, dtype=float)
        return float(c @ self.matrix @ c)

    def coordinate_bounds(self, radius: float) -> np.ndarray:
        """Half-widths √(R·(Q⁻¹)_ii) of the bounding box of the ellipsoid Q < R."""
        return np.sqrt(radius * np.diag(np.linalg.inv(self.matrix)))


@dataclass(frozen=True)
class EnumerationResult:
    """Elements counted by M(N, t; z), in canonical sorted order."""

    query: CountQuery
    elements: Tuple[OrderElement, ...]
    boundary_count: int
    candidates: int
    method: str = 'enumeration'
    slabs: int = 1
    boundary: Tuple[OrderElement, ...] = field(default=(), compare=False)

    @property
    def count(self) -> int:
        return len(self.elements)

    def to_dict(self, include_elements: bool = False) -> Dict:
        payload = {
            'query': self.query.to_dict(),
            'count': self.count,
            'boundary_count': self.boundary_count,
            'candidates': self.candidates,
            'method': self.method,
        }
        if include_elements:
            payload['elements'] = [e.to_list() for e in self.elements]
        return payload


class LatticeCounter:
    """Enumerates R(N) inside u-balls for a fixed order."""

    def __init__(self, order: QuaternionOrder, margin: float = Config.ENUMERATION_MARGIN,
                 boundary_tolerance: float = Config.BOUNDARY_TOLERANCE,
                 capacity: int = Config.ENUMERATION_CAPACITY):
        """
        Initialize the counter.

        Args:
            order: Verified quaternion order
            margin: Relative inflation of the search ellipsoid
            boundary_tolerance: |u − t| below this (relative to max(1, t)) counts as a boundary hit
            capacity: Initial candidate buffer per slab
        """
        self.order = order
        self.margin = margin
        self.boundary_tolerance = boundary_tolerance
        self.capacity = capacity
        self.trace_form = order.trace_form()
        self._images = order.basis_images

    def gram_form(self, z: PlanePoint) -> PulledBackForm:
        """Pull the Frobenius norm back to order coordinates at z."""
        sigma = transporter(z)
        conjugated = np.einsum('ab,rbc,cd->rad', inverse(sigma).matrix(), self._images,
                               sigma.matrix())
        flat = conjugated.reshape(4, 4)
        matrix = flat @ flat.T
        matrix = 0.5 * (matrix + matrix.T)
        try:
            lower = np.linalg.cholesky(matrix)
        except np.linalg.LinAlgError:
            raise EnumerationError(f"Pulled-back form at z={z.to_list()} is not positive definite")
        if not np.all(np.diag(lower) > 0):
            raise EnumerationError(f"Degenerate Cholesky pivot at z={z.to_list()}")
        return PulledBackForm(z=z, matrix=matrix, upper=lower.T.copy())

    def element_u(self, coords, z: PlanePoint) -> float:
        """u(τ(γ)z, z) for γ given by order coordinates."""
        m = np.tensordot(np.asarray(coords, dtype=float), self._images, axes=1)
        return displacement(m, z)

    def norm_of(self, coords) -> int:
        c = [int(v) for v in coords]
        g = self.trace_form
        total = sum(int(g[r, s]) * c[r] * c[s] for r in range(4) for s in range(4))
        return total // 2

    def _filter(self, query: CountQuery, candidates) -> Tuple[List[OrderElement], List[OrderElement]]:
        kept, boundary = [], []
        tolerance = self.boundary_tolerance * max(1.0, query.t)
        for coords in candidates:
            if self.norm_of(coords) != query.N:
                continue
            u = self.element_u(coords, query.z)
            element = OrderElement(tuple(int(v) for v in coords))
            if abs(u - query.t) <= tolerance:
                boundary.append(element)
            if u < query.t:
                kept.append(element)
        return sorted(kept), sorted(boundary)

    def _run_slab(self, form: PulledBackForm, target: int, radius: float, slab: range) -> np.ndarray:
        capacity = self.capacity
        while True:
            out = np.zeros((capacity, 4), dtype=np.int64)
            found = _enumerate_kernel(form.upper, self.trace_form, np.int64(target), float(radius),
                                      np.int64(slab.start), np.int64(slab.stop - 1), out)
            if found <= capacity:
                return out[:found]
            capacity = int(found)

    def enumerate(self, query: CountQuery, slabs: Optional[int] = None,
                  threads: Optional[int] = None) -> EnumerationResult:
        """
        Enumerate every γ with N(γ) = N and u(γz, z) < t.

        Args:
            query: Count query
            slabs: Number of pieces the outermost coordinate range is split into
            threads: Parallelism cap for slab enumeration

        Returns:
            EnumerationResult with elements sorted canonically
        """
        threads = resolve_threads(threads)
        form = self.gram_form(query.z)
        radius = query.search_radius(self.margin)
        width3 = math.sqrt(radius) / form.upper[3, 3]
        lo3, hi3 = int(math.floor(-width3)), int(math.ceil(width3))
        pieces = split_range(lo3, hi3, slabs or threads)

        chunks = run_tasks(lambda piece: self._run_slab(form, 2 * query.N, radius, piece),
                           pieces, threads=threads, label='slabs')
        candidates = np.concatenate(chunks) if chunks else np.zeros((0, 4), dtype=np.int64)
        kept, boundary = self._filter(query, candidates)

        if boundary:
            logger.warning(f"⚠️  {len(boundary)} boundary element(s) for N={query.N}, t={query.t}")
        logger.info(f"✅ M({query.N}, {query.t}; {query.z.to_list()}) = {len(kept)} "
                    f"from {len(candidates)} candidates")
        return EnumerationResult(query=query, elements=tuple(kept), boundary_count=len(boundary),
                                 candidates=len(candidates), slabs=len(pieces),
                                 boundary=tuple(boundary))

    def count(self, query: CountQuery, slabs: Optional[int] = None,
              threads: Optional[int] = None) -> int:
        """M(N, t; z)."""
        return self.enumerate(query, slabs=slabs, threads=threads).count

    def box_scan(self, query: CountQuery) -> EnumerationResult:
        """Naive scan of the coordinate bounding box of the search ellipsoid."""
        form = self.gram_form(query.z)
        radius = query.search_radius(self.margin)
        bounds = np.ceil(form.coordinate_bounds(radius)).astype(np.int64)
        axes = [np.arange(-b, b + 1, dtype=np.int64) for b in bounds]
        g = self.trace_form
        target = 2 * query.N

        c0 = axes[0][:, None, None]
        c1 = axes[1][None, :, None]
        c2 = axes[2][None, None, :]
        hits = []
        for c3 in axes[3]:
            grid = (c0, c1, c2, c3)
            total = np.zeros((len(axes[0]), len(axes[1]), len(axes[2])), dtype=np.int64)
            for r in range(4):
                for s in range(4):
                    if g[r, s]:
                        total = total + g[r, s] * grid[r] * grid[s]
            i0, i1, i2 = np.nonzero(total == target)
            for a, b, c in zip(i0, i1, i2):
                hits.append((int(axes[0][a]), int(axes[1][b]), int(axes[2][c]), int(c3)))

        kept, boundary = self._filter(query, hits)
        return EnumerationResult(query=query, elements=tuple(kept), boundary_count=len(boundary),
                                 candidates=len(hits), method='box_scan',
                                 boundary=tuple(boundary))

    def growth_scan(self, p: int, k_max: int, t: float, z: PlanePoint,
                    threads: Optional[int] = None) -> Tuple[pd.DataFrame, float]:
        """
        Tabulate M(p^k, t; z) for k = 0..k_max against tN² and ((t + t^{1/4})N + 1).

        Returns:
            (table, least-squares slope of log M against log N)
        """
        require(InputValidator.validate_prime(p))
        if t <= 1:
            raise ValidationError(f"growth_scan needs t > 1, got {t}")
        rows = []
        for k in range(k_max + 1):
            n = p ** k
            try:
                count = self.count(CountQuery(n, t, z), threads=threads)
            except LabError as exc:
                logger.error(f"❌ growth_scan aborted at N={n}: {exc}")
                rows.append({'k': k, 'N': n, 'count': None, 'ratio': None,
                             'reference_bound': None, 'reference_ratio': None, 'status': 'failed'})
                break
            reference = (t + t ** 0.25) * n + 1
            rows.append({
                'k': k,
                'N': n,
                'count': count,
                'ratio': count / (t * n * n),
                'reference_bound': reference,
                'reference_ratio': count / reference,
                'status': 'ok',
            })
        table = pd.DataFrame(rows, columns=['k', 'N', 'count', 'ratio', 'reference_bound',
                                            'reference_ratio', 'status'])
        table.attrs['partial'] = bool((table['status'] != 'ok').any())
        return table, fit_slope(table)

    def delta_scan(self, p: int, k_max: int, z: PlanePoint,
                   threshold: int = Config.SMALL_COUNT_THRESHOLD,
                   threads: Optional[int] = None) -> pd.DataFrame:
        """M(N, N⁻⁴; z) for N = p^k, flagging rows above the small-count threshold."""
        require(InputValidator.validate_prime(p))
        rows = []
        for k in range(k_max + 1):
            n = p ** k
            delta = float(n) ** -4
            result = self.enumerate(CountQuery(n, delta, z), threads=threads)
            central = sum(1 for e in result.elements if self.order.is_central(e))
            rows.append({
                'k': k,
                'N': n,
                'delta': delta,
                'count': result.count,
                'central': central,
                'is_square': integer_nthroot(n, 2)[1],
                'flagged': result.count > threshold,
            })
        table = pd.DataFrame(rows)
        if table['flagged'].any():
            logger.warning(f"⚠️  delta_scan: {int(table['flagged'].sum())} row(s) above {threshold}")
        return table


def fit_slope(table: pd.DataFrame) -> float:
    """Least-squares slope of log M against log N over rows with M > 0."""
    usable = table[(table['status'] == 'ok') & (table['count'].fillna(0) > 0)]
    if len(usable) < 2:
        return float('nan')
    x = np.log(usable['N'].astype(float).to_numpy())
    y = np.log(usable['count'].astype(float).to_numpy())
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)

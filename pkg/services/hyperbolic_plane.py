"""
Geometry of the upper half-plane in double precision.
"""

import math

import numpy as np

from models.plane import Isometry, PlanePoint


def act(g: Isometry, z: PlanePoint) -> PlanePoint:
    """Möbius action (az + b)/(cz + d), evaluated in real arithmetic."""
    a, b, c, d = g.entries()
    re_den = c * z.x + d
    im_den = c * z.y
    den = re_den * re_den + im_den * im_den
    re_num = a * z.x + b
    im_num = a * z.y
    x = (re_num * re_den + im_num * im_den) / den
    y = g.det * z.y / den
    return PlanePoint(x, y)


def point_pair_u(z: PlanePoint, w: PlanePoint) -> float:
    """u(z, w) = |z − w|² / (4 Im z Im w)."""
    dx = z.x - w.x
    dy = z.y - w.y
    return (dx * dx + dy * dy) / (4.0 * z.y * w.y)


def distance(z: PlanePoint, w: PlanePoint) -> float:
    """Hyperbolic distance 2·arcsinh(√u)."""
    return 2.0 * math.asinh(math.sqrt(point_pair_u(z, w)))


def transporter(z: PlanePoint) -> Isometry:
    """σ_z = [[√y, x/√y], [0, 1/√y]], the unit-determinant map sending i to z."""
    root = math.sqrt(z.y)
    return Isometry(root, z.x / root, 0.0, 1.0 / root)


def compose(g: Isometry, h: Isometry) -> Isometry:
    """The map z ↦ g(h(z))."""
    return Isometry.from_matrix(g.matrix() @ h.matrix())


def inverse(g: Isometry) -> Isometry:
    """Adjugate of g; it induces the inverse Möbius map."""
    a, b, c, d = g.entries()
    return Isometry(d, -b, -c, a)


def displacement(m: np.ndarray, z: PlanePoint) -> float:
    """u(m·z, z) for a 2×2 real matrix with positive determinant."""
    return point_pair_u(act(Isometry.from_matrix(m), z), z)


def frobenius_residual(m: np.ndarray) -> float:
    """
    Relative residual of ‖m‖²_F = 2N(1 + 2u(m·i, i)), N = det m.

    This identity converts u-balls into ellipsoids for the lattice counter.
    """
    m = np.asarray(m, dtype=float)
    det = float(np.linalg.det(m))
    lhs = float(np.sum(m * m))
    rhs = 2.0 * det * (1.0 + 2.0 * displacement(m, PlanePoint.i()))
    return abs(lhs - rhs) / max(abs(lhs), 1.0)

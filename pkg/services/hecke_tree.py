"""
Hecke operators on the truncated (p+1)-regular tree.

S_k sends f to v ↦ Σ_{d(v,w)=k} f(w); U(n) = Σ_{k≤n, k≡n (2)} S_k, and T(pⁿ) = p^{−n/2}U(n).
Rows are built lazily. Identities are only checked on rows whose support stays inside the
truncation: a product of orders a and b is exact on vertices of depth ≤ R − a − b.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from config.settings import Config
from models.satake import EigenvalueSequence, SatakeParameter
from models.tree import TruncatedTree
from services.amplifier import expand_KL
from utils.validators import ValidationError

logger = logging.getLogger(__name__)

Row = Dict[int, float]

ROW_CACHE = 200_000
MISMATCH_SAMPLE = 5


def build_tree(p: int, radius: int) -> TruncatedTree:
    tree = TruncatedTree(p, radius)
    logger.info(f"Built {tree}")
    return tree


class TreeOperator:
    """Operator with rows computed on demand: row(v) maps w to the (v, w) entry."""

    def __init__(self, tree: TruncatedTree, name: str, order: int,
                 compute: Callable[[int], Row]):
        self.tree = tree
        self.name = name
        # rows of vertices at depth ≤ R − order are complete
        self.order = order
        self._row = lru_cache(maxsize=ROW_CACHE)(compute)

    def __repr__(self) -> str:
        return f"TreeOperator({self.name}, p={self.tree.p}, R={self.tree.radius})"

    def row(self, v: int) -> Row:
        return self._row(v)

    def row_sum(self, v: int) -> float:
        return sum(self.row(v).values())

    def interior(self) -> range:
        return self.tree.ball(self.tree.radius - self.order)

    def apply_at(self, v: int, f: np.ndarray) -> float:
        return float(sum(c * f[w] for w, c in self.row(v).items()))

    def to_dense(self) -> np.ndarray:
        """Full matrix; only meant for small trees."""
        size = self.tree.vertex_count
        dense = np.zeros((size, size))
        for v in range(size):
            for w, c in self.row(v).items():
                dense[v, w] = c
        return dense


def sphere_operator(tree: TruncatedTree, k: int) -> TreeOperator:
    """S_k, the distance-k adjacency."""
    if not 0 <= k <= tree.radius:
        raise ValidationError(f"Sphere radius {k} must lie in [0, {tree.radius}]")
    return TreeOperator(tree, f'S_{k}', k, lambda v: {w: 1 for w in tree.sphere(v, k)})


def hecke_operator(tree: TruncatedTree, n: int) -> TreeOperator:
    """U(n) = Σ_{k≤n, k≡n mod 2} S_k, the unnormalized T(pⁿ)."""
    if not 0 <= n <= tree.radius:
        raise ValidationError(f"Hecke order {n} must lie in [0, {tree.radius}]")

    def compute(v: int) -> Row:
        row: Row = {}
        for k, layer in enumerate(tree.layers(v, n)):
            if (n - k) % 2 == 0:
                row.update((w, 1) for w in layer)
        return row

    return TreeOperator(tree, f'U_{n}', n, compute)


def hecke_scale(p: int, n: int) -> float:
    """p^{−n/2}, the factor taking U(n) to T(pⁿ)."""
    return p ** (-n / 2)


def compose_row(left: TreeOperator, right: TreeOperator, v: int) -> Row:
    """Row v of left·right."""
    row: Row = {}
    for w, a in left.row(v).items():
        for x, b in right.row(w).items():
            row[x] = row.get(x, 0) + a * b
    return row


def combine_rows(terms: List, v: int) -> Row:
    """Row v of Σ coefficient·operator over (coefficient, operator) pairs."""
    row: Row = {}
    for coefficient, operator in terms:
        for w, a in operator.row(v).items():
            row[w] = row.get(w, 0) + coefficient * a
    return row


def valuation(p: int, m: int) -> int:
    """Exponent e with m = p^e, or ValidationError when m is not a power of p."""
    if m < 1:
        raise ValidationError(f"{m} is not a power of {p}")
    e = 0
    while m % p == 0:
        m //= p
        e += 1
    if m != 1:
        raise ValidationError(f"{m * p ** e} is not a power of {p}")
    return e


@dataclass
class HeckeReport:
    """Outcome of an exact row-by-row identity check."""

    identity: str
    p: int
    radius: int
    rows_checked: int = 0
    mismatches: List[Dict] = field(default_factory=list)
    mismatch_count: int = 0

    @property
    def passed(self) -> bool:
        return self.mismatch_count == 0

    def record(self, v: int, lhs: Row, rhs: Row) -> None:
        self.rows_checked += 1
        left = {w: c for w, c in lhs.items() if c}
        right = {w: c for w, c in rhs.items() if c}
        if left == right:
            return
        self.mismatch_count += 1
        if len(self.mismatches) < MISMATCH_SAMPLE:
            column = min(w for w in set(left) | set(right) if left.get(w, 0) != right.get(w, 0))
            self.mismatches.append({'row': v, 'column': column,
                                    'lhs': left.get(column, 0), 'rhs': right.get(column, 0)})

    def to_dict(self) -> Dict:
        return {
            'identity': self.identity,
            'p': self.p,
            'radius': self.radius,
            'rows_checked': self.rows_checked,
            'mismatch_count': self.mismatch_count,
            'mismatches': self.mismatches,
            'passed': self.passed,
        }


def verify_hecke_relation(tree: TruncatedTree, m: int, n: int) -> HeckeReport:
    """
    Check U(a)U(b) = Σ_{i≤min(a,b)} pⁱ U(a+b−2i) for m = pᵃ, n = pᵇ in exact integers,
    which is T(m)T(n) = Σ_{d|(m,n)} T(mn/d²) after scaling.
    """
    p = tree.p
    a, b = valuation(p, m), valuation(p, n)
    if a + b > tree.radius:
        raise ValidationError(f"Insufficient radius: orders {a}+{b} exceed R = {tree.radius}")

    left, right = hecke_operator(tree, a), hecke_operator(tree, b)
    terms = [(p ** i, hecke_operator(tree, a + b - 2 * i)) for i in range(min(a, b) + 1)]
    report = HeckeReport(f'U({a})U({b})', p, tree.radius)
    for v in tree.ball(tree.radius - a - b):
        report.record(v, compose_row(left, right, v), combine_rows(terms, v))

    status = '✅' if report.passed else '❌'
    logger.info(f"{status} Hecke relation p={p} a={a} b={b}: "
                f"{report.rows_checked} rows, {report.mismatch_count} mismatches")
    return report


def verify_sphere_recursion(tree: TruncatedTree, k: int) -> HeckeReport:
    """S_1 S_1 = S_2 + (p+1)S_0 and S_1 S_k = S_{k+1} + p S_{k−1} for k ≥ 2."""
    p = tree.p
    if not 1 <= k <= tree.radius - 1:
        raise ValidationError(f"Sphere recursion needs 1 ≤ k ≤ {tree.radius - 1}")
    s1 = sphere_operator(tree, 1)
    sk = sphere_operator(tree, k)
    below = p + 1 if k == 1 else p
    terms = [(1, sphere_operator(tree, k + 1)), (below, sphere_operator(tree, k - 1))]
    report = HeckeReport(f'S_1 S_{k}', p, tree.radius)
    for v in tree.ball(tree.radius - k - 1):
        report.record(v, compose_row(s1, sk, v), combine_rows(terms, v))
    return report


def verify_row_sums(tree: TruncatedTree) -> pd.DataFrame:
    """Interior row sums of S_k and U(n) against (p+1)p^{k−1} and (p^{n+1}−1)/(p−1)."""
    p = tree.p
    rows = []
    for k in range(tree.radius + 1):
        sphere_expected = 1 if k == 0 else (p + 1) * p ** (k - 1)
        hecke_expected = sum(1 if j == 0 else (p + 1) * p ** (j - 1)
                             for j in range(k % 2, k + 1, 2))
        sphere, hecke = sphere_operator(tree, k), hecke_operator(tree, k)
        interior = tree.ball(tree.radius - k)
        sphere_ok = all(sphere.row_sum(v) == sphere_expected for v in interior)
        hecke_ok = all(hecke.row_sum(v) == hecke_expected for v in interior)
        rows.append({'k': k, 'sphere_sum': sphere_expected, 'hecke_sum': hecke_expected,
                     'interior_rows': len(interior), 'passed': sphere_ok and hecke_ok})
    return pd.DataFrame(rows)


def spherical_function(tree: TruncatedTree, parameter: SatakeParameter) -> np.ndarray:
    """
    Radial eigenfunction of S_1 with eigenvalue μ = √p·λ(p), as values per depth:
    ω(0) = 1, ω(1) = μ/(p+1), ω(k+1) = (μω(k) − ω(k−1))/p.
    """
    p = tree.p
    mu = math.sqrt(p) * parameter.lambda_p
    omega = np.empty(tree.radius + 1)
    omega[0] = 1.0
    omega[1] = mu / (p + 1)
    for k in range(1, tree.radius):
        omega[k + 1] = (mu * omega[k] - omega[k - 1]) / p
    return omega


def eigenvalue_consistency(tree: TruncatedTree, parameter: SatakeParameter, n: int) -> Dict:
    """
    Residual of λ(pⁿ⁺¹) = λ(pⁿ)λ(p) − λ(pⁿ⁻¹) and of (U(k)φ)(root) = p^{k/2}λ(p^k), k ≤ n+1,
    where φ is the spherical function of the parameter.
    """
    if not 1 <= n <= tree.radius - 1:
        raise ValidationError(f"Order {n} must lie in [1, {tree.radius - 1}]")
    p = tree.p
    seq = EigenvalueSequence(p, parameter, n + 1)
    recurrence = abs(seq[n + 1] - (seq[n] * seq[1] - seq[n - 1])) / max(1.0, abs(seq[n + 1]))

    omega = spherical_function(tree, parameter)
    spherical = 0.0
    for k in range(n + 2):
        row = hecke_operator(tree, k).row(0)
        value = sum(omega[tree.depth(w)] for w in row)
        expected = p ** (k / 2) * seq[k]
        spherical = max(spherical, abs(value - expected) / max(1.0, abs(expected)))

    tolerance = Config.RECURRENCE_TOLERANCE
    return {
        'p': p,
        'n': n,
        'parameter': parameter.to_dict(),
        'recurrence_residual': recurrence,
        'spherical_residual': spherical,
        'passed': recurrence <= tolerance and spherical <= tolerance * 10,
    }


def verify_expansion_on_tree(tree: TruncatedTree, seq: EigenvalueSequence, L: int) -> Dict:
    """
    Build K_L = (Σ_{n≤L} λ(pⁿ)T(pⁿ))² on the tree and compare it row by row with the
    expansion Σ_M c(M)T(M).
    """
    p = tree.p
    if seq.p != p:
        raise ValidationError(f"Sequence prime {seq.p} differs from tree prime {p}")
    if 2 * L > tree.radius:
        raise ValidationError(f"Insufficient radius: need R ≥ {2 * L}, got {tree.radius}")

    amplifier_terms = [(seq[n] * hecke_scale(p, n), hecke_operator(tree, n))
                       for n in range(1, L + 1)]
    amplifier = TreeOperator(tree, f'A_{L}', L, lambda v: combine_rows(amplifier_terms, v))
    expansion = expand_KL({p: seq}, [p], L)
    expanded_terms = [(c * hecke_scale(p, exps[0]), hecke_operator(tree, exps[0]))
                      for exps, (_, c) in zip(expansion.exponents, expansion.terms)]

    worst = scale = 0.0
    rows = tree.ball(tree.radius - 2 * L)
    for v in rows:
        lhs = compose_row(amplifier, amplifier, v)
        rhs = combine_rows(expanded_terms, v)
        for w in set(lhs) | set(rhs):
            worst = max(worst, abs(lhs.get(w, 0.0) - rhs.get(w, 0.0)))
            scale = max(scale, abs(lhs.get(w, 0.0)))

    relative = worst / scale if scale else worst
    passed = relative <= Config.THRESHOLDS['expansion_relative']
    logger.info(f"{'✅' if passed else '❌'} Expansion on tree p={p} L={L}: relative {relative:.3e}")
    return {
        'p': p,
        'L': L,
        'rows_checked': len(rows),
        'terms': len(expansion.terms),
        'relative_error': relative,
        'passed': passed,
    }


def tree_report(tree: TruncatedTree, pairs: Optional[List] = None) -> Dict:
    """All Hecke relations with a + b ≤ min(R, 4) plus sphere recursions and row sums."""
    p = tree.p
    limit = min(tree.radius, 4)
    if pairs is None:
        pairs = [(a, b) for a in range(limit + 1) for b in range(limit + 1) if a + b <= limit]
    relations = [verify_hecke_relation(tree, p ** a, p ** b).to_dict() for a, b in pairs]
    recursions = [verify_sphere_recursion(tree, k).to_dict()
                  for k in range(1, min(tree.radius - 1, limit) + 1)]
    sums = verify_row_sums(tree)
    return {
        'p': p,
        'radius': tree.radius,
        'vertex_count': tree.vertex_count,
        'relations': relations,
        'sphere_recursions': recursions,
        'row_sums_passed': bool(sums['passed'].all()),
        'passed': (all(r['passed'] for r in relations)
                   and all(r['passed'] for r in recursions)
                   and bool(sums['passed'].all())),
    }

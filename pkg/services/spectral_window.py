"""
Spectral window, kernel envelope and the bound planner.

The window is h(ξ) = (χ̂(ξ)/χ̂(0))², the normalized transform of ψ = χ∗χ for the bump
χ(x) = exp(−1/(1 − (4x)²)) on (−1/4, 1/4). All quadrature is composite Gauss–Legendre.
Planner quantities are carried as logarithms so log λ up to 10⁶ stays finite.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config.settings import Config
from models.plane import PlanePoint
from models.satake import AmplifierSupport, EigenvalueSequence
from services.lattice_counting import CountQuery, LatticeCounter
from utils.validators import (InputValidator, PlanError, QuadratureError, ValidationError,
                              ensure_primes, require)

logger = logging.getLogger(__name__)

CHI_SUPPORT = 0.25
PSI_SUPPORT = 0.5
# radians of oscillation allowed per 16-node panel
PANEL_PHASE = 8.0
TRANSFORM_PANEL_WIDTH = 4.0
CHUNK = 4_000_000
MAX_FAR_RADIUS = 1e4


@lru_cache(maxsize=8)
def _legendre(points: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(points)


def composite_rule(lo: float, hi: float, panels: int,
                   points: int = Config.QUADRATURE_PANEL) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the composite Gauss–Legendre rule on [lo, hi]."""
    nodes, weights = _legendre(points)
    edges = np.linspace(lo, hi, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return x, w


def bump(x) -> np.ndarray:
    """χ(x) = exp(−1/(1 − (4x)²)) inside (−1/4, 1/4), zero outside."""
    x = np.asarray(x, dtype=float)
    y = 4.0 * x
    out = np.zeros_like(y)
    inside = np.abs(y) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - y[inside] ** 2))
    return out


def bump_transform(xi, panels: int) -> np.ndarray:
    """χ̂(ξ) = ∫χ(x)cos(ξx)dx with `panels` 16-node panels on the support of χ."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    x, w = composite_rule(-CHI_SUPPORT, CHI_SUPPORT, panels)
    weighted = w * bump(x)
    step = max(1, CHUNK // x.size)
    out = np.empty(xi.size)
    for start in range(0, xi.size, step):
        block = xi[start:start + step]
        out[start:start + step] = np.cos(np.outer(block, x)) @ weighted
    return out


@dataclass(frozen=True, eq=False)
class WindowFunction:
    """Samples of χ, ψ = χ∗χ and h, with the quadrature that produced them."""

    nodes: int
    panels: int
    xi: np.ndarray
    h: np.ndarray
    x: np.ndarray
    chi: np.ndarray
    t: np.ndarray
    psi: np.ndarray
    normalization: float
    stability: float
    rule: str = field(default='gauss-legendre-16')

    def h_at(self, xi, panels: Optional[int] = None) -> np.ndarray:
        """h at arbitrary frequencies; a finer rule is used when asked for."""
        panels = panels or self.panels
        values = bump_transform(xi, panels)
        root = bump_transform([0.0], panels)[0]
        return (values / root) ** 2

    def psi_at(self, t) -> np.ndarray:
        return convolve_bump(t, self.panels)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'xi': self.xi, 'h': self.h})

    def psi_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'t': self.t, 'psi': self.psi,
                             'psi_normalized': self.psi / self.normalization})

    def summary(self) -> Dict:
        zero = int(np.argmin(np.abs(self.xi)))
        return {
            'nodes': self.nodes,
            'rule': self.rule,
            'normalization': self.normalization,
            'h0': float(self.h[zero]),
            'min_h': float(np.min(self.h)),
            'stability': self.stability,
        }


def convolve_bump(t, panels: int) -> np.ndarray:
    """ψ(t) = ∫χ(s)χ(t − s)ds over the overlap of the two supports."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros(t.size)
    for index, value in enumerate(t):
        lo = max(-CHI_SUPPORT, value - CHI_SUPPORT)
        hi = min(CHI_SUPPORT, value + CHI_SUPPORT)
        if hi <= lo:
            continue
        s, w = composite_rule(lo, hi, panels)
        out[index] = float(np.dot(w, bump(s) * bump(value - s)))
    return out


def build_window(nodes: int, half_width: float = Config.WINDOW_GRID_HALF_WIDTH,
                 step: float = 0.05, psi_points: int = 201) -> WindowFunction:
    """
    Sample h on [−half_width, half_width] and check the rule against one with twice the nodes.

    Raises:
        ValidationError: bad node count
        QuadratureError: doubling the nodes moves h by more than the quadrature tolerance
    """
    require(InputValidator.validate_nodes(nodes))
    panels = nodes // Config.QUADRATURE_PANEL
    count = int(round(half_width / step))
    xi = step * np.arange(-count, count + 1)
    zero = count

    coarse = bump_transform(xi, panels)
    fine = bump_transform(xi, 2 * panels)
    h = (coarse / coarse[zero]) ** 2
    stability = float(np.max(np.abs(h - (fine / fine[zero]) ** 2)))
    if stability > Config.QUADRATURE_TOLERANCE:
        raise QuadratureError(f"Window quadrature unstable: doubling {nodes} nodes moved h by "
                              f"{stability:.3e}")

    x = np.linspace(-CHI_SUPPORT, CHI_SUPPORT, 201)
    t = np.linspace(-PSI_SUPPORT, PSI_SUPPORT, psi_points)
    window = WindowFunction(
        nodes=nodes,
        panels=panels,
        xi=xi,
        h=h,
        x=x,
        chi=bump(x),
        t=t,
        psi=convolve_bump(t, panels),
        normalization=float(coarse[zero] ** 2),
        stability=stability,
    )
    logger.info(f"✅ Window built with {nodes} nodes: min h = {np.min(h):.3e}, "
                f"doubling change {stability:.3e}")
    return window


def reconstruct_transform(window: WindowFunction, t, cutoff: float = Config.TRANSFORM_CUTOFF
                          ) -> pd.DataFrame:
    """
    ĥ(t) = (1/π)∫₀^cutoff h(ξ)cos(ξt)dξ next to the direct value ψ(t)/∫ψ (zero for |t| ≥ 1/2).
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    panels = int(math.ceil(cutoff / TRANSFORM_PANEL_WIDTH))
    xi, w = composite_rule(0.0, cutoff, panels)
    chi_panels = max(window.panels, int(math.ceil(cutoff * 2 * CHI_SUPPORT / PANEL_PHASE)))
    weighted = w * window.h_at(xi, panels=chi_panels)

    reconstructed = np.cos(np.outer(t, xi)) @ weighted / math.pi
    inside = np.abs(t) < PSI_SUPPORT
    direct = np.zeros(t.size)
    if inside.any():
        direct[inside] = convolve_bump(t[inside], chi_panels) / window.normalization
    return pd.DataFrame({
        't': t,
        'reconstructed': reconstructed,
        'direct': direct,
        'error': np.abs(reconstructed - direct),
    })


def window_properties(window: WindowFunction, probes: Sequence[float] = (0.5, 0.6, 0.75, 1.0, 2.0)
                      ) -> Dict:
    """h(0), min h, doubling stability and the largest reconstructed |ĥ| outside the support."""
    summary = window.summary()
    leakage = float(reconstruct_transform(window, probes)['reconstructed'].abs().max())
    thresholds = Config.THRESHOLDS
    summary.update({
        'leakage': leakage,
        'passed': (summary['h0'] == 1.0
                   and summary['min_h'] >= thresholds['window_negativity']
                   and window.stability <= Config.QUADRATURE_TOLERANCE
                   and leakage < thresholds['transform_leakage']),
    })
    return summary


def _check_epsilon(log_lambda: float, eps: float) -> None:
    if not eps > 0 or math.log(eps) < -log_lambda or eps > 1:
        raise ValidationError(f"ε = {eps} must lie in [1/λ, 1] for log λ = {log_lambda}")


def log_kernel_envelope(d, log_lambda: float, eps: float, C: float) -> np.ndarray:
    """
    Logarithm of the kernel envelope: log(λε + e^{C/ε}) for d < 1, ½log(λ/d) + C/ε for
    1 < d ≤ 1/ε, the larger of the two at d = 1, and −∞ beyond 1/ε.
    """
    _check_epsilon(log_lambda, eps)
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise ValidationError("Distance must be nonnegative")
    near = np.logaddexp(log_lambda + math.log(eps), C / eps)
    with np.errstate(divide='ignore'):
        far = 0.5 * (log_lambda - np.log(d)) + C / eps
    out = np.where(d < 1, near, far)
    out = np.where(d == 1, np.maximum(near, far), out)
    return np.where(d > 1 / eps, -np.inf, out)


def kernel_envelope(d, log_lambda: float, eps: float, C: float):
    """The envelope itself; overflows to inf where the logarithm exceeds the float range."""
    logged = log_kernel_envelope(d, log_lambda, eps, C)
    with np.errstate(over='ignore'):
        values = np.exp(logged)
    return float(values) if np.ndim(values) == 0 else values


def log_term(log_value: float) -> Dict:
    """(log-value, sign) pair with a decimal rendering when representable."""
    if log_value == -math.inf:
        return {'log': '-inf', 'sign': 0, 'value': 0.0}
    return {'log': log_value, 'sign': 1,
            'value': math.exp(log_value) if log_value < 700 else None}


def singular_amplifier_log(primes: Sequence[int], L: int) -> float:
    """log A_L with every λ(pⁿ) = n + 1."""
    return len(primes) * math.log(sum((n + 1) ** 2 for n in range(1, L + 1)))


@dataclass(frozen=True)
class PlanInput:
    log_lambda: float
    primes: Tuple[int, ...]
    C: float = 1.0
    log_A: Optional[float] = None

    def __post_init__(self):
        if not self.log_lambda > 1:
            raise ValidationError(f"Need λ > e, got log λ = {self.log_lambda}")
        require(InputValidator.validate_positive(self.C, 'C'))
        object.__setattr__(self, 'primes', ensure_primes(self.primes))


@dataclass(frozen=True)
class PlanOutput:
    L: int
    c: float
    eps: float
    log_term1: float
    log_term2: float
    log_bound: float
    log_A: float
    saving_exponent: float
    dominant: bool
    inputs: PlanInput

    def to_dict(self) -> Dict:
        return {
            'log_lambda': self.inputs.log_lambda,
            'primes': list(self.inputs.primes),
            'C': self.inputs.C,
            'L': self.L,
            'c': self.c,
            'epsilon': self.eps,
            'log_A_L': self.log_A,
            'term1': log_term(self.log_term1),
            'term2': log_term(self.log_term2),
            'bound': log_term(self.log_bound),
            'bound_shape': f"lambda/(log lambda)^{len(self.inputs.primes) + 1}",
            'saving_exponent': self.saving_exponent,
            'dominant': self.dominant,
        }


def plan(request: PlanInput) -> PlanOutput:
    """
    L = ⌊log λ/(100 log Πp)⌋, c = 4C + 4, ε = c/log λ;
    term1 = (λ/log λ)A_L, term2 = λ^{1/2+(C+1)/c}L^{|P|}A_L Πp^{7L}, bound λ/(log λ)^{|P|+1}.
    """
    log_lambda = request.log_lambda
    primes = request.primes
    log_prod = sum(math.log(p) for p in primes)
    L = int(math.floor(log_lambda / (100 * log_prod)))
    if L < 1:
        raise PlanError(f"L = {L} < 1: log λ = {log_lambda} is too small for primes {list(primes)}")

    c = 4 * request.C + 4
    eps = c / log_lambda
    log_A = request.log_A if request.log_A is not None else singular_amplifier_log(primes, L)
    log_log = math.log(log_lambda)
    log_term1 = log_lambda - log_log + log_A
    log_term2 = ((0.5 + (request.C + 1) / c) * log_lambda + len(primes) * math.log(L)
                 + log_A + 7 * L * log_prod)
    output = PlanOutput(
        L=L,
        c=c,
        eps=eps,
        log_term1=log_term1,
        log_term2=log_term2,
        log_bound=log_lambda - (len(primes) + 1) * log_log,
        log_A=log_A,
        saving_exponent=(len(primes) + 1) / 2,
        dominant=log_term2 <= log_term1,
        inputs=request,
    )
    logger.info(f"Plan log λ={log_lambda}: L={L}, dominant={output.dominant}")
    return output


def dominance_threshold(primes: Sequence[int], C: float = 1.0, start: float = 2.0,
                        factor: float = 1.25, steps: int = 60) -> Tuple[Dict, pd.DataFrame]:
    """
    Scan log λ = start·factor^k and report the first dominant grid point and whether dominance
    persists over the rest of the grid.
    """
    if start <= 1 or factor <= 1 or steps < 1:
        raise ValidationError("Need start > 1, factor > 1 and at least one step")
    rows = []
    for k in range(steps):
        log_lambda = start * factor ** k
        try:
            output = plan(PlanInput(log_lambda, tuple(primes), C))
            rows.append({'log_lambda': log_lambda, 'L': output.L, 'status': 'ok',
                         'log_ratio': output.log_term2 - output.log_term1,
                         'dominant': output.dominant})
        except PlanError:
            rows.append({'log_lambda': log_lambda, 'L': 0, 'status': 'L<1',
                         'log_ratio': None, 'dominant': False})
    table = pd.DataFrame(rows)
    dominant = table.index[table['dominant']].tolist()
    threshold = float(table.loc[dominant[0], 'log_lambda']) if dominant else None
    monotone = bool(dominant) and bool(table.loc[dominant[0]:, 'dominant'].all())
    return {'primes': list(primes), 'C': C, 'threshold': threshold, 'monotone': monotone}, table


@dataclass(frozen=True)
class SplittingEstimate:
    N: int
    delta: float
    t_far: float
    near_count: int
    far_count: int
    log_near_prefactor: float
    log_far_prefactor: float

    @property
    def log_near(self) -> float:
        return self.log_near_prefactor + math.log(self.near_count) if self.near_count else -math.inf

    @property
    def log_far(self) -> float:
        return self.log_far_prefactor + math.log(self.far_count) if self.far_count else -math.inf

    def to_dict(self) -> Dict:
        return {
            'N': self.N,
            'delta': self.delta,
            't_far': self.t_far,
            'near_count': self.near_count,
            'far_count': self.far_count,
            'near': log_term(self.log_near),
            'far': log_term(self.log_far),
        }


def splitting_estimate(counter: LatticeCounter, N: int, delta: float, log_lambda: float,
                       eps: float, C: float, z: PlanePoint,
                       threads: Optional[int] = None) -> SplittingEstimate:
    """
    near = (λ/log λ)·M(N, δ; z) and far = (λ/log(1+2δ))^{1/2}λ^{C/c}·M(N, λ^{1/c}; z),
    with c = ε log λ and both counts from the enumerator.
    """
    require(InputValidator.validate_positive(delta, 'delta'))
    _check_epsilon(log_lambda, eps)
    c = eps * log_lambda
    t_far = math.exp(log_lambda / c)
    if t_far > MAX_FAR_RADIUS:
        raise ValidationError(f"Far radius λ^(1/c) = {t_far:.3g} exceeds {MAX_FAR_RADIUS:g}")

    near_count = counter.count(CountQuery(N, delta, z), threads=threads)
    far_count = counter.count(CountQuery(N, t_far, z), threads=threads)
    return SplittingEstimate(
        N=N,
        delta=delta,
        t_far=t_far,
        near_count=near_count,
        far_count=far_count,
        log_near_prefactor=log_lambda - math.log(log_lambda),
        log_far_prefactor=(0.5 * (log_lambda - math.log(math.log1p(2 * delta)))
                           + (C / c) * log_lambda),
    )


def amplified_splitting(counter: LatticeCounter, seqs: Mapping[int, EigenvalueSequence],
                        primes: Sequence[int], L: int, log_lambda: float, eps: float, C: float,
                        z: PlanePoint, threads: Optional[int] = None) -> Tuple[Dict, pd.DataFrame]:
    """
    Σ over m, n ∈ M(P, L) and d | (m, n) of |λ(m)λ(n)|·d/√(mn) times the splitting estimate
    at N = mn/d² with δ = (√(mn)/d)⁻⁸.
    """
    support = AmplifierSupport(tuple(primes), L)
    estimates: Dict[int, SplittingEstimate] = {}
    weights: Dict[int, float] = {}
    for m_exps in support.exponent_vectors():
        for n_exps in support.exponent_vectors():
            weight = 1.0
            for p, k, l in zip(support.primes, m_exps, n_exps):
                weight *= abs(seqs[p][k] * seqs[p][l])
            ranges = [range(min(k, l) + 1) for k, l in zip(m_exps, n_exps)]
            for d_exps in product(*ranges):
                N = support.modulus(tuple(k + l - 2 * i
                                          for k, l, i in zip(m_exps, n_exps, d_exps)))
                weights[N] = weights.get(N, 0.0) + weight / math.sqrt(N)

    rows = []
    near_logs: List[float] = []
    far_logs: List[float] = []
    for N in sorted(weights):
        estimate = splitting_estimate(counter, N, float(N) ** -4, log_lambda, eps, C, z,
                                      threads=threads)
        estimates[N] = estimate
        log_weight = math.log(weights[N]) if weights[N] > 0 else -math.inf
        near_logs.append(log_weight + estimate.log_near)
        far_logs.append(log_weight + estimate.log_far)
        row = estimate.to_dict()
        row.update({'weight': weights[N], 'near': row['near']['log'], 'far': row['far']['log']})
        rows.append(row)

    near_total = float(np.logaddexp.reduce(near_logs)) if near_logs else -math.inf
    far_total = float(np.logaddexp.reduce(far_logs)) if far_logs else -math.inf
    summary = {
        'primes': list(support.primes),
        'L': L,
        'log_lambda': log_lambda,
        'epsilon': eps,
        'C': C,
        'z': z.to_list(),
        'near_total': log_term(near_total),
        'far_total': log_term(far_total),
        'moduli': len(weights),
    }
    return summary, pd.DataFrame(rows)

"""
Hecke eigenvalue sequences and the multi-prime amplifier.

Covers the closed form / recurrence pair for λ(pⁿ), multiplicative eigenvalues on
M(P, L), the lower-bound sweep for Σ|λ(pⁿ)|², the nontempered σ-identity, the expansion of
K_L into Hecke operators, the two-branch technical sum and the Cauchy–Schwarz efficiency check.
"""

import logging
import math
from itertools import product
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from sympy import factorint

from config.settings import Config
from models.satake import (NONTEMPERED, SINGULAR, TEMPERED, AmplifierExpansion,
                           AmplifierSupport, EigenvalueSequence, SatakeParameter)
from tasks.parallel import resolve_threads, run_tasks, split_range
from utils.validators import ValidationError

logger = logging.getLogger(__name__)

Sequences = Mapping[int, EigenvalueSequence]


def lambda_value(seq: EigenvalueSequence, n: int) -> float:
    """λ(pⁿ) from the closed form (or its singular limit)."""
    if n < 0:
        raise ValidationError(f"Exponent must be nonnegative, got {n}")
    return seq[n]


def recurrence_values(parameter: SatakeParameter, n_max: int) -> List[float]:
    """λ(p⁰..p^n_max) from λ(pⁿ⁺¹) = λ(pⁿ)λ(p) − λ(pⁿ⁻¹)."""
    values = [1.0]
    if n_max >= 1:
        values.append(parameter.lambda_p)
    for n in range(1, n_max):
        values.append(values[n] * parameter.lambda_p - values[n - 1])
    return values


def closed_vs_recurrence(parameter: SatakeParameter, n_max: int) -> Dict[str, float]:
    """Largest absolute and relative gap between the closed form and the recurrence."""
    recurrence = recurrence_values(parameter, n_max)
    absolute = relative = 0.0
    for n, value in enumerate(recurrence):
        closed = parameter.closed_form(n)
        gap = abs(closed - value)
        absolute = max(absolute, gap)
        relative = max(relative, gap / max(1.0, abs(closed)))
    return {'max_abs': absolute, 'max_rel': relative, 'n_max': n_max}


def regime_label(parameter: SatakeParameter, L: int) -> str:
    """'separated' when |α² − 1| > 1/L, otherwise 'near_singular'."""
    return 'separated' if parameter.separation() > 1.0 / L else 'near_singular'


def build_sequences(primes: Sequence[int], parameters: Sequence[SatakeParameter],
                    length: int) -> Dict[int, EigenvalueSequence]:
    """One sequence per prime; a single parameter is shared by all primes."""
    if len(parameters) == 1:
        parameters = list(parameters) * len(primes)
    if len(parameters) != len(primes):
        raise ValidationError(f"Got {len(parameters)} parameters for {len(primes)} primes")
    return {p: EigenvalueSequence(p, param, length) for p, param in zip(primes, parameters)}


def lambda_multiplicative(seqs: Sequences, m: int) -> float:
    """λ(m) = Π_p λ(p^{v_p(m)}) over the primes carried by seqs."""
    if m < 1:
        raise ValidationError(f"Modulus must be positive, got {m}")
    value = 1.0
    for p, e in factorint(m).items():
        if p not in seqs:
            raise ValidationError(f"Prime {p} of {m} is outside the amplifier prime set")
        value *= seqs[p][e]
    return value


def _lambda_from_exponents(seqs: Sequences, primes: Sequence[int], exps: Sequence[int]) -> float:
    value = 1.0
    for p, e in zip(primes, exps):
        value *= seqs[p][e]
    return value


def tempered_table(thetas: np.ndarray, L: int) -> np.ndarray:
    """Array of λ(pⁿ)(θ) for n = 1..L (rows) and the given angles (columns)."""
    thetas = np.asarray(thetas, dtype=float)
    n = np.arange(1, L + 1, dtype=float)[:, None]
    window = Config.SINGULAR_WINDOW
    near_zero = np.abs(thetas) <= window
    near_pi = np.abs(thetas - np.pi) <= window
    safe = np.where(near_zero | near_pi, 0.5, thetas)
    values = np.sin((n + 1.0) * safe) / np.sin(safe)
    values = np.where(near_zero, n + 1.0, values)
    values = np.where(near_pi, np.where(n % 2 == 0, 1.0, -1.0) * (n + 1.0), values)
    return values


def sum_lower_bound_sweep(p: int, L: int, theta_grid: Optional[Iterable[float]] = None,
                          step: float = 1e-3, threads: Optional[int] = None
                          ) -> Tuple[float, float, pd.DataFrame]:
    """
    S(θ, L)/L = Σ_{n≤L} λ(pⁿ)²/L over a grid in (0, π).

    Returns:
        (min ratio, argmin θ, table with columns theta, S, ratio, separation, regime)
    """
    if L < 1:
        raise ValidationError("L must be at least 1")
    if theta_grid is None:
        count = int(math.floor(math.pi / step))
        thetas = step * np.arange(1, count + 1)
        thetas = thetas[thetas < math.pi]
    else:
        thetas = np.asarray(list(theta_grid), dtype=float)
    if thetas.size == 0 or np.any((thetas <= 0) | (thetas >= math.pi)):
        raise ValidationError("Sweep grid must be a nonempty subset of (0, π)")

    pieces = split_range(0, thetas.size - 1, resolve_threads(threads))
    sums = np.concatenate(run_tasks(
        lambda piece: np.sum(tempered_table(thetas[piece.start:piece.stop], L) ** 2, axis=0),
        pieces, threads=threads, label='sweep'))
    ratios = sums / L
    separation = 2.0 * np.abs(np.sin(thetas))
    table = pd.DataFrame({
        'theta': thetas,
        'S': sums,
        'ratio': ratios,
        'separation': separation,
        'regime': np.where(separation > 1.0 / L, 'separated', 'near_singular'),
    })
    index = int(np.argmin(ratios))
    logger.info(f"✅ Sweep p={p} L={L}: min S/L = {ratios[index]:.6f} at θ = {thetas[index]:.6f}")
    return float(ratios[index]), float(thetas[index]), table


def sigma_values(seq: EigenvalueSequence, m_max: int) -> List[float]:
    """σ(p^m) = p^{m/2}λ(p^m) − p^{m/2−1}λ(p^{m−2}), the sphere-operator eigenvalues."""
    p = seq.p
    return [p ** (m / 2) * seq[m] - (p ** (m / 2 - 1) * seq[m - 2] if m >= 2 else 0.0)
            for m in range(m_max + 1)]


def nontempered_check(theta: float, L: int, p: int = 2, sign: int = 1) -> pd.DataFrame:
    """
    Check Σ_{k≤n} σ(p^{2k}) = pⁿ sinh((2n+1)θ)/sinh θ and |λ(pⁿ)| ≥ n+1 for n = 0..L.
    """
    parameter = SatakeParameter.nontempered(theta, sign)
    seq = EigenvalueSequence(p, parameter, 2 * L)
    sigma = sigma_values(seq, 2 * L)
    rows = []
    partial = 0.0
    for n in range(L + 1):
        partial += sigma[2 * n]
        closed = p ** n * math.sinh((2 * n + 1) * theta) / math.sinh(theta)
        residual = abs(partial - closed) / abs(closed)
        magnitude = abs(seq[n])
        rows.append({
            'n': n,
            'sigma_partial_sum': partial,
            'closed_form': closed,
            'relative_residual': residual,
            'lower_bound': (2 * n + 1) * p ** n,
            'lambda': seq[n],
            'dominates_singular': magnitude >= (n + 1) * (1 - 1e-12),
            'passed': residual <= 1e-9 and magnitude >= (n + 1) * (1 - 1e-12),
        })
    return pd.DataFrame(rows)


def amplifier_value(seqs: Sequences, primes: Sequence[int], L: int) -> Dict:
    """A_L = Π_p Σ_{n≤L} λ(pⁿ)² and the K_L eigenvalue A_L²."""
    support = AmplifierSupport(tuple(primes), L)
    per_prime = {p: sum(seqs[p][n] ** 2 for n in range(1, L + 1)) for p in support.primes}
    a_l = math.prod(per_prime.values())
    return {
        'primes': list(support.primes),
        'L': L,
        'per_prime': {str(p): v for p, v in per_prime.items()},
        'A_L': a_l,
        'K_eigenvalue': a_l * a_l,
    }


def expand_KL(seqs: Sequences, primes: Sequence[int], L: int) -> AmplifierExpansion:
    """
    K_L = Σ_{m,n ∈ M(P,L)} λ(m)λ(n) Σ_{d | (m,n)} T(mn/d²), aggregated per modulus.
    """
    support = AmplifierSupport(tuple(primes), L)
    vectors = support.exponent_vectors()
    weights = {v: _lambda_from_exponents(seqs, support.primes, v) for v in vectors}
    coefficients: Dict[Tuple[int, ...], float] = {}
    for m_exps in vectors:
        for n_exps in vectors:
            weight = weights[m_exps] * weights[n_exps]
            ranges = [range(min(k, l) + 1) for k, l in zip(m_exps, n_exps)]
            for d_exps in product(*ranges):
                key = tuple(k + l - 2 * i for k, l, i in zip(m_exps, n_exps, d_exps))
                coefficients[key] = coefficients.get(key, 0.0) + weight

    ordered = sorted(coefficients, key=support.modulus)
    terms = tuple((support.modulus(key), coefficients[key]) for key in ordered)
    return AmplifierExpansion(primes=support.primes, L=L, terms=terms, exponents=tuple(ordered))


def expansion_consistency(expansion: AmplifierExpansion, seqs: Sequences) -> Dict:
    """Σ coefficient(M)·λ(M) against A_L²."""
    contraction = 0.0
    for exps, (_, coefficient) in zip(expansion.exponents, expansion.terms):
        contraction += coefficient * _lambda_from_exponents(seqs, expansion.primes, exps)
    eigenvalue = amplifier_value(seqs, expansion.primes, expansion.L)['K_eigenvalue']
    relative = abs(contraction - eigenvalue) / max(abs(eigenvalue), 1e-300)
    return {
        'contraction': contraction,
        'K_eigenvalue': eigenvalue,
        'relative_error': relative,
        'passed': relative <= Config.THRESHOLDS['expansion_relative'],
    }


def _log_sum(log_terms: List[float]) -> float:
    if not log_terms:
        return float('-inf')
    values = np.asarray(log_terms)
    top = float(np.max(values))
    return top + math.log(float(np.sum(np.exp(values - top))))


def technical_envelope(primes: Sequence[int], L: int, x: float) -> float:
    """
    Analytic ceiling for the technical-sum ratio LHS/RHS.

    Per prime: (1/(1 − p^x))·(1 + p^{x/2})/(1 − p^{x/2}) for x < 0, 1/(1 − p^{−x}) for x > 0,
    and L + 1 at x = 0 where the divisor count is not absorbed.
    """
    envelope = 1.0
    for p in primes:
        if x < 0:
            q = p ** (x / 2)
            envelope *= (1 + q) / ((1 - p ** x) * (1 - q))
        elif x > 0:
            envelope *= 1 / (1 - p ** (-x))
        else:
            envelope *= L + 1
    return envelope


def technical_sum(seqs: Sequences, primes: Sequence[int], L: int, x: float) -> Dict:
    """
    LHS = Σ_{m,n∈M(P,L)} |λ(m)λ(n)| Σ_{d|(m,n)} (√(mn)/d)^x, evaluated term by term in log space.

    RHS = Π_p Σ_r λ(p^r)² for x < 0, and Π_p p^{xL}·L·Σ_r λ(p^r)² for x ≥ 0.
    """
    support = AmplifierSupport(tuple(primes), L)
    vectors = support.exponent_vectors()
    logs_p = [math.log(p) for p in support.primes]
    weights = {v: abs(_lambda_from_exponents(seqs, support.primes, v)) for v in vectors}

    log_terms = []
    for m_exps in vectors:
        w_m = weights[m_exps]
        if w_m == 0:
            continue
        for n_exps in vectors:
            weight = w_m * weights[n_exps]
            if weight == 0:
                continue
            log_weight = math.log(weight)
            ranges = [range(min(k, l) + 1) for k, l in zip(m_exps, n_exps)]
            for d_exps in product(*ranges):
                exponent = sum(((k + l) / 2 - i) * lp
                               for k, l, i, lp in zip(m_exps, n_exps, d_exps, logs_p))
                log_terms.append(log_weight + x * exponent)

    log_lhs = _log_sum(log_terms)
    log_rhs = 0.0
    for p, lp in zip(support.primes, logs_p):
        square_sum = sum(seqs[p][r] ** 2 for r in range(1, L + 1))
        log_rhs += math.log(square_sum) if square_sum > 0 else float('-inf')
        if x >= 0:
            log_rhs += x * L * lp + math.log(L)

    ratio = math.exp(log_lhs - log_rhs) if math.isfinite(log_rhs) else float('nan')
    envelope = technical_envelope(support.primes, L, x)
    return {
        'primes': list(support.primes),
        'L': L,
        'x': x,
        'branch': 'x<0' if x < 0 else 'x>=0',
        'log_lhs': log_lhs,
        'log_rhs': log_rhs,
        'lhs': _exp_or_none(log_lhs),
        'rhs': _exp_or_none(log_rhs),
        'ratio': ratio,
        'envelope': envelope,
        'within_envelope': ratio <= envelope * (1 + 1e-12),
    }


def _exp_or_none(value: float) -> Optional[float]:
    if value == float('-inf'):
        return 0.0
    if value > 700:
        return None
    return math.exp(value)


def efficiency_ratio(weights: Sequence[float], seq: EigenvalueSequence, L: int) -> float:
    """(Σ α_m λ(p^m))² / Σ α_m² for m = 1..L."""
    alpha = np.asarray(weights, dtype=float)
    if alpha.shape != (L,):
        raise ValidationError(f"Expected {L} weights, got {alpha.size}")
    norm = float(np.dot(alpha, alpha))
    if norm == 0.0:
        raise ValidationError("Weight vector must not be zero")
    lam = np.array([seq[m] for m in range(1, L + 1)])
    return float(np.dot(alpha, lam) ** 2 / norm)


def efficiency_trials(seq: EigenvalueSequence, L: int, trials: int,
                      rng: np.random.Generator, scale: float = 0.1) -> Dict:
    """Compare the ratio at α = λ with random perturbations α = λ + ε·v."""
    lam = np.array([seq[m] for m in range(1, L + 1)])
    optimum = efficiency_ratio(lam, seq, L)
    worst_excess = -float('inf')
    for _ in range(trials):
        eps = scale * rng.random()
        trial = lam + eps * rng.standard_normal(L)
        if not np.any(trial):
            continue
        worst_excess = max(worst_excess, efficiency_ratio(trial, seq, L) - optimum)
    tolerance = 1e-12 * max(1.0, optimum)
    return {
        'optimum': optimum,
        'sum_lambda_sq': float(np.dot(lam, lam)),
        'trials': trials,
        'max_excess': worst_excess,
        'passed': worst_excess <= tolerance,
    }


def parameter_from_args(kind: str, theta: Optional[float], sign: int = 1) -> SatakeParameter:
    """Build a Satake parameter from command-line style arguments."""
    if kind == TEMPERED:
        if theta is None:
            raise ValidationError("Tempered parameters need θ")
        return SatakeParameter.tempered(theta)
    if kind == NONTEMPERED:
        if theta is None:
            raise ValidationError("Nontempered parameters need θ")
        return SatakeParameter.nontempered(theta, sign)
    if kind == SINGULAR:
        return SatakeParameter.singular(sign)
    raise ValidationError(f"Unknown Satake kind {kind!r}")

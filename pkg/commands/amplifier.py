"""
Amplifier commands: amplifier, sweep, technical-sum, efficiency.
"""

import click
import pandas as pd

from commands.context import FLOATS, PRIMES, finish, pass_lab, save_csv
from config.lab_config import calibration_envelope, load_calibration
from models.satake import NONTEMPERED, SINGULAR, TEMPERED, EigenvalueSequence
from services.amplifier import (amplifier_value, build_sequences, efficiency_ratio,
                                efficiency_trials, expand_KL, expansion_consistency,
                                nontempered_check, parameter_from_args, regime_label,
                                sum_lower_bound_sweep, technical_sum)
from utils.run_report import RunReport
from utils.validators import ValidationError

KINDS = click.Choice([TEMPERED, NONTEMPERED, SINGULAR])


def _parameters(kind, thetas, sign):
    if kind == SINGULAR:
        return [parameter_from_args(kind, None, sign)]
    if not thetas:
        raise ValidationError(f"--theta is required for {kind} parameters")
    return [parameter_from_args(kind, theta, sign) for theta in thetas]


@click.command('amplifier')
@click.option('--primes', type=PRIMES, default=None, help='Amplifier primes (default from config)')
@click.option('--L', 'L', type=int, required=True)
@click.option('--theta', type=FLOATS, default=None, help='One angle, or one per prime')
@click.option('--kind', type=KINDS, default=TEMPERED, show_default=True)
@click.option('--sign', type=click.Choice(['1', '-1']), default='1', show_default=True)
@click.option('--emit-csv', 'emit_csv', type=click.Path(dir_okay=False), default=None,
              help='Write the K_L expansion table')
@pass_lab
def amplifier_command(lab, primes, L, theta, kind, sign, emit_csv):
    """A_L, the K_L eigenvalue and the expansion consistency, as JSON."""
    primes = primes or lab.lab().primes
    parameters = _parameters(kind, theta, int(sign))
    seqs = build_sequences(primes, parameters, 2 * L)

    report = RunReport('amplifier', parameters={
        'primes': list(primes), 'L': L, 'kind': kind,
        'satake': [param.to_dict() for param in parameters],
    })
    value = amplifier_value(seqs, primes, L)
    expansion = expand_KL(seqs, primes, L)
    consistency = expansion_consistency(expansion, seqs)
    report.results.update(value)
    report.results['expansion_terms'] = len(expansion.terms)
    report.results['consistency'] = consistency
    report.results['regimes'] = {str(p): regime_label(seqs[p].parameter, L) for p in primes}
    report.check(value['K_eigenvalue'] >= 0, 'K_eigenvalue_nonnegative')
    report.check(consistency['passed'], 'expansion_consistency',
                 f"relative error {consistency['relative_error']:.3e}")

    if kind == NONTEMPERED:
        for param in parameters:
            table = nontempered_check(param.theta, L, primes[0], param.sign)
            report.check(bool(table['passed'].all()), f'nontempered_theta_{param.theta:g}',
                         f"max residual {table['relative_residual'].max():.3e}")

    save_csv(pd.DataFrame(expansion.to_rows()), emit_csv)
    finish(lab.emit_report(report))


@click.command('sweep')
@click.option('--prime', 'p', type=int, default=2, show_default=True)
@click.option('--L', 'L', type=int, required=True)
@click.option('--grid-step', 'grid_step', type=float, default=None,
              help='θ step (default from the lab config)')
@click.option('--emit-csv', 'emit_csv', type=click.Path(dir_okay=False), default=None)
@pass_lab
def sweep_command(lab, p, L, grid_step, emit_csv):
    """min over θ of Σ λ(pⁿ)²/L, as JSON; exit 1 below the committed floor."""
    step = grid_step or lab.lab().sweep.step
    ratio, argmin, table = sum_lower_bound_sweep(p, L, step=step, threads=lab.threads)
    floor = load_calibration()['sweep_min_ratio']

    report = RunReport('sweep', parameters={'p': p, 'L': L, 'grid_step': step})
    report.results = {
        'min_ratio': ratio,
        'argmin_theta': argmin,
        'grid_points': len(table),
        'near_singular_points': int((table['regime'] == 'near_singular').sum()),
    }
    report.check(ratio >= floor, 'sweep_floor', f'{ratio:.6f} ≥ {floor}')
    save_csv(table, emit_csv)
    finish(lab.emit_report(report))


@click.command('technical-sum')
@click.option('--x', 'x', type=float, required=True)
@click.option('--L', 'L', type=int, required=True)
@click.option('--primes', type=PRIMES, default='2', show_default=True)
@click.option('--theta', type=FLOATS, default=None, help='One angle, or one per prime')
@click.option('--kind', type=KINDS, default=TEMPERED, show_default=True)
@pass_lab
def technical_sum_command(lab, x, L, primes, theta, kind):
    """LHS, RHS and their ratio for the two-branch technical sum, as JSON."""
    parameters = _parameters(kind, theta, 1)
    seqs = build_sequences(primes, parameters, L)
    result = technical_sum(seqs, primes, L, x)

    report = RunReport('technical-sum', parameters={'x': x, 'L': L, 'primes': list(primes),
                                                    'satake': [q.to_dict() for q in parameters]})
    report.results = result
    report.check(result['within_envelope'], 'analytic_envelope',
                 f"ratio {result['ratio']:.6g} vs {result['envelope']:.6g}")
    ceiling = calibration_envelope(load_calibration(), x, L, list(primes))
    if ceiling is None:
        report.add_warning('calibration', f'no committed ceiling for x = {x:g}')
    else:
        report.results['calibration_ceiling'] = ceiling
        report.check(result['ratio'] <= ceiling, 'calibration_ceiling',
                     f"ratio {result['ratio']:.6g} vs {ceiling:.6g}")
    finish(lab.emit_report(report))


@click.command('efficiency')
@click.option('--prime', 'p', type=int, default=2, show_default=True)
@click.option('--L', 'L', type=int, required=True)
@click.option('--theta', type=float, required=True)
@click.option('--trials', type=int, default=1000, show_default=True)
@pass_lab
def efficiency_command(lab, p, L, theta, trials):
    """Cauchy–Schwarz optimality of α = λ against random perturbations, as JSON."""
    seq = EigenvalueSequence(p, parameter_from_args(TEMPERED, theta), L)
    result = efficiency_trials(seq, L, trials, lab.rng())
    weights = [seq[m] for m in range(1, L + 1)]
    scaled = efficiency_ratio([3.0 * w for w in weights], seq, L)

    report = RunReport('efficiency', parameters={'p': p, 'L': L, 'theta': theta,
                                                 'trials': trials, 'seed': lab.seed})
    report.results = result
    report.check(result['passed'], 'optimum_at_lambda', f"max excess {result['max_excess']:.3e}")
    report.check(abs(scaled - result['optimum']) <= 1e-12 * max(1.0, result['optimum']),
                 'scaling_invariance')
    finish(lab.emit_report(report))

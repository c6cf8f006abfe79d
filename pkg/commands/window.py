"""
Spectral window and planner commands: window, plan, envelope.
"""

import math

import click

from commands.context import FLOATS, POINT, PRIMES, finish, pass_lab, save_csv
from config.settings import Config
from services.amplifier import build_sequences, parameter_from_args
from services.lattice_counting import LatticeCounter
from services.spectral_window import (PlanInput, amplified_splitting, build_window,
                                      dominance_threshold, log_kernel_envelope, log_term, plan,
                                      window_properties)
from models.satake import SINGULAR, TEMPERED
from utils.run_report import RunReport


@click.command('window')
@click.option('--nodes', type=int, default=None, help='Quadrature nodes (default from config)')
@click.option('--emit-csv', 'emit_csv', type=click.Path(dir_okay=False), default=None,
              help='Write h on the evaluation grid')
@click.option('--psi-csv', 'psi_csv', type=click.Path(dir_okay=False), default=None,
              help='Write ψ = χ∗χ on [−1/2, 1/2]')
@pass_lab
def window_command(lab, nodes, emit_csv, psi_csv):
    """Build h and check h(0) = 1, h ≥ 0 and the support of ĥ, as JSON."""
    nodes = nodes or lab.lab().window_nodes
    window = build_window(nodes)
    properties = window_properties(window)

    report = RunReport('window', parameters={'nodes': nodes})
    report.results = properties
    report.check(properties['h0'] == 1.0, 'normalized_at_zero')
    thresholds = Config.THRESHOLDS
    report.check(properties['min_h'] >= thresholds['window_negativity'], 'nonnegative',
                 f"min h = {properties['min_h']:.3e}")
    report.check(properties['leakage'] < thresholds['transform_leakage'], 'transform_support',
                 f"max |ĥ| outside = {properties['leakage']:.3e}")
    save_csv(window.to_frame(), emit_csv)
    save_csv(window.psi_frame(), psi_csv)
    finish(lab.emit_report(report))


@click.command('plan')
@click.option('--loglambda', 'log_lambda', type=float, required=True)
@click.option('--primes', type=PRIMES, default=None, help='Amplifier primes (default from config)')
@click.option('--C', 'C', type=float, default=None, help='Kernel constant (default from config)')
@click.option('--threshold', 'with_threshold', is_flag=True,
              help='Also search the dominance threshold on the configured log λ grid')
@click.option('--with-counts', 'with_counts', is_flag=True,
              help='Evaluate the near/far splitting with actual lattice counts')
@click.option('--count-L', 'count_L', type=int, default=None,
              help='Amplifier length for --with-counts (default: the planned L)')
@click.option('--count-loglambda', 'count_log_lambda', type=float, default=None,
              help='log λ for --with-counts (default: --loglambda)')
@click.option('--theta', type=FLOATS, default=None,
              help='Tempered angles for --with-counts (default: singular parameters)')
@click.option('--z', 'z', type=POINT, default='0,1', show_default=True)
@pass_lab
def plan_command(lab, log_lambda, primes, C, with_threshold, with_counts, count_L,
                 count_log_lambda, theta, z):
    """Planned L, c, ε, both terms and the dominance flag, as JSON."""
    config = lab.lab()
    primes = primes or config.primes
    C = config.planner.C if C is None else C
    output = plan(PlanInput(log_lambda, primes, C))

    report = RunReport('plan', parameters={'log_lambda': log_lambda, 'primes': list(primes), 'C': C})
    report.results = output.to_dict()
    report.check(math.isclose(output.saving_exponent, (len(primes) + 1) / 2), 'saving_exponent')

    if with_threshold:
        summary, _ = dominance_threshold(primes, C, config.planner.start, config.planner.factor,
                                         config.planner.steps)
        report.results['dominance'] = summary
        report.check(summary['threshold'] is not None and summary['monotone'],
                     'dominance_monotone', f"threshold log λ = {summary['threshold']}")

    if with_counts:
        L = count_L or output.L
        counted_log_lambda = count_log_lambda or log_lambda
        eps = output.c / counted_log_lambda
        if theta:
            parameters = [parameter_from_args(TEMPERED, value) for value in theta]
        else:
            parameters = [parameter_from_args(SINGULAR, None)]
        seqs = build_sequences(primes, parameters, L)
        summary, _ = amplified_splitting(LatticeCounter(lab.order()), seqs, primes, L,
                                         counted_log_lambda, eps, C, z, threads=lab.threads)
        report.results['splitting'] = summary
    finish(lab.emit_report(report))


@click.command('envelope')
@click.option('--d', 'd', type=float, required=True, help='Distance')
@click.option('--loglambda', 'log_lambda', type=float, required=True)
@click.option('--epsilon', 'eps', type=float, required=True)
@click.option('--C', 'C', type=float, default=1.0, show_default=True)
@pass_lab
def envelope_command(lab, d, log_lambda, eps, C):
    """Kernel envelope at distance d, as a (log, sign, value) JSON triple."""
    logged = float(log_kernel_envelope(d, log_lambda, eps, C))
    lab.emit_json({'d': d, 'log_lambda': log_lambda, 'epsilon': eps, 'C': C,
                   'envelope': log_term(logged)})

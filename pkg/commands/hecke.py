"""
Hecke tree command.
"""

import click

from commands.context import finish, pass_lab
from models.satake import EigenvalueSequence, SatakeParameter
from services.hecke_tree import (build_tree, eigenvalue_consistency, tree_report,
                                 verify_expansion_on_tree, verify_hecke_relation)
from utils.run_report import RunReport


@click.command('tree-check')
@click.option('--prime', 'p', type=int, required=True)
@click.option('--radius', type=int, default=None, help='Tree radius (default from the lab config)')
@click.option('--ordm', type=int, default=None, help='Exponent a of m = p^a')
@click.option('--ordn', type=int, default=None, help='Exponent b of n = p^b')
@click.option('--all', 'check_all', is_flag=True, help='Every pair with a + b ≤ min(R, 4)')
@click.option('--theta', type=float, default=None,
              help='Tempered angle for the spherical-function and expansion checks')
@click.option('--consistency-n', 'consistency_n', type=int, default=None)
@click.option('--expansion-L', 'expansion_L', type=int, default=None)
@pass_lab
def tree_check_command(lab, p, radius, ordm, ordn, check_all, theta, consistency_n, expansion_L):
    """Exact Hecke relations on the truncated tree, as a JSON pass/fail report."""
    radius = radius or lab.lab().tree_radius
    tree = build_tree(p, radius)
    report = RunReport('tree-check', parameters={'p': p, 'radius': radius})

    if check_all or (ordm is None and ordn is None):
        summary = tree_report(tree)
        report.results['tree'] = summary
        report.check(summary['passed'], 'hecke_relations', f"{len(summary['relations'])} pairs")
    else:
        relation = verify_hecke_relation(tree, p ** (ordm or 0), p ** (ordn or 0))
        report.results['relation'] = relation.to_dict()
        first = relation.mismatches[0] if relation.mismatches else None
        report.check(relation.passed, 'hecke_relation',
                     f'first mismatch {first}' if first else f'{relation.rows_checked} rows')

    if theta is not None:
        parameter = SatakeParameter.tempered(theta)
        if consistency_n is not None:
            consistency = eigenvalue_consistency(tree, parameter, consistency_n)
            report.results['eigenvalue_consistency'] = consistency
            report.check(consistency['passed'], 'eigenvalue_consistency',
                         f"spherical residual {consistency['spherical_residual']:.3e}")
        if expansion_L is not None:
            seq = EigenvalueSequence(p, parameter, expansion_L)
            expansion = verify_expansion_on_tree(tree, seq, expansion_L)
            report.results['expansion_on_tree'] = expansion
            report.check(expansion['passed'], 'expansion_on_tree',
                         f"relative error {expansion['relative_error']:.3e}")
    finish(lab.emit_report(report))

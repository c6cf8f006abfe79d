"""
Lattice counting commands: count, scan-count, delta-scan.
"""

import math

import click

from commands.context import POINT, finish, pass_lab
from config.lab_config import load_calibration
from config.settings import Config
from services.lattice_counting import CountQuery, LatticeCounter
from services.quaternion_core import describe
from utils.run_report import RunReport


@click.command('count')
@click.option('--norm', 'norm', type=int, required=True, help='Reduced norm N')
@click.option('--t', 't', type=float, required=True, help='u-radius t')
@click.option('--z', 'z', type=POINT, default='0,1', show_default=True)
@click.option('--list', 'list_elements', is_flag=True, help='Include the counted elements')
@click.option('--oracle', is_flag=True, help='Cross-check against the bounding-box scan')
@click.option('--slabs', type=int, default=None, help='Split the outer coordinate range')
@pass_lab
def count_command(lab, norm, t, z, list_elements, oracle, slabs):
    """M(N, t; z) for a single query, as JSON."""
    order = lab.order()
    counter = LatticeCounter(order)
    query = CountQuery(norm, t, z)
    result = counter.enumerate(query, slabs=slabs, threads=lab.threads)

    report = RunReport('count', parameters=query.to_dict())
    report.results = result.to_dict()
    if list_elements:
        report.results['elements'] = [describe(order, e) for e in result.elements]
    if result.boundary_count:
        report.add_warning('boundary_ties', f'{result.boundary_count} element(s) with |u - t| ≤ tol')
    if oracle:
        scanned = counter.box_scan(query)
        report.results['box_scan_count'] = scanned.count
        report.check(scanned.elements == result.elements, 'oracle_equivalence',
                     f'{result.count} vs {scanned.count}')
    finish(lab.emit_report(report))


@click.command('scan-count')
@click.option('--prime', 'p', type=int, required=True)
@click.option('--kmax', type=int, required=True)
@click.option('--t', 't', type=float, required=True)
@click.option('--z', 'z', type=POINT, default='0,1', show_default=True)
@pass_lab
def scan_count_command(lab, p, kmax, t, z):
    """Growth table of M(p^k, t; z) as CSV; exit 1 on aborted rows or a slope above the ceiling."""
    counter = LatticeCounter(lab.order())
    table, slope = counter.growth_scan(p, kmax, t, z, threads=lab.threads)
    lab.emit_table(table)

    calibration = load_calibration()
    click.echo(f"slope={slope:.6f}", err=True)
    failed = table.attrs.get('partial', False)
    if not math.isnan(slope) and slope > calibration.get('growth_slope_ceiling',
                                                           Config.THRESHOLDS['growth_slope']):
        failed = True
    finish(1 if failed else 0)


@click.command('delta-scan')
@click.option('--prime', 'p', type=int, required=True)
@click.option('--kmax', type=int, required=True)
@click.option('--z', 'z', type=POINT, default='0,1', show_default=True)
@click.option('--threshold', type=int, default=Config.SMALL_COUNT_THRESHOLD, show_default=True)
@pass_lab
def delta_scan_command(lab, p, kmax, z, threshold):
    """M(N, N⁻⁴; z) for N = p^k as CSV; exit 1 when any row is above the small-count threshold."""
    counter = LatticeCounter(lab.order())
    table = counter.delta_scan(p, kmax, z, threshold=threshold, threads=lab.threads)
    lab.emit_table(table)
    flagged = int(table['flagged'].sum())
    if flagged:
        click.echo(f"flagged={flagged}", err=True)
    finish(1 if flagged else 0)

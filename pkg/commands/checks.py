"""
Whole-lab checks: verify-order and selftest.
"""

import click

from commands.context import finish, pass_lab
from services.quaternion_core import verify_order
from services.selftest import run_selftest
from utils.run_report import RunReport


@click.command('verify-order')
@pass_lab
def verify_order_command(lab):
    """Check the configured basis against the order axioms; exit 1 when any fails."""
    config = lab.lab(validate=False)
    order_report = verify_order(config.algebra, config.basis)

    report = RunReport('verify-order', parameters={'config': config.path})
    report.results = {
        'algebra': config.algebra.to_dict(),
        'ramified_primes': list(config.ramified_primes),
        'checks': order_report.to_dict(),
    }
    report.check(order_report.valid, 'order_axioms', order_report.summary())
    finish(lab.emit_report(report))


@click.command('selftest')
@pass_lab
def selftest_command(lab):
    """Run every invariant check on reduced grids; exit 1 naming the first failure."""
    report = run_selftest(lab.lab(validate=False), seed=lab.seed, threads=lab.threads)
    failure = report.first_failure()
    if failure:
        click.echo(f"❌ selftest failed: {failure.name} {failure.detail}".rstrip(), err=True)
    finish(lab.emit_report(report))

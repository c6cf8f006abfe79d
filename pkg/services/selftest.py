"""
Invariant suite behind the `selftest` command.

Runs on reduced grids so it finishes in well under a minute; the exhaustive versions live in
the slow test marker. The order check runs first so a broken basis is the first failure named.
"""

import logging
import math
from typing import Optional

import numpy as np

from config.lab_config import LabConfig
from config.settings import Config
from models.plane import PlanePoint
from models.satake import EigenvalueSequence, SatakeParameter
from services.amplifier import (build_sequences, closed_vs_recurrence, expand_KL,
                                expansion_consistency, sum_lower_bound_sweep)
from services.hecke_tree import build_tree, tree_report, verify_expansion_on_tree
from services.lattice_counting import CountQuery, LatticeCounter
from services.quaternion_core import QuaternionOrder, verify_order
from services.spectral_window import (PlanInput, build_window, dominance_threshold, plan,
                                      window_properties)
from utils.run_report import RunReport, timed
from utils.validators import LabError

logger = logging.getLogger(__name__)

ORACLE_NORMS = (1, 2, 3, 4, 6, 16, 64)
ORACLE_RADII = (0.5, 2.0)
ORACLE_POINTS = ('0,1', '0.3333333333333333,2')


class SelfTest:
    """Runs each invariant check and records one verdict per check."""

    def __init__(self, lab: LabConfig, seed: int = Config.DEFAULT_SEED,
                 threads: Optional[int] = None):
        self.lab = lab
        self.rng = np.random.default_rng(seed)
        self.threads = threads
        self.report = RunReport('selftest', parameters={'config': lab.path, 'seed': seed})
        self.order: Optional[QuaternionOrder] = None

    def _guard(self, name: str, check) -> None:
        try:
            check()
        except LabError as exc:
            self.report.add_fail(name, str(exc))

    def check_order(self) -> bool:
        order_report = verify_order(self.lab.algebra, self.lab.basis)
        self.report.results['verify_order'] = order_report.to_dict()
        if not self.report.check(order_report.valid, 'verify_order', order_report.summary()):
            return False
        self.order = QuaternionOrder(self.lab.algebra, self.lab.basis, validate=False)
        return True

    def check_hecke(self) -> None:
        radius = min(self.lab.tree_radius, 6)
        for p in (2, 3, 5):
            summary = tree_report(build_tree(p, radius))
            self.report.results[f'hecke_p{p}'] = {'passed': summary['passed'],
                                                  'relations': len(summary['relations'])}
            self.report.check(summary['passed'], f'hecke_relations_p{p}', f'R={radius}')

    def check_recurrence(self) -> None:
        worst = 0.0
        for theta in np.linspace(1e-9, math.pi - 1e-9, 200):
            gap = closed_vs_recurrence(SatakeParameter.tempered(float(theta)), 100)
            worst = max(worst, gap['max_abs'])
        for sign in (1, -1):
            worst = max(worst, closed_vs_recurrence(SatakeParameter.singular(sign), 100)['max_abs'])
        self.report.results['recurrence_max_abs'] = worst
        self.report.check(worst <= 1e-9, 'recurrence_closed_form', f'max |gap| = {worst:.3e}')

    def check_sweep(self) -> None:
        floor = Config.THRESHOLDS['sweep_min_ratio']
        for L in (8, 64):
            ratio, theta, _ = sum_lower_bound_sweep(2, L, step=1e-2)
            self.report.results[f'sweep_L{L}'] = {'min_ratio': ratio, 'argmin': theta}
            self.report.check(ratio >= floor, f'sweep_lower_bound_L{L}',
                              f'min S/L = {ratio:.4f} at θ = {theta:.3f}')

    def check_oracle(self) -> None:
        counter = LatticeCounter(self.order)
        mismatches = []
        for point in ORACLE_POINTS:
            z = PlanePoint.parse(point)
            for N in ORACLE_NORMS:
                for t in ORACLE_RADII:
                    query = CountQuery(N, t, z)
                    fast = counter.enumerate(query, threads=self.threads)
                    slow = counter.box_scan(query)
                    if fast.elements != slow.elements:
                        mismatches.append({'N': N, 't': t, 'z': point,
                                           'enumeration': fast.count, 'box_scan': slow.count})
        self.report.results['oracle_mismatches'] = mismatches
        self.report.check(not mismatches, 'counting_oracle',
                          f'{len(ORACLE_NORMS) * len(ORACLE_RADII) * len(ORACLE_POINTS)} queries')

    def check_window(self) -> None:
        properties = window_properties(build_window(256))
        self.report.results['window'] = properties
        self.report.check(properties['passed'], 'window_properties',
                          f"min h = {properties['min_h']:.3e}, leakage = {properties['leakage']:.3e}")

    def check_planner(self) -> None:
        planner = self.lab.planner
        summary, _ = dominance_threshold((2,), planner.C, planner.start, planner.factor, planner.steps)
        self.report.results['planner'] = summary
        self.report.check(summary['threshold'] is not None and summary['monotone'],
                          'planner_dominance', f"threshold log λ = {summary['threshold']}")
        savings = [plan(PlanInput(1000.0 * k, primes, planner.C)).saving_exponent
                   for k, primes in ((1, (2,)), (2, (2, 3)), (4, (2, 3, 5)))]
        self.report.check(savings == [1.0, 1.5, 2.0], 'saving_exponent', str(savings))

    def check_expansion(self) -> None:
        worst = 0.0
        for _ in range(10):
            parameters = [SatakeParameter.tempered(float(self.rng.uniform(0.01, math.pi - 0.01)))
                          for _ in range(2)]
            seqs = build_sequences((2, 3), parameters, 8)
            result = expansion_consistency(expand_KL(seqs, (2, 3), 3), seqs)
            worst = max(worst, result['relative_error'])
        self.report.results['expansion_relative_error'] = worst
        self.report.check(worst <= Config.THRESHOLDS['expansion_relative'],
                          'amplifier_expansion', f'relative error {worst:.3e}')

        seq = EigenvalueSequence(2, SatakeParameter.tempered(1.1), 8)
        on_tree = verify_expansion_on_tree(build_tree(2, 4), seq, 2)
        self.report.check(on_tree['passed'], 'amplifier_expansion_on_tree',
                          f"relative error {on_tree['relative_error']:.3e}")

    @timed('selftest')
    def run(self) -> RunReport:
        if not self.check_order():
            return self.report
        self._guard('hecke_relations', self.check_hecke)
        self._guard('recurrence_closed_form', self.check_recurrence)
        self._guard('sweep_lower_bound', self.check_sweep)
        self._guard('counting_oracle', self.check_oracle)
        self._guard('window_properties', self.check_window)
        self._guard('planner_dominance', self.check_planner)
        self._guard('amplifier_expansion', self.check_expansion)
        return self.report


def run_selftest(lab: LabConfig, seed: int = Config.DEFAULT_SEED,
                 threads: Optional[int] = None) -> RunReport:
    return SelfTest(lab, seed, threads).run()

#!/usr/bin/env python3
"""
End-to-end flows for the Amplification Lab.
Runs under pytest, or standalone with a coloured summary: python3 test_all_flows.py
"""

import json
import math
import os
import sys

import pytest
from click.testing import CliRunner

# Add project to path
sys.path.insert(0, os.path.dirname(__file__))

from config.lab_config import load_calibration, load_lab_config
from models.plane import PlanePoint
from models.satake import SatakeParameter
from services.amplifier import amplifier_value, build_sequences, expand_KL, expansion_consistency
from services.hecke_tree import build_tree, tree_report, verify_expansion_on_tree
from services.lattice_counting import CountQuery, LatticeCounter
from services.quaternion_core import load_order, verify_order
from services.spectral_window import PlanInput, build_window, plan, window_properties


class FlowChecks:
    def __init__(self, verbose=True):
        self.tests_passed = 0
        self.tests_failed = 0
        self.failures = []
        self.verbose = verbose

    def log(self, message, status='INFO'):
        if not self.verbose:
            return
        colors = {
            'PASS': '\033[92m',
            'FAIL': '\033[91m',
            'INFO': '\033[94m',
            'WARN': '\033[93m',
        }
        reset = '\033[0m'
        print(f"{colors.get(status, '')}{status}: {message}{reset}")

    def assert_true(self, condition, test_name):
        if condition:
            self.log(f"✓ {test_name}", 'PASS')
            self.tests_passed += 1
            return True
        self.log(f"✗ {test_name}", 'FAIL')
        self.tests_failed += 1
        self.failures.append(test_name)
        return False

    def assert_equals(self, actual, expected, test_name):
        if actual == expected:
            self.log(f"✓ {test_name}", 'PASS')
            self.tests_passed += 1
            return True
        self.log(f"✗ {test_name}: Expected {expected}, got {actual}", 'FAIL')
        self.tests_failed += 1
        self.failures.append(test_name)
        return False


def flow_order_and_counting(checks):
    """Config -> order -> counts at the elliptic point and off the axis"""
    checks.log("\n=== Order and Lattice Counting ===", 'INFO')

    lab = load_lab_config()
    checks.assert_true(verify_order(lab.algebra, lab.basis).valid, "Shipped basis is an order")

    counter = LatticeCounter(load_order(lab))
    i = PlanePoint.i()
    checks.assert_equals(counter.count(CountQuery(1, 0.01, i)), 4, "Four units fix i")

    off_axis = PlanePoint(1 / 3, 2.0)
    for N in (2, 6, 12):
        query = CountQuery(N, 2.13, off_axis)
        checks.assert_equals(counter.enumerate(query).elements, counter.box_scan(query).elements,
                             f"Enumerator agrees with box scan at N={N}")

    table = counter.delta_scan(2, 6, i)
    checks.assert_equals(list(table['count']), [4] * 7, "Near-diagonal count stays 4 at i")

    _, slope = counter.growth_scan(2, 6, 10.0, i)
    ceiling = load_calibration()['growth_slope_ceiling']
    checks.assert_true(slope <= ceiling, f"Growth slope {slope:.3f} within {ceiling}")


def flow_hecke_and_amplifier(checks):
    """Tree identities -> amplifier built from the same eigenvalues"""
    checks.log("\n=== Hecke Tree and Amplifier ===", 'INFO')

    tree = build_tree(3, 5)
    checks.assert_true(tree_report(tree)['passed'], "Hecke relations exact on the 3-tree")

    parameter = SatakeParameter.tempered(1.1)
    seqs = build_sequences((3,), [parameter], 4)
    checks.assert_true(verify_expansion_on_tree(tree, seqs[3], 2)['passed'],
                       "Amplifier expansion matches the tree operator")

    singular = build_sequences((2, 3), [SatakeParameter.singular()], 4)
    value = amplifier_value(singular, (2, 3), 2)
    checks.assert_equals(value['A_L'], 169, "Singular amplifier value for two primes")
    consistency = expansion_consistency(expand_KL(singular, (2, 3), 2), singular)
    checks.assert_true(consistency['passed'], "Expansion contracts to the squared amplifier")


def flow_window_and_planner(checks):
    """Window -> plan with the configured constant"""
    checks.log("\n=== Spectral Window and Planner ===", 'INFO')

    properties = window_properties(build_window(256))
    checks.assert_true(properties['passed'], "Window normalized, nonnegative and supported")

    lab = load_lab_config()
    output = plan(PlanInput(1000.0, (2, 3), lab.planner.C))
    checks.assert_equals(output.L, 5, "Planned amplifier length")
    checks.assert_true(output.dominant, "Main term dominates at log λ = 1000")
    checks.assert_true(math.isclose(output.saving_exponent, 1.5), "Saving exponent for two primes")


def flow_command_line(checks):
    """The same questions through the CLI"""
    checks.log("\n=== Command Line ===", 'INFO')
    from app import cli

    cli_runner = CliRunner()
    result = cli_runner.invoke(cli, ['verify-order'])
    checks.assert_equals(result.exit_code, 0, "verify-order exits 0")

    result = cli_runner.invoke(cli, ['count', '--norm', '1', '--t', '0.01'])
    checks.assert_equals(json.loads(result.stdout)['results']['count'], 4, "count reports 4 units")

    result = cli_runner.invoke(cli, ['plan', '--loglambda', '50', '--primes', '2'])
    checks.assert_equals(result.exit_code, 2, "plan rejects log λ without room for an amplifier")

    result = cli_runner.invoke(cli, ['amplifier', '--primes', '2', '--L', '2', '--kind', 'singular'])
    checks.assert_equals(json.loads(result.stdout)['results']['A_L'], 13, "amplifier A_L = 13")


FLOWS = [flow_order_and_counting, flow_hecke_and_amplifier, flow_window_and_planner,
         flow_command_line]


@pytest.mark.parametrize('flow', FLOWS, ids=lambda f: f.__name__)
def test_flow(flow):
    checks = FlowChecks(verbose=False)
    flow(checks)
    assert checks.tests_failed == 0, checks.failures
    assert checks.tests_passed > 0


def run_all_tests():
    """Run every flow and print a summary"""
    checks = FlowChecks()

    print("\n" + "=" * 60)
    print("AMPLIFICATION LAB - END-TO-END FLOWS")
    print("=" * 60)

    for flow in FLOWS:
        try:
            flow(checks)
        except Exception as e:
            checks.log(f"Critical error in {flow.__name__}: {e}", 'FAIL')
            checks.tests_failed += 1
            import traceback
            traceback.print_exc()

    print("\n" + "=" * 60)
    print("TEST SUMMARY")
    print("=" * 60)
    checks.log(f"Tests Passed: {checks.tests_passed}", 'PASS')
    checks.log(f"Tests Failed: {checks.tests_failed}", 'FAIL' if checks.tests_failed else 'PASS')
    print("=" * 60 + "\n")
    return checks.tests_failed == 0


if __name__ == '__main__':
    success = run_all_tests()
    sys.exit(0 if success else 1)

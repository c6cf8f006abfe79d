"""
Tests for the spectral window, the kernel envelope and the bound planner.
"""

import math

import numpy as np
import pytest

from models.plane import PlanePoint
from models.satake import SatakeParameter
from services.amplifier import build_sequences
from services.lattice_counting import CountQuery
from services.spectral_window import (MAX_FAR_RADIUS, PlanInput, amplified_splitting, bump,
                                      build_window, composite_rule, dominance_threshold,
                                      kernel_envelope, log_kernel_envelope, log_term, plan,
                                      reconstruct_transform, singular_amplifier_log,
                                      splitting_estimate, window_properties)
from utils.validators import PlanError, ValidationError


@pytest.fixture(scope='module')
def window():
    return build_window(256)


def test_composite_rule_integrates_polynomials():
    x, w = composite_rule(-1.0, 3.0, 4)
    assert x.size == w.size == 64
    assert np.dot(w, x ** 5) == pytest.approx((3.0 ** 6 - 1.0) / 6)


def test_bump_support():
    assert bump([-0.25, 0.25, 0.3]).tolist() == [0.0, 0.0, 0.0]
    assert bump([0.0])[0] == pytest.approx(math.exp(-1))


def test_window_properties(window):
    properties = window_properties(window)
    assert properties['h0'] == 1.0
    assert properties['min_h'] >= -1e-8
    assert properties['stability'] <= 1e-8
    assert properties['leakage'] < 1e-10
    assert properties['passed']
    assert properties['rule'] == 'gauss-legendre-16'


def test_window_is_even_and_peaks_at_zero(window):
    assert np.allclose(window.h, window.h[::-1], atol=1e-15)
    assert window.h.max() == 1.0
    assert window.h_at([0.0])[0] == pytest.approx(1.0)


def test_reconstruction_inside_the_support(window):
    table = reconstruct_transform(window, [0.0, 0.1, 0.25, 0.4])
    assert (table['error'] < 1e-8).all()
    assert table.loc[0, 'direct'] == pytest.approx(window.psi_at([0.0])[0] / window.normalization)


def test_psi_is_supported_in_half_interval(window):
    frame = window.psi_frame()
    assert frame['psi'].iloc[0] == 0.0
    assert frame['psi'].iloc[-1] == 0.0
    assert frame['psi'].max() == pytest.approx(frame['psi'].iloc[len(frame) // 2])
    assert list(window.to_frame().columns) == ['xi', 'h']


def test_node_validation():
    for nodes in (128, 260):
        with pytest.raises(ValidationError):
            build_window(nodes)


def test_kernel_envelope_branches():
    log_lambda, eps, C = 100.0, 0.08, 1.0
    near = np.logaddexp(log_lambda + math.log(eps), C / eps)
    far = lambda d: 0.5 * (log_lambda - math.log(d)) + C / eps
    values = log_kernel_envelope([0.0, 0.5, 1.0, 2.0, 12.0, 20.0], log_lambda, eps, C)
    assert values[0] == pytest.approx(near)
    assert values[1] == pytest.approx(near)
    assert values[2] == pytest.approx(max(near, far(1.0)))
    assert values[3] == pytest.approx(far(2.0))
    assert values[4] == pytest.approx(far(12.0))
    assert values[5] == -math.inf
    assert kernel_envelope(20.0, log_lambda, eps, C) == 0.0
    assert math.isinf(kernel_envelope(0.5, 1000.0, 0.008, C))


def test_kernel_envelope_validation():
    with pytest.raises(ValidationError):
        log_kernel_envelope(1.0, 10.0, 0.0, 1.0)
    with pytest.raises(ValidationError):
        log_kernel_envelope(1.0, 10.0, 1.5, 1.0)
    with pytest.raises(ValidationError):
        log_kernel_envelope(1.0, 10.0, 1e-6, 1.0)
    with pytest.raises(ValidationError):
        log_kernel_envelope(-1.0, 10.0, 0.5, 1.0)


def test_log_term():
    assert log_term(-math.inf) == {'log': '-inf', 'sign': 0, 'value': 0.0}
    assert log_term(800.0)['value'] is None
    assert log_term(0.0) == {'log': 0.0, 'sign': 1, 'value': 1.0}


def test_plan_for_two_primes():
    output = plan(PlanInput(1000.0, (2, 3), 1.0))
    assert output.L == 5
    assert output.c == 8.0
    assert output.eps == pytest.approx(0.008)
    assert output.saving_exponent == 1.5
    assert output.log_A == pytest.approx(singular_amplifier_log((2, 3), 5))
    payload = output.to_dict()
    assert payload['bound_shape'] == 'lambda/(log lambda)^3'
    assert payload['term1']['log'] == pytest.approx(1000.0 - math.log(1000.0) + output.log_A)


def test_plan_needs_room_for_an_amplifier():
    assert plan(PlanInput(70.0, (2,))).L == 1
    with pytest.raises(PlanError):
        plan(PlanInput(69.0, (2,)))
    with pytest.raises(ValidationError):
        PlanInput(1.0, (2,))
    with pytest.raises(ValidationError):
        PlanInput(100.0, (4,))
    with pytest.raises(ValidationError):
        PlanInput(100.0, (2,), C=0.0)


@pytest.mark.parametrize('primes', [(2,), (2, 3), (2, 3, 5)])
def test_saving_exponent(primes):
    assert plan(PlanInput(5000.0, primes)).saving_exponent == (len(primes) + 1) / 2


def test_dominance_threshold():
    summary, table = dominance_threshold((2,), 1.0, 2.0, 1.25, 60)
    assert summary['monotone']
    assert summary['threshold'] == pytest.approx(2.0 * 1.25 ** 16)
    assert summary['threshold'] > 100 * math.log(2)
    assert (table.loc[table['log_lambda'] < 69.0, 'status'] == 'L<1').all()
    with pytest.raises(ValidationError):
        dominance_threshold((2,), 1.0, 1.0, 1.25, 10)


def test_singular_amplifier_log():
    assert singular_amplifier_log((2,), 2) == pytest.approx(math.log(13))


def test_splitting_estimate(counter):
    z = PlanePoint.i()
    estimate = splitting_estimate(counter, 2, 2.0 ** -8, 40.0, 0.2, 1.0, z)
    assert estimate.t_far == pytest.approx(math.exp(5.0))
    assert estimate.near_count == 4
    assert estimate.far_count == counter.count(CountQuery(2, estimate.t_far, z))
    assert estimate.log_near == pytest.approx(40.0 - math.log(40.0) + math.log(4))
    assert estimate.to_dict()['near']['sign'] == 1


def test_splitting_far_radius_cap(counter):
    assert math.exp(100.0 / 8.0) > MAX_FAR_RADIUS
    with pytest.raises(ValidationError):
        splitting_estimate(counter, 2, 1e-3, 100.0, 0.08, 1.0, PlanePoint.i())


def test_amplified_splitting(counter):
    seqs = build_sequences((2,), [SatakeParameter.singular()], 1)
    summary, table = amplified_splitting(counter, seqs, (2,), 1, 40.0, 0.2, 1.0, PlanePoint.i())
    assert summary['moduli'] == 2
    assert list(table['N']) == [1, 4]
    assert list(table['weight']) == pytest.approx([4.0, 2.0])
    assert summary['near_total']['sign'] == 1

"""
Tests for exact order arithmetic, the order checker and lab config loading.
"""

import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from config.lab_config import calibration_envelope, load_calibration, load_lab_config, parse_lab_config
from models.quaternion import AlgebraSpec, OrderBasis, OrderElement
from services.quaternion_core import QuaternionOrder, describe, random_element, verify_order
from utils.validators import ConfigurationError, ValidationError, parse_primes, parse_rational

coords = st.tuples(*[st.integers(-30, 30)] * 4).map(OrderElement)
wide_coords = st.tuples(*[st.integers(-10 ** 4, 10 ** 4)] * 4).map(OrderElement)

BROKEN_ROWS = (('1', '0', '0', '0'), ('0', '1', '0', '0'), ('0', '0', '1', '0'),
               ('0', '0', '0', '1/2'))


def _raw_lab(**overrides):
    raw = {
        'algebra': {'a': '-1', 'b': '3'},
        'order': {'basis': [['1', '0', '0', '0'], ['0', '1', '0', '0'], ['0', '0', '1', '0'],
                            ['1/2', '1/2', '1/2', '1/2']], 'source': 'test'},
        'ramified_primes': [2, 3],
        'primes': [5, 7],
    }
    raw.update(overrides)
    return raw


def test_shipped_order_is_valid(lab):
    report = verify_order(lab.algebra, lab.basis)
    assert report.valid
    assert report.violations == []
    assert report.checked == 16 + 8 + 1


def test_trace_form_matches_basis_norms(order):
    gram = order.trace_form()
    assert gram.dtype == np.int64
    assert (gram == gram.T).all()
    # 2N(e_r) on the diagonal: N(1) = 1, N(i) = 1, N(j) = -3, N((1+i+j+ij)/2) = -1
    assert list(np.diag(gram)) == [2, 2, -6, -2]


@settings(max_examples=60, deadline=None)
@given(x=coords, y=coords)
def test_norm_is_multiplicative(order, x, y):
    product = order.multiply(x, y)
    assert order.reduced_norm(product) == order.reduced_norm(x) * order.reduced_norm(y)


@settings(max_examples=60, deadline=None)
@given(x=coords)
def test_conjugate_gives_norm_and_trace(order, x):
    n = order.reduced_norm(x)
    assert order.multiply(x, order.conjugate(x)) == order.scalar(n)
    total = OrderElement(tuple(a + b for a, b in zip(x.coords, order.conjugate(x).coords)))
    assert total == order.scalar(order.reduced_trace(x))


@settings(max_examples=60, deadline=None)
@given(x=coords)
def test_trace_form_reproduces_norm(order, counter, x):
    assert counter.norm_of(x.coords) == order.reduced_norm(x)


@settings(max_examples=40, deadline=None)
@given(x=coords, y=coords)
def test_embedding_is_a_homomorphism(order, x, y):
    left = order.embed(order.multiply(x, y))
    right = order.embed(x) @ order.embed(y)
    assert np.allclose(left, right, rtol=1e-12, atol=1e-9)


@settings(max_examples=80, deadline=None)
@given(x=wide_coords)
def test_embedding_determinant_is_the_norm(order, x):
    norm = order.reduced_norm(x)
    assume(norm != 0 and 1000 * abs(norm) >= sum(c * c for c in x.coords))
    assert np.linalg.det(order.embed(x)) == pytest.approx(norm, rel=1e-9)


def test_multiplication_table(order):
    one, i, j, ij = (order.to_order_coords(std) for std in
                     ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)))
    assert order.multiply(i, j) == ij
    assert order.multiply(j, i) == OrderElement(tuple(-c for c in ij.coords))
    assert order.multiply(i, i) == order.scalar(-1)
    assert order.multiply(j, j) == order.scalar(3)
    one_plus_i = order.to_order_coords((1, 1, 0, 0))
    one_minus_i = order.to_order_coords((1, -1, 0, 0))
    assert order.multiply(one_plus_i, one_minus_i) == order.scalar(2)
    assert order.reduced_norm(one_plus_i) == 2
    assert np.allclose(order.embed(one), np.eye(2), atol=1e-15)
    anticommutator = order.embed(i) @ order.embed(j) + order.embed(j) @ order.embed(i)
    assert np.allclose(anticommutator, 0.0, atol=1e-12)


def test_to_order_coords(order):
    half = Fraction(1, 2)
    assert order.to_order_coords((half, half, half, half)) == OrderElement((0, 0, 0, 1))
    assert order.to_order_coords((1, 0, 0, 0)) == order.one
    with pytest.raises(ValidationError):
        order.to_order_coords((half, 0, 0, 0))


def test_central_elements(order):
    assert order.is_central(order.scalar(3))
    assert not order.is_central(OrderElement((0, 1, 0, 0)))


def test_describe_and_random_element(order):
    element = random_element(order, np.random.default_rng(7), bound=5)
    payload = describe(order, element)
    assert payload['coords'] == list(element.coords)
    assert payload['norm'] == order.reduced_norm(element)
    assert any(element.coords)


def test_broken_basis_is_reported():
    algebra = AlgebraSpec(-1, 3)
    report = verify_order(algebra, OrderBasis(BROKEN_ROWS))
    assert not report.valid
    kinds = {violation['kind'] for violation in report.violations}
    assert 'integrality' in kinds or 'closure' in kinds
    with pytest.raises(ConfigurationError):
        QuaternionOrder(algebra, OrderBasis(BROKEN_ROWS))
    assert QuaternionOrder(algebra, OrderBasis(BROKEN_ROWS), validate=False).one is None


def test_standard_basis_is_an_order():
    assert verify_order(AlgebraSpec(-1, 3), OrderBasis.standard()).valid


def test_algebra_and_basis_rejections():
    with pytest.raises(ConfigurationError):
        AlgebraSpec(-1, -3)
    with pytest.raises(ConfigurationError):
        AlgebraSpec(0, 3)
    with pytest.raises(ConfigurationError):
        OrderBasis((('1', '0', '0', '0'),) * 4)


def test_parsers():
    assert parse_rational('3/4') == Fraction(3, 4)
    assert parse_rational(' -2 ') == Fraction(-2)
    for bad in ('1/0', 'x', '1.5'):
        with pytest.raises(ValidationError):
            parse_rational(bad)
    assert parse_primes('7,2,3') == (2, 3, 7)
    for bad in ('4', '2,2', '', 'a'):
        with pytest.raises(ValidationError):
            parse_primes(bad)


def test_lab_config_defaults(lab):
    assert lab.algebra == AlgebraSpec(-1, 3)
    assert lab.primes == (5, 7)
    assert lab.ramified_primes == (2, 3)
    assert lab.sweep.L_values == (8, 64, 512)
    assert lab.to_dict()['algebra'] == {'a': '-1', 'b': '3'}


def test_lab_config_rejects_ramified_primes():
    with pytest.raises(ConfigurationError):
        parse_lab_config(_raw_lab(primes=[3, 5]))


def test_lab_config_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        load_lab_config(str(tmp_path / 'missing.json'))

    garbled = tmp_path / 'garbled.json'
    garbled.write_text('{not json')
    with pytest.raises(ConfigurationError):
        load_lab_config(str(garbled))

    broken = tmp_path / 'broken.json'
    broken.write_text(json.dumps(_raw_lab(order={'basis': [list(r) for r in BROKEN_ROWS]})))
    with pytest.raises(ConfigurationError):
        load_lab_config(str(broken))
    raw = load_lab_config(str(broken), validate=False)
    assert not verify_order(raw.algebra, raw.basis).valid

    with pytest.raises(ConfigurationError):
        parse_lab_config({'algebra': {'a': '-1'}})


def test_calibration_envelope():
    calibration = load_calibration()
    assert calibration_envelope(calibration, 0, 4, [2]) == pytest.approx(5.0)
    assert calibration_envelope(calibration, 0, 4, [2, 3]) == pytest.approx(25.0)
    assert calibration_envelope(calibration, 7, 8, [2]) == pytest.approx(1.008)
    assert calibration_envelope(calibration, -0.8, 8, [2]) == pytest.approx(17.1)
    assert calibration_envelope(calibration, 1.5, 8, [2]) is None

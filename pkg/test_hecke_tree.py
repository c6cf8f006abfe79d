"""
Tests for the truncated tree and exact Hecke identities on it.
"""

import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from models.satake import EigenvalueSequence, SatakeParameter
from models.tree import TruncatedTree
from services.hecke_tree import (HeckeReport, build_tree, eigenvalue_consistency, hecke_operator,
                                 spherical_function, sphere_operator, tree_report, valuation,
                                 verify_expansion_on_tree, verify_hecke_relation,
                                 verify_row_sums, verify_sphere_recursion)
from utils.validators import ValidationError


@pytest.mark.parametrize('p, radius, size', [(2, 1, 4), (3, 2, 17), (2, 8, 766), (5, 3, 187)])
def test_tree_sizes(p, radius, size):
    assert len(build_tree(p, radius)) == size


@pytest.mark.parametrize('p, radius', [(2, 5), (3, 3)])
def test_parent_child_structure(p, radius):
    tree = TruncatedTree(p, radius)
    for v in range(1, len(tree)):
        assert v in tree.children(tree.parent(v))
        assert tree.depth(v) == tree.depth(tree.parent(v)) + 1
    assert tree.parent(0) == -1
    assert tree.degree(0) == p + 1
    assert all(tree.degree(v) == p + 1 for v in tree.ball(radius - 1))
    assert all(tree.degree(v) == 1 for v in tree.level(radius))
    assert list(tree.depth_array()[:5]) == [tree.depth(v) for v in range(5)]


@settings(max_examples=30, deadline=None)
@given(p=st.sampled_from([2, 3, 5]), k=st.integers(0, 3), data=st.data())
def test_sphere_sizes_away_from_the_boundary(p, k, data):
    tree = TruncatedTree(p, 5)
    v = data.draw(st.integers(0, tree.level_start[5 - k + 1] - 1))
    expected = 1 if k == 0 else (p + 1) * p ** (k - 1)
    assert len(tree.sphere(v, k)) == expected


def test_vertex_bounds():
    tree = TruncatedTree(2, 2)
    with pytest.raises(ValidationError):
        tree.depth(len(tree))
    with pytest.raises(ValidationError):
        TruncatedTree(4, 2)
    with pytest.raises(ValidationError):
        TruncatedTree(2, 0)


def test_adjacency_is_symmetric():
    tree = build_tree(2, 3)
    dense = sphere_operator(tree, 1).to_dense()
    assert (dense == dense.T).all()
    assert list(dense.sum(axis=1)) == [tree.degree(v) for v in tree.vertices()]


@pytest.mark.parametrize('p, radius', [(2, 6), (3, 5), (5, 4)])
def test_hecke_relations_are_exact(p, radius):
    tree = build_tree(p, radius)
    for a in range(radius + 1):
        for b in range(radius + 1 - a):
            report = verify_hecke_relation(tree, p ** a, p ** b)
            assert report.passed, report.to_dict()
            assert report.rows_checked == len(tree.ball(radius - a - b))


def test_hecke_relation_validation():
    tree = build_tree(2, 4)
    with pytest.raises(ValidationError):
        verify_hecke_relation(tree, 8, 4)
    with pytest.raises(ValidationError):
        verify_hecke_relation(tree, 6, 2)
    assert valuation(3, 81) == 4
    with pytest.raises(ValidationError):
        valuation(3, 0)


def test_report_records_first_mismatch():
    report = HeckeReport('U(1)U(1)', 2, 3)
    report.record(0, {1: 1, 2: 1}, {1: 1, 2: 1})
    report.record(4, {5: 1, 7: 3}, {5: 2, 7: 3})
    assert not report.passed
    assert report.rows_checked == 2
    assert report.mismatches == [{'row': 4, 'column': 5, 'lhs': 1, 'rhs': 2}]


def test_sphere_recursion_and_row_sums():
    tree = build_tree(3, 5)
    for k in range(1, 5):
        assert verify_sphere_recursion(tree, k).passed
    with pytest.raises(ValidationError):
        verify_sphere_recursion(tree, 5)
    sums = verify_row_sums(tree)
    assert sums['passed'].all()
    row = sums.set_index('k').loc[2]
    assert row['sphere_sum'] == 12
    assert row['hecke_sum'] == 13
    assert hecke_operator(tree, 2).row_sum(0) == 13


def test_operator_ranges():
    tree = build_tree(2, 3)
    with pytest.raises(ValidationError):
        sphere_operator(tree, 4)
    with pytest.raises(ValidationError):
        hecke_operator(tree, -1)
    assert sphere_operator(tree, 0).row(5) == {5: 1}


def test_spherical_function_recursion():
    tree = build_tree(2, 6)
    omega = spherical_function(tree, SatakeParameter.singular())
    assert omega[0] == 1.0
    assert omega[1] == pytest.approx(2 * np.sqrt(2) / 3)


@pytest.mark.parametrize('theta', [0.3, 1.1, 2.9])
def test_eigenvalue_consistency_on_tree(theta):
    tree = build_tree(2, 6)
    result = eigenvalue_consistency(tree, SatakeParameter.tempered(theta), 4)
    assert result['passed'], result
    with pytest.raises(ValidationError):
        eigenvalue_consistency(tree, SatakeParameter.tempered(theta), 6)


def test_eigenvalue_consistency_nontempered():
    tree = build_tree(3, 5)
    result = eigenvalue_consistency(tree, SatakeParameter.nontempered(0.4), 3)
    assert result['passed'], result


@pytest.mark.parametrize('p, radius, L', [(2, 4, 2), (3, 2, 1), (2, 6, 3)])
def test_expansion_on_tree(p, radius, L):
    seq = EigenvalueSequence(p, SatakeParameter.tempered(1.1), L)
    result = verify_expansion_on_tree(build_tree(p, radius), seq, L)
    assert result['passed'], result
    assert result['terms'] == {1: 2, 2: 5, 3: 7}[L]


def test_expansion_on_tree_validation():
    seq = EigenvalueSequence(2, SatakeParameter.tempered(1.1), 3)
    with pytest.raises(ValidationError):
        verify_expansion_on_tree(build_tree(2, 5), seq, 3)
    with pytest.raises(ValidationError):
        verify_expansion_on_tree(build_tree(3, 6), seq, 3)


def test_tree_report():
    summary = tree_report(build_tree(2, 5))
    assert summary['passed']
    assert len(summary['relations']) == 15
    assert summary['row_sums_passed']
    assert summary['vertex_count'] == 1 + 3 * 31


@pytest.mark.slow
def test_hecke_relations_radius_eight():
    start = time.perf_counter()
    for p in (2, 3, 5):
        summary = tree_report(build_tree(p, 8))
        assert summary['passed'], p
        assert all(r['mismatch_count'] == 0 for r in summary['relations'])
    assert time.perf_counter() - start < 60.0

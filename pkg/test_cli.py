"""
Command-line tests: JSON/CSV on stdout, diagnostics on stderr, exit codes 0/1/2.
"""

import json
import math

import pytest

BROKEN_CONFIG = {
    'algebra': {'a': '-1', 'b': '3'},
    'order': {'basis': [['1', '0', '0', '0'], ['0', '1', '0', '0'], ['0', '0', '1', '0'],
                        ['0', '0', '0', '1/2']]},
    'ramified_primes': [2, 3],
    'primes': [5, 7],
}


@pytest.fixture
def broken_config(tmp_path):
    path = tmp_path / 'broken.json'
    path.write_text(json.dumps(BROKEN_CONFIG))
    return str(path)


def test_verify_order(invoke):
    result, payload = invoke('verify-order')
    assert result.exit_code == 0
    assert payload['passed']
    assert payload['results']['ramified_primes'] == [2, 3]
    assert payload['results']['checks']['valid']


def test_verify_order_rejects_broken_basis(invoke, broken_config):
    result, payload = invoke('--config', broken_config, 'verify-order')
    assert result.exit_code == 1
    assert payload['first_failure'] == 'order_axioms'
    assert payload['results']['checks']['violations']


def test_config_from_environment(invoke, broken_config):
    result, _ = invoke('verify-order', env={'AMPLAB_CONFIG': broken_config})
    assert result.exit_code == 1


def test_counting_needs_a_valid_order(invoke, broken_config):
    result, payload = invoke('--config', broken_config, 'count', '--norm', '1', '--t', '1')
    assert result.exit_code == 2
    assert payload is None
    assert 'Error:' in result.stderr


def test_missing_config(invoke, tmp_path):
    result, _ = invoke('--config', str(tmp_path / 'nowhere.json'), 'verify-order')
    assert result.exit_code == 2
    assert 'not found' in result.stderr


def test_count_central_units(invoke):
    result, payload = invoke('count', '--norm', '1', '--t', '0.01', '--z', '0,1')
    assert result.exit_code == 0
    assert payload['results']['count'] == 4
    assert payload['parameters'] == {'N': 1, 't': 0.01, 'z': [0.0, 1.0]}


def test_count_with_oracle_and_listing(invoke):
    result, payload = invoke('count', '--norm', '6', '--t', '2.13', '--z', '0.333,2', '--oracle',
                             '--list')
    assert result.exit_code == 0
    assert payload['results']['box_scan_count'] == payload['results']['count']
    assert len(payload['results']['elements']) == payload['results']['count']


@pytest.mark.parametrize('args', [
    ('count', '--norm', '1', '--t', '1', '--z', '0,-1'),
    ('count', '--norm', '0', '--t', '1'),
    ('count', '--norm', '1', '--t', '1', '--bogus'),
    ('tree-check', '--prime', '4', '--radius', '2'),
    ('--threads', '0', 'count', '--norm', '1', '--t', '1'),
    ('window', '--nodes', '100'),
    ('envelope', '--d', '1', '--loglambda', '10', '--epsilon', '2'),
    ('amplifier', '--L', '2', '--kind', 'tempered'),
])
def test_invalid_input_exits_two(invoke, args):
    result, _ = invoke(*args)
    assert result.exit_code == 2
    assert result.stdout == ''


def test_output_is_reproducible(invoke):
    args = ('count', '--norm', '6', '--t', '2.13', '--z', '0.5,1.5')
    first, _ = invoke(*args)
    second, _ = invoke('--threads', '1', *args)
    assert first.stdout == second.stdout
    assert 'wall_time' not in first.stdout


def test_out_writes_a_file(invoke, tmp_path):
    target = tmp_path / 'count.json'
    result, payload = invoke('--out', str(target), 'count', '--norm', '2', '--t', '2')
    assert result.exit_code == 0
    assert payload is None
    assert json.loads(target.read_text())['results']['count'] > 0


def test_scan_count_csv(invoke):
    result, _ = invoke('scan-count', '--prime', '2', '--kmax', '6', '--t', '10')
    assert result.exit_code == 0
    lines = result.stdout.strip().splitlines()
    assert len(lines) == 8
    assert 'count' in lines[0].split(',')
    assert 'slope=' in result.stderr


def test_delta_scan_csv(invoke):
    result, _ = invoke('delta-scan', '--prime', '3', '--kmax', '4')
    assert result.exit_code == 0
    assert len(result.stdout.strip().splitlines()) == 6
    assert 'flagged=' not in result.stderr


def test_delta_scan_flags_rows_above_threshold(invoke):
    result, _ = invoke('delta-scan', '--prime', '2', '--kmax', '3', '--threshold', '3')
    assert result.exit_code == 1
    lines = result.stdout.strip().splitlines()
    assert len(lines) == 5
    assert 'flagged=4' in result.stderr


def test_tree_check(invoke):
    result, payload = invoke('tree-check', '--prime', '2', '--radius', '4', '--theta', '1.1',
                             '--consistency-n', '2', '--expansion-L', '2')
    assert result.exit_code == 0
    names = [v['name'] for v in payload['verdicts']]
    assert names == ['hecke_relations', 'eigenvalue_consistency', 'expansion_on_tree']


def test_tree_check_single_pair(invoke):
    result, payload = invoke('tree-check', '--prime', '3', '--radius', '4', '--ordm', '1',
                             '--ordn', '2')
    assert result.exit_code == 0
    assert payload['results']['relation']['passed']


def test_singular_amplifier(invoke, tmp_path):
    table = tmp_path / 'expansion.csv'
    result, payload = invoke('amplifier', '--primes', '2', '--L', '2', '--kind', 'singular',
                             '--emit-csv', str(table))
    assert result.exit_code == 0
    assert payload['results']['A_L'] == 13
    assert payload['results']['K_eigenvalue'] == 169
    assert payload['results']['expansion_terms'] == 5
    assert table.read_text().startswith('modulus,')


def test_nontempered_amplifier(invoke):
    result, payload = invoke('amplifier', '--primes', '3', '--L', '3', '--kind', 'nontempered',
                             '--theta', '0.4')
    assert result.exit_code == 0
    assert payload['passed']


def test_sweep(invoke):
    result, payload = invoke('sweep', '--L', '8', '--grid-step', '0.01')
    assert result.exit_code == 0
    assert payload['results']['min_ratio'] >= 0.3
    assert payload['results']['near_singular_points'] > 0


@pytest.mark.parametrize('x', ['-0.8', '0', '7'])
def test_technical_sum(invoke, x):
    result, payload = invoke('technical-sum', '--x', x, '--L', '8', '--theta', '1.1')
    assert result.exit_code == 0
    assert 'calibration_ceiling' in payload['results']


def test_technical_sum_without_calibration_warns(invoke):
    result, payload = invoke('technical-sum', '--x', '1.5', '--L', '8', '--theta', '1.1')
    assert result.exit_code == 0
    assert [v['level'] for v in payload['verdicts']] == ['check', 'warning']


def test_efficiency(invoke):
    result, payload = invoke('--seed', '7', 'efficiency', '--L', '8', '--theta', '1.0',
                             '--trials', '200')
    assert result.exit_code == 0
    assert payload['parameters']['seed'] == 7
    assert payload['results']['optimum'] == pytest.approx(payload['results']['sum_lambda_sq'])


def test_window(invoke, tmp_path):
    h_csv, psi_csv = tmp_path / 'h.csv', tmp_path / 'psi.csv'
    result, payload = invoke('window', '--nodes', '256', '--emit-csv', str(h_csv),
                             '--psi-csv', str(psi_csv))
    assert result.exit_code == 0
    assert payload['results']['h0'] == 1.0
    assert h_csv.read_text().startswith('xi,h\n')
    assert psi_csv.read_text().startswith('t,psi,psi_normalized\n')


def test_plan(invoke):
    result, payload = invoke('plan', '--loglambda', '1000', '--primes', '2,3', '--threshold')
    assert result.exit_code == 0
    assert payload['results']['L'] == 5
    assert payload['results']['saving_exponent'] == 1.5
    assert payload['results']['dominance']['monotone']


def test_plan_too_small(invoke):
    result, _ = invoke('plan', '--loglambda', '50', '--primes', '2')
    assert result.exit_code == 2
    assert 'L = 0' in result.stderr


def test_plan_with_counts(invoke):
    result, payload = invoke('plan', '--loglambda', '1000', '--primes', '2', '--with-counts',
                             '--count-L', '1', '--count-loglambda', '40')
    assert result.exit_code == 0
    assert payload['results']['splitting']['moduli'] == 2


def test_envelope(invoke):
    result, payload = invoke('envelope', '--d', '2', '--loglambda', '100', '--epsilon', '0.08')
    assert result.exit_code == 0
    expected = 0.5 * (100 - math.log(2)) + 1 / 0.08
    assert payload['envelope']['log'] == pytest.approx(expected)
    assert payload['envelope']['sign'] == 1

    result, payload = invoke('envelope', '--d', '20', '--loglambda', '100', '--epsilon', '0.08')
    assert payload['envelope'] == {'log': '-inf', 'sign': 0, 'value': 0.0}


@pytest.mark.slow
def test_selftest(invoke):
    result, payload = invoke('--timing', 'selftest')
    assert result.exit_code == 0, result.stderr
    assert payload['passed']
    assert 'wall_time' in payload


def test_selftest_stops_at_a_broken_order(invoke, broken_config):
    result, payload = invoke('--config', broken_config, 'selftest')
    assert result.exit_code == 1
    assert not payload['passed']
    assert payload['first_failure'] == 'verify_order'
    assert 'verify_order' in result.stderr

"""
Tests for the command line: exit codes, report output and the check subcommands.
"""

import json

import pandas as pd
import pytest

import config
from conftest import fixture_path
from main import ProblemRunner, build_parser, main


@pytest.fixture(autouse = True)
def run_in_tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)


def run_json(capsys, argv):
    code = main(argv)
    return code, json.loads(capsys.readouterr().out)


# ============ DECIDE ============

def test_decide_exit_codes(capsys):
    assert main(['decide', fixture_path('flip')]) == 1
    assert main(['decide', fixture_path('cpc-and-or')]) == 0
    assert main(['decide', fixture_path('does-not-exist')]) == 3


def test_decide_writes_report(tmp_path, capsys):
    out = tmp_path / 'report.json'
    trace = tmp_path / 'trace.csv'
    code = main(['--json-out', str(out), '--trace-csv', str(trace), '--timing', 'decide', fixture_path('cpc-and-or')])
    assert code == 0
    report = json.loads(out.read_text())
    assert report['answer'] == 'yes'
    assert report['result']['witness']['kind'] == 'equivalent-pair-construction'
    assert 'timing' in report
    frame = pd.read_csv(trace)
    assert list(frame.columns) == ['step', 'condition', 'holds', 'detail']


def test_calculus_needs_promise(capsys):
    path = fixture_path('box-identity-calculus')
    assert main(['decide', path]) == 3
    code, report = run_json(capsys, ['--promise-locally-tabular', 'decide', path])
    assert code == 0
    assert report['result']['decision']['witness']['kind'] == 'graph-based-x-box'


def test_problem_without_matrices_or_calculus(tmp_path):
    path = tmp_path / 'empty.json'
    path.write_text(json.dumps({'signature': {'constants': ['c']}}))
    assert main(['decide', str(path)]) == 3


def test_subcommand_is_required():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


# ============ CHECKS ============

def test_check_consequence(capsys):
    code, report = run_json(capsys, ['--oracle', 'check', 'consequence', fixture_path('cpc-and-or'),
                                     '--premises', 'and(x, y)', '--goal', 'x'])
    assert code == 0
    assert report['result']['holds'] is True
    assert report['result']['oracle']['agree'] is True
    assert 'answer' not in report


def test_check_consequence_counter(capsys):
    _, report = run_json(capsys, ['check', 'consequence', fixture_path('cpc-and-or'), '--premises', 'x',
                                  '--goal', 'y'])
    assert report['result']['holds'] is False
    assert report['result']['counter']['valuation'] == {'x': '1', 'y': '0'}


def test_check_leibniz(capsys):
    _, report = run_json(capsys, ['--oracle', 'check', 'leibniz', fixture_path('intro'), '--matrix', 'A3'])
    assert report['result']['congruence']['blocks'] == [['0-', '0+'], ['1']]
    assert report['result']['oracle']['agree'] is True


def test_check_reduce(capsys):
    _, report = run_json(capsys, ['check', 'reduce', fixture_path('intro')])
    assert report['result']['reduced']['designated'] == ['1']
    assert report['result']['reduced']['algebra']['elements'] == ['0-/0+', '1']


def test_check_filters(capsys):
    _, report = run_json(capsys, ['check', 'filter', fixture_path('cpc-and-or'), '--subset', '0'])
    assert report['result']['generated'] == ['0', '1']


def test_check_theta_member_oracle(capsys):
    _, report = run_json(capsys, ['--oracle', 'check', 'theta-member', fixture_path('flip'), '--gamma', 'x',
                                  '--target', 'box(x) ~ box(box(x))'])
    assert report['result']['membership']['status'] == 'member'
    assert report['result']['oracle']['agree'] is True


def test_check_verify_tau(capsys):
    _, report = run_json(capsys, ['--depth', '1', 'check', 'verify-tau', fixture_path('b2')])
    assert report['result']['passed'] is True
    assert report['result']['semantics'] == 'reducts'


def test_check_equiv_pair_and_free_algebra(capsys):
    _, report = run_json(capsys, ['check', 'equiv-pair', fixture_path('cpc-and-or')])
    assert report['result']['pair'] == ['x', 'and(x,x)']
    _, report = run_json(capsys, ['check', 'free-algebra', fixture_path('cpc-and-or'), '--generators', '2'])
    assert report['result']['size'] == 4


def test_check_suszko(capsys):
    _, report = run_json(capsys, ['check', 'suszko', fixture_path('flip')])
    assert report['result']['holds'] is False


def test_overrides_stay_on_the_runner(capsys):
    theta, decide = dict(config.THETA_CONFIG), dict(config.DECIDE_CONFIG)
    code, _ = run_json(capsys, ['--chain-bound', '3', '--theta-method', 'bounded', '--exhaustive-ri',
                                'check', 'theta-member', fixture_path('flip'), '--gamma', 'x',
                                '--target', 'box(x) ~ box(box(x))'])
    assert code == 0
    assert config.THETA_CONFIG == theta
    assert config.DECIDE_CONFIG == decide

    tuned = ProblemRunner(build_parser().parse_args(['--chain-bound', '3', 'decide', fixture_path('flip')]))
    plain = ProblemRunner(build_parser().parse_args(['decide', fixture_path('flip')]))
    assert tuned.theta_config['chain_bound'] == 3
    assert plain.theta_config == theta


def test_missing_tau_is_an_input_error():
    assert main(['check', 'suszko', fixture_path('three-cycle')]) == 3


# ============ MACHINES ============

def test_encode_tm(capsys):
    _, report = run_json(capsys, ['encode-tm', fixture_path('tm-halting')])
    assert report['result']['rule_count'] == 18
    assert report['result']['rules']['R7'] == ['{} |> arrow(x,x)']


def test_tm_demo(capsys):
    code, report = run_json(capsys, ['tm-demo', fixture_path('tm-halting')])
    assert code == 0
    assert [line['group'] for line in report['result']['proof']] == ['R5', 'R4', 'R2', 'R3', 'R6']
    assert report['result']['theorem'] == 'arrow(x,dot(x,x))'
    code, report = run_json(capsys, ['tm-demo', fixture_path('tm-looping'), '--steps', '10'])
    assert code == 2
    assert report['result']['distinct_equivalences'] == []


# ============ REPORT STORE ============

def test_store_and_export(tmp_path, capsys):
    db = str(tmp_path / 'reports.db')
    assert main(['--store', '--db', db, 'decide', fixture_path('flip')]) == 1
    assert main(['--store', '--db', db, 'decide', fixture_path('identity-box')]) == 0
    capsys.readouterr()
    code, report = run_json(capsys, ['--db', db, 'export-reports', '--format', 'json',
                                     '--export-dir', str(tmp_path / 'exports')])
    assert code == 0
    rows = json.loads(open(report['result']['file']).read())
    assert [row['answer'] for row in rows] == ['no', 'yes']

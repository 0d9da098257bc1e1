"""
Tests for Hilbert calculi: rule parsing, proof checking, bounded saturation and the
locally tabular decision path.
"""

import pytest

import hilbert
from conftest import BOX, LATTICE, load_problem
from decide import decide_matrices
from equational_semantics import FormulaPool, verify_algebraic_semantics_bounded
from hilbert import (Budget, HilbertCalculus, ProofLine, Proof, calculus_from_matrices, check_proof,
                     decide_locally_tabular, derives_bounded, find_box_periodicity_hilbert, parse_rule,
                     saturate, split_top_level)
from matrix_logic import consequence, validates_rule
from terms import ParseError, Signature, X, Y, app, iterate, parse_formula


def box(n, atom = X):
    return iterate('box', atom, n)


@pytest.fixture
def identity_calculus():
    return HilbertCalculus.from_dict(BOX, ['x |> box(x)', 'box(x) |> x'])


# ============ PARSING ============

def test_split_top_level_respects_parentheses():
    assert split_top_level('and(x, y), x') == ['and(x, y)', ' x']
    assert split_top_level('  ') == []


def test_parse_rule():
    rule = parse_rule('and(x, y), y |> x', LATTICE)
    assert rule.conclusion is X
    assert set(rule.premises) == {Y, app('and', X, Y)}
    assert parse_rule('|> or(x, y)', LATTICE).premises == ()
    with pytest.raises(ParseError):
        parse_rule('x, y', LATTICE)


def test_calculus_checks_its_signature():
    with pytest.raises(ParseError):
        HilbertCalculus.from_dict(BOX, ['x |> and(x, x)'])
    H = HilbertCalculus.from_dict(BOX, [{'premises': ['x'], 'conclusion': 'box(x)'}])
    assert H.to_list() == ['x |> box(x)']


def test_budget_fields_are_positive():
    with pytest.raises(ValueError):
        Budget(max_depth = 0)


# ============ PROOFS ============

def test_derivation_yields_checked_proof(identity_calculus):
    result = derives_bounded(identity_calculus, [X], box(2))
    assert result.derived
    proof = result.proof
    assert proof.conclusion is box(2)
    assert [line.kind for line in proof.lines] == ['hypothesis', 'rule', 'rule']
    assert check_proof(identity_calculus, [X], proof)


def test_checker_rejects_tampered_proofs(identity_calculus):
    proof = derives_bounded(identity_calculus, [X], box(2)).proof
    assert not check_proof(identity_calculus, [], proof)
    proof.lines[1].rule = 1
    assert not check_proof(identity_calculus, [X], proof)
    forward = Proof([ProofLine(X, 'hypothesis'), ProofLine(box(1), 'rule', 0, None, (2,))])
    assert not check_proof(identity_calculus, [X], forward)


IMP = Signature(operations = (('imp', 2),))


def test_axiom_instance_is_a_one_line_proof():
    H = HilbertCalculus.from_dict(IMP, ['|> imp(x, x)'])
    goal = parse_formula('imp(y, y)', IMP)
    result = derives_bounded(H, [], goal)
    assert result.derived
    assert len(result.proof) == 1
    assert result.proof.lines[0].kind == 'rule'
    assert check_proof(H, [], result.proof)


def test_modus_ponens_derivation():
    H = HilbertCalculus.from_dict(IMP, ['x, imp(x, y) |> y', '|> imp(x, x)'])
    premises = [parse_formula('imp(a, b)', IMP), parse_formula('a', IMP)]
    goal = parse_formula('b', IMP)
    result = derives_bounded(H, premises, goal)
    assert result.derived
    assert result.proof.conclusion is goal
    assert len(result.proof) == 3
    assert [line.kind for line in result.proof.lines].count('hypothesis') == 2
    assert check_proof(H, premises, result.proof)


def test_goal_outside_budget_is_unknown(identity_calculus):
    budget = Budget(max_depth = 2)
    assert derives_bounded(identity_calculus, [X], box(3), budget).status == 'unknown'
    assert not derives_bounded(identity_calculus, [X], Y).derived


def test_saturation_reaches_a_fixpoint():
    H = HilbertCalculus.from_dict(BOX, ['box(x) |> x'])
    result = saturate(H, [box(2)])
    assert result.status == 'saturated'
    assert result.order == [box(2), box(1), X]


def test_axioms_with_free_variables_use_the_instance_pool():
    H = HilbertCalculus.from_dict(LATTICE, ['|> or(x, y)'])
    goal = parse_formula('or(and(x, x), x)', LATTICE)
    result = derives_bounded(H, [], goal)
    assert result.derived
    assert len(result.proof) == 1


def test_calculus_from_matrices_is_sound(d2_family):
    formulas = FormulaPool(depth = 1, variables = 2, max_formulas = 6).formulas(LATTICE)
    H = calculus_from_matrices(d2_family, formulas, premises_max = 1)
    assert H.rules
    for rule in H.rules:
        assert consequence(d2_family, rule.premises, rule.conclusion)


# ============ LOCALLY TABULAR ============

def test_periodicity_search(identity_calculus):
    assert find_box_periodicity_hilbert(identity_calculus) == (0, 0)
    double = HilbertCalculus.from_dict(BOX, ['x |> box(box(x))', 'box(box(x)) |> x'])
    assert find_box_periodicity_hilbert(double) == (0, 1)
    with pytest.raises(ValueError):
        find_box_periodicity_hilbert(HilbertCalculus(LATTICE, []))


def test_budget_exhaustion_is_reported():
    H = HilbertCalculus.from_dict(BOX, ['x |> box(x)'])
    budget = Budget(max_depth = 4, max_vars = 1, max_derived = 200, max_iterations = 6)
    result = decide_locally_tabular(H, budget)
    assert result.status == 'budget-exceeded'
    assert result.decision is None


def test_matrix_failing_a_rule_is_reported(identity_calculus, flip_family, monkeypatch):
    monkeypatch.setattr(hilbert, 'matrices_of_calculus', lambda H, generators, eqs: flip_family)
    result = decide_locally_tabular(identity_calculus)
    assert result.status == 'rule-violation'
    assert result.decision is None
    assert result.detail == {'matrix': 0, 'rule': 'x |> box(x)'}


def test_non_graph_calculus_is_yes_by_existence():
    H = HilbertCalculus.from_dict(LATTICE, ['and(x, y) |> x'])
    result = decide_locally_tabular(H)
    assert result.decision.answer == 'yes'
    assert result.decision.witness.kind == 'existence'


@pytest.mark.acceptance
def test_box_identity_calculus():
    H = load_problem('box-identity-calculus').calculus
    result = decide_locally_tabular(H)
    assert result.status == 'decided'
    assert result.decision.answer == 'yes'
    assert result.decision.witness.kind == 'graph-based-x-box'
    assert result.detail['m'] == 0 and result.detail['n'] == 0
    for matrix in result.family:
        assert all(validates_rule(matrix, rule) for rule in H.rules)
    pool = FormulaPool(depth = 3, variables = 2, premises_max = 2)
    assert verify_algebraic_semantics_bounded(result.family, result.decision.witness.tau, pool).passed


@pytest.mark.acceptance
def test_constants_calculus():
    H = load_problem('constants-calculus').calculus
    result = decide_locally_tabular(H)
    assert result.decision.answer == 'yes'
    assert result.decision.branch == 'constants-only(ii)'
    assert result.decision.witness.kind == 'almost-assertional'
    for matrix in result.family:
        assert all(validates_rule(matrix, rule) for rule in H.rules)
    pool = FormulaPool(depth = 1, variables = 2, premises_max = 2)
    assert verify_algebraic_semantics_bounded(result.family, result.decision.witness.tau, pool).passed


def test_single_constant_calculus_is_no():
    H = load_problem('constant-c0-calculus').calculus
    result = decide_locally_tabular(H)
    assert result.decision.answer == 'no'
    assert decide_matrices(result.family).answer == 'no'
    assert result.to_dict()['family_size'] == len(result.family)

"""
Tests for the decision procedure: per-branch answers on the bundled fixtures, refutation replay,
rule families and the characterization cross checks.
"""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import load_problem, random_algebra, random_designated
from decide import (Decision, Refutation, RuleFamilySpec, RuleInstance, check_rule_family,
                    cross_check_protoalgebraic, cross_check_with_thms, decide_matrices, replay_refutation)
from equational_semantics import (FormulaPool, TauSet, suszko_condition, tau_solutions,
                                  verify_algebraic_semantics_bounded)
from finite_algebra import BoundExceededError, FiniteAlgebra, box_periodicity, is_isomorphic
from matrix_logic import Matrix, MatrixFamily, reduce_matrix
from problem_file import elements_to_list
from terms import Signature, X, Y


BOX_C = Signature(constants = ('c0', 'c1'), operations = (('box', 1),))

MATRIX_FIXTURES = ['cpc-and-or', 'intro', 'cpc-and-or-mixed', 'b2', 'b2-full-filter', 'implication', 'flip',
                   'identity-box', 'three-cycle', 'flip-and-identity', 'box-constant', 'constants-only',
                   'constants-only-no']

EXPECTED = {
    'cpc-and-or': ('yes', 'non-graph-based'),
    'intro': ('yes', 'non-graph-based'),
    'cpc-and-or-mixed': ('yes', 'non-graph-based'),
    'b2': ('yes', 'non-graph-based'),
    'b2-full-filter': ('yes', 'trivial-inconsistent'),
    'implication': ('yes', 'non-graph-based'),
    'flip': ('no', 'graph-based-unary'),
    'identity-box': ('yes', 'graph-based-unary(i)'),
    'three-cycle': ('no', 'graph-based-unary'),
    'flip-and-identity': ('no', 'graph-based-unary'),
    'box-constant': ('yes', 'graph-based-unary(i)'),
    'constants-only': ('yes', 'constants-only(i)'),
    'constants-only-no': ('no', 'constants-only'),
}


# ============ RECORDS ============

def test_decision_needs_evidence():
    with pytest.raises(ValueError):
        Decision('yes', 'non-graph-based')
    with pytest.raises(ValueError):
        Decision('no', 'graph-based-unary')
    with pytest.raises(ValueError):
        Decision('maybe', 'x', refutation = Refutation('r'))


def test_rule_family_spec_validation():
    with pytest.raises(ValueError):
        RuleFamilySpec('Q')
    with pytest.raises(ValueError):
        RuleFamilySpec('R', k = 0)
    with pytest.raises(ValueError):
        RuleFamilySpec('I', m = 3, n = 2)


# ============ FIXTURE DECISIONS ============

@pytest.mark.parametrize('name', MATRIX_FIXTURES)
def test_fixture_decisions(name):
    decision = decide_matrices(load_problem(name).family())
    assert (decision.answer, decision.branch) == EXPECTED[name]
    if decision.answer == 'no':
        assert replay_refutation(load_problem(name).family(), decision.refutation)


# ============ SOUNDNESS OF YES ============

BINARY = Signature(operations = (('f', 2),))


def assert_sound_yes(family, decision, depth):
    assert decision.witness.tau is not None
    assert suszko_condition(family, decision.witness.tau)
    pool = FormulaPool(depth = depth, variables = 2, premises_max = 2)
    report = verify_algebraic_semantics_bounded(family, decision.witness.tau, pool, semantics = 'syntactic')
    assert report.passed, report.counterexamples[:3]


@pytest.mark.parametrize('name', [name for name in MATRIX_FIXTURES if EXPECTED[name][0] == 'yes'])
def test_fixture_witnesses_are_sound(name):
    family = load_problem(name).family()
    assert_sound_yes(family, decide_matrices(family), depth = 3)


def test_binary_families_always_carry_a_tau():
    rng = random.Random(0)
    for _ in range(60):
        size = rng.randint(3, 5)
        family = MatrixFamily([Matrix(random_algebra(rng, BINARY, size), random_designated(rng, size))], BINARY)
        decision = decide_matrices(family)
        assert decision.answer == 'yes'
        assert decision.witness.tau is not None
        assert decision.witness.kind != 'existence'
        if decision.branch == 'non-graph-based':
            phi, psi = decision.witness.evidence['phi'], decision.witness.evidence['psi']
            assert phi != psi


@pytest.mark.property_based
@given(st.integers(min_value = 0, max_value = 10 ** 6), st.integers(min_value = 2, max_value = 3))
@settings(max_examples = 10, deadline = None)
def test_random_yes_witnesses_are_sound(seed, size):
    rng = random.Random(seed)
    family = MatrixFamily([Matrix(random_algebra(rng, BINARY, size), random_designated(rng, size))], BINARY)
    decision = decide_matrices(family)
    if decision.answer == 'yes':
        assert_sound_yes(family, decision, depth = 2)


@pytest.mark.acceptance
def test_intro_example():
    family = load_problem('cpc-and-or').family()
    decision = decide_matrices(family)
    assert decision.answer == 'yes'
    assert decision.witness.kind == 'equivalent-pair-construction'
    assert decision.witness.evidence['k'] == 3
    pool = FormulaPool(depth = 3, variables = 2, premises_max = 2)
    report = verify_algebraic_semantics_bounded(family, decision.witness.tau, pool, semantics = 'syntactic')
    assert report.passed
    assert report.counterexamples == []

    intro = load_problem('intro')
    A = intro.algebra('A3')
    reduced = reduce_matrix(intro.matrix('A3'))
    assert is_isomorphic(reduced.algebra, family[0].algebra)
    assert elements_to_list(A, tau_solutions(A, TauSet.parse('x ~ and(x, x)', A.sig))) == ['1']


@pytest.mark.acceptance
def test_flip_is_refuted(flip_family):
    decision = decide_matrices(flip_family)
    assert decision.answer == 'no'
    cited = [inst for inst in decision.refutation.instances if inst.label == '(i) x |- box x']
    assert len(cited) == 1
    assert not cited[0].valid
    assert cited[0].valuation == {'x': 1}
    assert replay_refutation(flip_family, decision.refutation)


def test_replay_catches_false_records(flip_family):
    fake = Refutation('fake', [RuleInstance('fake', (X,), Y, True)])
    assert not replay_refutation(flip_family, fake)
    wrong_valuation = Refutation('fake', [RuleInstance('fake', (X,), Y, False, 0, {'x': 1, 'y': 1})])
    assert not replay_refutation(flip_family, wrong_valuation)


def test_almost_inconsistent_logics(d2):
    sig = Signature(constants = ('c',))
    point = FiniteAlgebra(sig, 1, {'c': 0}, {})
    decision = decide_matrices(MatrixFamily([Matrix(point, frozenset())]))
    assert (decision.answer, decision.branch) == ('no', 'trivial-almost')
    decision = decide_matrices(MatrixFamily([Matrix(d2, frozenset())]))
    assert (decision.answer, decision.branch) == ('yes', 'trivial-almost')


def test_constants_interderivable():
    sig = Signature(constants = ('c0', 'c1', 'c2'))
    A = FiniteAlgebra(sig, 2, {'c0': 0, 'c1': 0, 'c2': 1}, {})
    decision = decide_matrices(MatrixFamily([Matrix(A, frozenset({1})), Matrix(A, frozenset())]))
    # no theorems, x |- c2 only, c0 and c1 interderivable
    assert (decision.answer, decision.branch) == ('yes', 'constants-only(iii)')
    assert decision.witness.kind == 'almost-assertional'


def test_trace_frame(flip_family):
    decision = decide_matrices(flip_family)
    frame = decision.trace_frame()
    assert list(frame.columns) == ['step', 'condition', 'holds', 'detail']
    assert len(frame) == len(decision.trace)
    assert not frame['holds'].iloc[0]
    assert decision.to_dict()['refutation']['instances']


# ============ RULE FAMILIES ============

def test_unital_rules_on_flip(flip_family):
    assert check_rule_family(flip_family, RuleFamilySpec('U', m = 0, n = 1)).holds


def test_rule_families_need_graph_signature(d2_family):
    with pytest.raises(ValueError):
        check_rule_family(d2_family, RuleFamilySpec('U'))


def test_exhaustive_enumeration_is_bounded():
    A = FiniteAlgebra(BOX_C, 1, {'c0': 0, 'c1': 0}, {'box': [0]})
    M = MatrixFamily([Matrix(A, frozenset({0}))])
    with pytest.raises(BoundExceededError):
        check_rule_family(M, RuleFamilySpec('R', m = 0, n = 3), exhaustive = True)
    assert check_rule_family(M, RuleFamilySpec('R', m = 0, n = 3)).holds


@pytest.mark.acceptance
def test_pruned_rule_families_match_exhaustive():
    rng = random.Random(10)
    compared = 0
    fixtures = 0
    while fixtures < 20:
        size = rng.randint(1, 4)
        A = random_algebra(rng, BOX_C, size)
        m, n = box_periodicity([A])
        if 2 * n - m + 1 > 4:
            continue
        fixtures += 1
        M = MatrixFamily([Matrix(A, random_designated(rng, size))])
        for k in range(1, max(n, 1) + 1):
            for family in ('R', 'I'):
                for i in range(len(BOX_C.constants)):
                    spec = RuleFamilySpec(family, k = k, i = i, m = m, n = n)
                    pruned = check_rule_family(M, spec, exhaustive = False)
                    full = check_rule_family(M, spec, exhaustive = True)
                    assert pruned.holds == full.holds, (A.to_dict(), spec)
                    compared += 1
    assert compared >= 40


# ============ CROSS CHECKS ============

@pytest.mark.acceptance
@pytest.mark.parametrize('name', MATRIX_FIXTURES)
def test_cross_checks_never_disagree(name):
    family = load_problem(name).family()
    decision = decide_matrices(family)
    for report in (cross_check_protoalgebraic(family, decision), cross_check_with_thms(family, decision)):
        assert report.status != 'disagree', report.to_dict()


def test_protoalgebraic_check_certifies_implication():
    family = load_problem('implication').family()
    report = cross_check_protoalgebraic(family)
    assert report.status == 'agree'
    assert 'imp(x,y)' in report.detail['delta']

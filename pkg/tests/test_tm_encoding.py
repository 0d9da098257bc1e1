"""
Tests for Turing machines, configuration formulas, the machine calculus and the halting replay.
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fixture_path
from hilbert import check_proof
from terms import SignatureError, X, app, to_text
from tm_encoding import (BLANK, Configuration, ConfigurationError, MachineError, TuringMachine,
                         config_formula, demo_halting_derivation, distinct_equivalences, encode_calculus,
                         encode_language, initial_configuration, load_machine, parse_config_formula,
                         parse_input, simulate, step)


def total_delta(states, target = 'p', write = '1', move = 'R'):
    return {(q, a): (target, write, move) for q in states for a in ('0', '1', BLANK)}


@pytest.fixture
def halting():
    return load_machine(fixture_path('tm-halting'))


@pytest.fixture
def looping():
    return load_machine(fixture_path('tm-looping'))


# ============ MACHINES ============

def test_machine_validation():
    with pytest.raises(MachineError):
        TuringMachine(('p',), ('q0',), 'q0', {('q0', '0'): ('p', '1', 'R')})
    with pytest.raises(MachineError):
        TuringMachine(('p',), ('q0',), 'p', total_delta(['q0']))
    with pytest.raises(MachineError):
        TuringMachine(('q0',), ('q0',), 'q0', total_delta(['q0']))
    with pytest.raises(MachineError):
        TuringMachine(('p',), ('q0',), 'q0', total_delta(['q0'], move = 'S'))
    machine = TuringMachine(('p',), ('q0',), 'q0', total_delta(['q0']))
    assert TuringMachine.from_dict(machine.to_dict()) == machine


def test_duplicate_transitions_are_rejected(halting):
    data = halting.machine.to_dict()
    data['delta'].append(dict(data['delta'][0]))
    with pytest.raises(MachineError):
        TuringMachine.from_dict(data)


@pytest.mark.parametrize('text', ['1', '', '102', 'ab'])
def test_input_must_be_binary(text):
    with pytest.raises(MachineError):
        parse_input(text)


def test_state_names_must_not_be_tape_symbols():
    machine = TuringMachine(('1',), ('q0',), 'q0', total_delta(['q0'], target = '1'))
    with pytest.raises(SignatureError):
        encode_language(machine)


def test_load_machine_reads_budget(halting):
    assert halting.input == ('1', '1')
    assert halting.budget.max_depth == 3
    assert halting.machine.initial == 'q0'


# ============ CONFIGURATIONS ============

def test_configuration_validation():
    with pytest.raises(ConfigurationError):
        Configuration('q0', ('1',), BLANK, ('0',))
    with pytest.raises(ConfigurationError):
        Configuration('q0', (), '1', ('0',))
    with pytest.raises(ConfigurationError):
        Configuration('q0', ('2',), '1', (BLANK,))


def test_config_formula_shape():
    c = Configuration('q0', (BLANK,), '1', ('0', '1'))
    assert to_text(config_formula(c)) == 'dot(q0,lambda(empty,1,dot(0,1)))'


segment = st.one_of(st.just((BLANK,)), st.lists(st.sampled_from(['0', '1']), min_size = 1, max_size = 4).map(tuple))


@pytest.mark.property_based
@given(segment, st.sampled_from(['0', '1']), segment)
@settings(max_examples = 60)
def test_config_formula_is_invertible(left, head, right):
    c = Configuration('q0', left, head, right)
    assert parse_config_formula(config_formula(c)) == c


def test_non_configuration_formulas_are_rejected():
    with pytest.raises(ConfigurationError):
        parse_config_formula(app('arrow', X, X))


def test_left_move_writes_then_moves():
    machine = TuringMachine(('p',), ('q',), 'q', total_delta(['q'], write = '0', move = 'L'))
    c = Configuration('q', ('1', '0'), '1', ('0',))
    assert step(machine, c) == Configuration('p', ('1',), '0', ('0', '0'))
    assert step(machine, Configuration('p', ('1',), '0', ('0', '0'))) is None


def test_simulation(halting, looping):
    run = simulate(halting.machine, halting.input, 10)
    assert run.halted and run.steps == 1
    assert run.configurations[-1].tape() == '1[1]'
    assert run.configurations[0] == initial_configuration(halting.machine, halting.input)
    loop = simulate(looping.machine, looping.input, 25)
    assert not loop.halted and loop.steps == 25
    assert loop.configurations[2] == loop.configurations[0]


# ============ CALCULUS ============

def test_calculus_groups(halting):
    H = encode_calculus(halting.machine, halting.input)
    sizes = {group: len(members) for group, members in H.groups.items()}
    assert sizes == {'R2': 3, 'R3': 4, 'R4': 4, 'R5': 1, 'R6': 1, 'R7': 1, 'R8': 1, 'R9': 3}
    assert len(H) == 18
    assert H.group_of(H.groups['R7'][0]) == 'R7'
    assert to_text(H.rules[H.groups['R5'][0]].conclusion) == 'dot(q0,lambda(empty,1,1))'


@pytest.mark.acceptance
def test_halting_machine_derives_collapse(halting):
    proof = demo_halting_derivation(halting.machine, halting.input, 10)
    H = encode_calculus(halting.machine, halting.input)
    assert proof is not None
    assert check_proof(H, [], proof)
    assert proof.conclusion is app('arrow', X, app('dot', X, X))
    assert [H.group_of(i) for i in proof.rules_used()] == ['R5', 'R4', 'R2', 'R3', 'R6']


@pytest.mark.acceptance
def test_looping_machine_has_no_distinct_equivalences(looping):
    assert demo_halting_derivation(looping.machine, looping.input, 50) is None
    H = encode_calculus(looping.machine, looping.input)
    assert distinct_equivalences(H, looping.budget) == []

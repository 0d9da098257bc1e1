"""
Tests for signatures, interned formulas, parsing and substitution.
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from terms import (ArityError, Equation, ParseError, Signature, SignatureError, Substitution, X, Y, app,
                   apply_substitution, box_diamond_from_nary, box_exponent, canonical_variables, const,
                   enumerate_formulas, formula_key, is_graph_based, iterate, match, parse_equations, parse_formula,
                   replace_variable, subformula_tree, subformulas, to_text, variables)


SIG = Signature(constants = ('c',), operations = (('and', 2), ('box', 1)))


# ============ SIGNATURES ============

def test_signature_rejects_duplicates_and_bad_names():
    with pytest.raises(SignatureError):
        Signature(constants = ('c',), operations = (('c', 1),))
    with pytest.raises(SignatureError):
        Signature(constants = ('1',))
    with pytest.raises(SignatureError):
        Signature(operations = (('f', 0),))


def test_tape_symbols_are_opt_in():
    sig = Signature(constants = ('0', '1'), tape_symbols = True)
    assert sig.is_constant('0')


def test_graph_based_classification():
    assert is_graph_based(Signature(constants = ('c',), operations = (('box', 1),)))
    assert is_graph_based(Signature(constants = ('c0', 'c1')))
    assert not is_graph_based(SIG)
    assert not is_graph_based(Signature(operations = (('f', 1), ('g', 1))))


def test_signature_dict_round_trip():
    assert Signature.from_dict(SIG.to_dict()) == SIG


# ============ FORMULAS ============

def test_formulas_are_interned():
    f = app('and', X, app('box', Y))
    g = parse_formula('and(x, box(y))', SIG)
    assert f is g
    assert f.size == 4
    assert f.depth == 2


def test_printer_and_parser_agree():
    text = 'and(box(c),and(x,y))'
    assert to_text(parse_formula(text, SIG)) == text


@pytest.mark.parametrize('text, error', [
    ('and(x)', ArityError),
    ('box', ArityError),
    ('c(x)', ArityError),
    ('f(x)', ParseError),
    ('and(x, y', ParseError),
    ('x y', ParseError),
    ('', ParseError),
    ('box(x) + y', ParseError),
])
def test_parse_errors(text, error):
    with pytest.raises(error):
        parse_formula(text, SIG)


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as info:
        parse_formula('and(x, $)', SIG)
    assert info.value.position == 7


def test_iterate_and_box_exponent():
    f = iterate('box', const('c'), 3)
    assert box_exponent(f, 'box') == (3, const('c'))
    assert iterate('box', X, 0) is X


def test_variables_and_subformulas():
    f = parse_formula('and(box(x), and(x, y))', SIG)
    assert variables(f) == {'x', 'y'}
    subs = subformulas(f)
    assert subs[-1] is f
    assert len(subs) == len(set(subs))
    assert all(subs.index(a) < subs.index(g) for g in subs for a in g.args)


def test_canonical_variables():
    assert canonical_variables(2) == ['x', 'y']
    assert canonical_variables(7)[-2:] == ['x5', 'x6']


# ============ SUBSTITUTION ============

def test_substitution_and_composition():
    s = Substitution({'x': app('box', Y)})
    t = Substitution({'y': const('c')})
    f = app('and', X, Y)
    assert apply_substitution(s, f) is app('and', app('box', Y), Y)
    assert t.compose(s)(f) is t(s(f))


def test_replace_variable_keeps_sharing():
    shared = app('and', X, X)
    nested = app('and', shared, shared)
    out = replace_variable(nested, 'x', app('box', X))
    assert out.args[0] is out.args[1]


def test_match_binds_consistently():
    pattern = app('and', X, X)
    assert match(pattern, app('and', Y, Y)) == {'x': Y}
    assert match(pattern, app('and', X, Y)) is None
    assert match(app('box', X), X) is None


def test_equations_parse_and_substitute():
    eqs = parse_equations('x ~ box(x); box(c) ~ c', SIG)
    assert [str(e) for e in eqs] == ['x ~ box(x)', 'box(c) ~ c']
    s = Substitution({'x': const('c')})
    assert eqs[0].substitute(s) == Equation(const('c'), app('box', const('c')))


# ============ SUBFORMULA TREES ============

def test_subformula_tree_branch_lengths():
    tree = subformula_tree(app('and', X, X))
    assert sorted(tree.branch_lengths()) == [2, 2]
    assert tree.to_formula() is app('and', X, X)


def test_subformula_tree_pruning():
    tree = subformula_tree(app('and', X, const('c')), prune = 'x')
    assert tree.node_count == 2
    assert subformula_tree(X, prune = 'x').is_empty


def test_box_and_diamond_from_connective():
    box, diamond = box_diamond_from_nary(SIG, 'and')
    assert to_text(box) == 'and(and(x,x),x)'
    assert to_text(diamond) == 'and(x,and(x,x))'
    ternary = Signature(operations = (('f', 3),))
    box, diamond = box_diamond_from_nary(ternary, 'f')
    assert to_text(box) == 'f(f(x,x,x),x,x)'
    assert to_text(diamond) == 'f(x,f(x,x,x),x)'
    with pytest.raises(SignatureError):
        box_diamond_from_nary(SIG, 'box')


def test_subformula_tree_of_unary_chain():
    assert subformula_tree(iterate('box', X, 2)).node_count == 3


# ============ ENUMERATION ============

def test_enumeration_order_and_depth():
    formulas = enumerate_formulas(SIG, ['x'], 1)
    keys = [formula_key(f) for f in formulas]
    assert keys == sorted(keys)
    assert all(f.depth <= 1 for f in formulas)
    assert app('box', X) in formulas and app('and', X, const('c')) in formulas


def test_enumeration_truncation():
    assert len(enumerate_formulas(SIG, ['x', 'y'], 3, 10)) == 10


formula_text = st.recursive(
    st.sampled_from(['x', 'y', 'c']),
    lambda children: st.one_of(
        children.map(lambda a: f"box({a})"),
        st.tuples(children, children).map(lambda p: f"and({p[0]},{p[1]})")),
    max_leaves = 8)


@pytest.mark.property_based
@given(formula_text)
@settings(max_examples = 100)
def test_print_parse_identity(text):
    f = parse_formula(text, SIG)
    assert to_text(f) == text
    assert parse_formula(to_text(f), SIG) is f


@pytest.mark.property_based
@given(formula_text, formula_text)
@settings(max_examples = 100)
def test_substitution_instance_matches(pattern_text, value_text):
    pattern = parse_formula(pattern_text, SIG)
    value = parse_formula(value_text, SIG)
    instance = replace_variable(pattern, 'x', value)
    binding = match(pattern, instance)
    assert binding is not None
    assert apply_substitution(Substitution(binding), pattern) is instance
    if 'x' in variables(pattern):
        assert binding['x'] is value

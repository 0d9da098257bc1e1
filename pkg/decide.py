import logging
import itertools
from dataclasses import dataclass, field
from functools import reduce
from math import gcd, floor, log2
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from config import DECIDE_CONFIG
from equational_semantics import (FormulaPool, Witness, WitnessError, construct_tau_graph_based,
                                  construct_tau_sufficient, construct_tau_trivial, find_equivalent_pair)
from finite_algebra import BoundExceededError, box_periodicity, evaluate
from matrix_logic import (MatrixFamily, assertional_formula, consequence, find_counter_valuation,
                          find_theorem, is_trivial, unital_reduced)
from terms import X, Y, Formula, const, formula_key, is_graph_based, iterate, replace_variable, to_text, variables_of


logger = logging.getLogger(__name__)


# ============ RECORDS ============

@dataclass
class RuleInstance:
    label: str
    premises: Tuple[Formula, ...]
    conclusion: Formula
    valid: bool
    matrix: Optional[int] = None
    valuation: Optional[Dict[str, int]] = None

    def to_dict(self) -> dict:
        data = {'label': self.label,
                'premises': [to_text(p) for p in self.premises],
                'conclusion': to_text(self.conclusion),
                'valid': self.valid}
        if self.matrix is not None:
            data['matrix'] = self.matrix
            data['valuation'] = self.valuation
        return data


@dataclass
class Refutation:
    condition: str
    instances: List[RuleInstance] = field(default_factory = list)

    def to_dict(self) -> dict:
        return {'condition': self.condition, 'instances': [i.to_dict() for i in self.instances]}


@dataclass
class TraceEntry:
    condition: str
    holds: bool
    detail: str = ''


@dataclass
class Decision:
    answer: str
    branch: str
    witness: Optional[Witness] = None
    refutation: Optional[Refutation] = None
    trace: List[TraceEntry] = field(default_factory = list)

    def __post_init__(self):
        if self.answer not in ('yes', 'no'):
            raise ValueError(f"Invalid answer: {self.answer}")
        if self.answer == 'yes' and self.witness is None:
            raise ValueError("A yes decision needs a witness")
        if self.answer == 'no' and self.refutation is None:
            raise ValueError("A no decision needs a refutation")

    def to_dict(self) -> dict:
        data = {'answer': self.answer, 'branch': self.branch,
                'trace': [{'condition': t.condition, 'holds': t.holds, 'detail': t.detail} for t in self.trace]}
        if self.witness is not None:
            data['witness'] = self.witness.to_dict()
        if self.refutation is not None:
            data['refutation'] = self.refutation.to_dict()
        return data

    def trace_frame(self) -> pd.DataFrame:
        return pd.DataFrame([{'step': i, 'condition': t.condition, 'holds': t.holds, 'detail': t.detail}
                             for i, t in enumerate(self.trace)],
                            columns = ['step', 'condition', 'holds', 'detail'])


@dataclass(frozen = True)
class RuleFamilySpec:
    family: str
    k: int = 1
    i: int = 0
    m: int = 0
    n: int = 0

    def __post_init__(self):
        if self.family not in ('U', 'S', 'R', 'I'):
            raise ValueError(f"Invalid rule family: {self.family}")
        if self.k < 1:
            raise ValueError(f"Rule family parameter k must be positive, got {self.k}")
        if not 0 <= self.m <= self.n:
            raise ValueError(f"Invalid bounds m = {self.m}, n = {self.n}")


@dataclass
class RuleCheck:
    holds: bool
    failing: Optional[RuleInstance] = None
    checked: int = 0


def check_instance(M: MatrixFamily, label: str, premises: Sequence[Formula], conclusion: Formula) -> RuleInstance:
    counter = find_counter_valuation(M, premises, conclusion, checked = False)
    if counter is None:
        return RuleInstance(label, tuple(premises), conclusion, True)
    index, valuation = counter
    return RuleInstance(label, tuple(premises), conclusion, False, index, valuation)


def replay_refutation(M: MatrixFamily, refutation: Refutation) -> bool:
    """
    Re-evaluate every recorded instance: invalid ones at their valuation, valid ones exhaustively
    """
    for inst in refutation.instances:
        if inst.valid:
            if not consequence(M, inst.premises, inst.conclusion):
                return False
            continue
        matrix = M[inst.matrix]
        values = [evaluate(matrix.algebra, p, inst.valuation) for p in inst.premises]
        if not all(v in matrix.designated for v in values):
            return False
        if evaluate(matrix.algebra, inst.conclusion, inst.valuation) in matrix.designated:
            return False
    return True


# ============ RULE FAMILIES ============

def _ri_bound(spec: RuleFamilySpec) -> int:
    return 2 * spec.n - spec.m + 1


def _exponent_sets(bound: int) -> List[Tuple[Tuple[int, ...], int]]:
    """
    Exponent sets E within {0..bound} small enough to realise every gcd, each with the gcd of its differences
    """
    largest = floor(log2(bound)) + 2 if bound >= 1 else 1
    sets = []
    for r in range(0, largest + 1):
        for E in itertools.combinations(range(bound + 1), r):
            d = reduce(gcd, (b - a for a, b in zip(E, E[1:])), 0)
            sets.append((E, d))
    return sets


def _pair_sets(bound: int) -> List[Tuple[Tuple[int, ...], int]]:
    """
    Literal pair sets {(u_j, v_j)} with u_j < v_j <= bound, as (exponents, gcd of v_j - u_j)
    """
    pairs = list(itertools.combinations(range(bound + 1), 2))
    sets = []
    for r in range(0, len(pairs) + 1):
        for chosen in itertools.combinations(pairs, r):
            exponents = tuple(sorted({e for pair in chosen for e in pair}))
            d = reduce(gcd, (v - u for u, v in chosen), 0)
            sets.append((exponents, d))
    return sets


def check_rule_family(M: MatrixFamily, spec: RuleFamilySpec, exhaustive: Optional[bool] = None) -> RuleCheck:
    sig = M.sig
    if not is_graph_based(sig) or not sig.unary_operations:
        raise ValueError("Rule families need a graph-based signature with a unary connective")
    box = sig.unary_operations[0]
    exhaustive = DECIDE_CONFIG['exhaustive_ri'] if exhaustive is None else exhaustive
    if spec.family != 'U' and not 0 <= spec.i < len(sig.constants):
        raise ValueError(f"Constant index {spec.i} out of range")
    c = const(sig.constants[spec.i]) if spec.family != 'U' else None
    checked = 0
    memo: Dict[Tuple[Tuple[Formula, ...], Formula], RuleInstance] = {}

    def run(label, premises, conclusion):
        nonlocal checked
        key = (tuple(sorted(set(premises), key = formula_key)), conclusion)
        inst = memo.get(key)
        if inst is None:
            checked += 1
            inst = check_instance(M, label, key[0], conclusion)
            memo[key] = inst
        return inst

    if spec.family == 'U':
        for t in range(spec.n + 1):
            inst = run(f"U t={t}", [X, Y, iterate(box, X, t)], iterate(box, Y, t))
            if not inst.valid:
                return RuleCheck(False, inst, checked)
        return RuleCheck(True, None, checked)

    if spec.family == 'S':
        for t in range(spec.n + 1):
            up, down = iterate(box, X, t + spec.k), iterate(box, c, t)
            for inst in (run(f"S k={spec.k} t={t} forward", [X, up], down),
                         run(f"S k={spec.k} t={t} backward", [X, down], up)):
                if not inst.valid:
                    return RuleCheck(False, inst, checked)
        return RuleCheck(True, None, checked)

    bound = _ri_bound(spec)
    if exhaustive and bound > 5:
        raise BoundExceededError(f"Exhaustive R/I enumeration limited to 2n - m + 1 <= 5, got {bound}")
    sets = _pair_sets(bound) if exhaustive else _exponent_sets(bound)
    for exponents, d in sets:
        if d == 0:
            continue
        premises = [iterate(box, X, e) for e in exponents]
        if spec.family == 'R':
            for t in range(bound + 1):
                for g in range(d, bound + 1, d):
                    inst = run(f"R k={spec.k} E={list(exponents)} t={t} g={g}",
                               premises + [iterate(box, X, t)], iterate(box, X, t + g))
                    if not inst.valid:
                        return RuleCheck(False, inst, checked)
        else:
            for h in range(bound + 1):
                if (h + spec.k) % d:
                    continue
                inst = run(f"I k={spec.k} E={list(exponents)} h={h}", premises, iterate(box, c, h))
                if not inst.valid:
                    return RuleCheck(False, inst, checked)
    return RuleCheck(True, None, checked)


# ============ DECISION PROCEDURE ============

class MatrixDecider:
    """
    Decides whether the logic of a finite matrix family has an algebraic semantics
    """

    def __init__(self, M: MatrixFamily, exhaustive_ri: Optional[bool] = None):
        self.M = M
        self.sig = M.sig
        self.exhaustive_ri = DECIDE_CONFIG['exhaustive_ri'] if exhaustive_ri is None else exhaustive_ri
        self.trace: List[TraceEntry] = []
        self.logger = logging.getLogger(__name__)

    def note(self, condition: str, holds: bool, detail: str = '') -> bool:
        self.trace.append(TraceEntry(condition, holds, detail))
        self.logger.debug(f"{condition}: {holds} {detail}")
        return holds

    def instance(self, label, premises, conclusion) -> RuleInstance:
        inst = check_instance(self.M, label, premises, conclusion)
        self.note(label, inst.valid)
        return inst

    def yes(self, branch: str, witness: Witness) -> Decision:
        self.logger.info(f"Decision yes, branch {branch}, witness {witness.kind}")
        return Decision('yes', branch, witness, None, self.trace)

    def no(self, branch: str, refutation: Refutation) -> Decision:
        self.logger.info(f"Decision no, branch {branch}: {refutation.condition}")
        return Decision('no', branch, None, refutation, self.trace)

    def decide(self) -> Decision:
        trivial = self.instance('trivial: x |- y', [X], Y)
        if trivial.valid:
            return self.decide_trivial()
        if not is_graph_based(self.sig):
            return self.decide_not_graph_based()
        if not self.sig.unary_operations:
            return self.decide_constants_only()
        return self.decide_unary()

    # ============ TRIVIAL ============

    def decide_trivial(self) -> Decision:
        inconsistent = self.instance('trivial: {} |- x', [], X)
        if inconsistent.valid:
            return self.yes('trivial-inconsistent', construct_tau_trivial(self.M))
        rich = len(self.sig.constants) >= 2 or bool(self.sig.operations)
        self.note('trivial: two constants or a connective', rich)
        if rich:
            return self.yes('trivial-almost', construct_tau_trivial(self.M))
        refutation = Refutation('almost inconsistent logic over at most one constant and no connective',
                                [RuleInstance('trivial: x |- y', (X,), Y, True), inconsistent])
        return self.no('trivial-almost', refutation)

    # ============ NOT GRAPH-BASED ============

    def decide_not_graph_based(self) -> Decision:
        try:
            pair = find_equivalent_pair(self.M)
        except BoundExceededError:
            self.note('equivalent pair', False, 'search bound exceeded')
            raise
        if pair is None:
            raise WitnessError("Unary formulas of a non-graph-based signature ran out without a collision")
        phi, psi = pair
        self.note('equivalent pair', True, f"{to_text(phi)} = {to_text(psi)}")
        return self.yes('non-graph-based', construct_tau_sufficient(self.M, phi, psi))

    # ============ CONSTANTS ONLY ============

    def decide_constants_only(self) -> Decision:
        constants = [const(c) for c in self.sig.constants]
        failures: List[RuleInstance] = []

        for i, c in enumerate(constants):
            inst = self.instance(f"constants (i): {{}} |- {c.head}", [], c)
            if inst.valid:
                witness = construct_tau_graph_based(self.sig, 'assertional', psi = c)
                return self.yes('constants-only(i)', witness)
            failures.append(inst)

        entails = []
        for i, c in enumerate(constants):
            inst = self.instance(f"constants: x |- {c.head}", [X], c)
            if inst.valid:
                entails.append(i)
            else:
                failures.append(inst)
        if len(entails) >= 2:
            i, j = entails[:2]
            witness = construct_tau_graph_based(self.sig, 'constants', i = i, j = j, psi = constants[i])
            return self.yes('constants-only(ii)', witness)

        if entails:
            k = entails[0]
            for i, j in itertools.combinations(range(len(constants)), 2):
                forward = self.instance(f"constants (iii): {constants[i].head} |- {constants[j].head}",
                                        [constants[i]], constants[j])
                backward = self.instance(f"constants (iii): {constants[j].head} |- {constants[i].head}",
                                         [constants[j]], constants[i])
                if forward.valid and backward.valid:
                    witness = construct_tau_graph_based(self.sig, 'constants', i = i, j = j, psi = constants[k])
                    return self.yes('constants-only(iii)', witness)
                failures.extend(inst for inst in (forward, backward) if not inst.valid)

        refutation = Refutation('constants only: no theorem constant, no two constants c_i, c_j with '
                                'x |- c_i and x |- c_j, no interderivable pair with some x |- c_k', failures)
        return self.no('constants-only', refutation)

    # ============ UNARY ============

    def decide_unary(self) -> Decision:
        box = self.sig.unary_operations[0]
        m, n = box_periodicity(self.M.algebras, box)
        self.note('box periodicity', True, f"m = {m}, n = {n}")

        unital = check_rule_family(self.M, RuleFamilySpec('U', m = m, n = n))
        self.note('U rules x, y, box^t x |- box^t y', unital.holds)
        if not unital.holds:
            return self.no('graph-based-unary', Refutation('unital rules x, y, box^t x |- box^t y fail',
                                                           [unital.failing]))

        failures: List[RuleInstance] = []
        x_box = self.instance('(i) x |- box x', [X], iterate(box, X, 1))
        if x_box.valid:
            return self.yes('graph-based-unary(i)', construct_tau_graph_based(self.sig, 'x-box'))
        failures.append(x_box)

        atoms = [X] + [const(c) for c in self.sig.constants]
        for t in range(n + 1):
            for p in atoms:
                psi = iterate(box, p, t)
                inst = self.instance(f"(ii) y |- {to_text(psi)}", [Y], psi)
                if not inst.valid:
                    failures.append(inst)
                    continue
                theorem = self.instance(f"(ii) {{}} |- {to_text(psi)}", [], psi)
                if theorem.valid:
                    witness = construct_tau_graph_based(self.sig, 'assertional', psi = psi)
                else:
                    witness = construct_tau_graph_based(self.sig, 'periodic', m = m, n = n, psi = psi)
                return self.yes('graph-based-unary(ii)', witness)

        for k in range(1, n + 1):
            for i in range(len(self.sig.constants)):
                failing = self.failing_k_i(k, i, m, n)
                if failing is None:
                    witness = construct_tau_graph_based(self.sig, 'k-i', k = k, i = i)
                    return self.yes('graph-based-unary(iii)', witness)
                failures.append(failing)

        refutation = Refutation('graph-based with box: (i) x |- box x, (ii) y |- box^t p and '
                                '(iii) S, R, I for some k <= n all fail', failures)
        return self.no('graph-based-unary', refutation)

    def failing_k_i(self, k: int, i: int, m: int, n: int) -> Optional[RuleInstance]:
        for family in ('S', 'R', 'I'):
            check = check_rule_family(self.M, RuleFamilySpec(family, k = k, i = i, m = m, n = n), self.exhaustive_ri)
            self.note(f"(iii) {family} k={k} i={i}", check.holds, f"{check.checked} instances")
            if not check.holds:
                return check.failing
        return None


def decide_matrices(M: MatrixFamily, exhaustive_ri: Optional[bool] = None) -> Decision:
    return MatrixDecider(M, exhaustive_ri).decide()


# ============ CROSS CHECKS ============

@dataclass
class CrossCheckReport:
    check: str
    status: str                 # 'agree', 'disagree', 'not-certified' or 'skipped'
    detail: dict = field(default_factory = dict)

    def to_dict(self) -> dict:
        return {'check': self.check, 'status': self.status, 'detail': self.detail}


def _cross_check_pool(M: MatrixFamily) -> List[Formula]:
    pool = FormulaPool(depth = DECIDE_CONFIG['cross_check_depth'], variables = 2, premises_max = 0,
                       max_formulas = DECIDE_CONFIG['cross_check_max_formulas'])
    return pool.formulas(M.sig)


def cross_check_protoalgebraic(M: MatrixFamily, decision: Optional[Decision] = None,
                               delta_pool: Optional[Sequence[Formula]] = None) -> CrossCheckReport:
    """
    Nontrivial protoalgebraic logics have an algebraic semantics iff two distinct formulas are equivalent
    """
    if is_trivial(M):
        return CrossCheckReport('protoalgebraic', 'skipped', {'reason': 'trivial logic'})
    pool = _cross_check_pool(M) if delta_pool is None else list(delta_pool)
    delta = [d for d in pool if variables_of([d]) == ['x', 'y'] and consequence(M, [], replace_variable(d, 'y', X))]
    if not delta or not consequence(M, [X] + delta, Y):
        return CrossCheckReport('protoalgebraic', 'not-certified', {'pool_size': len(pool)})
    decision = decision or decide_matrices(M)
    pair = find_equivalent_pair(M)
    agree = (decision.answer == 'yes') == (pair is not None)
    detail = {'delta': [to_text(d) for d in delta[:5]], 'delta_size': len(delta),
              'decision': decision.answer, 'pair': [to_text(f) for f in pair] if pair else None}
    return CrossCheckReport('protoalgebraic', 'agree' if agree else 'disagree', detail)


def _assertional_candidates(M: MatrixFamily) -> List[Formula]:
    sig = M.sig
    atoms = [X] + [const(c) for c in sig.constants]
    if not sig.unary_operations:
        return atoms
    box = sig.unary_operations[0]
    _, n = box_periodicity(M.algebras, box)
    return [iterate(box, p, t) for t in range(n + 1) for p in atoms]


def cross_check_with_thms(M: MatrixFamily, decision: Optional[Decision] = None) -> CrossCheckReport:
    """
    Nontrivial logics with a theorem in some variable: graph-based ones need assertionality,
    the others a nontrivial valid equation in x
    """
    if is_trivial(M):
        return CrossCheckReport('with-theorems', 'skipped', {'reason': 'trivial logic'})
    theorem = find_theorem(M, _cross_check_pool(M))
    if theorem is None:
        return CrossCheckReport('with-theorems', 'skipped', {'reason': 'no theorem with variables in the pool'})
    decision = decision or decide_matrices(M)
    if is_graph_based(M.sig):
        psi = assertional_formula(M, _assertional_candidates(M))
        expected = unital_reduced(M) and psi is not None
        detail = {'theorem': to_text(theorem), 'assertional': expected,
                  'psi': to_text(psi) if psi is not None else None}
    else:
        pair = find_equivalent_pair(M)
        expected = pair is not None
        detail = {'theorem': to_text(theorem), 'pair': [to_text(f) for f in pair] if pair else None}
    detail['decision'] = decision.answer
    agree = expected == (decision.answer == 'yes')
    return CrossCheckReport('with-theorems', 'agree' if agree else 'disagree', detail)

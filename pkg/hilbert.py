import logging
import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from config import DECIDE_CONFIG, HILBERT_BUDGET
from decide import Decision, decide_matrices
from equational_semantics import Witness
from finite_algebra import BoundExceededError, enumerate_algebras, graph_algebra_code
from matrix_logic import Matrix, MatrixFamily, Rule, consequence, validates_rule
from terms import (X, Equation, Formula, ParseError, Signature, Substitution, apply_substitution,
                   check_formula, formula_key, is_graph_based, iterate, match, parse_formula, subformulas,
                   to_text, variables)


logger = logging.getLogger(__name__)


# ============ CALCULI ============

def split_top_level(text: str) -> List[str]:
    parts, depth, current = [], 0, []
    for char in text:
        if char == ',' and depth == 0:
            parts.append(''.join(current))
            current = []
            continue
        depth += (char == '(') - (char == ')')
        current.append(char)
    parts.append(''.join(current))
    return [p for p in parts if p.strip()]


def parse_rule(text: str, sig: Signature) -> Rule:
    """
    'p1, p2 |> c'; an empty left side is an axiom
    """
    if '|>' not in text:
        raise ParseError(f"Rule must contain '|>': {text!r}")
    left, right = text.split('|>', 1)
    premises = tuple(parse_formula(p, sig) for p in split_top_level(left))
    return Rule(premises, parse_formula(right, sig))


class HilbertCalculus:
    """
    Finite set of finite rules over a signature
    """

    def __init__(self, sig: Signature, rules: Sequence[Rule]):
        self.sig = sig
        self.rules = list(rules)
        for rule in self.rules:
            for f in rule.formulas():
                check_formula(f, sig)

    def __len__(self):
        return len(self.rules)

    @classmethod
    def from_dict(cls, sig: Signature, data: Iterable) -> 'HilbertCalculus':
        rules = []
        for entry in data:
            if isinstance(entry, str):
                rules.append(parse_rule(entry, sig))
            else:
                premises = tuple(parse_formula(p, sig) for p in entry.get('premises', []))
                rules.append(Rule(premises, parse_formula(entry['conclusion'], sig)))
        return cls(sig, rules)

    def to_list(self) -> List[str]:
        return [str(rule) for rule in self.rules]


@dataclass(frozen = True)
class Budget:
    max_depth: int = HILBERT_BUDGET['max_depth']
    max_vars: int = HILBERT_BUDGET['max_vars']
    max_derived: int = HILBERT_BUDGET['max_derived']
    max_iterations: int = HILBERT_BUDGET['max_iterations']

    def __post_init__(self):
        for name in ('max_depth', 'max_vars', 'max_derived', 'max_iterations'):
            if getattr(self, name) < 1:
                raise ValueError(f"Budget field {name} must be positive")


# ============ PROOFS ============

@dataclass(frozen = True)
class Justification:
    kind: str                                   # 'hypothesis' or 'rule'
    rule: Optional[int] = None
    substitution: Optional[Substitution] = None
    premises: Tuple[Formula, ...] = ()


@dataclass
class ProofLine:
    formula: Formula
    kind: str
    rule: Optional[int] = None
    substitution: Optional[Substitution] = None
    premise_lines: Tuple[int, ...] = ()

    def to_dict(self) -> dict:
        data = {'formula': to_text(self.formula), 'justification': self.kind}
        if self.kind == 'rule':
            data['rule'] = self.rule
            data['substitution'] = self.substitution.to_dict()
            data['premise_lines'] = list(self.premise_lines)
        return data


@dataclass
class Proof:
    lines: List[ProofLine] = field(default_factory = list)

    @property
    def conclusion(self) -> Optional[Formula]:
        return self.lines[-1].formula if self.lines else None

    def __len__(self):
        return len(self.lines)

    def to_dict(self) -> dict:
        return {'lines': [line.to_dict() for line in self.lines]}

    def rules_used(self) -> List[Optional[int]]:
        return [line.rule for line in self.lines]


def check_proof(H: HilbertCalculus, premises: Iterable[Formula], proof: Proof) -> bool:
    """
    Line-by-line audit: hypotheses are premises, rule lines instantiate the cited rule
    from earlier lines
    """
    premises = set(premises)
    for index, line in enumerate(proof.lines):
        if line.kind == 'hypothesis':
            if line.formula not in premises:
                logger.debug(f"Line {index}: {to_text(line.formula)} is not a hypothesis")
                return False
            continue
        if line.kind != 'rule' or line.rule is None or not 0 <= line.rule < len(H.rules):
            return False
        rule = H.rules[line.rule]
        if any(not 0 <= p < index for p in line.premise_lines):
            return False
        cited = [proof.lines[p].formula for p in line.premise_lines]
        instantiated = [apply_substitution(line.substitution, p) for p in rule.premises]
        if sorted(cited, key = formula_key) != sorted(instantiated, key = formula_key):
            logger.debug(f"Line {index}: premises do not instantiate rule {line.rule}")
            return False
        if apply_substitution(line.substitution, rule.conclusion) != line.formula:
            logger.debug(f"Line {index}: conclusion does not instantiate rule {line.rule}")
            return False
    return True


# ============ SATURATION ============

@dataclass
class Saturation:
    derived: Dict[Formula, Justification]
    order: List[Formula]
    status: str                                 # 'goal', 'saturated' or 'budget'
    iterations: int = 0

    def proof_of(self, goal: Formula) -> Proof:
        lines: List[ProofLine] = []
        numbering: Dict[Formula, int] = {}

        def emit(f: Formula) -> int:
            if f in numbering:
                return numbering[f]
            stack = [(f, False)]
            while stack:
                g, expanded = stack.pop()
                if g in numbering:
                    continue
                just = self.derived[g]
                if not expanded and just.kind == 'rule':
                    stack.append((g, True))
                    stack.extend((p, False) for p in reversed(just.premises) if p not in numbering)
                    continue
                numbering[g] = len(lines)
                if just.kind == 'hypothesis':
                    lines.append(ProofLine(g, 'hypothesis'))
                else:
                    lines.append(ProofLine(g, 'rule', just.rule, just.substitution,
                                           tuple(numbering[p] for p in just.premises)))
            return numbering[f]

        emit(goal)
        return Proof(lines)


def _variable_depths(f: Formula) -> Dict[str, int]:
    """
    Deepest position of each variable in f
    """
    depths: Dict[str, int] = {}
    stack = [(f, 0)]
    while stack:
        g, d = stack.pop()
        if g.is_variable:
            depths[g.head] = max(depths.get(g.head, 0), d)
        stack.extend((a, d + 1) for a in g.args)
    return depths


def _rule_pool(formulas: Iterable[Formula]) -> List[Formula]:
    pool = set()
    for f in formulas:
        pool.update(subformulas(f))
    return sorted(pool, key = formula_key)


class Saturator:
    """
    Round-based forward chaining; free rule variables range over a fixed instance pool
    """

    def __init__(self, H: HilbertCalculus, budget: Optional[Budget] = None,
                 instance_pool: Optional[Sequence[Formula]] = None):
        self.H = H
        self.budget = budget or Budget()
        self.instance_pool = list(instance_pool or [])
        self.logger = logging.getLogger(__name__)
        self.orders = [sorted(range(len(rule.premises)), key = lambda j, r = rule: -r.premises[j].size)
                       for rule in H.rules]
        self.depths = [_variable_depths(rule.conclusion) for rule in H.rules]

    def admissible(self, f: Formula) -> bool:
        return f.depth <= self.budget.max_depth and len(variables(f)) <= self.budget.max_vars

    def fits(self, index: int, binding: Dict[str, Formula]) -> bool:
        depths = self.depths[index]
        return all(depths[name] + f.depth <= self.budget.max_depth for name, f in binding.items() if name in depths)

    def instances(self, index: int, derived: Dict[Formula, Justification],
                  snapshot: List[Formula]) -> Iterable[Tuple[Formula, Substitution, Tuple[Formula, ...]]]:
        rule = self.H.rules[index]
        order = self.orders[index]

        def extend(position, binding, used):
            if position == len(order):
                yield from self.close(index, binding, used)
                return
            pattern = rule.premises[order[position]]
            if variables(pattern) <= set(binding):
                f = apply_substitution(Substitution(binding), pattern)
                if f in derived:
                    yield from extend(position + 1, binding, used + ((order[position], f),))
                return
            for f in snapshot:
                extended = match(pattern, f, binding)
                if extended is not None and self.fits(index, extended):
                    yield from extend(position + 1, extended, used + ((order[position], f),))

        for conclusion, binding, used in extend(0, {}, ()):
            premises = tuple(f for _, f in sorted(used))
            yield conclusion, binding, premises

    def close(self, index: int, binding: Dict[str, Formula], used):
        rule = self.H.rules[index]
        free = sorted(variables(rule.conclusion) - set(binding))
        if not free:
            s = Substitution(binding)
            yield apply_substitution(s, rule.conclusion), s, used
            return
        depths = self.depths[index]
        pools = [[f for f in self.instance_pool if depths.get(name, 0) + f.depth <= self.budget.max_depth]
                 for name in free]
        for values in itertools.product(*pools):
            extended = dict(binding)
            extended.update(zip(free, values))
            s = Substitution(extended)
            yield apply_substitution(s, rule.conclusion), s, used

    def run(self, premises: Iterable[Formula], goal: Optional[Formula] = None) -> Saturation:
        derived: Dict[Formula, Justification] = {}
        order: List[Formula] = []
        for p in premises:
            if p not in derived:
                derived[p] = Justification('hypothesis')
                order.append(p)
        if goal is not None and goal in derived:
            return Saturation(derived, order, 'goal', 0)

        for iteration in range(1, self.budget.max_iterations + 1):
            snapshot = list(order)
            added = 0
            for index in range(len(self.H.rules)):
                for conclusion, s, used in self.instances(index, derived, snapshot):
                    if conclusion in derived or not self.admissible(conclusion):
                        continue
                    derived[conclusion] = Justification('rule', index, s, used)
                    order.append(conclusion)
                    added += 1
                    if goal is not None and conclusion == goal:
                        return Saturation(derived, order, 'goal', iteration)
                    if len(order) >= self.budget.max_derived:
                        self.logger.warning(f"Saturation stopped at {len(order)} derived formulas")
                        return Saturation(derived, order, 'budget', iteration)
            if not added:
                return Saturation(derived, order, 'saturated', iteration)
        return Saturation(derived, order, 'budget', self.budget.max_iterations)


def saturate(H: HilbertCalculus, premises: Iterable[Formula], budget: Optional[Budget] = None,
             instance_pool: Optional[Sequence[Formula]] = None, goal: Optional[Formula] = None) -> Saturation:
    premises = list(premises)
    if instance_pool is None:
        targets = premises + ([goal] if goal is not None else [])
        instance_pool = _rule_pool(targets) or [X]
    return Saturator(H, budget, instance_pool).run(premises, goal)


@dataclass
class DerivationResult:
    status: str                                 # 'derived' or 'unknown'
    proof: Optional[Proof] = None

    @property
    def derived(self) -> bool:
        return self.status == 'derived'

    def to_dict(self) -> dict:
        data = {'status': self.status}
        if self.proof is not None:
            data['proof'] = self.proof.to_dict()
        return data


def derives_bounded(H: HilbertCalculus, premises: Iterable[Formula], goal: Formula,
                    budget: Optional[Budget] = None) -> DerivationResult:
    premises = list(premises)
    budget = budget or Budget()
    if goal.depth > budget.max_depth or len(variables(goal)) > budget.max_vars:
        return DerivationResult('unknown')
    result = saturate(H, premises, budget, goal = goal)
    if result.status != 'goal':
        return DerivationResult('unknown')
    proof = result.proof_of(goal)
    if not check_proof(H, premises, proof):
        logger.error(f"Reconstructed proof of {to_text(goal)} failed the audit")
        return DerivationResult('unknown')
    return DerivationResult('derived', proof)


def calculus_from_matrices(M: MatrixFamily, formulas: Sequence[Formula], premises_max: int = 2) -> HilbertCalculus:
    """
    Rules {gamma |> phi : gamma |-_M phi, |gamma| <= premises_max} over a formula pool
    """
    rules = []
    for r in range(premises_max + 1):
        for gamma in itertools.combinations(formulas, r):
            for phi in formulas:
                if phi in gamma:
                    continue
                if consequence(M, gamma, phi):
                    rules.append(Rule(tuple(gamma), phi))
    logger.info(f"Built calculus with {len(rules)} rules from {len(formulas)} pool formulas")
    return HilbertCalculus(M.sig, rules)


# ============ LOCALLY TABULAR DECISION ============

def find_box_periodicity_hilbert(H: HilbertCalculus, budget: Optional[Budget] = None,
                                 limit: Optional[int] = None) -> Optional[Tuple[int, int]]:
    """
    First (m, n), m <= n, by increasing m + n with box^m x -||- box^(n+1) x within budget
    """
    sig = H.sig
    if not is_graph_based(sig) or not sig.unary_operations:
        raise ValueError("Box periodicity search needs a graph-based signature with a unary connective")
    box = sig.unary_operations[0]
    limit = DECIDE_CONFIG['periodicity_search_limit'] if limit is None else limit
    for total in range(0, 2 * limit + 1):
        for m in range(0, total // 2 + 1):
            n = total - m
            if n > limit:
                continue
            low, high = iterate(box, X, m), iterate(box, X, n + 1)
            if derives_bounded(H, [low], high, budget).derived and derives_bounded(H, [high], low, budget).derived:
                logger.info(f"Found box periodicity m = {m}, n = {n}")
                return m, n
    return None


@dataclass
class LocallyTabularResult:
    status: str                                 # 'decided', 'budget-exceeded' or 'rule-violation'
    decision: Optional[Decision] = None
    family: Optional[MatrixFamily] = None
    detail: dict = field(default_factory = dict)

    def to_dict(self) -> dict:
        data = {'status': self.status, 'detail': self.detail}
        if self.decision is not None:
            data['decision'] = self.decision.to_dict()
        if self.family is not None:
            data['family_size'] = len(self.family)
        return data


def matrices_of_calculus(H: HilbertCalculus, generators: int, eqs: Sequence[Equation]) -> MatrixFamily:
    """
    Every <A, F> with A k-generated satisfying eqs whose logic validates all rules of H, up to isomorphism
    """
    kept: List[Matrix] = []
    seen = set()
    for A in enumerate_algebras(H.sig, generators, eqs):
        for r in range(A.size + 1):
            for F in itertools.combinations(A.universe, r):
                code = graph_algebra_code(A, F)
                if code in seen:
                    continue
                seen.add(code)
                m = Matrix(A, frozenset(F))
                if all(validates_rule(m, rule) for rule in H.rules):
                    kept.append(m)
    logger.info(f"Kept {len(kept)} matrices validating the {len(H.rules)} rules")
    return MatrixFamily(kept, H.sig)


def decide_locally_tabular(H: HilbertCalculus, budget: Optional[Budget] = None,
                           exhaustive_ri: Optional[bool] = None) -> LocallyTabularResult:
    """
    Caller promises local tabularity; budget exhaustion is reported, never guessed
    """
    sig = H.sig
    if not is_graph_based(sig):
        witness = Witness(None, 'existence', {'reason': 'not graph-based and locally tabular'})
        decision = Decision('yes', 'non-graph-based', witness)
        return LocallyTabularResult('decided', decision)

    if sig.unary_operations:
        period = find_box_periodicity_hilbert(H, budget)
        if period is None:
            return LocallyTabularResult('budget-exceeded', detail = {'reason': 'no box periodicity within budget'})
        m, n = period
        box = sig.unary_operations[0]
        eqs = [Equation(iterate(box, X, m), iterate(box, X, n + 1))]
    else:
        m, n = 0, 0
        eqs = []
    generators = 2 ** (n + 1) + 1

    try:
        family = matrices_of_calculus(H, generators, eqs)
    except BoundExceededError as e:
        logger.warning(f"Matrix construction exceeded its bound: {e}")
        return LocallyTabularResult('budget-exceeded', detail = {'reason': str(e), 'm': m, 'n': n})

    for index, matrix in enumerate(family):
        for rule in H.rules:
            if not validates_rule(matrix, rule):
                logger.error(f"Constructed matrix {index} fails rule {rule}")
                return LocallyTabularResult('rule-violation', family = family,
                                            detail = {'matrix': index, 'rule': str(rule)})
    decision = decide_matrices(family, exhaustive_ri)
    return LocallyTabularResult('decided', decision, family,
                                {'m': m, 'n': n, 'generators': generators, 'matrices': len(family)})

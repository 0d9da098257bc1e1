import heapq
import logging
import itertools
from collections import deque
from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from config import BOUNDS, POOL_DEFAULTS, SUSZKO_POOL, THETA_CONFIG
from finite_algebra import BoundExceededError, Evaluator, FiniteAlgebra
from matrix_logic import (Matrix, MatrixFamily, consequence, find_counter_valuation, is_inconsistent,
                          logically_equivalent, reduced_family)
from terms import (APP, CONST, X, Equation, Formula, Signature, app, box_diamond_from_nary,
                   box_exponent, canonical_variables, const, enumerate_formulas, formula_key,
                   is_graph_based, iterate, parse_equations, replace_variable, subformula_tree,
                   subformulas, to_text, variables, variables_of)


logger = logging.getLogger(__name__)


class QueryShapeError(ValueError):
    pass


class WitnessError(ValueError):
    pass


# ============ TAU SETS ============

@dataclass(frozen = True)
class TauSet:
    equations: Tuple[Equation, ...] = ()

    def __post_init__(self):
        equations = tuple(self.equations)
        for eq in equations:
            if not eq.variables() <= {'x'}:
                raise WitnessError(f"Equation {eq} uses variables other than x")
        object.__setattr__(self, 'equations', equations)

    @classmethod
    def parse(cls, text: str, sig: Signature) -> 'TauSet':
        return cls(tuple(parse_equations(text, sig)))

    def __iter__(self):
        return iter(self.equations)

    def __len__(self):
        return len(self.equations)

    def __str__(self):
        return '; '.join(str(eq) for eq in self.equations) or '{}'

    def instantiate(self, f: Formula) -> List[Equation]:
        """
        tau(f): every equation with x replaced by f
        """
        return [Equation(replace_variable(eq.lhs, 'x', f), replace_variable(eq.rhs, 'x', f))
                for eq in self.equations]

    def to_list(self):
        return [str(eq) for eq in self.equations]


@dataclass(frozen = True)
class ThetaQuery:
    gamma: Tuple[Formula, ...]
    tau: TauSet
    target: Equation

    def generators(self) -> List[Tuple[Formula, Formula]]:
        pairs = []
        for g in self.gamma:
            for eq in self.tau.instantiate(g):
                pairs.append((eq.lhs, eq.rhs))
        return pairs


WITNESS_KINDS = {
    'standard-check': set(),
    'trivial-inconsistent': set(),
    'trivial-almost': {'source'},
    'assertional': {'psi'},
    'almost-assertional': {'psi'},
    'equivalent-pair-construction': {'phi', 'psi', 'k'},
    'graph-based-k-i': {'k', 'i'},
    'graph-based-x-box': set(),
    'existence': {'reason'},
}


@dataclass
class Witness:
    tau: Optional[TauSet]
    kind: str
    evidence: dict = field(default_factory = dict)

    def __post_init__(self):
        if self.kind not in WITNESS_KINDS:
            raise WitnessError(f"Unknown witness kind {self.kind!r}")
        missing = WITNESS_KINDS[self.kind] - set(self.evidence)
        if missing:
            raise WitnessError(f"Witness of kind {self.kind} lacks evidence {sorted(missing)}")
        if self.tau is None and self.kind != 'existence':
            raise WitnessError(f"Witness of kind {self.kind} needs a tau set")

    def to_dict(self):
        data = {'kind': self.kind, 'evidence': self.evidence}
        if self.tau is not None:
            data['tau'] = self.tau.to_list()
            data['tau_size'] = sum(eq.lhs.size + eq.rhs.size for eq in self.tau)
        return data


@dataclass(frozen = True)
class FormulaPool:
    """
    First max_formulas formulas of depth <= depth over the first `variables` canonical
    variables, in (size, printed) order; premise sets have at most premises_max members
    """
    depth: int = POOL_DEFAULTS['depth']
    variables: int = POOL_DEFAULTS['variables']
    premises_max: int = POOL_DEFAULTS['premises_max']
    max_formulas: Optional[int] = POOL_DEFAULTS['max_formulas']

    def formulas(self, sig: Signature) -> List[Formula]:
        return enumerate_formulas(sig, canonical_variables(self.variables), self.depth, self.max_formulas)

    def premise_sets(self, sig: Signature) -> List[Tuple[Formula, ...]]:
        pool = self.formulas(sig)
        sets = []
        for r in range(self.premises_max + 1):
            sets.extend(itertools.combinations(pool, r))
        return sets

    def describe(self):
        return {'depth': self.depth, 'variables': self.variables,
                'premises_max': self.premises_max, 'max_formulas': self.max_formulas}


# ============ SOLUTIONS AND EQUATIONAL CONSEQUENCE ============

def tau_solutions(A: FiniteAlgebra, tau: TauSet) -> frozenset:
    ev = Evaluator(A, ['x'])
    holds = np.ones(A.size, dtype = bool)
    for eq in tau:
        holds &= ev(eq.lhs) == ev(eq.rhs)
    return frozenset(int(e) for e in np.flatnonzero(holds))


def equational_consequence(K: Sequence[FiniteAlgebra], theta: Iterable[Equation], goal: Equation) -> bool:
    theta = list(theta)
    if goal in theta or goal.is_trivial():
        return True
    names = variables_of([f for eq in theta + [goal] for f in (eq.lhs, eq.rhs)])
    for A in K:
        ev = Evaluator(A, names)
        holds = np.ones(ev.rows, dtype = bool)
        for eq in theta:
            holds &= ev(eq.lhs) == ev(eq.rhs)
        if (holds & (ev(goal.lhs) != ev(goal.rhs))).any():
            return False
    return True


# ============ THETA MEMBERSHIP ============

@dataclass
class MembershipResult:
    status: str                 # 'member', 'non-member' or 'unknown'
    method: str
    chain: Optional[List[Formula]] = None

    @property
    def is_member(self):
        return self.status == 'member'

    def to_dict(self):
        data = {'status': self.status, 'method': self.method}
        if self.chain is not None:
            data['chain'] = [to_text(f) for f in self.chain]
        return data


def graph_tau_shape(tau: TauSet, sig: Signature) -> Optional[Tuple[str, int, str, int]]:
    """
    (box, k, c_i, n) when tau = {box^k x ~ box^n c_i} with n < k, else None
    """
    if not is_graph_based(sig) or len(tau) != 1 or not sig.unary_operations:
        return None
    box = sig.unary_operations[0]
    eq = tau.equations[0]
    for lhs, rhs in ((eq.lhs, eq.rhs), (eq.rhs, eq.lhs)):
        k, p = box_exponent(lhs, box)
        n, c = box_exponent(rhs, box)
        if p == X and c.kind == CONST and n < k:
            return box, k, c.head, n
    return None


def theta_member_graph_based(q: ThetaQuery, sig: Signature) -> bool:
    """
    Exact membership for tau = {box^k x ~ box^n c_i}: a term box^j q with q != c_i joins the
    c_i-chain at height j - k - t + n when box^t q is in gamma and t <= j - k; on the c_i-chain
    above n, heights are identified modulo d, the gcd of all same-atom differences in gamma
    and all offsets k + w - n for box^w c_i in gamma
    """
    shape = graph_tau_shape(q.tau, sig)
    if shape is None:
        raise QueryShapeError("theta_member_graph_based needs tau = {box^k x ~ box^n c} with n < k")
    box, k, constant, n = shape
    split = [box_exponent(g, box) for g in q.gamma]
    for f in list(q.gamma) + [q.target.lhs, q.target.rhs]:
        _, atom = box_exponent(f, box)
        if atom.kind == APP:
            raise QueryShapeError(f"Formula {to_text(f)} is not of the form box^j p")

    heights = {}
    for t, atom in split:
        heights.setdefault(atom, []).append(t)
    d = 0
    for atom, hs in heights.items():
        hs = sorted(set(hs))
        for u, v in zip(hs, hs[1:]):
            d = gcd(d, v - u)
        if atom == const(constant):
            for w in hs:
                d = gcd(d, k + w - n)

    def chain_heights(f):
        """
        Heights on the c_i-chain, at or above n, that f is identified with by one generator
        """
        j, atom = box_exponent(f, box)
        if atom == const(constant):
            return [j] if j >= n else []
        return [j - k - t + n for t in heights.get(atom, []) if t <= j - k]

    lhs, rhs = q.target.lhs, q.target.rhs
    if lhs == rhs:
        return True
    left, right = chain_heights(lhs), chain_heights(rhs)
    for a in left:
        for b in right:
            if (d == 0 and a == b) or (d and (a - b) % d == 0):
                return True
    return False


def theta_member_closure(q: ThetaQuery) -> bool:
    """
    Ground congruence closure over the subterms of the generators and the target
    """
    pairs = q.generators()
    roots = [f for pair in pairs for f in pair] + [q.target.lhs, q.target.rhs]
    ids = {}
    terms = []
    for root in roots:
        for g in subformulas(root):
            if g not in ids:
                ids[g] = len(terms)
                terms.append(g)

    parent = list(range(len(terms)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for l, r in pairs:
        parent[find(ids[l])] = find(ids[r])

    applications = [(i, g) for i, g in enumerate(terms) if g.kind == APP]
    changed = True
    while changed:
        changed = False
        signatures = {}
        for i, g in applications:
            key = (g.head, tuple(find(ids[a]) for a in g.args))
            other = signatures.get(key)
            if other is None:
                signatures[key] = i
            elif find(other) != find(i):
                parent[find(i)] = find(other)
                changed = True
    return find(ids[q.target.lhs]) == find(ids[q.target.rhs])


def _rewrites(f, rules):
    """
    Every term obtained from f by replacing one subterm occurrence along a generator pair
    """
    for replacement in rules.get(f, ()):
        yield replacement
    if f.kind == APP:
        for position, arg in enumerate(f.args):
            for new_arg in _rewrites(arg, rules):
                args = list(f.args)
                args[position] = new_arg
                yield app(f.head, *args)


def theta_member_bounded(q: ThetaQuery, chain_bound: Optional[int] = None,
                         state_budget: Optional[int] = None) -> MembershipResult:
    """
    Breadth-first search for a Maltsev chain of single-position rewrites
    """
    chain_bound = THETA_CONFIG['chain_bound'] if chain_bound is None else chain_bound
    state_budget = state_budget or THETA_CONFIG['state_budget']
    lhs, rhs = q.target.lhs, q.target.rhs
    if lhs == rhs:
        return MembershipResult('member', 'chain', [lhs])

    rules = {}
    for a, b in q.generators():
        if a != b:
            rules.setdefault(a, []).append(b)
            rules.setdefault(b, []).append(a)
    largest = max([lhs.size, rhs.size] + [f.size for f in rules])
    size_cap = THETA_CONFIG['size_slack'] * largest

    parents = {lhs: None}
    frontier = deque([(lhs, 0)])
    while frontier:
        f, steps = frontier.popleft()
        if steps >= chain_bound:
            continue
        for g in _rewrites(f, rules):
            if g in parents or g.size > size_cap:
                continue
            parents[g] = f
            if g == rhs:
                chain = [g]
                while parents[chain[-1]] is not None:
                    chain.append(parents[chain[-1]])
                return MembershipResult('member', 'chain', list(reversed(chain)))
            if len(parents) > state_budget:
                logger.warning(f"Chain search state budget {state_budget} exhausted")
                return MembershipResult('unknown', 'chain')
            frontier.append((g, steps + 1))
    return MembershipResult('unknown', 'chain')


def theta_member(q: ThetaQuery, sig: Signature, method: Optional[str] = None,
                 chain_bound: Optional[int] = None) -> MembershipResult:
    """
    tau-graph shapes use the gcd criterion; otherwise congruence closure, or the bounded chain search
    """
    method = method or THETA_CONFIG['method']
    if method == 'bounded':
        return theta_member_bounded(q, chain_bound)
    if graph_tau_shape(q.tau, sig) is not None:
        try:
            member = theta_member_graph_based(q, sig)
            return MembershipResult('member' if member else 'non-member', 'gcd')
        except QueryShapeError:
            pass
    member = theta_member_closure(q)
    return MembershipResult('member' if member else 'non-member', 'closure')


def tau_in_theta(gamma: Sequence[Formula], tau: TauSet, phi: Formula, sig: Signature,
                 method: Optional[str] = None, chain_bound: Optional[int] = None) -> MembershipResult:
    """
    tau(phi) inside theta(gamma, tau): every instantiated equation must be a member
    """
    result = MembershipResult('member', method or THETA_CONFIG['method'])
    for eq in tau.instantiate(phi):
        single = theta_member(ThetaQuery(tuple(gamma), tau, eq), sig, method, chain_bound)
        if single.status == 'non-member':
            return single
        if single.status == 'unknown':
            result = single
    return result


# ============ VERIFICATION ============

@dataclass
class VerificationReport:
    passed: bool
    semantics: str
    pool: dict
    checked: int = 0
    derivable: int = 0
    counterexamples: List[dict] = field(default_factory = list)
    unknowns: List[dict] = field(default_factory = list)
    spot_checks: int = 0
    spot_check_failures: List[dict] = field(default_factory = list)
    note: str = 'finite pool only; infinite premise sets are not covered'

    def to_dict(self):
        return {
            'passed': self.passed,
            'semantics': self.semantics,
            'pool': self.pool,
            'checked': self.checked,
            'derivable': self.derivable,
            'counterexamples': self.counterexamples,
            'unknowns': self.unknowns,
            'spot_checks': self.spot_checks,
            'spot_check_failures': self.spot_check_failures,
            'note': self.note,
        }


def _instance(gamma, phi):
    return {'premises': [to_text(g) for g in gamma], 'conclusion': to_text(phi)}


def verify_algebraic_semantics_bounded(M: MatrixFamily, tau: TauSet, pool: Optional[FormulaPool] = None,
                                       semantics: str = 'syntactic', method: Optional[str] = None,
                                       chain_bound: Optional[int] = None,
                                       max_counterexamples: int = 20) -> VerificationReport:
    """
    syntactic: tau(phi) in theta(gamma, tau) must imply gamma |- phi on the pool;
    reducts: additionally the logic of <A, tau(A)> over the algebras of M must equal |-_M on the pool
    """
    if semantics not in ('syntactic', 'reducts'):
        raise ValueError(f"Invalid semantics mode: {semantics}")
    pool = pool or FormulaPool()
    report = VerificationReport(passed = True, semantics = semantics, pool = pool.describe())
    formulas = pool.formulas(M.sig)
    reducts = None
    if semantics == 'reducts':
        reducts = MatrixFamily([Matrix(A, tau_solutions(A, tau)) for A in M.algebras], M.sig)

    for gamma in pool.premise_sets(M.sig):
        for phi in formulas:
            report.checked += 1
            derivable = consequence(M, gamma, phi)
            if reducts is not None and consequence(reducts, gamma, phi) != derivable:
                report.passed = False
                if len(report.counterexamples) < max_counterexamples:
                    entry = _instance(gamma, phi)
                    entry['reason'] = 'tau-reduct logic differs' + (' (drops)' if derivable else ' (adds)')
                    report.counterexamples.append(entry)
            if phi in gamma:
                report.spot_checks += 1
                if not tau_in_theta(gamma, tau, phi, M.sig, method, chain_bound).is_member:
                    report.spot_check_failures.append(_instance(gamma, phi))
                    report.passed = False
            if derivable:
                report.derivable += 1
                continue
            membership = tau_in_theta(gamma, tau, phi, M.sig, method, chain_bound)
            if membership.status == 'member':
                report.passed = False
                if len(report.counterexamples) < max_counterexamples:
                    entry = _instance(gamma, phi)
                    entry['reason'] = 'tau(phi) in theta(gamma, tau) but gamma does not derive phi'
                    report.counterexamples.append(entry)
            elif membership.status == 'unknown':
                report.unknowns.append(_instance(gamma, phi))

    if report.unknowns:
        logger.warning(f"{len(report.unknowns)} theta queries stayed unknown")
    logger.info(f"Verified tau on {report.checked} pool instances: "
                f"{'pass' if report.passed else 'fail'} ({len(report.counterexamples)} counterexamples)")
    return report


def suszko_contexts(sig: Signature, depth: Optional[int] = None, max_contexts: Optional[int] = None) -> List[Formula]:
    """
    Contexts phi(v, z...) containing the hole variable v
    """
    depth = SUSZKO_POOL['depth'] if depth is None else depth
    max_contexts = max_contexts or SUSZKO_POOL['max_contexts']
    names = ['v'] + [f"z{i}" for i in range(SUSZKO_POOL['variables'])]
    contexts = []
    for f in enumerate_formulas(sig, names, depth):
        if 'v' in variables(f):
            contexts.append(f)
            if len(contexts) >= max_contexts:
                break
    return contexts


def find_suszko_failure(M: MatrixFamily, tau: TauSet, contexts: Optional[Sequence[Formula]] = None) -> Optional[dict]:
    contexts = suszko_contexts(M.sig) if contexts is None else contexts
    for position, eq in enumerate(tau):
        for context in contexts:
            with_lhs = replace_variable(context, 'v', eq.lhs)
            with_rhs = replace_variable(context, 'v', eq.rhs)
            for direction, (source, target) in enumerate(((with_lhs, with_rhs), (with_rhs, with_lhs))):
                counter = find_counter_valuation(M, [X, source], target, checked = False)
                if counter is not None:
                    index, valuation = counter
                    return {'equation': position, 'context': to_text(context),
                            'direction': 'lhs to rhs' if direction == 0 else 'rhs to lhs',
                            'matrix': index, 'valuation': valuation}
    return None


def suszko_condition(M: MatrixFamily, tau: TauSet, contexts: Optional[Sequence[Formula]] = None) -> bool:
    return find_suszko_failure(M, tau, contexts) is None


# ============ WITNESS CONSTRUCTION ============

def find_equivalent_pair(M: MatrixFamily, max_size: Optional[int] = None) -> Optional[Tuple[Formula, Formula]]:
    """
    First collision of unary term functions on M*, formulas taken in (size, printed) order.
    None only when the space of unary formulas is finite and collision-free, or when max_size cuts the search.
    Representatives are pairwise distinct term functions, so the search ends on every finite family.
    """
    max_reps = BOUNDS['equivalent_pair_max_reps']
    R = reduced_family(M)
    evaluators = R.evaluators(['x'])

    def function_of(f):
        return tuple(int(v) for ev in evaluators for v in ev(f))

    sig = M.sig
    reps = []
    seen = {}
    heap = [(formula_key(f), f) for f in [X] + [const(c) for c in sig.constants]]
    heapq.heapify(heap)
    queued = {f for _, f in heap}

    while heap:
        _, f = heapq.heappop(heap)
        if max_size is not None and f.size > max_size:
            break
        func = function_of(f)
        rep = seen.get(func)
        if rep is not None:
            if 'x' in variables(rep) or 'x' in variables(f):
                logger.debug(f"Equivalent pair found: {to_text(rep)} and {to_text(f)}")
                return rep, f
            continue
        if len(reps) >= max_reps:
            raise BoundExceededError(f"No equivalent pair among {max_reps} distinct unary term functions")
        seen[func] = f
        reps.append(f)
        newest = len(reps) - 1
        for op, arity in sig.operations:
            for args in itertools.product(range(len(reps)), repeat = arity):
                if newest in args:
                    g = app(op, *(reps[a] for a in args))
                    if g not in queued:
                        queued.add(g)
                        heapq.heappush(heap, (formula_key(g), g))
    return None


def box_and_diamond(sig: Signature) -> Tuple[Formula, Formula]:
    unary = sig.unary_operations
    if len(unary) >= 2:
        return app(unary[0], X), app(unary[1], X)
    for op, arity in sig.operations:
        if arity >= 2:
            return box_diamond_from_nary(sig, op)
    raise WitnessError("Graph-based signature has no box/diamond pair")


def construct_tau_trivial(M: MatrixFamily) -> Witness:
    """
    Trivial logics: tau = {} if inconsistent, else two constants or a connective applied twice
    """
    sig = M.sig
    if is_inconsistent(M):
        return Witness(TauSet(), 'trivial-inconsistent')
    if len(sig.constants) >= 2:
        c0, c1 = sig.constants[:2]
        tau = TauSet((Equation(const(c0), const(c1)),))
        return Witness(tau, 'trivial-almost', {'source': 'two constants', 'constants': [c0, c1]})
    if sig.operations:
        op, arity = sig.operations[0]
        flat = app(op, *([X] * arity))
        nested = app(op, *([flat] * arity))
        tau = TauSet((Equation(flat, nested),))
        return Witness(tau, 'trivial-almost', {'source': 'connective', 'connective': op})
    raise WitnessError("Almost inconsistent logic over at most one constant has no algebraic semantics")


def construct_tau_sufficient(M: MatrixFamily, phi: Formula, psi: Formula) -> Witness:
    """
    tau = {phi' ~ psi'} with phi' = box^2k diamond phi(box^k diamond x), likewise psi'
    """
    sig = M.sig
    if is_graph_based(sig):
        raise WitnessError("Sufficient construction needs a signature that is not graph-based")
    if phi == psi:
        raise WitnessError("Formulas of the pair must be distinct")
    if not variables(phi) | variables(psi) == {'x'}:
        raise WitnessError("The pair must use exactly the variable x")
    if not logically_equivalent(M, phi, psi):
        raise WitnessError(f"{to_text(phi)} and {to_text(psi)} are not logically equivalent")

    if not variables(phi):
        phi, psi = psi, phi
    if not variables(psi):
        if phi == X:
            logger.info("x is equivalent to a ground formula; the logic is trivial")
            return construct_tau_trivial(M)
        psi = replace_variable(phi, 'x', phi)

    k = 1 + max(subformula_tree(phi).branch_lengths() + subformula_tree(psi).branch_lengths())
    box, diamond = box_and_diamond(sig)

    def prime(f):
        inner = iterate_template(box, diamond, k)
        body = replace_variable(f, 'x', inner)
        return iterate_template(box, replace_variable(diamond, 'x', body), 2 * k)

    tau = TauSet((Equation(prime(phi), prime(psi)),))
    evidence = {'phi': to_text(phi), 'psi': to_text(psi), 'k': k,
                'box': to_text(box), 'diamond': to_text(diamond)}
    logger.info(f"Constructed tau from equivalent pair ({to_text(phi)}, {to_text(psi)}) with k = {k}")
    return Witness(tau, 'equivalent-pair-construction', evidence)


def iterate_template(template: Formula, f: Formula, n: int) -> Formula:
    """
    template(x) composed n times, applied to f
    """
    for _ in range(n):
        f = replace_variable(template, 'x', f)
    return f


def construct_tau_graph_based(sig: Signature, kind: str, **params) -> Witness:
    """
    x-box: {x ~ box x}; k-i: {box^k x ~ box^n c_i}; constants: {c_i ~ c_j} (+ x ~ psi);
    periodic: {box^m x ~ box^(n+1) x} (+ x ~ psi); assertional: {x ~ psi}
    """
    if not is_graph_based(sig):
        raise WitnessError("Graph-based witnesses need a graph-based signature")
    box = sig.unary_operations[0] if sig.unary_operations else None
    psi = params.get('psi')
    extra = (Equation(X, psi),) if psi is not None else ()

    if kind in ('x-box', 'k-i', 'periodic') and box is None:
        raise WitnessError(f"Witness kind {kind} needs a unary connective")
    if kind == 'x-box':
        return Witness(TauSet((Equation(X, app(box, X)),)), 'graph-based-x-box')
    if kind == 'k-i':
        k, i, n = params['k'], params['i'], params.get('n', 0)
        if not 0 <= i < len(sig.constants) or k <= n:
            raise WitnessError(f"Invalid parameters k = {k}, n = {n}, i = {i}")
        tau = TauSet((Equation(iterate(box, X, k), iterate(box, const(sig.constants[i]), n)),))
        return Witness(tau, 'graph-based-k-i', {'k': k, 'i': i, 'n': n})
    if kind == 'assertional':
        if psi is None:
            raise WitnessError("Assertional witness needs psi")
        return Witness(TauSet(extra), 'assertional', {'psi': to_text(psi)})
    if kind == 'constants':
        i, j = params['i'], params['j']
        if i == j or not (0 <= i < len(sig.constants) and 0 <= j < len(sig.constants)):
            raise WitnessError(f"Invalid constant indices {i}, {j}")
        base = Equation(const(sig.constants[i]), const(sig.constants[j]))
        if psi is None:
            return Witness(TauSet((base,)), 'trivial-almost', {'source': 'two constants',
                                                              'constants': [sig.constants[i], sig.constants[j]]})
        return Witness(TauSet((base,) + extra), 'almost-assertional', {'psi': to_text(psi), 'base': str(base)})
    if kind == 'periodic':
        m, n = params['m'], params['n']
        if not 0 <= m <= n:
            raise WitnessError(f"Invalid periodicity m = {m}, n = {n}")
        if psi is None:
            raise WitnessError("Periodic witness needs psi")
        base = Equation(iterate(box, X, m), iterate(box, X, n + 1))
        evidence = {'psi': to_text(psi), 'base': str(base), 'm': m, 'n': n}
        return Witness(TauSet((base,) + extra), 'almost-assertional', evidence)
    raise WitnessError(f"Unknown graph-based witness kind {kind!r}")

import logging
import itertools
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from config import BOUNDS
from finite_algebra import (AlgebraError, BoundExceededError, Congruence, Evaluator, FiniteAlgebra,
                            _UnionFind, all_congruences, congruence_generated, evaluate, graph_algebra_code,
                            isomorphisms, quotient, subproduct_generated, unary_polynomials)
from terms import X, Y, Formula, Signature, check_formula, is_graph_based, to_text, variables_of


logger = logging.getLogger(__name__)


# ============ MATRICES ============

@dataclass(frozen = True)
class Matrix:
    algebra: FiniteAlgebra
    designated: FrozenSet[int] = frozenset()

    def __post_init__(self):
        designated = frozenset(int(e) for e in self.designated)
        if any(not 0 <= e < self.algebra.size for e in designated):
            raise AlgebraError(f"Designated set {sorted(designated)} not inside the universe")
        object.__setattr__(self, 'designated', designated)

    @property
    def sig(self) -> Signature:
        return self.algebra.sig

    @property
    def mask(self) -> np.ndarray:
        mask = np.zeros(self.algebra.size, dtype = bool)
        mask[list(self.designated)] = True
        return mask

    def describe(self) -> dict:
        return {'algebra': self.algebra.name, 'size': self.algebra.size,
                'designated': [self.algebra.label(e) for e in sorted(self.designated)]}


class MatrixFamily:
    """
    Finite list of matrices over one signature, inducing a single consequence relation
    """

    def __init__(self, matrices: Sequence[Matrix], sig: Optional[Signature] = None):
        self.matrices = list(matrices)
        if not self.matrices and sig is None:
            raise AlgebraError("Matrix family must not be empty")
        self.sig = sig or self.matrices[0].sig
        if any(m.sig != self.sig for m in self.matrices):
            raise AlgebraError("Matrices in a family must share one signature")
        self._evaluators: Dict[Tuple[str, ...], List[Evaluator]] = {}
        self._masks = [m.mask for m in self.matrices]
        self._reduced: Optional['MatrixFamily'] = None

    def __iter__(self):
        return iter(self.matrices)

    def __len__(self):
        return len(self.matrices)

    def __getitem__(self, index):
        return self.matrices[index]

    @property
    def algebras(self) -> List[FiniteAlgebra]:
        return [m.algebra for m in self.matrices]

    def evaluators(self, variable_names: Sequence[str]) -> List[Evaluator]:
        key = tuple(variable_names)
        cached = self._evaluators.get(key)
        if cached is None:
            cached = [Evaluator(m.algebra, key) for m in self.matrices]
            self._evaluators[key] = cached
        return cached

    def masks(self) -> List[np.ndarray]:
        return self._masks


@dataclass(frozen = True)
class Rule:
    premises: Tuple[Formula, ...]
    conclusion: Formula

    def __post_init__(self):
        unique = tuple(sorted(set(self.premises)))
        object.__setattr__(self, 'premises', unique)

    def __str__(self):
        left = ', '.join(to_text(p) for p in self.premises) or '{}'
        return f"{left} |> {to_text(self.conclusion)}"

    def formulas(self) -> List[Formula]:
        return list(self.premises) + [self.conclusion]


# ============ CONSEQUENCE ============

def _check_signature(M: MatrixFamily, formulas: Iterable[Formula]) -> None:
    for f in formulas:
        try:
            check_formula(f, M.sig)
        except ValueError as e:
            raise AlgebraError(f"Formula {to_text(f)} does not fit the family signature: {e}")


def find_counter_valuation(M: MatrixFamily, premises: Iterable[Formula], conclusion: Formula,
                           checked: bool = True) -> Optional[Tuple[int, Dict[str, int]]]:
    """
    First (matrix index, valuation) that designates every premise but not the conclusion
    """
    premises = list(premises)
    if checked:
        _check_signature(M, premises + [conclusion])
    names = variables_of(premises + [conclusion])
    for index, (ev, mask) in enumerate(zip(M.evaluators(names), M.masks())):
        holds = np.ones(ev.rows, dtype = bool)
        for p in premises:
            holds &= mask[ev(p)]
            if not holds.any():
                break
        failing = holds & ~mask[ev(conclusion)]
        if failing.any():
            return index, ev.valuation(int(np.argmax(failing)))
    return None


def consequence(M: MatrixFamily, premises: Iterable[Formula], conclusion: Formula) -> bool:
    return find_counter_valuation(M, premises, conclusion) is None


def validates_rule(m: Matrix, rule: Rule) -> bool:
    return consequence(MatrixFamily([m]), rule.premises, rule.conclusion)


def is_trivial(M: MatrixFamily) -> bool:
    return consequence(M, [X], Y)


def is_inconsistent(M: MatrixFamily) -> bool:
    return consequence(M, [], X)


def find_theorem(M: MatrixFamily, candidates: Iterable[Formula], with_variables: bool = True) -> Optional[Formula]:
    for f in candidates:
        if with_variables and not variables_of([f]):
            continue
        if consequence(M, [], f):
            return f
    return None


def assertional_formula(M: MatrixFamily, candidates: Iterable[Formula]) -> Optional[Formula]:
    """
    First psi(x) with y |- psi(x); on unital reduced models psi is constant with value the designated point
    """
    for psi in candidates:
        if variables_of([psi]) and variables_of([psi]) != ['x']:
            continue
        if consequence(M, [Y], psi):
            return psi
    return None


# ============ LEIBNIZ AND REDUCTION ============

def leibniz_congruence(A: FiniteAlgebra, F: Iterable[int]) -> Congruence:
    """
    Largest congruence compatible with F: (a, c) belongs iff Cg(a, c) is compatible with F
    """
    F = set(F)
    uf = _UnionFind(A.size)
    for a, c in itertools.combinations(A.universe, 2):
        if congruence_generated(A, [(a, c)]).compatible_with(F):
            uf.union(a, c)
    return Congruence([uf.find(e) for e in A.universe])


def reduce_matrix(m: Matrix) -> Matrix:
    omega = leibniz_congruence(m.algebra, m.designated)
    if omega.is_identity():
        return m
    algebra, projection = quotient(m.algebra, omega)
    return Matrix(algebra, frozenset(projection[e] for e in m.designated))


def matrices_isomorphic(m1: Matrix, m2: Matrix) -> bool:
    if m1.algebra.size != m2.algebra.size or len(m1.designated) != len(m2.designated):
        return False
    if is_graph_based(m1.sig):
        return graph_algebra_code(m1.algebra, m1.designated) == graph_algebra_code(m2.algebra, m2.designated)
    if m1.algebra.size > BOUNDS['isomorphism_max_size']:
        return m1 == m2
    return any({mapping[e] for e in m1.designated} == m2.designated
               for mapping in isomorphisms(m1.algebra, m2.algebra))


def reduced_family(M: MatrixFamily) -> MatrixFamily:
    """
    M*, with isomorphic reduced matrices kept once
    """
    if M._reduced is None:
        kept: List[Matrix] = []
        for m in M:
            r = reduce_matrix(m)
            if not any(matrices_isomorphic(r, other) for other in kept):
                kept.append(r)
        M._reduced = MatrixFamily(kept, M.sig)
        M._reduced._reduced = M._reduced
        logger.debug(f"Reduced family has {len(kept)} of {len(M)} matrices")
    return M._reduced


def logically_equivalent(M: MatrixFamily, e: Formula, d: Formula) -> bool:
    if e == d:
        return True
    R = reduced_family(M)
    names = variables_of([e, d])
    return all(np.array_equal(ev(e), ev(d)) for ev in R.evaluators(names))


def unital_reduced(M: MatrixFamily) -> bool:
    return all(len(m.designated) <= 1 for m in reduced_family(M))


# ============ ORACLES ============

def consequence_brute_force(M: MatrixFamily, premises: Iterable[Formula], conclusion: Formula) -> bool:
    """
    Valuation-by-valuation recursive evaluation, independent of the vectorised evaluator
    """
    premises = list(premises)
    names = variables_of(premises + [conclusion])
    for m in M:
        for values in itertools.product(m.algebra.universe, repeat = len(names)):
            v = dict(zip(names, values))
            if all(evaluate(m.algebra, p, v) in m.designated for p in premises) \
                    and evaluate(m.algebra, conclusion, v) not in m.designated:
                return False
    return True


def leibniz_congruence_brute_force(A: FiniteAlgebra, F: Iterable[int]) -> Congruence:
    """
    Largest member of the congruence lattice compatible with F
    """
    F = set(F)
    compatible = [c for c in all_congruences(A) if c.compatible_with(F)]
    return max(compatible, key = lambda c: len(c.pairs()))


# ============ FILTERS ============

def _good_valuations(M: MatrixFamily, B: FiniteAlgebra, X_set: Set[int]) -> List[Tuple[FiniteAlgebra, Tuple[int, ...], FrozenSet[int]]]:
    """
    Maps g from generators (one per element of B) into some matrix of M whose paired
    subalgebra of B x A respects designation: b in X implies g-value designated
    """
    good = []
    for m in M:
        A = m.algebra
        for g in itertools.product(A.universe, repeat = B.size):
            pairs = subproduct_generated([B, A], list(zip(B.universe, g)), M.sig)
            if all(a in m.designated for b, a in pairs if b in X_set):
                good.append((A, g, m.designated))
    return good


def filter_generated(M: MatrixFamily, B: FiniteAlgebra, X_set: Iterable[int]) -> FrozenSet[int]:
    """
    Fg(X): values h(phi) with h^-1[X] |- phi, h sending the generator of b to b
    """
    X_set = set(int(e) for e in X_set)
    if B.size > BOUNDS['filter_max_size']:
        raise BoundExceededError(f"Filter generation limited to size {BOUNDS['filter_max_size']}")
    if B.sig != M.sig:
        raise AlgebraError("Algebra and matrix family have different signatures")
    good = _good_valuations(M, B, X_set)
    components = [B] + [A for A, _, _ in good]
    generators = [tuple([b] + [g[b] for _, g, _ in good]) for b in B.universe]
    designated = [F for _, _, F in good]
    result = set(X_set)
    for t in subproduct_generated(components, generators, M.sig):
        if all(value in F for value, F in zip(t[1:], designated)):
            result.add(t[0])
    return frozenset(result)


def is_deductive_filter(M: MatrixFamily, B: FiniteAlgebra, F: Iterable[int]) -> bool:
    F = frozenset(int(e) for e in F)
    return filter_generated(M, B, F) == F


def deductive_filters(M: MatrixFamily, B: FiniteAlgebra) -> List[FrozenSet[int]]:
    found = set()
    for r in range(B.size + 1):
        for subset in itertools.combinations(B.universe, r):
            if is_deductive_filter(M, B, subset):
                found.add(frozenset(subset))
    return sorted(found, key = lambda s: (len(s), sorted(s)))


def tarski_congruence(M: MatrixFamily, A: FiniteAlgebra) -> Congruence:
    """
    a ~ c iff Fg(p(a)) = Fg(p(c)) for every unary polynomial p
    """
    generated = [filter_generated(M, A, {e}) for e in A.universe]
    polynomials = sorted(unary_polynomials(A))
    labels = {}
    for a in A.universe:
        key = tuple(generated[p[a]] for p in polynomials)
        labels.setdefault(key, a)
    return Congruence([labels[tuple(generated[p[a]] for p in polynomials)] for a in A.universe])

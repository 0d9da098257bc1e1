import heapq
import logging
import itertools
from math import gcd
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np

from config import BOUNDS
from terms import (CONST, VAR, Equation, Formula, Signature, app, box_exponent, const,
                   formula_key, is_graph_based, to_text, var, canonical_variables)


logger = logging.getLogger(__name__)

Valuation = Dict[str, int]


class AlgebraError(ValueError):
    pass


class CongruenceError(ValueError):
    pass


class BoundExceededError(ValueError):
    pass


# ============ ALGEBRAS ============

class FiniteAlgebra:
    """
    Algebra on {0..size-1} given by constant values and full operation tables
    """

    def __init__(self, sig: Signature, size: int, const_values: Mapping[str, int],
                 op_tables: Mapping[str, Sequence], element_names: Optional[Sequence[str]] = None,
                 name: Optional[str] = None):
        if size < 1:
            raise AlgebraError(f"Algebra size must be positive, got {size}")
        self.sig = sig
        self.size = int(size)
        self.name = name
        self.element_names = tuple(element_names) if element_names else tuple(str(i) for i in range(size))
        if len(self.element_names) != self.size:
            raise AlgebraError("Element name list does not match algebra size")

        missing = [c for c in sig.constants if c not in const_values]
        if missing:
            raise AlgebraError(f"Missing constant values: {missing}")
        self.const_values = {}
        for c in sig.constants:
            value = int(const_values[c])
            if not 0 <= value < self.size:
                raise AlgebraError(f"Constant {c} has out-of-range value {value}")
            self.const_values[c] = value

        self.tables = {}
        for op, arity in sig.operations:
            if op not in op_tables:
                raise AlgebraError(f"Missing table for operation {op}")
            table = np.asarray(op_tables[op], dtype = np.int64)
            if table.shape != (self.size,) * arity:
                raise AlgebraError(f"Table for {op} has shape {table.shape}, expected {(self.size,) * arity}")
            if table.size and (table.min() < 0 or table.max() >= self.size):
                raise AlgebraError(f"Table for {op} has entries outside the universe")
            table.setflags(write = False)
            self.tables[op] = table

    def __repr__(self):
        label = self.name or 'algebra'
        return f"FiniteAlgebra({label}, size={self.size})"

    def __eq__(self, other):
        if not isinstance(other, FiniteAlgebra):
            return NotImplemented
        return (self.sig == other.sig and self.size == other.size
                and self.const_values == other.const_values
                and all(np.array_equal(self.tables[op], other.tables[op]) for op in self.tables))

    def __hash__(self):
        return hash((self.sig, self.size, tuple(sorted(self.const_values.items())),
                     tuple(t.tobytes() for _, t in sorted(self.tables.items()))))

    @property
    def universe(self):
        return range(self.size)

    def apply(self, op: str, args: Sequence[int]) -> int:
        return int(self.tables[op][tuple(args)])

    def label(self, element: int) -> str:
        return self.element_names[element]

    def index_of(self, label) -> int:
        if isinstance(label, (int, np.integer)):
            return int(label)
        if label in self.element_names:
            return self.element_names.index(label)
        if str(label).isdigit():
            return int(label)
        raise AlgebraError(f"Unknown element {label!r}")

    def renamed(self, name: str) -> 'FiniteAlgebra':
        return FiniteAlgebra(self.sig, self.size, self.const_values, self.tables, self.element_names, name)

    def to_dict(self):
        data = {'size': self.size,
                'constants': {c: v for c, v in self.const_values.items()},
                'tables': {op: t.tolist() for op, t in self.tables.items()}}
        if self.element_names != tuple(str(i) for i in range(self.size)):
            data['elements'] = list(self.element_names)
        return data

    @classmethod
    def from_dict(cls, sig: Signature, data: Mapping, name: Optional[str] = None) -> 'FiniteAlgebra':
        names = data.get('elements')
        size = data.get('size', len(names) if names else None)
        if size is None:
            raise AlgebraError("Algebra block needs 'size' or 'elements'")
        lookup = {n: i for i, n in enumerate(names)} if names else {}

        def element(value):
            if isinstance(value, str) and value in lookup:
                return lookup[value]
            try:
                return int(value)
            except (TypeError, ValueError):
                raise AlgebraError(f"Unknown element {value!r}")

        def convert(table):
            if isinstance(table, list):
                return [convert(t) for t in table]
            return element(table)

        const_values = {c: element(v) for c, v in data.get('constants', {}).items()}
        tables = {op: convert(t) for op, t in data.get('tables', {}).items()}
        return cls(sig, size, const_values, tables, names, name)


# ============ EVALUATION ============

def evaluate(A: FiniteAlgebra, f: Formula, v: Mapping[str, int]) -> int:
    memo = {}

    def walk(g):
        if g.kind == VAR:
            if g.head not in v:
                raise AlgebraError(f"Unbound variable {g.head}")
            return int(v[g.head])
        if g.kind == CONST:
            return A.const_values[g.head]
        cached = memo.get(g)
        if cached is None:
            cached = int(A.tables[g.head][tuple(walk(a) for a in g.args)])
            memo[g] = cached
        return cached

    return walk(f)


class Evaluator:
    """
    Vectorised evaluation of formulas over every valuation of a fixed variable list
    """

    def __init__(self, A: FiniteAlgebra, variable_names: Sequence[str]):
        self.algebra = A
        self.variable_names = list(variable_names)
        count = len(self.variable_names)
        if count:
            grid = np.indices((A.size,) * count).reshape(count, -1)
        else:
            grid = np.zeros((0, 1), dtype = np.int64)
        self.columns = {name: grid[i] for i, name in enumerate(self.variable_names)}
        self.rows = grid.shape[1]
        self.memo = {}

    def __call__(self, f: Formula) -> np.ndarray:
        cached = self.memo.get(f)
        if cached is not None:
            return cached
        if f.kind == VAR:
            if f.head not in self.columns:
                raise AlgebraError(f"Unbound variable {f.head}")
            result = self.columns[f.head]
        elif f.kind == CONST:
            result = np.full(self.rows, self.algebra.const_values[f.head], dtype = np.int64)
        else:
            result = self.algebra.tables[f.head][tuple(self(a) for a in f.args)]
        self.memo[f] = result
        return result

    def valuation(self, row: int) -> Valuation:
        return {name: int(col[row]) for name, col in self.columns.items()}


def term_function(A: FiniteAlgebra, f: Formula, variable_names: Sequence[str]) -> Tuple[int, ...]:
    return tuple(int(a) for a in Evaluator(A, variable_names)(f))


# ============ CONGRUENCES ============

class Congruence:
    """
    Partition stored canonically: each element maps to the least element of its block
    """
    __slots__ = ('labels',)

    def __init__(self, labels: Sequence[int]):
        canonical = []
        first = {}
        for i, label in enumerate(labels):
            canonical.append(first.setdefault(int(label), i))
        self.labels = tuple(canonical)

    @classmethod
    def identity(cls, size: int) -> 'Congruence':
        return cls(range(size))

    @classmethod
    def total(cls, size: int) -> 'Congruence':
        return cls([0] * size)

    @classmethod
    def from_blocks(cls, size: int, blocks: Iterable[Iterable[int]]) -> 'Congruence':
        labels = list(range(size))
        for block in blocks:
            block = sorted(block)
            for e in block:
                labels[e] = block[0]
        return cls(labels)

    def __eq__(self, other):
        return isinstance(other, Congruence) and self.labels == other.labels

    def __hash__(self):
        return hash(self.labels)

    def __le__(self, other: 'Congruence') -> bool:
        return all(other.labels[a] == other.labels[b] for a, b in zip(range(len(self.labels)), self.labels))

    def __repr__(self):
        return f"Congruence({self.blocks()})"

    @property
    def size(self):
        return len(self.labels)

    def related(self, a: int, b: int) -> bool:
        return self.labels[a] == self.labels[b]

    def blocks(self):
        groups = {}
        for e, label in enumerate(self.labels):
            groups.setdefault(label, []).append(e)
        return [groups[k] for k in sorted(groups)]

    def is_identity(self):
        return all(label == e for e, label in enumerate(self.labels))

    def is_total(self):
        return all(label == 0 for label in self.labels)

    def pairs(self):
        return [(a, b) for block in self.blocks() for a in block for b in block if a < b]

    def compatible_with(self, subset: Iterable[int]) -> bool:
        """
        Every block lies inside or outside the subset
        """
        subset = set(subset)
        return all(len({e in subset for e in block}) == 1 for block in self.blocks())

    def to_labels(self, A: Optional[FiniteAlgebra] = None) -> List[List[str]]:
        if A is None:
            return [[str(e) for e in block] for block in self.blocks()]
        return [[A.label(e) for e in block] for block in self.blocks()]


class _UnionFind:
    def __init__(self, size):
        self.parent = list(range(size))

    def find(self, a):
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if ra < rb:
            self.parent[rb] = ra
        else:
            self.parent[ra] = rb
        return True


def _check_elements(A, elements):
    for e in elements:
        if not 0 <= int(e) < A.size:
            raise CongruenceError(f"Element {e} outside universe of size {A.size}")


def congruence_generated(A: FiniteAlgebra, pairs: Iterable[Tuple[int, int]]) -> Congruence:
    """
    Least congruence containing pairs, by union-find closure under basic translations
    """
    pairs = [(int(a), int(b)) for a, b in pairs]
    _check_elements(A, [e for p in pairs for e in p])
    uf = _UnionFind(A.size)
    queue = [(a, b) for a, b in pairs if uf.union(a, b)]

    while queue:
        a, b = queue.pop()
        for op, table in A.tables.items():
            for position in range(table.ndim):
                left = table.take(a, axis = position).ravel()
                right = table.take(b, axis = position).ravel()
                for x, y in zip(left.tolist(), right.tolist()):
                    if uf.union(x, y):
                        queue.append((x, y))

    return Congruence([uf.find(e) for e in A.universe])


def is_congruence(A: FiniteAlgebra, c: Congruence) -> bool:
    kappa = np.asarray(c.labels, dtype = np.int64)
    for table in A.tables.values():
        if table.ndim == 0:
            continue
        collapsed = table[np.ix_(*([kappa] * table.ndim))]
        if not np.array_equal(kappa[table], kappa[collapsed]):
            return False
    return True


def _set_partitions(n):
    """
    Restricted growth strings of length n
    """
    if n == 0:
        yield []
        return
    labels = [0] * n

    def extend(i, top):
        if i == n:
            yield list(labels)
            return
        for value in range(top + 2):
            labels[i] = value
            yield from extend(i + 1, max(top, value))

    yield from extend(1, 0)


def all_congruences(A: FiniteAlgebra) -> List[Congruence]:
    bound = BOUNDS['all_congruences_max_size']
    if A.size > bound:
        raise BoundExceededError(f"all_congruences limited to size {bound}, got {A.size}")
    found = set()
    for labels in _set_partitions(A.size):
        c = Congruence(labels)
        if is_congruence(A, c):
            found.add(c)
    return sorted(found, key = lambda c: (len(c.blocks()) * -1, c.labels))


def quotient(A: FiniteAlgebra, c: Congruence) -> Tuple[FiniteAlgebra, List[int]]:
    if c.size != A.size or not is_congruence(A, c):
        raise CongruenceError("Partition is not a congruence of the algebra")
    blocks = c.blocks()
    projection = [0] * A.size
    for index, block in enumerate(blocks):
        for e in block:
            projection[e] = index
    reps = np.asarray([block[0] for block in blocks], dtype = np.int64)
    proj = np.asarray(projection, dtype = np.int64)
    tables = {op: proj[t[np.ix_(*([reps] * t.ndim))]] for op, t in A.tables.items()}
    consts = {name: projection[v] for name, v in A.const_values.items()}
    names = ['/'.join(A.label(e) for e in block) for block in blocks]
    name = f"{A.name}/~" if A.name else None
    return FiniteAlgebra(A.sig, len(blocks), consts, tables, names, name), projection


def subalgebra_generated(A: FiniteAlgebra, gens: Iterable[int]) -> Set[int]:
    gens = [int(g) for g in gens]
    _check_elements(A, gens)
    found = set(gens) | set(A.const_values.values())
    frontier = True
    while frontier:
        frontier = False
        current = sorted(found)
        for op, table in A.tables.items():
            for args in itertools.product(current, repeat = table.ndim):
                value = int(table[args])
                if value not in found:
                    found.add(value)
                    frontier = True
    return found


def product(algs: Sequence[FiniteAlgebra], sig: Optional[Signature] = None) -> FiniteAlgebra:
    """
    Direct product, elements numbered in lexicographic order of component tuples
    """
    if not algs and sig is None:
        raise AlgebraError("Empty product needs an explicit signature")
    sig = sig or algs[0].sig
    if any(a.sig != sig for a in algs):
        raise AlgebraError("Product factors must share one signature")
    sizes = [a.size for a in algs]
    total = int(np.prod(sizes)) if sizes else 1
    if total > BOUNDS['product_max_size']:
        raise BoundExceededError(f"Product of size {total} exceeds bound {BOUNDS['product_max_size']}")

    shape = tuple(sizes)
    components = list(itertools.product(*[range(s) for s in sizes]))

    def encode(parts):
        return int(np.ravel_multi_index(parts, shape)) if shape else 0

    tables = {}
    for op, arity in sig.operations:
        table = np.zeros((total,) * arity, dtype = np.int64)
        for args in itertools.product(range(total), repeat = arity):
            parts = tuple(int(alg.tables[op][tuple(components[a][i] for a in args)]) for i, alg in enumerate(algs))
            table[args] = encode(parts)
        tables[op] = table
    consts = {c: encode(tuple(alg.const_values[c] for alg in algs)) for c in sig.constants}
    names = [','.join(alg.label(p) for alg, p in zip(algs, parts)) or '()' for parts in components]
    return FiniteAlgebra(sig, total, consts, tables, names)


def subproduct_generated(algs: Sequence[FiniteAlgebra], gens: Iterable[Sequence[int]],
                         sig: Optional[Signature] = None) -> Set[Tuple[int, ...]]:
    """
    Subalgebra of the product generated by gens, as component tuples, without building the product
    """
    sig = sig or algs[0].sig
    bound = BOUNDS['free_algebra_max_size']
    elements = []
    found = set()
    queue = [tuple(int(v) for v in g) for g in gens]
    queue.extend(tuple(alg.const_values[c] for alg in algs) for c in sig.constants)

    while queue:
        item = queue.pop(0)
        if item in found:
            continue
        found.add(item)
        elements.append(item)
        if len(elements) > bound:
            raise BoundExceededError(f"Generated subalgebra exceeds {bound} elements")
        newest = len(elements) - 1
        for op, arity in sig.operations:
            tables = [alg.tables[op] for alg in algs]
            for args in itertools.product(range(len(elements)), repeat = arity):
                if newest not in args:
                    continue
                value = tuple(int(t[tuple(elements[a][i] for a in args)]) for i, t in enumerate(tables))
                if value not in found:
                    queue.append(value)
    return found


def is_homomorphism(A: FiniteAlgebra, B: FiniteAlgebra, mapping: Sequence[int]) -> bool:
    h = np.asarray(mapping, dtype = np.int64)
    if any(h[A.const_values[c]] != B.const_values[c] for c in A.sig.constants):
        return False
    for op, table in A.tables.items():
        if not np.array_equal(h[table], B.tables[op][np.ix_(*([h] * table.ndim))]):
            return False
    return True


def isomorphisms(A: FiniteAlgebra, B: FiniteAlgebra) -> Iterator[List[int]]:
    if A.sig != B.sig or A.size != B.size:
        return
    if A.size > BOUNDS['isomorphism_max_size']:
        raise BoundExceededError(f"Isomorphism search limited to size {BOUNDS['isomorphism_max_size']}")
    fixed = {}
    for c in A.sig.constants:
        a, b = A.const_values[c], B.const_values[c]
        if fixed.get(a, b) != b:
            return
        fixed[a] = b
    if len(set(fixed.values())) != len(fixed):
        return
    free_sources = [e for e in A.universe if e not in fixed]
    free_targets = [e for e in B.universe if e not in fixed.values()]
    for perm in itertools.permutations(free_targets):
        mapping = [0] * A.size
        for a, b in fixed.items():
            mapping[a] = b
        for a, b in zip(free_sources, perm):
            mapping[a] = b
        if is_homomorphism(A, B, mapping):
            yield mapping


def find_isomorphism(A: FiniteAlgebra, B: FiniteAlgebra) -> Optional[List[int]]:
    return next(isomorphisms(A, B), None)


def is_isomorphic(A: FiniteAlgebra, B: FiniteAlgebra) -> bool:
    return find_isomorphism(A, B) is not None


def unary_polynomials(A: FiniteAlgebra) -> Set[Tuple[int, ...]]:
    """
    Closure of identity and constant maps under basic translations
    """
    identity = tuple(A.universe)
    found = {identity} | {tuple([e] * A.size) for e in A.universe}
    queue = list(found)
    while queue:
        p = queue.pop()
        p_arr = np.asarray(p, dtype = np.int64)
        for table in A.tables.values():
            for position in range(table.ndim):
                moved = np.moveaxis(table, position, 0)[p_arr]
                rest = moved.reshape(A.size, -1)
                for column in range(rest.shape[1]):
                    q = tuple(int(v) for v in rest[:, column])
                    if q not in found:
                        found.add(q)
                        queue.append(q)
    return found


# ============ FREE ALGEBRAS ============

def free_algebra(K: Sequence[FiniteAlgebra], n: int, sig: Optional[Signature] = None
                 ) -> Tuple[FiniteAlgebra, List[int], Dict[int, Formula]]:
    """
    Subalgebra of the product of the A^(A^n) generated by the projections, with minimal witness terms
    """
    if not K and sig is None:
        raise AlgebraError("free_algebra over an empty class needs an explicit signature")
    sig = sig or K[0].sig
    names = canonical_variables(n)
    evaluators = [Evaluator(A, names) for A in K]
    bound = BOUNDS['free_algebra_max_size']

    def function_of(f):
        return tuple(int(v) for ev in evaluators for v in ev(f))

    elements = []
    witness = []
    index = {}
    heap = [(formula_key(f), f) for f in [var(x) for x in names] + [const(c) for c in sig.constants]]
    heapq.heapify(heap)

    while heap:
        _, f = heapq.heappop(heap)
        func = function_of(f)
        if func in index:
            continue
        index[func] = len(elements)
        elements.append(func)
        witness.append(f)
        if len(elements) > bound:
            raise BoundExceededError(f"Free algebra exceeds {bound} elements")
        newest = len(elements) - 1
        for op, arity in sig.operations:
            for args in itertools.product(range(len(elements)), repeat = arity):
                if newest in args:
                    g = app(op, *(witness[a] for a in args))
                    heapq.heappush(heap, (formula_key(g), g))

    tables = {}
    for op, arity in sig.operations:
        table = np.zeros((len(elements),) * arity, dtype = np.int64)
        for args in itertools.product(range(len(elements)), repeat = arity):
            table[args] = index[function_of(app(op, *(witness[a] for a in args)))]
        tables[op] = table
    consts = {c: index[function_of(const(c))] for c in sig.constants}
    generators = [index[function_of(var(x))] for x in names]
    algebra = FiniteAlgebra(sig, len(elements), consts, tables, [to_text(w) for w in witness], 'free')
    logger.debug(f"Free algebra on {n} generators has {len(elements)} elements")
    return algebra, generators, dict(enumerate(witness))


# ============ GRAPH-BASED ENUMERATION ============

def _unique_unary(sig, op = None):
    if op is not None:
        if sig.arity(op) != 1:
            raise AlgebraError(f"{op!r} is not a unary operation")
        return op
    unary = sig.unary_operations
    if len(unary) != 1:
        raise AlgebraError("Expected exactly one unary operation")
    return unary[0]


def _orbit_shape(succ, e):
    """
    (tail length, cycle length) of e under succ
    """
    seen = {}
    step = 0
    while e not in seen:
        seen[e] = step
        e = succ[e]
        step += 1
    return seen[e], step - seen[e]


def box_periodicity(algs: Sequence[FiniteAlgebra], op: Optional[str] = None) -> Tuple[int, int]:
    """
    Least m, then least n >= m, with box^m = box^(n+1) on every algebra
    """
    if not algs:
        raise AlgebraError("box_periodicity needs at least one algebra")
    box = _unique_unary(algs[0].sig, op)
    m, period = 0, 1
    for A in algs:
        succ = A.tables[box].tolist()
        for e in A.universe:
            tail, cycle = _orbit_shape(succ, e)
            m = max(m, tail)
            period = period * cycle // gcd(period, cycle)
    return m, m + period - 1


def graph_algebra_code(A: FiniteAlgebra, designated: Iterable[int] = ()) -> tuple:
    """
    Isomorphism invariant for graph-based algebras: labelled in-trees on labelled cycles
    """
    designated = set(designated)
    consts_at = {}
    for c, v in A.const_values.items():
        consts_at.setdefault(v, []).append(c)
    labels = [(tuple(sorted(consts_at.get(e, []))), e in designated) for e in A.universe]
    unary = A.sig.unary_operations
    if not unary:
        return ('flat', tuple(sorted(labels)))

    succ = A.tables[unary[0]].tolist()
    on_cycle = [False] * A.size
    for e in A.universe:
        x = e
        for _ in range(A.size):
            x = succ[x]
        on_cycle[x] = True
        y = succ[x]
        while y != x:
            on_cycle[y] = True
            y = succ[y]

    children = {e: [] for e in A.universe}
    for e in A.universe:
        if not on_cycle[e]:
            children[succ[e]].append(e)

    def tree_code(e):
        return (labels[e], tuple(sorted(tree_code(c) for c in children[e])))

    components = []
    visited = set()
    for e in A.universe:
        if not on_cycle[e] or e in visited:
            continue
        cycle = [e]
        y = succ[e]
        while y != e:
            cycle.append(y)
            y = succ[y]
        visited.update(cycle)
        codes = [tree_code(c) for c in cycle]
        components.append(min(tuple(codes[i:] + codes[:i]) for i in range(len(codes))))
    return ('graph', tuple(sorted(components)))


def _periodicity_equation(eqs, box):
    for eq in eqs:
        a, p = box_exponent(eq.lhs, box)
        b, q = box_exponent(eq.rhs, box)
        if p == q and p.kind == VAR and a != b:
            return min(a, b), max(a, b)
    return None


def satisfies_equations(A: FiniteAlgebra, eqs: Sequence[Equation]) -> bool:
    for eq in eqs:
        ev = Evaluator(A, sorted(eq.variables()))
        if not np.array_equal(ev(eq.lhs), ev(eq.rhs)):
            return False
    return True


def enumerate_algebras(sig: Signature, k: int, eqs: Sequence[Equation]) -> Iterator[FiniteAlgebra]:
    """
    Up to isomorphism, every algebra generated by at most k elements satisfying eqs.
    Graph-based signatures only; a box signature needs a periodicity equation box^a x ~ box^b x.
    """
    if not is_graph_based(sig):
        raise AlgebraError("enumerate_algebras is restricted to graph-based signatures")
    seen = set()
    if not sig.unary_operations:
        candidates = _enumerate_flat(sig, k)
    else:
        box = sig.unary_operations[0]
        period = _periodicity_equation(eqs, box)
        if period is None:
            raise BoundExceededError("No equation box^a x ~ box^b x bounds the enumeration")
        candidates = _enumerate_unary(sig, box, k, period)

    count = 0
    for A in candidates:
        count += 1
        if count > BOUNDS['enumeration_max_raw']:
            raise BoundExceededError(f"Enumeration exceeded {BOUNDS['enumeration_max_raw']} raw candidates")
        if not satisfies_equations(A, eqs):
            continue
        code = graph_algebra_code(A)
        if code in seen:
            continue
        seen.add(code)
        yield A
    logger.debug(f"Enumerated {len(seen)} algebras from {count} raw candidates")


def _enumerate_flat(sig, k):
    constants = list(sig.constants)
    for labels in _set_partitions(len(constants)):
        blocks = max(labels, default = -1) + 1
        for extra in range(k + 1):
            size = blocks + extra
            if size == 0:
                continue
            yield FiniteAlgebra(sig, size, dict(zip(constants, labels)), {})


def _enumerate_unary(sig, box, k, period):
    low, high = period
    constants = list(sig.constants)
    max_size = (k + len(constants)) * high
    if max_size > BOUNDS['enumeration_max_size']:
        raise BoundExceededError(f"Enumeration size bound {max_size} exceeds {BOUNDS['enumeration_max_size']}")

    succ = []
    const_values = {}

    def periodic(e):
        a = e
        for _ in range(low):
            a = succ[a]
        b = e
        for _ in range(high):
            b = succ[b]
        return a == b

    def build():
        return FiniteAlgebra(sig, len(succ), dict(const_values), {box: list(succ)})

    def atoms(position, generators_left):
        if position < len(constants):
            c = constants[position]
            for e in range(len(succ)):
                const_values[c] = e
                yield from atoms(position + 1, generators_left)
            del const_values[c]
            const_values[c] = len(succ)
            yield from orbit(len(succ), 0, position + 1, generators_left, len(succ))
            del const_values[c]
            return
        if succ:
            yield build()
        if generators_left > 0:
            yield from orbit(len(succ), 0, position, generators_left - 1, len(succ))

    def orbit(e, depth, next_position, generators_left, start):
        succ.append(-1)
        for target in range(len(succ)):
            succ[e] = target
            if all(periodic(x) for x in range(start, len(succ))):
                yield from atoms(next_position, generators_left)
        if depth + 1 < high:
            succ[e] = len(succ)
            yield from orbit(len(succ), depth + 1, next_position, generators_left, start)
        succ.pop()

    yield from atoms(0, k)

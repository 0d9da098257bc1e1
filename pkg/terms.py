import re
import logging
import weakref
import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Tuple


logger = logging.getLogger(__name__)

NAME_PATTERN = re.compile(r'^[a-zA-Z][a-zA-Z0-9_]*$')
TOKEN_PATTERN = re.compile(r'\s*(?:([A-Za-z0-9_]+)|(.))')
TAPE_SYMBOLS = ('0', '1')

# Canonical variable order for generated formulas
BASE_VARIABLES = ('x', 'y', 'z', 'u', 'w')


class SignatureError(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, message, position = None):
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)
        self.position = position


class ArityError(ParseError):
    pass


def canonical_variables(n: int) -> List[str]:
    names = list(BASE_VARIABLES[:n])
    names.extend(f"x{i}" for i in range(len(BASE_VARIABLES), n))
    return names


# ============ SIGNATURES ============

@dataclass(frozen = True)
class Signature:
    constants: Tuple[str, ...] = ()
    operations: Tuple[Tuple[str, int], ...] = ()
    tape_symbols: bool = False
    _arities: Dict[str, int] = field(init = False, repr = False, compare = False, hash = False)

    def __post_init__(self):
        constants = tuple(self.constants)
        operations = tuple((str(name), int(arity)) for name, arity in self.operations)
        object.__setattr__(self, 'constants', constants)
        object.__setattr__(self, 'operations', operations)

        names = list(constants) + [name for name, _ in operations]
        for name in names:
            if NAME_PATTERN.match(name):
                continue
            if self.tape_symbols and name in TAPE_SYMBOLS and name in constants:
                continue
            raise SignatureError(f"Invalid symbol name: {name!r}")
        if len(set(names)) != len(names):
            raise SignatureError(f"Duplicate symbol names in {names}")
        for name, arity in operations:
            if arity < 1:
                raise SignatureError(f"Operation {name} must have arity >= 1, got {arity}")

        arities = {name: 0 for name in constants}
        arities.update(dict(operations))
        object.__setattr__(self, '_arities', arities)

    @classmethod
    def from_dict(cls, data: Mapping) -> 'Signature':
        ops = data.get('operations', {})
        if isinstance(ops, Mapping):
            ops = list(ops.items())
        return cls(constants = tuple(data.get('constants', ())),
                   operations = tuple((name, arity) for name, arity in ops),
                   tape_symbols = bool(data.get('tape_symbols', False)))

    def to_dict(self):
        data = {'constants': list(self.constants),
                'operations': {name: arity for name, arity in self.operations}}
        if self.tape_symbols:
            data['tape_symbols'] = True
        return data

    def arity(self, name: str) -> Optional[int]:
        return self._arities.get(name)

    def is_constant(self, name: str) -> bool:
        return self._arities.get(name) == 0

    def is_operation(self, name: str) -> bool:
        return self._arities.get(name, 0) > 0

    @property
    def unary_operations(self) -> List[str]:
        return [name for name, arity in self.operations if arity == 1]

    @property
    def symbols(self) -> List[str]:
        return list(self._arities)


def is_graph_based(sig: Signature) -> bool:
    """
    Only constants and at most one unary connective
    """
    if any(arity > 1 for _, arity in sig.operations):
        return False
    return len(sig.unary_operations) <= 1


# ============ FORMULAS ============

VAR, CONST, APP = 'var', 'const', 'app'


_INTERNED: 'weakref.WeakValueDictionary' = weakref.WeakValueDictionary()


class Formula:
    """
    Immutable, interned term tree: equal formulas are the same object, so
    deep shared terms compare and hash in constant time
    """
    __slots__ = ('kind', 'head', 'args', '_hash', 'size', 'depth', '__weakref__')

    def __new__(cls, kind: str, head: str, args: Tuple['Formula', ...] = ()):
        args = tuple(args)
        key = (kind, head, args)
        cached = _INTERNED.get(key)
        if cached is not None:
            return cached
        self = object.__new__(cls)
        object.__setattr__(self, 'kind', kind)
        object.__setattr__(self, 'head', head)
        object.__setattr__(self, 'args', args)
        object.__setattr__(self, '_hash', hash(key))
        object.__setattr__(self, 'size', 1 + sum(a.size for a in args))
        object.__setattr__(self, 'depth', 1 + max((a.depth for a in args), default = -1))
        _INTERNED[key] = self
        return self

    def __setattr__(self, name, value):
        raise AttributeError("Formula is immutable")

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    def __reduce__(self):
        return (Formula, (self.kind, self.head, self.args))

    def __lt__(self, other):
        return formula_key(self) < formula_key(other)

    def __repr__(self):
        return f"Formula({to_text(self)!r})"

    def __str__(self):
        return to_text(self)

    @property
    def is_variable(self):
        return self.kind == VAR

    @property
    def is_constant(self):
        return self.kind == CONST

    @property
    def is_atomic(self):
        return self.kind != APP


def var(name: str) -> Formula:
    return Formula(VAR, name)


def const(name: str) -> Formula:
    return Formula(CONST, name)


def app(op: str, *args: Formula) -> Formula:
    return Formula(APP, op, args)


X = var('x')
Y = var('y')


def to_text(f: Formula) -> str:
    """
    Fully parenthesised prefix form
    """
    memo = {}

    def render(g):
        if g.kind != APP:
            return g.head
        cached = memo.get(g)
        if cached is None:
            cached = f"{g.head}({','.join(render(a) for a in g.args)})"
            memo[g] = cached
        return cached

    return render(f)


def formula_key(f: Formula) -> Tuple[int, str]:
    return (f.size, to_text(f))


def variables(f: Formula) -> frozenset:
    seen = set()
    found = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g in seen:
            continue
        seen.add(g)
        if g.kind == VAR:
            found.add(g.head)
        stack.extend(g.args)
    return frozenset(found)


def variables_of(formulas: Iterable[Formula]) -> List[str]:
    names = set()
    for f in formulas:
        names |= variables(f)
    return sorted(names)


def subformulas(f: Formula) -> List[Formula]:
    """
    Distinct subformulas, children before parents
    """
    order = []
    seen = set()

    def walk(g):
        if g in seen:
            return
        seen.add(g)
        for a in g.args:
            walk(a)
        order.append(g)

    walk(f)
    return order


def count_occurrences(f: Formula, name: str) -> int:
    memo = {}

    def count(g):
        if g.kind == VAR:
            return 1 if g.head == name else 0
        if g in memo:
            return memo[g]
        total = sum(count(a) for a in g.args)
        memo[g] = total
        return total

    return count(f)


def iterate(op: str, f: Formula, n: int) -> Formula:
    """
    op applied n times; n = 0 returns f
    """
    for _ in range(n):
        f = app(op, f)
    return f


def box_exponent(f: Formula, op: str) -> Tuple[int, Formula]:
    """
    Split f as op^n(p) with p not starting with op
    """
    n = 0
    while f.kind == APP and f.head == op and len(f.args) == 1:
        f = f.args[0]
        n += 1
    return n, f


def check_formula(f: Formula, sig: Signature):
    for g in subformulas(f):
        if g.kind == APP:
            if sig.arity(g.head) != len(g.args) or not sig.is_operation(g.head):
                raise ArityError(f"{g.head} used with {len(g.args)} arguments")
        elif g.kind == CONST and not sig.is_constant(g.head):
            raise ParseError(f"Unknown constant {g.head}")


# ============ SUBSTITUTIONS ============

class Substitution:
    """
    Finite map from variable names to formulas, identity elsewhere
    """
    __slots__ = ('mapping',)

    def __init__(self, mapping: Optional[Mapping[str, Formula]] = None):
        self.mapping = dict(mapping or {})

    def __call__(self, f: Formula) -> Formula:
        return apply_substitution(self, f)

    def __eq__(self, other):
        return isinstance(other, Substitution) and self.mapping == other.mapping

    def __repr__(self):
        body = ', '.join(f"{k} -> {to_text(v)}" for k, v in sorted(self.mapping.items()))
        return f"Substitution({{{body}}})"

    def get(self, name: str) -> Formula:
        return self.mapping.get(name, var(name))

    def compose(self, inner: 'Substitution') -> 'Substitution':
        """
        self after inner
        """
        mapping = {name: apply_substitution(self, f) for name, f in inner.mapping.items()}
        for name, f in self.mapping.items():
            mapping.setdefault(name, f)
        return Substitution(mapping)

    def to_dict(self):
        return {k: to_text(v) for k, v in sorted(self.mapping.items())}


def apply_substitution(s: Substitution, f: Formula) -> Formula:
    if not s.mapping:
        return f
    memo = {}

    def walk(g):
        if g.kind == VAR:
            return s.mapping.get(g.head, g)
        if g.kind == CONST:
            return g
        out = memo.get(g)
        if out is None:
            args = tuple(walk(a) for a in g.args)
            out = g if all(a is b for a, b in zip(args, g.args)) else Formula(APP, g.head, args)
            memo[g] = out
        return out

    return walk(f)


def replace_variable(f: Formula, name: str, g: Formula) -> Formula:
    return apply_substitution(Substitution({name: g}), f)


def match(pattern: Formula, f: Formula, binding: Optional[Dict[str, Formula]] = None) -> Optional[Dict[str, Formula]]:
    """
    One-way matching of pattern variables against f
    """
    binding = dict(binding or {})
    stack = [(pattern, f)]
    while stack:
        p, g = stack.pop()
        if p.kind == VAR:
            bound = binding.get(p.head)
            if bound is None:
                binding[p.head] = g
            elif bound != g:
                return None
        elif p.kind != g.kind or p.head != g.head or len(p.args) != len(g.args):
            return None
        else:
            stack.extend(zip(p.args, g.args))
    return binding


# ============ EQUATIONS ============

@dataclass(frozen = True)
class Equation:
    lhs: Formula
    rhs: Formula

    def __str__(self):
        return f"{to_text(self.lhs)} ~ {to_text(self.rhs)}"

    def variables(self):
        return variables(self.lhs) | variables(self.rhs)

    def substitute(self, s: Substitution) -> 'Equation':
        return Equation(apply_substitution(s, self.lhs), apply_substitution(s, self.rhs))

    def is_trivial(self):
        return self.lhs == self.rhs


# ============ PARSING ============

def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = TOKEN_PATTERN.match(text, pos)
        if m is None or m.end() == pos:
            break
        if m.group(1) is not None:
            tokens.append((m.group(1), m.start(1)))
        elif m.group(2) is not None:
            char = m.group(2)
            if char.isspace():
                pos = m.end()
                continue
            if char not in '(),':
                raise ParseError(f"Unexpected character {char!r}", m.start(2))
            tokens.append((char, m.start(2)))
        pos = m.end()
    return tokens


def parse_formula(text: str, sig: Signature) -> Formula:
    tokens = _tokenize(text)
    if not tokens:
        raise ParseError("Empty formula", 0)
    index = 0

    def peek():
        return tokens[index] if index < len(tokens) else (None, len(text))

    def take(expected = None):
        nonlocal index
        token, pos = peek()
        if token is None:
            raise ParseError("Unexpected end of input", pos)
        if expected is not None and token != expected:
            raise ParseError(f"Expected {expected!r}, found {token!r}", pos)
        index += 1
        return token, pos

    def term():
        name, pos = take()
        if name in '(),':
            raise ParseError(f"Unexpected {name!r}", pos)
        arity = sig.arity(name)
        following, _ = peek()
        if arity is None:
            if following == '(':
                raise ParseError(f"Unknown symbol {name!r}", pos)
            if not NAME_PATTERN.match(name):
                raise ParseError(f"Invalid variable name {name!r}", pos)
            return var(name)
        if arity == 0:
            if following == '(':
                raise ArityError(f"Constant {name!r} applied to arguments", pos)
            return const(name)
        if following != '(':
            raise ArityError(f"Operation {name!r} expects {arity} arguments, got 0", pos)
        take('(')
        args = [term()]
        while peek()[0] == ',':
            take(',')
            args.append(term())
        take(')')
        if len(args) != arity:
            raise ArityError(f"Operation {name!r} expects {arity} arguments, got {len(args)}", pos)
        return app(name, *args)

    result = term()
    if index != len(tokens):
        raise ParseError(f"Trailing input {tokens[index][0]!r}", tokens[index][1])
    return result


def parse_equation(text: str, sig: Signature) -> Equation:
    parts = text.split('~')
    if len(parts) != 2:
        raise ParseError(f"Equation must have the form 'lhs ~ rhs': {text!r}")
    return Equation(parse_formula(parts[0], sig), parse_formula(parts[1], sig))


def parse_equations(text: str, sig: Signature) -> List[Equation]:
    return [parse_equation(part, sig) for part in text.split(';') if part.strip()]


# ============ SUBFORMULA TREES ============

@dataclass(frozen = True)
class SubformulaTree:
    """
    Nodes in preorder; labels are (kind, symbol); children index into the node list
    """
    labels: Tuple[Tuple[str, str], ...]
    children: Tuple[Tuple[int, ...], ...]

    @property
    def node_count(self):
        return len(self.labels)

    @property
    def is_empty(self):
        return not self.labels

    def branch_lengths(self):
        """
        Node counts of all root-to-leaf paths
        """
        if self.is_empty:
            return []
        lengths = []
        stack = [(0, 1)]
        while stack:
            node, length = stack.pop()
            if not self.children[node]:
                lengths.append(length)
            stack.extend((child, length + 1) for child in self.children[node])
        return lengths

    def to_formula(self) -> Formula:
        if self.is_empty:
            raise ValueError("Empty tree has no formula")

        def build(node):
            kind, symbol = self.labels[node]
            if kind == APP:
                return app(symbol, *(build(c) for c in self.children[node]))
            return Formula(kind, symbol)

        return build(0)


def subformula_tree(f: Formula, prune: Optional[str] = None) -> SubformulaTree:
    labels = []
    children = []

    def build(g):
        if prune is not None and g.kind == VAR and g.head == prune:
            return None
        index = len(labels)
        labels.append((g.kind, g.head))
        children.append([])
        for a in g.args:
            child = build(a)
            if child is not None:
                children[index].append(child)
        return index

    build(f)
    return SubformulaTree(tuple(labels), tuple(tuple(c) for c in children))


# ============ DERIVED CONNECTIVES ============

def box_diamond_from_nary(sig: Signature, op: str) -> Tuple[Formula, Formula]:
    """
    Unary box and diamond in x built from an n-ary connective, n >= 2
    """
    arity = sig.arity(op)
    if arity is None or arity < 2:
        raise SignatureError(f"Operation {op!r} must have arity >= 2 to define box/diamond")
    flat = app(op, *([X] * arity))
    box = app(op, flat, *([X] * (arity - 1)))
    diamond = app(op, X, flat, *([X] * (arity - 2)))
    return box, diamond


# ============ ENUMERATION ============

def enumerate_formulas(sig: Signature, variable_names: Iterable[str], max_depth: int,
                       max_count: Optional[int] = None) -> List[Formula]:
    """
    Formulas of depth <= max_depth in (size, printed text) order, truncated to max_count
    """
    atoms = sorted([var(v) for v in variable_names] + [const(c) for c in sig.constants], key = formula_key)
    max_arity = max((a for _, a in sig.operations), default = 0)
    limit = _max_size(max_depth, max_arity) if max_arity else 1
    by_size = {1: atoms}
    result = []

    for size in range(1, limit + 1):
        if size > 1:
            bucket = []
            for op, arity in sig.operations:
                for sizes in _compositions(size - 1, arity):
                    pools = [[g for g in by_size[s] if g.depth < max_depth] for s in sizes]
                    if all(pools):
                        bucket.extend(app(op, *args) for args in itertools.product(*pools))
            by_size[size] = sorted(bucket, key = formula_key)
        for f in by_size[size]:
            result.append(f)
            if max_count is not None and len(result) >= max_count:
                return result
    return result


def _max_size(depth, arity):
    if arity <= 1:
        return depth + 1
    return (arity ** (depth + 1) - 1) // (arity - 1)


def _compositions(total, parts):
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest

import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from hilbert import Budget, HilbertCalculus, Proof, ProofLine, check_proof, saturate
from matrix_logic import Rule
from terms import (X, Formula, Signature, SignatureError, Substitution, app, apply_substitution, const, match,
                   to_text, var)


logger = logging.getLogger(__name__)

BLANK = 'empty'
WRITABLE = ('0', '1')
READABLE = ('0', '1', BLANK)
MOVES = ('L', 'R')

DOT, LAMBDA, ARROW = 'dot', 'lambda', 'arrow'
CONNECTIVES = ((DOT, 2), (LAMBDA, 3), (ARROW, 2))


class MachineError(ValueError):
    pass


class ConfigurationError(ValueError):
    pass


# ============ MACHINES ============

@dataclass
class TuringMachine:
    """
    <P, Q, q0, delta> with delta total on Q x {0, 1, empty}
    """
    final: Tuple[str, ...]
    nonfinal: Tuple[str, ...]
    initial: str
    delta: Dict[Tuple[str, str], Tuple[str, str, str]] = field(default_factory = dict)
    name: str = ''

    def __post_init__(self):
        self.final = tuple(self.final)
        self.nonfinal = tuple(self.nonfinal)
        if set(self.final) & set(self.nonfinal):
            raise MachineError(f"Final and nonfinal states overlap: {sorted(set(self.final) & set(self.nonfinal))}")
        if self.initial not in self.nonfinal:
            raise MachineError(f"Initial state {self.initial!r} is not a nonfinal state")
        states = set(self.states)
        for q in self.nonfinal:
            for a in READABLE:
                entry = self.delta.get((q, a))
                if entry is None:
                    raise MachineError(f"Transition missing for state {q!r} reading {a!r}")
                target, write, move = entry
                if target not in states or write not in WRITABLE or move not in MOVES:
                    raise MachineError(f"Invalid transition delta({q}, {a}) = {entry}")
        extra = [key for key in self.delta if key[0] not in self.nonfinal or key[1] not in READABLE]
        if extra:
            raise MachineError(f"Transitions outside Q x {{0, 1, empty}}: {extra}")

    @property
    def states(self) -> Tuple[str, ...]:
        return self.nonfinal + self.final

    @classmethod
    def from_dict(cls, data: Mapping) -> 'TuringMachine':
        try:
            states = data['states']
            delta = {}
            for entry in data['delta']:
                key = (str(entry['state']), str(entry['read']))
                if key in delta:
                    raise MachineError(f"Duplicate transition for {key}")
                delta[key] = (str(entry['next']), str(entry['write']), str(entry['move']))
            return cls(final = tuple(states.get('final', [])), nonfinal = tuple(states['nonfinal']),
                       initial = states['initial'], delta = delta, name = data.get('name', ''))
        except (KeyError, TypeError) as e:
            raise MachineError(f"Malformed machine description: {e}")

    def to_dict(self) -> dict:
        return {'name': self.name,
                'states': {'final': list(self.final), 'nonfinal': list(self.nonfinal), 'initial': self.initial},
                'delta': [{'state': q, 'read': a, 'next': t, 'write': b, 'move': d}
                          for (q, a), (t, b, d) in sorted(self.delta.items())]}


def parse_input(text: str) -> Tuple[str, ...]:
    t = tuple(str(text))
    if len(t) < 2 or any(symbol not in WRITABLE for symbol in t):
        raise MachineError(f"Input must be a 0/1 sequence of length >= 2, got {text!r}")
    return t


@dataclass
class MachineFile:
    machine: TuringMachine
    input: Tuple[str, ...]
    budget: Budget


def load_machine(path: str) -> MachineFile:
    """
    Machine, input and the saturation budget used for the equivalence scan
    """
    try:
        with open(path, 'r') as handle:
            data = json.load(handle)
    except (OSError, json.JSONDecodeError) as e:
        raise MachineError(f"Cannot read machine file {path}: {e}")
    machine = TuringMachine.from_dict(data)
    try:
        budget = Budget(**data.get('budget', {}))
    except (TypeError, ValueError) as e:
        raise MachineError(f"Invalid budget in {path}: {e}")
    return MachineFile(machine, parse_input(data.get('input', '')), budget)


# ============ CONFIGURATIONS ============

@dataclass(frozen = True)
class Configuration:
    state: str
    left: Tuple[str, ...]
    head: str
    right: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, 'left', tuple(self.left))
        object.__setattr__(self, 'right', tuple(self.right))
        for side in (self.left, self.right):
            if side != (BLANK,) and (not side or any(s not in WRITABLE for s in side)):
                raise ConfigurationError(f"Tape segment {side} must be a nonempty 0/1 sequence or (empty,)")
        if self.head not in READABLE:
            raise ConfigurationError(f"Head symbol {self.head!r} not in {READABLE}")
        if self.left != (BLANK,) and self.right != (BLANK,) and self.head == BLANK:
            raise ConfigurationError("Blank head between two written segments")

    def mirrored(self) -> 'Configuration':
        return Configuration(self.state, tuple(reversed(self.right)), self.head, tuple(reversed(self.left)))

    def tape(self) -> str:
        show = lambda side: '' if side == (BLANK,) else ''.join(side)
        return f"{show(self.left)}[{self.head if self.head != BLANK else '_'}]{show(self.right)}"


def initial_configuration(M: TuringMachine, t: Sequence[str]) -> Configuration:
    t = parse_input(''.join(t))
    return Configuration(M.initial, (BLANK,), t[0], t[1:])


def encode_language(M: TuringMachine) -> Signature:
    clash = set(M.states) & set(READABLE)
    if clash:
        raise SignatureError(f"State names collide with tape symbols: {sorted(clash)}")
    return Signature(constants = tuple(M.states) + READABLE, operations = CONNECTIVES, tape_symbols = True)


def _dot(a: Formula, b: Formula) -> Formula:
    return app(DOT, a, b)


def _config(q: str, left: Formula, head: Formula, right: Formula) -> Formula:
    return _dot(const(q), app(LAMBDA, left, head, right))


def config_formula(c: Configuration) -> Formula:
    left = const(c.left[0])
    for symbol in c.left[1:]:
        left = _dot(left, const(symbol))
    right = const(c.right[-1])
    for symbol in reversed(c.right[:-1]):
        right = _dot(const(symbol), right)
    return _config(c.state, left, const(c.head), right)


def parse_config_formula(f: Formula) -> Configuration:
    """
    Inverse of config_formula
    """
    try:
        state, body = f.args if f.head == DOT else (None, None)
        if state is None or not state.is_constant or body.head != LAMBDA:
            raise ConfigurationError(f"Not a configuration formula: {to_text(f)}")
        left_term, head, right_term = body.args
        left = []
        while left_term.head == DOT:
            left_term, symbol = left_term.args
            left.append(symbol.head)
        left.append(left_term.head)
        right = []
        while right_term.head == DOT:
            symbol, right_term = right_term.args
            right.append(symbol.head)
        right.append(right_term.head)
        return Configuration(state.head, tuple(reversed(left)), head.head, tuple(right))
    except (AttributeError, ValueError) as e:
        raise ConfigurationError(f"Not a configuration formula: {to_text(f)} ({e})")


def step(M: TuringMachine, c: Configuration) -> Optional[Configuration]:
    if c.state in M.final:
        return None
    if c.state not in M.nonfinal:
        raise ConfigurationError(f"Unknown state {c.state!r}")
    target, write, move = M.delta[(c.state, c.head)]
    if move == 'R':
        moved = step_left(c.mirrored(), target, write)
        return moved.mirrored()
    return step_left(c, target, write)


def step_left(c: Configuration, target: str, write: str) -> Configuration:
    left = c.left[:-1] if len(c.left) >= 2 else (BLANK,)
    right = (write,) if c.right[0] == BLANK else (write,) + c.right
    return Configuration(target, left, c.left[-1], right)


@dataclass
class Run:
    configurations: List[Configuration]
    halted: bool

    @property
    def steps(self) -> int:
        return len(self.configurations) - 1


def simulate(M: TuringMachine, t: Sequence[str], max_steps: int) -> Run:
    c = initial_configuration(M, t)
    run = [c]
    for _ in range(max_steps):
        if c.state in M.final:
            break
        c = step(M, c)
        run.append(c)
    return Run(run, c.state in M.final)


# ============ CALCULUS ============

def _pad_left(p: str, forward: bool) -> Rule:
    x, y, z = var('x'), var('y'), var('z')
    plain, padded = _config(p, x, y, z), _config(p, _dot(const(BLANK), x), y, z)
    return Rule((plain,), padded) if forward else Rule((padded,), plain)


def _pad_right(p: str, forward: bool) -> Rule:
    x, y, z = var('x'), var('y'), var('z')
    plain, padded = _config(p, x, y, z), _config(p, x, y, _dot(z, const(BLANK)))
    return Rule((plain,), padded) if forward else Rule((padded,), plain)


def _move_left(q: str, a: str, target: str, b: str) -> Rule:
    x, y, z = var('x'), var('y'), var('z')
    return Rule((_config(q, _dot(x, y), const(a), z),), _config(target, x, y, _dot(const(b), z)))


def _move_right(q: str, a: str, target: str, b: str) -> Rule:
    x, y, z = var('x'), var('y'), var('z')
    return Rule((_config(q, x, const(a), _dot(y, z)),), _config(target, _dot(x, const(b)), y, z))


def _congruence_rule(op: str, arity: int) -> Rule:
    xs = [var(f"x{i}") for i in range(1, arity + 1)]
    ys = [var(f"y{i}") for i in range(1, arity + 1)]
    premises = tuple(app(ARROW, a, b) for a, b in zip(xs, ys))
    return Rule(premises, app(ARROW, app(op, *xs), app(op, *ys)))


class MachineCalculus(HilbertCalculus):
    """
    The calculus of a machine and an input, with the rule groups kept addressable
    """

    def __init__(self, M: TuringMachine, t: Sequence[str]):
        self.machine = M
        self.input = parse_input(''.join(t))
        self.groups: Dict[str, List[int]] = {}
        sig = encode_language(M)
        rules: List[Rule] = []

        def add(group, rule):
            self.groups.setdefault(group, []).append(len(rules))
            rules.append(rule)

        for (q, a), (target, b, move) in sorted(M.delta.items()):
            if move == 'L':
                add('R1', _move_left(q, a, target, b))
            else:
                add('R2', _move_right(q, a, target, b))
        for p in M.states:
            add('R3', _pad_left(p, True))
            add('R3', _pad_left(p, False))
            add('R4', _pad_right(p, True))
            add('R4', _pad_right(p, False))
        add('R5', Rule((), config_formula(initial_configuration(M, self.input))))
        for p in M.final:
            add('R6', Rule((_dot(const(p), var('y')),), app(ARROW, X, _dot(X, X))))
        add('R7', Rule((), app(ARROW, X, X)))
        add('R8', Rule((X, app(ARROW, X, var('y'))), var('y')))
        for op, arity in CONNECTIVES:
            add('R9', _congruence_rule(op, arity))
        super().__init__(sig, rules)
        self.index = {rule: i for i, rule in enumerate(self.rules)}

    def group_of(self, index: int) -> str:
        for group, members in self.groups.items():
            if index in members:
                return group
        raise KeyError(index)


def encode_calculus(M: TuringMachine, t: Sequence[str]) -> MachineCalculus:
    H = MachineCalculus(M, t)
    logger.info(f"Encoded machine {M.name or '<unnamed>'} into {len(H)} rules")
    return H


# ============ REPLAY ============

class HaltingReplay:
    """
    Rebuilds the proof of x -> (x . x) from a halting run, one rule application per line
    """

    def __init__(self, H: MachineCalculus):
        self.H = H
        self.lines: List[ProofLine] = []
        self.logger = logging.getLogger(__name__)

    def apply(self, rule: Rule, **binding: Formula) -> Formula:
        index = self.H.index[rule]
        current = self.lines[-1].formula if self.lines else None
        if rule.premises:
            found = match(rule.premises[0], current, binding)
            if found is None:
                raise MachineError(f"Rule {rule} does not apply to {to_text(current)}")
            binding = found
        s = Substitution(binding)
        conclusion = apply_substitution(s, rule.conclusion)
        premise_lines = (len(self.lines) - 1,) if rule.premises else ()
        self.lines.append(ProofLine(conclusion, 'rule', index, s, premise_lines))
        return conclusion

    def replay_step(self, c: Configuration, d: Configuration) -> None:
        target, write, move = self.H.machine.delta[(c.state, c.head)]
        if move == 'L':
            near, far, pad_near, pad_far, shift = c.left, c.right, _pad_left, _pad_right, _move_left
        else:
            near, far, pad_near, pad_far, shift = c.right, c.left, _pad_right, _pad_left, _move_right
        if len(near) == 1:
            self.apply(pad_near(c.state, True))
        self.apply(shift(c.state, c.head, target, write))
        if far == (BLANK,):
            self.apply(pad_far(target, False))
        if self.lines[-1].formula != config_formula(d):
            raise MachineError(f"Replay of {c.tape()} -> {d.tape()} ended at {to_text(self.lines[-1].formula)}")

    def replay(self, run: Run) -> Proof:
        groups = self.H.groups
        self.apply(self.H.rules[groups['R5'][0]])
        for c, d in zip(run.configurations, run.configurations[1:]):
            self.replay_step(c, d)
        final = run.configurations[-1].state
        rule = next(self.H.rules[i] for i in groups['R6']
                    if self.H.rules[i].premises[0].args[0].head == final)
        self.apply(rule, x = X)
        return Proof(self.lines)


def demo_halting_derivation(M: TuringMachine, t: Sequence[str], max_steps: int) -> Optional[Proof]:
    run = simulate(M, t, max_steps)
    if not run.halted:
        logger.info(f"Machine did not halt within {max_steps} steps")
        return None
    H = encode_calculus(M, t)
    proof = HaltingReplay(H).replay(run)
    if not check_proof(H, [], proof):
        raise MachineError("Replayed halting proof failed the proof checker")
    logger.info(f"Halting after {run.steps} steps replayed as a {len(proof)}-line proof")
    return proof


def distinct_equivalences(H: MachineCalculus, budget: Optional[Budget] = None) -> List[Formula]:
    """
    Theorems e -> d with e != d found by a bounded saturation from no premises
    """
    result = saturate(H, [], budget, instance_pool = [X])
    found = [f for f in result.order if f.head == ARROW and f.args[0] != f.args[1]]
    logger.info(f"Saturation ({result.status}, {len(result.order)} formulas) found {len(found)} distinct equivalences")
    return found

import os
import sys
import random

import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from finite_algebra import FiniteAlgebra
from matrix_logic import Matrix, MatrixFamily
from problem_file import ProblemFile
from terms import Signature


FIXTURES_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'fixtures')

LATTICE = Signature(operations = (('and', 2), ('or', 2)))
BOX = Signature(operations = (('box', 1),))


def fixture_path(name):
    return os.path.join(FIXTURES_DIR, f"{name}.json")


def load_problem(name):
    return ProblemFile.load(fixture_path(name))


def random_algebra(rng, sig, size):
    """
    Uniformly random constant values and operation tables
    """
    consts = {c: rng.randrange(size) for c in sig.constants}
    tables = {}
    for op, arity in sig.operations:
        def table(depth):
            if depth == 0:
                return rng.randrange(size)
            return [table(depth - 1) for _ in range(size)]
        tables[op] = table(arity)
    return FiniteAlgebra(sig, size, consts, tables)


def random_designated(rng, size):
    return frozenset(e for e in range(size) if rng.random() < 0.5)


# ============ FIXTURE ALGEBRAS ============

@pytest.fixture
def rng():
    return random.Random(20240601)


@pytest.fixture
def d2():
    return FiniteAlgebra(LATTICE, 2, {}, {'and': [[0, 0], [0, 1]], 'or': [[0, 1], [1, 1]]}, name = 'D2')


@pytest.fixture
def d2_family(d2):
    return MatrixFamily([Matrix(d2, frozenset({1}))])


@pytest.fixture
def intro_algebra():
    # elements 0-, 0+, 1
    return FiniteAlgebra(LATTICE, 3, {},
                         {'and': [[1, 1, 1], [1, 0, 1], [1, 1, 2]],
                          'or': [[1, 1, 2], [1, 0, 2], [2, 2, 2]]},
                         ['0-', '0+', '1'], 'A3')


@pytest.fixture
def intro_family(intro_algebra):
    return MatrixFamily([Matrix(intro_algebra, frozenset({2}))])


@pytest.fixture
def b2_family():
    return load_problem('b2').family()


@pytest.fixture
def flip():
    return FiniteAlgebra(BOX, 2, {}, {'box': [1, 0]}, name = 'FLIP')


@pytest.fixture
def flip_family(flip):
    return MatrixFamily([Matrix(flip, frozenset({1}))])


@pytest.fixture
def identity_box_family():
    A = FiniteAlgebra(BOX, 2, {}, {'box': [0, 1]}, name = 'ID')
    return MatrixFamily([Matrix(A, frozenset({1}))])


@pytest.fixture
def three_cycle():
    return FiniteAlgebra(BOX, 3, {}, {'box': [1, 2, 0]}, name = 'C3')


@pytest.fixture
def constants_only_family():
    sig = Signature(constants = ('c0', 'c1'))
    A = FiniteAlgebra(sig, 2, {'c0': 0, 'c1': 1}, {}, name = 'T')
    return MatrixFamily([Matrix(A, frozenset({1}))])

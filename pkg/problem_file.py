import json
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional

from equational_semantics import TauSet, WitnessError
from finite_algebra import AlgebraError, Congruence, FiniteAlgebra
from hilbert import HilbertCalculus
from matrix_logic import Matrix, MatrixFamily
from terms import ParseError, Signature, SignatureError


logger = logging.getLogger(__name__)


class ProblemFileError(ValueError):
    pass


class ProblemFile:
    """
    Signature, named algebras, matrices over them, and optional calculus and tau
    """

    def __init__(self, data: Mapping, source: str = '<memory>'):
        self.source = source
        self.data = dict(data)
        self.name = data.get('name', source)
        try:
            self.sig = Signature.from_dict(data.get('signature', {}))
            self.algebras: Dict[str, FiniteAlgebra] = {
                name: FiniteAlgebra.from_dict(self.sig, block, name)
                for name, block in data.get('algebras', {}).items()}
            self.matrices = [self._matrix(entry) for entry in data.get('matrices', [])]
            self.calculus = (HilbertCalculus.from_dict(self.sig, data['calculus'])
                             if data.get('calculus') is not None else None)
            tau = data.get('tau')
            if isinstance(tau, list):
                tau = '; '.join(tau)
            self.tau = TauSet.parse(tau, self.sig) if tau else None
        except (SignatureError, ParseError, AlgebraError, WitnessError) as e:
            raise ProblemFileError(f"{source}: {e}")
        except (KeyError, TypeError, AttributeError) as e:
            raise ProblemFileError(f"{source}: malformed problem file ({e!r})")

    def _matrix(self, entry: Mapping) -> Matrix:
        name = entry.get('algebra')
        if name not in self.algebras:
            raise ProblemFileError(f"{self.source}: matrix refers to unknown algebra {name!r}")
        A = self.algebras[name]
        return Matrix(A, frozenset(A.index_of(e) for e in entry.get('designated', [])))

    @classmethod
    def load(cls, path: str) -> 'ProblemFile':
        try:
            with open(path, 'r') as handle:
                data = json.load(handle)
        except OSError as e:
            raise ProblemFileError(f"Cannot read problem file {path}: {e}")
        except json.JSONDecodeError as e:
            raise ProblemFileError(f"{path} is not valid JSON: {e}")
        if not isinstance(data, dict):
            raise ProblemFileError(f"{path}: top level must be an object")
        logger.debug(f"Loaded problem file {path}")
        return cls(data, path)

    def family(self) -> MatrixFamily:
        if not self.matrices:
            raise ProblemFileError(f"{self.source}: no matrices given")
        return MatrixFamily(self.matrices, self.sig)

    def algebra(self, name: Optional[str] = None) -> FiniteAlgebra:
        if name is None:
            if len(self.algebras) != 1:
                raise ProblemFileError(f"{self.source}: name one of the algebras {sorted(self.algebras)}")
            return next(iter(self.algebras.values()))
        if name not in self.algebras:
            raise ProblemFileError(f"{self.source}: unknown algebra {name!r}")
        return self.algebras[name]

    def matrix(self, name: Optional[str] = None) -> Matrix:
        if name is None:
            if len(self.matrices) != 1:
                raise ProblemFileError(f"{self.source}: name the algebra of one of the {len(self.matrices)} matrices")
            return self.matrices[0]
        for m in self.matrices:
            if m.algebra.name == name:
                return m
        raise ProblemFileError(f"{self.source}: no matrix over algebra {name!r}")

    def to_dict(self) -> dict:
        data = {'name': self.name, 'signature': self.sig.to_dict(),
                'algebras': {name: A.to_dict() for name, A in self.algebras.items()},
                'matrices': [{'algebra': m.algebra.name,
                              'designated': [m.algebra.label(e) for e in sorted(m.designated)]}
                             for m in self.matrices]}
        if self.calculus is not None:
            data['calculus'] = self.calculus.to_list()
        if self.tau is not None:
            data['tau'] = self.tau.to_list()
        return data


# ============ SERIALISATION ============

def congruence_to_dict(A: FiniteAlgebra, c: Congruence) -> dict:
    return {'blocks': c.to_labels(A),
            'identity': c.is_identity()}


def elements_to_list(A: FiniteAlgebra, elements: Iterable[int]) -> List[str]:
    return [A.label(e) for e in sorted(elements)]


@dataclass
class Report:
    command: str
    problem: str
    result: dict
    answer: Optional[str] = None                # 'yes', 'no', 'inconclusive' or None for plain checks
    timing: Optional[float] = None
    extra: dict = field(default_factory = dict)

    def to_dict(self) -> dict:
        data = {'command': self.command, 'problem': self.problem, 'result': self.result}
        if self.answer is not None:
            data['answer'] = self.answer
        data.update(self.extra)
        if self.timing is not None:
            data['timing'] = round(self.timing, 4)
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent = 2, sort_keys = True, default = str)

    def save(self, path: str) -> bool:
        try:
            with open(path, 'w') as handle:
                handle.write(self.to_json())
                handle.write('\n')
            logger.info(f"Report written to {path}")
            return True
        except OSError as e:
            logger.error(f"Error writing report to {path}: {e}")
            return False

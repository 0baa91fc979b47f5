'''Exact rational scalars, vectors and matrices.

Every number in lctdv is a ``fractions.Fraction``; floats are rejected at the
boundary so nothing downstream can silently lose exactness.
'''

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, List, Sequence, Tuple, Union

from lctdv.errors import DimensionMismatch, NotSymmetric, ParseError, SingularMatrix

Rational = Fraction
Number = Union[int, Fraction, str]

_RATIONAL_RE = re.compile(r'^(-?\d+)(?:/(\d+))?$')


def parse_rational(text: str) -> Fraction:
    '''Parse ``p`` or ``p/q``; anything else (floats included) is a ParseError.'''
    token = text.strip()
    match = _RATIONAL_RE.match(token)
    if match is None:
        raise ParseError(f"not a rational number: {text!r}")
    numerator, denominator = match.groups()
    if denominator is not None and int(denominator) == 0:
        raise ParseError(f"zero denominator in {text!r}")
    return Fraction(int(numerator), int(denominator or 1))


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def to_rational(value: Number) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"refusing inexact value {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"cannot convert {type(value).__name__} to a rational")


@dataclass(frozen=True)
class QVector:
    entries: Tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, 'entries', tuple(to_rational(x) for x in self.entries))

    @classmethod
    def of(cls, values: Iterable[Number]) -> 'QVector':
        return cls(tuple(values))

    @classmethod
    def zeros(cls, n: int) -> 'QVector':
        return cls(tuple(Fraction(0) for _ in range(n)))

    @classmethod
    def unit(cls, n: int, i: int) -> 'QVector':
        return cls(tuple(Fraction(int(j == i)) for j in range(n)))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def _check(self, other: 'QVector'):
        if len(other) != len(self):
            raise DimensionMismatch(f"vector lengths {len(self)} and {len(other)} differ")

    def __add__(self, other: 'QVector') -> 'QVector':
        self._check(other)
        return QVector(tuple(x + y for x, y in zip(self.entries, other.entries)))

    def __sub__(self, other: 'QVector') -> 'QVector':
        self._check(other)
        return QVector(tuple(x - y for x, y in zip(self.entries, other.entries)))

    def __neg__(self) -> 'QVector':
        return QVector(tuple(-x for x in self.entries))

    def scale(self, factor: Number) -> 'QVector':
        factor = to_rational(factor)
        return QVector(tuple(factor * x for x in self.entries))

    def dot(self, other: 'QVector') -> Fraction:
        self._check(other)
        return sum((x * y for x, y in zip(self.entries, other.entries)), Fraction(0))

    def __str__(self) -> str:
        return ' '.join(format_rational(x) for x in self.entries)


@dataclass(frozen=True)
class QMatrix:
    rows: Tuple[QVector, ...]

    def __post_init__(self):
        rows = tuple(r if isinstance(r, QVector) else QVector(tuple(r)) for r in self.rows)
        widths = {len(r) for r in rows}
        if len(widths) > 1:
            raise DimensionMismatch(f"ragged matrix with row lengths {sorted(widths)}")
        object.__setattr__(self, 'rows', rows)

    @classmethod
    def of(cls, rows: Iterable[Iterable[Number]]) -> 'QMatrix':
        return cls(tuple(QVector(tuple(r)) for r in rows))

    @classmethod
    def identity(cls, n: int) -> 'QMatrix':
        return cls(tuple(QVector.unit(n, i) for i in range(n)))

    @classmethod
    def block_diagonal(cls, blocks: Sequence['QMatrix']) -> 'QMatrix':
        size = sum(b.nrows for b in blocks)
        rows: List[List[Fraction]] = []
        offset = 0
        for block in blocks:
            for r in block.rows:
                row = [Fraction(0)] * size
                row[offset:offset + block.ncols] = r.entries
                rows.append(row)
            offset += block.ncols
        return cls.of(rows)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    @property
    def shape(self) -> Tuple[int, int]:
        return self.nrows, self.ncols

    def __getitem__(self, index: Tuple[int, int]) -> Fraction:
        i, j = index
        return self.rows[i][j]

    def column(self, j: int) -> QVector:
        return QVector(tuple(r[j] for r in self.rows))

    def transpose(self) -> 'QMatrix':
        return QMatrix(tuple(self.column(j) for j in range(self.ncols)))

    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def is_symmetric(self) -> bool:
        return self.is_square() and all(
            self[i, j] == self[j, i] for i in range(self.nrows) for j in range(i + 1, self.ncols)
        )

    def __neg__(self) -> 'QMatrix':
        return QMatrix(tuple(-r for r in self.rows))

    def matvec(self, v: QVector) -> QVector:
        if len(v) != self.ncols:
            raise DimensionMismatch(f"matrix has {self.ncols} columns, vector has {len(v)} entries")
        return QVector(tuple(r.dot(v) for r in self.rows))

    def matmul(self, other: 'QMatrix') -> 'QMatrix':
        if self.ncols != other.nrows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        columns = [other.column(j) for j in range(other.ncols)]
        return QMatrix(tuple(QVector(tuple(r.dot(c) for c in columns)) for r in self.rows))

    def leading(self, k: int) -> 'QMatrix':
        return QMatrix(tuple(QVector(r.entries[:k]) for r in self.rows[:k]))

    def to_lists(self) -> List[List[Fraction]]:
        return [list(r.entries) for r in self.rows]


def _eliminate(A: QMatrix, b: QVector):
    '''Forward elimination with the first nonzero pivot; returns (U, c, det).'''
    n = A.nrows
    work = A.to_lists()
    rhs = list(b.entries)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if work[r][col] != 0), None)
        if pivot is None:
            return work, rhs, Fraction(0)
        if pivot != col:
            work[col], work[pivot] = work[pivot], work[col]
            rhs[col], rhs[pivot] = rhs[pivot], rhs[col]
            det = -det
        det *= work[col][col]
        for r in range(col + 1, n):
            factor = work[r][col] / work[col][col]
            if factor == 0:
                continue
            for c in range(col, n):
                work[r][c] -= factor * work[col][c]
            rhs[r] -= factor * rhs[col]
    return work, rhs, det


def determinant(A: QMatrix) -> Fraction:
    if not A.is_square():
        raise DimensionMismatch(f"determinant of non-square {A.shape} matrix")
    if A.nrows == 0:
        return Fraction(1)
    _, _, det = _eliminate(A, QVector.zeros(A.nrows))
    return det


def solve_linear(A: QMatrix, b: QVector) -> QVector:
    '''The unique exact solution of A·x = b.'''
    if not A.is_square():
        raise DimensionMismatch(f"solve_linear needs a square matrix, got {A.shape}")
    if len(b) != A.nrows:
        raise DimensionMismatch(f"right-hand side has {len(b)} entries, matrix has {A.nrows} rows")
    upper, rhs, det = _eliminate(A, b)
    if det == 0:
        raise SingularMatrix(f"{A.nrows}x{A.ncols} matrix is singular")
    n = A.nrows
    x = [Fraction(0)] * n
    for i in reversed(range(n)):
        acc = rhs[i] - sum((upper[i][j] * x[j] for j in range(i + 1, n)), Fraction(0))
        x[i] = acc / upper[i][i]
    return QVector(tuple(x))


def inverse_matrix(A: QMatrix) -> QMatrix:
    n = A.nrows
    columns = [solve_linear(A, QVector.unit(n, j)) for j in range(n)]
    return QMatrix(tuple(columns)).transpose()


def is_negative_definite(A: QMatrix) -> bool:
    '''Sylvester's criterion on −A.'''
    if not A.is_symmetric():
        raise NotSymmetric(f"{A.shape} matrix is not symmetric")
    negated = -A
    return all(determinant(negated.leading(k)) > 0 for k in range(1, A.nrows + 1))

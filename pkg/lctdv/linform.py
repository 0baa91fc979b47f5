'''Linear forms and constraint systems over named rational variables.'''

import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Tuple

from lctdv.errors import UnknownVariable
from lctdv.exactlin import Number, format_rational, to_rational

_NAME_RE = re.compile(r'^(.*?)(\d*)$')


def variable_key(name: str) -> Tuple[str, int, str]:
    '''Natural ordering: a2 before a10, a* before b* before m*.'''
    prefix, digits = _NAME_RE.match(name).groups()
    return prefix, int(digits) if digits else -1, name


@dataclass(frozen=True)
class LinForm:
    terms: Tuple[Tuple[str, Fraction], ...] = ()
    constant: Fraction = Fraction(0)

    def __post_init__(self):
        merged: Dict[str, Fraction] = {}
        for name, coeff in self.terms:
            merged[name] = merged.get(name, Fraction(0)) + to_rational(coeff)
        terms = tuple(
            (name, merged[name]) for name in sorted(merged, key=variable_key) if merged[name] != 0
        )
        object.__setattr__(self, 'terms', terms)
        object.__setattr__(self, 'constant', to_rational(self.constant))

    @classmethod
    def of(cls, coeffs: Optional[Mapping[str, Number]] = None, constant: Number = 0) -> 'LinForm':
        return cls(tuple((coeffs or {}).items()), to_rational(constant))

    @classmethod
    def var(cls, name: str, coeff: Number = 1) -> 'LinForm':
        return cls(((name, to_rational(coeff)),))

    @classmethod
    def const(cls, value: Number) -> 'LinForm':
        return cls((), to_rational(value))

    @property
    def coeffs(self) -> Dict[str, Fraction]:
        return dict(self.terms)

    def coeff(self, name: str) -> Fraction:
        return self.coeffs.get(name, Fraction(0))

    def variables(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.terms)

    def is_constant(self) -> bool:
        return not self.terms

    def _lift(self, other) -> 'LinForm':
        if isinstance(other, LinForm):
            return other
        return LinForm.const(other)

    def __add__(self, other) -> 'LinForm':
        other = self._lift(other)
        return LinForm(self.terms + other.terms, self.constant + other.constant)

    __radd__ = __add__

    def __neg__(self) -> 'LinForm':
        return LinForm(tuple((n, -c) for n, c in self.terms), -self.constant)

    def __sub__(self, other) -> 'LinForm':
        return self + (-self._lift(other))

    def __rsub__(self, other) -> 'LinForm':
        return self._lift(other) - self

    def __mul__(self, factor: Number) -> 'LinForm':
        factor = to_rational(factor)
        return LinForm(tuple((n, c * factor) for n, c in self.terms), self.constant * factor)

    __rmul__ = __mul__

    def evaluate(self, point: Mapping[str, Fraction]) -> Fraction:
        return self.constant + sum(
            (c * to_rational(point.get(n, 0)) for n, c in self.terms), Fraction(0)
        )

    def substitute(self, name: str, replacement: 'LinForm') -> 'LinForm':
        coeff = self.coeff(name)
        if coeff == 0:
            return self
        rest = LinForm(tuple((n, c) for n, c in self.terms if n != name), self.constant)
        return rest + replacement * coeff

    def rename(self, mapping: Mapping[str, str]) -> 'LinForm':
        return LinForm(tuple((mapping.get(n, n), c) for n, c in self.terms), self.constant)

    def __str__(self) -> str:
        parts = [f"{format_rational(c)}*{n}" for n, c in self.terms]
        parts.append(format_rational(self.constant))
        return ' + '.join(parts)


class Relation(str, Enum):
    GE = '>='
    GT = '>'
    EQ = '='

    @property
    def strict(self) -> bool:
        return self is Relation.GT


@dataclass(frozen=True)
class Constraint:
    '''``form`` related to zero.'''
    form: LinForm
    relation: Relation = Relation.GE
    label: str = field(default='', compare=False)

    def holds_at(self, point: Mapping[str, Fraction]) -> bool:
        value = self.form.evaluate(point)
        if self.relation is Relation.GE:
            return value >= 0
        if self.relation is Relation.GT:
            return value > 0
        return value == 0

    def variables(self) -> Tuple[str, ...]:
        return self.form.variables()

    def closure(self) -> 'Constraint':
        if self.relation is Relation.GT:
            return Constraint(self.form, Relation.GE, self.label)
        return self

    def labelled(self, label: str) -> 'Constraint':
        return Constraint(self.form, self.relation, label)

    def __str__(self) -> str:
        return f"{self.form} {self.relation.value} 0"


def ge(lhs, rhs: Number | LinForm = 0, label: str = '') -> Constraint:
    '''lhs >= rhs'''
    return Constraint(LinForm.const(0) + lhs - rhs, Relation.GE, label)


def gt(lhs, rhs: Number | LinForm = 0, label: str = '') -> Constraint:
    '''lhs > rhs'''
    return Constraint(LinForm.const(0) + lhs - rhs, Relation.GT, label)


def eq(lhs, rhs: Number | LinForm = 0, label: str = '') -> Constraint:
    return Constraint(LinForm.const(0) + lhs - rhs, Relation.EQ, label)


@dataclass(frozen=True)
class ConstraintSystem:
    variables: Tuple[str, ...] = ()
    constraints: Tuple[Constraint, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'variables', tuple(dict.fromkeys(self.variables)))
        object.__setattr__(self, 'constraints', tuple(self.constraints))
        declared = set(self.variables)
        for constraint in self.constraints:
            unknown = [n for n in constraint.variables() if n not in declared]
            if unknown:
                raise UnknownVariable(f"constraint '{constraint}' uses undeclared {unknown}")

    def __len__(self) -> int:
        return len(self.constraints)

    def __iter__(self):
        return iter(self.constraints)

    def add(self, *constraints: Constraint) -> 'ConstraintSystem':
        return ConstraintSystem(self.variables, self.constraints + tuple(constraints))

    def extend(self, constraints: Iterable[Constraint]) -> 'ConstraintSystem':
        return self.add(*constraints)

    def with_variables(self, *names: str) -> 'ConstraintSystem':
        return ConstraintSystem(self.variables + tuple(names), self.constraints)

    def has_strict(self) -> bool:
        return any(c.relation.strict for c in self.constraints)

    def closure(self) -> 'ConstraintSystem':
        return ConstraintSystem(self.variables, tuple(c.closure() for c in self.constraints))

    def satisfied_by(self, point: Mapping[str, Fraction]) -> bool:
        return all(c.holds_at(point) for c in self.constraints)

    def fresh_variable(self, stem: str) -> str:
        name, n = stem, 0
        while name in self.variables:
            n += 1
            name = f"{stem}{n}"
        return name

'''Fourier–Motzkin elimination with strictness and Chernikov pruning.

Used as the independent oracle for the simplex engine and for printing
projections of coefficient polytopes.
'''

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from lctdv.errors import UnknownVariable
from lctdv.linform import Constraint, ConstraintSystem, LinForm, Relation, variable_key

logger = logging.getLogger(__name__)

Tracked = Tuple[Constraint, FrozenSet[int]]


def normalize(constraint: Constraint) -> Constraint:
    '''Scale so the first coefficient has absolute value 1 (positive for equalities).'''
    form = constraint.form
    if form.is_constant():
        c = form.constant
        if constraint.relation is Relation.EQ:
            return Constraint(LinForm.const(0 if c == 0 else 1), Relation.EQ, constraint.label)
        return Constraint(LinForm.const((c > 0) - (c < 0)), constraint.relation, constraint.label)
    lead = form.terms[0][1]
    scale = 1 / abs(lead)
    if constraint.relation is Relation.EQ and lead < 0:
        scale = -scale
    return Constraint(form * scale, constraint.relation, constraint.label)


def is_trivial(constraint: Constraint) -> bool:
    '''A variable-free constraint that always holds.'''
    if not constraint.form.is_constant():
        return False
    return constraint.holds_at({})


def _dedupe(rows: Iterable[Tracked]) -> List[Tracked]:
    best: Dict[Tuple[LinForm, bool], Tracked] = {}
    order: List[Tuple[LinForm, bool]] = []
    for constraint, history in rows:
        constraint = normalize(constraint)
        if is_trivial(constraint):
            continue
        key = (constraint.form, constraint.relation is Relation.EQ)
        if key not in best:
            best[key] = (constraint, history)
            order.append(key)
            continue
        kept, kept_history = best[key]
        if constraint.relation is Relation.GT and kept.relation is Relation.GE:
            best[key] = (constraint, history)
        elif constraint.relation == kept.relation and len(history) < len(kept_history):
            best[key] = (constraint, history)
    return [best[k] for k in order]


def _eliminate_tracked(rows: Sequence[Tracked], name: str, steps: int) -> List[Tracked]:
    for index, (constraint, history) in enumerate(rows):
        if constraint.relation is Relation.EQ and constraint.form.coeff(name) != 0:
            coeff = constraint.form.coeff(name)
            replacement = (constraint.form - LinForm.var(name, coeff)) * (-1 / coeff)
            out = []
            for j, (other, other_history) in enumerate(rows):
                if j == index:
                    continue
                form = other.form.substitute(name, replacement)
                out.append((Constraint(form, other.relation), other_history))
            return _dedupe(out)
    upper, lower, rest = [], [], []
    for constraint, history in rows:
        coeff = constraint.form.coeff(name)
        if coeff > 0:
            lower.append((constraint, history))
        elif coeff < 0:
            upper.append((constraint, history))
        else:
            rest.append((constraint, history))
    combined = list(rest)
    for low, low_history in lower:
        p = low.form.coeff(name)
        for up, up_history in upper:
            n = -up.form.coeff(name)
            history = low_history | up_history
            strict = low.relation.strict or up.relation.strict
            # Chernikov: a non-strict combination of more than steps + 1 originals is redundant
            if not strict and len(history) > steps + 1:
                continue
            form = low.form * n + up.form * p
            combined.append((Constraint(form, Relation.GT if strict else Relation.GE), history))
    return _dedupe(combined)


def eliminate(system: ConstraintSystem, name: str) -> ConstraintSystem:
    if name not in system.variables:
        raise UnknownVariable(f"cannot eliminate undeclared variable {name}")
    rows = [(c, frozenset([i])) for i, c in enumerate(system.constraints)]
    remaining = tuple(v for v in system.variables if v != name)
    if not any(c.form.coeff(name) for c in system.constraints):
        return ConstraintSystem(remaining, system.constraints)
    projected = _eliminate_tracked(rows, name, 1)
    return ConstraintSystem(remaining, tuple(c for c, _ in projected))


def _cost(rows: Sequence[Tracked], name: str) -> Tuple[int, Tuple]:
    if any(c.relation is Relation.EQ and c.form.coeff(name) for c, _ in rows):
        return -1, variable_key(name)
    pos = sum(1 for c, _ in rows if c.form.coeff(name) > 0)
    neg = sum(1 for c, _ in rows if c.form.coeff(name) < 0)
    return pos * neg - pos - neg, variable_key(name)


def project(system: ConstraintSystem, keep: Iterable[str]) -> ConstraintSystem:
    '''Eliminate every variable not in ``keep``, cheapest first.'''
    keep = [v for v in system.variables if v in set(keep)]
    rows: List[Tracked] = [(c, frozenset([i])) for i, c in enumerate(system.constraints)]
    rows = _dedupe(rows)
    todo = [v for v in system.variables if v not in keep]
    steps = 0
    while todo:
        name = min(todo, key=lambda v: _cost(rows, v))
        todo.remove(name)
        steps += 1
        rows = _eliminate_tracked(rows, name, steps)
        logger.debug(f"eliminated {name}: {len(rows)} constraints remain")
    return ConstraintSystem(tuple(keep), tuple(c for c, _ in rows))


@dataclass(frozen=True)
class Interval:
    '''Projection of a polyhedron onto one line.'''
    feasible: bool
    lower: Optional[Fraction] = None
    lower_strict: bool = False
    upper: Optional[Fraction] = None
    upper_strict: bool = False


def interval_of(system: ConstraintSystem, name: str) -> Interval:
    '''Read the bounds of ``name`` off a system already projected onto it.'''
    lower, lower_strict, upper, upper_strict = None, False, None, False
    for constraint in system.constraints:
        form = constraint.form
        if form.is_constant():
            if not constraint.holds_at({}):
                return Interval(False)
            continue
        coeff = form.coeff(name)
        value = -form.constant / coeff
        strict = constraint.relation.strict
        if constraint.relation is Relation.EQ or coeff > 0:
            if lower is None or value > lower or (value == lower and strict):
                lower, lower_strict = value, strict
        if constraint.relation is Relation.EQ or coeff < 0:
            if upper is None or value < upper or (value == upper and strict):
                upper, upper_strict = value, strict
    if lower is not None and upper is not None:
        if lower > upper or (lower == upper and (lower_strict or upper_strict)):
            return Interval(False)
    return Interval(True, lower, lower_strict, upper, upper_strict)


def fm_bound(system: ConstraintSystem, form: LinForm) -> Interval:
    '''Range of ``form`` over ``system``, by projection.'''
    target = system.fresh_variable('_value')
    extended = system.with_variables(target).add(
        Constraint(LinForm.var(target) - form, Relation.EQ)
    )
    return interval_of(project(extended, [target]), target)

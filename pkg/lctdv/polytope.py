'''Feasibility, optimization, implication and Farkas certificates.

Strict inequalities are handled by maximizing a slack ``t`` shared by every
strict constraint (f - t >= 0, t <= 1): the system is feasible iff the
optimum is positive. Infeasibility is always backed by a certificate found
from the alternative system and re-checked by ``verify_certificate``.
'''

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from lctdv.errors import IndexOutOfRange, UnknownVariable
from lctdv.exactlin import format_rational
from lctdv.fourier_motzkin import eliminate, fm_bound, interval_of, project
from lctdv.linform import Constraint, ConstraintSystem, LinForm, Relation
from lctdv.parsing import parse_constraint
from lctdv.simplex import LPStatus, solve_lp

logger = logging.getLogger(__name__)

__all__ = [
    'Conclusion', 'FarkasCertificate', 'Feasibility', 'BoundResult', 'Sense',
    'is_feasible', 'bound', 'implied', 'negations', 'eliminate', 'project', 'fm_bound',
    'interval_of', 'verify_certificate', 'dump_system', 'load_system',
]


class Conclusion(str, Enum):
    ZERO_GT_ZERO = '0 > 0'
    ZERO_GE_EPS = '0 ≥ ε > 0'
    NEGATIVE_GE_ZERO = 'negative ≥ 0'


class Sense(str, Enum):
    MAX = 'MAX'
    MIN = 'MIN'


@dataclass(frozen=True)
class FarkasCertificate:
    '''Multipliers (constraint index, weight); equality rows may take either sign.'''
    multipliers: Tuple[Tuple[int, Fraction], ...]
    conclusion: Conclusion

    def describe(self, system: ConstraintSystem) -> str:
        parts = [f"{format_rational(w)}*[{system.constraints[i]}]" for i, w in self.multipliers]
        return ' + '.join(parts) + f"  =>  {self.conclusion.value}"


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    witness: Optional[Dict[str, Fraction]] = None
    certificate: Optional[FarkasCertificate] = None

    def __bool__(self) -> bool:
        return self.feasible


@dataclass(frozen=True)
class BoundResult:
    status: LPStatus
    value: Optional[Fraction] = None
    witness: Optional[Dict[str, Fraction]] = field(default=None, compare=False)
    attained: bool = True


def _check_form(system: ConstraintSystem, form: LinForm):
    unknown = [v for v in form.variables() if v not in system.variables]
    if unknown:
        raise UnknownVariable(f"form '{form}' uses undeclared {unknown}")


def _farkas(system: ConstraintSystem) -> FarkasCertificate:
    '''Solve the alternative system for a contradiction.

    y_i >= 0 on inequality rows, sum y_i g_i = 0, sum y_i c_i <= 0 and
    sum_strict y_i - sum y_i c_i >= 1.
    '''
    names = [f"y{i}" for i in range(len(system.constraints))]
    rows: List[Constraint] = []
    for name, constraint in zip(names, system.constraints):
        if constraint.relation is not Relation.EQ:
            rows.append(Constraint(LinForm.var(name), Relation.GE))
    for variable in system.variables:
        combo = LinForm.of({
            n: c.form.coeff(variable) for n, c in zip(names, system.constraints)
        })
        if not combo.is_constant():
            rows.append(Constraint(combo, Relation.EQ))
    constants = LinForm.of({n: c.form.constant for n, c in zip(names, system.constraints)})
    rows.append(Constraint(-constants, Relation.GE))
    strict = LinForm.of({n: 1 for n, c in zip(names, system.constraints) if c.relation.strict})
    rows.append(Constraint(strict - constants - 1, Relation.GE))
    alternative = ConstraintSystem(tuple(names), tuple(rows))
    result = solve_lp(alternative, LinForm())
    if result.status is not LPStatus.OPTIMAL:
        raise RuntimeError('alternative system infeasible for an infeasible system')
    y = result.point
    multipliers = tuple((i, y[n]) for i, n in enumerate(names) if y[n] != 0)
    total = constants.evaluate(y)
    conclusion = Conclusion.NEGATIVE_GE_ZERO if total < 0 else Conclusion.ZERO_GT_ZERO
    return FarkasCertificate(multipliers, conclusion)


def is_feasible(system: ConstraintSystem) -> Feasibility:
    if not system.has_strict():
        result = solve_lp(system, LinForm())
        if result.status is LPStatus.OPTIMAL:
            return Feasibility(True, witness=result.point)
        return Feasibility(False, certificate=_farkas(system))
    slack = system.fresh_variable('_t')
    rows = [
        Constraint(c.form - LinForm.var(slack), Relation.GE) if c.relation.strict else c
        for c in system.constraints
    ]
    rows.append(Constraint(1 - LinForm.var(slack), Relation.GE))
    relaxed = ConstraintSystem(system.variables + (slack,), tuple(rows))
    result = solve_lp(relaxed, LinForm.var(slack))
    if result.status is LPStatus.OPTIMAL and result.value > 0:
        witness = {v: result.point[v] for v in system.variables}
        return Feasibility(True, witness=witness)
    return Feasibility(False, certificate=_farkas(system))


def bound(system: ConstraintSystem, form: LinForm, sense: Sense = Sense.MAX) -> BoundResult:
    '''Optimum of ``form`` over the closure of a feasible system.'''
    _check_form(system, form)
    feasibility = is_feasible(system)
    if not feasibility:
        return BoundResult(LPStatus.INFEASIBLE)
    objective = form if sense is Sense.MAX else -form
    result = solve_lp(system, objective)
    if result.status is LPStatus.UNBOUNDED:
        return BoundResult(LPStatus.UNBOUNDED)
    value = result.value if sense is Sense.MAX else -result.value
    return BoundResult(LPStatus.OPTIMAL, value, result.point, system.satisfied_by(result.point))


def negations(constraint: Constraint) -> List[Constraint]:
    '''The alternatives whose joint infeasibility with a system proves ``constraint``.'''
    form = constraint.form
    if constraint.relation is Relation.GE:
        return [Constraint(-form, Relation.GT)]
    if constraint.relation is Relation.GT:
        return [Constraint(-form, Relation.GE)]
    return [Constraint(form, Relation.GT), Constraint(-form, Relation.GT)]


def implied(system: ConstraintSystem, constraint: Constraint) -> bool:
    _check_form(system, constraint.form)
    return all(not is_feasible(system.add(n)) for n in negations(constraint))


def verify_certificate(system: ConstraintSystem, certificate: FarkasCertificate) -> bool:
    '''Recompute the combination from scratch and check its contradiction.'''
    combination = LinForm()
    strict_weight = Fraction(0)
    if not certificate.multipliers:
        return False
    for index, weight in certificate.multipliers:
        if not 0 <= index < len(system.constraints):
            raise IndexOutOfRange(f"certificate refers to constraint {index} of {len(system)}")
        constraint = system.constraints[index]
        if constraint.relation is not Relation.EQ and weight < 0:
            return False
        if constraint.relation.strict:
            strict_weight += weight
        combination = combination + constraint.form * weight
    if not combination.is_constant():
        return False
    total = combination.constant
    if certificate.conclusion is Conclusion.NEGATIVE_GE_ZERO:
        return total < 0
    if certificate.conclusion is Conclusion.ZERO_GT_ZERO:
        return total <= 0 and strict_weight > 0
    return total < 0 or (total == 0 and strict_weight > 0)


def dump_system(system: ConstraintSystem) -> str:
    lines = [f"# variables: {' '.join(system.variables)}"]
    lines.extend(str(c) for c in system.constraints)
    return '\n'.join(lines) + '\n'


def load_system(text: str) -> ConstraintSystem:
    variables: List[str] = []
    constraints: List[Constraint] = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith('#'):
            if line[1:].strip().startswith('variables:'):
                variables.extend(line.split(':', 1)[1].split())
            continue
        constraints.append(parse_constraint(line))
    for constraint in constraints:
        variables.extend(v for v in constraint.variables() if v not in variables)
    return ConstraintSystem(tuple(variables), tuple(constraints))

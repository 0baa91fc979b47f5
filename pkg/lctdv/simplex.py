'''Exact two-phase simplex over Fractions.

Rows are sparse ``{column: coefficient}`` dicts. Pivoting follows Bland's
rule (lowest entering column, lowest leaving basic column on ratio ties), so
results are reproducible. Strict constraints are read as their closure; the
callers in lctdv.polytope deal with strictness.
'''

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from lctdv.linform import ConstraintSystem, LinForm, Relation

logger = logging.getLogger(__name__)

Row = Dict[int, Fraction]


class LPStatus(str, Enum):
    OPTIMAL = 'optimal'
    UNBOUNDED = 'unbounded'
    INFEASIBLE = 'infeasible'


@dataclass(frozen=True)
class LPResult:
    status: LPStatus
    value: Optional[Fraction] = None
    point: Optional[Dict[str, Fraction]] = None


def _sign_constrained(system: ConstraintSystem) -> set:
    '''Variables carrying an explicit ``c*x >= 0`` (c > 0) constraint.'''
    found = set()
    for constraint in system.constraints:
        if constraint.relation is Relation.EQ or constraint.form.constant != 0:
            continue
        terms = constraint.form.terms
        if len(terms) == 1 and terms[0][1] > 0:
            found.add(terms[0][0])
    return found


class SimplexSolver:

    def __init__(self, system: ConstraintSystem):
        self.system = system
        nonneg = _sign_constrained(system)
        # structural columns: (variable, sign)
        self.columns: List[Tuple[str, int]] = []
        for name in system.variables:
            self.columns.append((name, 1))
            if name not in nonneg:
                self.columns.append((name, -1))
        self.n_structural = len(self.columns)
        self.rows: List[Row] = []
        self.rhs: List[Fraction] = []
        self.basis: List[int] = []
        self.artificial_start = 0
        self._build()

    def _build(self):
        index = {}
        for j, (name, sign) in enumerate(self.columns):
            index.setdefault(name, []).append((j, sign))
        next_col = self.n_structural
        pending_artificial = []
        for constraint in self.system.constraints:
            row: Row = {}
            for name, coeff in constraint.form.terms:
                for j, sign in index[name]:
                    row[j] = coeff * sign
            rhs = -constraint.form.constant
            basic = None
            if constraint.relation is Relation.EQ:
                if rhs < 0:
                    row = {j: -v for j, v in row.items()}
                    rhs = -rhs
            else:
                slack = next_col
                next_col += 1
                if rhs <= 0:
                    row = {j: -v for j, v in row.items()}
                    rhs = -rhs
                    row[slack] = Fraction(1)
                    basic = slack
                else:
                    row[slack] = Fraction(-1)
            self.rows.append(row)
            self.rhs.append(rhs)
            self.basis.append(basic if basic is not None else -1)
            if basic is None:
                pending_artificial.append(len(self.rows) - 1)
        self.artificial_start = next_col
        for r in pending_artificial:
            self.rows[r][next_col] = Fraction(1)
            self.basis[r] = next_col
            next_col += 1
        self.n_columns = next_col

    def _pivot(self, obj: Row, obj_rhs: List[Fraction], r: int, c: int):
        row = self.rows[r]
        pivot = row[c]
        if pivot != 1:
            for k in row:
                row[k] = row[k] / pivot
            self.rhs[r] = self.rhs[r] / pivot
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            factor = other.get(c)
            if factor is None:
                continue
            for k, v in row.items():
                value = other.get(k, Fraction(0)) - factor * v
                if value == 0:
                    other.pop(k, None)
                else:
                    other[k] = value
            self.rhs[i] -= factor * self.rhs[r]
        factor = obj.get(c)
        if factor is not None:
            for k, v in row.items():
                value = obj.get(k, Fraction(0)) - factor * v
                if value == 0:
                    obj.pop(k, None)
                else:
                    obj[k] = value
            obj_rhs[0] -= factor * self.rhs[r]
        self.basis[r] = c

    def _optimize(self, obj: Row, obj_rhs: List[Fraction], limit: int) -> LPStatus:
        while True:
            entering = min((j for j, v in obj.items() if v < 0 and j < limit), default=None)
            if entering is None:
                return LPStatus.OPTIMAL
            best = None
            for i, row in enumerate(self.rows):
                a = row.get(entering)
                if a is None or a <= 0:
                    continue
                key = (self.rhs[i] / a, self.basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
            if best is None:
                return LPStatus.UNBOUNDED
            self._pivot(obj, obj_rhs, best[1], entering)

    def _price_out(self, obj: Row, obj_rhs: List[Fraction]):
        for i, b in enumerate(self.basis):
            factor = obj.get(b)
            if not factor:
                continue
            for k, v in self.rows[i].items():
                value = obj.get(k, Fraction(0)) - factor * v
                if value == 0:
                    obj.pop(k, None)
                else:
                    obj[k] = value
            obj_rhs[0] -= factor * self.rhs[i]

    def _phase_one(self) -> bool:
        if self.artificial_start == self.n_columns:
            return True
        obj: Row = {j: Fraction(1) for j in range(self.artificial_start, self.n_columns)}
        obj_rhs = [Fraction(0)]
        self._price_out(obj, obj_rhs)
        self._optimize(obj, obj_rhs, self.n_columns)
        if obj_rhs[0] < 0:
            return False
        for r in range(len(self.rows) - 1, -1, -1):
            if self.basis[r] < self.artificial_start:
                continue
            replacement = min(
                (k for k in self.rows[r] if k < self.artificial_start), default=None
            )
            if replacement is None:
                # redundant row
                del self.rows[r]
                del self.rhs[r]
                del self.basis[r]
                continue
            self._pivot({}, [Fraction(0)], r, replacement)
        for row in self.rows:
            for k in [k for k in row if k >= self.artificial_start]:
                del row[k]
        return True

    def _point(self) -> Dict[str, Fraction]:
        values = [Fraction(0)] * self.n_structural
        for i, b in enumerate(self.basis):
            if b < self.n_structural:
                values[b] = self.rhs[i]
        point = {name: Fraction(0) for name in self.system.variables}
        for j, (name, sign) in enumerate(self.columns):
            point[name] += sign * values[j]
        return point

    def maximize(self, objective: LinForm) -> LPResult:
        if not self._phase_one():
            return LPResult(LPStatus.INFEASIBLE)
        index = {}
        for j, (name, sign) in enumerate(self.columns):
            index.setdefault(name, []).append((j, sign))
        obj: Row = {}
        for name, coeff in objective.terms:
            for j, sign in index[name]:
                obj[j] = -coeff * sign
        obj_rhs = [Fraction(0)]
        self._price_out(obj, obj_rhs)
        status = self._optimize(obj, obj_rhs, self.artificial_start)
        if status is LPStatus.UNBOUNDED:
            return LPResult(LPStatus.UNBOUNDED)
        point = self._point()
        return LPResult(LPStatus.OPTIMAL, objective.evaluate(point), point)


def solve_lp(system: ConstraintSystem, objective: LinForm) -> LPResult:
    '''Maximize ``objective`` over the closure of ``system``.'''
    result = SimplexSolver(system).maximize(objective)
    logger.debug(f"lp over {len(system)} constraints: {result.status.value} {result.value}")
    return result

'''Towers of point blow-ups over the minimal resolution.

Each curve carries its multiplicity m in the pulled-back boundary and its
discrepancy a (coefficient in K_Y − π*K_X). Once every relevant point is
simple normal crossings, lct of the pair is min (a + 1)/m over curves with
m > 0.
'''

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

from lctdv.errors import BudgetExceeded, InconsistentTangency, NoCandidates, UnknownCurve, UnknownPoint, ZeroDivisor
from lctdv.exactlin import format_rational
from lctdv.linform import LinForm
from lctdv.surface import DivisorClass, Membership, PointDecl, SurfaceConfig, candidates

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 32


@dataclass(frozen=True)
class PointSpec:
    incident: FrozenSet[str]
    tangency: Tuple[Tuple[FrozenSet[str], int], ...] = ()
    multiplicity: Tuple[Tuple[str, int], ...] = ()
    residual: LinForm = field(default_factory=LinForm)

    def __post_init__(self):
        incident = frozenset(self.incident)
        if not incident:
            raise InconsistentTangency('a point must lie on at least one curve')
        contacts = {}
        for pair, order in self.tangency:
            pair = frozenset(pair)
            if len(pair) != 2 or not pair <= incident:
                raise InconsistentTangency(f"contact {sorted(pair)} is not between curves through {sorted(incident)}")
            if order < 1:
                raise InconsistentTangency(f"contact order {order} < 1")
            if order > 1:
                contacts[pair] = order
        for name, mu in self.multiplicity:
            if name not in incident or mu < 1:
                raise InconsistentTangency(f"bad multiplicity {name}:{mu}")
        object.__setattr__(self, 'incident', incident)
        object.__setattr__(self, 'tangency', tuple(sorted(contacts.items(), key=lambda kv: sorted(kv[0]))))
        object.__setattr__(self, 'multiplicity', tuple(sorted((n, mu) for n, mu in self.multiplicity if mu > 1)))
        names = sorted(incident)
        for x in names:
            for y in names:
                for z in names:
                    if len({x, y, z}) == 3 and self.contact(x, y) < min(self.contact(x, z), self.contact(z, y)):
                        raise InconsistentTangency(f"contact orders at {{{','.join(names)}}} are not ultrametric")

    @classmethod
    def of(cls, curves: Sequence[str], contacts: Mapping[Tuple[str, str], int] = None,
           multiplicity: Mapping[str, int] = None, residual: Optional[LinForm] = None) -> 'PointSpec':
        return cls(
            frozenset(curves),
            tuple((frozenset(pair), order) for pair, order in (contacts or {}).items()),
            tuple((multiplicity or {}).items()),
            residual if residual is not None else LinForm(),
        )

    def contact(self, a: str, b: str) -> int:
        return dict(self.tangency).get(frozenset((a, b)), 1)

    def mult(self, name: str) -> int:
        return dict(self.multiplicity).get(name, 1)

    def is_snc(self) -> bool:
        return len(self.incident) < 3 and not self.tangency and not self.multiplicity

    def describe(self) -> str:
        return '{' + ','.join(sorted(self.incident)) + '}'


@dataclass(frozen=True)
class CurveData:
    m: LinForm
    a: Fraction
    exceptional: bool


@dataclass(frozen=True)
class BlowupState:
    curves: Mapping[str, CurveData]
    incidences: Tuple[PointSpec, ...] = ()
    history: Tuple[Tuple[PointSpec, str], ...] = ()

    def curve(self, name: str) -> CurveData:
        try:
            return self.curves[name]
        except KeyError:
            raise UnknownCurve(f"no curve {name} in the blow-up state") from None

    def numeric_m(self, name: str) -> Fraction:
        m = self.curve(name).m
        if not m.is_constant():
            raise ValueError(f"multiplicity of {name} is symbolic: {m}")
        return m.constant

    def relevant(self, name: str) -> bool:
        data = self.curve(name)
        return not data.m.is_constant() or data.m.constant != 0 or data.a != 0

    def next_name(self) -> str:
        return f"F_{len(self.history) + 1}"


@dataclass(frozen=True)
class LctResult:
    value: Fraction
    witness: str
    resolution_depth: int
    state: BlowupState = field(compare=False, repr=False)


@dataclass(frozen=True)
class UpperBound:
    value: Fraction
    candidate: Membership
    divisor: DivisorClass
    result: LctResult


def _restrict(point: PointSpec, keep: FrozenSet[str]) -> Optional[PointSpec]:
    incident = point.incident & keep
    if not incident:
        return None
    restricted = PointSpec(
        incident,
        tuple((pair, order) for pair, order in point.tangency if pair <= incident),
        tuple((n, mu) for n, mu in point.multiplicity if n in incident),
        point.residual,
    )
    if restricted.is_snc() and point.residual.is_constant() and point.residual.constant == 0:
        if len(incident) < 2:
            return None
    return restricted


def point_from_decl(decl: PointDecl) -> PointSpec:
    return PointSpec.of(decl.curves, dict(decl.contacts), dict(decl.multiplicities))


def init_state(cfg: SurfaceConfig, divisor: DivisorClass, points: Optional[Sequence[PointSpec]] = None) -> BlowupState:
    '''Minimal-resolution state for π*D: strict components at their weights, E_i at the pullback.'''
    curves: Dict[str, CurveData] = {}
    for label, coeff in zip(cfg.labels, divisor.exceptional_part):
        curves[label] = CurveData(LinForm.const(coeff), Fraction(0), True)
    for aux in cfg.aux_curves:
        curves[aux.name] = CurveData(LinForm.const(divisor.weight(aux.name)), Fraction(0), False)
    for name, _ in divisor.strict_part:
        if name not in curves:
            raise UnknownCurve(f"divisor component {name} is not a curve of {cfg.name}")
    explicit = points is not None
    if points is None:
        points = [point_from_decl(d) for d in cfg.points]
    for point in points:
        for name in point.incident:
            if name not in curves:
                raise UnknownCurve(f"point {point.describe()} names unknown curve {name}")

    boundary = frozenset(n for n, d in curves.items() if d.m.constant != 0)
    incidences: List[PointSpec] = []
    for point in points:
        # points handed in by the caller stay whole, zero-weight curves included
        restricted = point if explicit else _restrict(point, boundary)
        if restricted is not None:
            incidences.append(restricted)

    def covered(a: str, b: str) -> bool:
        return any({a, b} <= p.incident for p in points)

    for a, b in cfg.adjacent_pairs():
        if a in boundary and b in boundary and not covered(a, b):
            incidences.append(PointSpec.of((a, b)))
    for aux in cfg.aux_curves:
        if aux.name not in boundary:
            continue
        for label, value in zip(cfg.labels, aux.profile):
            if value > 0 and label in boundary and not covered(aux.name, label):
                incidences.append(PointSpec.of((aux.name, label)))
    for (a, b), value in cfg.meets:
        if value > 0 and a in boundary and b in boundary and not covered(a, b):
            incidences.append(PointSpec.of((a, b)))
    return BlowupState(curves, tuple(incidences))


def blowup(state: BlowupState, point: PointSpec) -> BlowupState:
    if point not in state.incidences:
        raise UnknownPoint(f"{point.describe()} is not a point of the current state")
    name = state.next_name()
    members = sorted(point.incident)
    m = point.residual + sum((state.curve(c).m * point.mult(c) for c in members), LinForm())
    a = 1 + sum((state.curve(c).a for c in members if state.curve(c).exceptional), Fraction(0))
    curves = dict(state.curves)
    curves[name] = CurveData(m, a, True)

    # branches sharing a tangent direction (contact >= 2) stay together on F
    groups: List[List[str]] = []
    for c in members:
        for group in groups:
            if point.contact(c, group[0]) >= 2:
                group.append(c)
                break
        else:
            groups.append([c])
    new_points = []
    for group in groups:
        contacts = {
            (x, y): point.contact(x, y) - 1
            for i, x in enumerate(group) for y in group[i + 1:]
        }
        for c in group:
            mu = point.mult(c)
            if mu >= 2:
                contacts[(c, name)] = mu
        new_points.append(PointSpec.of(group + [name], contacts))
    incidences = tuple(p for p in state.incidences if p != point) + tuple(new_points)
    logger.debug(f"blew up {point.describe()} -> {name} m={m} a={format_rational(a)}")
    return BlowupState(curves, incidences, state.history + ((point, name),))


def _needs_blowup(state: BlowupState, point: PointSpec) -> bool:
    if not (point.residual.is_constant() and point.residual.constant == 0):
        return True
    relevant = [c for c in point.incident if state.relevant(c)]
    if len(relevant) >= 3:
        return True
    if any(point.mult(c) >= 2 for c in relevant):
        return True
    return len(relevant) == 2 and point.contact(*relevant) >= 2


def resolve_to_snc(state: BlowupState, budget: int = DEFAULT_BUDGET) -> BlowupState:
    '''Blow up the worst point (largest m_F, then smallest curve names) until SNC.'''
    steps = 0
    while True:
        pending = [p for p in state.incidences if _needs_blowup(state, p)]
        if not pending:
            return state
        if steps >= budget:
            raise BudgetExceeded(f"not SNC after {budget} blow-ups; check the tangency data")

        def weight(p: PointSpec) -> Fraction:
            total = p.residual.constant + sum(
                (state.numeric_m(c) * p.mult(c) for c in p.incident), Fraction(0)
            )
            return total

        worst = min(pending, key=lambda p: (-weight(p), tuple(sorted(p.incident))))
        state = blowup(state, worst)
        steps += 1


def trace_lines(state: BlowupState) -> List[str]:
    lines = []
    for k, (point, name) in enumerate(state.history, start=1):
        data = state.curves[name]
        m = format_rational(data.m.constant) if data.m.is_constant() else str(data.m)
        lines.append(f"step {k}: point {point.describe()} -> {name} m={m} a={format_rational(data.a)}")
    return lines


def lct_of_state(state: BlowupState) -> Tuple[Fraction, str]:
    best = None
    for name in sorted(state.curves):
        m = state.numeric_m(name)
        if m <= 0:
            continue
        value = (state.curves[name].a + 1) / m
        if best is None or value < best[0]:
            best = (value, name)
    if best is None:
        raise ZeroDivisor('every multiplicity is zero')
    return best


def lct_pair(cfg: SurfaceConfig, divisor: DivisorClass, points: Optional[Sequence[PointSpec]] = None,
             budget: int = DEFAULT_BUDGET) -> LctResult:
    state = resolve_to_snc(init_state(cfg, divisor, points), budget)
    value, witness = lct_of_state(state)
    logger.debug(f"lct({cfg.name}, {divisor.describe()}) = {format_rational(value)} at {witness}",
                 extra={'surface': cfg.name})
    return LctResult(value, witness, len(state.history), state)


def global_lct_upper(cfg: SurfaceConfig, budget: int = DEFAULT_BUDGET) -> UpperBound:
    '''Smallest lct(X, D/n) over declared members D of |−nK|.'''
    best: Optional[UpperBound] = None
    for membership, divisor in candidates(cfg):
        result = lct_pair(cfg, divisor, budget=budget)
        if best is None or result.value < best.value:
            best = UpperBound(result.value, membership, divisor, result)
    if best is None:
        raise NoCandidates(f"{cfg.name} declares no member of any |−nK|")
    logger.info(f"{cfg.name}: lct <= {format_rational(best.value)} via {best.candidate}",
                extra={'surface': cfg.name})
    return best

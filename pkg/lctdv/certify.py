'''Replays lower-bound arguments as linear feasibility problems.

A lemma script names a surface, a claimed threshold t and the assumptions
its argument uses. Every place where (X, λD) could fail to be log canonical
becomes a case, a handful of strict inequalities obtained by adjunction.
The claim holds when each case is infeasible together with the base system,
and each infeasibility comes with a Farkas certificate that re-verifies.

Cases that survive plain infeasibility may be discharged by a chain of
blow-ups along one exceptional curve, by computing lct of an explicit
divisor, or by a named axiom (a result cited rather than replayed).
'''

import dataclasses
import itertools
import logging
import os
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from lctdv.blowup import DEFAULT_BUDGET, LctResult, lct_pair
from lctdv.errors import DepthExceeded, FixtureNotFound, LctdvError, ParseError, ValidationError
from lctdv.exactlin import QVector, format_rational, parse_rational
from lctdv.linform import Constraint, ConstraintSystem, LinForm, Relation, variable_key
from lctdv.parsing import Directive, KExpression, parse_constraint, parse_linform, read_directives
from lctdv.polytope import FarkasCertificate, dump_system, implied, is_feasible, verify_certificate
from lctdv.surface import (
    DivisorClass, SurfaceConfig, aux_form, coefficient_form, decompose_anticanonical, divisor_class,
    exceptional_form, nonneg_constraints, scale_vector,
)

logger = logging.getLogger(__name__)

DEFAULT_CHAIN_DEPTH = 12
SINGPOINT_AXIOM = 'SingPoint'
_CLAIM_RE = re.compile(r'(>=|<=|>|<)')
_TERMINAL_IN_TAIL = re.compile(r'\s+terminal=(\S+)\s*$')


@dataclass(frozen=True)
class ChainSpec:
    '''A tower of blow-ups starting at E_a ∩ E_b and running along E_b.'''
    center: Tuple[str, str]
    depth_max: int
    through: Tuple[str, ...] = ()
    claim_lhs: str = ''
    claim_op: str = ''
    claim_rhs: Optional[KExpression] = None

    def __post_init__(self):
        if self.depth_max < 1:
            raise ValueError(f"chain depth must be at least 1, got {self.depth_max}")

    def claim_at(self, k: int) -> Optional[Constraint]:
        if self.claim_rhs is None:
            return None
        return parse_constraint(f"{self.claim_lhs} {self.claim_op} {format_rational(self.claim_rhs.at(k))}")

    def describe(self) -> str:
        return ','.join(self.center)


@dataclass(frozen=True)
class CaseSpec:
    at: Tuple[str, ...]
    extra: Tuple[Constraint, ...] = ()
    terminal: Tuple[str, ...] = ()
    line: int = 0


@dataclass(frozen=True)
class AxiomSpec:
    name: str
    block: str


@dataclass(frozen=True)
class LemmaScript:
    name: str
    surface: str
    target: Fraction
    override: Optional[Fraction] = None
    scale_fundamental: bool = False
    expected_locations: Optional[int] = None
    not_in_support: Tuple[str, ...] = ()
    disjunctions: Tuple[Tuple[Constraint, ...], ...] = ()
    auto_cases: bool = False
    cases: Tuple[CaseSpec, ...] = ()
    chains: Tuple[ChainSpec, ...] = ()
    axioms: Tuple[AxiomSpec, ...] = ()
    source: str = ''

    @property
    def thresholds(self) -> Tuple[Fraction, ...]:
        '''1/t, preceded by the override constant when the script gives one.'''
        reciprocal = 1 / self.target
        if self.override is None or self.override == reciprocal:
            return (reciprocal,)
        return (self.override, reciprocal)

    def with_target(self, target: Fraction) -> 'LemmaScript':
        if not 0 < target <= 1:
            raise ValueError(f"target must lie in (0, 1], got {format_rational(target)}")
        return dataclasses.replace(self, target=Fraction(target))

    def combos(self) -> List[Tuple[Constraint, ...]]:
        '''One assumption per disjunction group, in every combination.'''
        return [tuple(c) for c in itertools.product(*self.disjunctions)]


@dataclass(frozen=True)
class Location:
    labels: Tuple[str, ...]

    def __str__(self) -> str:
        return ','.join(self.labels)


def _rational_option(directive: Directive, key: str) -> Optional[Fraction]:
    text = directive.get(key)
    if text is None:
        return None
    try:
        return parse_rational(text)
    except ParseError:
        raise directive.error(f"bad rational {text!r} for {key}=", key) from None


def _constraint(directive: Directive, text: str, key: str) -> Constraint:
    try:
        return parse_constraint(text.strip())
    except ParseError as e:
        raise directive.error(e.message, key) from None


def _parse_chain(directive: Directive) -> ChainSpec:
    center = tuple(directive.require('center').split(','))
    if len(center) != 2:
        raise directive.error('chain center needs two exceptional curves', 'center')
    depth = directive.require('depth')
    if not depth.isdigit() or int(depth) < 1:
        raise directive.error(f"chain depth must be a positive integer, got {depth!r}", 'depth')
    through = tuple(name for text in directive.all('through') for name in text.split(','))
    claim = directive.get('claim(k)')
    lhs, op, rhs = '', '', None
    if claim:
        parts = _CLAIM_RE.split(claim)
        if len(parts) != 3:
            raise directive.error(f"claim needs one of >, >=, <, <=: {claim!r}", 'claim(k)')
        lhs, op, rhs_text = (p.strip() for p in parts)
        try:
            parse_linform(lhs)
            rhs = KExpression(rhs_text)
        except ParseError as e:
            raise directive.error(e.message, 'claim(k)') from None
    return ChainSpec((center[0], center[1]), int(depth), through, lhs, op, rhs)


def _parse_case(directive: Directive) -> CaseSpec:
    at = tuple(directive.require('at').split(','))
    if len(at) not in (1, 2):
        raise directive.error('a case sits on one exceptional curve or at a meeting of two', 'at')
    terminal = tuple(n for text in directive.all('terminal') for n in text.split(','))
    extra: List[Constraint] = []
    tail = directive.get('extra')
    if tail:
        match = _TERMINAL_IN_TAIL.search(tail)
        if match:
            terminal += tuple(match.group(1).split(','))
            tail = tail[:match.start()]
        extra = [_constraint(directive, item, 'extra') for item in tail.split(';') if item.strip()]
    return CaseSpec(at, tuple(extra), terminal, directive.line)


def parse_lemma(text: str, source: str = '') -> LemmaScript:
    directives = read_directives(text, source)
    header = [d for d in directives if d.kind == 'lemma']
    if len(header) != 1:
        raise ParseError('expected exactly one [lemma] line', 1, 1, source)
    head = header[0]
    target = _rational_option(head, 'target')
    if target is None:
        raise head.error('[lemma] needs target=', 'target')
    if not 0 < target <= 1:
        raise head.error(f"target must lie in (0, 1], got {format_rational(target)}", 'target')
    locations = head.get('locations')
    if locations is not None and not locations.isdigit():
        raise head.error(f"locations must be a count, got {locations!r}", 'locations')
    scale = head.get('scale')
    if scale not in (None, 'fundamental'):
        raise head.error(f"unknown scale {scale!r}", 'scale')

    not_in_support: List[str] = []
    disjunctions: List[Tuple[Constraint, ...]] = []
    cases: List[CaseSpec] = []
    chains: List[ChainSpec] = []
    axioms: List[AxiomSpec] = []
    auto = False
    for d in directives:
        if d.kind == 'assume':
            if 'disjunction' in d.flags:
                alternatives = tuple(_constraint(d, item, 'disjunction') for item in d.tail.split('|'))
                disjunctions.append(alternatives)
            elif 'not-in-support' in d.flags:
                not_in_support.append(d.require('curve'))
            else:
                raise d.error('[assume] takes curve=<name> not-in-support or disjunction: ...')
        elif d.kind == 'case':
            if 'auto' in d.flags:
                auto = True
            else:
                cases.append(_parse_case(d))
        elif d.kind == 'chain':
            chains.append(_parse_chain(d))
        elif d.kind == 'axiom':
            axioms.append(AxiomSpec(d.require('name'), d.require('block')))
        elif d.kind != 'lemma':
            raise d.error(f"unknown directive [{d.kind}] in a lemma script")

    name = os.path.basename(source)
    if name.endswith('.lemma'):
        name = name[:-len('.lemma')]
    return LemmaScript(
        name=name or head.require('surface'),
        surface=head.require('surface'),
        target=target,
        override=_rational_option(head, 'override'),
        scale_fundamental=scale == 'fundamental',
        expected_locations=int(locations) if locations is not None else None,
        not_in_support=tuple(not_in_support),
        disjunctions=tuple(disjunctions),
        auto_cases=auto,
        cases=tuple(cases),
        chains=tuple(chains),
        axioms=tuple(axioms),
        source=source,
    )


def load_lemma(text: str, source: str = '') -> LemmaScript:
    script = parse_lemma(text, source)
    logger.debug(f"parsed lemma {script.name} for {script.surface}", extra={'lemma': script.name})
    return script


def lemma_path(fixtures_dir: str, name: str) -> str:
    filename = name if name.endswith('.lemma') else f"{name}.lemma"
    return os.path.join(fixtures_dir, 'lemmas', filename)


def load_lemma_file(path: str) -> LemmaScript:
    if not os.path.exists(path):
        raise FixtureNotFound(f"lemma script {path} not found")
    with open(path, 'r', encoding='utf-8') as f:
        return load_lemma(f.read(), os.path.basename(path))


def check_script(cfg: SurfaceConfig, script: LemmaScript) -> None:
    '''Every curve, label and variable the script mentions must exist on the surface.'''
    violations: List[str] = []
    variables = set(cfg.variables)

    def label_ok(label: str) -> bool:
        return label in cfg.labels

    for name in script.not_in_support:
        if not any(c.name == name for c in cfg.aux_curves):
            violations.append(f"assumption names unknown curve {name}")
    for group in script.disjunctions:
        for constraint in group:
            unknown = sorted(set(constraint.variables()) - variables, key=variable_key)
            if unknown:
                violations.append(f"disjunction '{constraint}' uses unknown variables {unknown}")
    for case in script.cases:
        for label in case.at:
            if not label_ok(label):
                violations.append(f"case at {','.join(case.at)} names unknown exceptional curve {label}")
        if len(case.at) == 2 and all(map(label_ok, case.at)) and not cfg.adjacent(*case.at):
            violations.append(f"case at {','.join(case.at)}: the curves do not meet")
        for name in case.terminal:
            if not any(c.name == name for c in cfg.aux_curves):
                violations.append(f"terminal case names unknown curve {name}")
        for constraint in case.extra:
            unknown = sorted(set(constraint.variables()) - variables, key=variable_key)
            if unknown:
                violations.append(f"extra '{constraint}' uses unknown variables {unknown}")
    for chain in script.chains:
        if not all(map(label_ok, chain.center)):
            violations.append(f"chain {chain.describe()} names unknown exceptional curves")
        elif not cfg.adjacent(*chain.center):
            violations.append(f"chain {chain.describe()}: the curves do not meet")
        for name in chain.through:
            if not any(c.name == name for c in cfg.aux_curves):
                violations.append(f"chain {chain.describe()} passes through unknown curve {name}")
        if chain.claim_lhs:
            unknown = sorted(set(parse_linform(chain.claim_lhs).variables()) - variables, key=variable_key)
            if unknown:
                violations.append(f"chain {chain.describe()} claim uses unknown variables {unknown}")
    for axiom in script.axioms:
        if not any(b.letter == axiom.block for b in cfg.blocks):
            violations.append(f"axiom {axiom.name} names unknown block {axiom.block}")
    if violations:
        raise ValidationError(violations, script.source or script.name)


def _scale(cfg: SurfaceConfig, script: Optional[LemmaScript]) -> Optional[QVector]:
    if script is None or not script.scale_fundamental:
        return None
    return scale_vector(cfg, fundamental=True)


def base_system(cfg: SurfaceConfig, script: Optional[LemmaScript] = None,
                include_assumptions: bool = True) -> ConstraintSystem:
    '''Nonnegativity constraints in the script's variables, plus its not-in-support assumptions.'''
    extra = script.not_in_support if script is not None and include_assumptions else ()
    return nonneg_constraints(cfg, _scale(cfg, script), extra)


def _interior_case(cfg: SurfaceConfig, label: str, r: Fraction, scale: Optional[QVector]) -> Tuple[Constraint, ...]:
    return (Constraint(exceptional_form(cfg, label, scale) - r, Relation.GT, label),)


def _pair_case(cfg: SurfaceConfig, a: str, b: str, r: Fraction, scale: Optional[QVector]) -> Tuple[Constraint, ...]:
    # adjunction to each curve in turn, the other one counted with its coefficient
    tag = f"{a},{b}"
    return (
        Constraint(exceptional_form(cfg, a, scale) + coefficient_form(cfg, b, scale) - r, Relation.GT, tag),
        Constraint(exceptional_form(cfg, b, scale) + coefficient_form(cfg, a, scale) - r, Relation.GT, tag),
    )


def case_constraints(cfg: SurfaceConfig, location: Location, r: Fraction,
                     scale: Optional[QVector] = None) -> Tuple[Constraint, ...]:
    if len(location.labels) == 1:
        return _interior_case(cfg, location.labels[0], r, scale)
    return _pair_case(cfg, location.labels[0], location.labels[1], r, scale)


def locations(cfg: SurfaceConfig) -> List[Location]:
    '''Each exceptional curve, followed by the curves after it that it meets.'''
    pairs = cfg.adjacent_pairs()
    out = []
    for label in cfg.labels:
        out.append(Location((label,)))
        out.extend(Location(pair) for pair in pairs if pair[0] == label)
    return out


def adjunction_cases(cfg: SurfaceConfig, t: Fraction, scale: Optional[QVector] = None,
                     threshold: Optional[Fraction] = None) -> List[Tuple[Location, Tuple[Constraint, ...]]]:
    if not 0 < t <= 1:
        raise ValueError(f"threshold t must lie in (0, 1], got {format_rational(t)}")
    r = threshold if threshold is not None else 1 / Fraction(t)
    return [(loc, case_constraints(cfg, loc, r, scale)) for loc in locations(cfg)]


@dataclass(frozen=True)
class Outcome:
    '''One disjunct of one case.'''
    assumptions: Tuple[Constraint, ...]
    feasible: bool
    certificate: Optional[FarkasCertificate] = None
    verified: bool = False
    witness: Optional[Dict[str, Fraction]] = field(default=None, compare=False)
    resolution: str = ''
    system: Optional[ConstraintSystem] = field(default=None, compare=False, repr=False)

    @property
    def discharged(self) -> bool:
        return self.resolution != 'gap'


@dataclass(frozen=True)
class CaseResult:
    outcomes: Tuple[Outcome, ...]

    @property
    def infeasible(self) -> bool:
        return all(o.resolution == 'infeasible' for o in self.outcomes)

    @property
    def gaps(self) -> List[Outcome]:
        return [o for o in self.outcomes if not o.discharged]


def check_case(base: ConstraintSystem, case: Sequence[Constraint],
               disjuncts: Optional[Sequence[Sequence[Constraint]]] = None) -> CaseResult:
    outcomes = []
    for combo in (disjuncts or [()]):
        system = base.extend(combo).extend(case)
        feasibility = is_feasible(system)
        if feasibility:
            outcomes.append(Outcome(tuple(combo), True, witness=feasibility.witness,
                                    resolution='gap', system=system))
            continue
        verified = verify_certificate(system, feasibility.certificate)
        outcomes.append(Outcome(
            tuple(combo), False, feasibility.certificate, verified,
            resolution='infeasible' if verified else 'gap', system=system,
        ))
    return CaseResult(tuple(outcomes))


def _m(j: int) -> LinForm:
    return LinForm.var(f"m{j}")


def _multiplicities(k: int) -> LinForm:
    return sum((_m(j) for j in range(1, k + 1)), LinForm())


def tower_coefficient(cfg: SurfaceConfig, spec: ChainSpec, k: int, scale: Optional[QVector] = None) -> LinForm:
    '''Coefficient of F_k in the pullback of D: c_a + k·c_b + m_1 + ... + m_k.'''
    a, b = spec.center
    return coefficient_form(cfg, a, scale) + coefficient_form(cfg, b, scale) * k + _multiplicities(k)


def extend_chain(cfg: SurfaceConfig, base: ConstraintSystem, spec: ChainSpec, k: int,
                 scale: Optional[QVector] = None) -> ConstraintSystem:
    if k < 0 or k > spec.depth_max:
        raise DepthExceeded(f"chain {spec.describe()} has depth {spec.depth_max}, asked for level {k}")
    if k == 0:
        return base
    a, b = spec.center
    rows: List[Constraint] = []
    for j in range(1, k):
        rows.append(Constraint(_m(j) - _m(j + 1), Relation.GE, f"F_{j}"))
    rows.append(Constraint(_m(k), Relation.GE, f"m{k}>=0"))
    rows.append(Constraint(exceptional_form(cfg, a, scale) - _m(1), Relation.GE, a))
    rows.append(Constraint(exceptional_form(cfg, b, scale) - _multiplicities(k), Relation.GE, b))
    for name in spec.through:
        rows.append(Constraint(aux_form(cfg, name, scale) - _m(1), Relation.GE, name))
    names = tuple(f"m{j}" for j in range(1, k + 1))
    return base.with_variables(*names).extend(rows)


def chain_level_cases(cfg: SurfaceConfig, spec: ChainSpec, k: int, r: Fraction,
                      scale: Optional[QVector] = None) -> Dict[str, Tuple[Constraint, ...]]:
    '''The three places on F_k where the pair can still fail to be log canonical.'''
    a, b = spec.center
    here = tower_coefficient(cfg, spec, k, scale)
    before = tower_coefficient(cfg, spec, k - 1, scale)
    if k == 1:
        previous = exceptional_form(cfg, a, scale) - _m(1)
    else:
        previous = _m(k - 1) - _m(k)
    room = here - (k + 1) * r
    return {
        'prev': (
            Constraint(previous + room, Relation.GT, f"F_{k},prev"),
            Constraint(_m(k) + before - k * r, Relation.GT, f"F_{k},prev"),
        ),
        'interior': (Constraint(_m(k) - r, Relation.GT, f"F_{k}"),),
        'survivor': (
            Constraint(exceptional_form(cfg, b, scale) - _multiplicities(k) + room, Relation.GT, f"F_{k},{b}"),
            Constraint(_m(k) + coefficient_form(cfg, b, scale) - r, Relation.GT, f"F_{k},{b}"),
        ),
    }


@dataclass(frozen=True)
class ChainLevel:
    k: int
    side_condition: bool
    prev: CaseResult
    interior: CaseResult
    survivor: CaseResult
    claim: Optional[bool] = None

    @property
    def passed(self) -> bool:
        return self.side_condition and self.prev.infeasible and self.interior.infeasible and self.claim is not False


@dataclass(frozen=True)
class ChainReport:
    spec: ChainSpec
    threshold: Fraction
    levels: Tuple[ChainLevel, ...] = ()

    @property
    def closed(self) -> bool:
        return bool(self.levels) and self.levels[-1].survivor.infeasible

    @property
    def passed(self) -> bool:
        # an unchecked chain discharges nothing
        return bool(self.levels) and all(level.passed for level in self.levels)


def check_inductive_chain(cfg: SurfaceConfig, script: LemmaScript, spec: ChainSpec, depth: int,
                          threshold: Optional[Fraction] = None,
                          base: Optional[ConstraintSystem] = None) -> ChainReport:
    '''Follow the surviving branch up to ``depth`` blow-ups, or until it closes.'''
    if depth > spec.depth_max:
        raise DepthExceeded(f"chain {spec.describe()} allows depth {spec.depth_max}, asked for {depth}")
    r = threshold if threshold is not None else 1 / script.target
    scale = _scale(cfg, script)
    if base is None:
        base = base_system(cfg, script)
    survivors = list(_pair_case(cfg, spec.center[0], spec.center[1], r, scale))
    levels: List[ChainLevel] = []
    for k in range(1, depth + 1):
        system = extend_chain(cfg, base, spec, k, scale).extend(survivors)
        side = implied(system, Constraint((k + 1) * r - tower_coefficient(cfg, spec, k, scale), Relation.GE))
        cases = chain_level_cases(cfg, spec, k, r, scale)
        claim = spec.claim_at(k)
        level = ChainLevel(
            k,
            side,
            check_case(system, cases['prev']),
            check_case(system, cases['interior']),
            check_case(system, cases['survivor']),
            implied(system, claim) if claim is not None else None,
        )
        levels.append(level)
        logger.debug(
            f"chain {spec.describe()} r={format_rational(r)} k={k}: "
            f"side={'ok' if side else 'FAIL'} passed={level.passed}",
            extra={'lemma': script.name, 'step': k},
        )
        if not level.passed or level.survivor.infeasible:
            break
        survivors.extend(cases['survivor'])
    return ChainReport(spec, r, tuple(levels))


@dataclass(frozen=True)
class TerminalResult:
    curves: Tuple[str, ...]
    divisor: Optional[DivisorClass]
    lct: Optional[LctResult]
    target: Fraction
    reason: str = ''

    @property
    def passed(self) -> bool:
        return self.lct is not None and self.lct.value >= self.target


def decompose_and_check(cfg: SurfaceConfig, curves: Sequence[str], t: Fraction,
                        budget: int = DEFAULT_BUDGET) -> TerminalResult:
    '''Write D as a combination of ``curves`` and check lct(X, D) ≥ t directly.'''
    curves = tuple(curves)
    weights = decompose_anticanonical(cfg, curves)
    if any(w < 0 for w in weights):
        return TerminalResult(curves, None, None, t, 'negative weight in the decomposition')
    divisor = divisor_class(cfg, dict(zip(curves, weights)))
    try:
        result = lct_pair(cfg, divisor, budget=budget)
    except LctdvError as e:
        return TerminalResult(curves, divisor, None, t, str(e))
    return TerminalResult(curves, divisor, result, t)


@dataclass(frozen=True)
class Obligation:
    kind: str
    location: Location
    threshold: Fraction
    outcomes: Tuple[Outcome, ...] = ()
    axiom: str = ''

    @property
    def passed(self) -> bool:
        return all(o.discharged for o in self.outcomes)

    def resolution(self) -> str:
        if self.axiom:
            return f"axiom {self.axiom}"
        kinds = sorted({o.resolution for o in self.outcomes}, key=lambda k: (k == 'gap', k))
        return '+'.join(kinds)


@dataclass(frozen=True)
class VerificationReport:
    lemma: str
    surface: str
    target: Fraction
    thresholds: Tuple[Fraction, ...]
    obligations: Tuple[Obligation, ...]
    chains: Tuple[ChainReport, ...]
    terminals: Tuple[TerminalResult, ...]
    axioms: Tuple[str, ...]
    location_count: int
    expected_locations: Optional[int] = None
    base: Optional[ConstraintSystem] = field(default=None, compare=False, repr=False)

    @property
    def locations_ok(self) -> bool:
        return self.expected_locations is None or self.expected_locations == self.location_count

    @property
    def gaps(self) -> List[Obligation]:
        return [o for o in self.obligations if not o.passed]

    @property
    def passed(self) -> bool:
        return (
            not self.gaps
            and all(c.passed for c in self.chains)
            and self.locations_ok
        )


def _axiom_for(script: LemmaScript, location: Location) -> str:
    for axiom in script.axioms:
        if all(label[0] == axiom.block for label in location.labels):
            return axiom.name
    return ''


def _matching_chain(script: LemmaScript, location: Location) -> Optional[ChainSpec]:
    for chain in script.chains:
        if set(chain.center) == set(location.labels) and len(location.labels) == 2:
            return chain
    return None


def _terminal_for(script: LemmaScript, location: Location) -> Tuple[str, ...]:
    for case in script.cases:
        if case.terminal and set(case.at) == set(location.labels):
            return case.terminal
    return ()


def _axiom_names(cfg: SurfaceConfig, script: LemmaScript) -> Tuple[str, ...]:
    names = [SINGPOINT_AXIOM]
    assumed = [c.name for c in cfg.aux_curves if c.assume_not_in_support] + list(script.not_in_support)
    for name in dict.fromkeys(assumed):
        names.append(f"not-in-support({name})")
    for axiom in script.axioms:
        names.append(f"{axiom.name}(block {axiom.block})")
    return tuple(names)


def replay_lemma(script: LemmaScript, cfg: SurfaceConfig, chain_depth: Optional[int] = None,
                 budget: int = DEFAULT_BUDGET) -> VerificationReport:
    '''Run every case of the script at each threshold and aggregate the verdicts.'''
    check_script(cfg, script)
    scale = _scale(cfg, script)
    base = base_system(cfg, script)
    combos = script.combos()
    all_locations = locations(cfg)
    obligations: List[Obligation] = []
    chain_reports: Dict[Tuple[int, Fraction, Tuple[Constraint, ...]], ChainReport] = {}
    terminals: Dict[Tuple[str, ...], TerminalResult] = {}

    def run_chain(spec: ChainSpec, r: Fraction, combo: Tuple[Constraint, ...]) -> ChainReport:
        key = (script.chains.index(spec), r, combo)
        if key not in chain_reports:
            depth = spec.depth_max if chain_depth is None else min(chain_depth, spec.depth_max)
            chain_reports[key] = check_inductive_chain(cfg, script, spec, depth, r, base.extend(combo))
        return chain_reports[key]

    def run_terminal(curves: Tuple[str, ...]) -> TerminalResult:
        if curves not in terminals:
            terminals[curves] = decompose_and_check(cfg, curves, script.target, budget)
        return terminals[curves]

    def location_obligation(location: Location, r: Fraction) -> Obligation:
        axiom = _axiom_for(script, location)
        if axiom:
            return Obligation('case', location, r, axiom=axiom)
        result = check_case(base, case_constraints(cfg, location, r, scale), combos)
        outcomes = []
        for outcome in result.outcomes:
            if outcome.resolution == 'gap':
                outcome = _resolve(script, location, r, outcome, run_chain, run_terminal)
            outcomes.append(outcome)
        obligation = Obligation('case', location, r, tuple(outcomes))
        logger.debug(
            f"{script.name} r={format_rational(r)} {location}: {obligation.resolution()}",
            extra={'lemma': script.name, 'location': str(location)},
        )
        return obligation

    for r in script.thresholds:
        if script.auto_cases:
            for location in all_locations:
                obligations.append(location_obligation(location, r))
        explicit = set()
        for case in script.cases:
            if not case.extra:
                # without [case] auto, a bare at= line is the plain adjunction case there
                if not script.auto_cases and frozenset(case.at) not in explicit:
                    explicit.add(frozenset(case.at))
                    obligations.append(location_obligation(Location(case.at), r))
                continue
            location = Location(case.at)
            constraints = case_constraints(cfg, location, r, scale) + case.extra
            result = check_case(base, constraints, combos)
            obligations.append(Obligation('extra', location, r, result.outcomes))

    report = VerificationReport(
        lemma=script.name,
        surface=cfg.name,
        target=script.target,
        thresholds=script.thresholds,
        obligations=tuple(obligations),
        chains=tuple(chain_reports.values()),
        terminals=tuple(terminals[k] for k in sorted(terminals)),
        axioms=_axiom_names(cfg, script),
        location_count=len(all_locations),
        expected_locations=script.expected_locations,
        base=base,
    )
    for gap in report.gaps:
        logger.warning(
            f"{script.name}: proof gap at {gap.location} (r={format_rational(gap.threshold)})",
            extra={'lemma': script.name, 'location': str(gap.location)},
        )
    logger.info(f"replayed {script.name}: {'PASS' if report.passed else 'FAIL'}", extra={'lemma': script.name})
    return report


def _resolve(script: LemmaScript, location: Location, r: Fraction, outcome: Outcome,
             run_chain, run_terminal) -> Outcome:
    if outcome.feasible:
        chain = _matching_chain(script, location)
        if chain is not None and run_chain(chain, r, outcome.assumptions).passed:
            return dataclasses.replace(outcome, resolution='chain')
        curves = _terminal_for(script, location)
        if curves and run_terminal(curves).passed:
            return dataclasses.replace(outcome, resolution='terminal')
    return outcome


def _format_point(point: Dict[str, Fraction]) -> str:
    return ' '.join(f"{v}={format_rational(point[v])}" for v in sorted(point, key=variable_key))


def report_lines(report: VerificationReport, trace: bool = False, dump: bool = False) -> List[str]:
    '''Deterministic text form of a report.'''
    targets = ', '.join(format_rational(r) for r in report.thresholds)
    lines = [
        f"lemma {report.lemma}: surface {report.surface}, target {format_rational(report.target)}, "
        f"1/lambda checked at {targets}",
        f"axioms: {', '.join(report.axioms)}",
    ]
    if dump and report.base is not None:
        lines.extend(dump_system(report.base).rstrip('\n').split('\n'))
    if report.expected_locations is not None:
        status = 'ok' if report.locations_ok else 'MISMATCH'
        lines.append(f"locations: {report.location_count} (expected {report.expected_locations}) {status}")
    for obligation in report.obligations:
        prefix = 'extra ' if obligation.kind == 'extra' else ''
        lines.append(
            f"{prefix}case {obligation.location} r={format_rational(obligation.threshold)}: {obligation.resolution()}"
        )
        for outcome in obligation.outcomes:
            label = ' & '.join(str(c) for c in outcome.assumptions)
            if outcome.resolution == 'gap' and outcome.witness is not None:
                lines.append(f"  gap{' [' + label + ']' if label else ''}: witness {_format_point(outcome.witness)}")
            elif outcome.resolution == 'gap':
                lines.append(f"  gap{' [' + label + ']' if label else ''}: certificate did not verify")
            elif trace and outcome.certificate is not None and outcome.system is not None:
                lines.append(f"  certificate{' [' + label + ']' if label else ''}: "
                             f"{outcome.certificate.describe(outcome.system)}")
    for chain in report.chains:
        head = f"chain {chain.spec.describe()} r={format_rational(chain.threshold)}"
        for level in chain.levels:
            claim = {None: '-', True: 'ok', False: 'FAIL'}[level.claim]
            lines.append(
                f"{head} k={level.k}: side {'ok' if level.side_condition else 'FAIL'}, "
                f"prev {'infeasible' if level.prev.infeasible else 'GAP'}, "
                f"interior {'infeasible' if level.interior.infeasible else 'GAP'}, "
                f"survivor {'closed' if level.survivor.infeasible else 'open'}, claim {claim}"
            )
        state = 'closed' if chain.closed else f"open at depth {len(chain.levels)}"
        lines.append(f"{head}: {state}, {'pass' if chain.passed else 'FAIL'}")
    for terminal in report.terminals:
        divisor = terminal.divisor.describe() if terminal.divisor is not None else '-'
        if terminal.lct is None:
            lines.append(f"terminal {','.join(terminal.curves)}: {divisor} FAIL ({terminal.reason})")
        else:
            relation = '>=' if terminal.passed else '<'
            lines.append(
                f"terminal {','.join(terminal.curves)}: {divisor} lct={format_rational(terminal.lct.value)} "
                f"{relation} {format_rational(terminal.target)}"
            )
    verdict = 'PASS' if report.passed else 'FAIL'
    lines.append(f"result: {verdict} ({len(report.obligations)} obligations, {len(report.gaps)} gaps)")
    return lines

'''Combinatorial model of a del Pezzo surface with Du Val singularities.

A surface is its minimal resolution seen through intersection numbers: the
exceptional (−2)-curves of each singular point, a handful of auxiliary curves
(mostly (−1)-curves) given by how their strict transforms meet the
exceptional curves, and the anticanonical members through each singular
point.
'''

import logging
import os
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

from lctdv.dynkin import SingularityType, fundamental_cycle, fundamental_cycle_profile, intersection_matrix, signature
from lctdv.errors import (
    DimensionMismatch, FixtureNotFound, ParseError, SingularGram, SingularMatrix,
    UnknownCurve, ValidationError,
)
from lctdv.exactlin import QMatrix, QVector, format_rational, is_negative_definite, parse_rational, solve_linear
from lctdv.linform import Constraint, ConstraintSystem, LinForm, Relation
from lctdv.parsing import Directive, read_directives, split_pair

logger = logging.getLogger(__name__)

VARIABLE_PREFIX = {'E': 'a', 'F': 'b', 'G': 'c', 'H': 'd', 'I': 'e'}
_LABEL_RE = re.compile(r'^([A-Z])(\d+)$')
_RANGE_RE = re.compile(r'^([A-Z])1\.\.([A-Z])(\d+)$')


@dataclass(frozen=True)
class Block:
    '''One singular point: its type and the labels of its exceptional curves.'''
    type: SingularityType
    letter: str
    offset: int

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(f"{self.letter}{i}" for i in range(1, self.type.rank + 1))

    @property
    def prefix(self) -> str:
        return VARIABLE_PREFIX[self.letter]

    @property
    def variables(self) -> Tuple[str, ...]:
        return tuple(f"{self.prefix}{i}" for i in range(1, self.type.rank + 1))


@dataclass(frozen=True)
class Membership:
    '''``Σ w·L ∈ |−nK|``.'''
    weights: Tuple[Tuple[str, Fraction], ...]
    multiple: int

    def __str__(self) -> str:
        terms = [name if w == 1 else f"{format_rational(w)}*{name}" for name, w in self.weights]
        return f"{'+'.join(terms)}:{self.multiple}"


@dataclass(frozen=True)
class AuxCurve:
    name: str
    antican_degree: Fraction
    profile: QVector
    self_int_strict: Fraction
    relations: Tuple[Membership, ...] = ()
    assume_not_in_support: bool = False
    declared_coeffs: Tuple[Tuple[str, Fraction], ...] = ()
    anticanonical_through: str = ''

    @property
    def is_anticanonical(self) -> bool:
        return bool(self.anticanonical_through)


@dataclass(frozen=True)
class PointDecl:
    '''Tangency data for a point of the resolution, as written in the file.'''
    curves: Tuple[str, ...]
    contacts: Tuple[Tuple[Tuple[str, str], int], ...] = ()
    multiplicities: Tuple[Tuple[str, int], ...] = ()


@dataclass(frozen=True)
class SurfaceConfig:
    name: str
    degree: Fraction
    blocks: Tuple[Block, ...]
    exceptional_matrix: QMatrix
    aux_curves: Tuple[AuxCurve, ...]
    meets: Tuple[Tuple[Tuple[str, str], int], ...] = ()
    points: Tuple[PointDecl, ...] = ()
    flags: FrozenSet[str] = frozenset()
    source: str = ''

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(label for block in self.blocks for label in block.labels)

    @property
    def variables(self) -> Tuple[str, ...]:
        return tuple(v for block in self.blocks for v in block.variables)

    @property
    def size(self) -> int:
        return self.exceptional_matrix.nrows

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownCurve(f"{self.name} has no exceptional curve {label}") from None

    def variable_of(self, label: str) -> str:
        return self.variables[self.index_of(label)]

    def block_of(self, label: str) -> Block:
        letter = label[0]
        for block in self.blocks:
            if block.letter == letter:
                return block
        raise UnknownCurve(f"{self.name} has no singularity labelled {letter}")

    def curve(self, name: str) -> AuxCurve:
        for curve in self.aux_curves:
            if curve.name == name:
                return curve
        raise UnknownCurve(f"{self.name} has no auxiliary curve {name}")

    def has_curve(self, name: str) -> bool:
        return name in self.labels or any(c.name == name for c in self.aux_curves)

    def anticanonical_members(self) -> List[AuxCurve]:
        return [c for c in self.aux_curves if c.is_anticanonical]

    def adjacent(self, a: str, b: str) -> bool:
        return a != b and self.exceptional_matrix[self.index_of(a), self.index_of(b)] > 0

    def adjacent_pairs(self) -> List[Tuple[str, str]]:
        labels = self.labels
        return [
            (labels[i], labels[j])
            for i in range(len(labels)) for j in range(i + 1, len(labels))
            if self.exceptional_matrix[i, j] > 0
        ]

    def strict_intersection(self, a: str, b: str) -> Fraction:
        '''L̃_a·L̃_b on the resolution.'''
        if a == b:
            return self.curve(a).self_int_strict
        for (x, y), value in self.meets:
            if {x, y} == {a, b}:
                return Fraction(value)
        return Fraction(0)

    def singularity_signature(self) -> str:
        '''Canonical singularity string: E, D, A kinds, larger ranks first, counts merged.'''
        return signature(b.type for b in self.blocks)

    def condition(self) -> str:
        return ','.join(sorted(self.flags)) if self.flags else '-'


@dataclass(frozen=True)
class DivisorClass:
    strict_part: Tuple[Tuple[str, Fraction], ...]
    exceptional_part: QVector

    def weight(self, name: str) -> Fraction:
        return dict(self.strict_part).get(name, Fraction(0))

    def scaled(self, factor: Fraction) -> 'DivisorClass':
        return DivisorClass(
            tuple((n, w * factor) for n, w in self.strict_part), self.exceptional_part.scale(factor)
        )

    def describe(self) -> str:
        return '+'.join(
            name if w == 1 else f"{format_rational(w)}*{name}" for name, w in self.strict_part
        ) or '0'


def _parse_labels(directive: Directive, kind: SingularityType) -> str:
    text = directive.require('labels')
    match = _RANGE_RE.match(text)
    if match:
        letter, other, count = match.groups()
        if letter != other:
            raise directive.error(f"label range {text} mixes letters", 'labels')
    else:
        labels = text.split(',')
        matches = [_LABEL_RE.match(x) for x in labels]
        if not all(matches) or len({m.group(1) for m in matches}) != 1:
            raise directive.error(f"bad label list {text}", 'labels')
        letter, count = matches[0].group(1), len(labels)
        if [int(m.group(2)) for m in matches] != list(range(1, count + 1)):
            raise directive.error(f"labels {text} must run 1..n", 'labels')
    if int(count) != kind.rank:
        raise directive.error(f"{kind} needs {kind.rank} labels, got {count}", 'labels')
    if letter not in VARIABLE_PREFIX:
        raise directive.error(f"singularity letter must be one of {sorted(VARIABLE_PREFIX)}", 'labels')
    return letter


def _rational(directive: Directive, key: str, default: Optional[str] = None) -> Fraction:
    text = directive.get(key, default)
    if text is None:
        raise directive.error(f"[{directive.kind}] needs {key}=", key)
    try:
        return parse_rational(text)
    except ParseError as e:
        raise directive.error(e.message, key) from None


def _label_values(directive: Directive, key: str, labels: Sequence[str]) -> Dict[str, Fraction]:
    values: Dict[str, Fraction] = {}
    for text in directive.all(key):
        for item in text.split(','):
            if '=' not in item:
                raise directive.error(f"expected <label>=<value> in {key}={text}", key)
            label, value = item.split('=', 1)
            if label not in labels:
                raise directive.error(f"unknown exceptional curve {label} in {key}=", key)
            try:
                values[label] = parse_rational(value)
            except ParseError:
                raise directive.error(f"bad value {value!r} for {label}", key) from None
    return values


def _membership(directive: Directive, text: str) -> Membership:
    combo, multiple = split_pair(text)
    weights: Dict[str, Fraction] = {}
    for term in combo.split('+'):
        term = term.strip()
        if '*' in term:
            w, name = term.split('*', 1)
            weight = parse_rational(w)
        else:
            name, weight = term, Fraction(1)
        weights[name] = weights.get(name, Fraction(0)) + weight
    if not multiple.isdigit() or int(multiple) < 1:
        raise directive.error(f"relation multiple must be a positive integer: {text}", 'relation')
    return Membership(tuple(sorted(weights.items())), int(multiple))


def parse_surface(text: str, source: str = '') -> SurfaceConfig:
    '''Build a SurfaceConfig without validating it.'''
    directives = read_directives(text, source)
    header = [d for d in directives if d.kind == 'surface']
    if len(header) != 1:
        raise ParseError('expected exactly one [surface] line', 1, 1, source)
    name = header[0].require('name')
    degree = _rational(header[0], 'degree')

    blocks: List[Block] = []
    matrices: List[QMatrix] = []
    offset = 0
    for d in (d for d in directives if d.kind == 'singularity'):
        try:
            kind = SingularityType.parse(d.require('type'))
        except ParseError:
            raise d.error(f"bad singularity type {d.get('type')}", 'type') from None
        letter = _parse_labels(d, kind)
        if any(b.letter == letter for b in blocks):
            raise d.error(f"label letter {letter} used twice", 'labels')
        block = Block(kind, letter, offset)
        rows = intersection_matrix(kind).to_lists()
        for label, value in _label_values(d, 'selfint', block.labels).items():
            i = block.labels.index(label)
            rows[i][i] = value
        blocks.append(block)
        matrices.append(QMatrix.of(rows))
        offset += kind.rank
    matrix = QMatrix.block_diagonal(matrices)
    labels = tuple(label for b in blocks for label in b.labels)

    curves: List[AuxCurve] = []
    for d in directives:
        if d.kind == 'curve':
            profile = _label_values(d, 'profile', labels)
            curves.append(AuxCurve(
                name=d.require('name'),
                antican_degree=_rational(d, 'antican'),
                profile=QVector(tuple(profile.get(label, Fraction(0)) for label in labels)),
                self_int_strict=_rational(d, 'selfint', '-1'),
                relations=tuple(_membership(d, r) for r in d.all('relation')),
                assume_not_in_support='not-in-support' in d.flags,
                declared_coeffs=tuple(_label_values(d, 'coeffs', labels).items()),
            ))
        elif d.kind == 'anticanonical':
            letter = d.require('through')
            block = next((b for b in blocks if b.letter == letter), None)
            if block is None:
                raise d.error(f"no singularity labelled {letter}", 'through')
            declared = _label_values(d, 'profile', labels)
            if not declared:
                local = fundamental_cycle_profile(block.type)
                declared = dict(zip(block.labels, local))
            profile = QVector(tuple(declared.get(label, Fraction(0)) for label in labels))
            member = d.get('name', 'Z')
            curves.append(AuxCurve(
                name=member,
                antican_degree=degree,
                profile=profile,
                self_int_strict=Fraction(0),
                relations=(Membership(((member, Fraction(1)),), 1),),
                assume_not_in_support=True,
                declared_coeffs=tuple(_label_values(d, 'coeffs', labels).items()),
                anticanonical_through=letter,
            ))

    meets = []
    for d in (d for d in directives if d.kind == 'meet'):
        pair = d.require('curves').split(',')
        if len(pair) != 2:
            raise d.error('[meet] needs exactly two curves', 'curves')
        value = _rational(d, 'value')
        if value.denominator != 1 or value < 0:
            raise d.error('[meet] value must be a nonnegative integer', 'value')
        meets.append(((pair[0], pair[1]), int(value)))

    points = []
    for d in (d for d in directives if d.kind == 'point'):
        members = tuple(d.require('curves').split(','))
        contacts = []
        for text in d.all('contact'):
            for item in text.split(';'):
                pair, order = split_pair(item)
                a, b = pair.split(',')
                contacts.append(((a, b), int(order)))
        mults = []
        for text in d.all('mult'):
            for item in text.split(','):
                curve_name, order = split_pair(item)
                mults.append((curve_name, int(order)))
        points.append(PointDecl(members, tuple(contacts), tuple(mults)))

    flags = frozenset(flag for d in directives if d.kind == 'flag' for flag in d.flags)
    config = SurfaceConfig(
        name=name, degree=degree, blocks=tuple(blocks), exceptional_matrix=matrix,
        aux_curves=tuple(curves), meets=tuple(meets), points=tuple(points), flags=flags,
        source=source,
    )
    return _with_anticanonical_selfint(config)


def _with_anticanonical_selfint(config: SurfaceConfig) -> SurfaceConfig:
    '''Z̃² = K² − Σ c_i·(Z̃·E_i) for the anticanonical members.'''
    if not any(c.is_anticanonical for c in config.aux_curves):
        return config
    try:
        curves = []
        for curve in config.aux_curves:
            if curve.is_anticanonical:
                coeffs = solve_pullback(config, curve.profile)
                curve = AuxCurve(
                    curve.name, curve.antican_degree, curve.profile,
                    config.degree - coeffs.dot(curve.profile), curve.relations,
                    curve.assume_not_in_support, curve.declared_coeffs, curve.anticanonical_through,
                )
            curves.append(curve)
    except SingularMatrix:
        return config
    return SurfaceConfig(
        config.name, config.degree, config.blocks, config.exceptional_matrix, tuple(curves),
        config.meets, config.points, config.flags, config.source,
    )


def load_surface(text: str, source: str = '') -> SurfaceConfig:
    config = parse_surface(text, source)
    violations = validate_config(config)
    if violations:
        raise ValidationError(violations, source or config.name)
    logger.info(f"loaded surface {config.name}", extra={'surface': config.name})
    return config


def surface_path(fixtures_dir: str, name: str) -> str:
    return os.path.join(fixtures_dir, 'surfaces', name)


def load_surface_file(path: str) -> SurfaceConfig:
    if not os.path.exists(path):
        raise FixtureNotFound(f"surface fixture {path} not found")
    with open(path, 'r', encoding='utf-8') as f:
        return load_surface(f.read(), os.path.basename(path))


def solve_pullback(cfg: SurfaceConfig, profile: QVector) -> QVector:
    '''Coefficients c with M·c = −profile, so that π*L = L̃ + Σ c_i E_i.'''
    if len(profile) != cfg.size:
        raise DimensionMismatch(f"profile has {len(profile)} entries, {cfg.name} has {cfg.size} exceptional curves")
    return solve_linear(cfg.exceptional_matrix, -profile)


def pullback_of(cfg: SurfaceConfig, curve: Union[str, AuxCurve]) -> QVector:
    if isinstance(curve, str):
        curve = cfg.curve(curve)
    return solve_pullback(cfg, curve.profile)


def profile_vector(cfg: SurfaceConfig, values: Dict[str, Fraction]) -> QVector:
    for label in values:
        cfg.index_of(label)
    return QVector(tuple(values.get(label, Fraction(0)) for label in cfg.labels))


def divisor_class(cfg: SurfaceConfig, weights: Dict[str, Fraction]) -> DivisorClass:
    exceptional = QVector.zeros(cfg.size)
    for name, weight in weights.items():
        exceptional = exceptional + pullback_of(cfg, name).scale(weight)
    strict = tuple((name, Fraction(w)) for name, w in sorted(weights.items()) if w != 0)
    return DivisorClass(strict, exceptional)


def candidates(cfg: SurfaceConfig) -> List[Tuple[Membership, DivisorClass]]:
    '''Every declared member of some |−nK|, as a divisor numerically equivalent to −K.'''
    seen = []
    for curve in cfg.aux_curves:
        for membership in curve.relations:
            if membership not in seen:
                seen.append(membership)
    out = []
    for membership in seen:
        weights = {name: w / membership.multiple for name, w in membership.weights}
        out.append((membership, divisor_class(cfg, weights)))
    return out


def scale_vector(cfg: SurfaceConfig, fundamental: bool = False) -> QVector:
    '''Multipliers s with c_i = s_i·a_i.'''
    if not fundamental:
        return QVector(tuple(Fraction(1) for _ in range(cfg.size)))
    return QVector(tuple(z for block in cfg.blocks for z in fundamental_cycle(block.type)))


def coefficient_form(cfg: SurfaceConfig, label: str, scale: Optional[QVector] = None) -> LinForm:
    '''The coefficient of E_label in π*D − D̃, in the script variables.'''
    i = cfg.index_of(label)
    factor = scale[i] if scale is not None else Fraction(1)
    return LinForm.var(cfg.variables[i], factor)


def exceptional_form(cfg: SurfaceConfig, label: str, scale: Optional[QVector] = None) -> LinForm:
    '''D̃·E_label = −Σ_i c_i (E_i·E_label).'''
    j = cfg.index_of(label)
    terms = {}
    for i, variable in enumerate(cfg.variables):
        entry = cfg.exceptional_matrix[i, j]
        if entry != 0:
            factor = scale[i] if scale is not None else Fraction(1)
            terms[variable] = -entry * factor
    return LinForm.of(terms)


def aux_form(cfg: SurfaceConfig, curve: Union[str, AuxCurve], scale: Optional[QVector] = None) -> LinForm:
    '''D̃·L̃ = −K·L − Σ_i c_i (L̃·E_i), valid when L is not in Supp(D).'''
    if isinstance(curve, str):
        curve = cfg.curve(curve)
    terms = {}
    for i, variable in enumerate(cfg.variables):
        if curve.profile[i] != 0:
            factor = scale[i] if scale is not None else Fraction(1)
            terms[variable] = -curve.profile[i] * factor
    return LinForm.of(terms, curve.antican_degree)


def nonneg_constraints(
    cfg: SurfaceConfig, scale: Optional[QVector] = None, extra_not_in_support: Sequence[str] = ()
) -> ConstraintSystem:
    '''D̃·L̃ ≥ 0 for curves outside Supp(D), D̃·E_j ≥ 0, and a_i ≥ 0.'''
    constraints: List[Constraint] = []
    for curve in cfg.aux_curves:
        if curve.assume_not_in_support or curve.name in extra_not_in_support:
            constraints.append(Constraint(aux_form(cfg, curve, scale), Relation.GE, curve.name))
    for label in cfg.labels:
        constraints.append(Constraint(exceptional_form(cfg, label, scale), Relation.GE, label))
    for label in cfg.labels:
        constraints.append(Constraint(coefficient_form(cfg, label, scale), Relation.GE, f"{label}>=0"))
    return ConstraintSystem(cfg.variables, tuple(constraints))


def pushforward_intersection(cfg: SurfaceConfig, first: Union[str, AuxCurve], second: Union[str, AuxCurve]) -> Fraction:
    '''L_1·L_2 on X = L̃_1·L̃_2 + Σ_i c^(2)_i (L̃_1·E_i).'''
    first = cfg.curve(first) if isinstance(first, str) else first
    second = cfg.curve(second) if isinstance(second, str) else second
    coeffs = pullback_of(cfg, second)
    return cfg.strict_intersection(first.name, second.name) + coeffs.dot(first.profile)


def gram_matrix(cfg: SurfaceConfig, names: Sequence[str]) -> QMatrix:
    return QMatrix.of([[pushforward_intersection(cfg, a, b) for b in names] for a in names])


def decompose_anticanonical(cfg: SurfaceConfig, names: Sequence[str]) -> QVector:
    '''Weights w with (Σ w_i L_i)·L_j = −K·L_j for every listed curve.'''
    gram = gram_matrix(cfg, names)
    rhs = QVector(tuple(cfg.curve(n).antican_degree for n in names))
    try:
        return solve_linear(gram, rhs)
    except SingularMatrix:
        raise SingularGram(f"curves {list(names)} have a singular intersection matrix") from None


def _pretty(label: str) -> str:
    return f"{label[0]}_{label[1:]}"


def _supported_in(cfg: SurfaceConfig, curve: AuxCurve, letter: str) -> bool:
    '''The strict transform meets the exceptional locus, and only over the given point.'''
    touched = {cfg.block_of(label).letter for label, value in zip(cfg.labels, curve.profile) if value}
    return touched == {letter}


def validate_config(cfg: SurfaceConfig) -> List[str]:
    '''Every violated invariant, as a message; empty means valid.'''
    violations: List[str] = []
    if cfg.degree <= 0:
        violations.append(f"degree must be positive, got {format_rational(cfg.degree)}")
    if cfg.size and not is_negative_definite(cfg.exceptional_matrix):
        violations.append('exceptional intersection matrix is not negative definite')
        return violations
    names = [c.name for c in cfg.aux_curves]
    for name in sorted({n for n in names if names.count(n) > 1}):
        violations.append(f"curve {name} declared twice")
    for curve in cfg.aux_curves:
        if curve.antican_degree <= 0:
            violations.append(f"{curve.name}: antican degree must be positive")
        for label, value in zip(cfg.labels, curve.profile):
            if value < 0 or value.denominator != 1:
                violations.append(f"{curve.name}: profile entry at {_pretty(label)} must be a nonnegative integer")
        coeffs = pullback_of(cfg, curve)
        for label, declared in curve.declared_coeffs:
            computed = coeffs[cfg.index_of(label)]
            if computed != declared:
                violations.append(
                    f"{curve.name}: pullback mismatch at {_pretty(label)} "
                    f"(declared {format_rational(declared)}, computed {format_rational(computed)})"
                )
    known = set(names)
    for curve in cfg.aux_curves:
        for membership in curve.relations:
            missing = [n for n, _ in membership.weights if n not in known]
            if missing:
                violations.append(f"relation {membership} names unknown curves {missing}")
                continue
            total = sum((w * cfg.curve(n).antican_degree for n, w in membership.weights), Fraction(0))
            if total != membership.multiple * cfg.degree:
                violations.append(
                    f"relation {membership}: −K·D = {format_rational(total)}, "
                    f"expected {format_rational(membership.multiple * cfg.degree)}"
                )
            for component, _ in membership.weights:
                product = sum(
                    (w * pushforward_intersection(cfg, n, component) for n, w in membership.weights),
                    Fraction(0),
                )
                expected = membership.multiple * cfg.curve(component).antican_degree
                if product != expected:
                    violations.append(
                        f"relation {membership}: D·{component} = {format_rational(product)}, "
                        f"expected {format_rational(expected)}"
                    )
            components = [n for n, _ in membership.weights]
            for member in cfg.anticanonical_members():
                if member.name in components:
                    continue
                if not all(_supported_in(cfg, cfg.curve(n), member.anticanonical_through) for n in components):
                    continue
                # combined exceptional coefficients paired with the member's profile
                product = sum(
                    (w * pushforward_intersection(cfg, member, n) for n, w in membership.weights),
                    Fraction(0),
                )
                expected = membership.multiple * member.antican_degree
                if product != expected:
                    violations.append(
                        f"relation {membership}: D·{member.name} = {format_rational(product)}, "
                        f"expected {format_rational(expected)}"
                    )
    for (a, b), _ in cfg.meets:
        for n in (a, b):
            if n not in known:
                violations.append(f"[meet] names unknown curve {n}")
    for point in cfg.points:
        for n in point.curves:
            if not cfg.has_curve(n):
                violations.append(f"[point] names unknown curve {n}")
        for (a, b), order in point.contacts:
            if a not in point.curves or b not in point.curves:
                violations.append(f"[point] contact {a},{b} is not between curves through the point")
            if order < 1:
                violations.append(f"[point] contact order {order} must be at least 1")
        for n, order in point.multiplicities:
            if n not in point.curves or order < 1:
                violations.append(f"[point] multiplicity {n}:{order} is invalid")
    return violations

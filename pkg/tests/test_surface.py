import os
import random
from fractions import Fraction

import pytest

from lctdv.errors import ParseError, SingularGram, UnknownCurve, ValidationError
from lctdv.exactlin import QVector
from lctdv.linform import LinForm
from lctdv.surface import (
    aux_form, candidates, decompose_anticanonical, divisor_class, exceptional_form, load_surface,
    nonneg_constraints, parse_surface, profile_vector, pullback_of, pushforward_intersection,
    scale_vector, solve_pullback, validate_config,
)

SURFACES = sorted(os.listdir(os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                                          'fixtures', 'surfaces')))


def q(*values):
    return QVector(tuple(Fraction(v) for v in values))


@pytest.mark.parametrize('name', SURFACES)
def test_every_fixture_validates(surface, name):
    cfg = surface(name)
    assert validate_config(cfg) == []
    assert candidates(cfg)


def test_a3_layout(surface):
    cfg = surface('A3.deg1')
    assert cfg.labels == ('E1', 'E2', 'E3')
    assert cfg.variables == ('a1', 'a2', 'a3')
    assert cfg.adjacent_pairs() == [('E1', 'E2'), ('E2', 'E3')]
    assert cfg.singularity_signature() == 'A3'
    assert cfg.condition() == '-'


def test_anticanonical_member(surface):
    cfg = surface('A3.deg1')
    z = cfg.curve('Z')
    assert pullback_of(cfg, 'Z') == q(1, 1, 1)
    assert z.self_int_strict == -1
    assert z.assume_not_in_support
    assert str(z.relations[0]) == 'Z:1'


def test_solve_pullback(surface):
    cfg = surface('A3.deg1')
    assert solve_pullback(cfg, profile_vector(cfg, {'E2': Fraction(1)})) == q('1/2', 1, '1/2')
    with pytest.raises(UnknownCurve):
        profile_vector(cfg, {'F1': Fraction(1)})


@pytest.mark.parametrize('name', SURFACES)
def test_pullback_of_a_nonnegative_profile_is_positive_on_its_blocks(surface, name):
    cfg = surface(name)
    rng = random.Random(name)
    for _ in range(100):
        profile = [rng.randint(0, 3) for _ in range(cfg.size)]
        coeffs = solve_pullback(cfg, QVector.of(profile))
        for block in cfg.blocks:
            span = range(block.offset, block.offset + block.type.rank)
            if any(profile[i] for i in span):
                assert all(coeffs[i] > 0 for i in span)
            else:
                assert all(coeffs[i] == 0 for i in span)


def test_two_blocks_use_their_own_variables(surface):
    cfg = surface('A3+2A1.deg4')
    assert cfg.variables == ('a1', 'a2', 'a3', 'b1', 'c1')
    assert pullback_of(cfg, 'L1') == q('3/4', '1/2', '1/4', '1/2', 0)
    assert cfg.singularity_signature() == 'A3+2A1'


def test_pushforward_intersection(surface):
    cfg = surface('A6.deg1')
    assert pushforward_intersection(cfg, 'L2', 'L5') == Fraction(11, 7)
    assert pushforward_intersection(cfg, 'L2', 'L2') == Fraction(3, 7)
    assert pushforward_intersection(cfg, 'L2', "L2'") == Fraction(10, 7)


def test_decompose_anticanonical(surface):
    cfg = surface('A6.deg1')
    assert decompose_anticanonical(cfg, ['L2', "L2'", 'L3']) == q('1/3', '1/3', '1/3')
    with pytest.raises(SingularGram):
        decompose_anticanonical(cfg, ['L2', 'L2'])


def test_candidates(surface):
    cfg = surface('A4.deg1')
    found = {str(m): d for m, d in candidates(cfg)}
    assert set(found) == {'Z:1', 'C:2'}
    assert found['C:2'].weight('C') == Fraction(1, 2)
    assert found['C:2'].exceptional_part == q('1/2', 1, 1, '1/2')


def test_divisor_class(surface):
    cfg = surface('A5.deg1')
    d = divisor_class(cfg, {'L3': Fraction(1, 2), "L3'": Fraction(1, 2)})
    assert d.exceptional_part == q('1/2', 1, '3/2', 1, '1/2')
    assert d.describe() == "1/2*L3+1/2*L3'"


def test_forms(surface):
    cfg = surface('A3.deg1')
    assert exceptional_form(cfg, 'E2') == LinForm.of({'a1': -1, 'a2': 2, 'a3': -1})
    assert aux_form(cfg, 'Z') == LinForm.of({'a1': -1, 'a3': -1}, 1)
    scaled = exceptional_form(cfg, 'E3', scale_vector(cfg, fundamental=True))
    assert scaled == LinForm.of({'a2': -1, 'a3': 2})


def test_fundamental_scale(surface):
    cfg = surface('E6.deg1')
    assert scale_vector(cfg, fundamental=True) == q(1, 2, 3, 2, 2, 1)
    assert scale_vector(cfg) == q(1, 1, 1, 1, 1, 1)


def test_nonneg_constraints(surface):
    cfg = surface('A5.deg1')
    plain = nonneg_constraints(cfg)
    assert len(plain) == 1 + 5 + 5
    assumed = nonneg_constraints(cfg, extra_not_in_support=['L3'])
    assert len(assumed) == 2 + 5 + 5
    assert assumed.constraints[1].form == LinForm.of({'a3': -1}, 1)


BROKEN_COEFFS = '''\
[surface] name=A3 degree=1
[singularity] type=A3 labels=E1..E3
[curve] name=L antican=1 profile=E2=1 coeffs=E1=1,E2=1,E3=1/2
'''

BROKEN_RELATION = '''\
[surface] name=A3 degree=1
[singularity] type=A3 labels=E1..E3
[curve] name=L antican=1 profile=E2=1 relation=L:1
'''


def test_pullback_mismatch_is_reported():
    with pytest.raises(ValidationError) as e:
        load_surface(BROKEN_COEFFS, 'broken.deg1')
    assert e.value.violations == ['L: pullback mismatch at E_1 (declared 1, computed 1/2)']


def test_relation_violation_is_reported():
    violations = validate_config(parse_surface(BROKEN_RELATION))
    assert violations == ['relation L:1: D·L = 0, expected 1']


MISSED_MEMBER = '''\
[surface] name=A4 degree=1
[singularity] type=A4 labels=E1..E4
[anticanonical] through=E
[curve] name=L antican=2 selfint=14/5 profile=E2=1 relation=L:2
'''


def test_relation_checked_against_the_anticanonical_member():
    assert validate_config(parse_surface(MISSED_MEMBER)) == ['relation L:2: D·Z = 1, expected 2']


def test_not_negative_definite():
    cfg = parse_surface('[surface] name=X degree=1\n[singularity] type=A1 labels=F1 selfint=F1=0\n')
    assert validate_config(cfg) == ['exceptional intersection matrix is not negative definite']


@pytest.mark.parametrize('text, line', [
    ('[surface] name=X\n', 1),
    ('[surface] name=X degree=1\n[singularity] type=B2 labels=E1..E2\n', 2),
    ('[surface] name=X degree=1\n[singularity] type=A3 labels=E1..E2\n', 2),
    ('[surface] name=X degree=1\n[singularity] type=A1 labels=E1\n[anticanonical] through=F\n', 3),
    ('[surface] name=X degree=1/2.5\n', 1),
])
def test_parse_errors_carry_the_line(text, line):
    with pytest.raises(ParseError) as e:
        parse_surface(text, 'x.deg1')
    assert e.value.line == line

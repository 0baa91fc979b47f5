import random
from fractions import Fraction

import pytest

from lctdv.blowup import (
    PointSpec, blowup, global_lct_upper, init_state, lct_of_state, lct_pair, resolve_to_snc, trace_lines,
)
from lctdv.errors import BudgetExceeded, InconsistentTangency, NoCandidates, UnknownPoint, ZeroDivisor
from lctdv.surface import divisor_class, load_surface


@pytest.mark.parametrize('name, value, witness', [
    ('A3.deg1', '1', 'E1'),
    ('D4.deg1', '1/2', 'E3'),
    ('E6.deg1', '1/3', 'E3'),
    ('E7.deg1', '1/4', 'E3'),
    ('E8.deg1', '1/6', 'E3'),
    ('A3+2A1.deg4', '1/4', 'L1'),
    ('A2+A1.deg6', '1/6', 'L1'),
])
def test_upper_bound_without_blowups(surface, name, value, witness):
    upper = global_lct_upper(surface(name))
    assert upper.value == Fraction(value)
    assert upper.result.witness == witness
    assert upper.result.resolution_depth == 0


@pytest.mark.parametrize('name, value', [
    ('A5.deg1', '2/3'),
    ('A6.deg1', '2/3'),
    ('A7.deg1', '1/2'),
    ('A7-reducible.deg1', '3/5'),
    ('A8.deg1', '1/2'),
    ('D7.deg1', '2/5'),
    ('D8.deg1', '1/3'),
    ('E7+A1.deg1', '1/4'),
    ('2D4.deg1', '1/2'),
    ('A5+A2+A1.deg1', '2/3'),
    ('E7.deg2', '1/6'),
    ('A5+A2.deg2', '1/3'),
    ('D5.deg4', '1/6'),
    ('A4.deg5', '1/6'),
    ('2A3.deg1', '1'),
])
def test_upper_bound_values(surface, name, value):
    assert global_lct_upper(surface(name)).value == Fraction(value)


def test_a4_needs_one_blowup(surface):
    upper = global_lct_upper(surface('A4.deg1'))
    assert upper.value == Fraction(4, 5)
    assert str(upper.candidate) == 'C:2'
    assert upper.result.witness == 'F_1'
    assert trace_lines(upper.result.state) == ['step 1: point {C,E2,E3} -> F_1 m=5/2 a=1']


@pytest.mark.parametrize('name, value, witness, depth', [
    ('A4+A1-no-cusp.deg1', '4/5', 'F_1', 1),
    ('A4+A1-cusp-A1.deg1', '3/4', 'F_2', 2),
    ('A4+A2-cusp-A2.deg1', '2/3', 'F_1', 1),
    ('A3+A1-cusp-smooth.deg1', '5/6', 'F_3', 3),
])
def test_cuspidal_members(surface, name, value, witness, depth):
    result = global_lct_upper(surface(name)).result
    assert (result.value, result.witness, result.resolution_depth) == (Fraction(value), witness, depth)


def test_cusp_at_a_smooth_point_trace(surface):
    cfg = surface('A3+A1-cusp-smooth.deg1')
    result = lct_pair(cfg, divisor_class(cfg, {'Zc': Fraction(1)}))
    assert trace_lines(result.state) == [
        'step 1: point {Zc} -> F_1 m=2 a=1',
        'step 2: point {F_1,Zc} -> F_2 m=3 a=2',
        'step 3: point {F_1,F_2,Zc} -> F_3 m=6 a=4',
    ]


def test_terminal_divisor(surface):
    cfg = surface('A6.deg1')
    divisor = divisor_class(cfg, {'L2': Fraction(1, 3), "L2'": Fraction(1, 3), 'L3': Fraction(1, 3)})
    result = lct_pair(cfg, divisor)
    assert (result.value, result.witness) == (Fraction(3, 4), 'E2')


def test_manual_blowup(surface):
    cfg = surface('A4.deg1')
    divisor = divisor_class(cfg, {'C': Fraction(1, 2)})
    state = init_state(cfg, divisor)
    triple = PointSpec.of(['C', 'E2', 'E3'])
    assert triple in state.incidences
    after = blowup(state, triple)
    assert after.numeric_m('F_1') == Fraction(5, 2)
    assert after.curve('F_1').a == 1
    assert resolve_to_snc(after) == after
    assert lct_of_state(after) == (Fraction(4, 5), 'F_1')
    with pytest.raises(UnknownPoint):
        blowup(after, triple)


def test_budget(surface):
    cfg = surface('A4.deg1')
    with pytest.raises(BudgetExceeded):
        lct_pair(cfg, divisor_class(cfg, {'C': Fraction(1, 2)}), budget=0)


def test_zero_divisor(surface):
    cfg = surface('A3.deg1')
    with pytest.raises(ZeroDivisor):
        lct_pair(cfg, divisor_class(cfg, {}))


def test_no_candidates():
    cfg = load_surface('[surface] name=A1 degree=2\n[singularity] type=A1 labels=E1\n')
    with pytest.raises(NoCandidates):
        global_lct_upper(cfg)


def test_point_spec_checks():
    with pytest.raises(InconsistentTangency):
        PointSpec.of(['a', 'b'], {('a', 'c'): 2})
    with pytest.raises(InconsistentTangency):
        PointSpec.of(['a', 'b', 'c'], {('a', 'b'): 3, ('b', 'c'): 3})
    with pytest.raises(InconsistentTangency):
        PointSpec.of(['a'], multiplicity={'a': 0})
    assert PointSpec.of(['a', 'b'], {('a', 'b'): 1}).is_snc()
    assert not PointSpec.of(['a', 'b'], {('a', 'b'): 2}).is_snc()


def test_free_point_on_an_unweighted_curve(surface):
    cfg = surface('A6.deg1')
    divisor = divisor_class(cfg, {'L2': Fraction(1, 2)})
    free = PointSpec.of(["L5'"])
    assert free not in init_state(cfg, divisor).incidences
    state = init_state(cfg, divisor, [free])
    assert free in state.incidences
    after = blowup(state, free)
    assert after.numeric_m('F_1') == 0
    assert after.curve('F_1').a == 1
    assert resolve_to_snc(after) == after


@pytest.mark.parametrize('name, weights', [
    ('A4.deg1', {'C': Fraction(1, 2)}),
    ('A6.deg1', {'L2': Fraction(1, 3), "L2'": Fraction(1, 3), 'L3': Fraction(1, 3)}),
    ('A3+A1-cusp-smooth.deg1', {'Zc': Fraction(1)}),
])
def test_lct_scales_inversely(surface, name, weights):
    cfg = surface(name)
    base = lct_pair(cfg, divisor_class(cfg, weights))
    rng = random.Random(name)
    for _ in range(50):
        factor = Fraction(rng.randint(1, 12), rng.randint(1, 12))
        scaled = lct_pair(cfg, divisor_class(cfg, {c: factor * w for c, w in weights.items()}))
        assert scaled.value == base.value / factor
        assert scaled.witness == base.witness

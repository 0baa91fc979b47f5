from fractions import Fraction

import pytest
import sympy

from lctdv.dynkin import (
    SingularityType, all_types, brute_force_minimal_cycles, dynkin_graph, fundamental_cycle,
    fundamental_cycle_profile, intersection_matrix, is_anti_nef, parse_signature, signature,
)
from lctdv.errors import InvalidRank, ParseError
from lctdv.exactlin import determinant


def _expected_det(t):
    if t.kind == 'A':
        return t.rank + 1
    if t.kind == 'D':
        return 4
    return 9 - t.rank


@pytest.mark.parametrize('t', all_types(), ids=str)
def test_intersection_matrix_matches_sympy(t):
    M = intersection_matrix(t)
    oracle = sympy.Matrix(M.to_lists())
    assert oracle.is_symmetric()
    assert determinant(-M) == _expected_det(t)
    assert Fraction(int((-oracle).det())) == _expected_det(t)


@pytest.mark.parametrize('t, cycle', [
    ('A1', (1,)),
    ('A5', (1, 1, 1, 1, 1)),
    ('D4', (1, 1, 2, 1)),
    ('D6', (1, 1, 2, 2, 2, 1)),
    ('E6', (1, 2, 3, 2, 2, 1)),
    ('E7', (2, 3, 4, 2, 3, 2, 1)),
    ('E8', (2, 4, 6, 3, 5, 4, 3, 2)),
])
def test_fundamental_cycle(t, cycle):
    assert tuple(fundamental_cycle(SingularityType.parse(t))) == tuple(Fraction(c) for c in cycle)


@pytest.mark.parametrize('t', all_types(), ids=str)
def test_laufer_agrees_with_brute_force(t):
    assert brute_force_minimal_cycles(t) == [tuple(int(z) for z in fundamental_cycle(t))]


@pytest.mark.parametrize('t, cap', [('A1', 1), ('A3', 3), ('D5', 4), ('E6', 5)])
def test_minimum_does_not_depend_on_the_box(t, cap):
    t = SingularityType.parse(t)
    (minimum,) = brute_force_minimal_cycles(t, cap)
    assert is_anti_nef(t, minimum)
    assert brute_force_minimal_cycles(t, cap + 2) == [minimum]


def test_box_below_the_fundamental_cycle_is_empty():
    assert brute_force_minimal_cycles(SingularityType('E', 8), 5) == []
    assert brute_force_minimal_cycles(SingularityType('D', 6), 1) == []


def test_fundamental_cycle_profile():
    assert tuple(fundamental_cycle_profile(SingularityType('A', 1))) == (2,)
    assert tuple(fundamental_cycle_profile(SingularityType('A', 3))) == (1, 0, 1)
    assert tuple(fundamental_cycle_profile(SingularityType('D', 4))) == (0, 0, 1, 0)


def test_dynkin_graph_labelling():
    d4 = dynkin_graph(SingularityType('D', 4))
    assert d4.adjacent('E1', 'E3') and d4.adjacent('E2', 'E3') and d4.adjacent('E3', 'E4')
    assert not d4.adjacent('E1', 'E2')
    e6 = dynkin_graph(SingularityType('E', 6), 'F')
    assert e6.adjacent('F3', 'F4') and e6.adjacent('F3', 'F5')
    assert dict(e6.to_networkx().degree())['F3'] == 3


@pytest.mark.parametrize('text', ['A0', 'D3', 'E5', 'E9'])
def test_invalid_rank(text):
    with pytest.raises(InvalidRank):
        SingularityType.parse(text)


def test_bad_type():
    with pytest.raises(ParseError):
        SingularityType.parse('B2')


def test_signature_is_canonical():
    assert signature(parse_signature('A1+2A3')) == '2A3+A1'
    assert signature(parse_signature('A1 + E7')) == 'E7+A1'
    assert signature(parse_signature('A3+D5')) == 'D5+A3'
    assert signature(parse_signature('smooth')) == 'smooth'
    assert parse_signature('3A1') == [SingularityType('A', 1)] * 3


@pytest.mark.parametrize('t', all_types(), ids=str)
def test_definiteness_matches_sympy(t):
    from lctdv.exactlin import is_negative_definite
    M = intersection_matrix(t)
    assert is_negative_definite(M) == (-sympy.Matrix(M.to_lists())).is_positive_definite

from fractions import Fraction

import pytest

from lctdv.errors import ParseError, UnknownVariable
from lctdv.linform import Constraint, ConstraintSystem, LinForm, Relation, ge, gt, variable_key
from lctdv.parsing import KExpression, parse_constraint, parse_linform, read_directives


def test_variable_order():
    assert sorted(['m1', 'a10', 'b1', 'a2'], key=variable_key) == ['a2', 'a10', 'b1', 'm1']


def test_linform_merges_and_drops_zero_terms():
    form = LinForm.of({'a2': 1, 'a1': 2}) + LinForm.var('a2', -1) + 3
    assert form.variables() == ('a1',)
    assert form.coeff('a1') == 2
    assert form.constant == 3
    assert str(form) == '2*a1 + 3'


def test_linform_substitute():
    form = LinForm.of({'a1': 2, 'a2': 1})
    assert form.substitute('a1', LinForm.of({'a2': 1}, 1)) == LinForm.of({'a2': 3}, 2)


def test_constraint_helpers():
    c = gt(LinForm.var('a1'), 1)
    assert c.relation is Relation.GT
    assert not c.holds_at({'a1': Fraction(1)})
    assert c.closure().holds_at({'a1': Fraction(1)})
    assert ge(LinForm.var('a1'), LinForm.var('a2')).form == LinForm.of({'a1': 1, 'a2': -1})


def test_system_rejects_undeclared_variables():
    with pytest.raises(UnknownVariable):
        ConstraintSystem(('a1',), (Constraint(LinForm.var('a2')),))


def test_parse_constraint():
    assert parse_constraint('2*a1 - a2 >= 1') == Constraint(LinForm.of({'a1': 2, 'a2': -1}, -1), Relation.GE)
    assert parse_constraint('a1 < 3') == Constraint(LinForm.of({'a1': -1}, 3), Relation.GT)
    assert parse_constraint('1 - a3 >= 0') == Constraint(LinForm.of({'a3': -1}, 1), Relation.GE)
    assert parse_constraint('a1 == a2').relation is Relation.EQ


@pytest.mark.parametrize('text', ['1.5*a1 >= 0', 'a1*a2 >= 0', 'a1 >= 0 >= a2', 'a1 + 1'])
def test_parse_constraint_rejects(text):
    with pytest.raises(ParseError):
        parse_constraint(text)


@pytest.mark.parametrize('text', [
    "__import__('os').system('true') >= 0",
    '__import__(os) >= 0',
    'a1 >= __class__',
    'eval(a1) >= 0',
    'open(a1) + 1 >= 0',
    'a1 @ a2 >= 0',
    'a1 >= 0; a2',
])
def test_fixture_text_is_not_evaluated(text):
    with pytest.raises(ParseError):
        parse_constraint(text)


def test_parse_linform_with_names_sympy_knows():
    # E, I and S are sympy builtins unless bound as symbols
    assert parse_linform('E + 2*I - S').coeffs == {'E': 1, 'I': 2, 'S': -1}


def test_k_expression():
    claim = KExpression('2*k/(2*k+1)')
    assert claim.at(1) == Fraction(2, 3)
    assert claim.at(12) == Fraction(24, 25)
    with pytest.raises(ParseError):
        KExpression('a2*k')


def test_read_directives():
    text = (
        '# comment\n'
        '[chain] center=E1,E2 depth=12 claim(k)=a2 > 2*k/(2*k+1)   # trailing\n'
        '[assume] disjunction: a2 <= 1 | a3 <= 1\n'
        '[curve] name=C not-in-support\n'
    )
    chain, assume, curve = read_directives(text)
    assert chain.line == 2
    assert chain.get('center') == 'E1,E2'
    assert chain.get('claim(k)') == 'a2 > 2*k/(2*k+1)'
    assert assume.flags == ['disjunction']
    assert assume.tail == 'a2 <= 1 | a3 <= 1'
    assert curve.flags == ['not-in-support']


def test_read_directives_reports_position():
    with pytest.raises(ParseError) as e:
        read_directives('[surface] name=X degree=1\n  bogus line\n', 'x.deg1')
    assert e.value.line == 2
    assert e.value.column == 3
    assert e.value.source == 'x.deg1'

'''Line-oriented fixture syntax and the small expression languages.

Linear inequalities and ``k``-expressions are parsed with sympy and
converted to Fractions; anything that is not an exact rational (floats,
symbols left over after substitution) is a ParseError.
'''

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import sympy
from sympy.parsing.sympy_parser import parse_expr

from lctdv.errors import ParseError
from lctdv.linform import Constraint, LinForm, Relation

_DIRECTIVE_RE = re.compile(r'^\[([a-z]+)\]\s*(.*)$')
_IDENT_RE = re.compile(r'[A-Za-z_][A-Za-z_0-9]*')
_RELATION_RE = re.compile(r'(>=|<=|>|<|=)')
_EXPR_RE = re.compile(r'^[A-Za-z0-9_+\-*/()\s]*$')
TAIL_KEYS = ('claim(k)=', 'extra=')


@dataclass
class Directive:
    kind: str
    line: int
    options: Dict[str, List[str]] = field(default_factory=dict)
    flags: List[str] = field(default_factory=list)
    columns: Dict[str, int] = field(default_factory=dict)
    tail: str = ''
    source: str = ''

    def get(self, key: str, default: Optional[str] = None) -> Optional[str]:
        values = self.options.get(key)
        return values[-1] if values else default

    def require(self, key: str) -> str:
        value = self.get(key)
        if value is None:
            raise self.error(f"[{self.kind}] needs {key}=", key)
        return value

    def all(self, key: str) -> List[str]:
        return self.options.get(key, [])

    def error(self, message: str, key: Optional[str] = None) -> ParseError:
        return ParseError(message, self.line, self.columns.get(key, 1), self.source)


def read_directives(text: str, source: str = '') -> List[Directive]:
    directives = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].rstrip()
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        match = _DIRECTIVE_RE.match(line.strip())
        if match is None:
            raise ParseError(f"expected '[directive] ...', got {line.strip()!r}", number, indent + 1, source)
        kind, rest = match.groups()
        directive = Directive(kind, number, source=source)
        offset = indent + line.strip().index(rest) + 1 if rest else indent + 1
        if kind == 'assume' and rest.startswith('disjunction:'):
            directive.tail = rest[len('disjunction:'):].strip()
            directive.flags.append('disjunction')
            directives.append(directive)
            continue
        for key in TAIL_KEYS:
            position = rest.find(key)
            if position >= 0:
                directive.options[key[:-1]] = [rest[position + len(key):].strip()]
                directive.columns[key[:-1]] = offset + position
                rest = rest[:position]
                break
        for token_match in re.finditer(r'\S+', rest):
            token = token_match.group(0)
            column = offset + token_match.start()
            if '=' in token:
                key, value = token.split('=', 1)
                if not key or not value:
                    raise ParseError(f"malformed option {token!r}", number, column, source)
                directive.options.setdefault(key, []).append(value)
                directive.columns.setdefault(key, column)
            else:
                directive.flags.append(token)
                directive.columns.setdefault(token, column)
        directives.append(directive)
    return directives


def _symbols_for(text: str) -> Dict[str, sympy.Symbol]:
    return {name: sympy.Symbol(name) for name in _IDENT_RE.findall(text)}


def _evaluation_globals() -> Dict[str, object]:
    # only what the number and symbol transformations emit, no builtins
    return {
        '__builtins__': {},
        'Integer': sympy.Integer,
        'Rational': sympy.Rational,
        'Float': sympy.Float,
        'Symbol': sympy.Symbol,
    }


def to_fraction(value) -> Fraction:
    value = sympy.sympify(value)
    if not value.is_Rational:
        raise ParseError(f"not an exact rational: {value}")
    return Fraction(int(value.p), int(value.q))


def _sympy(text: str):
    if '.' in text:
        raise ParseError(f"floats are not accepted: {text!r}")
    if not _EXPR_RE.match(text) or any(name.startswith('_') for name in _IDENT_RE.findall(text)):
        raise ParseError(f"unexpected characters in {text!r}")
    try:
        return parse_expr(text, local_dict=_symbols_for(text), global_dict=_evaluation_globals())
    except (SyntaxError, TypeError, ValueError, NameError, AttributeError, sympy.SympifyError) as e:
        raise ParseError(f"cannot parse {text!r}: {e}") from e


def _linear(expr, text: str) -> LinForm:
    terms = sympy.expand(expr).as_coefficients_dict()
    coeffs: Dict[str, Fraction] = {}
    constant = Fraction(0)
    for term, coeff in terms.items():
        if term == 1:
            constant += to_fraction(coeff)
        elif isinstance(term, sympy.Symbol):
            coeffs[term.name] = to_fraction(coeff)
        else:
            raise ParseError(f"not linear: {text!r}")
    return LinForm.of(coeffs, constant)


def parse_linform(text: str) -> LinForm:
    return _linear(_sympy(text), text)


def parse_constraint(text: str) -> Constraint:
    '''``lhs op rhs`` with op in >=, >, <=, <, = (or ==).'''
    parts = _RELATION_RE.split(text.replace('==', '='))
    if len(parts) != 3:
        raise ParseError(f"expected exactly one relation in {text!r}")
    lhs, op, rhs = parts
    difference = _sympy(lhs) - _sympy(rhs)
    form = _linear(difference, text)
    if op == '>=':
        return Constraint(form, Relation.GE)
    if op == '>':
        return Constraint(form, Relation.GT)
    if op == '<=':
        return Constraint(-form, Relation.GE)
    if op == '<':
        return Constraint(-form, Relation.GT)
    return Constraint(form, Relation.EQ)


@dataclass(frozen=True)
class KExpression:
    '''A rational expression in the chain level ``k``.'''
    text: str

    def __post_init__(self):
        expr = _sympy(self.text)
        extra = {s.name for s in expr.free_symbols} - {'k'}
        if extra:
            raise ParseError(f"k-expression {self.text!r} mentions {sorted(extra)}")

    def at(self, k: int) -> Fraction:
        expr = _sympy(self.text)
        return to_fraction(expr.subs(sympy.Symbol('k'), sympy.Integer(k)))


def split_pair(text: str, separator: str = ':') -> Tuple[str, str]:
    if separator not in text:
        raise ParseError(f"expected '<a>{separator}<b>' in {text!r}")
    left, right = text.rsplit(separator, 1)
    return left.strip(), right.strip()

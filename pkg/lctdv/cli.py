'''Command line: ``lctdv pullback|bound|lct-pair|certify|tables|validate``.

Library errors become exit codes here and nowhere else.
'''

import argparse
import logging
import os
import sys
from fractions import Fraction
from typing import Any, Dict, Optional, Sequence, Tuple

import config.exit_codes as ec
from lctdv.blowup import DEFAULT_BUDGET, global_lct_upper, lct_pair, trace_lines
from lctdv.certify import (
    DEFAULT_CHAIN_DEPTH, LemmaScript, base_system, check_script, lemma_path, load_lemma_file,
    replay_lemma, report_lines,
)
from lctdv.errors import FixtureNotFound, LctdvError, ParseError, ValidationError
from lctdv.exactlin import format_rational, parse_rational
from lctdv.harness import reproduce_tables, table_lines, write_report_tsv
from lctdv.linform import LinForm
from lctdv.polytope import Sense, bound, dump_system
from lctdv.surface import (
    SurfaceConfig, divisor_class, load_surface_file, parse_surface, profile_vector, pullback_of,
    solve_pullback, surface_path, validate_config,
)

logger = logging.getLogger(__name__)

FIXTURES_ENV = 'LCTDV_FIXTURES'
DEFAULT_CONFIG: Dict[str, Any] = {
    'fixtures_dir': 'fixtures',
    'blowup_budget': DEFAULT_BUDGET,
    'chain_depth': DEFAULT_CHAIN_DEPTH,
    'known_issues': os.path.join('fixtures', 'known_issues.yaml'),
    'skip_allowlist': [],
}


def with_defaults(config: Optional[Dict[str, Any]]) -> Dict[str, Any]:
    '''Fill missing keys and apply the LCTDV_FIXTURES override.'''
    merged = dict(DEFAULT_CONFIG)
    merged.update(config or {})
    override = os.getenv(FIXTURES_ENV)
    if override:
        merged['fixtures_dir'] = override
        if not (config or {}).get('known_issues'):
            merged['known_issues'] = os.path.join(override, 'known_issues.yaml')
    return merged


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='lctdv', description='Global log canonical thresholds of Du Val del Pezzo surfaces')
    commands = parser.add_subparsers(dest='command', required=True)

    pullback = commands.add_parser('pullback', help='pullback coefficients of a curve')
    pullback.add_argument('--surface', required=True)
    source = pullback.add_mutually_exclusive_group(required=True)
    source.add_argument('--profile', help='strict-transform profile, e.g. E3=1')
    source.add_argument('--curve', help='a declared auxiliary curve')

    bound_cmd = commands.add_parser('bound', help='MAX of every variable over the base system')
    target = bound_cmd.add_mutually_exclusive_group(required=True)
    target.add_argument('--surface')
    target.add_argument('--lemma')
    bound_cmd.add_argument('--dump-system', action='store_true')

    pair = commands.add_parser('lct-pair', help='lct of an explicit divisor')
    pair.add_argument('--surface', required=True)
    pair.add_argument('--divisor', help="weighted curves, e.g. 1/3*L2+1/3*L2'+1/3*L3")
    pair.add_argument('--trace', action='store_true')

    certify = commands.add_parser('certify', help='replay a lemma script')
    certify.add_argument('--lemma', required=True)
    certify.add_argument('--chain-depth', type=int)
    certify.add_argument('--target', help='replay at this t instead of the scripted one')
    certify.add_argument('--trace', action='store_true')
    certify.add_argument('--dump-system', action='store_true')

    tables = commands.add_parser('tables', help='reproduce the expected-value tables')
    tables.add_argument('--expected')
    tables.add_argument('--tsv', help='also write the report as TSV')

    validate = commands.add_parser('validate', help='check a surface file (and optionally a lemma) for violations')
    validate.add_argument('--surface', required=True)
    validate.add_argument('--lemma')
    return parser


def _surface_file(config: Dict[str, Any], name: str) -> str:
    if os.path.exists(name):
        return name
    return surface_path(config['fixtures_dir'], name)


def _lemma_file(config: Dict[str, Any], name: str) -> str:
    if os.path.exists(name):
        return name
    return lemma_path(config['fixtures_dir'], name)


def _load_lemma(config: Dict[str, Any], name: str) -> Tuple[LemmaScript, SurfaceConfig]:
    script = load_lemma_file(_lemma_file(config, name))
    cfg = load_surface_file(surface_path(config['fixtures_dir'], script.surface))
    return script, cfg


def parse_weights(text: str) -> Dict[str, Fraction]:
    '''``1/2*C`` or ``L2+L5`` or ``1/3*L2+1/3*L2'`` as a weight per curve.'''
    weights: Dict[str, Fraction] = {}
    for term in text.split('+'):
        term = term.strip()
        if not term:
            raise ParseError(f"empty term in divisor {text!r}")
        if '*' in term:
            weight, name = term.split('*', 1)
            value = parse_rational(weight.strip())
        else:
            name, value = term, Fraction(1)
        name = name.strip()
        weights[name] = weights.get(name, Fraction(0)) + value
    return weights


def parse_profile(text: str) -> Dict[str, Fraction]:
    values: Dict[str, Fraction] = {}
    for item in text.split(','):
        if '=' not in item:
            raise ParseError(f"expected <label>=<value> in profile {text!r}")
        label, value = item.split('=', 1)
        values[label.strip()] = parse_rational(value.strip())
    return values


def cmd_pullback(args, config: Dict[str, Any]) -> int:
    cfg = load_surface_file(_surface_file(config, args.surface))
    if args.curve:
        coeffs = pullback_of(cfg, args.curve)
    else:
        coeffs = solve_pullback(cfg, profile_vector(cfg, parse_profile(args.profile)))
    print(' '.join(format_rational(c) for c in coeffs))
    return ec.SUCCESS


def cmd_bound(args, config: Dict[str, Any]) -> int:
    if args.lemma:
        script, cfg = _load_lemma(config, args.lemma)
        check_script(cfg, script)
        system = base_system(cfg, script)
    else:
        cfg = load_surface_file(_surface_file(config, args.surface))
        system = base_system(cfg)
    if args.dump_system:
        sys.stdout.write(dump_system(system))
    for variable in system.variables:
        result = bound(system, LinForm.var(variable), Sense.MAX)
        value = format_rational(result.value) if result.value is not None else result.status.value.lower()
        print(f"MAX {variable} = {value}")
    return ec.SUCCESS


def cmd_lct_pair(args, config: Dict[str, Any]) -> int:
    cfg = load_surface_file(_surface_file(config, args.surface))
    budget = int(config['blowup_budget'])
    if args.divisor:
        divisor = divisor_class(cfg, parse_weights(args.divisor))
        result = lct_pair(cfg, divisor, budget=budget)
    else:
        upper = global_lct_upper(cfg, budget)
        divisor, result = upper.divisor, upper.result
        print(f"candidate {upper.candidate}")
    if args.trace:
        for line in trace_lines(result.state):
            print(line)
    print(f"divisor {divisor.describe()}")
    print(f"lct = {format_rational(result.value)} at {result.witness} after {result.resolution_depth} blow-ups")
    return ec.SUCCESS


def cmd_certify(args, config: Dict[str, Any]) -> int:
    script, cfg = _load_lemma(config, args.lemma)
    if args.target:
        script = script.with_target(parse_rational(args.target))
    depth = args.chain_depth if args.chain_depth is not None else int(config['chain_depth'])
    report = replay_lemma(script, cfg, depth, int(config['blowup_budget']))
    for line in report_lines(report, trace=args.trace, dump=args.dump_system):
        print(line)
    return ec.SUCCESS if report.passed else ec.VERIFICATION_FAILED


def cmd_tables(args, config: Dict[str, Any]) -> int:
    expected = args.expected or os.path.join(config['fixtures_dir'], 'tables.tsv')
    report = reproduce_tables(config, expected)
    for line in table_lines(report):
        print(line)
    if args.tsv:
        write_report_tsv(report, args.tsv)
    return ec.SUCCESS if report.ok else ec.VERIFICATION_FAILED


def cmd_validate(args, config: Dict[str, Any]) -> int:
    path = _surface_file(config, args.surface)
    if not os.path.exists(path):
        raise FixtureNotFound(f"surface fixture {path} not found")
    with open(path, 'r', encoding='utf-8') as f:
        cfg = parse_surface(f.read(), os.path.basename(path))
    violations = validate_config(cfg)
    if args.lemma and not violations:
        script = load_lemma_file(_lemma_file(config, args.lemma))
        try:
            check_script(cfg, script)
        except ValidationError as e:
            violations.extend(e.violations)
    for violation in violations:
        print(violation)
    if violations:
        return ec.VERIFICATION_FAILED
    print(f"{cfg.name}: ok")
    return ec.SUCCESS


COMMANDS = {
    'pullback': cmd_pullback,
    'bound': cmd_bound,
    'lct-pair': cmd_lct_pair,
    'certify': cmd_certify,
    'tables': cmd_tables,
    'validate': cmd_validate,
}


def main(argv: Optional[Sequence[str]] = None, config: Optional[Dict[str, Any]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except SystemExit as e:
        return ec.SUCCESS if e.code in (0, None) else ec.INPUT_ERROR
    config = with_defaults(config)
    try:
        return COMMANDS[args.command](args, config)
    except LctdvError as e:
        logger.error(f"{args.command}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return ec.INPUT_ERROR
    except ValueError as e:
        logger.error(f"{args.command}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return ec.INPUT_ERROR

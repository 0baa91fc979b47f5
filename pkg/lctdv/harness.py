'''Fixture catalog and reproduction of the expected-value tables.'''

import logging
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import polars as pl
import yaml

from lctdv.blowup import DEFAULT_BUDGET, global_lct_upper
from lctdv.certify import DEFAULT_CHAIN_DEPTH, LemmaScript, VerificationReport, load_lemma_file, replay_lemma
from lctdv.dynkin import parse_signature, signature
from lctdv.errors import FixtureNotFound, ParseError
from lctdv.exactlin import format_rational, parse_rational
from lctdv.surface import SurfaceConfig, load_surface_file, parse_surface

logger = logging.getLogger(__name__)

KE_BOUND = Fraction(2, 3)
EXPECTED_COLUMNS = ('degree', 'singularities', 'condition', 'lct')

VERIFIED = 'VERIFIED'
MISMATCH = 'MISMATCH'
GAP = 'GAP'
KNOWN_ISSUE = 'KNOWN-ISSUE'
REFERENCE_ONLY = 'REFERENCE-ONLY'
SKIPPED = 'SKIPPED'

Signature = Tuple[int, str, str]


def ke_criterion(lct: Fraction) -> bool:
    '''A del Pezzo surface with quotient singularities and lct > 2/3 carries a Kähler–Einstein metric.'''
    if lct <= 0:
        raise ValueError(f"lct must be positive, got {format_rational(lct)}")
    return lct > KE_BOUND


def canonical_signature(degree: int, singularities: str, condition: str = '-') -> Signature:
    tags = sorted(t for t in (condition or '-').split(',') if t and t != '-')
    return int(degree), signature(parse_signature(singularities)), ','.join(tags) or '-'


@dataclass(frozen=True)
class TableEntry:
    degree: int
    singularities: str
    condition: str
    expected_lct: Fraction
    source: str = ''

    def __post_init__(self):
        if not 0 < self.expected_lct <= 1:
            raise ParseError(f"expected lct must lie in (0, 1], got {format_rational(self.expected_lct)}",
                             source=self.source)

    @property
    def signature(self) -> Signature:
        return canonical_signature(self.degree, self.singularities, self.condition)

    def is_reference_only(self) -> bool:
        '''Smooth surfaces and degree-one surfaces with only A1/A2 points are cited, not replayed.'''
        types = parse_signature(self.singularities)
        if not types:
            return True
        return self.degree == 1 and all(t.kind == 'A' and t.rank <= 2 for t in types)

    def describe(self) -> str:
        return f"degree {self.degree} {self.signature[1]} [{self.signature[2]}]"


def read_expected(path: str) -> List[TableEntry]:
    '''Expected values: TSV with columns degree, singularities, condition, lct.'''
    if not os.path.exists(path):
        raise FixtureNotFound(f"expected-values file {path} not found")
    frame = pl.read_csv(path, separator='\t', infer_schema_length=0)
    missing = [c for c in EXPECTED_COLUMNS if c not in frame.columns]
    if missing:
        raise ParseError(f"missing columns {missing}", 1, 1, os.path.basename(path))
    entries = []
    for line, row in enumerate(frame.iter_rows(named=True), start=2):
        where = f"{os.path.basename(path)}:{line}"
        try:
            entries.append(TableEntry(
                degree=int(row['degree']),
                singularities=row['singularities'].strip(),
                condition=(row['condition'] or '-').strip(),
                expected_lct=parse_rational(row['lct'].strip()),
                source=where,
            ))
        except (ValueError, AttributeError) as e:
            raise ParseError(f"bad row: {e}", line, 1, os.path.basename(path)) from None
        except ParseError as e:
            raise ParseError(e.message, line, 1, os.path.basename(path)) from None
    return entries


@dataclass(frozen=True)
class KnownIssue:
    signature: Signature
    reason: str
    computed: Optional[Fraction] = None


def load_known_issues(path: Optional[str]) -> Dict[Signature, KnownIssue]:
    if not path:
        return {}
    if not os.path.exists(path):
        logger.warning(f"known-issue ledger {path} not found; treating it as empty")
        return {}
    with open(path, 'r', encoding='utf-8') as f:
        data = yaml.safe_load(f) or []
    issues = {}
    for item in data:
        key = canonical_signature(item['degree'], str(item['singularities']), str(item.get('condition', '-')))
        computed = item.get('computed')
        issues[key] = KnownIssue(
            key, str(item['reason']).strip(), parse_rational(str(computed)) if computed is not None else None
        )
    return issues


class Catalog:
    '''Surface fixtures keyed by table signature, and the lemma scripts that go with them.'''

    def __init__(self, config: Dict[str, Any]):
        self.fixtures_dir = config['fixtures_dir']
        self.surface_dir = os.path.join(self.fixtures_dir, 'surfaces')
        self.lemma_dir = os.path.join(self.fixtures_dir, 'lemmas')
        self.by_signature: Dict[Signature, str] = {}
        self.lemma_files: Dict[str, str] = {}
        self.scan()

    def scan(self):
        '''Index every surface file by signature and every lemma by the surface it names.'''
        if not os.path.isdir(self.surface_dir):
            raise FixtureNotFound(f"no surfaces directory under {self.fixtures_dir}")
        for filename in sorted(os.listdir(self.surface_dir)):
            path = os.path.join(self.surface_dir, filename)
            with open(path, 'r', encoding='utf-8') as f:
                cfg = parse_surface(f.read(), filename)
            key = (int(cfg.degree), cfg.singularity_signature(), cfg.condition())
            if key in self.by_signature:
                logger.warning(f"{filename} repeats signature {key} of {self.by_signature[key]}; ignored")
                continue
            self.by_signature[key] = filename
        if os.path.isdir(self.lemma_dir):
            for filename in sorted(os.listdir(self.lemma_dir)):
                if not filename.endswith('.lemma'):
                    continue
                script = load_lemma_file(os.path.join(self.lemma_dir, filename))
                self.lemma_files.setdefault(script.surface, os.path.join(self.lemma_dir, filename))
        logger.info(f"catalog: {len(self.by_signature)} surfaces, {len(self.lemma_files)} lemma scripts")

    def lookup(self, entry: TableEntry) -> Optional[str]:
        return self.by_signature.get(entry.signature)

    def surface(self, name: str) -> SurfaceConfig:
        return load_surface_file(os.path.join(self.surface_dir, name))

    def lemma_for(self, surface_name: str) -> Optional[LemmaScript]:
        path = self.lemma_files.get(surface_name)
        return load_lemma_file(path) if path else None


@dataclass(frozen=True)
class EntryResult:
    entry: TableEntry
    status: str
    surface: str = ''
    upper: Optional[Fraction] = None
    certified: Optional[bool] = None
    reason: str = ''
    replay: Optional[VerificationReport] = field(default=None, compare=False, repr=False)

    @property
    def ke(self) -> Optional[bool]:
        if self.status in (VERIFIED, REFERENCE_ONLY):
            return ke_criterion(self.entry.expected_lct)
        return None


@dataclass(frozen=True)
class RunReport:
    results: Tuple[EntryResult, ...]
    known_issues: Dict[Signature, KnownIssue]
    allowlist: frozenset = frozenset()

    def count(self, status: str) -> int:
        return sum(1 for r in self.results if r.status == status)

    def unexpected_skips(self) -> List[EntryResult]:
        return [r for r in self.results if r.status == SKIPPED and r.entry.signature not in self.allowlist]

    @property
    def failures(self) -> List[EntryResult]:
        return [r for r in self.results if r.status in (MISMATCH, GAP)] + self.unexpected_skips()

    @property
    def ok(self) -> bool:
        return not self.failures


class TableRunner:
    '''Checks each expected entry: the upper bound from the fixture and the replayed lower bound.'''

    def __init__(self, config: Dict[str, Any]):
        self.config = config
        self.catalog = Catalog(config)
        self.budget = int(config.get('blowup_budget', DEFAULT_BUDGET))
        self.chain_depth = int(config.get('chain_depth', DEFAULT_CHAIN_DEPTH))
        self.known_issues = load_known_issues(config.get('known_issues'))
        self.allowlist = frozenset(
            canonical_signature(item['degree'], str(item['singularities']), str(item.get('condition', '-')))
            for item in config.get('skip_allowlist') or []
        )

    def run(self, expected: Sequence[TableEntry]) -> RunReport:
        results = [self.check_entry(entry) for entry in expected]
        report = RunReport(tuple(results), self.known_issues, self.allowlist)
        logger.info(
            f"tables: {report.count(VERIFIED)} verified, {report.count(KNOWN_ISSUE)} known issues, "
            f"{len(report.failures)} failures"
        )
        return report

    def check_entry(self, entry: TableEntry) -> EntryResult:
        if entry.is_reference_only():
            return EntryResult(entry, REFERENCE_ONLY, reason='value cited, not replayed')
        name = self.catalog.lookup(entry)
        if name is None:
            reason = 'no surface fixture'
            if entry.signature not in self.allowlist:
                logger.warning(f"{entry.describe()}: skipped, {reason}")
            return EntryResult(entry, SKIPPED, reason=reason)
        cfg = self.catalog.surface(name)
        script = self.catalog.lemma_for(name)
        if script is None:
            logger.warning(f"{entry.describe()}: skipped, no lemma script for {name}", extra={'surface': name})
            return EntryResult(entry, SKIPPED, name, reason=f"no lemma script for {name}")

        upper = global_lct_upper(cfg, self.budget).value
        replay = replay_lemma(script.with_target(entry.expected_lct), cfg, self.chain_depth, self.budget)
        if upper == entry.expected_lct and replay.passed:
            status, reason = VERIFIED, ''
            if entry.signature in self.known_issues:
                logger.warning(f"{entry.describe()}: listed as a known issue but verifies", extra={'surface': name})
        elif entry.signature in self.known_issues:
            status, reason = KNOWN_ISSUE, self.known_issues[entry.signature].reason
        elif upper != entry.expected_lct:
            status, reason = MISMATCH, f"upper bound {format_rational(upper)}"
        else:
            status, reason = GAP, f"{len(replay.gaps)} proof gaps in {script.name}"
        if status in (MISMATCH, GAP):
            logger.warning(f"{entry.describe()}: {status} ({reason})", extra={'surface': name})
        else:
            logger.info(f"{entry.describe()}: {status}", extra={'surface': name})
        return EntryResult(entry, status, name, upper, replay.passed, reason, replay)


def reproduce_tables(config: Dict[str, Any], expected_path: str) -> RunReport:
    return TableRunner(config).run(read_expected(expected_path))


def _yes_no(value: Optional[bool]) -> str:
    return '-' if value is None else ('yes' if value else 'no')


def table_lines(report: RunReport) -> List[str]:
    lines = []
    for r in report.results:
        degree, sig, condition = r.entry.signature
        upper = format_rational(r.upper) if r.upper is not None else '-'
        line = (
            f"{r.status:<14} {degree} {sig} [{condition}] expected={format_rational(r.entry.expected_lct)} "
            f"upper={upper} lower={_yes_no(r.certified)} KE={_yes_no(r.ke)}"
        )
        if r.reason:
            line += f"  # {r.reason}"
        lines.append(line)
    lines.append(
        f"summary: {len(report.results)} entries, {report.count(VERIFIED)} verified, "
        f"{report.count(KNOWN_ISSUE)} known issues, {report.count(REFERENCE_ONLY)} reference-only, "
        f"{report.count(SKIPPED)} skipped, {len(report.failures)} failures"
    )
    return lines


def write_report_tsv(report: RunReport, path: str):
    frame = pl.DataFrame({
        'degree': [r.entry.degree for r in report.results],
        'singularities': [r.entry.signature[1] for r in report.results],
        'condition': [r.entry.signature[2] for r in report.results],
        'expected': [format_rational(r.entry.expected_lct) for r in report.results],
        'upper': [format_rational(r.upper) if r.upper is not None else '' for r in report.results],
        'certified': [_yes_no(r.certified) for r in report.results],
        'status': [r.status for r in report.results],
        'ke': [_yes_no(r.ke) for r in report.results],
        'reason': [r.reason for r in report.results],
    })
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    frame.write_csv(path, separator='\t')
    logger.info(f"wrote table report to {path}")

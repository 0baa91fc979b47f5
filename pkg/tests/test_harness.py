import os
from fractions import Fraction

import polars as pl
import pytest

from lctdv.errors import FixtureNotFound, ParseError
from lctdv.harness import (
    GAP, KNOWN_ISSUE, MISMATCH, REFERENCE_ONLY, SKIPPED, VERIFIED, Catalog, TableEntry, TableRunner,
    canonical_signature, ke_criterion, load_known_issues, read_expected, reproduce_tables, table_lines,
    write_report_tsv,
)


def write_tsv(path, rows):
    lines = ['degree\tsingularities\tcondition\tlct'] + ['\t'.join(row) for row in rows]
    path.write_text('\n'.join(lines) + '\n', encoding='utf-8')
    return str(path)


def test_ke_criterion():
    assert ke_criterion(Fraction(3, 4))
    assert not ke_criterion(Fraction(2, 3))
    with pytest.raises(ValueError):
        ke_criterion(Fraction(0))


def test_canonical_signature():
    assert canonical_signature(1, 'A1+2A3', 'b,a') == (1, '2A3+A1', 'a,b')
    assert canonical_signature(4, 'smooth') == (4, 'smooth', '-')


@pytest.mark.parametrize('degree, singularities, reference_only', [
    (1, 'smooth', True),
    (1, '4A2', True),
    (1, 'A2+2A1', True),
    (2, 'A2', False),
    (1, 'A3', False),
])
def test_reference_only(degree, singularities, reference_only):
    entry = TableEntry(degree, singularities, '-', Fraction(1, 2))
    assert entry.is_reference_only() == reference_only


def test_read_expected(tmp_path):
    path = write_tsv(tmp_path / 'expected.tsv', [('1', 'A3', '-', '1'), ('4', 'A3+2A1', '-', '1/3')])
    entries = read_expected(path)
    assert [e.signature for e in entries] == [(1, 'A3', '-'), (4, 'A3+2A1', '-')]
    assert entries[1].expected_lct == Fraction(1, 3)


def test_read_expected_errors(tmp_path):
    with pytest.raises(FixtureNotFound):
        read_expected(str(tmp_path / 'missing.tsv'))
    bad_value = write_tsv(tmp_path / 'bad.tsv', [('1', 'A3', '-', '3/2')])
    with pytest.raises(ParseError) as e:
        read_expected(bad_value)
    assert e.value.line == 2
    float_value = write_tsv(tmp_path / 'float.tsv', [('1', 'A3', '-', '0.5')])
    with pytest.raises(ParseError):
        read_expected(float_value)
    columns = tmp_path / 'columns.tsv'
    columns.write_text('degree\tlct\n1\t1\n', encoding='utf-8')
    with pytest.raises(ParseError):
        read_expected(str(columns))


def test_known_issue_ledger(config):
    issues = load_known_issues(config['known_issues'])
    assert set(issues) == {(4, 'A3+2A1', '-'), (1, 'A7', 'R-reducible')}
    assert issues[(4, 'A3+2A1', '-')].computed == Fraction(1, 4)
    assert load_known_issues(None) == {}


def test_catalog(config):
    catalog = Catalog(config)
    assert catalog.lookup(TableEntry(1, 'A7', 'R-reducible', Fraction(8, 15))) == 'A7-reducible.deg1'
    assert catalog.lookup(TableEntry(1, 'A7', '-', Fraction(1, 2))) == 'A7.deg1'
    assert catalog.lookup(TableEntry(1, 'A1+A4', 'cusp-A1', Fraction(3, 4))) == 'A4+A1-cusp-A1.deg1'
    assert catalog.lookup(TableEntry(3, 'E6', '-', Fraction(1, 6))) is None
    assert catalog.lemma_for('A3.deg1').target == 1


@pytest.fixture
def small_table(tmp_path):
    return write_tsv(tmp_path / 'expected.tsv', [
        ('1', 'A3', '-', '1'),
        ('4', 'A3+2A1', '-', '1/3'),
        ('5', 'smooth', '-', '1/2'),
        ('3', 'E6', '-', '1/6'),
    ])


def test_small_table(config, small_table):
    report = reproduce_tables(config, small_table)
    assert [r.status for r in report.results] == [VERIFIED, KNOWN_ISSUE, REFERENCE_ONLY, SKIPPED]
    assert report.results[0].ke is True
    assert report.results[1].upper == Fraction(1, 4)
    assert report.ok
    lines = table_lines(report)
    assert lines[0].startswith('VERIFIED       1 A3 [-] expected=1 upper=1 lower=yes KE=yes')
    assert lines[-1] == (
        'summary: 4 entries, 1 verified, 1 known issues, 1 reference-only, 1 skipped, 0 failures'
    )


def test_mismatch_without_ledger_entry(config, small_table):
    config = dict(config, known_issues=None)
    report = reproduce_tables(config, small_table)
    assert report.results[1].status == MISMATCH
    assert report.results[1].reason == 'upper bound 1/4'
    assert not report.ok


def test_unexpected_skip_fails(config, tmp_path):
    config = dict(config, skip_allowlist=[])
    path = write_tsv(tmp_path / 'expected.tsv', [('3', 'E6', '-', '1/6')])
    report = reproduce_tables(config, path)
    assert report.results[0].status == SKIPPED
    assert report.failures == list(report.results[:1])
    assert not report.ok


def test_report_tsv(config, small_table, tmp_path):
    report = reproduce_tables(config, small_table)
    out = tmp_path / 'reports' / 'tables.tsv'
    write_report_tsv(report, str(out))
    frame = pl.read_csv(str(out), separator='\t', infer_schema_length=0)
    assert frame['status'].to_list() == [VERIFIED, KNOWN_ISSUE, REFERENCE_ONLY, SKIPPED]
    assert frame['upper'].to_list()[:2] == ['1', '1/4']


@pytest.mark.slow
def test_full_tables(config):
    runner = TableRunner(config)
    report = runner.run(read_expected(os.path.join(config['fixtures_dir'], 'tables.tsv')))
    by_signature = {r.entry.signature: r for r in report.results}
    assert by_signature[(4, 'A3+2A1', '-')].status == KNOWN_ISSUE
    reducible = by_signature[(1, 'A7', 'R-reducible')]
    assert reducible.status == KNOWN_ISSUE
    # certified from below, only the upper bound falls short
    assert reducible.certified
    assert reducible.upper == Fraction(3, 5)
    assert report.count(REFERENCE_ONLY) == 16
    assert report.count(SKIPPED) == 3
    assert not report.unexpected_skips()
    assert by_signature[(1, 'A3', '-')].status == VERIFIED
    # every fixture's upper bound agrees with its table value
    assert not [r for r in report.results if r.status == MISMATCH]
    assert {r.status for r in report.results} <= {VERIFIED, GAP, KNOWN_ISSUE, REFERENCE_ONLY, SKIPPED}

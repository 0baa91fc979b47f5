from fractions import Fraction

import pytest

import config.exit_codes as ec
from lctdv.cli import main, parse_weights, with_defaults


def run(capsys, config, *argv):
    code = main(list(argv), config)
    out, err = capsys.readouterr()
    return code, out.splitlines(), err


def test_pullback_of_profile(capsys, config):
    code, out, _ = run(capsys, config, 'pullback', '--surface', 'A3.deg1', '--profile', 'E2=1')
    assert code == ec.SUCCESS
    assert out == ['1/2 1 1/2']


def test_pullback_of_curve(capsys, config):
    code, out, _ = run(capsys, config, 'pullback', '--surface', 'A5.deg1', '--curve', 'L3')
    assert code == ec.SUCCESS
    assert out == ['1/2 1 3/2 1 1/2']


def test_bound(capsys, config):
    code, out, _ = run(capsys, config, 'bound', '--surface', 'A3.deg1')
    assert code == ec.SUCCESS
    assert out == ['MAX a1 = 3/4', 'MAX a2 = 1', 'MAX a3 = 3/4']


@pytest.mark.parametrize('flag, name, values', [
    ('--surface', 'A4.deg1', ['4/5', '6/5', '6/5', '4/5']),
    ('--surface', 'A5.deg1', ['5/6', '4/3', '3/2', '4/3', '5/6']),
    ('--surface', 'A8.deg1', ['8/9', '14/9', '2', '20/9', '20/9', '2', '14/9', '8/9']),
    ('--lemma', 'D5.deg1', ['5/4', '5/4', '3/4', '1/2', '1']),
])
def test_bound_values(capsys, config, flag, name, values):
    code, out, _ = run(capsys, config, 'bound', flag, name)
    assert code == ec.SUCCESS
    assert out == [f"MAX a{i} = {v}" for i, v in enumerate(values, start=1)]


def test_pullback_across_two_blocks(capsys, config):
    code, out, _ = run(capsys, config, 'pullback', '--surface', 'E6+A2.deg1', '--curve', 'L6')
    assert code == ec.SUCCESS
    assert out == ['2/3 4/3 2 1 5/3 4/3 2/3 1/3']


def test_bound_dump_system(capsys, config):
    code, out, _ = run(capsys, config, 'bound', '--lemma', 'A3.deg1', '--dump-system')
    assert code == ec.SUCCESS
    assert out[0] == '# variables: a1 a2 a3'
    assert out[1] == '-1*a1 + -1*a3 + 1 >= 0'


def test_lct_pair_upper_bound(capsys, config):
    code, out, _ = run(capsys, config, 'lct-pair', '--surface', 'A4.deg1', '--trace')
    assert code == ec.SUCCESS
    assert out == [
        'candidate C:2',
        'step 1: point {C,E2,E3} -> F_1 m=5/2 a=1',
        'divisor 1/2*C',
        'lct = 4/5 at F_1 after 1 blow-ups',
    ]


def test_lct_pair_explicit_divisor(capsys, config):
    code, out, _ = run(capsys, config, 'lct-pair', '--surface', 'A6.deg1', '--divisor', "1/3*L2+1/3*L2'+1/3*L3")
    assert code == ec.SUCCESS
    assert out[-1] == 'lct = 3/4 at E2 after 0 blow-ups'


def test_certify(capsys, config):
    code, out, _ = run(capsys, config, 'certify', '--lemma', 'A3.deg1')
    assert code == ec.SUCCESS
    assert out[-1].startswith('result: PASS')


def test_certify_without_chain_levels_fails(capsys, config):
    code, out, _ = run(capsys, config, 'certify', '--lemma', 'A3.deg1', '--chain-depth', '0')
    assert code == ec.VERIFICATION_FAILED
    assert 'chain E1,E2 r=1: open at depth 0, FAIL' in out
    assert out[-1].startswith('result: FAIL')


def test_certify_locations_mismatch(capsys, config, tmp_path):
    script = tmp_path / 'short.lemma'
    script.write_text('[lemma] surface=A3.deg1 target=1 locations=4\n', encoding='utf-8')
    code, out, _ = run(capsys, config, 'certify', '--lemma', str(script))
    assert code == ec.VERIFICATION_FAILED
    assert 'locations: 5 (expected 4) MISMATCH' in out


def test_validate(capsys, config):
    code, out, _ = run(capsys, config, 'validate', '--surface', 'A3.deg1', '--lemma', 'A3.deg1')
    assert code == ec.SUCCESS
    assert out == ['A3: ok']


def test_validate_reports_violations(capsys, config, tmp_path):
    path = tmp_path / 'broken.deg1'
    path.write_text(
        '[surface] name=A3 degree=1\n'
        '[singularity] type=A3 labels=E1..E3\n'
        '[curve] name=L antican=1 profile=E2=1 relation=L:1\n',
        encoding='utf-8',
    )
    code, out, _ = run(capsys, config, 'validate', '--surface', str(path))
    assert code == ec.VERIFICATION_FAILED
    assert out == ['relation L:1: D·L = 0, expected 1']


def test_input_errors(capsys, config):
    code, _, err = run(capsys, config, 'validate', '--surface', 'missing.deg1')
    assert code == ec.INPUT_ERROR
    assert 'not found' in err
    code, _, err = run(capsys, config, 'certify', '--lemma', 'A3.deg1', '--target', '0.5')
    assert code == ec.INPUT_ERROR
    code, _, _ = run(capsys, config, 'no-such-command')
    assert code == ec.INPUT_ERROR


def test_parse_weights():
    assert parse_weights("1/3*L2 + 1/3*L2' + L3 + L3") == {
        'L2': Fraction(1, 3), "L2'": Fraction(1, 3), 'L3': Fraction(2),
    }


def test_fixtures_override(monkeypatch, tmp_path):
    monkeypatch.setenv('LCTDV_FIXTURES', str(tmp_path))
    merged = with_defaults({})
    assert merged['fixtures_dir'] == str(tmp_path)
    assert merged['known_issues'] == str(tmp_path / 'known_issues.yaml')

from __future__ import absolute_import, print_function

import csv
import io
import json
import logging
import math

import pytest
from PIL import Image

from affdim.__main__ import main, parse_s_values
from affdim.config import RunConfig
from affdim.errors import InputError
from affdim.fixtures import FIXTURES, get_fixture

CANTOR = math.log(2) / math.log(3)


@pytest.fixture
def fixturedir(pytestconfig):
    return pytestconfig.rootdir.join('tests', 'fixtures')


@pytest.fixture
def workdir(tmpdir, monkeypatch):
    # keep setup.cfg discovery away from the repository's own file
    monkeypatch.chdir(str(tmpdir))
    return tmpdir


def system_file(workdir, name):
    path = workdir.join(name + '.json')
    get_fixture(name).dump(str(path))
    return str(path)


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_usage(capsys):
    assert main([]) == 64
    assert 'commands:' in capsys.readouterr().err
    assert main(['--help']) == 0
    assert 'fixtures' in capsys.readouterr().out
    assert main(['frobnicate']) == 64


def test_fixtures_to_stdout(workdir, capsys):
    assert main(['fixtures', 'cantor-corners']) == 0
    out = capsys.readouterr().out
    assert RunConfig.loads(out) == get_fixture('cantor-corners')


def test_fixtures_to_directory(workdir, caplog):
    caplog.set_level(logging.INFO)
    dest = workdir.join('systems')
    assert main(['fixtures', '--out', str(dest)]) == 0
    assert sorted(p.basename for p in dest.listdir()) == \
        sorted(name + '.json' for name in FIXTURES)
    assert RunConfig.load(str(dest.join('positive-pair.json'))) == \
        get_fixture('positive-pair')
    assert main(['fixtures', 'sierpinski']) == 64


def test_check_holds(workdir, capsys):
    path = system_file(workdir, 'positive-pair')
    assert main(['check', '--config', path, '--format', 'json']) == 0
    report = json.loads(capsys.readouterr().out)
    assert report['outcome'] == 'Holds'
    assert report['positivity'] is True
    assert report['separation'] == 'Certified'
    assert report['gamma_used'] == 1.0
    assert report['bernoulli_exists'] is True
    assert 'q0_metric' in report


@pytest.mark.parametrize("name, code", [
    ('overlapping', 2),
    ('negative', 1),
    ('singular', 64),
    ('missing', 74),
])
def test_check_exit_codes(name, code, fixturedir, workdir, capsys):
    path = fixturedir.join('configs', name + '.json')
    assert main(['check', '--config', str(path)]) == code
    out = capsys.readouterr().out
    if code in (1, 2):
        rows = dict((row['key'], row['value']) for row in read_csv(out))
        assert rows['outcome'] == {1: 'Fails', 2: 'Inconclusive'}[code]


def test_usage_errors(workdir, capsys):
    assert main(['dim']) == 64
    assert '--config is required' in capsys.readouterr().err
    path = system_file(workdir, 'cantor-corners')
    assert main(['dim', '--config', path, '--format', 'xml']) == 64
    assert main(['dim', '--config', path, 'extra']) == 64
    bad = workdir.join('bad.json')
    bad.write('{"maps": [')
    assert main(['dim', '--config', str(bad)]) == 64
    assert 'line 1' in capsys.readouterr().err


def test_dim(workdir, capsys):
    path = system_file(workdir, 'similarity-thirds')
    assert main(['dim', '--config', path, '--qs', '2,3']) == 0
    rows = read_csv(capsys.readouterr().out)
    assert [row['q'] for row in rows] == ['d', '2.0', '3.0']
    for row in rows:
        assert float(row['dq_value']) == pytest.approx(CANTOR, abs=1e-3)
        assert row['depth'] == '12'
    assert float(rows[0]['dq_value']) == pytest.approx(0.630930, abs=1e-6)


def test_dim_writes_pressure(workdir, capsys):
    path = system_file(workdir, 'positive-pair')
    out = workdir.join('out')
    assert main(['dim', '--config', path, '--qs', '2', '--depth', '8',
                 '--s-values', '0,0.5,1', '--out', str(out)]) == 0
    rows = read_csv(out.join('pressure.csv').read())
    assert [float(row['s']) for row in rows] == [0.0, 0.5, 1.0]
    assert float(rows[0]['pressure']) == pytest.approx(math.log(2))


def test_word_budget_gives_partial_output(workdir, capsys):
    path = system_file(workdir, 'positive-pair')
    assert main(['dim', '--config', path, '--max-words', '16']) == 3
    out = capsys.readouterr().out
    assert out.splitlines()[0] == 'q,dq_value,depth,bracket_lo,bracket_hi'
    assert out.splitlines()[-1] == '# partial'


def test_lq(workdir, capsys):
    path = system_file(workdir, 'lebesgue-square')
    out = workdir.join('out')
    assert main(['lq', '--config', path, '--qs', '0,2',
                 '--delta-schedule', '0.25,0.5,6', '--out', str(out)]) == 0
    rows = read_csv(capsys.readouterr().out)
    assert [float(row['q']) for row in rows] == [0.0, 2.0]
    for row in rows:
        assert float(row['slope']) == pytest.approx(2.0, abs=1e-9)
        assert row['n_deltas'] == '5'
    assert rows[0]['theory'] == ''
    assert float(rows[1]['theory']) == pytest.approx(2.0, abs=1e-3)
    moments = read_csv(out.join('moments.csv').read())
    assert len(moments) == 10


def test_lq_rejects_schedule(workdir):
    path = system_file(workdir, 'lebesgue-square')
    assert main(['lq', '--config', path, '--delta-schedule', '0.25,0.5']) \
        == 64


@pytest.mark.parametrize("name, delta, occupied", [
    ('cantor-corners', '1/243', 32),
    ('lebesgue-square', '1/64', 4096),
])
def test_render(name, delta, occupied, workdir, capsys):
    path = system_file(workdir, name)
    out = workdir.join('render')
    assert main(['render', '--config', path, '--delta', delta,
                 '--out', str(out)]) == 0
    summary = dict((row['key'], row['value'])
                   for row in read_csv(capsys.readouterr().out))
    assert int(summary['occupied']) == occupied
    assert summary['capped'] == 'False'

    cells = read_csv(out.join('cells.csv').read())
    assert len(cells) == occupied
    assert math.fsum(float(row['mass']) for row in cells) == \
        pytest.approx(1.0, abs=1e-12)
    image = Image.open(str(out.join('measure.png')))
    assert image.mode == 'L'
    if name == 'lebesgue-square':
        assert image.size == (64, 64)


def test_diag(workdir, capsys):
    path = system_file(workdir, 'positive-pair')
    out = workdir.join('diag')
    assert main(['diag', '--config', path, '--s-values', 'd-0.1,0.2',
                 '--r-depth', '6', '--angles', '16', '--n-outer', '32',
                 '--n-inner', '32', '--doublings', '1', '--truncation', '8',
                 '--out', str(out)]) == 0
    rows = read_csv(capsys.readouterr().out)
    assert len(rows) == 2
    assert float(rows[1]['s']) == 0.2
    assert rows[0]['r_depth'] == '6'
    assert len(read_csv(out.join('r_curve.csv').read())) == 14
    assert len(read_csv(out.join('energy.csv').read())) == 4


def test_settings_file(fixturedir, workdir, capsys):
    settings = str(fixturedir.join('settings', 'setup.cfg'))
    path = system_file(workdir, 'similarity-thirds')
    # [affdim:dim] wins over [affdim]
    assert main(['dim', '--config', path, '--settings', settings]) == 0
    rows = json.loads(capsys.readouterr().out)['rows']
    assert [row['q'] for row in rows] == ['d', 2.0]


def test_settings_precedence(fixturedir, workdir, capsys):
    settings = str(fixturedir.join('settings', 'setup.cfg'))
    path = str(fixturedir.join('configs', 'thirds.json'))
    # JSON params win over the ini file
    assert main(['dim', '--config', path, '--settings', settings]) == 0
    rows = json.loads(capsys.readouterr().out)['rows']
    assert [row['q'] for row in rows] == ['d', 3.0, 4.0]
    assert [row['depth'] for row in rows] == [10, 10, 10]
    # the command line wins over both
    assert main(['dim', '--config', path, '--settings', settings,
                 '--qs', '2', '--format', 'csv', '--depth', '8']) == 0
    rows = read_csv(capsys.readouterr().out)
    assert [row['q'] for row in rows] == ['d', '2.0']
    assert rows[0]['depth'] == '8'


def test_setup_cfg_in_working_directory(workdir, capsys):
    workdir.join('setup.cfg').write('[affdim]\nformat = table\n')
    path = system_file(workdir, 'cantor-corners')
    assert main(['dim', '--config', path, '--qs', '2']) == 0
    header = capsys.readouterr().out.splitlines()[0]
    assert header.split() == ['q', 'dq_value', 'depth', 'bracket_lo',
                              'bracket_hi']


@pytest.mark.parametrize("value, expected", [
    ('d', [0.5]),
    ('d-0.1, d+0.2', [0.4, 0.7]),
    ('0.3,d', [0.3, 0.5]),
    (['d', '1.25'], [0.5, 1.25]),
])
def test_parse_s_values(value, expected):
    assert parse_s_values(value, 0.5) == pytest.approx(expected)


def test_parse_s_values_rejects():
    with pytest.raises(InputError):
        parse_s_values('e+1', 0.5)

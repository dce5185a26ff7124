import json

import pytest

from hypergeometric_pingpong import cli
from hypergeometric_pingpong.base import DEFAULT_SMOKE_SEARCH_BOUND
from hypergeometric_pingpong.cases import SearchReport
from hypergeometric_pingpong.cli import build_parser, main

PERTURBED = '1,-2,1;1,0,3;1,-1,1'


class TestParser:
    def test_defaults(self):
        args = build_parser().parse_args(['verify'])
        assert args.n == 3
        assert args.cone is None
        assert args.handler is cli.cmd_verify

    def test_workers_from_env(self, monkeypatch):
        monkeypatch.setenv('HGPP_WORKERS', '3')
        args = build_parser().parse_args(['uniqueness-scan', '--point', '0,0,1'])
        assert args.workers == 3


class TestVerify:
    def test_known_cone(self, tmp_path, capsys):
        path = tmp_path / 'verdict.json'
        assert main(['--json', str(path), 'verify', '--n', '3']) == 0
        assert 'valid: True' in capsys.readouterr().out
        assert json.loads(path.read_text())['valid'] is True

    def test_perturbed_cone(self, capsys):
        assert main(['verify', '--cone', PERTURBED]) == 1
        out = capsys.readouterr().out
        assert 'valid: False' in out
        assert 'witness:' in out

    def test_n2(self):
        assert main(['verify', '--n', '2']) == 0

    def test_falsify(self, capsys):
        assert main(['falsify']) == 0
        assert 'no witness found' in capsys.readouterr().out
        assert main(['falsify', '--cone', PERTURBED]) == 1


class TestUsageErrors:
    def test_unknown_command(self):
        assert main(['frobnicate']) == 2

    def test_float_is_rejected(self, capsys):
        assert main(['verify', '--cone', '1.5,0,0;0,1,0;0,0,1']) == 2
        assert 'error' in capsys.readouterr().err

    def test_degenerate_cone(self):
        assert main(['verify', '--cone', '1,0,0;2,0,0;0,0,1']) == 2

    def test_bad_range(self):
        assert main(['uniqueness-scan', '--lam', '0,1']) == 2

    def test_figures_needs_output(self):
        assert main(['figures']) == 2

    def test_horizon(self):
        assert main(['project', '--point', '1,1,0']) == 2


class TestProject:
    def test_point(self, capsys):
        assert main(['project', '--point', '1,-2,1']) == 0
        assert capsys.readouterr().out.strip() == '(0, 1)'

    def test_maps(self, tmp_path, capsys):
        path = tmp_path / 'project.json'
        assert main(['--json', str(path), 'project', '--plane', '1,0', '--map', 'R', '--map', 'T']) == 0
        assert capsys.readouterr().out.strip() == '(3/5, 4/5)'
        data = json.loads(path.read_text())
        assert data == {'point': ['1', '0'], 'maps': ['R', 'T'], 'image': ['3/5', '4/5']}


class TestScan:
    def test_single_point(self, tmp_path):
        csv = tmp_path / 'scan.csv'
        assert main(['uniqueness-scan', '--point', '0,0,1', '--workers', '1', '--csv', str(csv)]) == 0
        assert csv.read_text().splitlines()[0] == 'lambda,mu,eta,survived,witness_word,eta_witness_t'


class TestFigures:
    def test_svg_and_csv(self, tmp_path):
        svg, csv = tmp_path / 'fig.svg', tmp_path / 'fig.csv'
        assert main(['figures', '--figure', 'fig2', '--steps', '5', '--svg', str(svg), '--csv', str(csv)]) == 0
        assert '<svg' in svg.read_text()
        assert len(csv.read_text().splitlines()) == 1 + 10


class TestWords:
    def test_words(self, capsys):
        assert main(['words', '--n', '3', '--max-len', '4']) == 0
        assert 'passed: True' in capsys.readouterr().out

    def test_order_above_twelve(self, capsys):
        assert main(['words', '--n', '12', '--max-len', '1']) == 0
        assert 'passed: True' in capsys.readouterr().out


class TestBt4:
    def test_report(self, tmp_path, capsys):
        path = tmp_path / 'bt4.json'
        assert main(['--json', str(path), 'bt4']) == 0
        assert 'S v0 scalar: 5/12' in capsys.readouterr().out
        data = json.loads(path.read_text())
        assert data['mismatches'] == []
        assert data['displayed_scalars']['P3x'] == '12'
        assert data['s_conjugation']['scalar'] == '5/12'
        assert 'search' not in data

    def test_other_v0(self):
        assert main(['bt4', '--v0', '0,1,-25/12,1']) == 1

    def test_search_is_forwarded(self, mocker, tmp_path):
        search = mocker.patch.object(cli, 'search_fourth_generator', return_value=SearchReport(bound=1, step=1))
        csv = tmp_path / 'survivors.csv'
        assert main(['bt4', '--search', '--bound', '1', '--workers', '2', '--csv', str(csv)]) == 0
        search.assert_called_once_with('1', '1', 2)
        assert csv.read_text().splitlines()[0] == 'y1,y2,y3,y4'

    def test_search_survivor_fails(self, mocker):
        report = SearchReport(bound=1, step=1, checked=1, survivors=[(1, 0, 0, 0)])
        mocker.patch.object(cli, 'search_fourth_generator', return_value=report)
        assert main(['bt4', '--search']) == 1

    def test_smoke_search_bound(self, mocker):
        search = mocker.patch.object(cli, 'search_fourth_generator', return_value=SearchReport(bound=2, step=1))
        assert main(['bt4', '--smoke', '--workers', '1']) == 0
        search.assert_called_once_with(DEFAULT_SMOKE_SEARCH_BOUND, '1', 1)


class TestOutputErrors:
    def test_missing_svg_directory(self, tmp_path, capsys):
        path = tmp_path / 'missing' / 'fig.svg'
        assert main(['figures', '--svg', str(path)]) == 2
        assert 'error' in capsys.readouterr().err
        assert not path.exists()

    def test_missing_csv_directory(self, tmp_path):
        assert main(['words', '--n', '2', '--max-len', '1', '--csv', str(tmp_path / 'missing' / 'w.csv')]) == 2

    def test_missing_json_directory(self, tmp_path):
        assert main(['--json', str(tmp_path / 'missing' / 'out.json'), 'project', '--plane', '0,1']) == 2

    def test_bad_workers_setting(self, monkeypatch, capsys):
        monkeypatch.setenv('HGPP_WORKERS', 'many')
        assert main(['project', '--plane', '0,1']) == 2
        assert 'HGPP_WORKERS' in capsys.readouterr().err


class TestCase2d:
    def test_case2d(self, capsys):
        assert main(['case2d', '--directions', '72']) == 0
        assert 'uncovered directions: 0' in capsys.readouterr().out


@pytest.mark.parametrize('level', ['debug', 'INFO'])
def test_log_level(level):
    assert main(['--log-level', level, 'project', '--plane', '0,1']) == 0

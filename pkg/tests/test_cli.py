import json
import os

from click.testing import CliRunner

from heolsync.cli import cli
from heolsync import __version__, load_scenario, preset
from fixtures.scenario_fixtures import scenario_source

BASE = ["--scheduler", "single-threaded"]

class TestCli(object):

    def test_cli_run(self, runner: CliRunner, scenario_path, tmp_path) -> None:
        out = os.path.abspath(tmp_path / 'results')
        res = runner.invoke(cli.cli, args=BASE + ["--debug", "run",
                "--scenario", str(scenario_path), "--out", out],
                catch_exceptions=False)
        assert res.exit_code == 0
        for name in ('trace.csv', 'metrics.txt', 'controls.svg', 'outputs.svg',
                'output-derivatives.svg', 'tracking-errors.svg'):
            assert os.path.exists(os.path.join(out, name))
        doc = json.loads(open(os.path.join(out, 'metrics.txt')).read())
        assert doc['rng_seed'] == 7
        assert doc['name'] == 'toml-scenario'

    def test_cli_run_overrides(self, runner: CliRunner, tmp_path) -> None:
        out = os.path.abspath(tmp_path / 'r2')
        res = runner.invoke(cli.cli, args=BASE + ["run", "--preset",
                "paper-multiplicative", "--out", out, "--horizon", "12",
                "--seed", "11", "--no-noise", "--open-loop", "--no-plots"],
                catch_exceptions=False)
        assert res.exit_code == 0
        assert sorted(os.listdir(out)) == ['metrics.txt', 'trace.csv']
        doc = json.loads(open(os.path.join(out, 'metrics.txt')).read())
        assert doc['rng_seed'] == 11
        assert doc['noise_std'] == 0.0
        assert doc['open_loop'] is True

    def test_cli_run_output_section(self, runner: CliRunner, tmp_path,
            monkeypatch) -> None:
        monkeypatch.chdir(tmp_path)
        path = tmp_path / 'with_output.toml'
        path.write_text(scenario_source()
                + '\n[output]\ndir = "from-file"\nplots = false\n')
        res = runner.invoke(cli.cli, args=BASE + ["run", "-s", str(path)],
                catch_exceptions=False)
        assert res.exit_code == 0
        assert sorted(os.listdir(tmp_path / 'from-file')) == ['metrics.txt',
                'trace.csv']

    def test_cli_run_missing_scenario(self, runner: CliRunner, tmp_path) -> None:
        res = runner.invoke(cli.cli, args=BASE + ["run", "--scenario",
                str(tmp_path / 'missing.toml')], catch_exceptions=False)
        assert res.exit_code == 2

    def test_cli_run_parse_error(self, runner: CliRunner, tmp_path) -> None:
        path = tmp_path / 'bad.toml'
        path.write_text(scenario_source().replace('tau = 1.0', 'tau = '))
        res = runner.invoke(cli.cli, args=BASE + ["run", "-s", str(path),
                "--out", str(tmp_path / 'out')], catch_exceptions=False)
        assert res.exit_code == 2
        assert not (tmp_path / 'out').exists()

    def test_cli_source_required(self, runner: CliRunner, scenario_path) -> None:
        res = runner.invoke(cli.cli, args=BASE + ["run"])
        assert res.exit_code == 2
        res = runner.invoke(cli.cli, args=BASE + ["validate", "-p",
                "paper-additive", "-s", str(scenario_path)])
        assert res.exit_code == 2
        res = runner.invoke(cli.cli, args=BASE + ["run", "-p", "nope"])
        assert res.exit_code == 2

    def test_cli_validate(self, runner: CliRunner, singular_scenario_path,
            singular_additive_path) -> None:
        res = runner.invoke(cli.cli, args=BASE + ["validate", "--preset",
                "paper-multiplicative"], catch_exceptions=False)
        assert res.exit_code == 0
        res = runner.invoke(cli.cli, args=BASE + ["validate", "--scenario",
                str(singular_scenario_path)], catch_exceptions=False)
        assert res.exit_code == 3
        res = runner.invoke(cli.cli, args=BASE + ["validate", "--scenario",
                str(singular_additive_path)], catch_exceptions=False)
        assert res.exit_code == 0
        assert 'no violations' in res.output

    def test_cli_validate_prints_report(self, runner: CliRunner,
            singular_scenario_path, tmp_path) -> None:
        logs = ["--log-dir", str(tmp_path / 'logs')]
        res = runner.invoke(cli.cli, args=logs + BASE + ["validate",
                "--preset", "paper-multiplicative"], catch_exceptions=False)
        assert res.exit_code == 0
        assert 'warning: condition 3 (control_sign) oscillator 2' in res.output
        res = runner.invoke(cli.cli, args=logs + BASE + ["validate",
                "--scenario", str(singular_scenario_path)],
                catch_exceptions=False)
        assert res.exit_code == 3
        assert 'error: condition 1 (denominator) oscillator 1' in res.output

    def test_cli_singular_run(self, runner: CliRunner, singular_scenario_path,
            tmp_path) -> None:
        out = str(tmp_path / 'singular')
        res = runner.invoke(cli.cli, args=BASE + ["run", "-s",
                str(singular_scenario_path), "--out", out, "--no-noise"],
                catch_exceptions=False)
        assert res.exit_code == 3
        assert not os.path.exists(os.path.join(out, 'trace.csv'))

        res = runner.invoke(cli.cli, args=BASE + ["run", "-s",
                str(singular_scenario_path), "--out", out, "--no-noise",
                "--force"], catch_exceptions=False)
        assert res.exit_code == 4

    def test_cli_compare(self, runner: CliRunner, scenario_path, tmp_path) -> None:
        res = runner.invoke(cli.cli, args=BASE + ["compare", "-s",
                str(scenario_path), "--no-noise", "--out", str(tmp_path)],
                catch_exceptions=False)
        assert res.exit_code == 0
        assert 'rms_ratio_overall=' in res.output
        doc = json.loads((tmp_path / 'compare.json').read_text())
        assert doc['rms_ratio_overall'] >= 5

    def test_cli_sweep(self, runner: CliRunner, scenario_path, tmp_path) -> None:
        res = runner.invoke(cli.cli, args=BASE + ["sweep", "-s",
                str(scenario_path), "--seeds", "1,4-5", "--out", str(tmp_path)],
                catch_exceptions=False)
        assert res.exit_code == 0
        lines = (tmp_path / 'sweep.csv').read_text().splitlines()
        assert len(lines) == 4
        assert [l.split(',')[0] for l in lines[1:]] == ['1', '4', '5']

    def test_cli_bad_seeds(self, runner: CliRunner, scenario_path) -> None:
        for seeds in ("a,b", "5-2", "-3", ""):
            res = runner.invoke(cli.cli, args=BASE + ["sweep", "-s",
                    str(scenario_path), "--seeds", seeds])
            assert res.exit_code == 2

    def test_cli_presets(self, runner: CliRunner, tmp_path) -> None:
        res = runner.invoke(cli.cli, args=["presets"], catch_exceptions=False)
        assert res.exit_code == 0
        assert res.output.split() == ['paper-additive', 'paper-multiplicative']

        res = runner.invoke(cli.cli, args=["presets", "paper-additive"],
                catch_exceptions=False)
        assert res.exit_code == 0
        assert '[network]' in res.output
        assert 'mode = "additive"' in res.output

        path = tmp_path / 'preset.toml'
        res = runner.invoke(cli.cli, args=["presets", "paper-multiplicative",
                "--write", str(path)], catch_exceptions=False)
        assert res.exit_code == 0
        assert load_scenario(path).config == preset('paper-multiplicative')

        res = runner.invoke(cli.cli, args=["presets", "--write", str(path)])
        assert res.exit_code == 2

    def test_cli_version(self, runner: CliRunner) -> None:
        res = runner.invoke(cli.cli, args=["--version"], catch_exceptions=False)
        assert res.exit_code == 0
        assert __version__ in res.output

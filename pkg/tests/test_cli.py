import json

import numpy as np
import pytest

from fockops import cli
from fockops.criteria import Classification, ConsistencyReport, Verdict
from fockops.errors import NonConvergence
from fockops.operator_rep import build_matrix, singular_values
from fockops.symbols import Symbol, SymbolPair

VOLTERRA_Z = {"schema": "v1", "kind": "volterra", "symbol": [0.0, 1.0]}
CONTRACTION = {"schema": "v1", "kind": "weighted", "symbol": [1.0],
               "map": {"a": 0.5}}


def write_config(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def run_cli(tmp_path, command, data, *extra):
    config = write_config(tmp_path, data)
    return cli.entrypoint([command, "--config", str(config), *extra])


class TestBerezinCommand:
    def test_stdout_has_the_csv_header(self, tmp_path, capsys):
        data = dict(CONTRACTION, q=2.0,
                    grid={"w_max": 2.0, "radial_count": 4, "angular_count": 4})
        code = run_cli(tmp_path, "berezin", data)
        out = capsys.readouterr().out
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "w_re,w_im,value"
        assert len(lines) == 1 + 4 * 4

    def test_out_file_and_values(self, tmp_path):
        data = dict(CONTRACTION, power=2.0,
                    grid={"w_max": 1.0, "radial_count": 3, "angular_count": 4})
        out = tmp_path / "profile.csv"
        config = write_config(tmp_path, data)
        code = cli.entrypoint(["berezin", "--config", str(config),
                               "--out", str(out)])
        assert code == 0
        rows = out.read_text().strip().splitlines()[1:]
        for row in rows:
            w_re, w_im, value = (float(c) for c in row.split(","))
            want = np.pi * np.exp(-0.75 * (w_re ** 2 + w_im ** 2))
            np.testing.assert_allclose(value, want, rtol=1e-6)

    def test_power_or_q_is_required(self, tmp_path, capsys):
        assert run_cli(tmp_path, "berezin", dict(CONTRACTION)) == 2
        assert "power" in capsys.readouterr().err


class TestNormCommand:
    def test_monomial_norm_and_functional(self, tmp_path, capsys):
        data = {"schema": "v1", "symbol": [0.0, 1.0], "p": 2.0}
        code = run_cli(tmp_path, "norm", data)
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["schema"] == "v1"
        np.testing.assert_allclose(payload["norm"], 1.0, rtol=1e-9)
        np.testing.assert_allclose(payload["derivative_functional"],
                                   0.578481111882093, rtol=1e-8)


class TestClassifyCommand:
    def test_reference_example(self, tmp_path, capsys):
        data = {"schema": "v1", "kind": "volterra", "symbol": [1.0, 3.0, 1.0],
                "map": {"a": 1.0, "b": 0.0}, "p": 2.0, "q": 2.0}
        code = run_cli(tmp_path, "classify", data)
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["bounded"] == "yes"
        assert payload["compact"] == "no"
        assert payload["command"] == "classify"

    def test_schatten_orders_on_the_diagonal(self, tmp_path, capsys):
        data = dict(VOLTERRA_Z, p=2.0, q=2.0, orders=[4.0])
        code = run_cli(tmp_path, "classify", data)
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["schatten"] == {"4": "yes"}

    def test_inconclusive_verdicts_exit_three(self, tmp_path, monkeypatch,
                                              capsys):
        stub = Classification(bounded=Verdict.INCONCLUSIVE,
                              compact=Verdict.INCONCLUSIVE)
        monkeypatch.setattr(cli, "classify_berezin",
                            lambda *args, **kwargs: stub)
        data = dict(VOLTERRA_Z, p=2.0, q=2.0)
        assert run_cli(tmp_path, "classify", data) == 3
        payload = json.loads(capsys.readouterr().out)
        assert payload["bounded"] == "inconclusive"


class TestSchattenCommand:
    def test_artifacts_and_agreement_with_direct_svd(self, tmp_path):
        data = dict(VOLTERRA_Z, size=24, orders=[2.0, 4.0])
        config = write_config(tmp_path, data)
        out = tmp_path / "summary.json"
        code = cli.entrypoint(["schatten", "--config", str(config),
                               "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert set(payload["schatten"]) == {"2", "4"}

        side = tmp_path / "summary.singular.csv"
        lines = side.read_text().strip().splitlines()
        assert lines[0] == "k,sigma"
        got = np.array([float(line.split(",")[1]) for line in lines[1:]])
        pair = SymbolPair.volterra(Symbol.polynomial([0.0, 1.0]))
        want = singular_values(build_matrix(pair, 24))
        np.testing.assert_allclose(got, want, rtol=1e-12)


class TestSweepCommand:
    def test_explicit_pairs_agree(self, tmp_path, capsys):
        data = {"schema": "v1",
                "pairs": [dict(VOLTERRA_Z), dict(CONTRACTION)],
                "p": 2.0, "q": 2.0, "size": 32, "orders": [4.0]}
        code = run_cli(tmp_path, "sweep", data)
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["agreements"] == payload["comparisons"] > 0
        assert payload["mismatches"] == []
        assert len(payload["entries"]) == 2

    def test_seed_flag_overrides_the_family_seed(self, tmp_path, capsys):
        data = {"schema": "v1", "family": {"count": 2, "degree_max": 2},
                "p": 2.0, "q": 2.0, "size": 24, "orders": [4.0]}
        code = run_cli(tmp_path, "sweep", data, "--seed", "7")
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["seed"] == 7
        assert payload["family"]["count"] == 2

    def test_disagreement_exits_four(self, tmp_path, monkeypatch, capsys):
        report = ConsistencyReport(
            comparisons=1, agreements=0,
            mismatches=[(0, "bounded", Verdict.YES, Verdict.NO)],
            lattice_conflicts=[], spectral_disagreements=[],
            op_norm_ratios=[], hs_ratios=[], entries=[])
        monkeypatch.setattr(cli, "consistency_report",
                            lambda *args, **kwargs: report)
        data = {"schema": "v1", "pairs": [dict(VOLTERRA_Z)],
                "p": 2.0, "q": 2.0}
        assert run_cli(tmp_path, "sweep", data) == 4
        payload = json.loads(capsys.readouterr().out)
        assert payload["mismatches"] == [[0, "bounded", "yes", "no"]]


class TestCrosscheckCommand:
    def test_monomial_routes_agree(self, tmp_path, capsys):
        code = run_cli(tmp_path, "crosscheck", dict(VOLTERRA_Z, size=16))
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["deviation"] < 1e-6

    def test_weighted_kind_is_a_config_error(self, tmp_path, capsys):
        assert run_cli(tmp_path, "crosscheck", dict(CONTRACTION)) == 2


class TestCache:
    def berezin_config(self):
        return dict(CONTRACTION, q=2.0,
                    grid={"w_max": 2.0, "radial_count": 3, "angular_count": 4})

    def test_second_run_replays_artifacts(self, tmp_path, capsys):
        config = write_config(tmp_path, self.berezin_config())
        cache = tmp_path / "cache"
        out = tmp_path / "a.csv"
        argv = ["berezin", "--config", str(config), "--cache", str(cache),
                "--out", str(out)]
        assert cli.entrypoint(argv) == 0
        assert "cache hit" not in capsys.readouterr().err
        first = out.read_bytes()

        out2 = tmp_path / "b.csv"
        argv2 = ["berezin", "--config", str(config), "--cache", str(cache),
                 "--out", str(out2)]
        assert cli.entrypoint(argv2) == 0
        assert "cache hit" in capsys.readouterr().err
        assert out2.read_bytes() == first

    def test_no_cache_flag_bypasses(self, tmp_path, capsys):
        config = write_config(tmp_path, self.berezin_config())
        cache = tmp_path / "cache"
        argv = ["berezin", "--config", str(config), "--cache", str(cache)]
        assert cli.entrypoint(argv) == 0
        capsys.readouterr()
        assert cli.entrypoint(argv + ["--no-cache"]) == 0
        assert "cache hit" not in capsys.readouterr().err

    def test_failed_runs_are_not_cached(self, tmp_path, monkeypatch, capsys):
        def explode(*args, **kwargs):
            raise NonConvergence("stuck")

        monkeypatch.setattr(cli, "berezin_profile", explode)
        config = write_config(tmp_path, self.berezin_config())
        cache = tmp_path / "cache"
        argv = ["berezin", "--config", str(config), "--cache", str(cache)]
        assert cli.entrypoint(argv) == 3
        assert not list(cache.glob("*.meta.json")) if cache.exists() else True

        monkeypatch.undo()
        capsys.readouterr()
        assert cli.entrypoint(argv) == 0
        assert "cache hit" not in capsys.readouterr().err


class TestConfigValidation:
    @pytest.mark.parametrize("mangle", [
        lambda d: d.update(bogus=1),
        lambda d: d.update(alpha=True),
        lambda d: d.update(symbol=[]),
        lambda d: d.update(symbol=[0.0] * 66),
        lambda d: d.update(schema="v0"),
        lambda d: d.pop("kind"),
        lambda d: d.update(map={"b": 1.0}),
        lambda d: d.update(symbol={"exponent": [0.0, 0.0, 0.1, 0.0]}),
        lambda d: d.update(p=-2.0),
    ])
    def test_bad_configs_exit_two(self, tmp_path, capsys, mangle):
        data = dict(VOLTERRA_Z, p=2.0, q=2.0,
                    map={"a": 1.0, "b": 0.0})
        mangle(data)
        assert run_cli(tmp_path, "classify", data) == 2
        assert "config error" in capsys.readouterr().err

    def test_unreadable_config_exits_two(self, tmp_path, capsys):
        missing = tmp_path / "nope.json"
        assert cli.entrypoint(["classify", "--config", str(missing)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_invalid_json_exits_two(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert cli.entrypoint(["classify", "--config", str(path)]) == 2
        assert "not valid JSON" in capsys.readouterr().err

    def test_unknown_subcommand_exits_two(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            cli.entrypoint(["bogus", "--config", "x"])
        assert info.value.code == 2

    def test_exponential_symbol_literal_parses(self, tmp_path, capsys):
        data = {"schema": "v1", "kind": "weighted",
                "symbol": {"prefactor": [1.0], "exponent": [0.0, 0.0, 0.1]},
                "map": {"a": 0.5}, "p": 2.0, "q": 2.0}
        assert run_cli(tmp_path, "classify", data) in (0, 3)

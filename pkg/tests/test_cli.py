import json
import warnings

import pytest

from semiwave.cli import (
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_REGIME,
    EXIT_SWEEP,
    RunPlan,
    execute,
    main,
    parse_config,
)
from semiwave.errors import ConfigKeyError


def artifacts(out_dir, skip=("meta.json",)):
    return {p.name: p.read_bytes() for p in sorted(out_dir.iterdir()) if p.name not in skip}


class TestParseConfig:
    def test_minimal_exponents_defaults(self):
        plan = parse_config(json.dumps(
            {"command": "exponents", "kind": "SS", "n": 3, "p": 2, "q": 2}))
        assert plan.command == "exponents"
        assert plan.payload["tie_tolerance"] == 1e-9
        assert plan.emit == ("csv", "json")
        assert plan.threads == 1

    def test_unknown_key_named(self):
        with pytest.raises(ConfigKeyError) as err:
            parse_config(json.dumps(
                {"command": "exponents", "kind": "SS", "n": 3, "p": 2, "q": 2, "bogus": 1}))
        assert err.value.path == "bogus"

    def test_nested_unknown_key_has_full_path(self):
        doc = {"command": "solve",
               "system": {"kind": "SS", "n": 3, "p": 2, "q": 2, "wrong": 5},
               "grid": {"t_max": 1.0}}
        with pytest.raises(ConfigKeyError) as err:
            parse_config(json.dumps(doc))
        assert err.value.path == "system.wrong"

    def test_missing_required_key(self):
        with pytest.raises(ConfigKeyError) as err:
            parse_config(json.dumps({"command": "exponents", "kind": "SS", "n": 3, "p": 2}))
        assert err.value.path == "q"

    def test_round_trip_equality(self):
        plan = parse_config(json.dumps(
            {"command": "exponents", "kind": "GG", "n": 4, "p": 1.5, "q": 2.5,
             "out": "/tmp/somewhere", "emit": ["json"], "threads": 2}))
        again = parse_config(json.dumps(plan.to_config()))
        assert again == plan

    def test_defaults_materialized_in_groups(self):
        plan = parse_config(json.dumps(
            {"command": "solve", "system": {"kind": "SS", "n": 3, "p": 2, "q": 2},
             "grid": {"t_max": 2.0}}))
        assert plan.payload["system"]["damping1"] == {"amplitude": 0.0, "decay": 2.0}
        assert plan.payload["system"]["potential1"] is None
        assert plan.payload["data"]["which"] == ["u0", "u1", "v0", "v1"]

    def test_bad_type_reported_with_path(self):
        with pytest.raises(ConfigKeyError) as err:
            parse_config(json.dumps(
                {"command": "exponents", "kind": "SS", "n": "three", "p": 2, "q": 2}))
        assert err.value.path == "n"


class TestExitCodes:
    def test_exponents_success(self, tmp_path, capsys):
        code = main(["exponents", "--set", "kind=SS", "--set", "n=3",
                     "--set", "p=2", "--set", "q=2", "--out", str(tmp_path / "o")])
        out = capsys.readouterr().out
        assert code == EXIT_OK
        assert "0.5" in out and "eps^(-2)" in out

    def test_precondition_forwarded_as_config_error(self, tmp_path, capsys):
        code = main(["exponents", "--set", "kind=SS", "--set", "n=3",
                     "--set", "p=0.5", "--set", "q=2", "--out", str(tmp_path / "o")])
        assert code == EXIT_CONFIG
        assert "p" in capsys.readouterr().err

    def test_solve_cfl_violation(self, tmp_path, capsys):
        code = main(["solve", "--out", str(tmp_path / "o"),
                     "--set", 'system={"kind":"SS","n":3,"p":2,"q":2}',
                     "--set", "grid.t_max=1.0", "--set", "grid.cfl=2.0"])
        assert code == EXIT_CONFIG

    def test_sweep_critical_regime_rejected(self, tmp_path):
        code = main(["sweep", "--out", str(tmp_path / "o"),
                     "--set", 'system={"kind":"GG","n":3,"p":2,"q":2}',
                     "--set", 'ladder={"eps_min":0.6,"eps_max":1.0,"count":5}'])
        assert code == EXIT_REGIME
        assert not (tmp_path / "o" / "sweep.csv").exists()  # no partial artifacts

    def test_sweep_failure_when_censored(self, tmp_path):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            code = main(["sweep", "--out", str(tmp_path / "o"),
                         "--set", 'system={"kind":"GG","n":3,"p":1.3,"q":1.3}',
                         "--set", 'ladder={"eps_min":0.6,"eps_max":1.0,"count":5}',
                         "--set", "grid.dr=0.05",
                         "--set", "initial_t_cap=16.0", "--set", "t_max_cap=16.0"])
        assert code == EXIT_SWEEP

    def test_numerical_failure_for_short_fit(self, tmp_path):
        doc = {"sweep": {
            "spec": {"system": {"kind": "SS", "n": 3, "p": 1.5, "q": 1.5}},
            "prediction_exponent": 3.0 / 7.0,
            "records": [
                {"epsilon": 1.0, "t_blow": 10.0, "t_blow_secondary": 9.0,
                 "censored": False, "t_cap": 50.0, "steps": 10},
                {"epsilon": 0.8, "t_blow": 11.0, "t_blow_secondary": 10.0,
                 "censored": False, "t_cap": 50.0, "steps": 10},
                {"epsilon": 0.6, "t_blow": 13.0, "t_blow_secondary": 12.0,
                 "censored": False, "t_cap": 50.0, "steps": 10},
            ],
            "resolved": True, "refinement_shift": 0.0,
        }}
        path = tmp_path / "short.json"
        path.write_text(json.dumps(doc))
        code = main(["report", "--out", str(tmp_path / "o"),
                     "--set", "mode=fit", "--set", f"sweep={path}"])
        assert code == EXIT_NUMERICAL

    def test_io_error_distinct(self, tmp_path):
        blocker = tmp_path / "blocker"
        blocker.write_text("a file, not a directory")
        code = main(["exponents", "--set", "kind=SS", "--set", "n=3",
                     "--set", "p=2", "--set", "q=2",
                     "--out", str(blocker / "nested")])
        assert code == EXIT_IO

    def test_unknown_config_file(self, tmp_path):
        code = main(["exponents", "--config", str(tmp_path / "missing.json")])
        assert code == EXIT_IO


class TestReproducibility:
    def test_byte_identical_artifacts(self, tmp_path):
        argv = ["exponents", "--set", "kind=SG", "--set", "n=3",
                "--set", "p=1.5", "--set", "q=2", "--emit", "csv,json"]
        # identical plan (same destination) re-run: everything byte-identical
        assert main(argv + ["--out", str(tmp_path / "a")]) == EXIT_OK
        first = artifacts(tmp_path / "a")
        assert main(argv + ["--out", str(tmp_path / "a")]) == EXIT_OK
        assert artifacts(tmp_path / "a") == first
        # different destination: only the manifest's recorded plan may differ
        assert main(argv + ["--out", str(tmp_path / "b")]) == EXIT_OK
        skip = ("meta.json", "manifest.json")
        assert artifacts(tmp_path / "b", skip) == artifacts(tmp_path / "a", skip)

    def test_manifest_lists_artifact_hashes(self, tmp_path):
        main(["exponents", "--set", "kind=SS", "--set", "n=3",
              "--set", "p=2", "--set", "q=2", "--out", str(tmp_path / "o")])
        manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
        assert manifest["plan"]["command"] == "exponents"
        assert set(manifest["artifacts"]) == {"exponents.csv", "exponents.json"}

    def test_output_env_default(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SEMIWAVE_OUT", str(tmp_path / "envout"))
        code = main(["exponents", "--set", "kind=SS", "--set", "n=3",
                     "--set", "p=2", "--set", "q=2"])
        assert code == EXIT_OK
        assert (tmp_path / "envout" / "exponents.json").exists()


class TestAuxAndLemmaCommands:
    def test_aux_phi0(self, tmp_path):
        code = main(["aux", "--out", str(tmp_path / "o"), "--set", "op=phi0",
                     "--set", 'potential={"amplitude":1.0,"decay":3.0}',
                     "--set", "r_max=10.0", "--set", "dr=0.05"])
        assert code == EXIT_OK
        assert (tmp_path / "o" / "table.csv").exists()
        report = json.loads((tmp_path / "o" / "validation.json").read_text())
        assert report["monotone_nondecreasing"] is True

    def test_aux_b_value(self, tmp_path, capsys):
        code = main(["aux", "--out", str(tmp_path / "o"), "--set", "op=b",
                     "--set", "a=1.0", "--set", "t=2.0", "--set", "r=0.0"])
        assert code == EXIT_OK
        doc = json.loads((tmp_path / "o" / "b_value.json").read_text())
        assert doc["value"] == pytest.approx((1 - 2.718281828459045**-2) / 2, rel=1e-8)
        assert doc["node_doubling_rel_diff"] < 1e-6

    def test_lemma_command(self, tmp_path):
        code = main(["lemma", "--out", str(tmp_path / "o"),
                     "--set", "p1=2.0", "--set", "p2=2.0", "--set", "delta_count=5"])
        assert code == EXIT_OK
        fit = json.loads((tmp_path / "o" / "lemma_fit.json").read_text())
        assert fit["r_squared"] > 0.99
        lines = (tmp_path / "o" / "lemma.csv").read_text().splitlines()
        assert lines[0] == "delta,t_blow,ln_t_blow,t_switch"
        assert len(lines) == 6


@pytest.fixture(scope="module")
def sweep_dirs(tmp_path_factory):
    """One small live sweep, plus a damped twin, emitted through the CLI."""
    root = tmp_path_factory.mktemp("sweeps")
    common = ["sweep", "--set", 'ladder={"eps_min":0.6,"eps_max":1.0,"count":5}',
              "--set", "grid.dr=0.05", "--set", "refinement_guard=false",
              "--emit", "csv,json,svg"]
    a = root / "plain"
    b = root / "damped"
    assert main(common + ["--out", str(a),
                          "--set", 'system={"kind":"GG","n":3,"p":1.3,"q":1.3}']) == EXIT_OK
    assert main(common + ["--out", str(b),
                          "--set", 'system={"kind":"GG","n":3,"p":1.3,"q":1.3,'
                                   '"damping1":{"amplitude":1.0,"decay":2.0},'
                                   '"damping2":{"amplitude":1.0,"decay":2.0}}']) == EXIT_OK
    return a, b


class TestSweepAndReportCommands:
    def test_sweep_artifacts(self, sweep_dirs):
        a, _ = sweep_dirs
        assert (a / "sweep.csv").exists()
        assert (a / "sweep_manifest.json").exists()
        svg = (a / "sweep.svg").read_text()
        assert svg.startswith("<svg") and "predicted" in svg
        lines = (a / "sweep.csv").read_text().splitlines()
        assert lines[0] == "epsilon,t_blow,t_blow_secondary,censored"
        assert len(lines) == 6

    def test_report_fit(self, sweep_dirs, tmp_path):
        a, _ = sweep_dirs
        code = main(["report", "--out", str(tmp_path / "rep"), "--set", "mode=fit",
                     "--set", f"sweep={a / 'sweep_manifest.json'}"])
        assert code == EXIT_OK
        doc = json.loads((tmp_path / "rep" / "report.json").read_text())
        assert doc["upper_bound"]["passed"] is True
        assert "not a theorem verification" in doc["note"]

    def test_report_compare(self, sweep_dirs, tmp_path):
        a, b = sweep_dirs
        code = main(["report", "--out", str(tmp_path / "cmp"), "--set", "mode=compare",
                     "--set", f"sweep_a={a / 'sweep_manifest.json'}",
                     "--set", f"sweep_b={b / 'sweep_manifest.json'}"])
        assert code == EXIT_OK
        doc = json.loads((tmp_path / "cmp" / "report.json").read_text())
        assert doc["slope_difference"] < 0.1
        assert doc["consistent"] is True

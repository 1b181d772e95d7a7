import json
import os

import pytest

from pivotal_slope import datagen, harness
from pivotal_slope.cli import main


def write_config(path, **overrides):
    base = dict(schema_version=1, n=[30], p=[10], s=[2], o=[0],
                replications=2, magnitude=5.0)
    base.update(overrides)
    path.write_text(json.dumps(base))
    return path


class TestSimulate:
    def test_basic_run(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "cfg.json")
        out = tmp_path / "out"
        rc = main(["simulate", "--config", str(cfg), "--out", str(out)])
        assert rc == 0
        assert (out / "records.csv").exists()
        assert (out / "table.json").exists()
        assert (out / "slopes.csv").exists()
        recs = harness.records_from_csv(out / "records.csv")
        assert len(recs) == 2
        assert "failure fraction" in capsys.readouterr().out

    def test_json_format(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json")
        out = tmp_path / "out"
        rc = main(["simulate", "--config", str(cfg), "--out", str(out),
                   "--format", "json"])
        assert rc == 0
        with open(out / "records.json") as f:
            assert len(json.load(f)) == 2

    def test_dump_instance(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json")
        dump = tmp_path / "inst.npz"
        rc = main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o"),
                   "--dump-instance", str(dump)])
        assert rc == 0
        inst = datagen.load_instance(dump)
        assert inst.ds.n == 30 and inst.ds.p == 10

    def test_missing_config_flag(self, tmp_path, capsys):
        rc = main(["simulate", "--out", str(tmp_path)])
        assert rc == 1
        assert "--config" in capsys.readouterr().err

    def test_bad_config_exits_1(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text('{"schema_version": 1, "n": [10]}')
        rc = main(["simulate", "--config", str(cfg)])
        assert rc == 1
        assert "error:" in capsys.readouterr().err

    def test_nonexistent_config_exits_1(self, tmp_path):
        rc = main(["simulate", "--config", str(tmp_path / "nope.json")])
        assert rc == 1

    def test_seed_override_changes_records(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json")
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        main(["simulate", "--config", str(cfg), "--out", str(out_a)])
        main(["simulate", "--config", str(cfg), "--out", str(out_b),
              "--seed", "7"])
        ra = harness.records_from_csv(out_a / "records.csv")
        rb = harness.records_from_csv(out_b / "records.csv")
        assert {r.seed for r in ra} != {r.seed for r in rb}


class TestFit:
    def make_dump(self, tmp_path, o=0):
        inst = datagen.build_instance(40, 12, 2, beta_magnitude=5.0, seed=3)
        if o:
            inst = datagen.contaminate(inst, "random_large", o, 50.0)
        path = tmp_path / "inst.npz"
        datagen.dump_instance(inst, path)
        return path

    def test_fit_stdout_report(self, tmp_path, capsys):
        path = self.make_dump(tmp_path)
        rc = main(["fit", str(path)])
        assert rc == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["status"] in ("converged", "degenerate_sigma")
        assert len(rep["beta_hat"]) == 12
        assert rep["sigma_hat"] >= 0.0

    def test_fit_to_file(self, tmp_path):
        path = self.make_dump(tmp_path, o=2)
        out = tmp_path / "fit.json"
        rc = main(["fit", str(path), "--out", str(out), "--c-mu", "2.0"])
        assert rc == 0
        with open(out) as f:
            rep = json.load(f)
        assert "kkt_max_gap" in rep

    def test_baseline_variant(self, tmp_path, capsys):
        path = self.make_dump(tmp_path)
        rc = main(["fit", str(path), "--variant", "nonrobust_baseline"])
        assert rc == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["theta_nonzeros"] == 0

    def test_missing_instance_exits_1(self, tmp_path):
        assert main(["fit", str(tmp_path / "nope.npz")]) == 1


class TestDiagnose:
    def test_report_shape(self, tmp_path):
        out = tmp_path / "diag.json"
        rc = main(["diagnose", "--n", "60", "--p", "15", "--s", "3",
                   "--probes", "50", "--out", str(out)])
        assert rc == 0
        with open(out) as f:
            rep = json.load(f)
        assert set(rep) == {"design", "noise_event"}
        assert "kappa_hat" in rep["design"]
        assert "holds" in rep["noise_event"]

    def test_rademacher_design(self, capsys):
        rc = main(["diagnose", "--n", "40", "--p", "10", "--s", "2",
                   "--probes", "20", "--design", "rademacher"])
        assert rc == 0
        json.loads(capsys.readouterr().out)


class TestLowerBound:
    def test_summary_and_dumps(self, tmp_path, capsys):
        out = tmp_path / "lb"
        rc = main(["lower-bound", "--n", "200", "--o", "10",
                   "--tau", "2", "--out", str(out)])
        assert rc == 0
        text = capsys.readouterr().out
        summary = json.loads(text[:text.index("wrote")])
        assert summary["n"] == 200
        a = datagen.load_instance(out / "instance_a.npz")
        b = datagen.load_instance(out / "instance_b.npz")
        assert a.truth.o == 10 and b.truth.o == 0

    def test_tau_inf(self, capsys):
        rc = main(["lower-bound", "--n", "100", "--o", "5", "--tau", "inf"])
        assert rc == 0
        assert json.loads(capsys.readouterr().out)["tau"] == "inf"

    def test_bad_o_exits_1(self):
        assert main(["lower-bound", "--n", "100", "--o", "0"]) == 1


class TestEntryPoint:
    def test_console_script_help(self):
        import subprocess
        res = subprocess.run(["pivotal-slope", "--help"],
                             capture_output=True, text=True)
        assert res.returncode == 0
        for cmd in ("fit", "simulate", "diagnose", "lower-bound"):
            assert cmd in res.stdout

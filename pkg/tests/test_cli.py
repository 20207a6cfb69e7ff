import json
import os

import numpy as np
import pytest

from w2lab import cli
from w2lab.checks import REGISTRY, Verdict
from w2lab.cli import JobResult, emit, jobs_for
from w2lab.config import UsageError, default_settings, load_settings


SMOKE = os.path.join(os.path.dirname(__file__), "..", "configs", "smoke.ini")


class TestRegistry:
    def test_at_least_twelve_checkers(self):
        assert len(REGISTRY) >= 12

    def test_anchors_nonempty_and_unique(self):
        anchors = [e.anchor for e in REGISTRY]
        assert all(a.strip() for a in anchors)
        assert len(set(anchors)) == len(anchors)
        ids = [e.checker_id for e in REGISTRY]
        assert len(set(ids)) == len(ids)

    def test_list_subcommand(self, capsys):
        assert cli.main(["list"]) == 0
        out = capsys.readouterr().out
        for entry in REGISTRY:
            assert entry.checker_id in out


class TestConfig:
    def test_defaults_resolve(self):
        s = default_settings().with_seed(1)
        assert s.rate_d1.root_seed == 1
        assert s.rate_d2.root_seed == 2
        assert s.rate_d1.sampler.kind == "rademacher_product"
        assert s.rate_d2.estimator == "exact"

    def test_smoke_file_overrides(self):
        s = load_settings(SMOKE)
        assert s.check.l2_tables == 1000
        assert s.rate_d1.m == 20000
        assert s.rate_d1.n_grid == (16, 64, 256, 1024)

    def test_cli_flags_strongest(self):
        s = load_settings(SMOKE, seed=42, workers=4, out_dir="x")
        assert s.seed == 42
        assert s.check.root_seed == 42
        assert s.workers == 4
        assert s.out_dir == "x"

    def test_unknown_section(self, tmp_path):
        p = tmp_path / "bad.ini"
        p.write_text("[nonsense]\nx = 1\n")
        with pytest.raises(UsageError, match="nonsense"):
            load_settings(str(p))

    def test_unknown_key(self, tmp_path):
        p = tmp_path / "bad.ini"
        p.write_text("[rate_d1]\nbogus_key = 1\n")
        with pytest.raises(UsageError, match="bogus_key"):
            load_settings(str(p))

    def test_missing_file(self):
        with pytest.raises(UsageError, match="not found"):
            load_settings("/nonexistent/path.ini")

    def test_semantic_dict_excludes_presentation(self):
        s = default_settings()
        d = s.semantic_dict()
        assert "out_dir" not in d and "workers" not in d
        assert "seed" in d

    def test_lattice_custom_from_config(self, tmp_path):
        p = tmp_path / "lattice.ini"
        p.write_text(
            "[lower_d1]\n"
            "sampler = lattice_custom\n"
            "dim = 1\n"
            "outcomes = -1 | 1\n"
            "probs = 0.5 0.5\n"
        )
        s = load_settings(str(p))
        built = s.lower_d1.sampler.build()
        assert built.kind == "lattice_custom"
        assert built.bound == 1.0


class TestJobs:
    def test_job_lists(self):
        s = default_settings()
        assert len(jobs_for("check", s)) == len(REGISTRY)
        assert jobs_for("rate", s) == ["rate:d1", "rate:d2"]
        assert set(jobs_for("all", s)) >= set(jobs_for("ci", s))

    def test_only_filter(self):
        s = default_settings()
        assert jobs_for("check", s, only="r-of-n") == ["check:r-of-n"]
        with pytest.raises(UsageError):
            jobs_for("check", s, only="not-a-checker")
        with pytest.raises(UsageError):
            jobs_for("rate", s, only="r-of-n")


class TestMainEndToEnd:
    def test_single_checker_run(self, tmp_path):
        out = str(tmp_path / "out")
        rc = cli.main(["check", "--only", "r-of-n", "--out", out, "--seed", "7"])
        assert rc == 0
        payload = json.loads(open(os.path.join(out, "verdicts.json")).read())
        assert payload["root_seed"] == 7
        assert payload["config_hash"]
        assert payload["summary"]["fail"] == 0
        assert all(v["verdict"] == "pass" for v in payload["verdicts"])

    def test_malformed_config_exits_2(self, tmp_path):
        p = tmp_path / "bad.ini"
        p.write_text("[rate_d1]\nwhatever = 3\n")
        assert cli.main(["check", "--config", str(p)]) == 2

    def test_missing_config_exits_2(self):
        assert cli.main(["check", "--config", "/no/such/file.ini"]) == 2

    def test_estimator_dim_mismatch_exits_2(self, tmp_path):
        p = tmp_path / "bad.ini"
        p.write_text("[rate_d1]\nsampler = scaled_basis\ndim = 2\n")
        assert cli.main(["rate", "--config", str(p)]) == 2

    def test_rate_csv_schema(self, tmp_path):
        out = str(tmp_path / "out")
        p = tmp_path / "tiny.ini"
        # grid wide enough for the slope window to apply meaningfully
        p.write_text(
            "[rate_d1]\nn_grid = 16 64 256 1024\nreplicas = 3\nm = 20000\n"
            "[rate_d2]\nn_grid = 16 64\nreplicas = 3\nm = 400\n"
        )
        rc = cli.main(["rate", "--config", str(p), "--out", out])
        assert rc == 0
        lines = open(os.path.join(out, "tables", "rate_d1.csv")).read().splitlines()
        meta = [l for l in lines if l.startswith("#")]
        assert any("config_hash=" in l for l in meta)
        assert any("root_seed=" in l for l in meta)
        header = [l for l in lines if not l.startswith("#")][0]
        assert header == "n,w2_hat,ci_lo,ci_hi,bound"
        data = [l for l in lines if not l.startswith("#")][1:]
        assert len(data) == 4
        # plotdata is two-column numeric
        dat = open(os.path.join(out, "plotdata", "rate_d1.dat")).read().splitlines()
        rows = [l.split() for l in dat if not l.startswith("#")]
        assert all(len(r) == 2 for r in rows)
        np.array(rows, dtype=float)

    def test_failed_verdict_exits_1(self, tmp_path, capsys):
        s = default_settings()
        bad = JobResult(
            job_id="check:fake",
            verdicts=[Verdict("fake", "anchor", "case", 1.0, 0.0, -1.0, "fail", {})],
        )
        rc = emit(
            s.__class__(**{**s.__dict__, "out_dir": str(tmp_path / "o")}),
            [bad], verbose=0,
        )
        assert rc == 1

    def test_inconclusive_exits_0_with_warning(self, tmp_path, capsys):
        s = default_settings()
        j = JobResult(
            job_id="check:fake",
            verdicts=[Verdict("fake", "anchor", "case", 0.0, 0.0, 0.0,
                              "inconclusive", {})],
        )
        import dataclasses

        rc = emit(dataclasses.replace(s, out_dir=str(tmp_path / "o")), [j], verbose=1)
        assert rc == 0
        assert "warning" in capsys.readouterr().out

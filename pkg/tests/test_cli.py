import json

import numpy as np
import pytest

from novas import Dataset, exhaustive_select, load_table, standardize
from novas.cli import main


def _write_quadratic_file(path, n=200, p=10, seed=2, noiseless=True):
    """Covariate table whose response is x1^2 + x2^2 (plus optional noise)."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, (n, p))
    y = x[:, 0] ** 2 + x[:, 1] ** 2
    if not noiseless:
        y = y + 0.05 * rng.normal(size=n)
    header = [f"x{j}" for j in range(1, p + 1)] + ["y"]
    lines = [",".join(header)]
    for i in range(n):
        lines.append(",".join([repr(float(v)) for v in x[i]] + [repr(float(y[i]))]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


class TestSelect:
    def test_smallest_valid_run(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        rng = np.random.default_rng(0)
        x = rng.uniform(-1, 1, (40, 3))
        y = x[:, 0] ** 2
        lines = ["a,b,c,y"] + [
            ",".join(repr(float(v)) for v in row) for row in np.column_stack([x, y])]
        data.write_text("\n".join(lines) + "\n", encoding="utf-8")
        out = tmp_path / "trace.jsonl"

        code = main(["select", "--data", str(data), "--response", "y",
                     "--out", str(out), "--threads", "1"])
        assert code == 0
        records = [json.loads(l) for l in out.read_text().splitlines()]
        header = records[0]
        assert header["record"] == "header"
        assert header["p"] == 3 and header["covariates"] == ["a", "b", "c"]
        stage1 = records[1]
        assert stage1["record"] == "stage" and stage1["scored"] == 3
        summary = capsys.readouterr().out
        assert summary.splitlines()[0].split() == ["stage", "variables", "cv"]
        assert "final" in summary

    def test_noiseless_quadratic_selects_first_two(self, tmp_path, capsys):
        data = _write_quadratic_file(tmp_path / "quad.csv")
        out = tmp_path / "trace.jsonl"
        code = main(["select", "--data", data, "--response", "y",
                     "--out", str(out)])
        assert code == 0
        final = [json.loads(l) for l in out.read_text().splitlines()
                 if '"final"' in l][0]
        assert final["indices"] == [1, 2]
        # the exhaustive oracle agrees on the same ingested data
        raw, _, _ = load_table(data, "y")
        best = exhaustive_select(standardize(raw), max_size=2)
        assert tuple(final["indices"]) == best.indices

    def test_constant_column_exit_2_names_column(self, tmp_path, capsys):
        data = tmp_path / "bad.csv"
        data.write_text("a,b,y\n1,7,0.5\n2,7,0.9\n3,7,1.1\n", encoding="utf-8")
        code = main(["select", "--data", str(data), "--response", "y"])
        assert code == 2
        assert "'b'" in capsys.readouterr().err

    def test_non_numeric_cell_exit_2(self, tmp_path, capsys):
        data = tmp_path / "bad.csv"
        data.write_text("a,b,y\n1,2,0.5\n2,x,0.9\n", encoding="utf-8")
        code = main(["select", "--data", str(data), "--response", "y"])
        assert code == 2
        err = capsys.readouterr().err
        assert "row 2" in err and "'b'" in err

    def test_missing_file_exit_2(self, tmp_path):
        code = main(["select", "--data", str(tmp_path / "nope.csv"),
                     "--response", "y"])
        assert code == 2

    def test_bad_weight_exit_3(self, tmp_path):
        data = _write_quadratic_file(tmp_path / "quad.csv", n=30, p=3)
        code = main(["select", "--data", data, "--response", "y",
                     "--weight", "cone:1:2", "--out", str(tmp_path / "t.jsonl")])
        assert code == 3

    def test_bad_threshold_exit_3(self, tmp_path):
        data = _write_quadratic_file(tmp_path / "quad.csv", n=30, p=3)
        code = main(["select", "--data", data, "--response", "y",
                     "--threshold", "1.5", "--out", str(tmp_path / "t.jsonl")])
        assert code == 3


class TestSummarize:
    def test_round_trip_reproduces_summary(self, tmp_path, capsys):
        data = _write_quadratic_file(tmp_path / "quad.csv", n=60, p=4, seed=5,
                                     noiseless=False)
        out = tmp_path / "trace.jsonl"
        assert main(["select", "--data", data, "--response", "y",
                     "--out", str(out), "--threads", "1"]) == 0
        first = capsys.readouterr().out
        assert main(["summarize", "--trace", str(out)]) == 0
        second = capsys.readouterr().out
        assert second == first

    def test_unreadable_trace_exit_2(self, tmp_path):
        bad = tmp_path / "trace.jsonl"
        bad.write_text("not json\n", encoding="utf-8")
        assert main(["summarize", "--trace", str(bad)]) == 2


class TestSimulate:
    def test_report_written(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = main(["simulate", "--model", "m1", "--n", "60", "--p", "4",
                     "--reps", "2", "--selector", "novas",
                     "--out", str(out), "--threads", "1"])
        assert code == 0
        report = json.loads(out.read_text())
        assert report["replications"] == 2
        assert 0 <= report["correct_count"] <= 2
        assert "correct" in capsys.readouterr().out

    def test_zero_reps_exit_3(self, tmp_path):
        code = main(["simulate", "--model", "m1", "--n", "60", "--p", "4",
                     "--reps", "0", "--out", str(tmp_path / "r.json")])
        assert code == 3

    def test_alpha_required_for_family_exit_3(self, tmp_path):
        code = main(["simulate", "--model", "alpha_family", "--n", "60",
                     "--p", "4", "--reps", "1", "--out", str(tmp_path / "r.json")])
        assert code == 3

    def test_alpha_family_defaults_to_higher_nsr(self, tmp_path):
        out = tmp_path / "report.json"
        code = main(["simulate", "--model", "alpha_family", "--alpha", "0.35",
                     "--n", "60", "--p", "4", "--reps", "1", "--max-stages", "2",
                     "--out", str(out), "--threads", "1"])
        assert code == 0
        assert json.loads(out.read_text())["nsr"] == 0.1

    def test_trap_cells_reported(self, tmp_path):
        out = tmp_path / "report.json"
        code = main(["simulate", "--model", "m4", "--n", "60", "--p", "6",
                     "--trap", "--reps", "2", "--max-stages", "3",
                     "--out", str(out), "--threads", "1"])
        assert code == 0
        cells = json.loads(out.read_text())["trap_cells"]
        assert sum(cells.values()) == 2


class TestBenchmark:
    def test_rows_and_slope_emitted(self, tmp_path, capsys):
        out = tmp_path / "bench.jsonl"
        code = main(["benchmark", "--p", "16,32", "--n", "60", "--stages", "2",
                     "--seed", "3", "--threads", "1", "--out", str(out)])
        assert code == 0
        records = [json.loads(l) for l in out.read_text().splitlines()]
        timings = [r for r in records if r["record"] == "timing"]
        slopes = [r for r in records if r["record"] == "slope"]
        assert [t["p"] for t in timings] == [16, 32]
        assert len(slopes) == 1
        assert "log-log slope" in capsys.readouterr().out

    def test_fit_counts_thread_invariant(self, tmp_path):
        fits = {}
        for threads in ("1", "2"):
            out = tmp_path / f"bench{threads}.jsonl"
            assert main(["benchmark", "--p", "16,32", "--n", "60",
                         "--stages", "2", "--seed", "3", "--threads", threads,
                         "--out", str(out)]) == 0
            records = [json.loads(l) for l in out.read_text().splitlines()]
            fits[threads] = [r["fits_evaluated"] for r in records
                             if r["record"] == "timing"]
        assert fits["1"] == fits["2"]

    def test_single_p_exit_3(self, tmp_path):
        code = main(["benchmark", "--p", "100", "--n", "60",
                     "--out", str(tmp_path / "b.jsonl")])
        assert code == 3


class TestThreadsEnv:
    def test_env_fallback_used(self, tmp_path, monkeypatch):
        monkeypatch.setenv("NOVAS_THREADS", "2")
        data = _write_quadratic_file(tmp_path / "quad.csv", n=30, p=3)
        assert main(["select", "--data", data, "--response", "y",
                     "--out", str(tmp_path / "t.jsonl")]) == 0

    def test_bad_env_exit_3(self, tmp_path, monkeypatch):
        monkeypatch.setenv("NOVAS_THREADS", "many")
        data = _write_quadratic_file(tmp_path / "quad.csv", n=30, p=3)
        assert main(["select", "--data", data, "--response", "y",
                     "--out", str(tmp_path / "t.jsonl")]) == 3

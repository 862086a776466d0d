"""End-to-end CLI tests driving main(argv) in-process."""

import json

import numpy as np
import pytest

import rkfd
import rkfd.problems
from rkfd.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main

from test_integrate import boom_problem


@pytest.fixture
def with_boom(monkeypatch):
    """Expose the divergent test problem through the problem registry."""
    monkeypatch.setitem(rkfd.problems._FACTORIES, "boom", boom_problem)


class TestVerify:
    def test_fifth_order_tableau_passes(self, capsys):
        assert main(["verify", "--method", "rkfd5"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "tableau: rkfd5 (declared order: 5)" in out
        assert "attained order: 5" in out

    def test_corrected_fourth_order_tableau_passes(self):
        assert main(["verify", "--method", "rkfd4"]) == EXIT_OK
        assert main(["verify", "--method", "rkfd4-corrected"]) == EXIT_OK

    def test_printed_tableau_fails_at_default_tolerance(self, capsys):
        assert main(["verify", "--method", "rkfd4-printed"]) == EXIT_FAIL
        out = capsys.readouterr().out
        assert "attained order: 2" in out
        assert "NO" in out

    def test_loose_tolerance_flips_the_verdict(self):
        assert main(["verify", "--method", "rkfd4-printed",
                     "--tolerance", "1e-3"]) == EXIT_OK

    def test_csv_output(self, tmp_path):
        path = tmp_path / "report.csv"
        assert main(["verify", "--method", "rkfd5", "--format", "csv",
                     "--out", str(path)]) == EXIT_OK
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "order,condition_id,lhs,rhs,residual,pass"
        assert len(lines) == 1 + 32

    def test_csv_to_stdout(self, capsys):
        assert main(["verify", "--method", "rkfd5", "--format", "csv"]) == EXIT_OK
        assert capsys.readouterr().out.startswith("order,condition_id,")

    def test_missing_tableau_file(self, capsys):
        assert main(["verify", "--method", "missing.json"]) == EXIT_USAGE
        assert "error:" in capsys.readouterr().err

    def test_rk_tableau_rejected(self, capsys):
        assert main(["verify", "--method", "rk4"]) == EXIT_USAGE
        assert "not a direct-method tableau" in capsys.readouterr().err

    def test_unknown_method(self, capsys):
        assert main(["verify", "--method", "rkfd9"]) == EXIT_USAGE
        assert "unknown method" in capsys.readouterr().err

    def test_bad_tolerance(self):
        assert main(["verify", "--method", "rkfd5", "--tolerance", "-1"]) == EXIT_USAGE


class TestIntegrate:
    def test_table_summary(self, capsys):
        assert main(["integrate", "--method", "rkfd5", "--problem", "p2",
                     "--h", "0.1"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "method=rkfd5 problem=p2" in out
        assert "steps=100 fevals=300" in out
        assert "final x=10" in out

    def test_reduction_method(self, capsys):
        assert main(["integrate", "--method", "rk4", "--problem", "p2",
                     "--h", "0.1"]) == EXIT_OK
        assert "fevals=400" in capsys.readouterr().out

    def test_trajectory_csv(self, tmp_path):
        path = tmp_path / "traj.csv"
        assert main(["integrate", "--method", "rkfd5", "--problem", "p2",
                     "--h", "0.1", "--format", "csv", "--out", str(path)]) == EXIT_OK
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "x,y_1,dy_1,d2y_1,d3y_1"
        assert len(lines) == 1 + 101
        assert float(lines[-1].split(",")[0]) == 10.0

    def test_error_columns_and_stride(self, tmp_path):
        path = tmp_path / "traj.csv"
        assert main(["integrate", "--method", "rkfd5", "--problem", "p2",
                     "--h", "0.1", "--format", "csv", "--errors",
                     "--stride", "25", "--out", str(path)]) == EXIT_OK
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "x,y_1,dy_1,d2y_1,d3y_1,abs_err_1,rel_err_1"
        xs = [float(r.split(",")[0]) for r in lines[1:]]
        assert xs == [0.0, 2.5, 5.0, 7.5, 10.0]

    def test_backend_flag(self, capsys):
        assert main(["integrate", "--method", "rkfd5", "--problem", "p5",
                     "--h", "0.1", "--backend", "numpy"]) == EXIT_OK
        assert "backend=numpy" in capsys.readouterr().out

    def test_usage_errors(self):
        assert main(["integrate", "--method", "rkfd5", "--problem", "p9",
                     "--h", "0.1"]) == EXIT_USAGE
        assert main(["integrate", "--method", "rkfd5", "--problem", "p2",
                     "--h", "-0.5"]) == EXIT_USAGE
        assert main(["integrate", "--method", "rkfd5", "--problem", "p2",
                     "--h", "0.1", "--stride", "0"]) == EXIT_USAGE

    def test_divergence_exits_1(self, with_boom, capsys):
        with np.errstate(all="ignore"):
            code = main(["integrate", "--method", "rkfd5", "--problem", "boom",
                         "--h", "0.1"])
        assert code == EXIT_FAIL
        assert "non-finite" in capsys.readouterr().err


class TestConverge:
    def test_global_table(self, capsys):
        assert main(["converge", "--method", "rkfd4", "--problem", "p2",
                     "--h0", "0.1", "--levels", "3"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "global convergence" in out
        assert "least-squares slope" in out

    def test_local_csv_shows_the_floor(self, tmp_path):
        path = tmp_path / "local.csv"
        assert main(["converge", "--method", "rkfd5", "--problem", "p2",
                     "--mode", "local", "--format", "csv",
                     "--out", str(path)]) == EXIT_OK
        rows = [r.split(",") for r in path.read_text().strip().splitlines()]
        assert rows[0] == ["method", "problem", "h", "error", "observed_order"]
        assert len(rows) == 1 + 4
        assert rows[1][4] == ""                      # coarsest h has no pair
        assert float(rows[2][4]) == pytest.approx(7.006, abs=0.05)
        assert rows[3][4] == ""                      # roundoff-dominated pairs
        assert rows[4][4] == ""

    def test_local_h_list_is_sorted(self, capsys):
        assert main(["converge", "--method", "rkfd4", "--problem", "p5",
                     "--mode", "local", "--h-list", "0.05,0.2,0.1"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "single-step convergence" in out
        assert out.index("0.2") < out.index("0.05")

    def test_usage_errors(self):
        assert main(["converge", "--method", "rkfd4", "--problem", "p2",
                     "--levels", "1"]) == EXIT_USAGE
        assert main(["converge", "--method", "rkfd4", "--problem", "p2",
                     "--h0", "-0.1"]) == EXIT_USAGE
        assert main(["converge", "--method", "rkfd4", "--problem", "p2",
                     "--mode", "local", "--h-list", "a,b"]) == EXIT_USAGE
        # a single step of the largest h must stay inside the interval
        assert main(["converge", "--method", "rkfd4", "--problem", "p5",
                     "--mode", "local", "--h-list", "2.0,1.0"]) == EXIT_USAGE


class TestBench:
    def test_csv_table(self, tmp_path):
        path = tmp_path / "bench.csv"
        assert main(["bench", "--methods", "rkfd4,rk4", "--problems", "p5",
                     "--h-list", "0.1,0.05", "--repeats", "1",
                     "--format", "csv", "--out", str(path)]) == EXIT_OK
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "method,problem,h,steps,fevals,max_error,wall_seconds"
        assert len(lines) == 1 + 4
        fields = [ln.split(",") for ln in lines[1:]]
        assert [f[0] for f in fields] == ["rk4", "rk4", "rkfd4", "rkfd4"]
        by_key = {(f[0], f[2]): f for f in fields}
        assert by_key[("rkfd4", "0.1")][4] == "30"
        assert by_key[("rk4", "0.1")][4] == "40"

    def test_reruns_differ_only_in_wall_seconds(self, tmp_path):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for path in paths:
            assert main(["bench", "--methods", "rkfd5", "--problems", "p5",
                         "--h-list", "0.1", "--repeats", "1",
                         "--format", "csv", "--out", str(path)]) == EXIT_OK
        strip = lambda p: [ln.rsplit(",", 1)[0]
                           for ln in p.read_text().strip().splitlines()]
        assert strip(paths[0]) == strip(paths[1])

    def test_plot_script(self, tmp_path):
        plot = tmp_path / "wp.gp"
        assert main(["bench", "--methods", "rkfd4,rk4", "--problems", "p5",
                     "--h-list", "0.1,0.05", "--repeats", "1",
                     "--out", str(tmp_path / "b.txt"),
                     "--plot-script", str(plot)]) == EXIT_OK
        text = plot.read_text()
        assert "<< EOD" in text
        assert "plot $" in text

    def test_default_selectors_cover_the_benchmark_suite(self, tmp_path):
        path = tmp_path / "all.csv"
        assert main(["bench", "--h-list", "0.1", "--repeats", "1",
                     "--format", "csv", "--out", str(path)]) == EXIT_OK
        lines = path.read_text().strip().splitlines()[1:]
        methods = {ln.split(",")[0] for ln in lines}
        problems = {ln.split(",")[1] for ln in lines}
        assert methods == {"rkfd4", "rkfd5", "rk4"}
        assert problems == {"p1", "p2", "p3", "p4", "p5"}
        assert len(lines) == 15

    def test_divergent_cell_exits_1(self, with_boom, capsys):
        with np.errstate(all="ignore"):
            code = main(["bench", "--methods", "rkfd5", "--problems", "boom",
                         "--h-list", "0.1", "--repeats", "1"])
        assert code == EXIT_FAIL
        assert "diverged" in capsys.readouterr().out

    def test_usage_errors(self):
        assert main(["bench", "--methods", "rkfd5", "--problems", "p5",
                     "--h-list", "0.1", "--repeats", "0"]) == EXIT_USAGE
        assert main(["bench", "--methods", "nope", "--problems", "p5",
                     "--h-list", "0.1"]) == EXIT_USAGE
        assert main(["bench", "--methods", "rkfd5", "--problems", "p5",
                     "--h-list", ""]) == EXIT_USAGE


class TestConvert:
    def test_convert_then_verify(self, tmp_path, capsys):
        path = tmp_path / "direct4.json"
        assert main(["convert", "--rk", "rk4", "--name", "direct4",
                     "--out", str(path)]) == EXIT_OK
        assert "wrote" in capsys.readouterr().out
        raw = json.loads(path.read_text())
        assert raw["kind"] == "rkfd"
        assert raw["name"] == "direct4"
        # converted methods carry no declared order, so attaining any
        # positive order verifies; this one attains 4
        assert main(["verify", "--method", str(path)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "declared order: undeclared" in out
        assert "attained order: 4" in out

    def test_convert_rejects_direct_tableaus(self, tmp_path, capsys):
        assert main(["convert", "--rk", "rkfd5",
                     "--out", str(tmp_path / "x.json")]) == EXIT_USAGE
        assert "not an rk tableau" in capsys.readouterr().err

    def test_unwritable_output_path(self, tmp_path):
        assert main(["convert", "--rk", "rk4",
                     "--out", str(tmp_path / "no-dir" / "x.json")]) == EXIT_USAGE


class TestListProblems:
    def test_lists_all_registry_entries(self, capsys):
        assert main(["list-problems"]) == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 9
        p1_line = next(ln for ln in lines if ln.startswith("p1"))
        assert "m=1" in p1_line
        assert "interval=[0, 10]" in p1_line
        assert "exact=yes" in p1_line
        p4_line = next(ln for ln in lines if ln.startswith("p4"))
        assert "m=4" in p4_line
        assert any(ln.startswith("poly0") for ln in lines)

    def test_output_file(self, tmp_path):
        path = tmp_path / "problems.txt"
        assert main(["list-problems", "--out", str(path)]) == EXIT_OK
        assert path.read_text().count("\n") == 9


class TestTopLevel:
    def test_no_arguments_is_a_usage_error(self, capsys):
        assert main([]) == EXIT_USAGE
        capsys.readouterr()

    def test_unknown_subcommand(self, capsys):
        assert main(["frobnicate"]) == EXIT_USAGE
        capsys.readouterr()

    def test_unknown_flag(self, capsys):
        assert main(["verify", "--method", "rkfd5", "--frob"]) == EXIT_USAGE
        capsys.readouterr()

    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == EXIT_OK
        assert "verify" in capsys.readouterr().out

import csv
import dataclasses

import pytest

from inexact_ipm import cli
from inexact_ipm.ipm import NUMERICAL_FAILURE, LOG_COLUMNS
from inexact_ipm.lp_core import LinearProgram, write_triplets

from conftest import E1_MPS, INFEASIBLE_MPS


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture
def files(tmp_path):
    (tmp_path / "e1.mps").write_text(E1_MPS)
    (tmp_path / "pinf.mps").write_text(INFEASIBLE_MPS)
    return tmp_path


class TestSolve:
    def test_e1_optimal(self, files, capsys):
        out = files / "run"
        code = cli.main(["solve", "--mode", "feasible", "--input", str(files / "e1.mps"),
                         "--kappa", "0", "--eps", "1e-8", "--out", str(out)])
        assert code == cli.EXIT_OPTIMAL == 0
        rows = read_csv(out / "iterations.csv")
        assert tuple(rows[0]) == LOG_COLUMNS
        k = LOG_COLUMNS.index("delta_achieved")
        assert all(float(r[k]) >= 0.15 for r in rows[1:])
        summary = read_csv(out / "summary.csv")
        assert tuple(summary[0]) == cli.SUMMARY_COLUMNS
        assert summary[1][5] == "optimal"
        assert "status=optimal" in capsys.readouterr().out

    def test_certificate(self, files):
        code = cli.main(["solve", "--mode", "infeasible", "--rho", "10",
                         "--input", str(files / "pinf.mps"), "--out", str(files / "o")])
        assert code == cli.EXIT_CERTIFICATE == 2

    def test_iteration_limit(self, files):
        code = cli.main(["solve", "--generate", "4,10,1", "--max-outer", "2", "--out", str(files / "o")])
        assert code == cli.EXIT_ITERATION_LIMIT == 3

    def test_kappa_one_rejected(self, files, capsys):
        code = cli.main(["solve", "--input", str(files / "e1.mps"), "--kappa", "1.0"])
        assert code == cli.EXIT_INPUT_ERROR == 4
        assert "kappa" in capsys.readouterr().err

    @pytest.mark.parametrize(
        "argv",
        [
            ["solve", "--mode", "infeasible", "--generate", "2,5,3"],  # rho missing
            ["solve", "--mode", "infeasible", "--rho", "10", "--nu", "11", "--generate", "2,5,3"],
            ["solve", "--nu", "1", "--generate", "2,5,3"],
            ["solve", "--generate", "5,5,1"],
            ["solve", "--input", "/nonexistent/file.mps"],
            ["solve", "--condition", "monteiro", "--sigma", "1.5", "--generate", "2,5,3"],
            ["solve"],  # usage error
            ["frobnicate"],
        ],
    )
    def test_input_errors(self, argv, capsys):
        assert cli.main(argv) == cli.EXIT_INPUT_ERROR

    def test_parse_error(self, files, capsys):
        (files / "bad.mps").write_text(E1_MPS.replace("1.0   R1", "x   R1", 1))
        assert cli.main(["solve", "--input", str(files / "bad.mps")]) == 4
        assert "line" in capsys.readouterr().err

    def test_rank_deficient(self, files):
        lp = LinearProgram.from_dense([[1.0, 1.0, 0.0], [2.0, 2.0, 0.0]], [1.0, 2.0], [1.0, 1.0, 1.0])
        (files / "rank.txt").write_text(write_triplets(lp))
        assert cli.main(["solve", "--input", str(files / "rank.txt")]) == 4

    def test_no_strict_start(self, files, capsys):
        assert cli.main(["solve", "--input", str(files / "pinf.mps"), "--out", str(files / "o")]) == 4
        assert "strictly feasible" in capsys.readouterr().err

    def test_numerical_failure(self, files, monkeypatch):
        real = cli.run_feasible

        def failing(*args, **kwargs):
            return dataclasses.replace(real(*args, **kwargs), status=NUMERICAL_FAILURE)

        monkeypatch.setattr(cli, "run_feasible", failing)
        code = cli.main(["solve", "--generate", "2,5,1", "--out", str(files / "o")])
        assert code == cli.EXIT_NUMERICAL_FAILURE == 5

    def test_diagnostics(self, files):
        out = files / "d"
        assert cli.main(["solve", "--generate", "3,8,2", "--kappa", "0.6", "--diagnostics",
                         "--out", str(out)]) == 0
        rows = read_csv(out / "diagnostics.csv")
        assert tuple(rows[0]) == cli.DIAGNOSTIC_COLUMNS
        bound = rows[0].index("rel_err_bound")
        assert all(float(r[bound]) == pytest.approx(1.5) for r in rows[1:])

    def test_variant_and_preconditioner(self, files):
        for cond in ("monteiro", "gondzio"):
            assert cli.main(["solve", "--generate", "3,9,4", "--condition", cond,
                             "--preconditioner", "basis", "--out", str(files / cond)]) == 0

    def test_bounded_generator_feasible_mode(self, files):
        assert cli.main(["solve", "--generate", "2,5,3", "--generator", "bounded",
                         "--out", str(files / "b")]) == 0


class TestExperiment:
    def test_kappa_grid(self, files):
        out = files / "exp"
        assert cli.main(["experiment", "--seeds", "1", "--kappas", "0,0.3,0.6,0.9",
                         "--sizes", "4x12", "--out", str(out)]) == 0
        rows = read_csv(out / "summary.csv")
        assert tuple(rows[0]) == cli.SUMMARY_COLUMNS
        assert len(rows) == 5
        assert [r[5] for r in rows[1:]] == ["optimal"] * 4
        assert [float(r[3]) for r in rows[1:]] == [0.0, 0.3, 0.6, 0.9]

    def test_empty_seed_list(self, files):
        out = files / "empty"
        assert cli.main(["experiment", "--seeds", "", "--out", str(out)]) == 0
        assert (out / "summary.csv").read_text() == ",".join(cli.SUMMARY_COLUMNS) + "\n"

    def test_byte_identical_and_order_independent(self, files):
        args = ["experiment", "--seeds", "1,2", "--kappas", "0.3,0.9", "--conditions",
                "paper,gondzio", "--sizes", "3x8,4x10", "--no-timing"]
        assert cli.main(args + ["--out", str(files / "a")]) == 0
        assert cli.main(args + ["--out", str(files / "b"), "--jobs", "3"]) == 0
        for name in ("summary.csv", "detail.csv"):
            assert (files / "a" / name).read_bytes() == (files / "b" / name).read_bytes()

    def test_monteiro_threshold_column(self, files):
        out = files / "m"
        assert cli.main(["experiment", "--seeds", "1", "--kappas", "0.5", "--conditions", "monteiro",
                         "--sizes", "3x10,12x40", "--out", str(out)]) == 0
        rows = read_csv(out / "detail.csv")
        col = rows[0].index("median_xi_threshold")
        assert float(rows[2][col]) < float(rows[1][col])

    def test_bad_condition(self, files):
        assert cli.main(["experiment", "--conditions", "paper,bogus", "--out", str(files / "x")]) == 4

    def test_bad_kappa(self, files):
        assert cli.main(["experiment", "--kappas", "0.5,1.0", "--out", str(files / "x")]) == 4


class TestValidate:
    def test_default_passes(self, capsys):
        assert cli.main(["validate", "--seeds", "10", "--samples", "200"]) == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out and out.count("PASS") == 11

    def test_break_lift_fails(self, capsys):
        assert cli.main(["validate", "--seeds", "3", "--suite", "xi_support", "--break-lift"]) == 1
        assert "FAIL xi_support" in capsys.readouterr().out

    def test_single_suite(self, capsys):
        assert cli.main(["validate", "--suite", "lemma3", "--samples", "1000"]) == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert len(out) == 1 and out[0].startswith("PASS lemma3: passed=1000")

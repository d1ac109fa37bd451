import pytest

from cli import BENCH_COLUMNS, main, resolve_model_path, run_bench
from config import MODELS_DIR, VerifierOptions
from persistent_storage import ReportStorage
from verifier import Outcome


class TestResolveModelPath:
    @staticmethod
    def test_bundled_name():
        assert resolve_model_path("worker_controller_1") == MODELS_DIR / "worker_controller_1.tinv"

    @staticmethod
    def test_missing():
        with pytest.raises(FileNotFoundError, match="No model file"):
            resolve_model_path("no_such_model")


class TestCheckCommand:
    @staticmethod
    def test_proved(capsys):
        assert main(["check", "worker_controller_1", "--prop", "safe", "--glue", "e"]) == 0
        assert "✅ safe: PROVED" in capsys.readouterr().out

    @staticmethod
    def test_not_proved_without_glue(capsys):
        assert main(["check", "worker_controller_1", "--prop", "safe", "--glue", "none"]) == 1
        assert "UNKNOWN" in capsys.readouterr().out

    @staticmethod
    def test_missing_model(capsys):
        assert main(["check", "no_such_model"]) == 3
        assert capsys.readouterr().err.startswith("❌ No model file")

    @staticmethod
    def test_unknown_glue(capsys):
        assert main(["check", "worker_controller_1", "--glue", "bogus"]) == 3
        assert "Unknown glue family" in capsys.readouterr().err

    @staticmethod
    def test_dumps(capsys):
        main(["check", "worker_controller_1", "--glue", "e", "--dump-traps", "--dump-extended"])
        out = capsys.readouterr().out
        assert "{c@lc2, w1@l1}" in out
        assert "clock h0" in out

    @staticmethod
    def test_smt_out(tmp_path):
        target = tmp_path / "query.smt2"
        main(["check", "worker_controller_1", "--glue", "e", "--smt-out", str(target)])
        assert target.read_text(encoding="utf-8").startswith("(set-logic QF_LRA)")

    @staticmethod
    def test_save_report(tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert main(["check", "worker_controller_1", "--glue", "e", "--save-report"]) == 0
        assert (tmp_path / "data" / "reports.json").exists()
        reports = ReportStorage(tmp_path / "data").load_reports()
        assert [r.verdict for r in reports] == [Outcome.PROVED]


class TestOtherCommands:
    @staticmethod
    def test_deadlock(capsys):
        assert main(["deadlock", "worker_controller_1", "--glue", "e"]) in (0, 1)
        assert "deadlock:" in capsys.readouterr().out

    @staticmethod
    def test_invariants_with_elimination(capsys):
        assert main(["invariants", "worker_controller_1", "--glue", "e", "--eliminate"]) == 0
        out = capsys.readouterr().out
        assert "# history clocks eliminated" in out
        assert "CI(c) =" in out
        assert "GI atoms:" in out

    @staticmethod
    def test_reach_dump(capsys):
        assert main(["reach", "worker_controller_1", "--component", "c", "--dump-zonegraph"]) == 0
        assert "zonegraph c: 3 states" in capsys.readouterr().out

    @staticmethod
    def test_reach_summary(capsys):
        assert main(["reach", "worker_controller_1", "--component", "c"]) == 0
        assert capsys.readouterr().out.startswith("c: 3 symbolic states, 3 edges")

    @staticmethod
    def test_reach_unknown_component(capsys):
        assert main(["reach", "worker_controller_1", "--component", "zz"]) == 3

    @staticmethod
    def test_oracle(capsys):
        assert main(["oracle", "worker_controller_1"]) == 0
        assert "✅ safe: holds" in capsys.readouterr().out


class TestBench:
    @staticmethod
    def test_rows():
        paths = [MODELS_DIR / "worker_controller_1.tinv", MODELS_DIR / "temp_controller_1.tinv"]
        table = run_bench(paths, None, VerifierOptions.from_flags(glue="e"))
        assert list(table.columns) == BENCH_COLUMNS
        assert len(table) == 2
        row = table.iloc[0]
        assert row["model"] == "worker_controller_1"
        assert row["verdict"] == "PROVED"
        assert row["h"] == 5

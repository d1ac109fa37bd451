import pytest

from cli import main
from config import VerifierOptions
from glue_constraints import build_E, build_E_star, build_S_star, separation_constants
from history_extension import HistoryMap
from oracle import oracle_holds_invariant, oracle_reach
from verifier import DEADLOCK, Outcome, build_global_invariant, check

SLOW = pytest.mark.slow

# (model, property, glue, heuristic); sizes of five and more run with -m slow
PROVED_CASES = [
    pytest.param("worker_controller_1", "safe", "e", None, id="wc1-safe"),
    pytest.param("worker_controller_2", DEADLOCK, "estar,sep", None, id="wc2-deadlock"),
    pytest.param("fischer_2", "mutex", "e", "regex", id="fischer2"),
    pytest.param("fischer_3", "mutex", "e", "regex", id="fischer3"),
    pytest.param("fischer_5", "mutex", "e", "regex", id="fischer5", marks=SLOW),
    pytest.param("tgc_1", "gate_safe", "estar,sep,prec", None, id="tgc1"),
    pytest.param("tgc_3", "gate_safe", "estar,sep,prec", None, id="tgc3"),
    pytest.param("tgc_10", "gate_safe", "estar,sep,prec", None, id="tgc10", marks=SLOW),
    pytest.param("temp_controller_1", DEADLOCK, "e", None, id="tc1-deadlock"),
    pytest.param("temp_controller_2", DEADLOCK, "estar,sep", None, id="tc2-deadlock"),
    pytest.param("temp_controller_5", DEADLOCK, "estar,sep", None, id="tc5-deadlock", marks=SLOW),
]

SMALLEST = ["worker_controller_1", "temp_controller_1", "fischer_2", "tgc_1", "gear_simplified",
            "pacemaker_simplified"]


def _options(glue, heuristic=None, **kwargs):
    return VerifierOptions.from_flags(glue=glue, heuristic=heuristic, **kwargs)


class TestCommandLine:
    @staticmethod
    def test_running_example(capsys):
        assert main(["check", "worker_controller_1.tinv", "--prop", "safe", "--glue", "e"]) == 0
        assert "✅ safe: PROVED" in capsys.readouterr().out
        assert main(["check", "worker_controller_1.tinv", "--prop", "safe", "--glue", "none"]) == 1
        assert "⚠️ safe: UNKNOWN" in capsys.readouterr().out

    @staticmethod
    def test_deadlock_with_two_workers(capsys):
        assert main(["deadlock", "worker_controller_2", "--glue", "estar,sep"]) == 0
        assert "deadlock: PROVED" in capsys.readouterr().out


class TestBenchmarkVerdicts:
    @staticmethod
    @pytest.mark.parametrize("name, prop, glue, heuristic", PROVED_CASES)
    def test_proved(bundled, name, prop, glue, heuristic):
        report = check(bundled(name), prop, _options(glue, heuristic))
        assert report.verdict == Outcome.PROVED, report.summary()

    @staticmethod
    def test_two_workers_need_separation(wc2):
        report = check(wc2, DEADLOCK, _options("estar"))
        assert report.verdict == Outcome.UNKNOWN
        assert report.witness

    @staticmethod
    @pytest.mark.parametrize("name", [
        "worker_controller_2",
        "temp_controller_2",
        pytest.param("temp_controller_5", marks=SLOW),
    ])
    def test_symmetry_keeps_the_verdict(bundled, name):
        report = check(bundled(name), DEADLOCK, _options("estar,sep", symmetry=True))
        assert report.verdict == Outcome.PROVED, report.summary()
        assert "Sc" in report.sizes


class TestInductiveness:
    @staticmethod
    @pytest.mark.parametrize("name", ["worker_controller_1", "worker_controller_2", "temp_controller_1",
                                      "temp_controller_2"])
    @pytest.mark.parametrize("family", ["E", "E*", "S*"])
    def test_glue_holds_from_consistent_starts(bundled, name, family):
        model = bundled(name)
        hm = HistoryMap.for_model(model)
        if family == "E":
            glue = build_E(model.gamma, hm)
        elif family == "E*":
            glue = build_E_star(model.gamma, hm)
        else:
            glue = build_S_star(model.gamma, separation_constants(model), hm)
        run = oracle_reach(model, history=True, interactions=True, assume=glue.formula)
        assert oracle_holds_invariant(model, glue.formula, run=run)


class TestSoundnessSweep:
    @staticmethod
    @pytest.mark.parametrize("name", SMALLEST)
    def test_global_invariant_holds_on_reachable_states(bundled, name):
        model = bundled(name)
        bundle = build_global_invariant(model, _options("e"))
        run = oracle_reach(model, history=True, assume=bundle.glue[0].formula)
        assert oracle_holds_invariant(model, bundle.formula, run=run)


class TestExternalSolver:
    @staticmethod
    @pytest.mark.parametrize("name, prop, glue, heuristic", PROVED_CASES)
    def test_z3_agrees(bundled, name, prop, glue, heuristic):
        pytest.importorskip("z3")
        model = bundled(name)
        internal = check(model, prop, _options(glue, heuristic))
        external = check(model, prop, _options(glue, heuristic, solver="smtlib"))
        assert external.verdict == internal.verdict

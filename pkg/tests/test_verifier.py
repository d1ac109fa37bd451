import pytest

from config import VerifierOptions
from errors import ModelSemanticError
from formula_engine import equivalent, is_valid_implication
from model_core import formula_clocks, is_history_clock_name
from model_parser import parse_formula
from verifier import (
    DEADLOCK, Outcome, VerificationReport, build_global_invariant, check, describe_invariant, eliminate_history,
    readable_invariants, resolve_property, run,
)


def _options(**kwargs):
    return VerifierOptions.from_flags(**kwargs)


class TestResolveProperty:
    @staticmethod
    def test_only_declared_property(wc1):
        name, prop = resolve_property(wc1)
        assert name == "safe"
        assert prop == wc1.property_formula("safe")

    @staticmethod
    def test_deadlock(wc1):
        name, _ = resolve_property(wc1, DEADLOCK)
        assert name == "deadlock"

    @staticmethod
    def test_ambiguous_and_unknown(bundled, wc1):
        with pytest.raises(ModelSemanticError, match="Choose a property"):
            resolve_property(bundled("gear_simplified"))
        with pytest.raises(ModelSemanticError, match="Unknown property 'nope'"):
            resolve_property(wc1, "nope")


class TestVerdicts:
    @staticmethod
    def test_worker_controller_proved_with_E(wc1):
        report = check(wc1, "safe", _options(glue="e"))
        assert report.verdict == Outcome.PROVED
        assert report.exit_code == 0
        assert report.stats == {"n": 2, "q": 5, "c": 2, "i": 2, "h": 5}
        assert report.branches > 0

    @staticmethod
    def test_default_glue_proves_it_too(wc1):
        assert check(wc1, "safe").verdict == Outcome.PROVED

    @staticmethod
    def test_without_glue_the_property_is_not_proved(wc1):
        report = check(wc1, "safe", _options(glue="none"))
        assert report.verdict == Outcome.UNKNOWN
        assert report.exit_code == 1
        assert report.message == "GI ∧ ¬property is satisfiable"
        assert "c@lc1" in report.witness
        assert report.stats["h"] == 0

    @staticmethod
    def test_temperature_controller_needs_no_glue(tc1):
        assert check(tc1, "rod_in_use", _options(glue="none")).verdict == Outcome.PROVED

    @staticmethod
    def test_budget(wc1):
        report = check(wc1, "safe", _options(glue="e", cube_budget=0))
        assert report.verdict == Outcome.BUDGET
        assert report.exit_code == 2

    @staticmethod
    def test_deadlock_runs(wc1):
        report = check(wc1, DEADLOCK, _options(glue="e"))
        assert report.property == "deadlock"
        assert report.verdict != Outcome.ERROR

    @staticmethod
    def test_external_solver(wc1, tmp_path):
        pytest.importorskip("z3")
        target = tmp_path / "query.smt2"
        report = check(wc1, "safe", _options(glue="e", solver="smtlib", smt_out=target))
        assert report.verdict == Outcome.PROVED
        assert "(check-sat)" in target.read_text(encoding="utf-8")


class TestErrors:
    @staticmethod
    def test_history_property_needs_opt_in(bundled):
        model = bundled("pacemaker_simplified")
        report = check(model, "upper_rate")
        assert report.verdict == Outcome.ERROR
        assert report.exit_code == 3
        assert "--allow-history-props" in report.message
        allowed = check(model, "upper_rate", _options(allow_history_props=True))
        assert allowed.verdict != Outcome.ERROR

    @staticmethod
    def test_asymmetric_property_with_symmetry(wc2):
        report = check(wc2, "safe", _options(glue="estar,sep", symmetry=True))
        assert report.verdict == Outcome.ERROR
        assert "not invariant" in report.message

    @staticmethod
    def test_canonical_separation_needs_a_declaration(wc1):
        report = check(wc1, "safe", _options(glue="sepc"))
        assert report.verdict == Outcome.ERROR
        assert "symmetry" in report.message

    @staticmethod
    def test_unknown_property_is_reported(wc1):
        report, bundle = run(wc1, "nope")
        assert report.verdict == Outcome.ERROR
        assert bundle is None


class TestGlobalInvariant:
    @staticmethod
    def test_parts_and_sizes(wc1):
        bundle = build_global_invariant(wc1, _options(glue="e"))
        assert set(bundle.component_invariants) == {"c", "w1"}
        assert bundle.history_clocks == ["h(c.a)", "h(c.c)", "h(w1.b)", "h(w1.d)", "h0"]
        sizes = bundle.sizes()
        assert sizes["II"] == 2
        assert sizes["E"] == 2
        assert {"CI[c]", "CI[w1]", "GI atoms"} <= set(sizes)

    @staticmethod
    def test_interaction_clocks_bring_bstar(wc1):
        bundle = build_global_invariant(wc1, _options(glue="estar"))
        assert "bstar" in bundle.component_invariants
        assert bundle.deferred == []

    @staticmethod
    def test_separation_is_deferred(wc2):
        bundle = build_global_invariant(wc2, _options(glue="estar,sep"))
        assert bundle.separation == {"c.a": 4, "c.c": 4}
        assert len(bundle.deferred) == 1

    @staticmethod
    def test_no_traps(wc1):
        bundle = build_global_invariant(wc1, _options(glue="none", use_traps=False))
        assert bundle.interaction_invariant is None
        assert bundle.history is None
        assert "II" not in bundle.sizes()

    @staticmethod
    def test_regex_heuristic_replaces_untimed_invariants(bundled):
        model = bundled("fischer_2")
        bundle = build_global_invariant(model, _options(glue="e", heuristic="regex"))
        assert "id" in bundle.component_invariants
        assert "id" not in bundle.graphs
        assert "p1" in bundle.graphs

    @staticmethod
    def test_describe(wc1):
        text = describe_invariant(build_global_invariant(wc1, _options(glue="e")))
        assert "CI(c) =" in text
        assert "II =" in text
        assert "E =" in text

    @staticmethod
    def test_history_elimination_keeps_the_proof(wc1):
        bundle = build_global_invariant(wc1, _options(glue="e"))
        eliminated = eliminate_history(bundle)
        assert not any(is_history_clock_name(c) for c in formula_clocks(eliminated))
        assert is_valid_implication(eliminated, wc1.property_formula("safe"), wc1).is_unsat

    @staticmethod
    def test_readable_invariants(wc1):
        bundle = build_global_invariant(wc1, _options(glue="e"))
        readable = readable_invariants(bundle)
        expected = parse_formula("c@lc0 or c@lc1 and c.x <= 4 or c@lc2", wc1)
        assert equivalent(readable["c"], expected, wc1)


class TestReport:
    @staticmethod
    def test_dict_round_trip(wc1):
        report = check(wc1, "safe", _options(glue="e"))
        again = VerificationReport.from_dict(report.to_dict())
        assert again == report
        assert report.to_dict()["verdict"] == "PROVED"

    @staticmethod
    def test_summary(wc1):
        report = check(wc1, "safe", _options(glue="none"))
        text = report.summary()
        assert text.splitlines()[0] == "⚠️ safe: UNKNOWN"
        assert "may be spurious" in text
        assert report.total_time >= report.timings["check"]

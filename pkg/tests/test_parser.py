import pytest

from config import MODELS_DIR
from errors import ModelSemanticError, ModelSyntaxError
from model_core import At, ClockAtom, Implies, conflicting_actions, conflicts, format_formula, format_model
from model_parser import load_model, parse_formula, parse_model

WORKER = """
component Worker
  clock y
  location l1 initial
  location l2
  edge l1 -> l2 on b guard y >= 4
  edge l2 -> l1 on d reset y
end
"""


def _system(*lines):
    return WORKER + "\nsystem\n" + "\n".join(f"  {line}" for line in lines) + "\nend\n"


class TestParseModel:
    @staticmethod
    def test_worker_controller_structure(wc1):
        assert wc1.instance_names == ("c", "w1")
        assert [alpha.id for alpha in wc1.gamma] == ["ab1", "cd1"]
        assert wc1.interaction("ab1").participants == ("c.a", "w1.b")
        assert wc1.instance("c").clock_names == ("c.x",)
        assert wc1.instance("w1").actions == ("w1.b", "w1.d")
        assert wc1.stats() == {"n": 2, "q": 5, "c": 2, "i": 2}

    @staticmethod
    def test_controller_tau_edge_and_tpc(wc1):
        controller = wc1.instance("c")
        tau = [e for e in controller.edges if e.is_internal]
        assert len(tau) == 1 and tau[0].source == "lc0" and tau[0].target == "lc1"
        assert controller.tpc_of("lc1").atoms == (ClockAtom("c.x", None, "<=", 4),)
        assert controller.tpc_of("lc2").is_true

    @staticmethod
    def test_initial_flag_derives_zero_clocks(wc1):
        assert wc1.instance("w1").initial_location == "l1"
        assert wc1.instance("w1").initial_constraint.atoms == (ClockAtom("w1.y", None, "=", 0),)

    @staticmethod
    def test_init_declaration(tc1):
        rod = tc1.instance("r1")
        assert rod.initial_location == "ready"
        assert rod.initial_constraint.atoms == (ClockAtom("r1.y", None, ">=", 450),)

    @staticmethod
    def test_property_parsed(wc1):
        safe = wc1.property_formula("safe")
        assert isinstance(safe, Implies)
        assert safe.rhs == ClockAtom("c.x", "w1.y", "<=", 0)

    @staticmethod
    def test_empty_interaction_set():
        model = parse_model(_system("instance w1 Worker"))
        assert model.gamma == ()
        assert conflicts(model.gamma) == {}

    @staticmethod
    def test_conflicting_actions(wc2):
        shared = conflicting_actions(wc2.gamma)
        assert sorted(shared) == ["c.a", "c.c"]
        assert {alpha.id for alpha in shared["c.a"]} == {"ab1", "ab2"}

    @staticmethod
    def test_symmetry_declaration(wc2):
        sym = wc2.symmetry[0]
        assert sym.controller == "c"
        assert sym.members == ("w1", "w2")
        assert sym.designated == "c.a"

    @staticmethod
    @pytest.mark.parametrize("path", sorted(MODELS_DIR.glob("*.tinv")), ids=lambda p: p.stem)
    def test_bundled_models_reparse_after_formatting(path):
        model = load_model(path)
        again = parse_model(format_model(model), source=model.source)
        assert again == model


class TestSyntaxErrors:
    @staticmethod
    def test_unexpected_character_reports_position():
        text = "component W\n  clock x $\nend\n"
        with pytest.raises(ModelSyntaxError) as info:
            parse_model(text)
        assert info.value.line == 2
        assert info.value.column == 11
        assert str(info.value).startswith("2:11:")

    @staticmethod
    def test_rational_constant_rejected():
        text = WORKER.replace("y >= 4", "y >= 4.5") + "\nsystem\n  instance w1 Worker\nend\n"
        with pytest.raises(ModelSyntaxError, match="integer constants only"):
            parse_model(text)

    @staticmethod
    def test_missing_end():
        with pytest.raises(ModelSyntaxError, match="missing 'end'"):
            parse_model("component W\n  location l0 initial\n")

    @staticmethod
    def test_bad_edge_arrow():
        text = WORKER.replace("l1 -> l2", "l1 l2")
        with pytest.raises(ModelSyntaxError):
            parse_model(text + "\nsystem\n  instance w1 Worker\nend\n")


class TestSemanticErrors:
    @staticmethod
    def test_unknown_clock_in_guard():
        text = WORKER.replace("y >= 4", "z >= 4")
        with pytest.raises(ModelSemanticError, match="unknown clock 'z'"):
            parse_model(text + "\nsystem\n  instance w1 Worker\nend\n")

    @staticmethod
    def test_duplicate_location():
        text = WORKER.replace("location l2", "location l1")
        with pytest.raises(ModelSemanticError, match="duplicate location"):
            parse_model(text + "\nsystem\n  instance w1 Worker\nend\n")

    @staticmethod
    def test_tpc_must_be_upper_bounds():
        text = WORKER.replace("location l2", "location l2 tpc y >= 2")
        with pytest.raises(ModelSemanticError, match="must be a conjunction of upper bounds"):
            parse_model(text + "\nsystem\n  instance w1 Worker\nend\n")

    @staticmethod
    def test_two_actions_of_one_instance():
        with pytest.raises(ModelSemanticError, match="uses two actions of one instance"):
            parse_model(_system("instance w1 Worker", "interaction bad = w1.b | w1.d"))

    @staticmethod
    def test_duplicate_interaction():
        with pytest.raises(ModelSemanticError, match="duplicate interaction"):
            parse_model(_system("instance w1 Worker", "interaction i = w1.b", "interaction i = w1.d"))

    @staticmethod
    def test_unknown_instance_in_property():
        with pytest.raises(ModelSemanticError, match="unknown instance"):
            parse_model(_system("instance w1 Worker", "property p: w9@l1"))

    @staticmethod
    def test_missing_system_block():
        with pytest.raises(ModelSemanticError, match="no system block"):
            parse_model(WORKER)


class TestParseFormula:
    @staticmethod
    def test_history_clock_references(wc1):
        f = parse_formula("h(w1.b) - w1.y <= -4 and h0 - h[ab1] >= 0", wc1)
        assert f.args == (ClockAtom("h(w1.b)", "w1.y", "<=", -4), ClockAtom("h0", "h[ab1]", ">=", 0))

    @staticmethod
    def test_precedence(wc1):
        f = parse_formula("c@lc0 or c@lc1 and w1@l2 implies w1.y >= 4", wc1)
        assert isinstance(f, Implies)
        assert format_formula(f) == "c@lc0 or c@lc1 and w1@l2 implies w1.y >= 4"

    @staticmethod
    def test_negation_and_parentheses(wc1):
        f = parse_formula("not (c@lc0 and w1@l1)", wc1)
        assert format_formula(f) == "not (c@lc0 and w1@l1)"
        assert f.arg.args == (At("c", "lc0"), At("w1", "l1"))

    @staticmethod
    def test_unknown_action_clock(wc1):
        with pytest.raises(ModelSemanticError, match="unknown action"):
            parse_formula("h(w1.zz) >= 0", wc1)

    @staticmethod
    def test_trailing_tokens(wc1):
        with pytest.raises(ModelSyntaxError):
            parse_formula("c@lc0 c@lc1", wc1)

    @staticmethod
    def test_clock_comparison_needs_difference_form(wc1):
        with pytest.raises(ModelSyntaxError, match="expected integer constant"):
            parse_formula("c@lc1 implies c.x <= w1.y", wc1)
        f = parse_formula("c@lc1 implies c.x - w1.y <= 0", wc1)
        assert f.rhs == ClockAtom("c.x", "w1.y", "<=", 0)

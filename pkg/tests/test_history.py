import pytest

from errors import HistoryExtensionError, HistoryPropertyError
from formula_engine import equivalent, is_valid_implication
from history_extension import (
    BSTAR, BSTAR_LOCATION, HistoryMap, build_bstar, extend_system, extend_with_action_clocks,
    extend_with_interaction_clocks, project_history,
)
from model_core import ClockAtom
from model_parser import parse_formula
from zone_graph import component_invariant, reach

# Invariants of the history-extended worker/controller components, one disjunct per line.
CONTROLLER_EXACT = [
    "c@lc0 and c.x - h0 = 0 and h(c.a) - h0 > 0 and h(c.c) - h0 > 0",
    "c@lc1 and c.x <= 4 and h0 - c.x >= 4 and h(c.a) - h0 > 0 and h(c.c) - h0 > 0",
    "c@lc1 and c.x <= 4 and c.x - h(c.c) = 0 and h(c.a) - h(c.c) >= 4 and h0 - h(c.a) >= 8",
    "c@lc2 and c.x - h(c.a) = 0 and h0 - h(c.a) >= 8 and h(c.c) - h0 > 0",
    "c@lc2 and c.x - h(c.a) = 0 and h(c.c) - h(c.a) = 4 and h0 - h(c.c) > 8",
]

# The same invariant as usually written down by hand; slightly weaker.
CONTROLLER_BY_HAND = [
    "c@lc0 and c.x - h0 = 0 and h0 - h(c.a) < 0 and h0 - h(c.c) < 0",
    "c@lc1 and c.x - h0 <= -4 and c.x <= 4 and h0 - h(c.a) < 0 and h0 - h(c.c) < 0",
    "c@lc1 and c.x <= 4 and c.x - h(c.c) = 0 and h(c.c) - h(c.a) <= 0 and h(c.a) - h0 <= -8",
    "c@lc2 and c.x - h0 <= -8 and h(c.a) - c.x = 0 and h0 - h(c.c) < 0",
    "c@lc2 and c.x - h(c.a) = 0 and h(c.c) - h(c.a) = 4 and h(c.c) - h0 <= -8",
]

WORKER_EXACT = [
    "w1@l1 and w1.y - h0 = 0 and h(w1.d) - h0 > 0 and h(w1.b) - h0 > 0",
    "w1@l1 and w1.y - h(w1.d) = 0 and h(w1.d) - h(w1.b) <= 0 and h0 - h(w1.b) >= 4",
    "w1@l2 and w1.y - h0 = 0 and w1.y - h(w1.b) >= 4 and h(w1.d) - h0 > 0",
    "w1@l2 and w1.y - h(w1.d) = 0 and h0 - h(w1.d) >= 4 and h(w1.d) - h(w1.b) >= 4",
]


def _disjunction(lines, model):
    return parse_formula(" or ".join(f"({line})" for line in lines), model)


def _extended_ci(model, name):
    hm = HistoryMap.for_model(model)
    return component_invariant(reach(extend_with_action_clocks(model.instance(name), hm)))


class TestHistoryMap:
    @staticmethod
    def test_names_for_model(wc1):
        hm = HistoryMap.for_model(wc1)
        assert hm.h0 == "h0"
        assert hm.action_clock("c.a") == "h(c.a)"
        assert hm.interaction_clock("ab1") == "h[ab1]"
        assert len(hm.clocks()) == 1 + 4 + 2

    @staticmethod
    def test_duplicate_names_rejected():
        with pytest.raises(HistoryExtensionError, match="pairwise distinct"):
            HistoryMap(actions={"c.a": "h", "c.c": "h"})

    @staticmethod
    def test_unknown_action(wc1):
        with pytest.raises(HistoryExtensionError, match="No history clock"):
            HistoryMap.for_model(wc1).action_clock("c.zz")


class TestActionClocks:
    @staticmethod
    def test_every_labelled_edge_resets_its_clock(wc1):
        hm = HistoryMap.for_model(wc1)
        extended = extend_with_action_clocks(wc1.instance("c"), hm)
        assert extended.history_clocks == ("h0", "h(c.a)", "h(c.c)")
        for edge in extended.edges:
            if edge.is_internal:
                assert edge.resets == frozenset({"c.x"})
            else:
                assert hm.action_clock(edge.action) in edge.resets
                assert "h0" not in edge.resets

    @staticmethod
    def test_initial_constraint(wc1):
        extended = extend_with_action_clocks(wc1.instance("w1"), HistoryMap.for_model(wc1))
        atoms = extended.initial_constraint.atoms
        assert ClockAtom("h0", None, "=", 0) in atoms
        assert ClockAtom("h(w1.b)", None, ">", 0) in atoms
        assert ClockAtom("h(w1.d)", None, ">", 0) in atoms

    @staticmethod
    def test_extending_twice_is_rejected(wc1):
        hm = HistoryMap.for_model(wc1)
        once = extend_with_action_clocks(wc1.instance("c"), hm)
        with pytest.raises(HistoryExtensionError, match="already has history clocks"):
            extend_with_action_clocks(once, hm)

    @staticmethod
    def test_extension_keeps_the_untimed_behaviour(wc1):
        hm = HistoryMap.for_model(wc1)
        plain = reach(wc1.instance("w1"))
        extended = reach(extend_with_action_clocks(wc1.instance("w1"), hm))
        assert set(extended.locations) == set(plain.locations)


class TestExtendedInvariants:
    @staticmethod
    def test_controller_invariant_exact(wc1):
        ci = _extended_ci(wc1, "c")
        assert equivalent(ci, _disjunction(CONTROLLER_EXACT, wc1), wc1)

    @staticmethod
    def test_controller_invariant_implies_hand_written_one(wc1):
        ci = _extended_ci(wc1, "c")
        assert is_valid_implication(ci, _disjunction(CONTROLLER_BY_HAND, wc1), wc1).is_unsat

    @staticmethod
    def test_worker_invariant_exact(wc1):
        ci = _extended_ci(wc1, "w1")
        assert equivalent(ci, _disjunction(WORKER_EXACT, wc1), wc1)

    @staticmethod
    def test_history_clocks_drop_out_to_the_plain_invariant(wc1):
        ci = _extended_ci(wc1, "w1")
        plain = component_invariant(reach(wc1.instance("w1")))
        assert is_valid_implication(ci, plain, wc1).is_unsat


class TestInteractionClocks:
    @staticmethod
    def test_bstar_component(wc1):
        hm = HistoryMap.for_model(wc1)
        bstar = build_bstar(wc1.gamma, hm)
        assert bstar.name == BSTAR
        assert bstar.locations == (BSTAR_LOCATION,)
        assert bstar.actions == ("bstar.ab1", "bstar.cd1")
        assert [e.resets for e in bstar.edges] == [frozenset({"h[ab1]"}), frozenset({"h[cd1]"})]

    @staticmethod
    def test_interactions_gain_the_bstar_action(wc1):
        extended, hm = extend_system(wc1, interactions=True)
        assert extended.instance_names == ("c", "w1", BSTAR)
        assert extended.interaction("ab1").participants == ("bstar.ab1", "c.a", "w1.b")
        assert set(hm.clocks()) <= {c.name for c in extended.all_clocks()}

    @staticmethod
    def test_bstar_name_is_reserved(wc1):
        extended, hm = extend_system(wc1, interactions=True)
        with pytest.raises(HistoryExtensionError, match="reserved"):
            extend_with_interaction_clocks(extended, hm)

    @staticmethod
    def test_without_interaction_clocks(wc1):
        extended, _ = extend_system(wc1)
        assert extended.instance_names == ("c", "w1")
        assert extended.gamma == wc1.gamma


class TestProjectHistory:
    @staticmethod
    def test_plain_property_passes(wc1):
        safe = wc1.property_formula("safe")
        assert project_history(safe) is safe

    @staticmethod
    def test_history_property_needs_opt_in(wc1):
        prop = parse_formula("c@lc2 implies h(c.a) <= 4", wc1)
        with pytest.raises(HistoryPropertyError, match="--allow-history-props"):
            project_history(prop)
        assert project_history(prop, allow_history_props=True) is prop

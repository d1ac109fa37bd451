import pytest

from errors import TrapLimitExceeded
from model_core import And, At, Not, Or
from oracle import oracle_holds_invariant
from traps import (
    covers_instance, exclusion_clauses, format_semiflows, format_traps, incidence_matrix, induce_net,
    interaction_invariant, is_trap, minimal_marked_traps, place_invariant, place_semiflows,
)

WC1_TRAPS = [
    {("c", "lc0"), ("c", "lc1"), ("c", "lc2")},
    {("c", "lc0"), ("c", "lc1"), ("w1", "l2")},
    {("c", "lc2"), ("w1", "l1")},
    {("w1", "l1"), ("w1", "l2")},
]


class TestInducedNet:
    @staticmethod
    def test_transitions(wc1):
        net = induce_net(wc1)
        assert len(net.places) == 5
        assert net.initial == frozenset({("c", "lc0"), ("w1", "l1")})
        labels = sorted(t.label for t in net.transitions)
        assert labels == ["ab1", "c.tau", "cd1"]

    @staticmethod
    def test_one_transition_per_edge_combination(wc2):
        net = induce_net(wc2)
        assert len(net.transitions) == 5

    @staticmethod
    def test_is_trap(wc1):
        net = induce_net(wc1)
        assert is_trap(net, {("c", "lc2"), ("w1", "l1")})
        assert not is_trap(net, {("c", "lc2")})


class TestMinimalTraps:
    @staticmethod
    def test_worker_controller(wc1):
        traps = minimal_marked_traps(induce_net(wc1))
        assert [set(t) for t in traps] == WC1_TRAPS

    @staticmethod
    def test_traps_are_minimal_and_marked(wc2):
        net = induce_net(wc2)
        traps = minimal_marked_traps(net)
        assert traps
        for trap in traps:
            assert is_trap(net, trap)
            assert trap & net.initial
            assert not any(is_trap(net, trap - {p}) and (trap - {p}) & net.initial for p in trap)

    @staticmethod
    def test_limit(wc1):
        with pytest.raises(TrapLimitExceeded):
            minimal_marked_traps(induce_net(wc1), limit=1)


class TestInteractionInvariant:
    @staticmethod
    def test_trivial_clauses_dropped(wc1):
        traps = minimal_marked_traps(induce_net(wc1))
        assert covers_instance(wc1, traps[0])
        ii = interaction_invariant(traps, wc1)
        assert ii.args == (
            Or((At("c", "lc0"), At("c", "lc1"), At("w1", "l2"))),
            Or((At("c", "lc2"), At("w1", "l1"))),
        )

    @staticmethod
    def test_without_model_every_trap_is_kept(wc1):
        traps = minimal_marked_traps(induce_net(wc1))
        assert len(interaction_invariant(traps).args) == 4

    @staticmethod
    def test_format(wc1):
        text = format_traps(minimal_marked_traps(induce_net(wc1)))
        assert text.splitlines()[2] == "{c@lc2, w1@l1}"


def _flow_set(flows):
    return {(frozenset(weights.items()), count) for weights, count in flows}


class TestPlaceSemiflows:
    @staticmethod
    def test_incidence_matrix(wc1):
        net = induce_net(wc1)
        matrix = incidence_matrix(net)
        assert matrix.shape == (5, 3)
        assert (matrix.sum(axis=0) == 0).all()
        column = [t.label for t in net.transitions].index("c.tau")
        assert list(matrix[:, column]) == [-1, 1, 0, 0, 0]

    @staticmethod
    def test_worker_controller(wc1):
        flows = place_semiflows(induce_net(wc1))
        assert _flow_set(flows) == {
            (frozenset({(("c", "lc0"), 1), (("c", "lc1"), 1), (("c", "lc2"), 1)}), 1),
            (frozenset({(("w1", "l1"), 1), (("w1", "l2"), 1)}), 1),
            (frozenset({(("c", "lc2"), 1), (("w1", "l1"), 1)}), 1),
            (frozenset({(("c", "lc0"), 1), (("c", "lc1"), 1), (("w1", "l2"), 1)}), 1),
        }

    @staticmethod
    def test_every_flow_is_conserved(wc2):
        net = induce_net(wc2)
        matrix = incidence_matrix(net)
        for weights, count in place_semiflows(net):
            vector = [weights.get(p, 0) for p in net.places]
            assert not (matrix.T @ vector).any()
            assert count == sum(weights.get(p, 0) for p in net.initial)

    @staticmethod
    def test_limit_gives_up_quietly(wc2):
        assert place_semiflows(induce_net(wc2), limit=1) == []

    @staticmethod
    def test_format(wc1):
        lines = format_semiflows(place_semiflows(induce_net(wc1))).splitlines()
        assert "c@lc2 + w1@l1 = 1" in lines


class TestPlaceInvariant:
    @staticmethod
    def test_exclusions_for_one_worker(wc1):
        clauses = exclusion_clauses(wc1, place_semiflows(induce_net(wc1)))
        assert clauses == [
            frozenset({("c", "lc0"), ("w1", "l2")}),
            frozenset({("c", "lc1"), ("w1", "l2")}),
            frozenset({("c", "lc2"), ("w1", "l1")}),
        ]

    @staticmethod
    def test_busy_worker_excludes_the_others(wc2):
        clauses = exclusion_clauses(wc2, place_semiflows(induce_net(wc2)))
        assert set(clauses) == {
            frozenset({("c", "lc0"), ("w1", "l2")}),
            frozenset({("c", "lc0"), ("w2", "l2")}),
            frozenset({("c", "lc1"), ("w1", "l2")}),
            frozenset({("c", "lc1"), ("w2", "l2")}),
            frozenset({("w1", "l2"), ("w2", "l2")}),
        }

    @staticmethod
    def test_formula(wc1):
        pi = place_invariant(wc1, place_semiflows(induce_net(wc1)))
        assert pi.args[0] == Not(And((At("c", "lc0"), At("w1", "l2"))))

    @staticmethod
    @pytest.mark.parametrize("name", ["worker_controller_1", "worker_controller_2", "temp_controller_2"])
    def test_holds_on_reachable_states(bundled, name):
        model = bundled(name)
        assert oracle_holds_invariant(model, place_invariant(model, place_semiflows(induce_net(model))))

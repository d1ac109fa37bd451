"""History clocks for actions and interactions."""

import logging
from dataclasses import dataclass, field, replace

from errors import HistoryExtensionError, HistoryPropertyError
from model_core import (
    H0, TRUE_CONSTRAINT, Clock, ClockAtom, ClockConstraint, ClockKind, Component, Edge, Interaction,
    action_clock_name, formula_clocks, interaction_clock_name, is_history_clock_name,
)

logger = logging.getLogger(__name__)

BSTAR = "bstar"
BSTAR_LOCATION = "lstar"


@dataclass(frozen=True)
class HistoryMap:
    """Names of the history clocks attached to actions and interactions."""

    h0: str = H0
    actions: dict = field(default_factory=dict)
    interactions: dict = field(default_factory=dict)

    def __post_init__(self):
        names = [self.h0, *self.actions.values(), *self.interactions.values()]
        if len(names) != len(set(names)):
            raise HistoryExtensionError("History clock names must be pairwise distinct")

    @classmethod
    def for_model(cls, model):
        return cls(
            actions={a: action_clock_name(a) for a in model.all_actions()},
            interactions={alpha.id: interaction_clock_name(alpha.id) for alpha in model.gamma},
        )

    def action_clock(self, action):
        try:
            return self.actions[action]
        except KeyError:
            raise HistoryExtensionError(f"No history clock for action {action}") from None

    def interaction_clock(self, interaction_id):
        try:
            return self.interactions[interaction_id]
        except KeyError:
            raise HistoryExtensionError(f"No history clock for interaction {interaction_id}") from None

    def clocks(self):
        return (self.h0, *self.actions.values(), *self.interactions.values())


def extend_with_action_clocks(component, hm):
    """Add h0 and one h_a per action; every a-edge also resets h_a."""
    if component.history_clocks:
        raise HistoryExtensionError(f"Component {component.name} already has history clocks")
    added = [Clock(hm.h0, ClockKind.SHARED_H0)]
    added += [Clock(hm.action_clock(a), ClockKind.ACTION_HISTORY) for a in component.actions]
    clashes = [c.name for c in added if component.has_clock(c.name)]
    if clashes:
        raise HistoryExtensionError(f"Clock name collision in {component.name}: {', '.join(clashes)}")

    edges = tuple(
        e if e.action is None else replace(e, resets=e.resets | {hm.action_clock(e.action)})
        for e in component.edges
    )
    init_atoms = component.initial_constraint.atoms + (ClockAtom(hm.h0, None, "=", 0),)
    init_atoms += tuple(ClockAtom(hm.action_clock(a), None, ">", 0) for a in component.actions)
    return replace(
        component,
        clocks=component.clocks + tuple(added),
        edges=edges,
        initial=(component.initial_location, ClockConstraint(init_atoms)),
    )


def build_bstar(gamma, hm):
    """Auxiliary single-location component with one self-loop per interaction."""
    actions = tuple(f"{BSTAR}.{alpha.id}" for alpha in gamma)
    edges = tuple(
        Edge(BSTAR_LOCATION, action, TRUE_CONSTRAINT, frozenset({hm.interaction_clock(alpha.id)}), BSTAR_LOCATION)
        for alpha, action in zip(gamma, actions)
    )
    return Component(
        name=BSTAR,
        locations=(BSTAR_LOCATION,),
        actions=actions,
        clocks=tuple(Clock(hm.interaction_clock(alpha.id), ClockKind.INTERACTION_HISTORY) for alpha in gamma),
        edges=edges,
        tpc={},
        initial=(BSTAR_LOCATION, TRUE_CONSTRAINT),
    )


def extend_with_interaction_clocks(model, hm):
    """Add B* and replace every interaction alpha by (a_alpha | alpha)."""
    if BSTAR in model.instance_names:
        raise HistoryExtensionError(f"Instance name {BSTAR!r} is reserved for the interaction clock component")
    bstar = build_bstar(model.gamma, hm)
    gamma = tuple(
        Interaction(alpha.id, tuple(sorted(alpha.participants + (f"{BSTAR}.{alpha.id}",))))
        for alpha in model.gamma
    )
    return model.with_instances(model.instances + (bstar,), gamma)


def extend_system(model, hm=None, interactions=False):
    """Extend every instance with action clocks and optionally add B*."""
    hm = hm or HistoryMap.for_model(model)
    extended = model.with_instances([extend_with_action_clocks(inst, hm) for inst in model.instances])
    if interactions:
        extended = extend_with_interaction_clocks(extended, hm)
    logger.debug(f"🔍 Extended {len(model.instances)} components with {len(hm.clocks())} history clocks")
    return extended, hm


def project_history(formula, allow_history_props=False):
    """Admit a property for checking against an invariant over history clocks.

    The checker never eliminates history clocks: when the property mentions
    none of them, Inv ∧ ¬prop is satisfiable iff (∃H. Inv) ∧ ¬prop is. A
    property over history clocks is only accepted on explicit opt-in.
    """
    used = sorted(c for c in formula_clocks(formula) if is_history_clock_name(c))
    if used and not allow_history_props:
        raise HistoryPropertyError(
            f"Property mentions history clocks ({', '.join(used)}); pass --allow-history-props"
        )
    return formula

"""Symbolic reachability over zones for a single timed component."""

import logging
import time
from collections import deque
from dataclasses import dataclass, field

import networkx as nx
import pandas as pd

from config import DIFFCAP_FACTOR, STATE_LIMIT
from dbm import DBM
from errors import ReachLimitExceeded
from model_core import TAU, At, conj, disj

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SymbolicState:
    location: str
    zone: DBM

    def as_formula(self, instance):
        return conj(At(instance, self.location), self.zone.to_constraint().as_formula())


@dataclass
class ZoneGraph:
    """Reachable symbolic states of one component with their successor edges."""

    component: object
    states: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    initial: int = 0

    def states_at(self, location):
        return [s for s in self.states if s.location == location]

    @property
    def locations(self):
        seen = []
        for s in self.states:
            if s.location not in seen:
                seen.append(s.location)
        return seen

    def to_frame(self):
        """One row per state: index, location, bound list and out-degree."""
        degree = {}
        for src, _, _ in self.edges:
            degree[src] = degree.get(src, 0) + 1
        rows = [
            {
                "state": k,
                "location": s.location,
                "zone": ", ".join(s.zone.dump()) or "true",
                "out_degree": degree.get(k, 0),
            }
            for k, s in enumerate(self.states)
        ]
        return pd.DataFrame(rows, columns=["state", "location", "zone", "out_degree"])

    def to_networkx(self):
        graph = nx.MultiDiGraph(name=self.component.name)
        for k, s in enumerate(self.states):
            graph.add_node(k, location=s.location, zone=", ".join(s.zone.dump()) or "true")
        for src, edge, dst in self.edges:
            graph.add_edge(src, dst, action=edge.action or TAU)
        return graph

    def dump(self):
        """Stable text listing used by `tinv reach --dump-zonegraph`."""
        lines = [f"zonegraph {self.component.name}: {len(self.states)} states, {len(self.edges)} edges"]
        for k, s in enumerate(self.states):
            lines.append(f"  S{k} @ {s.location}")
            for bound in s.zone.dump():
                lines.append(f"      {bound}")
        for src, edge, dst in self.edges:
            lines.append(f"  S{src} -{edge.action or TAU}-> S{dst}")
        return "\n".join(lines)


def extrapolation_bounds(component, diffcap_factor=DIFFCAP_FACTOR):
    """Per-clock caps and the clock-difference cap used by norm()."""
    maxc = component.max_constants()
    return maxc, diffcap_factor * max(maxc.values(), default=0)


def _tpc_zone(component, location, clocks):
    return DBM.from_constraint(component.tpc_of(location), clocks)


def time_succ(component, state):
    """(l, up(zone) ∩ tpc(l))."""
    zone = state.zone.up().intersect(_tpc_zone(component, state.location, state.zone.clocks))
    return SymbolicState(state.location, zone)


def disc_succ(component, edge, state):
    """(l', (zone ∩ guard)[resets] ∩ tpc(l')), or None when the edge cannot fire."""
    if edge.source != state.location:
        return None
    zone = state.zone.constrain_atoms(edge.guard.atoms)
    if zone.is_empty():
        return None
    zone = zone.reset(sorted(edge.resets))
    zone = zone.intersect(_tpc_zone(component, edge.target, zone.clocks))
    if zone.is_empty():
        return None
    return SymbolicState(edge.target, zone)


def succ(component, edge, state, maxc=None, diffcap=None):
    """norm(time_succ(disc_succ(edge, state)))."""
    if maxc is None:
        maxc, diffcap = extrapolation_bounds(component)
    target = disc_succ(component, edge, state)
    if target is None:
        return None
    target = time_succ(component, target)
    return SymbolicState(target.location, target.zone.extrapolate(maxc, diffcap))


def initial_state(component, maxc=None, diffcap=None):
    if maxc is None:
        maxc, diffcap = extrapolation_bounds(component)
    clocks = component.clock_names
    location = component.initial_location
    zone = DBM.from_constraint(component.initial_constraint, clocks)
    zone = zone.intersect(_tpc_zone(component, location, clocks))
    if zone.is_empty():
        return None
    state = time_succ(component, SymbolicState(location, zone))
    return SymbolicState(location, state.zone.extrapolate(maxc, diffcap))


def reach(component, state_limit=STATE_LIMIT, diffcap_factor=DIFFCAP_FACTOR, subsumption=True, maxc=None,
          starts=None):
    """FIFO exploration with per-location inclusion subsumption.

    ``starts`` replaces the initial symbolic state, e.g. by the cubes of an
    assumed initial constraint.
    """
    started = time.perf_counter()
    bounds, diffcap = extrapolation_bounds(component, diffcap_factor)
    if maxc is not None:
        bounds = {**bounds, **maxc}
    graph = ZoneGraph(component)
    if starts is None:
        start = initial_state(component, bounds, diffcap)
        starts = [] if start is None else [start]
    else:
        starts = [SymbolicState(s.location, time_succ(component, s).zone.extrapolate(bounds, diffcap))
                  for s in starts]
        starts = [s for s in starts if not s.zone.is_empty()]
    if not starts:
        logger.warning(f"⚠️ Component {component.name} has an empty initial configuration")
        return graph

    by_location = {}
    queue = deque()
    for start in starts:
        graph.states.append(start)
        by_location.setdefault(start.location, []).append(len(graph.states) - 1)
        queue.append(len(graph.states) - 1)
    while queue:
        current = queue.popleft()
        state = graph.states[current]
        for edge in component.edges_from(state.location):
            target = succ(component, edge, state, bounds, diffcap)
            if target is None or target.zone.is_empty():
                continue
            known = by_location.setdefault(target.location, [])
            covering = None
            for k in known:
                other = graph.states[k].zone
                if (subsumption and other.includes(target.zone)) or other == target.zone:
                    covering = k
                    break
            if covering is not None:
                graph.edges.append((current, edge, covering))
                continue
            if len(graph.states) >= state_limit:
                raise ReachLimitExceeded(
                    f"Zone graph of {component.name} exceeded {state_limit} states"
                )
            graph.states.append(target)
            index = len(graph.states) - 1
            known.append(index)
            graph.edges.append((current, edge, index))
            queue.append(index)
            logger.debug(f"🔍 {component.name}: S{index} @ {target.location}")

    elapsed = time.perf_counter() - started
    logger.info(
        f"📊 Zone graph {component.name}: {len(graph.states)} states, "
        f"{len(graph.edges)} edges in {elapsed:.3f}s"
    )
    return graph


def component_invariant(graph, drop_clocks=()):
    """CI as one (at(l) ∧ zone) disjunct per reachable state.

    With ``drop_clocks`` every zone is projected before conversion, which
    gives the readable invariant over the remaining clocks.
    """
    instance = graph.component.name
    disjuncts = []
    for state in graph.states:
        zone = state.zone
        if drop_clocks:
            zone = zone.project([c for c in zone.clocks if c not in set(drop_clocks)])
        term = conj(At(instance, state.location), zone.to_constraint().as_formula())
        if term not in disjuncts:
            disjuncts.append(term)
    return disj(*disjuncts)

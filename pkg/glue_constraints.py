"""Glue invariants over history clocks: E, E*, S, S*, the symmetry-reduced
separation constraints and the Prec refinement for conflicting interactions.
"""

import itertools
import logging
from dataclasses import dataclass, replace
from enum import Enum

import networkx as nx

from config import DIFFCAP_FACTOR, GLUE_SIZE_LIMIT, STATE_LIMIT
from dbm import decode
from errors import GlueSizeExceeded, SymmetryError
from formula_engine import equivalent
from history_extension import HistoryMap
from model_core import (
    TRUE, And, Clock, ClockAtom, ClockConstraint, ClockKind, Edge, Implies, Not, Or,
    conflicting_actions, conflicts, conj, disj, formula_clocks, formula_size, is_history_clock_name,
    rename_formula,
)
from zone_graph import reach

logger = logging.getLogger(__name__)

OBSERVER_CLOCK = "~obs"


class Provenance(str, Enum):
    E = "E"
    E_STAR = "E*"
    S = "S"
    S_STAR = "S*"
    S_CANONICAL = "Sc"
    PREC = "prec"


@dataclass(frozen=True)
class GlueFormula:
    formula: object
    provenance: Provenance

    def __post_init__(self):
        stray = sorted(c for c in formula_clocks(self.formula) if not is_history_clock_name(c))
        if stray:
            raise ValueError(f"Glue formula mentions ordinary clocks: {', '.join(stray)}")

    @property
    def size(self):
        return formula_size(self.formula)


def _eq(u, v):
    return ClockAtom(u, v, "=", 0)


def _le(u, v):
    return ClockAtom(u, v, "<=", 0)


def _check_size(formula, size_limit, what):
    size = formula_size(formula)
    if size > size_limit:
        raise GlueSizeExceeded(
            f"{what} has {size} atoms (limit {size_limit}); try --glue estar,sep or --heuristic regex"
        )
    return formula


# ---------------------------------------------------------------------------
# E(γ)
# ---------------------------------------------------------------------------

def _canonical(gamma):
    return tuple(sorted(tuple(sorted(s)) for s in gamma))


def _as_sets(gamma):
    return _canonical(frozenset(alpha.participants) if hasattr(alpha, "participants") else frozenset(alpha)
                      for alpha in gamma)


def gamma_minus(gamma, alpha):
    """γ⊖α: every β not contained in α, with the actions of α removed."""
    removed = frozenset(alpha.participants if hasattr(alpha, "participants") else alpha)
    result = set()
    for beta in _as_sets(gamma):
        rest = frozenset(beta) - removed
        if frozenset(beta) <= removed:
            continue
        result.add(rest)
    return _canonical(result)


def action_groups(gamma):
    """Split interactions into groups connected by shared actions."""
    gamma = _as_sets(gamma)
    graph = nx.Graph()
    for k, beta in enumerate(gamma):
        graph.add_node(("i", k))
        for action in beta:
            graph.add_edge(("i", k), ("a", action))
    groups = []
    for component in nx.connected_components(graph):
        members = sorted(k for kind, k in component if kind == "i")
        if members:
            groups.append(tuple(gamma[k] for k in members))
    return sorted(groups)


def _equalities(actions, hm):
    actions = sorted(actions)
    return [_eq(hm.action_clock(a), hm.action_clock(b)) for a, b in zip(actions, actions[1:])]


class _EBuilder:
    def __init__(self, hm, simplify, size_limit):
        self.hm = hm
        self.simplify = simplify
        self.size_limit = size_limit
        self.memo = {}

    def build(self, gamma):
        key = _canonical(gamma)
        if key in self.memo:
            return self.memo[key]
        if not key:
            result = TRUE
        elif self.simplify and len(groups := action_groups(key)) > 1:
            result = conj(*(self.build(g) for g in groups))
        elif self.simplify and len(key) == 1:
            result = conj(*_equalities(key[0], self.hm))
        else:
            result = self._expand(key)
        self.memo[key] = _check_size(result, self.size_limit, "E(γ)")
        return result

    def _expand(self, key):
        disjuncts = []
        for alpha in key:
            rest = gamma_minus(key, alpha)
            later = sorted({a for beta in rest for a in beta})
            head = self.hm.action_clock(alpha[0])
            order = [_le(head, self.hm.action_clock(b)) for b in later]
            disjuncts.append(conj(*_equalities(alpha, self.hm), *order, self.build(rest)))
        return disj(*disjuncts)


def build_E(gamma, hm, simplify=True, size_limit=GLUE_SIZE_LIMIT):
    """Interaction inequalities over action history clocks."""
    builder = _EBuilder(hm, simplify, size_limit)
    formula = builder.build(_as_sets(gamma))
    logger.info(f"📊 E(γ): {formula_size(formula)} atoms, {len(builder.memo)} memoised subsets")
    return GlueFormula(formula, Provenance.E)


# ---------------------------------------------------------------------------
# E*(γ) and separation
# ---------------------------------------------------------------------------

def build_E_star(gamma, hm, size_limit=GLUE_SIZE_LIMIT):
    """h_a = min of the interaction clocks of the interactions containing a."""
    terms = []
    for action, alphas in sorted(conflicts(gamma).items()):
        h_a = hm.action_clock(action)
        clocks = [hm.interaction_clock(alpha.id) for alpha in alphas]
        if len(clocks) == 1:
            terms.append(_eq(h_a, clocks[0]))
            continue
        terms.extend(_le(h_a, h) for h in clocks)
        terms.append(disj(*(_eq(h_a, h) for h in clocks)))
    formula = _check_size(conj(*terms), size_limit, "E*(γ)")
    return GlueFormula(formula, Provenance.E_STAR)


def _apart(u, v, k):
    return disj(ClockAtom(u, v, ">=", k), ClockAtom(v, u, ">=", k))


def build_S(gamma, k, hm, size_limit=GLUE_SIZE_LIMIT):
    """|h_α - h_β| >= k_a for every pair of interactions conflicting on a."""
    terms = []
    for action, alphas in sorted(conflicting_actions(gamma).items()):
        bound = k.get(action) or 0
        if bound <= 0:
            continue
        for alpha, beta in itertools.combinations(alphas, 2):
            terms.append(_apart(hm.interaction_clock(alpha.id), hm.interaction_clock(beta.id), bound))
    formula = _check_size(conj(*terms), size_limit, "S(γ)")
    return GlueFormula(formula, Provenance.S)


def build_S_star(gamma, k, hm, size_limit=GLUE_SIZE_LIMIT):
    """h_a <= h_α <= h_β - k_a or the symmetric case, per conflicting pair."""
    terms = []
    for action, alphas in sorted(conflicting_actions(gamma).items()):
        bound = k.get(action) or 0
        h_a = hm.action_clock(action)
        for alpha, beta in itertools.combinations(alphas, 2):
            u, v = hm.interaction_clock(alpha.id), hm.interaction_clock(beta.id)
            if bound <= 0:
                terms.extend([_le(h_a, u), _le(h_a, v)])
                continue
            terms.append(disj(
                conj(_le(h_a, u), ClockAtom(u, v, "<=", -bound)),
                conj(_le(h_a, v), ClockAtom(v, u, "<=", -bound)),
            ))
    formula = _check_size(conj(*terms), size_limit, "S*(γ)")
    return GlueFormula(formula, Provenance.S_STAR)


# ---------------------------------------------------------------------------
# Separation constants
# ---------------------------------------------------------------------------

def _lower_bound_tests(guard):
    """Clock -> constant for guard atoms x >= c, x > c, x = c."""
    tests = {}
    for atom in guard.atoms:
        if atom.rhs is None and atom.op in (">=", ">", "="):
            tests[atom.lhs] = max(tests.get(atom.lhs, 0), atom.ct)
    return tests


def _path_separation(steps):
    """Largest c such that some clock is reset and later tested against c."""
    reset_at = {}
    best = 0
    for position, edge in enumerate(steps):
        for clock, ct in _lower_bound_tests(edge.guard).items():
            if clock in reset_at:
                best = max(best, ct)
        for clock in edge.resets:
            reset_at[clock] = position
    return best


def _heuristic_separation(component, action):
    labelled = component.edges_labelled(action)
    if not labelled:
        return None
    graph = nx.MultiDiGraph()
    graph.add_nodes_from(component.locations)
    for k, e in enumerate(component.edges):
        if e.action != action:
            graph.add_edge(e.source, e.target, key=k, edge=e)

    result = None
    for first, second in itertools.product(labelled, repeat=2):
        if first.target == second.source:
            paths = [[]]
        else:
            paths = nx.all_simple_edge_paths(graph, first.target, second.source)
        for path in paths:
            middle = [graph.edges[u, v, key]["edge"] for u, v, key in path]
            value = _path_separation([first, *middle, second])
            result = value if result is None else min(result, value)
            if result == 0:
                return 0
    return result


def observer_component(component, action, clock=OBSERVER_CLOCK):
    """Copy with locations split at the first occurrence of the action and an observer clock reset on it."""

    def split(loc, phase):
        return f"{loc}#{phase}"

    edges = []
    for e in component.edges:
        for phase in (0, 1):
            if e.action == action:
                edges.append(Edge(split(e.source, phase), e.action, e.guard, e.resets | {clock},
                                  split(e.target, 1)))
            else:
                edges.append(replace(e, source=split(e.source, phase), target=split(e.target, phase)))
    init_atoms = component.initial_constraint.atoms + (ClockAtom(clock, None, "=", 0),)
    return replace(
        component,
        name=f"{component.name}~{action}",
        locations=tuple(split(l, p) for p in (0, 1) for l in component.locations),
        clocks=component.clocks + (Clock(clock, ClockKind.OBSERVER),),
        edges=tuple(edges),
        tpc={split(l, p): c for l, c in component.tpc.items() for p in (0, 1)},
        initial=(split(component.initial_location, 0), ClockConstraint(init_atoms)),
    )


def _exact_separation(component, action, state_limit, diffcap_factor):
    observed = observer_component(component, action)
    graph = reach(observed, state_limit, diffcap_factor, maxc={OBSERVER_CLOCK: component.max_constant()})
    result = None
    for state in graph.states:
        if not state.location.endswith("#1"):
            continue
        for e in observed.edges_from(state.location):
            if e.action != action:
                continue
            zone = state.zone.constrain_atoms(e.guard.atoms)
            if zone.is_empty():
                continue
            value, _ = decode(zone.m[0, zone.index(OBSERVER_CLOCK)])
            lower = 0 if value is None else max(0, -value)
            result = lower if result is None else min(result, lower)
    return result


def separation_constant(component, action, exact=False, state_limit=STATE_LIMIT,
                        diffcap_factor=DIFFCAP_FACTOR):
    """Minimum delay between two consecutive executions of an action, or None if unknown."""
    if exact:
        return _exact_separation(component, action, state_limit, diffcap_factor)
    return _heuristic_separation(component, action)


def separation_constants(model, exact=False, state_limit=STATE_LIMIT, diffcap_factor=DIFFCAP_FACTOR):
    """k_a for every conflicting action; unknown constants become 0."""
    result = {}
    for action in sorted(conflicting_actions(model.gamma)):
        component = model.instance(model.owner(action))
        value = separation_constant(component, action, exact, state_limit, diffcap_factor)
        result[action] = value or 0
        logger.debug(f"🔍 k[{action}] = {result[action]}")
    return result


# ---------------------------------------------------------------------------
# Symmetry
# ---------------------------------------------------------------------------

def _swap_instances(a, b):
    return {a: b, b: a}


def _rename_action(action, instance_map):
    owner, _, local = action.partition(".")
    return f"{instance_map.get(owner, owner)}.{local}" if local else action


def _interaction_image(gamma, instance_map):
    """Interaction id -> id of its image, or None when γ is not closed under the renaming."""
    by_actions = {frozenset(alpha.participants): alpha.id for alpha in gamma}
    image = {}
    for alpha in gamma:
        target = frozenset(_rename_action(a, instance_map) for a in alpha.participants)
        if target not in by_actions:
            return None
        image[alpha.id] = by_actions[target]
    return image


def _clock_image(model, instance_map, interaction_map, hm):
    mapping = {}
    for source, target in instance_map.items():
        src, dst = model.instance(source), model.instance(target)
        for c_src, c_dst in zip(src.clocks, dst.clocks):
            mapping[c_src.name] = c_dst.name
        for a_src, a_dst in zip(src.actions, dst.actions):
            mapping[hm.action_clock(a_src)] = hm.action_clock(a_dst)
    for source, target in interaction_map.items():
        mapping[hm.interaction_clock(source)] = hm.interaction_clock(target)
    return mapping


def _shape(f):
    """Order-insensitive structural key."""
    if isinstance(f, And):
        return ("and", frozenset(_shape(a) for a in f.args))
    if isinstance(f, Or):
        return ("or", frozenset(_shape(a) for a in f.args))
    if isinstance(f, Not):
        return ("not", _shape(f.arg))
    if isinstance(f, Implies):
        return ("implies", _shape(f.lhs), _shape(f.rhs))
    return f


def validate_symmetry(model, sym, prop=None, hm=None):
    """Raise SymmetryError unless the class, the interactions and the property are symmetric."""
    hm = hm or HistoryMap.for_model(model)
    members = sym.members
    if sym.controller in members:
        raise SymmetryError(f"Controller {sym.controller} cannot belong to its own symmetry class")
    if len(set(members)) != len(members):
        raise SymmetryError("Symmetry class lists an instance twice")
    try:
        instances = [model.instance(m) for m in members]
        model.instance(sym.controller)
    except KeyError as e:
        raise SymmetryError(f"Unknown instance {e.args[0]} in symmetry declaration") from None
    templates = {inst.template for inst in instances}
    if len(templates) != 1 or None in templates:
        raise SymmetryError("Symmetry class members must instantiate the same component")

    for left, right in zip(members, members[1:]):
        instance_map = _swap_instances(left, right)
        interaction_map = _interaction_image(model.gamma, instance_map)
        if interaction_map is None:
            raise SymmetryError(f"Interactions are not closed under swapping {left} and {right}")
        if prop is None:
            continue
        image = rename_formula(prop, _clock_image(model, instance_map, interaction_map, hm), instance_map)
        if _shape(image) == _shape(prop):
            continue
        if not equivalent(prop, image, model):
            raise SymmetryError(f"Property is not invariant under swapping {left} and {right}")
    logger.info(f"✅ Symmetry class {', '.join(members)} around {sym.controller} validated")


def _member_index(alpha, model, members):
    for action in alpha.participants:
        owner = model.owner(action)
        if owner in members:
            return members.index(owner)
    return None


def build_S_canonical(model, k, sym, hm, size_limit=GLUE_SIZE_LIMIT):
    """Separation where one controller conflict follows the class order.

    The ordered action is the designated one, else the first conflicting
    controller action. A single permutation of the class sorts the last
    occurrences of one action only, so every other conflict keeps |·|.
    """
    controller = model.instance(sym.controller)
    conflicting = conflicting_actions(model.gamma)
    controller_actions = [a for a in controller.actions if a in conflicting]
    ordered = {sym.designated} if sym.designated in controller_actions else set(controller_actions[:1])

    terms = []
    for action, alphas in sorted(conflicting.items()):
        bound = k.get(action) or 0
        if bound <= 0:
            continue
        if action not in ordered:
            for alpha, beta in itertools.combinations(alphas, 2):
                terms.append(_apart(hm.interaction_clock(alpha.id), hm.interaction_clock(beta.id), bound))
            continue
        indexed = sorted(
            ((_member_index(alpha, model, sym.members), n, alpha) for n, alpha in enumerate(alphas)),
            key=lambda item: (item[0] is None, item[0] or 0, item[1]),
        )
        for (i, _, alpha), (j, _, beta) in itertools.combinations(indexed, 2):
            u, v = hm.interaction_clock(alpha.id), hm.interaction_clock(beta.id)
            if i is None or j is None or i == j:
                terms.append(_apart(u, v, bound))
            else:
                terms.append(ClockAtom(u, v, ">=", bound))
    formula = _check_size(conj(*terms), size_limit, "canonical S(γ)")
    return GlueFormula(formula, Provenance.S_CANONICAL)


# ---------------------------------------------------------------------------
# Prec refinement
# ---------------------------------------------------------------------------

def prec(component, action):
    """Actions that can be the last visible step before the action becomes available.

    Internal steps are looked through: a′ counts when its target reaches an
    action-edge source by internal steps only.
    """
    sources = {e.source for e in component.edges_labelled(action)}
    internal = nx.DiGraph()
    internal.add_nodes_from(component.locations)
    internal.add_edges_from((e.target, e.source) for e in component.edges if e.is_internal)
    feeding = set(sources)
    for loc in sources:
        feeding |= nx.descendants(internal, loc)
    return sorted({e.action for e in component.edges if not e.is_internal and e.target in feeding})


def enabled_at_initial(component, action):
    return any(e.source == component.initial_location for e in component.edges_labelled(action))


def prec_refinement(component, action, pair, hm):
    """h_α1 <= h0 and h_α2 <= h0 imply some preceding action has run."""
    first, second = pair
    executed = conj(_le(hm.interaction_clock(first.id), hm.h0), _le(hm.interaction_clock(second.id), hm.h0))
    before = disj(*(_le(hm.action_clock(a), hm.h0) for a in prec(component, action)))
    return Implies(executed, before)


def build_prec(model, hm, size_limit=GLUE_SIZE_LIMIT):
    terms = []
    for action, alphas in sorted(conflicting_actions(model.gamma).items()):
        component = model.instance(model.owner(action))
        if not enabled_at_initial(component, action):
            continue
        for pair in itertools.combinations(alphas, 2):
            terms.append(prec_refinement(component, action, pair, hm))
    formula = _check_size(conj(*terms), size_limit, "Prec refinement")
    return GlueFormula(formula, Provenance.PREC)


def glue_summary(glues):
    """Provenance -> atom count, for reports."""
    return {g.provenance.value: g.size for g in glues}



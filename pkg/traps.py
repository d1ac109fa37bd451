"""Interaction invariants of the induced Petri net: initially marked traps and place semiflows."""

import itertools
import logging
import time
from dataclasses import dataclass

import numpy as np

from config import SEMIFLOW_LIMIT, TRAP_LIMIT
from errors import TrapLimitExceeded
from model_core import At, Not, conj, disj

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Transition:
    label: str
    pre: frozenset
    post: frozenset


@dataclass(frozen=True)
class PetriNet:
    """Places are (instance, location) pairs; one token per instance."""

    places: tuple
    transitions: tuple
    initial: frozenset

    def consumers(self):
        """Place -> transitions with that place in their pre-set."""
        result = {p: [] for p in self.places}
        for t in self.transitions:
            for p in t.pre:
                result.setdefault(p, []).append(t)
        return result


def induce_net(model):
    """One transition per interaction and combination of participating edges, plus internal steps."""
    places = tuple((inst.name, loc) for inst in model.instances for loc in inst.locations)
    transitions = []
    seen = set()

    def add(label, pre, post):
        key = (frozenset(pre), frozenset(post))
        if key not in seen:
            seen.add(key)
            transitions.append(Transition(label, key[0], key[1]))

    for alpha in model.gamma:
        choices = []
        for action in alpha.participants:
            owner = model.owner(action)
            inst = model.instance(owner)
            choices.append([(owner, e) for e in inst.edges_labelled(action)])
        for combo in itertools.product(*choices):
            add(alpha.id, [(o, e.source) for o, e in combo], [(o, e.target) for o, e in combo])

    for inst in model.instances:
        for e in inst.edges:
            if e.is_internal:
                add(f"{inst.name}.tau", [(inst.name, e.source)], [(inst.name, e.target)])

    initial = frozenset((inst.name, inst.initial_location) for inst in model.instances)
    return PetriNet(places, tuple(transitions), initial)


def is_trap(net, places):
    """Every transition consuming from the set also produces into it."""
    places = set(places)
    return all(not (t.pre & places) or (t.post & places) for t in net.transitions)


def minimal_marked_traps(net, limit=TRAP_LIMIT):
    """All minimal traps containing an initially marked place.

    Seeded closure: start from one initial place, repair the first violated
    transition by branching over its unexcluded post-places, and discard
    candidates that already contain a found trap.
    """
    started = time.perf_counter()
    order = {p: k for k, p in enumerate(net.places)}
    consumers = net.consumers()
    found = []

    def violated(members):
        for p in sorted(members, key=order.get):
            for t in consumers.get(p, ()):
                if not (t.post & members):
                    return t
        return None

    seeds = sorted(net.initial, key=order.get)
    for k, seed in enumerate(seeds):
        stack = [(frozenset({seed}), frozenset(seeds[:k]))]
        while stack:
            members, excluded = stack.pop()
            if any(trap <= members for trap in found):
                continue
            t = violated(members)
            if t is None:
                found.append(members)
                if len(found) > limit:
                    raise TrapLimitExceeded(f"More than {limit} traps; the interaction invariant is too large")
                continue
            options = sorted(t.post - excluded, key=order.get)
            branches = []
            for i, q in enumerate(options):
                branches.append((members | {q}, excluded | frozenset(options[:i])))
            stack.extend(reversed(branches))

    minimal = [trap for trap in found if not any(other < trap for other in found)]
    unique = sorted({frozenset(t) for t in minimal}, key=lambda t: sorted(order[p] for p in t))
    logger.info(f"📊 {len(unique)} minimal marked traps in {time.perf_counter() - started:.3f}s")
    return unique


def covers_instance(model, trap):
    """True when the trap holds every location of some instance (a trivially true clause)."""
    for inst in model.instances:
        if all((inst.name, loc) in trap for loc in inst.locations):
            return True
    return False


def interaction_invariant(traps, model=None):
    """Conjunction over traps of the disjunction of their locations."""
    clauses = []
    for trap in traps:
        if model is not None and covers_instance(model, trap):
            continue
        clauses.append(disj(*(At(i, l) for i, l in sorted(trap))))
    return conj(*clauses)


def format_traps(traps):
    return "\n".join("{" + ", ".join(f"{i}@{l}" for i, l in sorted(trap)) + "}" for trap in traps)


# ---------------------------------------------------------------------------
# Place invariants


def incidence_matrix(net):
    """Places x transitions matrix of token changes, post minus pre."""
    index = {p: k for k, p in enumerate(net.places)}
    pre = np.zeros((len(net.places), len(net.transitions)), dtype=np.int64)
    post = np.zeros_like(pre)
    for j, t in enumerate(net.transitions):
        for p in t.pre:
            pre[index[p], j] = 1
        for p in t.post:
            post[index[p], j] = 1
    return post - pre


def _normalised(row):
    divisor = np.gcd.reduce(np.abs(row[row != 0]))
    return row // divisor if divisor > 1 else row


def _minimal_rows(rows, offset):
    supports = [frozenset(np.flatnonzero(r[offset:])) for r in rows]
    kept, seen = [], set()
    for k, row in enumerate(rows):
        key = tuple(row)
        if key in seen or any(other < supports[k] for other in supports):
            continue
        seen.add(key)
        kept.append(row)
    return kept


def place_semiflows(net, limit=SEMIFLOW_LIMIT):
    """Minimal-support non-negative y with y·C = 0, as (weights, token count) pairs.

    Farkas elimination over [C | I]: each transition column is zeroed by
    positive combinations of rows of opposite sign. Returns nothing when
    an intermediate matrix grows past the limit.
    """
    started = time.perf_counter()
    incidence = incidence_matrix(net)
    n_transitions = incidence.shape[1]
    rows = list(np.hstack([incidence, np.eye(len(net.places), dtype=np.int64)]))
    for j in range(n_transitions):
        positive = [r for r in rows if r[j] > 0]
        negative = [r for r in rows if r[j] < 0]
        combined = [r for r in rows if r[j] == 0]
        combined += [_normalised(-n[j] * p + p[j] * n) for p in positive for n in negative]
        if len(combined) > limit:
            logger.warning(f"⚠️ Place invariants skipped: more than {limit} candidate rows")
            return []
        rows = _minimal_rows(combined, n_transitions)

    marking = np.array([1 if p in net.initial else 0 for p in net.places], dtype=np.int64)
    flows = []
    for row in rows:
        weights = row[n_transitions:]
        flows.append(({net.places[k]: int(weights[k]) for k in np.flatnonzero(weights)}, int(weights @ marking)))
    logger.info(f"📊 {len(flows)} place semiflows in {time.perf_counter() - started:.3f}s")
    return flows


def exclusion_clauses(model, flows):
    """Places, alone or paired across instances, that no marking of a semiflow allows.

    Each instance holds one token, so the weighted sum lies between the
    sums of per-instance minimum and maximum weights; fixing one or two
    places narrows that interval and may leave out the invariant count.
    """
    clauses = set()
    for weights, count in flows:
        if len({inst for inst, _ in weights}) < 2:
            continue
        spans = {}
        for inst in model.instances:
            values = [weights.get((inst.name, loc), 0) for loc in inst.locations]
            spans[inst.name] = (min(values), max(values))
        low = sum(lo for lo, _ in spans.values())
        high = sum(hi for _, hi in spans.values())

        def excluded(places):
            lo, hi = low, high
            for inst, loc in places:
                w = weights.get((inst, loc), 0)
                lo += w - spans[inst][0]
                hi += w - spans[inst][1]
            return not lo <= count <= hi

        involved = sorted((inst.name, loc) for inst in model.instances for loc in inst.locations
                          if spans[inst.name][0] != spans[inst.name][1])
        singles = {p for p in involved if excluded([p])}
        clauses.update(frozenset({p}) for p in singles)
        for p, q in itertools.combinations(involved, 2):
            if p[0] != q[0] and p not in singles and q not in singles and excluded([p, q]):
                clauses.add(frozenset({p, q}))
    return sorted(clauses, key=lambda c: (len(c), sorted(c)))


def place_invariant(model, flows):
    """Conjunction of the negated exclusion clauses."""
    return conj(*(Not(conj(*(At(i, l) for i, l in sorted(clause)))) for clause in exclusion_clauses(model, flows)))


def format_semiflows(flows):
    lines = []
    for weights, count in flows:
        terms = " + ".join(f"{w}*{i}@{l}" if w != 1 else f"{i}@{l}" for (i, l), w in sorted(weights.items()))
        lines.append(f"{terms} = {count}")
    return "\n".join(lines)

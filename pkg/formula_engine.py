"""Satisfiability of location/clock-difference formulas and SMT-LIB2 export.

The internal checker is a DPLL-style search over NNF goals. A search node
carries a partial location assignment and a canonical DBM over every clock of
the formula; atoms are asserted by tightening the DBM, so each node's zone is
the exact set of valuations consistent with the choices made so far.
"""

import logging
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from config import CUBE_BUDGET
from dbm import DBM, INF, encode
from errors import CubeBudgetExceeded, ModelSemanticError, SolverUnavailable
from model_core import (
    FALSE, TRUE, And, At, ClockAtom, Const, Implies, Not, Or, conj, disj, formula_clocks,
)

logger = logging.getLogger(__name__)

_NEGATED = {"<": ">=", "<=": ">", ">": "<=", ">=": "<"}
_LE_ZERO = 1
_INF = int(INF)


class Verdict(str, Enum):
    SAT = "sat"
    UNSAT = "unsat"
    BUDGET = "budget"


@dataclass(frozen=True)
class Cube:
    """One satisfying branch: chosen locations and the zone of clock values."""

    locations: dict
    zone: DBM

    def completed(self, space):
        """Total location map; unconstrained instances get their first location."""
        locations = dict(self.locations)
        for instance, locs in space.items():
            if instance not in locations and locs:
                locations[instance] = locs[0]
        return Cube(locations, self.zone)

    def as_formula(self):
        at_atoms = [At(i, l) for i, l in sorted(self.locations.items())]
        return conj(*at_atoms, self.zone.to_constraint().as_formula())

    def describe(self):
        lines = [f"{i}@{l}" for i, l in sorted(self.locations.items())]
        return lines + self.zone.dump()


@dataclass(frozen=True)
class CheckResult:
    verdict: Verdict
    witness: Cube | None = None
    branches: int = 0
    elapsed: float = 0.0

    @property
    def is_sat(self):
        return self.verdict == Verdict.SAT

    @property
    def is_unsat(self):
        return self.verdict == Verdict.UNSAT


class _BudgetExhausted(Exception):
    pass


def location_map(space):
    """Instance -> locations, from a SystemModel or a plain mapping."""
    if space is None:
        return {}
    if hasattr(space, "locations_by_instance"):
        return space.locations_by_instance()
    return {k: tuple(v) for k, v in space.items()}


# ---------------------------------------------------------------------------
# Normal form
# ---------------------------------------------------------------------------

def to_nnf(formula, space, negate=False):
    """Push negations to atoms; negated at-atoms become the other locations."""
    f = formula
    if isinstance(f, Const):
        return TRUE if f.value != negate else FALSE
    if isinstance(f, At):
        if not negate:
            return f
        if f.instance not in space:
            raise ModelSemanticError(f"unknown instance '{f.instance}' in formula")
        return disj(*(At(f.instance, loc) for loc in space[f.instance] if loc != f.location))
    if isinstance(f, ClockAtom):
        if not negate:
            return f
        if f.op == "=":
            return disj(ClockAtom(f.lhs, f.rhs, "<", f.ct), ClockAtom(f.lhs, f.rhs, ">", f.ct))
        return ClockAtom(f.lhs, f.rhs, _NEGATED[f.op], f.ct)
    if isinstance(f, Not):
        return to_nnf(f.arg, space, not negate)
    if isinstance(f, Implies):
        if negate:
            return conj(to_nnf(f.lhs, space), to_nnf(f.rhs, space, True))
        return disj(to_nnf(f.lhs, space, True), to_nnf(f.rhs, space))
    if isinstance(f, And):
        args = [to_nnf(a, space, negate) for a in f.args]
        return disj(*args) if negate else conj(*args)
    if isinstance(f, Or):
        args = [to_nnf(a, space, negate) for a in f.args]
        return conj(*args) if negate else disj(*args)
    raise TypeError(f"Not a formula: {f!r}")


def _add(a, b):
    if a >= _INF or b >= _INF:
        return _INF
    return (((a >> 1) + (b >> 1)) << 1) | (a & b & 1)


def _mentions_location(node):
    for arg in node.args:
        if isinstance(arg, At):
            return True
        if isinstance(arg, And) and any(isinstance(b, At) for b in arg.args):
            return True
    return False


# ---------------------------------------------------------------------------
# Search
# ---------------------------------------------------------------------------

class _Search:
    def __init__(self, clocks, space, budget):
        self.clocks = tuple(clocks)
        self.space = space
        self.budget = budget
        self.branches = 0
        self.index = {name: k + 1 for k, name in enumerate(self.clocks)}
        self._bounds = {}
        self._located = {}

    def bounds(self, atom):
        cached = self._bounds.get(atom)
        if cached is None:
            cached = []
            for lhs, rhs, value, strict in atom.difference_bounds():
                cached.append((self._idx(lhs), self._idx(rhs), int(encode(value, strict))))
            self._bounds[atom] = cached
        return cached

    def _idx(self, name):
        if name is None:
            return 0
        try:
            return self.index[name]
        except KeyError:
            raise ModelSemanticError(f"unknown clock '{name}' in formula") from None

    def status(self, atom, zone):
        """True if the zone entails the atom, False if it refutes it, else None."""
        m = zone.m
        entailed = True
        for i, j, raw in self.bounds(atom):
            if _add(raw, int(m[j, i])) < _LE_ZERO:
                return False
            if int(m[i, j]) > raw:
                entailed = False
        return True if entailed else None

    def simplify(self, node, assign, zone):
        if isinstance(node, ClockAtom):
            status = self.status(node, zone)
            return node if status is None else (TRUE if status else FALSE)
        if isinstance(node, At):
            loc = assign.get(node.instance)
            if loc is None:
                return node
            return TRUE if loc == node.location else FALSE
        if isinstance(node, And):
            parts = []
            changed = False
            for arg in node.args:
                s = self.simplify(arg, assign, zone)
                if s is FALSE:
                    return FALSE
                if s is not arg:
                    changed = True
                if s is not TRUE:
                    parts.append(s)
            return conj(*parts) if changed else node
        if isinstance(node, Or):
            parts = []
            changed = False
            for arg in node.args:
                s = self.simplify(arg, assign, zone)
                if s is TRUE:
                    return TRUE
                if s is not arg:
                    changed = True
                if s is not FALSE:
                    parts.append(s)
            return disj(*parts) if changed else node
        return node

    def propagate(self, goals, assign, zone):
        """Assert unit goals until nothing changes; None on conflict."""
        assign = dict(assign)
        while True:
            work = list(goals)
            pending = []
            changed = False
            while work:
                tier, rank, node = work.pop()
                node = self.simplify(node, assign, zone)
                if node is TRUE:
                    continue
                if node is FALSE:
                    return None
                if isinstance(node, And):
                    work.extend((tier, rank, arg) for arg in node.args)
                elif isinstance(node, At):
                    assign[node.instance] = node.location
                    changed = True
                elif isinstance(node, ClockAtom):
                    for i, j, raw in self.bounds(node):
                        zone = zone.constrain(i, j, raw)
                    if zone.is_empty():
                        return None
                    changed = True
                else:
                    pending.append((tier, rank, node))
            goals = pending
            if not changed:
                return goals, assign, zone

    def choose(self, goals):
        def key(k):
            tier, rank, node = goals[k]
            located = self._located.get(node)
            if located is None:
                located = self._located[node] = _mentions_location(node)
            return tier, not located, len(node.args), rank

        return min(range(len(goals)), key=key)

    def run(self, goals):
        """Yield every leaf cube in deterministic depth-first order."""
        stack = [(goals, {}, DBM.universal(self.clocks))]
        while stack:
            goals, assign, zone = stack.pop()
            result = self.propagate(goals, assign, zone)
            if result is None:
                continue
            goals, assign, zone = result
            if not goals:
                yield Cube(assign, zone)
                continue
            self.branches += 1
            if self.branches > self.budget:
                raise _BudgetExhausted
            pick = self.choose(goals)
            tier, rank, node = goals[pick]
            rest = goals[:pick] + goals[pick + 1:]
            for child in reversed(node.args):
                stack.append((rest + [(tier, rank, child)], assign, zone))


def _prepare(formula, space, clocks, deferred):
    space = location_map(space)
    parts = [(0, formula)] + [(1, f) for f in deferred]
    goals = []
    used = set(clocks or ())
    for tier, f in parts:
        used |= formula_clocks(f)
        nnf = to_nnf(f, space)
        args = nnf.args if isinstance(nnf, And) else (nnf,)
        goals.extend((tier, len(goals), arg) for arg in args)
    return space, sorted(used), goals


def is_satisfiable(formula, space=None, budget=CUBE_BUDGET, clocks=None, deferred=()):
    """Decide formula ∧ deferred; deferred conjuncts are branched on last."""
    started = time.perf_counter()
    space, clock_list, goals = _prepare(formula, space, clocks, deferred)
    search = _Search(clock_list, space, budget)
    try:
        for cube in search.run(goals):
            elapsed = time.perf_counter() - started
            logger.debug(f"🔍 sat after {search.branches} branches")
            return CheckResult(Verdict.SAT, cube.completed(space), search.branches, elapsed)
    except _BudgetExhausted:
        logger.warning(f"⚠️ Checker budget of {budget} branch nodes exhausted")
        return CheckResult(Verdict.BUDGET, None, search.branches, time.perf_counter() - started)
    return CheckResult(Verdict.UNSAT, None, search.branches, time.perf_counter() - started)


def is_valid_implication(lhs, rhs, space=None, budget=CUBE_BUDGET, clocks=None, deferred=()):
    """lhs → rhs is valid iff lhs ∧ ¬rhs is unsatisfiable."""
    return is_satisfiable(conj(lhs, Not(rhs)), space, budget, clocks, deferred)


def enumerate_cubes(formula, space=None, budget=CUBE_BUDGET, clocks=None):
    """All leaf cubes; their union is exactly the set of models."""
    space, clock_list, goals = _prepare(formula, space, clocks, ())
    search = _Search(clock_list, space, budget)
    try:
        return list(search.run(goals))
    except _BudgetExhausted:
        raise CubeBudgetExceeded(f"More than {budget} branch nodes while enumerating cubes") from None


def project_clocks(formula, drop, space=None, budget=CUBE_BUDGET):
    """Existentially quantify the given clocks away, cube by cube."""
    drop = set(drop)
    if not drop & formula_clocks(formula):
        return formula
    disjuncts = []
    for cube in enumerate_cubes(formula, space, budget):
        zone = cube.zone.project([c for c in cube.zone.clocks if c not in drop])
        term = Cube(cube.locations, zone).as_formula()
        if term not in disjuncts:
            disjuncts.append(term)
    return disj(*disjuncts)


def equivalent(f, g, space=None, budget=CUBE_BUDGET):
    forward = is_valid_implication(f, g, space, budget)
    backward = is_valid_implication(g, f, space, budget)
    if Verdict.BUDGET in (forward.verdict, backward.verdict):
        logger.warning("⚠️ Equivalence check ran out of budget; reporting not equivalent")
        return False
    return forward.is_unsat and backward.is_unsat


# ---------------------------------------------------------------------------
# Enabledness
# ---------------------------------------------------------------------------

def _enabled_term(steps):
    """steps: (instance, edge) pairs firing together."""
    clocks = sorted({c for inst, _ in steps for c in inst.clock_names})
    target_tpc = [atom for inst, e in steps for atom in inst.tpc_of(e.target).atoms]
    source_tpc = [atom for inst, e in steps for atom in inst.tpc_of(e.source).atoms]
    guard = [atom for _, e in steps for atom in e.guard.atoms]
    resets = sorted({r for _, e in steps for r in e.resets})
    zone = DBM.from_constraint(target_tpc, clocks).inverse_reset(resets)
    zone = zone.constrain_atoms(guard).constrain_atoms(source_tpc).down()
    if zone.is_empty():
        return FALSE
    at_atoms = [At(inst.name, e.source) for inst, e in steps]
    return conj(*at_atoms, zone.to_constraint().as_formula())


def enabled_predicate(model, alpha):
    """Disjunction over participating edge tuples of at(sources) ∧ down(g ∩ [r]tpc' ∩ tpc)."""
    choices = []
    for action in alpha.participants:
        inst = model.instance(model.owner(action))
        choices.append([(inst, e) for e in inst.edges_labelled(action)])
    terms = []

    def walk(k, chosen):
        if k == len(choices):
            term = _enabled_term(chosen)
            if term is not FALSE and term not in terms:
                terms.append(term)
            return
        for step in choices[k]:
            walk(k + 1, chosen + [step])

    walk(0, [])
    return disj(*terms)


def enabled_internal(instance, edge):
    return _enabled_term([(instance, edge)])


def deadlock_freedom_property(model):
    """Some interaction or internal step is enabled."""
    terms = [enabled_predicate(model, alpha) for alpha in model.gamma]
    for inst in model.instances:
        terms.extend(enabled_internal(inst, e) for e in inst.edges if e.is_internal)
    logger.debug(f"🔍 Deadlock-freedom property over {len(model.gamma)} interactions")
    return disj(*terms)


# ---------------------------------------------------------------------------
# SMT-LIB2
# ---------------------------------------------------------------------------

def _symbol(name):
    return f"|{name}|"


def _number(value):
    return f"{value}.0" if value >= 0 else f"(- {-value}.0)"


def _smt_term(f):
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, At):
        return _symbol(f"{f.instance}@{f.location}")
    if isinstance(f, ClockAtom):
        lhs = _symbol(f.lhs) if f.rhs is None else f"(- {_symbol(f.lhs)} {_symbol(f.rhs)})"
        return f"({f.op} {lhs} {_number(f.ct)})"
    if isinstance(f, Not):
        return f"(not {_smt_term(f.arg)})"
    if isinstance(f, Implies):
        return f"(=> {_smt_term(f.lhs)} {_smt_term(f.rhs)})"
    if isinstance(f, And):
        return "(and " + " ".join(_smt_term(a) for a in f.args) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(_smt_term(a) for a in f.args) + ")"
    raise TypeError(f"Not a formula: {f!r}")


def export_smtlib(formula, space=None, sink=None, clocks=None):
    """QF_LRA script asserting the formula; unsat means the implication holds."""
    space = location_map(space)
    clock_list = sorted(set(clocks or ()) | formula_clocks(formula))
    lines = ["(set-logic QF_LRA)"]
    for instance in sorted(space):
        for loc in space[instance]:
            lines.append(f"(declare-fun {_symbol(f'{instance}@{loc}')} () Bool)")
    for name in clock_list:
        lines.append(f"(declare-fun {_symbol(name)} () Real)")
    for name in clock_list:
        lines.append(f"(assert (>= {_symbol(name)} 0.0))")
    for instance in sorted(space):
        symbols = [_symbol(f"{instance}@{loc}") for loc in space[instance]]
        if not symbols:
            continue
        lines.append(f"(assert (or {' '.join(symbols)}))" if len(symbols) > 1 else f"(assert {symbols[0]})")
        for i, a in enumerate(symbols):
            for b in symbols[i + 1:]:
                lines.append(f"(assert (not (and {a} {b})))")
    lines.append(f"(assert {_smt_term(formula)})")
    lines.append("(check-sat)")
    lines.append("(exit)")
    text = "\n".join(lines) + "\n"
    if sink is not None:
        if isinstance(sink, (str, Path)):
            Path(sink).write_text(text, encoding="utf-8")
            logger.info(f"✅ SMT-LIB2 written to {sink}")
        else:
            sink.write(text)
    return text


def discharge_smtlib(text):
    """Run z3 on an exported script."""
    try:
        import z3
    except ImportError:
        raise SolverUnavailable("z3-solver is not installed; install it or use --solver internal") from None
    body = "\n".join(
        line for line in text.splitlines()
        if line.startswith("(declare-fun") or line.startswith("(assert")
    )
    solver = z3.Solver()
    solver.add(z3.parse_smt2_string(body))
    result = solver.check()
    if result == z3.unsat:
        return Verdict.UNSAT
    if result == z3.sat:
        return Verdict.SAT
    logger.warning(f"⚠️ z3 returned {result}")
    return Verdict.BUDGET

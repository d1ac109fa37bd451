"""The compositional verification pipeline.

Global invariant = component invariants of the history-extended components,
the interaction invariant from traps and place semiflows, and the selected glue over history
clocks. A property is proved when GI ∧ ¬property is unsatisfiable.
"""

import logging
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from datetime import datetime
from enum import Enum

from config import CUBE_BUDGET, VerifierOptions
from errors import ModelSemanticError, SymmetryError, TinvError
from formula_engine import (
    Verdict, deadlock_freedom_property, discharge_smtlib, export_smtlib, is_satisfiable, project_clocks,
)
from glue_constraints import (
    build_E, build_E_star, build_prec, build_S, build_S_canonical, glue_summary, separation_constants,
    validate_symmetry,
)
from history_extension import BSTAR, HistoryMap, extend_system, project_history
from model_core import (
    Not, conj, count_conjuncts, count_disjuncts, format_formula, formula_clocks, formula_size,
    is_history_clock_name,
)
from traps import induce_net, interaction_invariant, minimal_marked_traps, place_invariant, place_semiflows
from untimed_heuristics import regex_invariant
from zone_graph import component_invariant, reach

logger = logging.getLogger(__name__)

DEADLOCK = "deadlock"


class Outcome(str, Enum):
    PROVED = "PROVED"
    UNKNOWN = "UNKNOWN"
    BUDGET = "BUDGET"
    ERROR = "ERROR"

    @property
    def exit_code(self):
        return {"PROVED": 0, "UNKNOWN": 1, "BUDGET": 2, "ERROR": 3}[self.value]


@dataclass
class GlobalInvariant:
    """Every conjunct of GI, kept apart for reporting and for the checker's branching order."""

    model: object
    extended: object
    history: HistoryMap | None
    component_invariants: dict = field(default_factory=dict)
    graphs: dict = field(default_factory=dict)
    traps: list = field(default_factory=list)
    interaction_invariant: object = None
    semiflows: list = field(default_factory=list)
    place_invariant: object = None
    glue: list = field(default_factory=list)
    separation: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def main(self):
        """Conjuncts asserted eagerly: CI, II, PI, E and E*."""
        parts = list(self.component_invariants.values())
        if self.interaction_invariant is not None:
            parts.append(self.interaction_invariant)
        if self.place_invariant is not None:
            parts.append(self.place_invariant)
        parts += [g.formula for g in self.glue if g.provenance.value in ("E", "E*")]
        return conj(*parts)

    @property
    def deferred(self):
        """Separation and Prec conjuncts, branched on last."""
        return [g.formula for g in self.glue if g.provenance.value not in ("E", "E*")]

    @property
    def formula(self):
        return conj(self.main, *self.deferred)

    @property
    def history_clocks(self):
        return sorted(c for c in formula_clocks(self.formula) if is_history_clock_name(c))

    def sizes(self):
        sizes = {f"CI[{name}]": count_disjuncts(f) for name, f in self.component_invariants.items()}
        if self.interaction_invariant is not None:
            sizes["II"] = count_conjuncts(self.interaction_invariant)
        if self.place_invariant is not None:
            sizes["PI"] = count_conjuncts(self.place_invariant)
        sizes.update(glue_summary(self.glue))
        sizes["GI atoms"] = formula_size(self.formula)
        return sizes


def resolve_property(model, name=None):
    """Named property, the generated deadlock-freedom property, or the only declared one."""
    if name is None:
        if len(model.properties) != 1:
            declared = ", ".join(model.property_names) or "none"
            raise ModelSemanticError(f"Choose a property with --prop (declared: {declared}, or {DEADLOCK})")
        return model.properties[0]
    if name in model.property_names:
        return name, model.property_formula(name)
    if name == DEADLOCK:
        return DEADLOCK, deadlock_freedom_property(model)
    raise ModelSemanticError(f"Unknown property '{name}'; declared: {', '.join(model.property_names) or 'none'}")


def _needs_history(options, prop):
    if options.glue or options.heuristics:
        return True
    return prop is not None and any(is_history_clock_name(c) for c in formula_clocks(prop))


@contextmanager
def _timed(timings, stage):
    started = time.perf_counter()
    try:
        yield
    finally:
        timings[stage] = timings.get(stage, 0.0) + time.perf_counter() - started


def _glue(model, options, prop, hm, bundle):
    glue = []
    if "e" in options.glue:
        glue.append(build_E(model.gamma, hm, size_limit=options.glue_size_limit))
    if "estar" in options.glue:
        glue.append(build_E_star(model.gamma, hm, size_limit=options.glue_size_limit))
    canonical = "sepc" in options.glue or (options.symmetry and "sep" in options.glue)
    if canonical or "sep" in options.glue:
        k = separation_constants(model, options.exact_separation, options.state_limit, options.diffcap_factor)
        bundle.separation = k
        if canonical:
            if not model.symmetry:
                raise SymmetryError("Symmetry-reduced separation needs a 'symmetry' declaration in the model")
            sym = model.symmetry[0]
            validate_symmetry(model, sym, prop, hm)
            glue.append(build_S_canonical(model, k, sym, hm, options.glue_size_limit))
        else:
            glue.append(build_S(model.gamma, k, hm, options.glue_size_limit))
    if options.uses_prec:
        glue.append(build_prec(model, hm, options.glue_size_limit))
    for g in glue:
        logger.info(f"📊 Glue {g.provenance.value}: {g.size} atoms")
    return glue


def build_global_invariant(model, options=None, prop=None):
    """CI of every (extended) component, II, PI and the selected glue."""
    options = options or VerifierOptions()
    timings = {}
    hm = None
    extended = model
    if _needs_history(options, prop):
        hm = HistoryMap.for_model(model)
        extended, _ = extend_system(model, hm, interactions=options.uses_interaction_clocks)
    bundle = GlobalInvariant(model, extended, hm, timings=timings)

    with _timed(timings, "reach"):
        for inst in extended.instances:
            original = None if inst.name == BSTAR else model.instance(inst.name)
            if hm is not None and "regex" in options.heuristics and original is not None and original.is_untimed:
                logger.info(f"🔍 Regex invariant for untimed component {inst.name}")
                bundle.component_invariants[inst.name] = regex_invariant(
                    original, hm, rewrite_limit=options.rewrite_limit
                )
                continue
            graph = reach(inst, options.state_limit, options.diffcap_factor)
            bundle.graphs[inst.name] = graph
            bundle.component_invariants[inst.name] = component_invariant(graph)

    if options.use_traps:
        with _timed(timings, "traps"):
            bundle.traps = minimal_marked_traps(induce_net(model), options.trap_limit)
            bundle.interaction_invariant = interaction_invariant(bundle.traps, model)

    if options.use_place_invariants:
        with _timed(timings, "semiflows"):
            bundle.semiflows = place_semiflows(induce_net(model), options.semiflow_limit)
            bundle.place_invariant = place_invariant(model, bundle.semiflows)

    if hm is not None:
        with _timed(timings, "glue"):
            bundle.glue = _glue(model, options, prop, hm, bundle)

    logger.info(f"✅ Global invariant built: {formula_size(bundle.formula)} atoms")
    return bundle


def eliminate_history(bundle, budget=CUBE_BUDGET):
    """∃-project every history clock out of GI, for reading rather than checking."""
    return project_clocks(bundle.formula, bundle.history_clocks, bundle.extended, budget)


def readable_invariants(bundle, budget=CUBE_BUDGET):
    """Each CI with its history clocks projected away, disjunct by disjunct."""
    readable = {}
    for name, f in bundle.component_invariants.items():
        drop = sorted(c for c in formula_clocks(f) if is_history_clock_name(c))
        if name in bundle.graphs:
            readable[name] = component_invariant(bundle.graphs[name], drop_clocks=drop)
        else:
            readable[name] = project_clocks(f, drop, bundle.extended, budget) if drop else f
    return readable


@dataclass
class VerificationReport:
    model: str
    property: str
    verdict: Outcome
    message: str = ""
    witness: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    sizes: dict = field(default_factory=dict)
    glue: list = field(default_factory=list)
    heuristics: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    branches: int = 0
    solver: str = "internal"
    created_at: str = field(default_factory=lambda: datetime.now().isoformat(timespec="seconds"))

    @property
    def exit_code(self):
        return self.verdict.exit_code

    @property
    def total_time(self):
        return sum(self.timings.values())

    def to_dict(self):
        data = asdict(self)
        data["verdict"] = self.verdict.value
        return data

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        data["verdict"] = Outcome(data["verdict"])
        return cls(**data)

    def summary(self):
        icon = {"PROVED": "✅", "UNKNOWN": "⚠️", "BUDGET": "⚠️", "ERROR": "❌"}[self.verdict.value]
        lines = [f"{icon} {self.property}: {self.verdict.value}"]
        if self.message:
            lines.append(f"   {self.message}")
        if self.witness:
            lines.append("   potential counter-example (may be spurious):")
            lines.extend(f"     {w}" for w in self.witness)
        if self.sizes:
            lines.append("   sizes: " + ", ".join(f"{k}={v}" for k, v in self.sizes.items()))
        if self.timings:
            lines.append("   timings: " + ", ".join(f"{k}={v:.3f}s" for k, v in self.timings.items()))
        return "\n".join(lines)


def _discharge(bundle, prop, options):
    goal = conj(bundle.main, Not(prop))
    if options.smt_out is not None:
        export_smtlib(conj(bundle.formula, Not(prop)), bundle.extended, options.smt_out)
    if options.solver == "smtlib":
        text = export_smtlib(conj(bundle.formula, Not(prop)), bundle.extended)
        return discharge_smtlib(text), None, 0
    result = is_satisfiable(goal, bundle.extended, options.cube_budget, deferred=bundle.deferred)
    return result.verdict, result.witness, result.branches


def run(model, prop_name=None, options=None):
    """Run the pipeline for one property; the report and the GI it was checked against.

    The bundle is None when a stage failed before GI was complete.
    """
    options = options or VerifierOptions()
    report = VerificationReport(
        model=model.source,
        property=prop_name or "",
        verdict=Outcome.ERROR,
        glue=sorted(options.glue),
        heuristics=sorted(options.heuristics),
        solver=options.solver,
    )
    bundle = None
    try:
        name, prop = resolve_property(model, prop_name)
        report.property = name
        prop = project_history(prop, options.allow_history_props)
        logger.info(f"🔍 Checking {name} on {model.source}")
        bundle = build_global_invariant(model, options, prop)
        report.timings.update(bundle.timings)
        report.sizes = bundle.sizes()
        report.stats = {**model.stats(), "h": len(bundle.history_clocks)}

        started = time.perf_counter()
        verdict, witness, branches = _discharge(bundle, prop, options)
        report.timings["check"] = time.perf_counter() - started
        report.branches = branches
    except TinvError as e:
        logger.error(f"❌ {e}")
        report.message = str(e)
        return report, bundle

    if verdict == Verdict.UNSAT:
        report.verdict = Outcome.PROVED
        logger.info(f"✅ {name} proved")
    elif verdict == Verdict.SAT:
        report.verdict = Outcome.UNKNOWN
        report.message = "GI ∧ ¬property is satisfiable"
        if witness is not None:
            report.witness = witness.describe()
        logger.warning(f"⚠️ {name} not proved")
    else:
        report.verdict = Outcome.BUDGET
        report.message = f"Checker budget of {options.cube_budget} branch nodes exhausted"
    return report, bundle


def check(model, prop_name=None, options=None):
    """Run the pipeline for one property and report PROVED, UNKNOWN, BUDGET or ERROR."""
    report, _ = run(model, prop_name, options)
    return report


def describe_invariant(bundle):
    """Printable listing of every conjunct of GI."""
    lines = []
    for name, f in bundle.component_invariants.items():
        lines.append(f"CI({name}) =")
        lines.append(f"  {format_formula(f)}")
    if bundle.interaction_invariant is not None:
        lines.append("II =")
        lines.append(f"  {format_formula(bundle.interaction_invariant)}")
    if bundle.place_invariant is not None:
        lines.append("PI =")
        lines.append(f"  {format_formula(bundle.place_invariant)}")
    for g in bundle.glue:
        lines.append(f"{g.provenance.value} =")
        lines.append(f"  {format_formula(g.formula)}")
    if bundle.separation:
        lines.append("k = " + ", ".join(f"{a}:{v}" for a, v in sorted(bundle.separation.items())))
    return "\n".join(lines)

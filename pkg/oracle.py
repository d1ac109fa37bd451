"""Ground truth by exhaustive exploration of the composed system.

Only usable on small models: the product is built explicitly and its
zone graph explored with the same successor operators as the components.
"""

import logging
import time
from dataclasses import dataclass, field

from config import CUBE_BUDGET, DIFFCAP_FACTOR, PRODUCT_LIMIT, STATE_LIMIT
from dbm import DBM
from formula_engine import enumerate_cubes, is_satisfiable
from history_extension import extend_system
from model_core import At, Not, compose_syntactically, conj, split_product_location
from zone_graph import SymbolicState, reach

logger = logging.getLogger(__name__)


@dataclass
class OracleRun:
    """Explored product together with the model whose locations it splits into."""

    model: object
    product: object
    graph: object
    elapsed: float = 0.0
    violations: list = field(default_factory=list)

    @property
    def state_count(self):
        return len(self.graph.states)

    def state_formula(self, index):
        state = self.graph.states[index]
        locations = split_product_location(self.product, state.location)
        at_atoms = [At(i, l) for i, l in locations.items()]
        return conj(*at_atoms, state.zone.to_constraint().as_formula())

    def describe(self, index):
        state = self.graph.states[index]
        locations = split_product_location(self.product, state.location)
        return [f"{i}@{l}" for i, l in locations.items()] + state.zone.dump()


def _assumed_starts(product, model, assume, budget):
    """Initial symbolic states restricted by an assumption over the initial location."""
    clocks = product.clock_names
    zone = DBM.from_constraint(product.initial_constraint, clocks)
    locations = split_product_location(product, product.initial_location)
    start = conj(*(At(i, l) for i, l in locations.items()), zone.to_constraint().as_formula(), assume)
    starts = []
    for cube in enumerate_cubes(start, model, budget, clocks=clocks):
        starts.append(SymbolicState(product.initial_location, cube.zone.embed(clocks)))
    return starts


def oracle_reach(model, state_limit=STATE_LIMIT, history=False, interactions=False, assume=None,
                 product_limit=PRODUCT_LIMIT, diffcap_factor=DIFFCAP_FACTOR, budget=CUBE_BUDGET):
    """Zone graph of the composed system, optionally with history clocks.

    ``assume`` is a formula conjoined to the initial configuration; glue
    invariants relate history clocks that start unconstrained.
    """
    started = time.perf_counter()
    if history or interactions:
        model, _ = extend_system(model, interactions=interactions)
    product = compose_syntactically(model, product_limit)
    starts = None if assume is None else _assumed_starts(product, model, assume, budget)
    graph = reach(product, state_limit, diffcap_factor, starts=starts)
    elapsed = time.perf_counter() - started
    logger.info(f"📊 Oracle explored {len(graph.states)} global states in {elapsed:.3f}s")
    return OracleRun(model, product, graph, elapsed)


def oracle_violations(run, formula, budget=CUBE_BUDGET, limit=None):
    """Indices of reachable states with some valuation outside ``formula``."""
    bad = []
    for k in range(len(run.graph.states)):
        result = is_satisfiable(conj(run.state_formula(k), Not(formula)), run.model, budget)
        if not result.is_unsat:
            bad.append(k)
            if limit is not None and len(bad) >= limit:
                break
    run.violations = bad
    return bad


def oracle_holds_invariant(model, formula, run=None, **kwargs):
    """True when every reachable state of the composed system satisfies the formula."""
    run = run or oracle_reach(model, **kwargs)
    bad = oracle_violations(run, formula, limit=1)
    if bad:
        logger.warning(f"⚠️ Oracle found a state violating the formula: {'; '.join(run.describe(bad[0]))}")
        return False
    logger.info(f"✅ Formula holds on all {run.state_count} explored states")
    return True


def oracle_check(model, prop, **kwargs):
    """Ground-truth verdict for a safety property."""
    return oracle_holds_invariant(model, prop, **kwargs)

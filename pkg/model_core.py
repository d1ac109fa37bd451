"""Domain types for timed components, systems, interactions and properties."""

import itertools
import logging
from dataclasses import dataclass, field, replace
from enum import Enum

from config import PRODUCT_LIMIT
from errors import ReachLimitExceeded

logger = logging.getLogger(__name__)

OPS = ("<", "<=", "=", ">=", ">")
H0 = "h0"
TAU = "tau"


class ClockKind(str, Enum):
    ORDINARY = "ordinary"
    ACTION_HISTORY = "action-history"
    INTERACTION_HISTORY = "interaction-history"
    SHARED_H0 = "shared-h0"
    OBSERVER = "observer"


HISTORY_KINDS = (ClockKind.ACTION_HISTORY, ClockKind.INTERACTION_HISTORY, ClockKind.SHARED_H0)


def action_clock_name(action):
    return f"h({action})"


def interaction_clock_name(interaction_id):
    return f"h[{interaction_id}]"


def is_history_clock_name(name):
    return name == H0 or name.startswith("h(") or name.startswith("h[")


@dataclass(frozen=True)
class Clock:
    name: str
    kind: ClockKind = ClockKind.ORDINARY

    @property
    def is_history(self):
        return self.kind in HISTORY_KINDS


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------

class Formula:
    """Base class of the property / invariant language."""

    __slots__ = ()

    def __and__(self, other):
        return conj(self, other)

    def __or__(self, other):
        return disj(self, other)

    def __invert__(self):
        return Not(self)

    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True, eq=True)
class Const(Formula):
    value: bool


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True, eq=True)
class At(Formula):
    instance: str
    location: str


@dataclass(frozen=True, eq=True)
class ClockAtom(Formula):
    """lhs - rhs op ct, with rhs None standing for the zero clock."""

    lhs: str
    rhs: str | None
    op: str
    ct: int

    def __post_init__(self):
        if self.op not in OPS:
            raise ValueError(f"Unknown comparison operator {self.op!r}")
        if not isinstance(self.ct, int) or isinstance(self.ct, bool):
            raise ValueError("Clock constraints take integer constants only")

    def clocks(self):
        return (self.lhs,) if self.rhs is None else (self.lhs, self.rhs)

    def difference_bounds(self):
        """Split into (i, j, value, strict) meaning i - j < value or <= value."""
        i, j, c = self.lhs, self.rhs, self.ct
        if self.op == "<":
            return [(i, j, c, True)]
        if self.op == "<=":
            return [(i, j, c, False)]
        if self.op == ">":
            return [(j, i, -c, True)]
        if self.op == ">=":
            return [(j, i, -c, False)]
        return [(i, j, c, False), (j, i, -c, False)]

    def render(self):
        left = self.lhs if self.rhs is None else f"{self.lhs} - {self.rhs}"
        return f"{left} {self.op} {self.ct}"


@dataclass(frozen=True, eq=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True, eq=True)
class And(Formula):
    args: tuple


@dataclass(frozen=True, eq=True)
class Or(Formula):
    args: tuple


@dataclass(frozen=True, eq=True)
class Implies(Formula):
    lhs: Formula
    rhs: Formula


def conj(*formulas):
    """Flattening conjunction with constant folding."""
    args = []
    for f in formulas:
        if isinstance(f, And):
            args.extend(f.args)
        elif f == TRUE:
            continue
        elif f == FALSE:
            return FALSE
        else:
            args.append(f)
    if not args:
        return TRUE
    if len(args) == 1:
        return args[0]
    return And(tuple(args))


def disj(*formulas):
    """Flattening disjunction with constant folding."""
    args = []
    for f in formulas:
        if isinstance(f, Or):
            args.extend(f.args)
        elif f == FALSE:
            continue
        elif f == TRUE:
            return TRUE
        else:
            args.append(f)
    if not args:
        return FALSE
    if len(args) == 1:
        return args[0]
    return Or(tuple(args))


def implies(lhs, rhs):
    return Implies(lhs, rhs)


def formula_clocks(f):
    """Set of clock names referenced by a formula."""
    found = set()
    stack = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, ClockAtom):
            found.update(node.clocks())
        elif isinstance(node, (And, Or)):
            stack.extend(node.args)
        elif isinstance(node, Not):
            stack.append(node.arg)
        elif isinstance(node, Implies):
            stack.extend((node.lhs, node.rhs))
    return found


def formula_size(f):
    """Number of atoms in a formula."""
    if isinstance(f, (At, ClockAtom)):
        return 1
    if isinstance(f, (And, Or)):
        return sum(formula_size(a) for a in f.args)
    if isinstance(f, Not):
        return formula_size(f.arg)
    if isinstance(f, Implies):
        return formula_size(f.lhs) + formula_size(f.rhs)
    return 0


def count_disjuncts(f):
    return len(f.args) if isinstance(f, Or) else (0 if f == FALSE else 1)


def count_conjuncts(f):
    return len(f.args) if isinstance(f, And) else (0 if f == TRUE else 1)


def rename_formula(f, clock_map=None, instance_map=None):
    """Rename clocks and instances throughout a formula."""
    clock_map = clock_map or {}
    instance_map = instance_map or {}

    def walk(node):
        if isinstance(node, At):
            return At(instance_map.get(node.instance, node.instance), node.location)
        if isinstance(node, ClockAtom):
            rhs = None if node.rhs is None else clock_map.get(node.rhs, node.rhs)
            return ClockAtom(clock_map.get(node.lhs, node.lhs), rhs, node.op, node.ct)
        if isinstance(node, And):
            return And(tuple(walk(a) for a in node.args))
        if isinstance(node, Or):
            return Or(tuple(walk(a) for a in node.args))
        if isinstance(node, Not):
            return Not(walk(node.arg))
        if isinstance(node, Implies):
            return Implies(walk(node.lhs), walk(node.rhs))
        return node

    return walk(f)


_PRECEDENCE = {Implies: 1, Or: 2, And: 3, Not: 4}


def format_formula(f, parent=0):
    """Render a formula in the model grammar."""
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, At):
        return f"{f.instance}@{f.location}"
    if isinstance(f, ClockAtom):
        return f.render()
    prec = _PRECEDENCE[type(f)]
    if isinstance(f, Not):
        text = f"not {format_formula(f.arg, prec)}"
    elif isinstance(f, And):
        text = " and ".join(format_formula(a, prec + 1) for a in f.args)
    elif isinstance(f, Or):
        text = " or ".join(format_formula(a, prec + 1) for a in f.args)
    else:
        text = f"{format_formula(f.lhs, prec + 1)} implies {format_formula(f.rhs, prec)}"
    return f"({text})" if prec < parent else text


# ---------------------------------------------------------------------------
# Components
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClockConstraint:
    """Conjunction of clock atoms; the empty conjunction is true."""

    atoms: tuple = ()

    @property
    def is_true(self):
        return not self.atoms

    def clocks(self):
        return {c for atom in self.atoms for c in atom.clocks()}

    def __and__(self, other):
        return ClockConstraint(self.atoms + other.atoms)

    def as_formula(self):
        return conj(*self.atoms)

    def constants(self):
        """Largest absolute constant compared against each clock."""
        result = {}
        for atom in self.atoms:
            for name in atom.clocks():
                result[name] = max(result.get(name, 0), abs(atom.ct))
        return result

    def is_upper_bounds_only(self):
        return all(a.rhs is None and a.op == "<=" for a in self.atoms)

    def render(self):
        return " and ".join(a.render() for a in self.atoms) if self.atoms else "true"

    def __str__(self):
        return self.render()


TRUE_CONSTRAINT = ClockConstraint()


@dataclass(frozen=True)
class Edge:
    source: str
    action: str | None
    guard: ClockConstraint
    resets: frozenset
    target: str

    @property
    def is_internal(self):
        return self.action is None


@dataclass(frozen=True)
class Component:
    """A timed automaton."""

    name: str
    locations: tuple
    actions: tuple
    clocks: tuple
    edges: tuple
    tpc: dict = field(default_factory=dict)
    initial: tuple = ("", TRUE_CONSTRAINT)
    template: str | None = None
    projections: tuple = ()
    parts: tuple = ()

    @property
    def initial_location(self):
        return self.initial[0]

    @property
    def initial_constraint(self):
        return self.initial[1]

    @property
    def clock_names(self):
        return tuple(c.name for c in self.clocks)

    def clock(self, name):
        for c in self.clocks:
            if c.name == name:
                return c
        raise KeyError(name)

    def has_clock(self, name):
        return any(c.name == name for c in self.clocks)

    @property
    def ordinary_clocks(self):
        return tuple(c.name for c in self.clocks if c.kind == ClockKind.ORDINARY)

    @property
    def history_clocks(self):
        return tuple(c.name for c in self.clocks if c.is_history)

    @property
    def is_untimed(self):
        return not self.ordinary_clocks

    def tpc_of(self, location):
        return self.tpc.get(location, TRUE_CONSTRAINT)

    def edges_from(self, location):
        return [e for e in self.edges if e.source == location]

    def edges_labelled(self, action):
        return [e for e in self.edges if e.action == action]

    def max_constants(self):
        """Per-clock largest constant over guards, tpc and the initial constraint."""
        result = {name: 0 for name in self.clock_names}
        constraints = [e.guard for e in self.edges] + list(self.tpc.values()) + [self.initial_constraint]
        for constraint in constraints:
            for name, value in constraint.constants().items():
                result[name] = max(result.get(name, 0), value)
        return result

    def max_constant(self):
        return max(self.max_constants().values(), default=0)

    def projection_for(self, location):
        return [actions for loc, actions in self.projections if loc == location]


def instantiate(template, instance_name):
    """Rename a component template into an instance with namespaced clocks and actions."""

    def clk(name):
        return f"{instance_name}.{name}"

    def act(name):
        return None if name is None else f"{instance_name}.{name}"

    def constraint(c):
        return ClockConstraint(tuple(
            ClockAtom(clk(a.lhs), None if a.rhs is None else clk(a.rhs), a.op, a.ct) for a in c.atoms
        ))

    edges = tuple(
        Edge(e.source, act(e.action), constraint(e.guard), frozenset(clk(r) for r in e.resets), e.target)
        for e in template.edges
    )
    return Component(
        name=instance_name,
        locations=template.locations,
        actions=tuple(act(a) for a in template.actions),
        clocks=tuple(Clock(clk(c.name), c.kind) for c in template.clocks),
        edges=edges,
        tpc={loc: constraint(c) for loc, c in template.tpc.items()},
        initial=(template.initial_location, constraint(template.initial_constraint)),
        template=template.name,
        projections=tuple((loc, tuple(act(a) for a in acts)) for loc, acts in template.projections),
    )


@dataclass(frozen=True)
class Interaction:
    id: str
    participants: tuple

    @property
    def actions(self):
        return frozenset(self.participants)

    def __str__(self):
        return " | ".join(self.participants)


@dataclass(frozen=True)
class SymmetryDecl:
    controller: str
    members: tuple
    designated: str | None = None


@dataclass(frozen=True)
class SystemModel:
    instances: tuple
    gamma: tuple
    properties: tuple = ()
    symmetry: tuple = ()
    templates: tuple = ()
    source: str = "<string>"

    def instance(self, name):
        for inst in self.instances:
            if inst.name == name:
                return inst
        raise KeyError(name)

    @property
    def instance_names(self):
        return tuple(inst.name for inst in self.instances)

    def property_formula(self, name):
        for prop_name, formula in self.properties:
            if prop_name == name:
                return formula
        raise KeyError(name)

    @property
    def property_names(self):
        return tuple(name for name, _ in self.properties)

    def interaction(self, interaction_id):
        for alpha in self.gamma:
            if alpha.id == interaction_id:
                return alpha
        raise KeyError(interaction_id)

    def owner(self, action):
        return action.split(".", 1)[0]

    def all_actions(self):
        return tuple(a for inst in self.instances for a in inst.actions)

    def all_clocks(self):
        seen = {}
        for inst in self.instances:
            for c in inst.clocks:
                seen.setdefault(c.name, c)
        return tuple(seen.values())

    def locations_by_instance(self):
        return {inst.name: inst.locations for inst in self.instances}

    def with_instances(self, instances, gamma=None):
        return replace(self, instances=tuple(instances), gamma=self.gamma if gamma is None else tuple(gamma))

    def stats(self):
        """Benchmark-table counts: components, locations, clocks, interactions."""
        return {
            "n": len(self.instances),
            "q": sum(len(inst.locations) for inst in self.instances),
            "c": sum(len(inst.ordinary_clocks) for inst in self.instances),
            "i": len(self.gamma),
        }


def conflicts(gamma):
    """Map every action to the interactions containing it."""
    mapping = {}
    for alpha in gamma:
        for action in alpha.participants:
            mapping.setdefault(action, []).append(alpha)
    return {action: tuple(alphas) for action, alphas in mapping.items()}


def conflicting_actions(gamma):
    return {a: alphas for a, alphas in conflicts(gamma).items() if len(alphas) >= 2}


# ---------------------------------------------------------------------------
# Composition
# ---------------------------------------------------------------------------

def product_location(vector):
    return "|".join(vector)


def split_product_location(component, location):
    """Map a product location back to per-instance locations."""
    return dict(zip(component.parts, location.split("|")))


def compose_syntactically(model, limit=PRODUCT_LIMIT):
    """Build the product component of a system (oracle use only)."""
    instances = model.instances
    vectors_count = 1
    for inst in instances:
        vectors_count *= max(1, len(inst.locations))
    if vectors_count > limit:
        raise ReachLimitExceeded(f"Product has {vectors_count} locations (limit {limit})")

    clocks = model.all_clocks()
    index = {inst.name: k for k, inst in enumerate(instances)}
    edges = []
    tpc = {}
    locations = []
    for vector in itertools.product(*(inst.locations for inst in instances)):
        loc = product_location(vector)
        locations.append(loc)
        tpc_atoms = ()
        for inst, l in zip(instances, vector):
            tpc_atoms += inst.tpc_of(l).atoms
        if tpc_atoms:
            tpc[loc] = ClockConstraint(tpc_atoms)

        for alpha in model.gamma:
            choices = []
            for action in alpha.participants:
                k = index[model.owner(action)]
                choices.append([(k, e) for e in instances[k].edges_from(vector[k]) if e.action == action])
            for combo in itertools.product(*choices):
                target = list(vector)
                guard = TRUE_CONSTRAINT
                resets = set()
                for k, e in combo:
                    target[k] = e.target
                    guard = guard & e.guard
                    resets |= e.resets
                edges.append(Edge(loc, alpha.id, guard, frozenset(resets), product_location(target)))

        for k, inst in enumerate(instances):
            for e in inst.edges_from(vector[k]):
                if e.is_internal:
                    target = list(vector)
                    target[k] = e.target
                    edges.append(Edge(loc, None, e.guard, e.resets, product_location(target)))

    init_atoms = ()
    for inst in instances:
        init_atoms += inst.initial_constraint.atoms
    initial = (product_location([inst.initial_location for inst in instances]), ClockConstraint(init_atoms))
    logger.debug(f"🔍 Product: {len(locations)} locations, {len(edges)} edges")
    return Component(
        name="product",
        locations=tuple(locations),
        actions=tuple(alpha.id for alpha in model.gamma),
        clocks=clocks,
        edges=tuple(edges),
        tpc=tpc,
        initial=initial,
        parts=tuple(inst.name for inst in instances),
    )


# ---------------------------------------------------------------------------
# Pretty printing
# ---------------------------------------------------------------------------

def _local(name, prefix):
    if prefix and name.startswith(prefix + "."):
        return name[len(prefix) + 1:]
    if name.startswith("h(") and name.endswith(")"):
        inner = name[2:-1]
        return "h_" + (inner.split(".", 1)[1] if "." in inner else inner)
    if name.startswith("h[") and name.endswith("]"):
        return "h_" + name[2:-1]
    return name


def format_component(component, name=None, local_prefix=None):
    """Render one component in the model grammar."""
    prefix = local_prefix
    if prefix is None and component.template is not None:
        prefix = component.name

    def constraint(c):
        return " and ".join(
            (f"{_local(a.lhs, prefix)}" if a.rhs is None else f"{_local(a.lhs, prefix)} - {_local(a.rhs, prefix)}")
            + f" {a.op} {a.ct}"
            for a in c.atoms
        ) if c.atoms else "true"

    lines = [f"component {name or component.template or component.name}"]
    for c in component.clocks:
        lines.append(f"  clock {_local(c.name, prefix)}")
    for loc in component.locations:
        text = f"  location {loc}"
        if loc == component.initial_location:
            text += " initial"
        tpc = component.tpc_of(loc)
        if not tpc.is_true:
            text += f" tpc {constraint(tpc)}"
        lines.append(text)
    for e in component.edges:
        action = TAU if e.action is None else _local(e.action, prefix)
        text = f"  edge {e.source} -> {e.target} on {action}"
        if not e.guard.is_true:
            text += f" guard {constraint(e.guard)}"
        if e.resets:
            text += " reset " + ",".join(sorted(_local(r, prefix) for r in e.resets))
        lines.append(text)
    lines.append(f"  init {component.initial_location} provided {constraint(component.initial_constraint)}")
    for loc, acts in component.projections:
        lines.append(f"  project {loc} onto " + ",".join(_local(a, prefix) for a in acts))
    lines.append("end")
    return "\n".join(lines)


def format_model(model):
    """Render a parsed model so that it reparses to an equal SystemModel."""
    blocks = [format_component(t, local_prefix="") for t in model.templates]
    lines = ["system"]
    for inst in model.instances:
        lines.append(f"  instance {inst.name} {inst.template or inst.name}")
    for alpha in model.gamma:
        lines.append(f"  interaction {alpha.id} = {' | '.join(alpha.participants)}")
    for sym in model.symmetry:
        text = f"  symmetry controller {sym.controller} class {','.join(sym.members)}"
        if sym.designated:
            text += f" designated {sym.designated.split('.', 1)[1]}"
        lines.append(text)
    for prop_name, formula in model.properties:
        lines.append(f"  property {prop_name}: {format_formula(formula)}")
    lines.append("end")
    blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"

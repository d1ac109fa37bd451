"""Parser for the line-oriented `.tinv` model format."""

import logging
import re
from dataclasses import dataclass
from pathlib import Path

from errors import ModelSemanticError, ModelSyntaxError
from model_core import (
    FALSE, H0, TAU, TRUE, TRUE_CONSTRAINT, At, Clock, ClockAtom, ClockConstraint, ClockKind, Component,
    Edge, Implies, Interaction, Not, SymmetryDecl, SystemModel, action_clock_name, conj, disj,
    instantiate, interaction_clock_name,
)

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t]+)"
    r"|(?P<number>\d+(?:\.\d+)?)"
    r"|(?P<arrow>->)"
    r"|(?P<op><=|>=|<|>|=)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<punct>[-@.()\[\],|:])"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text, line_no=1):
    """Split one line into tokens, tracking columns."""
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if not match:
            raise ModelSyntaxError(f"unexpected character {text[pos]!r}", line_no, pos + 1)
        kind = match.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, match.group(), line_no, pos + 1))
        pos = match.end()
    return tokens


class _Cursor:
    """Token stream over a single line."""

    def __init__(self, tokens, line_no, line_length):
        self.tokens = tokens
        self.pos = 0
        self.line_no = line_no
        self.end_col = line_length + 1

    def peek(self, offset=0):
        idx = self.pos + offset
        return self.tokens[idx] if idx < len(self.tokens) else None

    def peek_text(self, offset=0):
        tok = self.peek(offset)
        return tok.text if tok else None

    def at_end(self):
        return self.pos >= len(self.tokens)

    def error(self, message, token=None):
        token = token or self.peek()
        if token is None:
            return ModelSyntaxError(message, self.line_no, self.end_col)
        return ModelSyntaxError(message, token.line, token.col)

    def next(self):
        tok = self.peek()
        if tok is None:
            raise self.error("unexpected end of line")
        self.pos += 1
        return tok

    def expect(self, text):
        tok = self.peek()
        if tok is None or tok.text != text:
            raise self.error(f"expected {text!r}")
        return self.next()

    def expect_kind(self, kind, what):
        tok = self.peek()
        if tok is None or tok.kind != kind:
            raise self.error(f"expected {what}")
        return self.next()

    def ident(self):
        return self.expect_kind("ident", "identifier").text

    def ident_list(self):
        names = [self.ident()]
        while self.peek_text() == ",":
            self.next()
            names.append(self.ident())
        return names

    def integer(self):
        sign = 1
        if self.peek_text() == "-":
            self.next()
            sign = -1
        tok = self.expect_kind("number", "integer constant")
        if "." in tok.text:
            raise ModelSyntaxError(f"integer constants only, got {tok.text}", tok.line, tok.col)
        return sign * int(tok.text)

    def expect_end(self):
        if not self.at_end():
            raise self.error(f"unexpected {self.peek_text()!r}")


# ---------------------------------------------------------------------------
# Component blocks
# ---------------------------------------------------------------------------

class _ComponentBuilder:
    def __init__(self, name, line_no):
        self.name = name
        self.line_no = line_no
        self.clocks = []
        self.locations = []
        self.initial_flag = None
        self.tpc = {}
        self.edges = []
        self.actions = []
        self.init = None
        self.projections = []

    def semantic(self, line_no, message):
        return ModelSemanticError(f"line {line_no}: {message}")

    def check_clock(self, name, line_no):
        if name not in self.clocks:
            raise self.semantic(line_no, f"unknown clock '{name}' in component {self.name}")

    def constraint(self, cur, stop=()):
        if cur.peek_text() == "true":
            cur.next()
            return TRUE_CONSTRAINT
        atoms = [self.atom(cur)]
        while cur.peek_text() == "and":
            cur.next()
            atoms.append(self.atom(cur))
        if not cur.at_end() and cur.peek_text() not in stop:
            raise cur.error(f"unexpected {cur.peek_text()!r}")
        return ClockConstraint(tuple(atoms))

    def atom(self, cur):
        lhs = cur.ident()
        self.check_clock(lhs, cur.line_no)
        rhs = None
        if cur.peek_text() == "-":
            cur.next()
            rhs = cur.ident()
            self.check_clock(rhs, cur.line_no)
        op = cur.expect_kind("op", "comparison operator").text
        return ClockAtom(lhs, rhs, op, cur.integer())

    def statement(self, keyword, cur):
        line_no = cur.line_no
        if keyword == "clock":
            for name in cur.ident_list():
                if name in self.clocks:
                    raise self.semantic(line_no, f"duplicate clock '{name}'")
                self.clocks.append(name)
            cur.expect_end()
        elif keyword == "location":
            name = cur.ident()
            if name in self.locations:
                raise self.semantic(line_no, f"duplicate location '{name}'")
            self.locations.append(name)
            if cur.peek_text() == "initial":
                cur.next()
                if self.initial_flag is not None:
                    raise self.semantic(line_no, f"second initial location '{name}'")
                self.initial_flag = name
            if cur.peek_text() == "tpc":
                cur.next()
                tpc = self.constraint(cur)
                if not tpc.is_upper_bounds_only():
                    raise self.semantic(line_no, f"tpc of location '{name}' must be a conjunction of upper bounds x <= c")
                if not tpc.is_true:
                    self.tpc[name] = tpc
            cur.expect_end()
        elif keyword == "edge":
            source = cur.ident()
            cur.expect_kind("arrow", "'->'")
            target = cur.ident()
            cur.expect("on")
            label = cur.ident()
            action = None if label == TAU else label
            guard = TRUE_CONSTRAINT
            resets = []
            if cur.peek_text() == "guard":
                cur.next()
                guard = self.constraint(cur, stop=("reset",))
            if cur.peek_text() == "reset":
                cur.next()
                resets = cur.ident_list()
                for r in resets:
                    self.check_clock(r, line_no)
            cur.expect_end()
            if action is not None and action not in self.actions:
                self.actions.append(action)
            self.edges.append((line_no, Edge(source, action, guard, frozenset(resets), target)))
        elif keyword == "init":
            if self.init is not None:
                raise self.semantic(line_no, "duplicate init declaration")
            location = cur.ident()
            cur.expect("provided")
            self.init = (line_no, location, self.constraint(cur))
        elif keyword == "project":
            location = cur.ident()
            cur.expect("onto")
            self.projections.append((line_no, location, tuple(cur.ident_list())))
            cur.expect_end()
        else:
            raise cur.error(f"unknown component declaration {keyword!r}")

    def build(self):
        if not self.locations:
            raise self.semantic(self.line_no, f"component {self.name} declares no locations")
        for line_no, edge in self.edges:
            for loc in (edge.source, edge.target):
                if loc not in self.locations:
                    raise self.semantic(line_no, f"unknown location '{loc}' in component {self.name}")
        if self.init is not None:
            line_no, location, constraint = self.init
            if location not in self.locations:
                raise self.semantic(line_no, f"unknown location '{location}' in component {self.name}")
            if self.initial_flag is not None and self.initial_flag != location:
                raise self.semantic(line_no, f"init location '{location}' differs from initial '{self.initial_flag}'")
            initial = (location, constraint)
        elif self.initial_flag is not None:
            initial = (self.initial_flag, ClockConstraint(tuple(ClockAtom(c, None, "=", 0) for c in self.clocks)))
        else:
            raise self.semantic(self.line_no, f"component {self.name} has no initial location")
        projections = []
        for line_no, location, actions in self.projections:
            if location not in self.locations:
                raise self.semantic(line_no, f"unknown location '{location}' in component {self.name}")
            for a in actions:
                if a not in self.actions:
                    raise self.semantic(line_no, f"unknown action '{a}' in component {self.name}")
            projections.append((location, actions))
        return Component(
            name=self.name,
            locations=tuple(self.locations),
            actions=tuple(self.actions),
            clocks=tuple(Clock(c, ClockKind.ORDINARY) for c in self.clocks),
            edges=tuple(edge for _, edge in self.edges),
            tpc=dict(self.tpc),
            initial=initial,
            projections=tuple(projections),
        )


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------

class _FormulaParser:
    """Recursive descent over: implies < or < and < not."""

    def __init__(self, cur, instances, interaction_ids):
        self.cur = cur
        self.instances = instances
        self.interaction_ids = interaction_ids

    def parse(self):
        formula = self.implication()
        self.cur.expect_end()
        return formula

    def implication(self):
        lhs = self.disjunction()
        if self.cur.peek_text() == "implies":
            self.cur.next()
            return Implies(lhs, self.implication())
        return lhs

    def disjunction(self):
        args = [self.conjunction()]
        while self.cur.peek_text() == "or":
            self.cur.next()
            args.append(self.conjunction())
        return args[0] if len(args) == 1 else disj(*args)

    def conjunction(self):
        args = [self.unary()]
        while self.cur.peek_text() == "and":
            self.cur.next()
            args.append(self.unary())
        return args[0] if len(args) == 1 else conj(*args)

    def unary(self):
        if self.cur.peek_text() == "not":
            self.cur.next()
            return Not(self.unary())
        return self.primary()

    def primary(self):
        cur = self.cur
        text = cur.peek_text()
        if text == "(":
            cur.next()
            inner = self.implication()
            cur.expect(")")
            return inner
        if text == "true":
            cur.next()
            return TRUE
        if text == "false":
            cur.next()
            return FALSE
        if cur.peek(1) is not None and cur.peek_text(1) == "@":
            instance = cur.ident()
            cur.next()
            location = cur.ident()
            if instance not in self.instances:
                raise ModelSemanticError(f"line {cur.line_no}: unknown instance '{instance}'")
            if location not in self.instances[instance].locations:
                raise ModelSemanticError(f"line {cur.line_no}: unknown location '{instance}@{location}'")
            return At(instance, location)
        lhs = self.clock_ref()
        rhs = None
        if cur.peek_text() == "-":
            cur.next()
            rhs = self.clock_ref()
        op = cur.expect_kind("op", "comparison operator").text
        return ClockAtom(lhs, rhs, op, cur.integer())

    def clock_ref(self):
        cur = self.cur
        tok = cur.expect_kind("ident", "clock")
        nxt = cur.peek_text()
        if tok.text == H0 and nxt != ".":
            return H0
        if tok.text == "h" and nxt == "(":
            cur.next()
            instance = cur.ident()
            cur.expect(".")
            action = f"{instance}.{cur.ident()}"
            cur.expect(")")
            if instance not in self.instances or action not in self.instances[instance].actions:
                raise ModelSemanticError(f"line {cur.line_no}: unknown action '{action}'")
            return action_clock_name(action)
        if tok.text == "h" and nxt == "[":
            cur.next()
            interaction_id = cur.ident()
            cur.expect("]")
            if interaction_id not in self.interaction_ids:
                raise ModelSemanticError(f"line {cur.line_no}: unknown interaction '{interaction_id}'")
            return interaction_clock_name(interaction_id)
        cur.expect(".")
        name = f"{tok.text}.{cur.ident()}"
        if tok.text not in self.instances or not self.instances[tok.text].has_clock(name):
            raise ModelSemanticError(f"line {cur.line_no}: unknown clock '{name}'")
        return name


# ---------------------------------------------------------------------------
# System block and entry points
# ---------------------------------------------------------------------------

class ModelParser:
    """Parse `.tinv` text into a SystemModel."""

    def __init__(self, source="<string>"):
        self.source = source
        self.templates = {}
        self.template_order = []
        self.instances = {}
        self.instance_order = []
        self.gamma = []
        self.symmetry = []
        self.raw_properties = []

    def parse(self, text):
        block = None
        builder = None
        seen_system = False
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].rstrip()
            if not line.strip():
                continue
            tokens = tokenize(line, line_no)
            cur = _Cursor(tokens, line_no, len(line))
            keyword = cur.next()
            if keyword.kind != "ident":
                raise cur.error("expected a declaration keyword", keyword)

            if block is None:
                if keyword.text == "component":
                    name = cur.ident()
                    cur.expect_end()
                    if name in self.templates:
                        raise ModelSemanticError(f"line {line_no}: duplicate component '{name}'")
                    builder = _ComponentBuilder(name, line_no)
                    block = "component"
                elif keyword.text == "system":
                    cur.expect_end()
                    if seen_system:
                        raise ModelSemanticError(f"line {line_no}: duplicate system block")
                    seen_system = True
                    block = "system"
                else:
                    raise cur.error(f"expected 'component' or 'system', got {keyword.text!r}", keyword)
            elif keyword.text == "end":
                cur.expect_end()
                if block == "component":
                    template = builder.build()
                    self.templates[template.name] = template
                    self.template_order.append(template.name)
                block = None
            elif block == "component":
                builder.statement(keyword.text, cur)
            else:
                self.system_statement(keyword.text, cur)

        if block is not None:
            raise ModelSyntaxError(f"missing 'end' for {block} block", len(text.splitlines()) + 1, 1)
        if not seen_system:
            raise ModelSemanticError("model declares no system block")
        return self.finish()

    def system_statement(self, keyword, cur):
        line_no = cur.line_no
        if keyword == "instance":
            name = cur.ident()
            template_name = cur.ident()
            cur.expect_end()
            if name in self.instances:
                raise ModelSemanticError(f"line {line_no}: duplicate instance '{name}'")
            if template_name not in self.templates:
                raise ModelSemanticError(f"line {line_no}: unknown component '{template_name}'")
            self.instances[name] = instantiate(self.templates[template_name], name)
            self.instance_order.append(name)
        elif keyword == "interaction":
            interaction_id = cur.ident()
            cur.expect("=")
            participants = [self.qualified_action(cur)]
            while cur.peek_text() == "|":
                cur.next()
                participants.append(self.qualified_action(cur))
            cur.expect_end()
            if any(alpha.id == interaction_id for alpha in self.gamma):
                raise ModelSemanticError(f"line {line_no}: duplicate interaction '{interaction_id}'")
            owners = [p.split(".", 1)[0] for p in participants]
            if len(set(owners)) != len(owners):
                raise ModelSemanticError(
                    f"line {line_no}: interaction '{interaction_id}' uses two actions of one instance"
                )
            self.gamma.append(Interaction(interaction_id, tuple(sorted(participants))))
        elif keyword == "symmetry":
            cur.expect("controller")
            controller = cur.ident()
            cur.expect("class")
            members = cur.ident_list()
            designated = None
            if cur.peek_text() == "designated":
                cur.next()
                designated = f"{controller}.{cur.ident()}"
            cur.expect_end()
            for name in [controller, *members]:
                if name not in self.instances:
                    raise ModelSemanticError(f"line {line_no}: unknown instance '{name}' in symmetry")
            if designated is not None and designated not in self.instances[controller].actions:
                raise ModelSemanticError(f"line {line_no}: unknown action '{designated}'")
            templates = {self.instances[m].template for m in members}
            if len(templates) > 1:
                raise ModelSemanticError(f"line {line_no}: symmetry class mixes components {sorted(templates)}")
            self.symmetry.append(SymmetryDecl(controller, tuple(members), designated))
        elif keyword == "property":
            name = cur.ident()
            cur.expect(":")
            if any(n == name for n, _, _ in self.raw_properties):
                raise ModelSemanticError(f"line {line_no}: duplicate property '{name}'")
            self.raw_properties.append((name, cur, line_no))
        else:
            raise cur.error(f"unknown system declaration {keyword!r}")

    def qualified_action(self, cur):
        instance = cur.ident()
        cur.expect(".")
        local = cur.ident()
        if instance not in self.instances:
            raise ModelSemanticError(f"line {cur.line_no}: unknown instance '{instance}'")
        action = f"{instance}.{local}"
        if action not in self.instances[instance].actions:
            raise ModelSemanticError(f"line {cur.line_no}: unknown action '{action}'")
        return action

    def finish(self):
        ids = {alpha.id for alpha in self.gamma}
        properties = []
        for name, cur, _ in self.raw_properties:
            properties.append((name, _FormulaParser(cur, self.instances, ids).parse()))
        model = SystemModel(
            instances=tuple(self.instances[n] for n in self.instance_order),
            gamma=tuple(self.gamma),
            properties=tuple(properties),
            symmetry=tuple(self.symmetry),
            templates=tuple(self.templates[n] for n in self.template_order),
            source=self.source,
        )
        used = {a for alpha in model.gamma for a in alpha.participants}
        for inst in model.instances:
            idle = [a for a in inst.actions if a not in used]
            if idle:
                logger.warning(f"⚠️ Actions never used by an interaction: {', '.join(idle)}")
        return model


def parse_model(text, source="<string>"):
    """Parse model text into a fully resolved SystemModel."""
    return ModelParser(source).parse(text)


def load_model(path):
    """Read and parse a model file."""
    path = Path(path)
    logger.info(f"🔍 Loading model {path}")
    return parse_model(path.read_text(encoding="utf-8"), source=str(path))


def parse_formula(text, model):
    """Parse a standalone formula against a model's names."""
    tokens = tokenize(text)
    cur = _Cursor(tokens, 1, len(text))
    instances = {inst.name: inst for inst in model.instances}
    return _FormulaParser(cur, instances, {alpha.id for alpha in model.gamma}).parse()

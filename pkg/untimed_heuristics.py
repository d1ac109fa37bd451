"""Regular-expression invariants for untimed components.

The language reaching a location is abstracted to the order of last
occurrences of its actions, rewritten into a restricted form and encoded
as constraints over action history clocks.
"""

import itertools
import logging
from dataclasses import dataclass

from config import BRANCH_LIMIT, REWRITE_LIMIT
from errors import ModelSemanticError, RewriteLimitExceeded
from model_core import At, ClockAtom, conj, disj

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Regex terms
# ---------------------------------------------------------------------------

class Regex:
    __slots__ = ()

    def __str__(self):
        return format_regex(self)


@dataclass(frozen=True)
class Eps(Regex):
    pass


@dataclass(frozen=True)
class Sym(Regex):
    name: str


@dataclass(frozen=True)
class Cat(Regex):
    parts: tuple


@dataclass(frozen=True)
class Alt(Regex):
    options: tuple


@dataclass(frozen=True)
class Star(Regex):
    body: Regex


EPS = Eps()


def sym(name):
    return Sym(name)


def cat(*parts):
    flat = []
    for p in parts:
        if p is None:
            return None
        if isinstance(p, Cat):
            flat.extend(p.parts)
        elif p != EPS:
            flat.append(p)
    if not flat:
        return EPS
    return flat[0] if len(flat) == 1 else Cat(tuple(flat))


def alt(*options):
    flat = []
    for o in options:
        if o is None:
            continue
        for item in (o.options if isinstance(o, Alt) else (o,)):
            if item not in flat:
                flat.append(item)
    if not flat:
        return None
    if EPS in flat and any(isinstance(o, Star) for o in flat):
        flat.remove(EPS)
    return flat[0] if len(flat) == 1 else Alt(tuple(flat))


def _absorbs_eps(e):
    return isinstance(e, Star) or (isinstance(e, Alt) and EPS in e.options)


def _without_eps(e):
    if isinstance(e, Star):
        return e.body
    return alt(*(o for o in e.options if o != EPS))


def star(body):
    if body is None or body == EPS:
        return EPS
    if isinstance(body, Star):
        return body
    if isinstance(body, Cat) and all(_absorbs_eps(p) for p in body.parts):
        return star(alt(*(_without_eps(p) for p in body.parts)))
    if isinstance(body, Alt):
        options = []
        for o in body.options:
            if isinstance(o, Cat) and all(_absorbs_eps(p) for p in o.parts):
                options.extend(_without_eps(p) for p in o.parts)
            else:
                options.append(o.body if isinstance(o, Star) else o)
        options = [o for o in options if o != EPS]
        inner = alt(*options)
        if inner is None or inner == EPS:
            return EPS
        if inner != body:
            return star(inner)
    return Star(body)


def eliminate(e, action):
    """Structural removal of an action: matching symbols become ε."""
    if isinstance(e, Eps):
        return EPS
    if isinstance(e, Sym):
        return EPS if e.name == action else e
    if isinstance(e, Alt):
        return alt(*(eliminate(o, action) for o in e.options))
    if isinstance(e, Cat):
        return cat(*(eliminate(p, action) for p in e.parts))
    if isinstance(e, Star):
        return star(eliminate(e.body, action))
    raise TypeError(f"Not a regex: {e!r}")


def symbols(e):
    if isinstance(e, Sym):
        return {e.name}
    if isinstance(e, Alt):
        return set().union(*(symbols(o) for o in e.options))
    if isinstance(e, Cat):
        return set().union(*(symbols(p) for p in e.parts))
    if isinstance(e, Star):
        return symbols(e.body)
    return set()


def _local(name, local):
    return name.split(".", 1)[1] if local and "." in name else name


def format_regex(e, local=True):
    """Compact text: juxtaposition for single-letter alphabets, '.' otherwise."""
    if e is None:
        return "∅"
    names = [_local(s, local) for s in symbols(e)]
    sep = "" if all(len(n) == 1 for n in names) else "."

    def render(node, top):
        if isinstance(node, Eps):
            return "ε"
        if isinstance(node, Sym):
            return _local(node.name, local)
        if isinstance(node, Alt):
            text = (" + " if top else "+").join(render(o, False) for o in node.options)
            return text if top else f"({text})"
        if isinstance(node, Cat):
            return sep.join(render(p, False) for p in node.parts)
        inner = render(node.body, False)
        if isinstance(node.body, (Sym, Alt)):
            return f"{inner}*"
        return f"({inner})*"

    return render(e, True)


# ---------------------------------------------------------------------------
# Matching
# ---------------------------------------------------------------------------

def nullable(e):
    if isinstance(e, (Eps, Star)):
        return True
    if isinstance(e, Sym):
        return False
    if isinstance(e, Alt):
        return any(nullable(o) for o in e.options)
    return all(nullable(p) for p in e.parts)


def derivative(e, symbol):
    if e is None or isinstance(e, Eps):
        return None
    if isinstance(e, Sym):
        return EPS if e.name == symbol else None
    if isinstance(e, Alt):
        return alt(*(derivative(o, symbol) for o in e.options))
    if isinstance(e, Star):
        inner = derivative(e.body, symbol)
        return None if inner is None else cat(inner, e)
    head, rest = e.parts[0], cat(*e.parts[1:])
    first = derivative(head, symbol)
    result = None if first is None else cat(first, rest)
    if nullable(head):
        result = alt(result, derivative(rest, symbol))
    return result


def accepts(e, word):
    for symbol in word:
        e = derivative(e, symbol)
        if e is None:
            return False
    return nullable(e)


def last_occurrences(word):
    """Keep only the last occurrence of every symbol."""
    seen = set()
    kept = []
    for symbol in reversed(word):
        if symbol not in seen:
            seen.add(symbol)
            kept.append(symbol)
    return tuple(reversed(kept))


# ---------------------------------------------------------------------------
# Automaton to regex
# ---------------------------------------------------------------------------

_START = ("start",)
_FINAL = ("final",)


def regex_at(component, location, alphabet=None):
    """Language of action words leading from the initial location to ``location``.

    States are eliminated by increasing in-degree times out-degree, ties in
    declaration order. Actions outside ``alphabet`` read as ε. Returns None
    when the location is unreachable.
    """
    if component.ordinary_clocks:
        raise ModelSemanticError(f"Component {component.name} is timed; the regex heuristic needs untimed ones")
    keep = None if alphabet is None else set(alphabet)
    edges = {}

    def add(p, q, label):
        edges[(p, q)] = alt(edges.get((p, q)), label)

    add(_START, component.initial_location, EPS)
    add(location, _FINAL, EPS)
    for e in component.edges:
        visible = e.action is not None and (keep is None or e.action in keep)
        add(e.source, e.target, Sym(e.action) if visible else EPS)

    remaining = list(component.locations)
    while remaining:
        def weight(k):
            q = remaining[k]
            ins = {p for p, r in edges if r == q and p != q}
            outs = {r for p, r in edges if p == q and r != q}
            return len(ins) * len(outs), k

        q = remaining.pop(min(range(len(remaining)), key=weight))
        loop = edges.pop((q, q), None)
        ins = [(p, label) for (p, r), label in edges.items() if r == q]
        outs = [(r, label) for (p, r), label in edges.items() if p == q]
        for p, _ in ins:
            del edges[(p, q)]
        for r, _ in outs:
            del edges[(q, r)]
        middle = EPS if loop is None else star(loop)
        for p, into in ins:
            for r, out in outs:
                add(p, r, cat(into, middle, out))
    return edges.get((_START, _FINAL))


# ---------------------------------------------------------------------------
# Restricted form
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RestrictedRegex:
    """Union of branches; items are symbols or stars over a union of symbols."""

    branches: tuple

    def as_regex(self):
        if not self.branches:
            return None
        return alt(*(cat(*branch) for branch in self.branches))

    def words(self):
        """Distinct-symbol words of the language, branch by branch, without repeats."""
        found = []
        for branch in self.branches:
            for word in _branch_words(branch):
                if word not in found:
                    found.append(word)
        return found

    def __str__(self):
        return format_regex(self.as_regex())


def _star_symbols(item):
    body = item.body
    return [o.name for o in body.options] if isinstance(body, Alt) else [body.name]


def _branch_words(branch):
    parts = [[()]]
    for item in branch:
        if isinstance(item, Sym):
            parts.append([(item.name,)])
            continue
        pool = _star_symbols(item)
        choices = []
        for size in range(len(pool) + 1):
            for subset in itertools.permutations(pool, size):
                choices.append(subset)
        parts.append(choices)
    for combo in itertools.product(*parts):
        yield tuple(s for chunk in combo for s in chunk)


def _flatten(e):
    if e == EPS:
        return ()
    return e.parts if isinstance(e, Cat) else (e,)


def _is_item(f):
    if isinstance(f, Sym):
        return True
    if not isinstance(f, Star):
        return False
    body = f.body
    return isinstance(body, Sym) or (isinstance(body, Alt) and all(isinstance(o, Sym) for o in body.options))


def is_restricted(branch):
    seen = set()
    for f in branch:
        if not _is_item(f):
            return False
        names = [f.name] if isinstance(f, Sym) else _star_symbols(f)
        if seen & set(names) or len(set(names)) != len(names):
            return False
        seen.update(names)
    return True


def _retain_last(branch):
    """Drop earlier occurrences of each later letter, right to left, until nothing changes."""
    while True:
        result = []
        trailing = []
        for f in reversed(branch):
            reduced = f
            for action in trailing:
                reduced = eliminate(reduced, action)
            if isinstance(f, Sym):
                trailing.append(f.name)
            result = list(_flatten(reduced)) + result
        result = tuple(result)
        if result == tuple(branch):
            return result
        branch = result


def to_restricted(e, rewrite_limit=REWRITE_LIMIT, branch_limit=BRANCH_LIMIT):
    """Rewrite with last-occurrence retention and back-unfolding until every branch is restricted.

    Branches are explored once each; unfolding E* into E*E or ε always
    takes the rightmost star or union first.
    """
    if e is None:
        return RestrictedRegex(())
    pending = [tuple(_flatten(o)) for o in reversed(e.options)] if isinstance(e, Alt) else [tuple(_flatten(e))]
    done = []
    visited = set()
    steps = 0
    while pending:
        branch = _retain_last(pending.pop())
        # A branch met again contributes no new words: nullable star bodies unfold back to it.
        if branch in visited:
            continue
        visited.add(branch)
        steps += 1
        if steps > rewrite_limit:
            raise RewriteLimitExceeded(f"Restricted form not reached after {rewrite_limit} rewrite steps")
        if is_restricted(branch):
            if branch not in done:
                done.append(branch)
            if len(done) > branch_limit:
                raise RewriteLimitExceeded(f"Restricted form exceeds {branch_limit} branches")
            continue
        p = max(k for k, f in enumerate(branch) if not isinstance(f, Sym))
        head, f, tail = branch[:p], branch[p], branch[p + 1:]
        if isinstance(f, Alt):
            splits = [head + _flatten(o) + tail for o in f.options]
        else:
            splits = [head + (f,) + _flatten(f.body) + tail, head + tail]
        pending.extend(reversed(splits))
    logger.debug(f"🔍 Restricted form with {len(done)} branches after {steps} steps")
    return RestrictedRegex(tuple(done))


# ---------------------------------------------------------------------------
# History-clock encoding
# ---------------------------------------------------------------------------

def _ge(u, v):
    return ClockAtom(u, v, ">=", 0)


def _not_yet(clock, h0):
    return ClockAtom(clock, h0, ">", 0)


def _word_formula(word, alphabet, clock, h0):
    chain = [h0] + [clock(a) for a in word]
    terms = [_ge(u, v) for u, v in zip(chain, chain[1:])]
    terms += [_not_yet(clock(c), h0) for c in alphabet if c not in word]
    return conj(*terms)


def _branch_formula(branch, alphabet, clock, h0):
    """Linear encoding: mandatory chain, optional symbols bounded by their neighbours."""
    mandatory = [f.name for f in branch if isinstance(f, Sym)]
    chain = [h0] + [clock(a) for a in mandatory]
    terms = [_ge(u, v) for u, v in zip(chain, chain[1:])]

    before = h0
    group = []
    segments = []
    for f in branch:
        if isinstance(f, Sym):
            segments.append((before, group, clock(f.name)))
            before, group = clock(f.name), []
        else:
            group.append(_star_symbols(f))
    segments.append((before, group, None))

    for before, stars, after in segments:
        for k, names in enumerate(stars):
            for name in names:
                h = clock(name)
                if before == h0 and after is not None:
                    terms.append(_ge(h, after))
                    continue
                if after is None and before == h0:
                    continue
                inside = [_ge(before, h)]
                if after is not None:
                    inside.append(_ge(h, after))
                terms.append(disj(_not_yet(h, h0), conj(*inside)))
            for later in stars[k + 1:]:
                for name in names:
                    for other in later:
                        terms.append(disj(
                            _not_yet(clock(name), h0), _not_yet(clock(other), h0), _ge(clock(name), clock(other)),
                        ))

    used = set(mandatory) | {n for f in branch if not isinstance(f, Sym) for n in _star_symbols(f)}
    terms += [_not_yet(clock(c), h0) for c in alphabet if c not in used]
    return conj(*terms)


def phi(restricted, alphabet, hm, optimized=True):
    """History-clock formula whose models are exactly the last-occurrence orders of the branches."""
    alphabet = list(alphabet)
    if optimized:
        return disj(*(_branch_formula(b, alphabet, hm.action_clock, hm.h0) for b in restricted.branches))
    return disj(*(_word_formula(w, alphabet, hm.action_clock, hm.h0) for w in restricted.words()))


@dataclass(frozen=True)
class LocationRegex:
    location: str
    alphabet: tuple
    projected: bool
    regex: Regex | None
    restricted: RestrictedRegex


def location_regexes(component, rewrite_limit=REWRITE_LIMIT):
    """E_l and its restricted form for every location and projection."""
    result = []
    for loc in component.locations:
        projections = component.projection_for(loc)
        for alphabet in projections or [component.actions]:
            e = regex_at(component, loc, alphabet)
            restricted = to_restricted(e, rewrite_limit)
            result.append(LocationRegex(loc, tuple(alphabet), bool(projections), e, restricted))
    return result


def regex_invariant(component, hm, optimized=True, rewrite_limit=REWRITE_LIMIT):
    """⋁_l (at(l) ∧ ⋀_projections φ(E_l♯)) over reachable locations."""
    per_location = {}
    for entry in location_regexes(component, rewrite_limit):
        if entry.regex is None:
            continue
        formula = phi(entry.restricted, entry.alphabet, hm, optimized)
        per_location.setdefault(entry.location, []).append(formula)
    disjuncts = [conj(At(component.name, loc), *formulas) for loc, formulas in per_location.items()]
    logger.info(f"📊 Regex invariant of {component.name}: {len(disjuncts)} locations")
    return disj(*disjuncts)


def format_location_regexes(entries, local=True):
    """Text for `--dump-regex`."""
    lines = []
    for entry in entries:
        scope = " onto " + ",".join(_local(a, local) for a in entry.alphabet) if entry.projected else ""
        lines.append(f"{entry.location}{scope}")
        lines.append(f"  E  = {format_regex(entry.regex, local)}")
        lines.append(f"  E# = {format_regex(entry.restricted.as_regex(), local)}")
    return "\n".join(lines)

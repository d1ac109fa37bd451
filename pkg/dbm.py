"""Difference Bound Matrices over named clocks.

A bound ``x_i - x_j < c`` or ``<= c`` is stored as one int64: ``(c << 1) | nonstrict``.
Comparing encoded bounds as integers orders them by value, then strict before
non-strict, so ``np.minimum`` picks the tighter bound. Index 0 is the zero clock.
"""

import logging

import numpy as np

from errors import DBMOverflowError, DimensionMismatchError
from model_core import ClockAtom, ClockConstraint

logger = logging.getLogger(__name__)

INF = np.int64(1 << 62)
MAX_BOUND = 1 << 50
LE_ZERO = np.int64(1)
LT_ZERO = np.int64(0)


def encode(value, strict):
    return np.int64((int(value) << 1) | (0 if strict else 1))


def decode(raw):
    """Return (value, strict) or (None, False) for infinity."""
    raw = int(raw)
    if raw >= int(INF):
        return None, False
    return raw >> 1, not (raw & 1)


def bound_add(a, b):
    """Add encoded bounds elementwise with infinity absorbing."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    inf_mask = (a >= INF) | (b >= INF)
    a_safe = np.where(inf_mask, 0, a)
    b_safe = np.where(inf_mask, 0, b)
    values = (a_safe >> 1) + (b_safe >> 1)
    if np.any(np.abs(values[~inf_mask]) > MAX_BOUND):
        raise DBMOverflowError("Clock bound out of range")
    result = (values << 1) | (a_safe & b_safe & 1)
    return np.where(inf_mask, INF, result)


class DBM:
    """Canonical zone over a tuple of clock names."""

    __slots__ = ("clocks", "m", "_index")

    def __init__(self, clocks, matrix, canonical=False):
        self.clocks = tuple(clocks)
        self.m = matrix
        self._index = {name: i + 1 for i, name in enumerate(self.clocks)}
        if not canonical:
            self._close()

    # -- constructors -------------------------------------------------------

    @classmethod
    def universal(cls, clocks):
        dim = len(clocks) + 1
        m = np.full((dim, dim), INF, dtype=np.int64)
        np.fill_diagonal(m, LE_ZERO)
        m[0, :] = LE_ZERO
        return cls(clocks, m, canonical=True)

    @classmethod
    def zero(cls, clocks):
        dim = len(clocks) + 1
        return cls(clocks, np.full((dim, dim), LE_ZERO, dtype=np.int64), canonical=True)

    @classmethod
    def empty(cls, clocks):
        dim = len(clocks) + 1
        m = np.full((dim, dim), INF, dtype=np.int64)
        m[0, 0] = LT_ZERO
        return cls(clocks, m, canonical=True)

    @classmethod
    def from_constraint(cls, constraint, clocks):
        """Zone of a conjunction of clock atoms (or an iterable of atoms)."""
        zone = cls.universal(clocks)
        atoms = constraint.atoms if isinstance(constraint, ClockConstraint) else tuple(constraint)
        return zone.constrain_atoms(atoms)

    # -- basic queries ------------------------------------------------------

    @property
    def dim(self):
        return len(self.clocks) + 1

    def index(self, name):
        """Matrix index of a clock; None is the zero clock."""
        if name is None:
            return 0
        try:
            return self._index[name]
        except KeyError:
            raise DimensionMismatchError(f"Clock {name!r} is not part of this zone") from None

    def is_empty(self):
        return bool(self.m[0, 0] < LE_ZERO)

    def copy(self):
        return DBM(self.clocks, self.m.copy(), canonical=True)

    def __eq__(self, other):
        return isinstance(other, DBM) and self.clocks == other.clocks and np.array_equal(self.m, other.m)

    def __hash__(self):
        return hash((self.clocks, self.m.tobytes()))

    def __repr__(self):
        return f"DBM({', '.join(self.dump()) or 'true'})"

    def _check_same(self, other):
        if self.clocks != other.clocks:
            raise DimensionMismatchError(f"Zones over {self.clocks} and {other.clocks}")

    # -- closure ------------------------------------------------------------

    def _set_empty(self):
        self.m = np.full(self.m.shape, INF, dtype=np.int64)
        self.m[0, 0] = LT_ZERO

    def _close(self):
        m = self.m
        for k in range(self.dim):
            m = np.minimum(m, bound_add(m[:, k:k + 1], m[k:k + 1, :]))
            if np.any(np.diagonal(m) < LE_ZERO):
                self.m = m
                self._set_empty()
                return
        self.m = m

    def canonicalize(self):
        """All-pairs shortest path closure (returns a new zone)."""
        return DBM(self.clocks, self.m.copy())

    # -- constraints --------------------------------------------------------

    def constrain(self, i, j, raw):
        """Add x_i - x_j bounded by an encoded bound, re-closing in O(n^2)."""
        if self.is_empty():
            return self
        if raw >= self.m[i, j]:
            return self
        if bound_add(raw, self.m[j, i]) < LE_ZERO:
            return DBM.empty(self.clocks)
        through = bound_add(bound_add(self.m[:, i:i + 1], raw), self.m[j:j + 1, :])
        return DBM(self.clocks, np.minimum(self.m, through), canonical=True)

    def constrain_atoms(self, atoms):
        zone = self
        for atom in atoms:
            for lhs, rhs, value, strict in atom.difference_bounds():
                zone = zone.constrain(zone.index(lhs), zone.index(rhs), encode(value, strict))
                if zone.is_empty():
                    return zone
        return zone

    def intersect(self, other):
        self._check_same(other)
        if self.is_empty() or other.is_empty():
            return DBM.empty(self.clocks)
        return DBM(self.clocks, np.minimum(self.m, other.m))

    def includes(self, other):
        """self ⊇ other."""
        self._check_same(other)
        if other.is_empty():
            return True
        if self.is_empty():
            return False
        return bool(np.all(other.m <= self.m))

    # -- time and resets ----------------------------------------------------

    def up(self):
        if self.is_empty():
            return self
        m = self.m.copy()
        m[1:, 0] = INF
        return DBM(self.clocks, m, canonical=True)

    def down(self):
        if self.is_empty():
            return self
        m = self.m.copy()
        for i in range(1, self.dim):
            column = m[1:, i]
            m[0, i] = min(LE_ZERO, column.min())
        return DBM(self.clocks, m)

    def reset(self, names):
        if self.is_empty() or not names:
            return self
        m = self.m.copy()
        for name in names:
            r = self.index(name)
            m[r, :] = m[0, :]
            m[:, r] = m[:, 0]
            m[r, r] = LE_ZERO
        return DBM(self.clocks, m, canonical=True)

    def free(self, names):
        """Forget every constraint on the given clocks except non-negativity."""
        if self.is_empty() or not names:
            return self
        m = self.m.copy()
        for name in names:
            r = self.index(name)
            m[r, :] = INF
            m[:, r] = m[:, 0]
            m[r, r] = LE_ZERO
            m[0, r] = LE_ZERO
        return DBM(self.clocks, m, canonical=True)

    def inverse_reset(self, names):
        """{v | v[names := 0] in zone}."""
        if not names:
            return self
        zone = self
        for name in names:
            r = zone.index(name)
            zone = zone.constrain(r, 0, LE_ZERO)
            if zone.is_empty():
                return zone
        return zone.free(names)

    # -- abstraction --------------------------------------------------------

    def extrapolate(self, maxc, diffcap):
        """Drop bounds above their cap and tighten bounds below the negated cap."""
        if self.is_empty():
            return self
        dim = self.dim
        caps = np.full((dim, dim), int(diffcap), dtype=np.int64)
        for name, i in self._index.items():
            cap = maxc.get(name, 0)
            cap = 0 if cap is None else int(cap)
            caps[i, 0] = cap
            caps[0, i] = cap
        caps[0, 0] = 0
        m = self.m.copy()
        finite = m < INF
        values = np.where(finite, m >> 1, 0)
        off_diag = ~np.eye(dim, dtype=bool)
        too_high = finite & off_diag & (values > caps)
        too_low = finite & off_diag & (values < -caps.T)
        m = np.where(too_high, INF, m)
        m = np.where(too_low, (-caps.T) << 1, m)
        if not (too_high.any() or too_low.any()):
            return self
        return DBM(self.clocks, m)

    def project(self, keep):
        """Existential projection onto a subset of clocks."""
        keep = [c for c in self.clocks if c in set(keep)]
        if self.is_empty():
            return DBM.empty(keep)
        idx = [0] + [self.index(c) for c in keep]
        return DBM(keep, self.m[np.ix_(idx, idx)].copy(), canonical=True)

    def embed(self, clocks):
        """The same zone inside a larger clock set; new clocks are unconstrained."""
        target = DBM.universal(clocks)
        if self.is_empty():
            return DBM.empty(clocks)
        idx = [0] + [target.index(c) for c in self.clocks]
        m = target.m.copy()
        m[np.ix_(idx, idx)] = np.minimum(m[np.ix_(idx, idx)], self.m)
        return DBM(tuple(clocks), m)

    # -- conversions --------------------------------------------------------

    def bounds(self):
        """Non-trivial bounds as (lhs, rhs, value, strict) with None for the zero clock."""
        names = (None,) + self.clocks
        result = []
        for i in range(self.dim):
            for j in range(self.dim):
                if i == j:
                    continue
                raw = self.m[i, j]
                if raw >= INF or (i == 0 and raw == LE_ZERO):
                    continue
                value, strict = decode(raw)
                result.append((names[i], names[j], value, strict))
        return result

    def to_constraint(self):
        """Conjunction of atoms describing the zone exactly."""
        if self.is_empty():
            if not self.clocks:
                raise ValueError("An empty zone without clocks has no constraint form")
            return ClockConstraint((ClockAtom(self.clocks[0], None, "<", 0),))
        atoms = []
        names = (None,) + self.clocks
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                upper, lower = self.m[i, j], self.m[j, i]
                a, b = names[i], names[j]
                if i == 0:
                    # row 0 holds -x_j bounds, column 0 holds x_j bounds
                    atoms.extend(_zero_atoms(b, upper, lower))
                    continue
                atoms.extend(_pair_atoms(a, b, upper, lower))
        return ClockConstraint(tuple(atoms))

    def contains_point(self, valuation):
        """Valuation membership, used by brute-force checks."""
        if self.is_empty():
            return False
        values = [0.0] + [float(valuation[c]) for c in self.clocks]
        for i in range(self.dim):
            for j in range(self.dim):
                raw = self.m[i, j]
                if raw >= INF:
                    continue
                bound, strict = decode(raw)
                diff = values[i] - values[j]
                if diff > bound or (strict and diff >= bound):
                    return False
        return True

    def dump(self):
        """Sorted `xi - xj <= c` lines for every non-trivial bound."""
        lines = []
        for lhs, rhs, value, strict in self.bounds():
            op = "<" if strict else "<="
            lines.append(f"{lhs or '0'} - {rhs or '0'} {op} {value}")
        return sorted(lines)


def _zero_atoms(clock, upper, lower):
    """Atoms for 0 - clock (upper) and clock - 0 (lower) bounds."""
    atoms = []
    up_v, up_s = decode(lower)
    low_v, low_s = decode(upper)
    if up_v is not None and low_v is not None and not up_s and not low_s and up_v == -low_v:
        return [ClockAtom(clock, None, "=", up_v)]
    if low_v is not None and not (low_v == 0 and not low_s):
        atoms.append(ClockAtom(clock, None, ">" if low_s else ">=", -low_v))
    if up_v is not None:
        atoms.append(ClockAtom(clock, None, "<" if up_s else "<=", up_v))
    return atoms


def _pair_atoms(a, b, upper, lower):
    """Atoms for a - b (upper) and b - a (lower) bounds."""
    atoms = []
    up_v, up_s = decode(upper)
    low_v, low_s = decode(lower)
    if up_v is not None and low_v is not None and not up_s and not low_s and up_v == -low_v:
        return [ClockAtom(a, b, "=", up_v)]
    if low_v is not None:
        atoms.append(ClockAtom(a, b, ">" if low_s else ">=", -low_v))
    if up_v is not None:
        atoms.append(ClockAtom(a, b, "<" if up_s else "<=", up_v))
    return atoms

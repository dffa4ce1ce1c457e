"""The product algebras V and W, the trace W -> V and the pairing T2.

Component keys of W are pairs ``(i, j)`` (branch ``i``, sheet ``j``), both
1-based and ordered lexicographically.  On sheet ``(i, j)`` the variable is
``u = z_i^(1/e)`` with ``e = e_j^(i)``.
"""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass
from math import lcm

from .series import DepthError, FractionalSeries, Q, parse_series, sum_tagged, substitute_root_scaling

__all__ = [
    "RamificationData",
    "WElement",
    "VElement",
    "embed_v_in_w",
    "trace",
    "pair_T2",
    "symmetrize",
    "format_w",
    "parse_w",
]


@dataclass(frozen=True)
class RamificationData:
    """Cover degree ``n`` and one partition of ``n`` per branch."""

    partitions: tuple

    def __post_init__(self):
        parts = tuple(tuple(int(e) for e in p) for p in self.partitions)
        object.__setattr__(self, "partitions", parts)
        if not parts:
            raise ValueError("at least one branch is required")
        n = sum(parts[0])
        for p in parts:
            if not p or any(e < 1 for e in p):
                raise ValueError("ramification indices must be positive")
            if sum(p) != n:
                raise ValueError("every partition must sum to the cover degree")

    @classmethod
    def of(cls, partitions):
        return cls(tuple(tuple(p) for p in partitions))

    @classmethod
    def trivial(cls, r=1):
        return cls(tuple((1,) for _ in range(r)))

    @property
    def n(self):
        return sum(self.partitions[0])

    @property
    def r(self):
        return len(self.partitions)

    @property
    def rbar(self):
        return sum(len(p) for p in self.partitions)

    @property
    def keys(self):
        return tuple((i + 1, j + 1) for i, p in enumerate(self.partitions) for j in range(len(p)))

    def e(self, key):
        i, j = key
        return self.partitions[i - 1][j - 1]

    @property
    def lcm(self):
        return lcm(*[e for p in self.partitions for e in p])

    def level_step(self, key):
        """Level of ``u`` on a sheet: levels are exponents scaled to a common unit."""
        return self.lcm // self.e(key)

    def v_data(self):
        return RamificationData.trivial(self.r)

    def header(self):
        return "E = " + str([list(p) for p in self.partitions]).replace(" ", "")


@dataclass(frozen=True)
class WElement:
    """A tuple of sheet series, one per component key in canonical order."""

    ram: RamificationData
    parts: tuple

    def __post_init__(self):
        if len(self.parts) != len(self.ram.keys):
            raise ValueError("one series per component key is required")
        for key, s in zip(self.ram.keys, self.parts):
            if s.e != self.ram.e(key):
                raise ValueError(f"component {key} must have e = {self.ram.e(key)}")

    # -- construction ---------------------------------------------------
    @classmethod
    def from_map(cls, ram, mapping, hi=None):
        parts = []
        for key in ram.keys:
            s = mapping.get(key)
            if s is None:
                s = FractionalSeries.zero(ram.e(key), hi)
            parts.append(s)
        return cls(ram, tuple(parts))

    @classmethod
    def zero(cls, ram, hi=None):
        return cls.from_map(ram, {}, hi)

    @classmethod
    def one(cls, ram):
        return cls(ram, tuple(FractionalSeries.one(ram.e(k)) for k in ram.keys))

    @classmethod
    def monomial(cls, ram, key, m, c=1):
        return cls.from_map(ram, {key: FractionalSeries.monomial(ram.e(key), m, c)})

    @classmethod
    def monomials(cls, ram, exps):
        """Componentwise monomial ``(u^exps[key])``."""
        return cls.from_map(ram, {k: FractionalSeries.monomial(ram.e(k), exps.get(k, 0)) for k in ram.keys})

    def __getitem__(self, key):
        return self.parts[self.ram.keys.index(key)]

    def items(self):
        return zip(self.ram.keys, self.parts)

    # -- arithmetic -----------------------------------------------------
    def _same(self, other):
        if other.ram != self.ram:
            raise ValueError("mismatched ramification data")

    def __add__(self, other):
        self._same(other)
        return WElement(self.ram, tuple(a + b for a, b in zip(self.parts, other.parts)))

    def __sub__(self, other):
        self._same(other)
        return WElement(self.ram, tuple(a - b for a, b in zip(self.parts, other.parts)))

    def __neg__(self):
        return WElement(self.ram, tuple(-a for a in self.parts))

    def __mul__(self, other):
        if isinstance(other, WElement):
            self._same(other)
            return WElement(self.ram, tuple(a * b for a, b in zip(self.parts, other.parts)))
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, c):
        return WElement(self.ram, tuple(a.scale(c) for a in self.parts))

    def invert(self, hi=None):
        return WElement(self.ram, tuple(a.invert(hi) for a in self.parts))

    def truncate_levels(self, level):
        """Truncate every component below the common level ``level``."""
        out = []
        for key, s in self.items():
            step = self.ram.level_step(key)
            hi = -((-level) // step)
            if s.hi is not None and s.hi < hi:
                out.append(s)
            else:
                out.append(s.truncate(hi))
        return WElement(self.ram, tuple(out))

    def known_level(self):
        """Smallest level at which some component stops being known (None if exact)."""
        best = None
        for key, s in self.items():
            if s.hi is not None:
                lv = s.hi * self.ram.level_step(key)
                best = lv if best is None else min(best, lv)
        return best

    def is_zero(self):
        return all(s.is_zero() for s in self.parts)

    def __str__(self):
        return format_w(self)


def mul_w(a, b):
    return a * b


def add_w(a, b):
    return a + b


def invert_w(a, hi=None):
    return a.invert(hi)


class VElement(WElement):
    """An element of V: one ``e = 1`` series per branch."""

    @classmethod
    def of(cls, series):
        ram = RamificationData.trivial(len(series))
        return cls(ram, tuple(series))

    def branch(self, i):
        return self.parts[i - 1]


def _as_v(ram_v, parts):
    return VElement(ram_v, tuple(parts))


def embed_v_in_w(v, ram):
    """Regard an element of V as an element of W via ``z_i -> u^e`` per sheet."""
    if len(v.parts) != ram.r:
        raise ValueError("branch count mismatch")
    out = []
    for key in ram.keys:
        s = v.parts[key[0] - 1]
        e = ram.e(key)
        terms = {m * e: c for m, c in s.terms()}
        hi = None if s.hi is None else s.hi * e
        out.append(FractionalSeries.make(e, terms, hi))
    return WElement(ram, tuple(out))


def sheet_trace(s):
    """Trace of one sheet series: keep exponents divisible by e, times e."""
    e = s.e
    terms = {m // e: c * e for m, c in s.terms() if m % e == 0}
    hi = None if s.hi is None else -((-s.hi) // e)
    return FractionalSeries.make(1, terms, hi)


def trace(w):
    ram = w.ram
    branches = [None] * ram.r
    for key, s in w.items():
        t = sheet_trace(s)
        i = key[0] - 1
        branches[i] = t if branches[i] is None else branches[i] + t
    return _as_v(ram.v_data(), branches)


def pair_T2(w1, w2):
    """``sum_i res_{z_i} tr(w1 w2)``; refuses when depth cannot certify it."""
    tr = trace(w1 * w2)
    total = Q(0)
    for s in tr.parts:
        try:
            total += s.residue()
        except DepthError as exc:
            raise DepthError(f"T2 pairing not certified at this depth: {exc}") from None
    return total


def symmetrize(f):
    """``sum_{k<e} f(xi^k u)``: a genuine z-series (e = 1)."""
    e = f.e
    out = sum_tagged([substitute_root_scaling(f, k) for k in range(e)])
    if out.e != 1:  # every class sum vanishes off multiples of e
        raise AssertionError("symmetrization left fractional exponents")
    return out


def symmetrize_filter(f):
    """Same result as :func:`symmetrize` by the exponent-filter rule."""
    return sheet_trace(f)


# -- text format --------------------------------------------------------------

def format_w(w):
    lines = [w.ram.header()]
    lines += [s.to_literal() for s in w.parts]
    return "\n".join(lines)


_HEADER_RE = re.compile(r"^\s*E\s*=\s*(\[.*\])\s*$")


def parse_ram_header(line):
    m = _HEADER_RE.match(line)
    if not m:
        raise ValueError(f"malformed ramification header {line!r}")
    try:
        data = ast.literal_eval(m.group(1))
    except (ValueError, SyntaxError):
        raise ValueError(f"malformed ramification header {line!r}") from None
    return RamificationData.of(data)


def parse_w(text):
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty W element")
    ram = parse_ram_header(lines[0])
    if len(lines) - 1 != len(ram.keys):
        raise ValueError(f"expected {len(ram.keys)} series lines, found {len(lines) - 1}")
    parts = tuple(parse_series(ln) for ln in lines[1:])
    return WElement(ram, parts)

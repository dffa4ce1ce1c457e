"""Polynomials in the time variables, truncated by weighted degree.

A variable is a tuple ``(tag, a, b, i)``: ``tag`` separates independent time
sets (``"t"`` and ``"s"`` for the primed times of the bilinear identity),
``(a, b)`` is a component key of W and ``i >= 1`` is the weight.  A
:class:`TimePoly` drops every monomial of weighted degree ``> D``.
"""

from __future__ import annotations

import re

from .series import Q, format_scalar, parse_scalar

__all__ = ["TimePoly", "tvar", "parse_timepoly"]


def _weight(mono):
    return sum(v[3] * k for v, k in mono)


def _mono_mul(x, y):
    if not x:
        return y
    if not y:
        return x
    out = dict(x)
    for v, k in y:
        out[v] = out.get(v, 0) + k
    return tuple(sorted(out.items()))


class TimePoly:
    """Sparse ``{monomial: rational}`` with monomials as sorted ``((var, power), ...)``."""

    __slots__ = ("terms", "D")

    def __init__(self, terms, D):
        self.terms = {m: c for m, c in terms.items() if c and _weight(m) <= D}
        self.D = D

    # -- construction ---------------------------------------------------
    @classmethod
    def const(cls, c, D):
        return cls({(): Q(c)}, D)

    @classmethod
    def var(cls, v, D, c=1):
        return cls({((v, 1),): Q(c)}, D)

    # -- coercion -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, TimePoly):
            return other
        return TimePoly({(): Q(other)}, self.D)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, TimePoly):
            return self.terms == other.terms
        return self.terms == ({(): Q(other)} if other else {})

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, TimePoly):
            if not other:
                return self
            other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return TimePoly(out, min(self.D, other.D))

    __radd__ = __add__

    def __neg__(self):
        return TimePoly({m: -c for m, c in self.terms.items()}, self.D)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, TimePoly):
            if not other:
                return TimePoly({}, self.D)
            c = Q(other)
            return TimePoly({m: c * x for m, x in self.terms.items()}, self.D)
        D = min(self.D, other.D)
        out = {}
        ws = [(m, c, _weight(m)) for m, c in other.terms.items()]
        for m1, c1 in self.terms.items():
            w1 = _weight(m1)
            if w1 > D:
                continue
            for m2, c2, w2 in ws:
                if w1 + w2 > D:
                    continue
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return TimePoly(out, D)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, TimePoly):
            return self * other.inverse()
        return self * (1 / Q(other))

    def constant_term(self):
        return self.terms.get((), Q(0))

    def inverse(self):
        """Inverse in the truncated ring; needs a nonzero constant term."""
        c0 = self.constant_term()
        if not c0:
            raise ZeroDivisionError("not invertible at this depth")
        inv0 = 1 / c0
        nil = TimePoly({m: -c * inv0 for m, c in self.terms.items() if m}, self.D)
        out = TimePoly.const(1, self.D)
        power = TimePoly.const(1, self.D)
        for _ in range(self.D):
            power = power * nil
            if not power:
                break
            out = out + power
        return out * inv0

    def truncate(self, D):
        return TimePoly(self.terms, min(D, self.D))

    def min_weight(self):
        return min((_weight(m) for m in self.terms), default=None)

    def variables(self):
        return sorted({v for m in self.terms for v, _ in m})

    def map_vars(self, fn):
        """Rename variables with ``fn(var) -> var``."""
        out = {}
        for m, c in self.terms.items():
            nm = tuple(sorted((fn(v), k) for v, k in m))
            out[nm] = out.get(nm, 0) + c
        return TimePoly(out, self.D)

    def negate_times(self):
        """Substitute ``t -> -t`` for every variable."""
        return TimePoly({m: (-c if sum(k for _, k in m) % 2 else c) for m, c in self.terms.items()}, self.D)

    def coefficient(self, mono):
        return self.terms.get(mono, Q(0))

    def monomials(self):
        return sorted(self.terms, key=lambda m: (_weight(m), m))

    # -- text -----------------------------------------------------------
    def to_literal(self):
        if not self.terms:
            return "0"
        pieces = []
        for m in self.monomials():
            factors = [format_scalar(self.terms[m])]
            for v, k in m:
                name = _var_name(v)
                factors.append(name if k == 1 else f"{name}^{k}")
            pieces.append(" * ".join(factors))
        return " + ".join(pieces)

    def __repr__(self):
        return f"TimePoly({self.to_literal()}; D={self.D})"

    __str__ = to_literal


def tvar(a, b, i, tag="t"):
    return (tag, a, b, i)


def _var_name(v):
    tag, a, b, i = v
    return f"{tag}[{a},{b},{i}]"


def format_monomial(mono):
    if not mono:
        return "1"
    return "*".join(_var_name(v) if k == 1 else f"{_var_name(v)}^{k}" for v, k in mono)


_FACTOR_RE = re.compile(r"^([ts])\[(\d+),(\d+),(\d+)\](?:\^(\d+))?$")


def parse_timepoly(text, D):
    """Parse ``coeff * t[a,b,i]^k * ... + ...``."""
    text = text.strip()
    if text == "0":
        return TimePoly({}, D)
    out = {}
    for piece in re.split(r"\s\+\s", text):
        factors = [f.strip() for f in piece.split("*")]
        c = parse_scalar(factors[0])
        mono = {}
        for f in factors[1:]:
            mt = _FACTOR_RE.match(f)
            if not mt:
                raise ValueError(f"malformed time factor {f!r}")
            v = (mt.group(1), int(mt.group(2)), int(mt.group(3)), int(mt.group(4)))
            mono[v] = mono.get(v, 0) + int(mt.group(5) or 1)
        m = tuple(sorted(mono.items()))
        out[m] = out.get(m, 0) + c
    return TimePoly(out, D)

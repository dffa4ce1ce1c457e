"""Exact rationals and truncated Laurent series in a fractional variable.

A :class:`FractionalSeries` with ramification ``e`` lives in the ring of
Laurent series in ``u = z^(1/e)``.  Exponents are stored as integer
numerators ``m`` (the monomial ``u^m = z^(m/e)``).  Every series carries an
explicit truncation ``hi``: it is known modulo ``u^hi``.  ``hi = None`` marks
an exact series with finitely many terms.

Coefficients are normally :data:`Q` rationals, but the arithmetic is generic:
any ring element supporting ``+``, ``-``, ``*`` with Python ints and whose
truth value is false exactly at zero may be used (the time-polynomial ring of
:mod:`satohurwitz.timepoly` is the other instance).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

from gmpy2 import mpq

__all__ = [
    "Q",
    "DepthError",
    "FractionalSeries",
    "TaggedSeries",
    "parse_scalar",
    "format_scalar",
    "rational_sqrt",
    "root_sum",
]


def Q(x=0, d=None):
    """Build an exact rational (the kernel's scalar type)."""
    if d is not None:
        return mpq(x, d)
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, str):
        return parse_scalar(x)
    return mpq(x)


class DepthError(ValueError):
    """Raised when a truncation window cannot certify a requested value."""


_SCALAR_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")


def parse_scalar(text):
    m = _SCALAR_RE.match(text)
    if not m:
        raise ValueError(f"malformed rational {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) else 1
    if den == 0:
        raise ValueError("zero denominator")
    return mpq(num, den)


def format_scalar(c):
    if hasattr(c, "to_literal"):  # coefficients in a polynomial ring
        return c.to_literal()
    c = Q(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def rational_sqrt(c):
    """Return the non-negative rational square root of ``c`` or ``None``."""
    c = Q(c)
    if c < 0:
        return None
    p, q = int(c.numerator), int(c.denominator)
    sp, sq = isqrt(p), isqrt(q)
    if sp * sp == p and sq * sq == q:
        return mpq(sp, sq)
    return None


def _is_zero(c):
    return not c


def _inverse(c):
    inv = getattr(c, "inverse", None)
    if inv is not None:
        return inv()
    if not c:
        raise ZeroDivisionError("not invertible at this depth")
    return 1 / Q(c)


def _min_hi(*his):
    known = [h for h in his if h is not None]
    return min(known) if known else None


@dataclass(frozen=True)
class FractionalSeries:
    """Laurent series in ``u = z^(1/e)``: ``sum coeffs[k] u^(lo+k) + O(u^hi)``."""

    e: int
    lo: int
    coeffs: tuple
    hi: int | None

    def __post_init__(self):
        if self.e < 1:
            raise ValueError("ramification index must be positive")
        if self.hi is not None:
            if self.lo > self.hi:
                raise ValueError("lo must not exceed hi")
            if len(self.coeffs) != self.hi - self.lo:
                raise ValueError("coefficient count must equal hi - lo")

    # -- construction -------------------------------------------------
    @classmethod
    def make(cls, e, terms, hi=None):
        """Build from a ``{numerator: coefficient}`` mapping, dropping zeros."""
        items = {m: (Q(c) if isinstance(c, (int, Fraction)) else c) for m, c in terms.items() if not _is_zero(c)}
        if hi is not None:
            items = {m: c for m, c in items.items() if m < hi}
        if not items:
            return cls.zero(e, hi)
        lo = min(items)
        top = hi if hi is not None else max(items) + 1
        coeffs = tuple(items.get(m, 0) for m in range(lo, top))
        return cls(e, lo, coeffs, hi)

    @classmethod
    def zero(cls, e, hi=None):
        if hi is None:
            return cls(e, 0, (), None)
        return cls(e, hi, (), hi)

    @classmethod
    def monomial(cls, e, m, c=1, hi=None):
        return cls.make(e, {m: Q(c) if isinstance(c, (int, Fraction)) else c}, hi)

    @classmethod
    def one(cls, e=1):
        return cls.monomial(e, 0)

    # -- inspection ---------------------------------------------------
    @property
    def exact(self):
        return self.hi is None

    def terms(self):
        """Nonzero ``(numerator, coefficient)`` pairs in increasing order."""
        return [(self.lo + k, c) for k, c in enumerate(self.coeffs) if not _is_zero(c)]

    def as_dict(self):
        return dict(self.terms())

    def is_zero(self):
        """True when every tracked coefficient vanishes (zero at this depth)."""
        return all(_is_zero(c) for c in self.coeffs)

    def valuation(self):
        for k, c in enumerate(self.coeffs):
            if not _is_zero(c):
                return self.lo + k
        return None

    def top(self):
        """Largest tracked exponent with a nonzero coefficient."""
        for k in range(len(self.coeffs) - 1, -1, -1):
            if not _is_zero(self.coeffs[k]):
                return self.lo + k
        return None

    def coefficient(self, m):
        if self.hi is not None and m >= self.hi:
            raise DepthError(f"exponent {m}/{self.e} lies beyond O(z^{self.hi}/{self.e})")
        k = m - self.lo
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return 0

    def known_below(self, m):
        return self.hi is None or m < self.hi

    def _lo_bound(self):
        v = self.valuation()
        if v is not None:
            return v
        return self.hi if self.hi is not None else 0

    # -- arithmetic ---------------------------------------------------
    def _check(self, other):
        if not isinstance(other, FractionalSeries):
            raise TypeError("expected a FractionalSeries")
        if other.e != self.e:
            raise ValueError(f"mismatched ramification index {self.e} vs {other.e}")

    def __add__(self, other):
        if not isinstance(other, FractionalSeries):
            return self + FractionalSeries.monomial(self.e, 0, other)
        self._check(other)
        hi = _min_hi(self.hi, other.hi)
        out = {}
        for m, c in self.terms():
            out[m] = c
        for m, c in other.terms():
            out[m] = out[m] + c if m in out else c
        return FractionalSeries.make(self.e, out, hi)

    __radd__ = __add__

    def __neg__(self):
        return FractionalSeries(self.e, self.lo, tuple(-c for c in self.coeffs), self.hi)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        if _is_zero(c):
            return FractionalSeries.zero(self.e, self.hi)
        return FractionalSeries(self.e, self.lo, tuple(c * x for x in self.coeffs), self.hi)

    def shift(self, k):
        """Multiply by ``u^k``."""
        hi = None if self.hi is None else self.hi + k
        return FractionalSeries(self.e, self.lo + k, self.coeffs, hi)

    def __mul__(self, other):
        if not isinstance(other, FractionalSeries):
            return self.scale(other)
        self._check(other)
        a, b = self, other
        va, vb = a._lo_bound(), b._lo_bound()
        cands = []
        if b.hi is not None:
            cands.append(va + b.hi)
        if a.hi is not None:
            cands.append(vb + a.hi)
        hi = min(cands) if cands else None
        ta, tb = a.terms(), b.terms()
        if hi is not None:
            ta = [(m, c) for m, c in ta if m + vb < hi]
            tb = [(m, c) for m, c in tb if m + va < hi]
        out = {}
        for ma, ca in ta:
            for mb, cb in tb:
                m = ma + mb
                if hi is not None and m >= hi:
                    break
                p = ca * cb
                if m in out:
                    out[m] = out[m] + p
                else:
                    out[m] = p
        return FractionalSeries.make(self.e, out, hi)

    def __rmul__(self, other):
        return self.scale(other)

    def mul_below(self, other, hi):
        """Product known only below ``u^hi`` (cheaper when ``hi`` is small)."""
        va, vb = self._lo_bound(), other._lo_bound()
        a = self if self.hi is not None and self.hi <= hi - vb else self.truncate_soft(hi - vb)
        b = other if other.hi is not None and other.hi <= hi - va else other.truncate_soft(hi - va)
        out = a * b
        if out.hi is None or out.hi > hi:
            out = out.truncate(hi)
        return out

    def truncate_soft(self, hi):
        """Truncate at ``hi`` or keep the current (smaller) truncation."""
        if self.hi is not None and self.hi <= hi:
            return self
        return self.truncate(hi)

    def truncate(self, hi):
        if self.hi is not None and hi > self.hi:
            raise DepthError("cannot extend a truncated series")
        return FractionalSeries.make(self.e, self.as_dict(), hi)

    def invert(self, hi=None):
        """Multiplicative inverse, to the maximal deducible depth.

        Exact inputs with more than one term have infinite inverses, so a
        target truncation ``hi`` is then required.
        """
        v = self.valuation()
        if v is None:
            raise DepthError("not invertible at this depth")
        ts = self.terms()
        if self.hi is None and len(ts) == 1:
            return FractionalSeries.monomial(self.e, -v, _inverse(ts[0][1]))
        rel = (self.hi - v) if self.hi is not None else None
        if hi is not None:
            rel = hi + v if rel is None else min(rel, hi + v)
        if rel is None:
            raise DepthError("a target truncation is required to invert an exact series")
        a = [self.coefficient(v + k) if self.known_below(v + k) else 0 for k in range(rel)]
        c0inv = _inverse(a[0])
        b = [c0inv]
        for k in range(1, rel):
            s = 0
            for i in range(1, k + 1):
                if not _is_zero(a[i]):
                    s = s + a[i] * b[k - i]
            b.append(-(s * c0inv))
        return FractionalSeries.make(self.e, {k - v: c for k, c in enumerate(b)}, rel - v)

    def sqrt_unit(self, hi=None):
        """Square root with positive leading coefficient.

        The leading exponent numerator must be even and the leading
        coefficient must be a rational square.
        """
        v = self.valuation()
        if v is None:
            raise DepthError("zero at this depth has no unit square root")
        if v % 2:
            raise ValueError("leading exponent has no square root in this variable")
        c0 = self.coefficient(v)
        s0 = rational_sqrt(c0)
        if s0 is None or s0 == 0:
            raise ValueError(f"leading coefficient {format_scalar(c0)} has no rational square root")
        rel = (self.hi - v) if self.hi is not None else None
        if hi is not None:
            rel = hi - v // 2 if rel is None else min(rel, hi - v // 2)
        if rel is None:
            ts = self.terms()
            if len(ts) == 1:
                return FractionalSeries.monomial(self.e, v // 2, s0)
            raise DepthError("a target truncation is required for this square root")
        a = [self.coefficient(v + k) if self.known_below(v + k) else 0 for k in range(rel)]
        inv2 = 1 / (2 * s0)
        b = [s0]
        for k in range(1, rel):
            s = a[k]
            for i in range(1, k):
                s = s - b[i] * b[k - i]
            b.append(s * inv2)
        half = v // 2
        return FractionalSeries.make(self.e, {k + half: c for k, c in enumerate(b)}, rel + half)

    def power(self, k, hi=None):
        if k == 0:
            return FractionalSeries.one(self.e)
        base = self if k > 0 else self.invert(hi)
        out = None
        for _ in range(abs(k)):
            out = base if out is None else out * base
        return out

    def residue(self):
        """Coefficient of ``z^(-1)``, i.e. of ``u^(-e)``."""
        return self.coefficient(-self.e)

    def derivative(self):
        """``d/du`` in the sheet variable."""
        terms = {m - 1: c * m for m, c in self.terms() if m != 0}
        hi = None if self.hi is None else self.hi - 1
        return FractionalSeries.make(self.e, terms, hi)

    def compose(self, ubar):
        """Substitute ``u -> ubar`` where ``ubar`` has valuation exactly 1."""
        if ubar.e != self.e:
            raise ValueError("mismatched ramification index")
        if ubar.valuation() != 1:
            raise ValueError("substitution must have valuation 1")
        rho = ubar.shift(-1)
        ts = self.terms()
        hi = self.hi
        if rho.hi is not None and ts:
            bound = ts[0][0] + rho.hi
            hi = bound if hi is None else min(hi, bound)
        elif rho.hi is None and len(rho.terms()) > 1 and hi is None and ts and ts[0][0] < 0:
            raise DepthError("exact series composed with an infinite substitution needs a truncation")
        if not ts:
            return FractionalSeries.zero(self.e, hi)
        out = FractionalSeries.zero(self.e, hi)
        mmin = ts[0][0]
        cache = {0: FractionalSeries.one(self.e)}
        rel = None if hi is None else hi - mmin

        def rho_pow(k):
            if k not in cache:
                if k > 0:
                    cache[k] = _trunc(rho_pow(k - 1) * rho, rel)
                else:
                    if -1 not in cache:
                        cache[-1] = rho.invert(rel)
                    cache[k] = _trunc(rho_pow(k + 1) * cache[-1], rel)
            return cache[k]

        for m, c in ts:
            if hi is not None and m >= hi:
                break
            out = out + rho_pow(m).shift(m).scale(c)
        return out if hi is None else out.truncate(hi) if out.hi is None or out.hi > hi else out

    # -- text -----------------------------------------------------------
    def to_literal(self):
        if any(not isinstance(c, (int, mpq, Fraction)) for _, c in self.terms()):
            raise TypeError("literal syntax is defined for rational coefficients only")
        body = " + ".join(f"{format_scalar(c)}*z^{m}/{self.e}" for m, c in self.terms()) or "0"
        tail = f"; O(z^{self.hi}/{self.e})" if self.hi is not None else ""
        return f"e={self.e}; {body}{tail}"

    @classmethod
    def from_literal(cls, text):
        return parse_series(text)

    def __str__(self):
        try:
            return self.to_literal()
        except TypeError:
            body = " + ".join(f"({c})*u^{m}" for m, c in self.terms()) or "0"
            tail = f" + O(u^{self.hi})" if self.hi is not None else ""
            return f"[e={self.e}] {body}{tail}"


def _trunc(s, rel):
    if rel is None or (s.hi is not None and s.hi <= rel):
        return s
    return s.truncate(rel)


_TERM_RE = re.compile(r"^\s*([+-]?\s*\d+(?:\s*/\s*\d+)?)\s*\*\s*z\s*\^\s*([+-]?\d+)\s*/\s*(\d+)\s*$")
_HI_RE = re.compile(r"^\s*O\s*\(\s*z\s*\^\s*([+-]?\d+)\s*/\s*(\d+)\s*\)\s*$")
_E_RE = re.compile(r"^\s*e\s*=\s*(\d+)\s*$")


def parse_series(text):
    """Parse ``e=<int>; <c>*z^<m>/<e> + ... ; O(z^<hi>/<e>)`` (the O part is optional)."""
    parts = text.split(";")
    if len(parts) not in (2, 3):
        raise ValueError(f"malformed series literal {text!r}")
    m = _E_RE.match(parts[0])
    if not m:
        raise ValueError(f"malformed ramification header in {text!r}")
    e = int(m.group(1))
    if e < 1:
        raise ValueError("ramification index must be positive")
    terms = {}
    body = parts[1].strip()
    if body != "0":
        # split on '+' that separate terms, keeping signs attached to coefficients
        pieces = re.split(r"\+(?=\s*[+-]?\s*\d)", body)
        for piece in pieces:
            tm = _TERM_RE.match(piece.replace(" ", ""))
            if not tm:
                raise ValueError(f"malformed term {piece.strip()!r}")
            if int(tm.group(3)) != e:
                raise ValueError(f"term {piece.strip()!r} does not use denominator {e}")
            exp = int(tm.group(2))
            c = parse_scalar(tm.group(1).replace(" ", ""))
            terms[exp] = terms.get(exp, 0) + c
    hi = None
    if len(parts) == 3:
        hm = _HI_RE.match(parts[2])
        if not hm or int(hm.group(2)) != e:
            raise ValueError(f"malformed truncation in {text!r}")
        hi = int(hm.group(1))
        if any(k >= hi for k, c in terms.items() if c):
            raise ValueError("term beyond the declared truncation")
    return FractionalSeries.make(e, terms, hi)


# -- roots of unity without complex numbers ---------------------------------

def _poly_divmod(num, den):
    """Integer polynomial division (coefficient lists, lowest degree first)."""
    num = list(num)
    out = [0] * max(len(num) - len(den) + 1, 1)
    lead = den[-1]
    for k in range(len(num) - len(den), -1, -1):
        q = num[k + len(den) - 1] // lead
        out[k] = q
        for i, d in enumerate(den):
            num[k + i] -= q * d
    while len(num) > 1 and num[-1] == 0:
        num.pop()
    return out, num


_CYCLO = {}


def cyclotomic(e):
    """Coefficients of the e-th cyclotomic polynomial."""
    if e not in _CYCLO:
        poly = [-1] + [0] * (e - 1) + [1]
        for d in range(1, e):
            if e % d == 0:
                poly, _ = _poly_divmod(poly, cyclotomic(d))
        _CYCLO[e] = poly
    return _CYCLO[e]


def root_sum(e, classes):
    """Exact value of ``sum_c n_c xi^c`` for a primitive e-th root ``xi``.

    ``classes`` maps an exponent class ``c`` (mod e) to a rational weight.
    Raises ``ValueError`` if the sum is irrational.
    """
    vec = [Q(0)] * e
    for c, w in classes.items():
        vec[c % e] += w
    phi = cyclotomic(e)
    deg = len(phi) - 1
    # reduce modulo the monic cyclotomic polynomial
    for k in range(e - 1, deg - 1, -1):
        q = vec[k]
        if q:
            for i, d in enumerate(phi):
                vec[k - deg + i] -= q * d
    if any(vec[1:deg]):
        raise ValueError("root-of-unity sum is not rational")
    return vec[0]


@dataclass(frozen=True)
class TaggedSeries:
    """A series whose coefficient at ``u^m`` is tagged by a root class.

    Represents ``f(xi^k u)``: the coefficient at ``u^m`` is ``xi^(m k) c_m``.
    """

    e: int
    k: int
    entries: tuple  # ((m, class, coefficient), ...)
    hi: int | None


def substitute_root_scaling(a, k):
    """Relabel ``u -> xi^k u`` symbolically by tagging exponent classes."""
    if not 0 <= k < a.e:
        raise ValueError("root index out of range")
    entries = tuple((m, (m * k) % a.e, c) for m, c in a.terms())
    return TaggedSeries(a.e, k, entries, a.hi)


def sum_tagged(tagged):
    """Sum tagged series, evaluating each root-class combination exactly.

    Exponents are returned over ``z`` (e = 1) when every surviving exponent
    numerator is divisible by ``e``; otherwise over ``u``.
    """
    if not tagged:
        raise ValueError("nothing to sum")
    e = tagged[0].e
    his = [t.hi for t in tagged]
    hi = _min_hi(*his)
    per = {}
    for t in tagged:
        for m, c, coef in t.entries:
            if hi is not None and m >= hi:
                continue
            per.setdefault(m, {}).setdefault(c, 0)
            per[m][c] = per[m][c] + coef
    out = {}
    for m, cls in per.items():
        val = root_sum(e, cls)
        if val:
            out[m] = val
    if all(m % e == 0 for m in out):
        zhi = None if hi is None else -((-hi) // e)
        return FractionalSeries.make(1, {m // e: c for m, c in out.items()}, zhi)
    return FractionalSeries.make(e, out, hi)


__all__ += ["parse_series", "substitute_root_scaling", "sum_tagged", "cyclotomic"]

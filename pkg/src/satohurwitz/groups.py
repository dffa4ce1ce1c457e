"""Groups acting on W: homotheties, sheet substitutions and vector fields.

* multiplication by a unit ``gamma`` of W (the group Gamma_W),
* substitutions ``u -> ubar(u)`` lifting a change of variable ``z -> g(z)``
  of V (the group G_V^W), with an explicit root-of-unity selector,
* vector fields ``f(z) d/dz`` on V lifted to derivations of W.
"""

from __future__ import annotations

from dataclasses import dataclass

from .report import Report
from .series import DepthError, FractionalSeries, Q, format_scalar, parse_series
from .walgebra import RamificationData, WElement, sheet_trace

__all__ = [
    "act_gamma",
    "is_gamma_element",
    "GVElement",
    "GVWElement",
    "lift_automorphism",
    "apply_substitution",
    "check_trace_equivariance",
    "DerivationW",
    "lift_vector_field",
    "bracket",
    "unit_power",
    "rational_root",
    "parse_vector_field",
]


def act_gamma(gamma, w):
    """Homothety: componentwise product."""
    return gamma * w


def is_gamma_element(gamma):
    """Every component is a unit whose polar part has nilpotent coefficients."""
    for s in gamma.parts:
        c0 = s.coefficient(0) if s.known_below(0) else 0
        if not c0:
            return False
        if getattr(c0, "constant_term", None) is not None and not c0.constant_term():
            return False
        for m, c in s.terms():
            if m < 0:
                ct = getattr(c, "constant_term", None)
                if ct is None or ct():
                    return False
    return True


# -- roots ----------------------------------------------------------------------

def rational_root(c, e):
    """Positive rational ``e``-th root of ``c > 0`` or ``None``."""
    from gmpy2 import iroot

    c = Q(c)
    if c <= 0:
        return None
    p, q = c.numerator, c.denominator
    rp, okp = iroot(p, e)
    rq, okq = iroot(q, e)
    if okp and okq:
        return Q(int(rp), int(rq))
    return None


def unit_power(h, alpha, hi):
    """``h^alpha`` for a series with ``h(0) = 1`` and valuation 0, to ``O(u^hi)``."""
    if h.valuation() != 0 or h.coefficient(0) != 1:
        raise ValueError("unit_power expects constant term 1")
    a = [h.coefficient(k) if h.known_below(k) else None for k in range(hi)]
    if any(x is None for x in a):
        raise DepthError("series not known to the requested depth")
    alpha = Q(alpha)
    b = [Q(1)]
    # b' h = alpha h' b, coefficientwise
    for k in range(1, hi):
        s = Q(0)
        for j in range(1, k + 1):
            if a[j]:
                s += (alpha * j - (k - j)) * a[j] * b[k - j]
        b.append(s / k)
    return FractionalSeries.make(h.e, dict(enumerate(b)), hi)


# -- G_V and its lift ---------------------------------------------------------------

@dataclass(frozen=True)
class GVElement:
    """Per-branch changes of variable ``z -> g_i(z)`` (valuation 1) and a branch permutation."""

    maps: tuple
    perm: tuple = ()

    def __post_init__(self):
        for g in self.maps:
            if g.e != 1:
                raise ValueError("branch maps are series in z")
            if g.valuation() != 1:
                raise ValueError("each branch map must have valuation exactly 1")
        if self.perm and sorted(self.perm) != list(range(len(self.maps))):
            raise ValueError("perm must be a permutation of the branches")

    @property
    def is_identity_perm(self):
        return not self.perm or list(self.perm) == list(range(len(self.maps)))

    @classmethod
    def identity(cls, r):
        return cls(tuple(FractionalSeries.monomial(1, 1) for _ in range(r)))


@dataclass(frozen=True)
class GVWElement:
    """Sheet substitutions ``u -> ubar(u)`` over a base change of variable.

    ``root_class[key]`` records which ``e``-th root of the leading scalar was
    taken (0 for the positive root, ``e/2`` for its negative).
    """

    ram: RamificationData
    base: GVElement
    sheets: tuple
    root_class: tuple

    def sheet(self, key):
        return self.sheets[self.ram.keys.index(key)]

    @classmethod
    def identity(cls, ram):
        sheets = tuple(FractionalSeries.monomial(ram.e(k), 1) for k in ram.keys)
        return cls(ram, GVElement.identity(ram.r), sheets, tuple(0 for _ in ram.keys))

    @classmethod
    def from_substitution(cls, ram, sheets):
        """Wrap hand-built sheet substitutions; the base map is read off by the trace rule."""
        maps = []
        for i in range(ram.r):
            key = next(k for k in ram.keys if k[0] == i + 1)
            s = sheets[ram.keys.index(key)]
            e = ram.e(key)
            maps.append(sheet_trace(_power_trunc(s, e)).scale(Q(1, e)))
        return cls(ram, GVElement(tuple(maps)), tuple(sheets), tuple(0 for _ in ram.keys))

    def compose_after(self, other):
        """Automorphism ``self o other`` (apply ``other`` first)."""
        sheets = tuple(b.compose(a) for a, b in zip(self.sheets, other.sheets))
        maps = tuple(g1.compose(g2) for g1, g2 in zip(other.base.maps, self.base.maps))
        rc = tuple((x + y) % self.ram.e(k) for x, y, k in zip(self.root_class, other.root_class, self.ram.keys))
        return GVWElement(self.ram, GVElement(maps), sheets, rc)

    def inverse(self, hi):
        """Inverse automorphism, sheet series known below ``u^hi``."""
        sheets = tuple(_reversion(s, hi) for s in self.sheets)
        maps = tuple(_reversion(g, -((-hi) // 1)) for g in self.base.maps)
        rc = tuple((-x) % self.ram.e(k) for x, k in zip(self.root_class, self.ram.keys))
        return GVWElement(self.ram, GVElement(maps), sheets, rc)


def _power_trunc(s, k):
    out = FractionalSeries.one(s.e)
    for _ in range(k):
        out = out * s
    return out


def _reversion(s, hi):
    """Series ``v`` with ``s(v(u)) = u`` below ``u^hi``."""
    rho = s.shift(-1)
    c1 = rho.coefficient(0)
    v = FractionalSeries.monomial(s.e, 1, 1 / Q(c1), hi)
    for _ in range(hi):
        rv = rho.compose(v)
        nv = FractionalSeries.monomial(s.e, 1).mul_below(rv.invert(hi), hi)
        nv = nv.truncate_soft(hi)
        if nv == v:
            break
        v = nv
    return v


def lift_automorphism(g, ram, root_class=None, hi=None):
    """Lift ``z_i -> g_i(z_i)`` to sheet substitutions with ``ubar^e = g(u^e)``.

    ``root_class`` maps a component key to 0 (positive root) or ``e/2`` (the
    negative root, ``e`` even).  Any other class needs an irrational root of
    unity and is rejected, as is a leading scalar without a rational root.
    """
    if not g.is_identity_perm:
        raise ValueError("lifts are defined for the identity branch permutation")
    if len(g.maps) != ram.r:
        raise ValueError("one branch map per branch is required")
    root_class = dict(root_class or {})
    sheets, classes = [], []
    for key in ram.keys:
        e = ram.e(key)
        gi = g.maps[key[0] - 1]
        s = gi.shift(-1)  # g = z * s
        c0 = s.coefficient(0)
        k = root_class.get(key, 0) % e
        if k not in (0,) and not (e % 2 == 0 and k == e // 2):
            raise ValueError(f"mu_E obstruction on sheet {key}: root class {k} needs an irrational root of unity")
        if e == 1:
            sheets.append(gi)
            classes.append(0)
            continue
        root = rational_root(c0, e) if c0 > 0 else None
        if root is None:
            raise ValueError(f"mu_E obstruction on sheet {key}: {format_scalar(c0)} has no rational {e}-th root")
        if k:
            root = -root
        h = s.scale(1 / c0)
        # rho(u) = root * h(u^e)^(1/e)
        if h.hi is None and len(h.terms()) == 1:
            rho_z = FractionalSeries.one(1)
        else:
            zhi = h.hi if h.hi is not None else None
            if hi is not None:
                want = -((-(hi - 1)) // e)
                zhi = want if zhi is None else min(zhi, want)
            if zhi is None:
                raise DepthError("a truncation is required to lift a non-monomial map")
            rho_z = unit_power(h, Q(1, e), zhi)
        terms = {m * e + 1: c * root for m, c in rho_z.terms()}
        uhi = None if rho_z.hi is None else rho_z.hi * e + 1
        sheets.append(FractionalSeries.make(e, terms, uhi))
        classes.append(k)
    return GVWElement(ram, g, tuple(sheets), tuple(classes))


def apply_substitution(gbar, w):
    """Substitute ``u -> ubar(u)`` in every sheet series of ``w``."""
    if w.ram != gbar.ram:
        raise ValueError("mismatched ramification data")
    return WElement(w.ram, tuple(s.compose(ub) for s, ub in zip(w.parts, gbar.sheets)))


def check_trace_equivariance(gbar, window=20):
    """Compare ``tr(gbar(u^l))`` with ``g(tr(u^l))`` for ``|l| <= window`` per sheet."""
    rep = Report("check_trace_equivariance")
    rep.data["window"] = window
    ram = gbar.ram
    for key, ub in zip(ram.keys, gbar.sheets):
        e = ram.e(key)
        g = gbar.base.maps[key[0] - 1]
        prec = 2 * window + 2
        if ub.hi is None and len(ub.terms()) > 1:
            ub = ub.truncate(prec * e + 1)
        if g.hi is None and len(g.terms()) > 1:
            g = g.truncate(prec + 1)
        for l in range(-window, window + 1):
            lhs = sheet_trace(FractionalSeries.monomial(e, l).compose(ub))
            if l % e == 0:
                rhs = FractionalSeries.monomial(1, l // e, e).compose(g)
            else:
                rhs = FractionalSeries.zero(1)
            diff = (lhs - rhs).terms()
            if diff:
                m, c = diff[0]
                rep.fail(f"sheet {key}, l = {l}: traces differ at z^{m} (difference {format_scalar(c)})")
                return rep
    return rep


# -- vector fields --------------------------------------------------------------

@dataclass(frozen=True)
class DerivationW:
    """Vector fields ``f_i(z) d/dz_i`` on V and their lift to W."""

    ram: RamificationData
    fields: tuple

    def sheet_image_of_u(self, key):
        """``D(u) = (1/e) u^(1-e) f_i(u^e)``."""
        e = self.ram.e(key)
        f = self.fields[key[0] - 1]
        terms = {m * e + 1 - e: c / e for m, c in f.terms()}
        hi = None if f.hi is None else f.hi * e + 1 - e
        return FractionalSeries.make(e, terms, hi)

    def apply(self, w):
        """``D(w)``: chain rule on every sheet."""
        parts = []
        for key, s in w.items():
            parts.append(s.derivative() * self.sheet_image_of_u(key))
        return WElement(w.ram, tuple(parts))

    def apply_v(self, v):
        """The vector field on V: ``f_i * d/dz``."""
        parts = tuple(h.derivative() * f for f, h in zip(self.fields, v.parts))
        return WElement(v.ram, parts)

    def __add__(self, other):
        return DerivationW(self.ram, tuple(a + b for a, b in zip(self.fields, other.fields)))

    def scale(self, c):
        return DerivationW(self.ram, tuple(a.scale(c) for a in self.fields))

    def is_zero(self):
        return all(f.is_zero() for f in self.fields)


def lift_vector_field(fields, ram):
    """Lift per-branch fields ``f_i`` (series in ``z``) to a derivation of W."""
    fields = tuple(fields)
    if len(fields) != ram.r:
        raise ValueError("one vector field per branch is required")
    for f in fields:
        if f.e != 1:
            raise ValueError("vector field coefficients are series in z")
    return DerivationW(ram, fields)


def bracket(D1, D2):
    """Branchwise ``[f1 d, f2 d] = (f1 f2' - f2 f1') d``."""
    out = []
    for f1, f2 in zip(D1.fields, D2.fields):
        out.append(f1 * f2.derivative() - f2 * f1.derivative())
    return DerivationW(D1.ram, tuple(out))


def monomial_field(ram, branch, k, c=1):
    """The field ``c z^k d/dz`` on one branch, zero elsewhere."""
    fields = [FractionalSeries.zero(1) for _ in range(ram.r)]
    fields[branch - 1] = FractionalSeries.monomial(1, k, c)
    return DerivationW(ram, tuple(fields))


def parse_vector_field(text, ram):
    """Lines ``f_i = <series literal>``; missing branches are zero."""
    fields = [FractionalSeries.zero(1) for _ in range(ram.r)]
    for no, ln in enumerate(text.splitlines(), 1):
        if not ln.strip() or ln.lstrip().startswith("#"):
            continue
        name, sep, body = ln.partition("=")
        name = name.strip()
        if not sep or not name.startswith("f_"):
            raise ValueError(f"line {no}: expected 'f_i = <series>'")
        i = int(name[2:])
        if not 1 <= i <= ram.r:
            raise ValueError(f"line {no}: branch {i} out of range")
        fields[i - 1] = parse_series(body.strip())
    return lift_vector_field(fields, ram)

"""Grassmannian points of explicit branched covers.

Two families of covers are expanded exactly over the rationals:

* :class:`LaurentMonomialCover` ``w -> w^n`` of the projective line, marked
  over ``z = 0`` and ``z = oo``; sheet variables ``u1 = w`` and ``u2 = 1/w``.
* :class:`HyperellipticCover` ``y^2 = c (z - a1)...(z - a4)``, marked over the
  four branch points.  Near ``a_j`` the chart is ``z - a_j = t^2 / c_j`` with
  ``c_j = c * prod_{k != j} (a_j - a_k)``, which makes ``y = t (1 + ...)``.

:class:`GeneralSpec` takes arbitrary generators and closes them under
multiplication.
"""

from __future__ import annotations

from dataclasses import dataclass

from .grassmannian import (
    SlotOrdering,
    echelonize,
    index,
    intersect_V,
    is_algebra_point,
    is_hurwitz_point,
    trace_point,
)
from .linalg import Echelon
from .report import Report
from .series import DepthError, FractionalSeries, Q, format_scalar, parse_scalar, parse_series
from .walgebra import RamificationData, WElement, parse_ram_header

__all__ = [
    "hurwitz_genus",
    "LaurentMonomialCover",
    "HyperellipticCover",
    "GeneralSpec",
    "LaurentFunction",
    "HyperFunction",
    "expand_function",
    "build_point",
    "verify_krichever",
    "parse_cover",
    "format_cover",
    "catalog",
]


def hurwitz_genus(n, g, r, rbar):
    """Genus of the cover: ``n (g - 1) + (r n - rbar) / 2 + 1``."""
    if (r * n - rbar) % 2:
        raise ValueError("r*n - rbar must be even")
    return n * (g - 1) + (r * n - rbar) // 2 + 1


# -- cover data -------------------------------------------------------------------

@dataclass(frozen=True)
class LaurentMonomialCover:
    n: int

    @property
    def ram(self):
        return RamificationData.of([[self.n], [self.n]])

    @property
    def base_genus(self):
        return 0

    @property
    def genus(self):
        return 0

    @property
    def label(self):
        return f"laurent-n{self.n}"


@dataclass(frozen=True)
class HyperellipticCover:
    a: tuple = (Q(0), Q(1), Q(2), Q(3))
    c: object = Q(1)

    def __post_init__(self):
        a = tuple(Q(x) for x in self.a)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "c", Q(self.c))
        if len(a) != 4 or len(set(a)) != 4:
            raise ValueError("four distinct branch points are required")
        if not self.c:
            raise ValueError("leading constant must be nonzero")

    @property
    def ram(self):
        return RamificationData.of([[2], [2], [2], [2]])

    @property
    def base_genus(self):
        return 0

    @property
    def genus(self):
        return 1

    def chart_constant(self, j):
        """``c_j = c * prod_{k != j} (a_j - a_k)``; the chart is ``z - a_j = t^2 / c_j``."""
        out = self.c
        for k, ak in enumerate(self.a):
            if k != j:
                out *= self.a[j] - ak
        return out

    def on_curve(self, z0, y0):
        val = self.c
        for ak in self.a:
            val *= Q(z0) - ak
        return Q(y0) ** 2 == val

    @property
    def label(self):
        return "hyperelliptic"


@dataclass(frozen=True)
class GeneralSpec:
    """Arbitrary generators; ``declared = (gbar, g)`` is checked against the genus formula."""

    ram: RamificationData
    generators: tuple
    declared: tuple = (0, 0)
    name: str = "general"

    @property
    def genus(self):
        return self.declared[0]

    @property
    def base_genus(self):
        return self.declared[1]

    @property
    def label(self):
        return self.name


# -- functions on the covers ---------------------------------------------------------

@dataclass(frozen=True)
class LaurentFunction:
    """``sum c_k w^k * prod (w - b)^(-d_b)``."""

    coeffs: tuple  # ((k, c), ...)
    poles: tuple = ()  # ((b, d), ...)

    @classmethod
    def of(cls, coeffs, poles=()):
        return cls(tuple(sorted((int(k), Q(c)) for k, c in dict(coeffs).items())),
                   tuple(sorted((Q(b), int(d)) for b, d in dict(poles).items())))

    @classmethod
    def power(cls, k):
        return cls.of({k: 1})


@dataclass(frozen=True)
class HyperFunction:
    """``sum c * y^ey * prod (z - p)^(-m_p)`` with ``ey`` in ``{0, 1}``."""

    terms: tuple  # ((ey, ((p, m), ...)), c)

    @classmethod
    def of(cls, mapping):
        items = []
        for (ey, poles), c in mapping.items():
            poles = tuple(sorted((Q(p), int(m)) for p, m in dict(poles).items() if m))
            items.append(((int(ey), poles), Q(c)))
        return cls(tuple(sorted(items)))

    @classmethod
    def monomial(cls, ey=0, poles=(), c=1):
        return cls.of({(ey, tuple(dict(poles).items())): c})


def _laurent_variable(spec, branch, hi):
    n = spec.n
    if branch == 1:
        return FractionalSeries.monomial(n, 1)
    return FractionalSeries.monomial(n, -1)


def expand_function(spec, f, H):
    """Expansions of ``f`` in every sheet variable, known below level ``H``."""
    ram = spec.ram
    L = ram.lcm
    if isinstance(spec, LaurentMonomialCover):
        if not isinstance(f, LaurentFunction):
            raise TypeError("Laurent covers expand LaurentFunction values")
        parts = []
        for key in ram.keys:
            hi = -((-H) // (L // ram.e(key)))
            w = _laurent_variable(spec, key[0], hi)
            acc = FractionalSeries.zero(ram.e(key))
            for k, c in f.coeffs:
                acc = acc + FractionalSeries.monomial(ram.e(key), k if key[0] == 1 else -k, c)
            for b, d in f.poles:
                if b == 0:
                    raise ValueError("poles at w = 0 belong in the Laurent part")
                base = w - FractionalSeries.monomial(ram.e(key), 0, b)
                for _ in range(d):
                    lo = acc.valuation() or 0
                    inv = base.invert(hi - min(lo, 0) + 2)
                    acc = _mul_to(acc, inv, hi)
            parts.append(acc.truncate(hi) if acc.hi is None or acc.hi > hi else acc)
        out = WElement(ram, tuple(parts))
        if out.known_level() is not None and out.known_level() < H:
            raise DepthError("expansion lost precision; raise the working depth")
        return out
    if isinstance(spec, HyperellipticCover):
        if not isinstance(f, HyperFunction):
            raise TypeError("hyperelliptic covers expand HyperFunction values")
        parts = []
        for idx, key in enumerate(ram.keys):
            parts.append(_expand_hyper_branch(spec, idx, f, H))
        return WElement(ram, tuple(parts))
    raise TypeError("expand_function needs a Laurent or hyperelliptic cover")


def _expand_hyper_branch(spec, j, f, hi):
    cj = spec.chart_constant(j)
    aj = spec.a[j]
    pole = max((sum(m for p, m in poles if p == aj) for (_, poles), _ in f.terms), default=0)
    work = hi + 2 * pole + 2  # the pole at a_j is an exact monomial shift
    z = FractionalSeries.make(2, {0: aj, 2: 1 / cj})
    cache = {}

    def zinv(p):
        if p not in cache:
            cache[p] = (z - FractionalSeries.monomial(2, 0, p)).invert(work)
        return cache[p]

    ysq = FractionalSeries.make(2, {0: spec.c})
    for ak in spec.a:
        ysq = ysq * (z - FractionalSeries.monomial(2, 0, ak))
    y = ysq.sqrt_unit(work)
    acc = FractionalSeries.zero(2, hi)
    for (ey, poles), c in f.terms:
        term = FractionalSeries.monomial(2, 0, c)
        here = 0
        for p, m in poles:
            if p == aj:
                here += m
                continue
            for _ in range(m):
                term = _mul_to(term, zinv(p), work)
        if ey:
            term = _mul_to(term, y, work)
        term = term * FractionalSeries.monomial(2, -2 * here, cj ** here)
        acc = acc + term.truncate_soft(hi)
    if acc.hi is None or acc.hi > hi:
        acc = acc.truncate(hi)
    if acc.hi < hi:
        raise DepthError("hyperelliptic expansion lost precision")
    return acc


def _mul_to(a, b, hi):
    out = a * b
    if out.hi is None or out.hi > hi:
        out = out.truncate(hi)
    return out


# -- generating sets ---------------------------------------------------------------------

def _laurent_rows(spec, S_gen, H):
    rows = []
    for k in range(-S_gen, S_gen + 1):
        rows.append(expand_function(spec, LaurentFunction.power(k), H))
    return rows


def hyper_basis_functions(spec, pole_budget):
    """Functions regular off the branch points with lead pole order ``<= pole_budget``."""
    a = spec.a
    funcs = [HyperFunction.monomial()]
    for i, j in ((0, 1), (1, 2), (2, 3)):
        funcs.append(HyperFunction.monomial(1, {a[i]: 1, a[j]: 1}))
    for k in range(4):
        other = a[(k + 1) % 4]
        for m in range(1, pole_budget // 2 + 2):
            funcs.append(HyperFunction.monomial(0, {a[k]: m}))
            funcs.append(HyperFunction.monomial(1, {a[k]: m + 1, other: 1}))
    return funcs


def _closure_rows(spec, S_gen, H):
    """Products of generators until every slot in ``[-S_gen, 0)`` is covered."""
    ram = spec.ram
    ordering = SlotOrdering(ram)
    ech = Echelon()
    frontier = [WElement.one(ram)] + list(spec.generators)
    rows = []
    lo = ordering.first_slot(-S_gen)

    def lead_level(w):
        vec = ordering.to_vec(w, H)
        if not vec:
            return None
        return ordering.level_of_slot(min(vec))

    for w in frontier:
        if ech.insert(ordering.to_vec(w, H)) is not None:
            rows.append(w)
    gens = list(spec.generators)
    layer = list(rows)
    for _ in range(4 * S_gen + 4):
        new = []
        for x in layer:
            lx = lead_level(x)
            for g in gens:
                lg = lead_level(g)
                if lx is None or lg is None or lx + lg < -S_gen - ordering.L:
                    continue
                p = x * g
                try:
                    vec = ordering.to_vec(p, H)
                except DepthError:
                    raise DepthError("generator products lost precision; expand generators deeper") from None
                if ech.insert(vec) is not None:
                    rows.append(p)
                    new.append(p)
        if not new:
            break
        layer = new
        if all(s in ech.rows for s in range(lo, 0)):
            break
    return rows


def build_point(spec, S, H=None, margin=None):
    """Echelonized Krichever point at depth ``S`` (levels) and precision ``H``."""
    ram = spec.ram
    L = ram.lcm
    H = 2 * S if H is None else H
    margin = (2 * spec.genus + 2) * L if margin is None else margin
    S_gen = S + margin
    if isinstance(spec, LaurentMonomialCover):
        rows = _laurent_rows(spec, S_gen, H)
    elif isinstance(spec, HyperellipticCover):
        rows = [expand_function(spec, f, H) for f in hyper_basis_functions(spec, S_gen)]
    elif isinstance(spec, GeneralSpec):
        rows = _closure_rows(spec, S_gen, H)
    else:
        raise TypeError("unknown cover type")
    return echelonize(rows, ram, S, H, check_tail_from=S + L, label=spec.label)


def verify_krichever(spec, S, H=None):
    """Algebra and trace conditions, the index formula and ``tr U = U cap V``."""
    rep = Report(f"verify_krichever[{spec.label}]")
    ram = spec.ram
    rep.data["S"] = S
    try:
        U = build_point(spec, S, H)
    except DepthError as exc:
        rep.inconclusive(str(exc))
        return rep
    gbar = hurwitz_genus(ram.n, spec.base_genus, ram.r, ram.rbar)
    if isinstance(spec, GeneralSpec) and gbar != spec.genus:
        rep.fail(f"declared genus {spec.genus} disagrees with the Hurwitz formula ({gbar})")
    rep.merge(is_algebra_point(U))
    rep.merge(is_hurwitz_point(U))
    m = index(U)
    rep.data["index"] = m
    rep.data["genus"] = gbar
    if m != 1 - gbar:
        rep.fail(f"index {m} differs from 1 - genus = {1 - gbar}")
    tp, iv = trace_point(U), intersect_V(U)
    if tp.leads != iv.leads or tp.rows != iv.rows:
        rep.fail("trace image and intersection with V differ")
    return rep


def catalog():
    """The shipped smooth covers."""
    return [LaurentMonomialCover(2), LaurentMonomialCover(3), HyperellipticCover()]


# -- perturbed data used as negative controls --------------------------------------------

def perturbed_laurent(c=Q(1), n=2, S=30, H=None):
    """Algebra generated by ``w = (u1 + c u1^2, 1/u2)`` and ``1/w``; not trace stable.

    ``1/w`` is infinite on the first sheet, so it is expanded deep enough for
    the closure at depth ``S`` and precision ``H`` (default ``2 S``).
    """
    ram = RamificationData.of([[n], [n]])
    H = 2 * S if H is None else H
    hi = H + 2 * S + 8 * ram.lcm
    w1 = FractionalSeries.make(n, {1: 1, 2: c})
    w = WElement(ram, (w1, FractionalSeries.monomial(n, -1)))
    winv = WElement(ram, (w1.invert(hi), FractionalSeries.monomial(n, 1)))
    return GeneralSpec(ram, (w, winv), (0, 0), name="perturbed-laurent")


# -- text format ----------------------------------------------------------------------

def format_cover(spec):
    if isinstance(spec, LaurentMonomialCover):
        return f"cover = laurent\nn = {spec.n}\n"
    if isinstance(spec, HyperellipticCover):
        a = ", ".join(format_scalar(x) for x in spec.a)
        return f"cover = hyperelliptic\na = {a}\nc = {format_scalar(spec.c)}\n"
    lines = ["cover = general", spec.ram.header(), f"gbar = {spec.declared[0]}", f"g = {spec.declared[1]}"]
    for gen in spec.generators:
        lines.append("generator = " + " | ".join(s.to_literal() for s in gen.parts))
    return "\n".join(lines) + "\n"


def parse_cover(text):
    fields, gens, header = {}, [], None
    for no, ln in enumerate(text.splitlines(), 1):
        if not ln.strip() or ln.lstrip().startswith("#"):
            continue
        if ln.strip().startswith("E"):
            header = (no, ln)
            continue
        k, sep, v = ln.partition("=")
        if not sep:
            raise ValueError(f"line {no}, column 1: expected 'key = value'")
        k = k.strip()
        if k == "generator":
            gens.append((no, v))
        else:
            fields[k] = (no, v.strip())
    kind = fields.get("cover", (0, ""))[1]
    if kind == "laurent":
        return LaurentMonomialCover(int(fields["n"][1]))
    if kind == "hyperelliptic":
        a = tuple(parse_scalar(x) for x in fields["a"][1].split(","))
        c = parse_scalar(fields["c"][1]) if "c" in fields else Q(1)
        return HyperellipticCover(a, c)
    if kind == "general":
        if header is None:
            raise ValueError("general cover needs an 'E = [...]' line")
        ram = parse_ram_header(header[1])
        out = []
        for no, v in gens:
            parts = []
            for piece in v.split("|"):
                try:
                    parts.append(parse_series(piece.strip()))
                except ValueError as exc:
                    raise ValueError(f"line {no}: {exc}") from None
            out.append(WElement(ram, tuple(parts)))
        gbar = int(fields.get("gbar", (0, "0"))[1])
        g = int(fields.get("g", (0, "0"))[1])
        return GeneralSpec(ram, tuple(out), (gbar, g))
    raise ValueError(f"unknown cover kind {kind!r}")

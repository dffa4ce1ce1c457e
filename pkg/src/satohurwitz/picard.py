"""Pairs ``(A, L)`` of an algebra point and a rank-one module over it.

``L`` is the subspace of expansions of sections of a line bundle ``O(D)`` on
a catalog curve, for a divisor ``D`` of rational points away from the marked
fibre.  The module pairs carry an action of ``G_V^W`` (substitutions) and of
``Gamma_W`` (multiplication), combined in the semidirect product with law

    (g2, c2) (g1, c1) = (g2 g1, g1^-1(c2) c1),    (g, c) w = g(c w).

:func:`certify_pic_transitivity` compares ranks of the Lie-level action with
windowed dimensions of the first-order deformations of the pair, row by row
(module maps and trace-compatible derivations) and in the middle.
"""

from __future__ import annotations

from dataclasses import dataclass

from .grassmannian import (
    GrassPoint,
    act_aut_point,
    act_gamma_point,
    contains,
    echelonize,
    format_point,
    index,
    is_algebra_point,
    parse_point,
    point_from_vecs,
    restrict_window,
    same_point,
)
from .groups import GVWElement, apply_substitution
from .krichever import (
    HyperellipticCover,
    HyperFunction,
    LaurentFunction,
    LaurentMonomialCover,
    build_point,
    expand_function,
)
from .linalg import Echelon, nullspace
from .report import INCONCLUSIVE, NO, Report
from .series import DepthError, Q, format_scalar, parse_scalar
from .tangent import (
    Window,
    _Context,
    _field_basis,
    _lead_coefficients,
    _rank_on,
    _remainder,
    _shift_row,
    default_windows,
    derivation_constraints,
    field_image,
    projected_dimension,
    trace_constraints,
)
from .walgebra import WElement

__all__ = [
    "PicPoint",
    "build_pic_point",
    "verify_pic_point",
    "module_check",
    "stabilizer",
    "check_stabilizer",
    "SemidirectElement",
    "semidirect_mul",
    "act_semidirect",
    "act_semidirect_w",
    "certify_pic_transitivity",
    "format_pic",
    "parse_pic",
    "parse_divisor",
]


@dataclass(frozen=True)
class PicPoint:
    """An algebra point ``A``, a module point ``L`` with ``A L in L`` and ``chi = index(L)``.

    No maximality condition is imposed on ``L``; components are told apart by ``chi``.
    """

    A: GrassPoint
    L: GrassPoint
    chi: int


# -- construction -----------------------------------------------------------------

def _laurent_module(spec, divisor, S, H):
    L_lcm = spec.ram.lcm
    poles = {}
    for b, d in divisor.items():
        b = Q(b)
        if b == 0:
            raise ValueError("divisor points must avoid the marked fibre w = 0, oo")
        if d < 0:
            raise ValueError("only effective divisors are supported")
        if d:
            poles[b] = int(d)
    S_gen = S + 2 * L_lcm + sum(poles.values())
    rows = [expand_function(spec, LaurentFunction.of({k: 1}, poles), H) for k in range(-S_gen, S_gen + 1)]
    return echelonize(rows, spec.ram, S, H, check_tail_from=S + L_lcm, label=f"{spec.label}/L")


def _hyper_module(spec, A, divisor, S, H):
    a1 = spec.a[0]
    extra = []
    for p, d in divisor.items():
        z0, y0 = (Q(x) for x in p)
        if not spec.on_curve(z0, y0):
            raise ValueError(f"({format_scalar(z0)}, {format_scalar(y0)}) is not on the curve")
        if z0 in spec.a:
            raise ValueError("divisor points must avoid the branch points")
        if d < 0:
            raise ValueError("only effective divisors are supported")
        if not d:
            continue
        # simple pole at (z0, y0) only; the factor 1/(z - a1) keeps it regular at infinity
        sigma = expand_function(spec, HyperFunction.of({
            (1, ((z0, 1), (a1, 1))): 1,
            (0, ((z0, 1), (a1, 1))): y0,
        }), H + 2 * d * S)
        power = sigma
        for k in range(1, int(d) + 1):
            if k > 1:
                power = power * sigma
            extra.append(power.truncate_levels(H))
    return echelonize(list(A.rows) + extra, spec.ram, S, H, label=f"{spec.label}/L")


def build_pic_point(spec, divisor=None, S=30, H=None):
    """``(A, L)`` with ``L`` the expansions of sections of ``O(divisor)``.

    Laurent covers take ``{b: d}`` with ``b`` a nonzero rational ``w``-value;
    the hyperelliptic cover takes ``{(z0, y0): d}`` for rational points off the
    branch locus.
    """
    divisor = dict(divisor or {})
    A = build_point(spec, S, H)
    H = A.H
    if not any(divisor.values()):
        L = A.with_label(f"{spec.label}/L")
    elif isinstance(spec, LaurentMonomialCover):
        L = _laurent_module(spec, divisor, S, H)
    elif isinstance(spec, HyperellipticCover):
        L = _hyper_module(spec, A, divisor, S, H)
    else:
        raise TypeError("module points are built for Laurent and hyperelliptic covers")
    return PicPoint(A, L, index(L))


def module_check(A, L):
    """Three-valued check of ``row_a * row_l in L`` for certifiable pairs."""
    rep = Report("module_check")
    la = [A.lead_level(s) for s in A.leads]
    ll = [L.lead_level(s) for s in L.leads]
    checked = 0
    for i, a in enumerate(A.rows):
        for j, l in enumerate(L.rows):
            if la[i] + ll[j] < -L.S:
                continue
            bound = min(A.H, L.H) + min(la[i], ll[j], 0)
            prod = (a * l).truncate_levels(bound)
            verdict, rem = contains(L, prod, witness=True)
            checked += 1
            if verdict == NO:
                s = min(rem)
                rep.fail(f"A row {A.leads[i]} times L row {L.leads[j]} escapes at slot {s} "
                         f"(coefficient {format_scalar(rem[s])})")
                return rep
            if verdict == INCONCLUSIVE:
                rep.inconclusive(f"pair ({A.leads[i]}, {L.leads[j]}) inconclusive at depth")
    rep.data["pairs_checked"] = checked
    return rep


def verify_pic_point(p):
    """``1 in A``, ``A A in A``, ``A L in L`` and ``chi = index(L)``."""
    rep = Report("verify_pic_point")
    rep.merge(is_algebra_point(p.A))
    rep.merge(module_check(p.A, p.L))
    m = index(p.L)
    rep.data["chi"] = p.chi
    if m != p.chi:
        rep.fail(f"index of L is {m}, recorded chi is {p.chi}")
    return rep


# -- stabilizer -----------------------------------------------------------------------

def stabilizer(L, window=None):
    """Windowed ``{w : w L in L}`` as a point at depth ``window.depth``, precision ``window.height``.

    The unknown ``w`` runs over the monomials with levels in
    ``[-depth, height)``; its tail above ``height`` can only affect product
    coordinates beyond ``height + level(row)``, which are not imposed.
    """
    ordering = L.ordering
    window = window or Window(2 * ordering.L, 10 * ordering.L)
    depth, height = window.depth, window.height
    if depth >= L.S or height > L.H - depth:
        raise DepthError(f"stabilizer window ({window}) does not fit the point (S={L.S}, H={L.H})")
    unknowns = list(range(ordering.first_slot(-depth), ordering.first_slot(height)))
    equations = []
    for s, row in zip(L.leads, L.rows):
        lvl = L.lead_level(s)
        if lvl < depth - L.S:
            continue
        bound = min(height + lvl, L.H - depth)
        if bound <= -L.S:
            continue
        per = {}
        for t in unknowns:
            for c, v in _remainder(L, _shift_row(L, row, t), bound).items():
                per.setdefault(c, {})[t] = v
        equations.extend(per[c] for c in sorted(per))
    basis = nullspace(equations, unknowns)
    ech = Echelon()
    for vec in basis.values():
        ech.insert(vec)
    ech.full_reduce()
    return point_from_vecs(ordering, depth, height, dict(ech.rows), label="stabilizer")


def check_stabilizer(p, window=None):
    """``stabilizer(L) = A`` at the window (mutual containment of echelon forms)."""
    rep = Report("check_stabilizer")
    try:
        st = stabilizer(p.L, window)
    except DepthError as exc:
        rep.inconclusive(str(exc))
        return rep
    ref = restrict_window(p.A, st.S, st.H)
    rep.data.update(depth=st.S, height=st.H, rows=len(st.leads))
    extra = sorted(set(st.leads) - set(ref.leads))
    missing = sorted(set(ref.leads) - set(st.leads))
    if extra:
        rep.fail(f"stabilizer has leading slots outside A: {extra[:5]}")
    if missing:
        rep.fail(f"A has leading slots missing from the stabilizer: {missing[:5]}")
    if not extra and not missing and not same_point(st, ref):
        rep.fail("stabilizer and A share leading slots but differ in coefficients")
    return rep


# -- the semidirect product ----------------------------------------------------------------

@dataclass(frozen=True)
class SemidirectElement:
    """``(g, gamma)`` acting by ``w -> g(gamma w)``."""

    g: GVWElement
    gamma: WElement

    @classmethod
    def identity(cls, ram):
        return cls(GVWElement.identity(ram), WElement.one(ram))


def semidirect_mul(x2, x1, hi=20):
    """``(g2 g1, g1^-1(gamma2) gamma1)``; the inverse substitution is known below ``u^hi``."""
    if x1.g.ram != x2.g.ram:
        raise ValueError("mismatched ramification data")
    g = x2.g.compose_after(x1.g)
    inv = x1.g.inverse(hi)
    moved = apply_substitution(inv, x2.gamma)
    return SemidirectElement(g, moved * x1.gamma)


def act_semidirect_w(x, w):
    """``g(gamma w)`` for a single element."""
    return apply_substitution(x.g, x.gamma * w)


def _split_gamma(gamma):
    """``gamma = monomial * unit`` with unit constant terms nonzero."""
    exps, unit = {}, []
    for key, s in gamma.items():
        v = s.valuation()
        if v is None:
            raise ValueError("gamma must be a unit on every sheet")
        exps[key] = v
        unit.append(s.shift(-v))
    return WElement.monomials(gamma.ram, exps), WElement(gamma.ram, tuple(unit))


def act_semidirect(x, U):
    """Rowwise multiplication by ``gamma``, then substitution by ``g``; re-echelonized."""
    mono, unit = _split_gamma(x.gamma)
    if any(s.terms() != [(0, 1)] or s.hi is not None for s in mono.parts):
        U = act_gamma_point(mono, U)
    rows = [unit * r for r in U.rows]
    H = min([U.H] + [r.known_level() for r in rows if r.known_level() is not None])
    U = echelonize([r.truncate_levels(H) for r in rows], U.ram, U.S, H, label=U.label)
    return act_aut_point(x.g, U).with_label(U.label)


# -- transitivity ---------------------------------------------------------------------------

def _tag(vec, tag):
    return {(tag,) + k: v for k, v in vec.items()}


def _module_equations(ctxA, ctxL):
    """First-order conditions ``f(a l) = a f(l) + D(a) l`` in ``W/L`` for certifiable pairs."""
    A, L = ctxA.U, ctxL.U
    window = ctxL.window
    cache = {}

    def a_times_gap(i, h):
        key = (i, h)
        if key not in cache:
            cache[key] = _remainder(L, _shift_row(L, A.row_by_lead(i), h), window.height)
        return cache[key]

    out = []
    for i in ctxA.rows:
        li = ctxA.level[i]
        for j in ctxL.rows:
            lj = ctxL.level[j]
            if li + lj < -window.depth:
                continue
            bound = ctxL.bound(li, lj)
            top = L.ordering.first_slot(bound)
            prod = A.row_by_lead(i) * L.row_by_lead(j)
            P = _lead_coefficients(L, prod, bound)
            eqs = {}
            for k, c in P.items():
                if k not in ctxL.row_index:
                    raise DepthError("module product needs a row outside the window")
                for h in ctxL.gaps:
                    if h < top:
                        eqs.setdefault(h, {})[("L", k, h)] = c
            for h in ctxL.gaps:
                for c, v in a_times_gap(i, h).items():
                    if c < top:
                        e = eqs.setdefault(c, {})
                        e[("L", j, h)] = e.get(("L", j, h), 0) - v
            for g in ctxA.gaps:
                for c, v in ctxL.shifted(j, g).items():
                    if c < top:
                        e = eqs.setdefault(c, {})
                        e[("A", i, g)] = e.get(("A", i, g), 0) - v
            for c in sorted(eqs):
                eq = {k: v for k, v in eqs[c].items() if v}
                if eq:
                    out.append(eq)
    return out


def _violated(equations, sources):
    """Labels of source columns that fail some equation."""
    where = {}
    for n, eq in enumerate(equations):
        for k, c in eq.items():
            where.setdefault(k, []).append((n, c))
    bad = []
    for label, x in sources:
        acc = {}
        for k, v in x.items():
            for n, c in where.get(k, ()):
                acc[n] = acc.get(n, 0) + c * v
        if any(acc.values()):
            bad.append(label)
    return bad


def certify_pic_transitivity(p, K=12, window=None, observe=None, with_gamma=True):
    """Rank of ``Lie Gamma_W + fields`` against the windowed deformations of ``(A, L)``.

    Rows: multiplications against ``hom_A(L, W/L)`` (deformations with ``D = 0``)
    and fields against ``Der(A, W/A)^tr``.  Middle: both blocks against all
    pairs ``(D, f)``.  ``with_gamma=False`` drops the multiplication block.

    Dimensions are upper bounds (see :func:`projected_dimension`); every
    source satisfies the equations exactly, so a PASS pins them down.
    """
    A, L = p.A, p.L
    dw, do = default_windows(A)
    window, observe = window or dw, observe or do
    rep = Report("certify_pic_transitivity")
    base = trace_constraints(A, base=derivation_constraints(A, window))
    ctxA = base._ctx
    ctxL = _Context(L, window)
    x_cols = [("A",) + c for c in ctxA.columns]
    y_cols = [("L",) + c for c in ctxL.columns]
    a_eqs = [_tag(eq, "A") for eq in base.equations]
    m_eqs = _module_equations(ctxA, ctxL)
    equations = a_eqs + m_eqs
    columns = x_cols + y_cols
    x_obs = [("A", s, g) for s in ctxA.rows if ctxA.level[s] >= -observe.depth
             for g in ctxA.gaps if A.ordering.level_of_slot(g) < observe.height]
    y_obs = [("L", s, g) for s in ctxL.rows if ctxL.level[s] >= -observe.depth
             for g in ctxL.gaps if L.ordering.level_of_slot(g) < observe.height]
    # sources
    fields, dropped = [], []
    for label, D in _field_basis(A, K):
        try:
            col = _tag(field_image(A, D, window), "A")
            col.update(_tag(field_image(L, D, window), "L"))
        except DepthError:
            dropped.append(label)
            continue
        fields.append((label, col))
    gammas = []
    if with_gamma:
        o = L.ordering
        for t in range(o.first_slot(-window.depth), o.first_slot(window.height)):
            try:
                col = {}
                for j in ctxL.rows:
                    for c, v in ctxL.shifted(j, t).items():
                        col[("L", j, c)] = v
            except DepthError:
                continue
            gammas.append((t, col))
    bad = _violated(equations, fields + gammas)
    # dimensions; module maps are the solutions with D = 0
    # upper bounds; a source rank reaching one makes it exact
    dim_mid = projected_dimension(columns, equations, x_obs + y_obs, bound=True)
    hom_eqs = [{k: v for k, v in eq.items() if k[0] == "L"} for eq in m_eqs]
    dim_hom = projected_dimension(y_cols, [eq for eq in hom_eqs if eq], y_obs, bound=True)
    dim_der = projected_dimension(
        ctxA.columns, base.equations, [c[1:] for c in x_obs], bound=True)
    # ranks
    rank_mid = _rank_on([c for _, c in fields + gammas], x_obs + y_obs)
    rank_hom = _rank_on([c for _, c in gammas], y_obs)
    rank_der = _rank_on([c for _, c in fields], x_obs)
    rep.data.update(
        point=L.label, chi=p.chi, K=K, window=str(window), observed=str(observe),
        middle_dimension=dim_mid, middle_rank=rank_mid, hom_dimension=dim_hom, hom_rank=rank_hom,
        der_dimension=dim_der, der_rank=rank_der, fields=len(fields), dropped=len(dropped),
        multiplications=len(gammas),
    )
    if dropped:
        rep.note(f"{len(dropped)} fields dropped: image needs rows below the point window")
    if bad:
        rep.fail(f"source images violate the deformation equations: {bad[:3]}")
    if with_gamma and rank_hom != dim_hom:
        rep.fail(f"multiplications reach rank {rank_hom} of the module maps, dimension {dim_hom}")
    if rank_der != dim_der:
        rep.fail(f"fields reach rank {rank_der} of the derivations, dimension {dim_der}")
    if rank_mid != dim_mid:
        rep.fail(f"rank {rank_mid} in the middle is below the windowed dimension {dim_mid}")
    if dim_mid != dim_hom + dim_der:
        rep.fail(f"middle dimension {dim_mid} differs from {dim_hom} + {dim_der}")
    return rep


# -- files ------------------------------------------------------------------------------------

def format_pic(p):
    return f"chi = {p.chi}\n=== A\n{format_point(p.A)}=== L\n{format_point(p.L)}"


def parse_pic(text):
    head, sep, rest = text.partition("\n=== A\n")
    if not sep:
        raise ValueError("pic file: missing '=== A' section")
    k, _, v = head.strip().partition("=")
    if k.strip() != "chi":
        raise ValueError("line 1, column 1: expected 'chi = ...'")
    try:
        chi = int(v.strip())
    except ValueError:
        raise ValueError(f"line 1, column {len(k) + 2}: chi must be an integer") from None
    a_text, sep, l_text = rest.partition("\n=== L\n")
    if not sep:
        raise ValueError("pic file: missing '=== L' section")
    p = PicPoint(parse_point(a_text + "\n"), parse_point(l_text), chi)
    return p


def parse_divisor(text):
    """``b:d,...`` (Laurent) or ``z0;y0:d,...`` (hyperelliptic point ``(z0, y0)``)."""
    out = {}
    if not text or not text.strip():
        return out
    for item in text.split(","):
        pt, _, d = item.strip().partition(":")
        d = int(d) if d.strip() else 1
        if ";" in pt:
            z0, y0 = pt.split(";")
            key = (parse_scalar(z0.strip()), parse_scalar(y0.strip()))
        else:
            key = parse_scalar(pt.strip())
        out[key] = out.get(key, 0) + d
    return out

"""Tangent vectors at algebra and Hurwitz points, and transitivity certificates.

A tangent vector at ``U`` is a linear map ``f: U -> W/U``, stored by the
coordinates ``X[s, g]`` of ``f(row_s)`` on the non-leading slots ``g`` of U.
At a window ``(depth, height)`` the unknowns are the rows with lead level
``>= -depth`` and the non-leading slots below level ``height``.

The constraint systems are the first-order parts of the membership tests of
:func:`~satohurwitz.grassmannian.is_algebra_point` and
:func:`~satohurwitz.grassmannian.is_hurwitz_point` applied to the deformed
point spanned by ``row_s + eps f(row_s)`` with the same window: one equation per
certifiable pair of rows and coordinate.  :func:`deformed_point` builds that
point over ``Q[eps]/eps^2`` so the correspondence can be tested directly.

Windowed dimensions are dimensions of projections onto a smaller *observed*
window.  Solutions of the truncated system project onto a space containing
the projection of the true derivations, and images of vector fields are
true derivations, so ``rank(fields) == projected dimension`` certifies that
the fields fill the projection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .grassmannian import GrassPoint, intersect_V, point_from_vecs
from .groups import monomial_field
from .linalg import Echelon, integer_rank, modular_rank
from .report import Report
from .series import DepthError, FractionalSeries, Q
from .timepoly import TimePoly
from .walgebra import WElement, embed_v_in_w, trace

__all__ = [
    "Window",
    "TangentVector",
    "ConstraintSystem",
    "derivation_constraints",
    "trace_constraints",
    "field_image",
    "virasoro_tangent_map",
    "certify_local_transitivity",
    "certify_restriction_injectivity",
    "deformed_point",
    "default_windows",
    "projected_dimension",
    "EPS",
]

EPS = ("eps", 0, 0, 1)


@dataclass(frozen=True)
class Window:
    depth: int
    height: int

    def __str__(self):
        return f"depth {self.depth}, height {self.height}"


def default_windows(U):
    """System window ``(2L, 10L)`` and observed window ``(L, 6L)``."""
    L = U.ordering.L
    return Window(2 * L, 10 * L), Window(L, 6 * L)


def _rows(U, depth):
    return [s for s in U.leads if U.lead_level(s) >= -depth]


def _gaps(U, height):
    top = U.ordering.first_slot(height)
    return [s for s in range(U.window_slot, top) if s not in U.lead_set]


def _check_window(U, window):
    if window.depth > U.S:
        raise DepthError(f"window depth {window.depth} exceeds point depth {U.S}")
    if window.height > U.H - window.depth:
        raise DepthError(f"window height {window.height} needs point precision above {U.H}")


@dataclass
class TangentVector:
    """``f(row_s)`` as remainders on the non-leading slots, for the stored rows."""

    U: GrassPoint
    images: dict  # lead slot -> {gap slot: value}
    window: Window

    @classmethod
    def from_solution(cls, U, x, window):
        images = {}
        for (s, g), v in x.items():
            if v:
                images.setdefault(s, {})[g] = v
        return cls(U, images, window)

    def coordinates(self):
        return {(s, g): v for s, im in self.images.items() for g, v in im.items()}

    def is_reduced(self):
        return all(g not in self.U.lead_set for im in self.images.values() for g in im)

    def image(self, s):
        return self.U.ordering.from_vec(self.images.get(s, {}), self.window.height)


@dataclass
class ConstraintSystem:
    U: GrassPoint
    window: Window
    columns: list
    equations: list = field(default_factory=list)
    kinds: dict = field(default_factory=dict)

    def add(self, kind, eq):
        eq = {k: v for k, v in eq.items() if v}
        if eq:
            self.equations.append(eq)
            self.kinds[kind] = self.kinds.get(kind, 0) + 1

    def satisfied_by(self, x):
        for eq in self.equations:
            if sum((c * x.get(k, 0) for k, c in eq.items()), Q(0)):
                return False
        return True

    def violations(self, x):
        return sum(1 for eq in self.equations if sum((c * x.get(k, 0) for k, c in eq.items()), Q(0)))

    def solution_basis(self):
        """Basis of the solution space (one vector per free column)."""
        from .linalg import nullspace

        order = {c: i for i, c in enumerate(self.columns)}
        eqs = [{order[k]: v for k, v in eq.items()} for eq in self.equations]
        basis = nullspace(eqs, range(len(self.columns)))
        return [{self.columns[i]: v for i, v in vec.items()} for vec in basis.values()]

    def projected_dimension(self, observed, extra=()):
        """Dimension of the solution space projected to ``observed`` functionals.

        ``observed`` is a list of linear functionals (dicts over columns, or
        bare columns); ``extra`` adds equations before projecting.
        """
        return projected_dimension(self.columns, list(self.equations) + list(extra), observed)


def projected_dimension(columns, equations, observed, bound=False):
    """``dim {(l(x))_l : eq(x) = 0}`` as ``rank [E; O] - rank E``.

    When every observation is a plain coordinate the stacked rank is
    ``len(O) + rank`` of ``E`` on the unobserved columns.  ``bound=True``
    takes ``rank E`` modulo a prime instead, so the result is an upper bound
    that is exact unless the prime is unlucky.  A rank of honest solutions
    reaching the bound certifies it.
    """
    if all(not isinstance(ell, dict) for ell in observed):
        seen = set(observed)
        rest = [c for c in columns if c not in seen]
        full = (modular_rank if bound else integer_rank)(equations, columns)
        return len(seen) + integer_rank(equations, rest) - full
    extra = [ell if isinstance(ell, dict) else {ell: Q(1)} for ell in observed]
    stacked = list(equations) + extra
    return integer_rank(stacked, columns) - integer_rank(equations, columns)


# -- remainders -----------------------------------------------------------------------------

def _shift_row(U, row, g):
    """``row * u^g`` for the monomial at slot ``g``."""
    k, m = U.ordering.monomial(g)
    parts = []
    for idx, s in enumerate(row.parts):
        parts.append(s.shift(m) if idx == k else FractionalSeries.zero(s.e))
    return WElement(U.ram, tuple(parts))


def _remainder(U, w, top_level):
    """Coordinates of ``w mod U`` below ``top_level`` (must stay inside the window)."""
    vec = U.ordering.to_vec(w, top_level)
    if any(s < U.window_slot for s in vec):
        raise DepthError("element reaches below the window of the point")
    rem = U.echelon.reduce(vec)
    top = U.ordering.first_slot(top_level)
    return {s: v for s, v in rem.items() if s < top}


def _lead_coefficients(U, w, top_level):
    vec = U.ordering.to_vec(w, top_level)
    if any(s < U.window_slot for s in vec):
        raise DepthError("element reaches below the window of the point")
    return {s: v for s, v in vec.items() if s in U.lead_set}


class _Context:
    """Shared remainders for one point and window."""

    def __init__(self, U, window):
        _check_window(U, window)
        self.U = U
        self.window = window
        self.rows = _rows(U, window.depth)
        self.gaps = _gaps(U, window.height)
        self.row_index = {s: i for i, s in enumerate(self.rows)}
        self.level = {s: U.lead_level(s) for s in self.rows}
        self.columns = [(s, g) for s in self.rows for g in self.gaps]
        self._shift = {}
        top_lead = max((U.lead_level(s) for s in U.leads), default=0)
        if window.height - window.depth <= top_lead:
            raise DepthError("window height does not reach past the last leading slot")

    def bound(self, *levels):
        return self.window.height + min(min(levels), 0)

    def shifted(self, s, g):
        """``R(row_s * u^g)`` below the window height."""
        key = (s, g)
        if key not in self._shift:
            row = self.U.row_by_lead(s)
            top = self.window.height
            self._shift[key] = _remainder(self.U, _shift_row(self.U, row, g), top)
        return self._shift[key]


def _leibniz_equations(ctx, system):
    U = ctx.U
    rows = ctx.rows
    ordering = U.ordering
    # f(1) = 0
    one = WElement.one(U.ram)
    c1 = _lead_coefficients(U, one, ctx.window.height)
    for g in ctx.gaps:
        system.add("unit", {(k, g): c for k, c in c1.items()})
    for a, i in enumerate(rows):
        for j in rows[a:]:
            li, lj = ctx.level[i], ctx.level[j]
            if li + lj < -ctx.window.depth:
                continue
            bound = ctx.bound(li, lj)
            top = ordering.first_slot(bound)
            prod = U.row_by_lead(i) * U.row_by_lead(j)
            P = _lead_coefficients(U, prod, bound)
            eqs = {}
            for k, c in P.items():
                if k not in ctx.row_index:
                    raise DepthError("product needs a row outside the window")
                for g in ctx.gaps:
                    if g < top:
                        eqs.setdefault(g, {})[(k, g)] = c
            for src, mult in ((j, i), (i, j)):
                for g in ctx.gaps:
                    for c, v in ctx.shifted(mult, g).items():
                        if c < top:
                            e = eqs.setdefault(c, {})
                            e[(src, g)] = e.get((src, g), 0) - v
            for c in sorted(eqs):
                system.add("leibniz", eqs[c])


def derivation_constraints(U, window=None):
    """Linear conditions for ``f(b b') = b f(b') + f(b) b'`` and ``f(1) = 0`` at the window."""
    window = window or default_windows(U)[0]
    ctx = _Context(U, window)
    system = ConstraintSystem(U, window, ctx.columns)
    system._ctx = ctx
    _leibniz_equations(ctx, system)
    if not system.equations:
        raise DepthError("window too shallow to certify any product")
    return system


def trace_constraints(U, window=None, base=None):
    """Derivation constraints plus ``tr1(f(b)) = f(tr b)`` for every row at the window."""
    system = base if base is not None else derivation_constraints(U, window)
    ctx = system._ctx
    U = ctx.U
    ram = U.ram
    top_level = ctx.window.height
    top = U.ordering.first_slot(top_level)
    tr_gap = {}
    for g in ctx.gaps:
        mono = U.ordering.from_vec({g: Q(1)})
        tr_gap[g] = _remainder(U, embed_v_in_w(trace(mono), ram), top_level)
    for s in ctx.rows:
        T = _lead_coefficients(U, embed_v_in_w(trace(U.row_by_lead(s)), ram), top_level)
        eqs = {}
        for k, c in T.items():
            if k not in ctx.row_index:
                raise DepthError("trace needs a row outside the window")
            for g in ctx.gaps:
                eqs.setdefault(g, {})[(k, g)] = -c
        for g in ctx.gaps:
            for c, v in tr_gap[g].items():
                if c < top:
                    e = eqs.setdefault(c, {})
                    e[(s, g)] = e.get((s, g), 0) + v
        for c in sorted(eqs):
            system.add("trace", eqs[c])
    return system


# -- vector fields ------------------------------------------------------------------------

def field_image(U, D, window):
    """Coordinates of ``b -> D(b) mod U`` on the rows and gaps of the window."""
    ctx = _Context(U, window)
    out = {}
    for s in ctx.rows:
        img = D.apply(U.row_by_lead(s))
        rem = _remainder(U, img, window.height)
        for g, v in rem.items():
            out[(s, g)] = v
    return out


def _field_basis(U, K):
    out = []
    for branch in range(1, U.ram.r + 1):
        for k in range(-K, K + 1):
            out.append(((branch, k), monomial_field(U.ram, branch, k)))
    return out


@dataclass
class TangentMap:
    labels: list
    columns: list  # one coordinate dict per kept field
    dropped: list
    window: Window


def virasoro_tangent_map(U, K, window=None):
    """Images of the fields ``z_i^k d/dz_i`` (``|k| <= K``) as coordinate vectors.

    Fields whose image needs rows below the window of U are dropped and listed.
    """
    window = window or default_windows(U)[0]
    labels, cols, dropped = [], [], []
    for label, D in _field_basis(U, K):
        try:
            cols.append(field_image(U, D, window))
            labels.append(label)
        except DepthError:
            dropped.append(label)
    return TangentMap(labels, cols, dropped, window)


def _observed(U, observe):
    return [(s, g) for s in _rows(U, observe.depth) for g in _gaps(U, observe.height)]


def _rank_on(vectors, observed):
    index = {c: i for i, c in enumerate(observed)}
    ech = Echelon()
    for v in vectors:
        ech.insert({index[k]: x for k, x in v.items() if k in index})
    return len(ech)


def certify_local_transitivity(U, K=12, window=None, observe=None, with_trace=True):
    """PASS iff the field images span the projected solution space at the window."""
    dw, do = default_windows(U)
    window, observe = window or dw, observe or do
    rep = Report("certify_local_transitivity")
    system = derivation_constraints(U, window)
    if with_trace:
        trace_constraints(U, base=system)
    observed = _observed(U, observe)
    dim = system.projected_dimension(observed)
    tmap = virasoro_tangent_map(U, K, window)
    bad = [lab for lab, col in zip(tmap.labels, tmap.columns) if not system.satisfied_by(col)]
    rank = _rank_on(tmap.columns, observed)
    rep.data.update(
        point=U.label, K=K, window=str(window), observed=str(observe), dimension=dim, rank=rank,
        fields=len(tmap.labels), dropped=len(tmap.dropped), trace=with_trace,
    )
    if tmap.dropped:
        rep.note(f"{len(tmap.dropped)} fields dropped: image needs rows below the point window")
    if bad:
        rep.fail(f"field images violate the constraints: {bad[:3]}")
    if rank != dim:
        rep.fail(f"rank {rank} of field images is below the windowed dimension {dim}")
    return rep


# -- restriction to the base ---------------------------------------------------------------

def _restriction_functionals(ctx, B, V_rows, V_height):
    """``(1/n) tr(f(b)) mod trU`` coordinates for rows ``b`` of the base point B."""
    U = ctx.U
    ram = U.ram
    n = ram.n
    vtop = B.ordering.first_slot(V_height)
    tr_gap = {}
    for g in ctx.gaps:
        mono = U.ordering.from_vec({g: Q(1)})
        t = trace(mono)
        t = WElement(B.ram, t.parts)
        tr_gap[g] = _remainder(B, t, V_height)
    out = []
    for sv in V_rows:
        e = embed_v_in_w(B.row_by_lead(sv), ram)
        C = _lead_coefficients(U, e, ctx.window.height)
        per = {}
        for k, c in C.items():
            if k not in ctx.row_index:
                raise DepthError("restriction needs a row outside the window")
            for g in ctx.gaps:
                for cv, v in tr_gap[g].items():
                    if cv < vtop:
                        d = per.setdefault(cv, {})
                        d[(k, g)] = d.get((k, g), 0) + c * v / n
        for cv in _gaps(B, V_height):
            out.append({k: v for k, v in per.get(cv, {}).items() if v})
    return out


def certify_restriction_injectivity(U, K=12, window=None, observe=None):
    """Zero kernel of ``Der(U, W/U)^tr -> Der(trU, V/trU)`` and matching dimensions at the window."""
    dw, do = default_windows(U)
    window, observe = window or dw, observe or do
    L = U.ordering.L
    rep = Report("certify_restriction_injectivity")
    B = intersect_V(U)
    system = trace_constraints(U, window)
    ctx = system._ctx
    observed = _observed(U, observe)
    # kernel: restrictions vanish on the whole system window
    big_rows = _rows(B, window.depth // L)
    kill = [eq for eq in _restriction_functionals(ctx, B, big_rows, window.height // L) if eq]
    kernel = system.projected_dimension(observed, extra=kill)
    # dimensions on the base side, in base coordinates
    vobs = Window(observe.depth // L, observe.height // L)
    restricted = _restriction_functionals(ctx, B, _rows(B, vobs.depth), vobs.height)
    dim_image = system.projected_dimension(restricted)
    vwindow = Window(window.depth // L, window.height // L)
    base_system = derivation_constraints(B, vwindow)
    base_obs = _observed(B, vobs)
    dim_base = base_system.projected_dimension(base_obs)
    vmap = virasoro_tangent_map(B, K, vwindow)
    rank_base = _rank_on(vmap.columns, base_obs)
    rep.data.update(
        point=U.label, window=str(window), observed=str(observe), kernel=kernel,
        restricted_dimension=dim_image, base_dimension=dim_base, base_rank=rank_base,
    )
    if kernel:
        rep.fail(f"restriction has a kernel of dimension {kernel} at the window")
    if not dim_image == dim_base == rank_base:
        rep.fail(
            f"dimensions differ: restricted {dim_image}, base {dim_base}, base field rank {rank_base}"
        )
    return rep


# -- first-order deformations ----------------------------------------------------------------

def deformed_point(U, tangent, window=None):
    """The point spanned by ``row + eps f(row)`` over ``Q[eps]/eps^2`` at the window.

    Rows have TimePoly coefficients in the single variable ``eps`` of weight 1
    truncated at degree 1; depth and precision are those of the window.
    """
    window = window or tangent.window
    images = tangent.images if isinstance(tangent, TangentVector) else _split(tangent)
    ordering = U.ordering
    vecs = {}
    for s in _rows(U, window.depth):
        vec = {k: TimePoly.const(v, 1) for k, v in U.vecs[s].items()}
        for g, v in images.get(s, {}).items():
            vec[g] = vec.get(g, TimePoly({}, 1)) + TimePoly.var(EPS, 1, v)
        vecs[s] = {k: v for k, v in vec.items() if v}
    return point_from_vecs(ordering, window.depth, window.height, vecs, label=f"{U.label}+eps")


def _split(x):
    images = {}
    for (s, g), v in x.items():
        if v:
            images.setdefault(s, {})[g] = v
    return images

"""Windowed points of the Grassmannian gr(W).

Monomials of W are numbered by integer *slots*.  The monomial ``u^m`` on
sheet ``k`` has *level* ``m * L / e_k`` where ``L`` is the lcm of all
ramification indices, so that ``z`` has level ``L`` on every sheet.  Slots
are ordered by level and then by component key; slot ``s >= 0`` exactly for
monomials of W+.

A :class:`GrassPoint` stores the echelon rows whose leading (smallest) slot
has level ``>= -S``; every row is known for levels ``< H``.  All slots below
level ``-S`` are leading slots of the point (tail convention); the
corresponding rows are not stored, so any question that needs them is
answered "inconclusive".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

from .linalg import Echelon, nullspace
from .report import INCONCLUSIVE, NO, YES, Report
from .series import DepthError, FractionalSeries, Q, format_scalar, parse_series
from .walgebra import RamificationData, WElement, embed_v_in_w, parse_ram_header, trace

__all__ = [
    "SlotOrdering",
    "GrassPoint",
    "echelonize",
    "index",
    "contains",
    "is_algebra_point",
    "is_hurwitz_point",
    "trace_point",
    "intersect_V",
    "perp",
    "act_gamma_point",
    "act_aut_point",
    "vm_element",
    "inverse_different",
    "vacuum_point",
    "polynomial_point",
    "format_point",
    "parse_point",
    "restrict_window",
    "same_point",
    "point_from_vecs",
    "normalizer",
]

ORDERING_TAG = "level-key/1"


@dataclass(frozen=True)
class SlotOrdering:
    """Bijection between integer slots and monomials ``(key, m)`` of W."""

    ram: RamificationData

    @cached_property
    def keys(self):
        return self.ram.keys

    @cached_property
    def steps(self):
        L = self.ram.lcm
        return tuple(L // self.ram.e(k) for k in self.ram.keys)

    @property
    def L(self):
        return self.ram.lcm

    def first_slot(self, level):
        """Slot of the first monomial whose level is ``>= level``."""
        return _first_slot(self.steps, level)

    def slot(self, kidx, m):
        return _slot(self.steps, kidx, m)

    def monomial(self, s):
        """``(key index, exponent numerator)`` of slot ``s``."""
        return _monomial(self.steps, s)

    def level_of_slot(self, s):
        k, m = self.monomial(s)
        return m * self.steps[k]

    def level(self, kidx, m):
        return m * self.steps[kidx]

    def slots_between(self, lo_level, hi_level):
        """All slots with ``lo_level <= level < hi_level`` in increasing order."""
        return range(self.first_slot(lo_level), self.first_slot(hi_level))

    # -- conversion -------------------------------------------------------
    def to_vec(self, w, hi_level=None, lo_level=None):
        """Sparse slot vector of ``w`` for levels in ``[lo_level, hi_level)``."""
        vec = {}
        steps = self.steps
        for kidx, s in enumerate(w.parts):
            d = steps[kidx]
            top = None if hi_level is None else -((-hi_level) // d)
            if s.hi is not None and (top is None or s.hi < top):
                raise DepthError("element is not known up to the requested level")
            for m, c in s.terms():
                if top is not None and m >= top:
                    break
                if lo_level is not None and m * d < lo_level:
                    continue
                vec[_slot(steps, kidx, m)] = c
        return vec

    def from_vec(self, vec, hi_level=None):
        """WElement with the given coordinates, truncated at ``hi_level``."""
        per = [dict() for _ in self.keys]
        for s, c in vec.items():
            k, m = _monomial(self.steps, s)
            per[k][m] = c
        parts = []
        for kidx, key in enumerate(self.keys):
            d = self.steps[kidx]
            hi = None if hi_level is None else -((-hi_level) // d)
            parts.append(FractionalSeries.make(self.ram.e(key), per[kidx], hi))
        return WElement(self.ram, tuple(parts))


@lru_cache(maxsize=None)
def _first_slot(steps, level):
    if level >= 0:
        return sum(-((-level) // d) for d in steps)
    return -sum((-level) // d for d in steps)


@lru_cache(maxsize=1 << 20)
def _slot(steps, kidx, m):
    lam = m * steps[kidx]
    base = _first_slot(steps, lam)
    return base + sum(1 for j in range(kidx) if lam % steps[j] == 0)


@lru_cache(maxsize=1 << 20)
def _monomial(steps, s):
    # largest level with first_slot(level) <= s
    lo, hi = -abs(s) * max(steps) - max(steps) - 1, abs(s) * max(steps) + max(steps) + 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _first_slot(steps, mid) <= s:
            lo = mid
        else:
            hi = mid
    lam = lo
    offset = s - _first_slot(steps, lam)
    here = [k for k, d in enumerate(steps) if lam % d == 0]
    k = here[offset]
    return k, lam // steps[k]


# -- points -----------------------------------------------------------------

@dataclass(frozen=True)
class GrassPoint:
    """Echelon rows (leading coefficient 1, fully reduced) of a windowed point."""

    ordering: SlotOrdering
    S: int
    H: int
    rows: tuple
    leads: tuple
    label: str = field(default="", compare=False)

    @property
    def ram(self):
        return self.ordering.ram

    @cached_property
    def vecs(self):
        return {p: self.ordering.to_vec(r, self.H) for p, r in zip(self.leads, self.rows)}

    @cached_property
    def echelon(self):
        ech = Echelon()
        ech.rows = dict(self.vecs)
        return ech

    @cached_property
    def lead_set(self):
        return frozenset(self.leads)

    @property
    def window_slot(self):
        """Smallest slot inside the window (level ``-S``)."""
        return self.ordering.first_slot(-self.S)

    @property
    def top_slot(self):
        """First slot beyond the precision bound (level ``H``)."""
        return self.ordering.first_slot(self.H)

    def row_by_lead(self, s):
        return self.rows[self.leads.index(s)]

    def lead_level(self, s):
        return self.ordering.level_of_slot(s)

    def gaps(self):
        """Non-leading negative slots inside the window."""
        return [s for s in range(self.window_slot, 0) if s not in self.lead_set]

    def with_label(self, label):
        return GrassPoint(self.ordering, self.S, self.H, self.rows, self.leads, label)


def echelonize(rows, ram, S, H, check_tail_from=None, label=""):
    """Echelon point spanned by ``rows`` (each known for levels ``< H``).

    Rows whose leading slot lies below level ``-S`` are used for reduction
    and then dropped (tail convention).  With ``check_tail_from = S'`` the
    builder asserts that every slot with level in ``[-S', -S)`` is leading.
    """
    ordering = SlotOrdering(ram)
    ech = Echelon()
    for w in rows:
        vec = ordering.to_vec(w, H)
        ech.insert(vec)
    ech.full_reduce()
    lo = ordering.first_slot(-S)
    if check_tail_from is not None:
        missing = [s for s in range(ordering.first_slot(-check_tail_from), lo) if s not in ech.rows]
        if missing:
            raise DepthError(
                f"tail convention violated: {len(missing)} slots below the window are not leading; increase budget"
            )
    leads = tuple(p for p in sorted(ech.rows) if p >= lo)
    top = ordering.first_slot(H)
    out_rows = []
    for p in leads:
        vec = {k: v for k, v in ech.rows[p].items() if k < top}
        out_rows.append(ordering.from_vec(vec, H))
    return GrassPoint(ordering, S, H, tuple(out_rows), leads, label)


def point_from_vecs(ordering, S, H, vecs, label=""):
    """Assemble a point from already reduced echelon vectors ``{lead: vec}``."""
    lo = ordering.first_slot(-S)
    top = ordering.first_slot(H)
    leads = tuple(p for p in sorted(vecs) if p >= lo)
    rows = tuple(ordering.from_vec({k: v for k, v in vecs[p].items() if k < top}, H) for p in leads)
    return GrassPoint(ordering, S, H, rows, leads, label)


def index(U):
    """``#(leading slots >= 0) - #(non-leading slots in [-S, 0))``."""
    nonneg = sum(1 for s in U.leads if s >= 0)
    return nonneg - len(U.gaps())


def reduce_vec(U, vec):
    return U.echelon.reduce(vec)


def classify_remainder(U, rem, bound_slot):
    rem = {k: v for k, v in rem.items() if k < bound_slot and v}
    if any(k < U.window_slot for k in rem):
        return INCONCLUSIVE, rem
    if rem:
        return NO, rem
    return YES, rem


def contains(U, w, witness=False):
    """Three-valued membership of ``w`` in ``U`` at depth."""
    level = w.known_level()
    level = U.H if level is None else min(level, U.H)
    vec = U.ordering.to_vec(w, level)
    rem = U.echelon.reduce(vec)
    verdict, rem = classify_remainder(U, rem, U.ordering.first_slot(level))
    return (verdict, rem) if witness else verdict


def _describe_slot(U, s):
    k, m = U.ordering.monomial(s)
    i, j = U.ram.keys[k]
    return f"u[{i},{j}]^{m}"


def is_algebra_point(U, pairs="window"):
    """Check ``1 in U`` and ``row_i * row_j in U`` for certifiable pairs."""
    rep = Report("is_algebra_point")
    rep.data["S"] = U.S
    one = WElement.one(U.ram)
    v = contains(U, one)
    if v != YES:
        (rep.fail if v == NO else rep.inconclusive)("constant 1 is not in U")
    levels = [U.lead_level(s) for s in U.leads]
    checked = 0
    n = len(U.rows)
    for i in range(n):
        for j in range(i, n):
            if levels[i] + levels[j] < -U.S:
                continue
            bound = U.H + min(levels[i], levels[j], 0)
            prod = _mul_below(U, U.rows[i], U.rows[j], bound)
            verdict, rem = contains(U, prod, witness=True)
            checked += 1
            if verdict == NO:
                s = min(rem)
                rep.fail(
                    f"row {_describe_slot(U, U.leads[i])} * row {_describe_slot(U, U.leads[j])} escapes at slot "
                    f"{_describe_slot(U, s)} (coefficient {format_scalar(rem[s])})"
                )
                return rep
            if verdict == INCONCLUSIVE:
                rep.inconclusive(f"pair ({U.leads[i]}, {U.leads[j]}) inconclusive at depth")
    rep.data["pairs_checked"] = checked
    return rep


def _mul_below(U, a, b, level):
    parts = []
    for kidx, (x, y) in enumerate(zip(a.parts, b.parts)):
        d = U.ordering.steps[kidx]
        hi = -((-level) // d)
        parts.append(x.mul_below(y, hi))
    return WElement(U.ram, tuple(parts))


def is_hurwitz_point(U):
    """Check ``embed(tr(row)) in U`` for every row at depth."""
    rep = Report("is_hurwitz_point")
    rep.data["S"] = U.S
    for s, row in zip(U.leads, U.rows):
        t = embed_v_in_w(trace(row), U.ram)
        verdict, rem = contains(U, t, witness=True)
        if verdict == NO:
            w = min(rem)
            rep.fail(
                f"trace of row {_describe_slot(U, s)} escapes at slot {_describe_slot(U, w)} "
                f"(coefficient {format_scalar(rem[w])})"
            )
            return rep
        if verdict == INCONCLUSIVE:
            rep.inconclusive(f"trace of row at slot {s} inconclusive at depth")
    return rep


def _v_depths(U):
    L = U.ordering.L
    return U.S // L, U.H // L


def trace_point(U):
    """Echelonized image of the trace of the rows (a point of gr(V))."""
    ram_v = U.ram.v_data()
    Sv, Hv = _v_depths(U)
    rows = [trace(r) for r in U.rows]
    rows = [WElement(ram_v, r.parts) for r in rows]
    return echelonize(rows, ram_v, Sv, Hv, label="trace")


def intersect_V(U):
    """Elements of U lying in V (within the window), as a point of gr(V)."""
    ram, ordering = U.ram, U.ordering
    n = ram.n
    big = ordering.first_slot(U.H) + 1
    ech = Echelon()
    for idx, row in enumerate(U.rows):
        defect = row - embed_v_in_w(trace(row), ram).scale(Q(1, n))
        vec = ordering.to_vec(defect, U.H)
        vec[big + idx] = Q(1)
        ech.insert(vec)
    combos = []
    for p, vec in ech.rows.items():
        if p >= big:
            combos.append({k - big: v for k, v in vec.items() if k >= big})
    ram_v = ram.v_data()
    Sv, Hv = _v_depths(U)
    vrows = []
    for combo in combos:
        acc = {}
        for idx, c in combo.items():
            for s, x in U.vecs[U.leads[idx]].items():
                acc[s] = acc.get(s, 0) + c * x
        w = ordering.from_vec({s: x for s, x in acc.items() if x}, U.H)
        vrows.append(_restrict_to_v(w, ram_v))
    return echelonize(vrows, ram_v, Sv, Hv, label="intersect_V")


def _restrict_to_v(w, ram_v):
    parts = []
    for i in range(ram_v.r):
        key = next(k for k in w.ram.keys if k[0] == i + 1)
        s = w[key]
        e = s.e
        terms = {m // e: c for m, c in s.terms() if m % e == 0}
        hi = None if s.hi is None else -((-s.hi) // e)
        parts.append(FractionalSeries.make(1, terms, hi))
    return WElement(ram_v, tuple(parts))


def dual_slot(ordering, s):
    """Slot paired with ``s`` by T2 (same sheet, ``m -> -e - m``)."""
    k, m = ordering.monomial(s)
    e = ordering.ram.e(ordering.keys[k])
    return ordering.slot(k, -e - m)


def perp(U, S_out=None):
    """Orthogonal complement of U for T2, as a windowed point.

    The result has depth ``min(S, H + L - 1)`` and precision ``S + 1 - L``
    (see the module notes on which rows of U are needed).
    """
    ordering, ram = U.ordering, U.ram
    L = ordering.L
    if S_out is None:
        S_out = min(U.S, U.H + L - 1)
    P_out = U.S + 1 - L
    if S_out > U.H + L - 1 or P_out <= 0:
        raise DepthError("window too shallow for the orthogonal complement")
    lo, top = ordering.first_slot(-S_out), ordering.first_slot(P_out)
    eqs = []
    for s in U.leads:
        if U.lead_level(s) <= -L - P_out:
            continue
        eq = {}
        for t, c in U.vecs[s].items():
            d = dual_slot(ordering, t)
            if lo <= d < top:
                k, _ = ordering.monomial(t)
                eq[d] = c * ram.e(ordering.keys[k])
            elif d >= top:
                raise DepthError("orthogonality condition leaves the window")
        eqs.append(eq)
    basis = nullspace(eqs, range(lo, top))
    return point_from_vecs(ordering, S_out, P_out, basis, label="perp")


def act_gamma_point(gamma, U):
    """Multiply every row by ``gamma`` and re-echelonize.

    ``gamma`` must be an exact element (e.g. a monomial); the depth shrinks
    by the spread of the level shifts it can produce.
    """
    ordering = U.ordering
    lows, highs = [], []
    for kidx, s in enumerate(gamma.parts):
        if s.hi is not None:
            raise DepthError("act_gamma_point expects an exact multiplier")
        ts = s.terms()
        if not ts:
            raise ValueError("multiplier must be a unit on every sheet")
        d = ordering.steps[kidx]
        lows.append(ts[0][0] * d)
        highs.append(ts[-1][0] * d)
    lo_shift, hi_shift = min(lows), max(highs)
    S_new = U.S - max(hi_shift, 0) - max(0, hi_shift - lo_shift)
    H_new = U.H + lo_shift
    if S_new < 1 or H_new <= -S_new:
        raise DepthError("window too shallow for this multiplier")
    rows = [gamma * r for r in U.rows]
    rows = [r.truncate_levels(H_new) for r in rows]
    return echelonize(rows, U.ram, S_new, H_new)


def act_aut_point(gbar, U):
    """Apply a sheet substitution to every row and re-echelonize."""
    from .groups import apply_substitution

    rows = [apply_substitution(gbar, r) for r in U.rows]
    H_new = min(r.known_level() for r in rows if r.known_level() is not None) if rows else U.H
    H_new = min(H_new, U.H)
    if H_new <= 0:
        raise DepthError(f"substitution known too coarsely: precision drops to level {H_new}")
    rows = [r.truncate_levels(H_new) for r in rows]
    return echelonize(rows, U.ram, U.S, H_new)


# -- normalizing monomials -----------------------------------------------------

def vm_element(ram, m):
    """Round-robin monomial of total slot shift ``m`` (``v_0 = 1``)."""
    rb = ram.rbar
    q, rem = divmod(m, rb)
    exps = {key: q + (1 if idx < rem else 0) for idx, key in enumerate(ram.keys)}
    return WElement.monomials(ram, exps)


def inverse_different(ram):
    """``delta = (u^(1-e))`` per sheet; its slot shift is ``rbar - r n``."""
    return WElement.monomials(ram, {k: 1 - ram.e(k) for k in ram.keys})


def monomial_exponents(w):
    out = {}
    for key, s in w.items():
        ts = s.terms()
        if len(ts) != 1 or s.hi is not None or ts[0][1] != 1:
            raise ValueError("not a monic monomial")
        out[key] = ts[0][0]
    return out


def slot_shift(w):
    return sum(monomial_exponents(w).values())


def in_big_cell(X):
    """True iff X (of index 0) is complementary to W+ within the window."""
    return not any(s >= 0 for s in X.leads) and not X.gaps()


def normalizer_candidates(ram, m):
    base = monomial_exponents(vm_element(ram, m))
    yield dict(base)
    keys = ram.keys
    for a in keys:
        for b in keys:
            if a != b:
                exps = dict(base)
                exps[a] += 1
                exps[b] -= 1
                yield exps


def normalizer(U):
    """Monomial ``v`` of shift ``index(U)`` with ``v^-1 U`` in the big cell.

    The round-robin ``v_m`` is tried first; if it leaves the point off the
    big cell, single transfers ``u_a u_b^-1`` are tried in canonical order.
    Returns ``(v, v^-1 U)`` or ``(None, None)``.
    """
    m = index(U)
    for exps in normalizer_candidates(U.ram, m):
        v = WElement.monomials(U.ram, exps)
        X = act_gamma_point(WElement.monomials(U.ram, {k: -x for k, x in exps.items()}), U)
        if in_big_cell(X):
            return v, X
    return None, None


# -- reference points -----------------------------------------------------------

def vacuum_point(ram, S, H=None):
    """The index-0 point spanned by all negative monomials (tau = 1)."""
    H = S if H is None else H
    ordering = SlotOrdering(ram)
    vecs = {s: {s: Q(1)} for s in range(ordering.first_slot(-S), 0)}
    return point_from_vecs(ordering, S, H, vecs, label="vacuum")


def polynomial_point(ram, S, H=None):
    """The algebra ``prod C[u^-1]`` (index rbar); the trivial algebra point."""
    H = S if H is None else H
    ordering = SlotOrdering(ram)
    lo = ordering.first_slot(-S)
    vecs = {s: {s: Q(1)} for s in range(lo, 0)}
    for kidx in range(len(ram.keys)):
        s = ordering.slot(kidx, 0)
        vecs[s] = {s: Q(1)}
    return point_from_vecs(ordering, S, H, vecs, label="polynomial")


# -- point files ---------------------------------------------------------------

def format_point(U):
    lines = [
        f"# point {U.label}".rstrip(),
        U.ram.header(),
        f"S = {U.S}",
        f"H = {U.H}",
        f"ordering = {ORDERING_TAG}",
        f"rows = {len(U.rows)}",
    ]
    for r in U.rows:
        lines.append(" | ".join(s.to_literal() for s in r.parts))
    return "\n".join(lines) + "\n"


def parse_point(text):
    """Parse a point file; the rows must already be in canonical echelon form."""
    lines = text.splitlines()
    body = []
    label = ""
    for no, ln in enumerate(lines, 1):
        if ln.startswith("#"):
            if ln.startswith("# point"):
                label = ln[len("# point"):].strip()
            continue
        if ln.strip():
            body.append((no, ln))
    if len(body) < 5:
        raise ValueError("point file: truncated header")

    def field_value(item, name):
        no, ln = item
        k, _, v = ln.partition("=")
        if k.strip() != name:
            raise ValueError(f"line {no}, column 1: expected '{name} = ...'")
        return v.strip()

    try:
        ram = parse_ram_header(body[0][1])
    except ValueError as exc:
        raise ValueError(f"line {body[0][0]}, column 1: {exc}") from None
    S = int(field_value(body[1], "S"))
    H = int(field_value(body[2], "H"))
    tag = field_value(body[3], "ordering")
    if tag != ORDERING_TAG:
        raise ValueError(f"line {body[3][0]}: unsupported ordering tag {tag!r}")
    nrows = int(field_value(body[4], "rows"))
    if len(body) - 5 != nrows:
        raise ValueError(f"point file declares {nrows} rows, found {len(body) - 5}")
    rows = []
    for no, ln in body[5:]:
        parts = []
        col = 1
        for piece in ln.split("|"):
            try:
                parts.append(parse_series(piece.strip()))
            except ValueError as exc:
                raise ValueError(f"line {no}, column {col}: {exc}") from None
            col += len(piece) + 1
        try:
            rows.append(WElement(ram, tuple(parts)))
        except ValueError as exc:
            raise ValueError(f"line {no}: {exc}") from None
    U = echelonize(rows, ram, S, H, label=label)
    if len(U.rows) != nrows or any(a != b for a, b in zip(U.rows, rows)):
        raise ValueError("point file rows are not in canonical echelon form")
    return U


def restrict_window(U, S=None, H=None):
    """The same point viewed at a shallower depth and/or precision."""
    S = U.S if S is None else min(S, U.S)
    H = U.H if H is None else min(H, U.H)
    top = U.ordering.first_slot(H)
    vecs = {p: {k: v for k, v in U.vecs[p].items() if k < top} for p in U.leads}
    return point_from_vecs(U.ordering, S, H, vecs, U.label)


def same_point(U, V):
    """Equality at the common window: same leading slots and rows agreeing below ``min(H)``."""
    if U.ram != V.ram:
        return False
    S, H = min(U.S, V.S), min(U.H, V.H)
    a, b = restrict_window(U, S, H), restrict_window(V, S, H)
    return a.leads == b.leads and all(a.vecs[p] == b.vecs[p] for p in a.leads)

"""Tau functions as windowed determinants and Baker-Akhiezer functions.

For a point ``X`` of index 0 in the big cell the echelon rows are
``b_s = u^s + (terms in W+)`` for every negative slot ``s``.  With
``g(t) = exp(sum_i t_i u^-i)`` on every sheet, the coefficient of
``g(t) b_s`` at a negative slot of level ``lambda`` has weighted degree at
least ``-lambda / d_max`` (``d_max`` the largest level step), and
multiplication by ``g`` is unitriangular on the negative part.  So the
infinite determinant equals the determinant of the finite block of negative
slots with level ``>= -N`` once ``N >= D * d_max``.

Points of other index ``m`` are first moved to index 0 by a monomial ``v``
of slot shift ``m`` (see :func:`satohurwitz.grassmannian.normalizer`).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

from .grassmannian import (
    act_gamma_point,
    contains,
    in_big_cell,
    inverse_different,
    monomial_exponents,
    normalizer,
    perp,
)
from .report import INCONCLUSIVE, NO, Report
from .series import DepthError, FractionalSeries, Q
from .timepoly import TimePoly, format_monomial, tvar
from .walgebra import WElement

__all__ = [
    "g_coefficients",
    "times_gamma",
    "tau",
    "TauResult",
    "BAFunction",
    "ba",
    "ba_direct",
    "adjoint_ba",
    "ba_expansion_check",
    "det_timepoly",
]

ZETA = "z"


def g_coefficients(key, D, tag="t", sign=1):
    """``h_j`` with ``exp(sign * sum t_i x^i) = sum h_j x^j`` for ``j <= D``."""
    a, b = key
    h = [TimePoly.const(1, D)]
    for j in range(1, D + 1):
        acc = TimePoly({}, D)
        for i in range(1, j + 1):
            acc = acc + TimePoly.var(tvar(a, b, i, tag), D, sign * i) * h[j - i]
        h.append(acc * Q(1, j))
    return h


def times_gamma(ram, D, tag="t", sign=1):
    """The element ``exp(sign * sum_i t_i u^-i)`` of Gamma_W over the time ring."""
    parts = []
    for key in ram.keys:
        h = g_coefficients(key, D, tag, sign)
        parts.append(FractionalSeries.make(ram.e(key), {-j: c for j, c in enumerate(h)}))
    return WElement(ram, tuple(parts))


# -- determinants over the time ring -------------------------------------------------

def det_timepoly(rows, D):
    """Determinant of a square matrix of TimePoly (or rational) entries.

    Pivots are entries with invertible constant term; what is left has
    nilpotent entries only, so its determinant has weight at least its size
    and is expanded by minors when that size is at most ``D``.
    """
    n = len(rows)
    M = [[_tp(x, D) for x in row] for row in rows]
    sign = 1
    det = TimePoly.const(1, D)
    active_r = list(range(n))
    active_c = list(range(n))
    while active_r:
        piv = None
        for i in active_r:
            for j in active_c:
                if M[i][j].constant_term():
                    piv = (i, j)
                    break
            if piv:
                break
        if piv is None:
            break
        i, j = piv
        # sign of moving (i, j) to the leading position of the active block
        sign *= (-1) ** (active_r.index(i) + active_c.index(j))
        p = M[i][j]
        det = det * p
        pinv = p.inverse()
        active_r.remove(i)
        active_c.remove(j)
        for k in active_r:
            f = M[k][j]
            if not f:
                continue
            f = f * pinv
            rowk, rowi = M[k], M[i]
            for l in active_c:
                if rowi[l]:
                    rowk[l] = rowk[l] - f * rowi[l]
    k = len(active_r)
    if k:
        if k > D:
            return TimePoly({}, D)
        block = [[M[i][j] for j in active_c] for i in active_r]
        det = det * _leibniz(block, D)
    return det * sign


def _tp(x, D):
    if isinstance(x, TimePoly):
        return x
    return TimePoly.const(x, D) if x else TimePoly({}, D)


def _leibniz(block, D):
    n = len(block)
    total = TimePoly({}, D)
    for perm in permutations(range(n)):
        term = TimePoly.const(_perm_sign(perm), D)
        for i, j in enumerate(perm):
            term = term * block[i][j]
            if not term:
                break
        total = total + term
    return total


def _perm_sign(perm):
    sign, seen = 1, set()
    for i in range(len(perm)):
        if i in seen:
            continue
        j, length = i, 0
        while j not in seen:
            seen.add(j)
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


# -- tau ---------------------------------------------------------------------------------

def _window_levels(ram, D):
    return D * max(ram.lcm // ram.e(k) for k in ram.keys)


def _negative_window(ordering, N):
    return list(range(ordering.first_slot(-N), 0))


def _tau_matrix(X, D, N, shift=None, zeta_key=None, tag="t"):
    """Matrix of ``g(t) S b_s`` on negative slots of level ``>= -N``.

    ``shift = ((ab_idx), (cd_idx))`` encodes ``S = u_ab / u_cd`` and the
    column for ``s`` is placed at ``sigma(s)``; ``zeta_key`` adds the shift
    ``t -> t + [zeta]`` on that sheet.
    """
    ordering, ram = X.ordering, X.ram
    rows_slots = _negative_window(ordering, N)
    row_pos = {s: i for i, s in enumerate(rows_slots)}
    gcoef = {}
    for kidx, key in enumerate(ram.keys):
        h = g_coefficients(key, D, tag)
        if zeta_key == key:
            zeta = [TimePoly.const(1, D)]
            zv = TimePoly.var((ZETA, key[0], key[1], 1), D)
            for j in range(1, D + 1):
                zeta.append(zeta[-1] * zv)
            h = [sum((h[i] * zeta[j - i] for i in range(j + 1)), TimePoly({}, D)) for j in range(D + 1)]
        gcoef[kidx] = h
    ab = cd = None
    if shift is not None:
        ab, cd = shift
    lo = ordering.first_slot(-N - ordering.L)
    if lo < X.window_slot:
        raise DepthError("tau window exceeds the depth of the point; deepen window")
    n = len(rows_slots)
    M = [[0] * n for _ in range(n)]
    filled = set()
    special = None
    if shift is not None:
        special = (ordering.slot(ab, -1), ordering.slot(cd, -1))
    for s in range(lo, 0):
        k, m = ordering.monomial(s)
        if shift is None:
            target = s
        elif special[0] == s and ab != cd:
            target = special[1]
        else:
            mm = m + (1 if k == ab else 0) - (1 if k == cd else 0)
            target = ordering.slot(k, mm)
        if target not in row_pos:
            continue
        col = row_pos[target]
        filled.add(col)
        vec = X.vecs.get(s)
        if vec is None:
            raise DepthError("point is not in the big cell at this window")
        for t, c in vec.items():
            tk, tm = ordering.monomial(t)
            if shift is not None:
                tm = tm + (1 if tk == ab else 0) - (1 if tk == cd else 0)
            if tm >= D:
                continue
            h = gcoef[tk]
            for j, hj in enumerate(h):
                em = tm - j
                if em >= 0 or not hj:
                    continue
                r = ordering.slot(tk, em)
                if r in row_pos:
                    i = row_pos[r]
                    M[i][col] = M[i][col] + hj * c if M[i][col] else hj * c
    if len(filled) != n:
        raise DepthError("tau frame is not square; deepen window")
    need = D * max(ordering.steps)
    if X.H < need:
        raise DepthError("point precision too low for this time degree")
    return M


@dataclass
class TauResult:
    poly: TimePoly
    normalized: bool
    v: dict
    N: int
    D: int

    def __str__(self):
        return self.poly.to_literal()


def _normalized_point(U, v=None):
    if v is None:
        v, X = normalizer(U)
        if v is None:
            return None, None
        return monomial_exponents(v), X
    X = act_gamma_point(WElement.monomials(U.ram, {k: -e for k, e in v.items()}), U)
    return v, X


def tau(U, D, N=None, v=None):
    """Normalized tau function of ``U`` to weighted degree ``D``."""
    ram = U.ram
    N = _window_levels(ram, D) if N is None else N
    if N < _window_levels(ram, D):
        raise ValueError("window must cover D times the largest level step")
    v, X = _normalized_point(U, v)
    if X is None:
        raise DepthError("no normalizing monomial puts this point in the big cell")
    M = _tau_matrix(X, D, N)
    det = det_timepoly(M, D)
    c0 = det.constant_term()
    if c0:
        return TauResult(det * (1 / c0), True, v, N, D)
    return TauResult(det, False, v, N, D)


def _big_cell_point(U, v):
    v, X = _normalized_point(U, v)
    if X is None or not in_big_cell(X):
        raise DepthError("off big cell")
    return v, X


# -- Baker-Akhiezer functions -------------------------------------------------------------

@dataclass
class BAFunction:
    """``psi_ab`` as one series per component key with TimePoly coefficients.

    ``v`` is the normalizing monomial (exponent per key); the elements
    ``u_ab^-1 * v * psi`` have time-coefficients in the point.
    """

    ab: tuple
    ram: object
    parts: tuple
    D: int
    v: dict
    adjoint: bool = False
    label: str = ""

    def component(self, key):
        return self.parts[self.ram.keys.index(key)]

    def element(self):
        """``u_ab^-1 * v * psi`` as a WElement over the time ring."""
        exps = dict(self.v)
        exps[self.ab] = exps.get(self.ab, 0) - 1
        out = []
        for key, s in zip(self.ram.keys, self.parts):
            out.append(s.shift(exps.get(key, 0)))
        return WElement(self.ram, tuple(out))

    def time_monomials(self):
        monos = set()
        for s in self.parts:
            for _, c in s.terms():
                monos.update(c.terms)
        return sorted(monos, key=lambda m: (sum(v[3] * k for v, k in m), m))

    def coefficient(self, mono):
        """Rational W-element: coefficient of a time monomial in :meth:`element`.

        On each sheet it is known for ``u``-exponents ``<= D - weight`` of the
        monomial, before the shift by ``v`` and ``u_ab^-1``.
        """
        w = sum(v[3] * k for v, k in mono)
        el = self.element()
        exps = dict(self.v)
        exps[self.ab] = exps.get(self.ab, 0) - 1
        parts = []
        for key, s in zip(self.ram.keys, el.parts):
            hi = self.D - w + 1 + exps.get(key, 0)
            terms = {m: c.coefficient(mono) for m, c in s.terms() if m < hi}
            parts.append(FractionalSeries.make(self.ram.e(key), terms, hi))
        return WElement(self.ram, tuple(parts))

    def equals(self, other):
        return self.ab == other.ab and all(
            {m: c for m, c in a.terms()} == {m: c for m, c in b.terms()} for a, b in zip(self.parts, other.parts)
        )


def _canonical(parts, D):
    """Keep in the ``u^m`` coefficient only time weights ``<= D - max(m, 0)``."""
    out = []
    for s in parts:
        terms = {}
        for m, c in s.terms():
            if m > D:
                continue
            c = c.truncate(D - max(m, 0))
            if c:
                terms[m] = c
        out.append(FractionalSeries.make(s.e, terms))
    return tuple(out)


def _substitute_zeta(poly, key, D):
    """Split a TimePoly in ``t`` and ``zeta`` into ``{zeta power: TimePoly}``."""
    zv = (ZETA, key[0], key[1], 1)
    out = {}
    for mono, c in poly.terms.items():
        k = 0
        rest = []
        for var, p in mono:
            if var == zv:
                k = p
            else:
                rest.append((var, p))
        out.setdefault(k, {})[tuple(rest)] = c
    return {k: TimePoly(t, D) for k, t in out.items()}


def ba(U, ab, D, N=None, v=None, tag="t"):
    """``psi_ab`` by the tau-quotient formula on every component."""
    ram = U.ram
    N = _window_levels(ram, D) if N is None else N
    v, X = _big_cell_point(U, v)
    keys = ram.keys
    ai = keys.index(ab)
    tau_t = det_timepoly(_tau_matrix(X, D, N, tag=tag), D)
    c0 = tau_t.constant_term()
    inv_tau = (tau_t * (1 / c0)).inverse() * (1 / c0)
    parts = []
    for ci, cd in enumerate(keys):
        M = _tau_matrix(X, D, N, shift=(ai, ci), zeta_key=cd, tag=tag)
        T = det_timepoly(M, D) * inv_tau
        by_power = _substitute_zeta(T, cd, D)
        pref = g_coefficients(cd, D, tag, sign=-1)
        acc = {}
        for k, coef in by_power.items():
            for j, hj in enumerate(pref):
                term = coef * hj
                if term:
                    m = k - j
                    acc[m] = acc[m] + term if m in acc else term
        parts.append(FractionalSeries.make(ram.e(cd), acc))
    return BAFunction(ab, ram, _canonical(parts, D), D, v, label=U.label)


def ba_direct(U, ab, D, N=None, v=None, tag="t"):
    """``psi_ab`` from the element of ``g(t) X`` equal to ``u_ab^-1`` modulo W+.

    Independent of the determinant formula: one linear solve over the time
    ring, then ``psi = g^-1 u_ab (that element)``.
    """
    ram = U.ram
    ordering = U.ordering
    # u_ab^-1 g^-1 reaches one level step below the tau window
    N = _window_levels(ram, D) + max(ordering.steps) if N is None else N
    v, X = _big_cell_point(U, v)
    if X.H <= D * max(ordering.steps) + max(ordering.steps):
        raise DepthError("point precision too low for this time degree")
    M = _tau_matrix(X, D, N, tag=tag)
    slots = _negative_window(ordering, N)
    ai = ram.keys.index(ab)
    target = slots.index(ordering.slot(ai, -1))
    n = len(slots)
    rhs = [TimePoly.const(1 if i == target else 0, D) for i in range(n)]
    x = _solve(M, rhs, D)
    acc = [dict() for _ in ram.keys]
    for s, coef in zip(slots, x):
        if not coef:
            continue
        for t, c in X.vecs[s].items():
            k, m = ordering.monomial(t)
            if k == ai:
                m += 1
            if m > D:
                continue
            acc[k][m] = acc[k][m] + coef * c if m in acc[k] else coef * c
    parts = tuple(FractionalSeries.make(ram.e(key), acc[k]) for k, key in enumerate(ram.keys))
    return BAFunction(ab, ram, _canonical(parts, D), D, v, label=U.label)


def _solve(M, rhs, D):
    n = len(M)
    A = [[_tp(x, D) for x in row] + [rhs[i]] for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col].constant_term()), None)
        if piv is None:
            raise DepthError("off big cell")
        A[col], A[piv] = A[piv], A[col]
        inv = A[col][col].inverse()
        A[col] = [x * inv if x else x for x in A[col]]
        for r in range(n):
            if r != col and A[r][col]:
                f = A[r][col]
                A[r] = [a - f * b if b else a for a, b in zip(A[r], A[col])]
    return [A[i][n] for i in range(n)]


def adjoint_ba(U, ab, D, N=None, v=None, P=None):
    """``psi*_ab(t) = psi_ab,perp(U)(-t)``, normalized by ``delta * v^-1``."""
    ram = U.ram
    if v is None:
        v, _ = _big_cell_point(U, None)
    delta = monomial_exponents(inverse_different(ram))
    vstar = {k: delta[k] - v.get(k, 0) for k in ram.keys}
    P = perp(U) if P is None else P
    psi = ba(P, ab, D, N, vstar)
    parts = tuple(_negate_series(s) for s in psi.parts)
    return BAFunction(ab, ram, parts, D, vstar, adjoint=True, label=f"{U.label}-adjoint")


def _negate_series(s):
    return FractionalSeries.make(s.e, {m: c.negate_times() for m, c in s.terms()}, s.hi)


def ba_expansion_check(U, D, psis=None):
    """Time-coefficients of ``u_ab^-1 v psi_ab`` lie in U and reach every pole order.

    Membership is tested in U itself.  Coverage is tested on the normalized
    point ``v^-1 U``: its leads ``u_k^m`` with ``-1 - D <= m <= -1`` (the poles
    reachable at degree D) must all occur as leads of the coefficients of
    ``u_ab^-1 psi_ab``.  Multiplying by ``v`` does not preserve leads because
    sheets of different ramification shift by different levels.
    """
    rep = Report("ba_expansion_check")
    rep.data["D"] = D
    ram, ordering = U.ram, U.ordering
    if psis is None:
        try:
            psis = [ba(U, ab, D) for ab in ram.keys]
        except DepthError as exc:
            rep.inconclusive(str(exc))
            return rep
    leads = set()
    checked = 0
    for psi in psis:
        unshift = {k: -e for k, e in psi.v.items()}
        for mono in psi.time_monomials():
            x = psi.coefficient(mono)
            if x.is_zero():
                continue
            y = x * WElement.monomials(ram, unshift)
            vec = ordering.to_vec(y, y.known_level())
            if vec:
                leads.add(min(vec))
            verdict = contains(U, x)
            checked += 1
            if verdict == NO:
                rep.fail(f"coefficient of {format_monomial(mono)} in psi_{psi.ab} is not in the point")
                return rep
            if verdict == INCONCLUSIVE:
                rep.inconclusive(f"coefficient of {format_monomial(mono)} in psi_{psi.ab} inconclusive")
    targets = {ordering.slot(kidx, m) for kidx in range(len(ram.keys)) for m in range(-1 - D, 0)}
    missing = sorted(targets - leads)
    rep.data["coefficients_checked"] = checked
    rep.data["leads_covered"] = len(targets & leads)
    if missing:
        k, m = ordering.monomial(missing[0])
        rep.fail(f"{len(missing)} pole orders are not reached, first u[{ram.keys[k][0]},{ram.keys[k][1]}]^{m}")
    return rep

"""Bilinear identity and E-KP residue checks at weighted degree D.

For points ``U, U'`` with normalizers ``v, v'`` the checked quantities are

* bilinear: ``T2(u_ab^-1 v psi_ab,U(t), u_cd^-1 v'* psi*_cd,U'(t'))`` with
  independent time sets ``t`` and ``t'`` (tag ``"s"``),
* E-KP: ``sum_l res_{z_l} tr(x)_l tr(y)_l`` with the same two elements for
  ``U = U' = B``, each branch using its own variable ``z_l``.

``v'* = delta / v'`` is the normalizer of the orthogonal complement.  The
BA functions are computed at degree ``D + 1`` so that every product term of
total weight ``<= D`` is complete (see the module tests).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

from .grassmannian import inverse_different, monomial_exponents
from .report import FAIL, PASS
from .series import DepthError, FractionalSeries, Q, format_scalar, root_sum
from .tau_ba import BAFunction, adjoint_ba, ba
from .timepoly import TimePoly, format_monomial
from .walgebra import sheet_trace, symmetrize

__all__ = [
    "ResidueReport",
    "bilinear_residue",
    "ekp_residue",
    "ekp_scan",
    "ekp_factors",
    "brute_force_pairing",
    "brute_force_ekp",
]


@dataclass
class ResidueRow:
    ab: tuple
    cd: tuple
    value: TimePoly
    branch_values: tuple = ()

    @property
    def zero(self):
        return not self.value

    def witness(self):
        if not self.value:
            return None
        mono = self.value.monomials()[0]
        return mono, self.value.terms[mono]


@dataclass
class ResidueReport:
    kind: str
    D: int
    S: int
    rows: list = field(default_factory=list)
    variant: str = "adjoint"
    internal_degree: int = 0

    @property
    def zero(self):
        return all(r.zero for r in self.rows)

    @property
    def status(self):
        return PASS if self.zero else FAIL

    def first_witness(self):
        for r in self.rows:
            w = r.witness()
            if w is not None:
                return r, w
        return None

    def table(self):
        lines = ["a,b,c,d\tverdict\twitness\tcoefficient\tD\tS"]
        for r in self.rows:
            w = r.witness()
            idx = f"{r.ab[0]},{r.ab[1]},{r.cd[0]},{r.cd[1]}"
            if w is None:
                lines.append(f"{idx}\tzero\t-\t0\t{self.D}\t{self.S}")
            else:
                mono, c = w
                lines.append(f"{idx}\tnonzero\t{format_monomial(mono)}\t{format_scalar(c)}\t{self.D}\t{self.S}")
        return "\n".join(lines)

    def render(self):
        extra = f", variant = {self.variant}" if self.kind == "ekp_residue" else ""
        head = f"{self.kind}: {self.status} (D = {self.D}, S = {self.S}{extra})"
        return head + "\n" + self.table()


def _retag(parts, tag):
    return tuple(
        FractionalSeries.make(s.e, {m: c.map_vars(lambda v: (tag,) + v[1:]) for m, c in s.terms()}) for s in parts
    )


def _shifts(psi):
    exps = dict(psi.v)
    exps[psi.ab] = exps.get(psi.ab, 0) - 1
    return [exps.get(k, 0) for k in psi.ram.keys]


def _lower(m):
    # nonzero time weights of a psi coefficient at u^m are at least this
    return max(-m, 0)


def _degree_needed(ram, D, sx, sy, mode):
    """Smallest BA degree making every product term of weight ``<= D`` complete.

    A psi coefficient at ``u^m`` is complete to weight ``D' - max(m, 0)`` and
    vanishes below weight ``max(-m, 0)``.  ``sx, sy`` are the per-key shifts
    from psi to the paired elements; ``mode`` is ``"T2"`` (same sheet, u-exponents
    summing to ``-e``) or ``"branch"`` (same branch, z-exponents summing to -1).
    """
    keys = ram.keys
    pairs = []
    for i, a in enumerate(keys):
        for j, b in enumerate(keys):
            if (mode == "T2" and i == j) or (mode == "branch" and a[0] == b[0]):
                pairs.append((i, j))
    need = D
    span = 2 * (D + 2) * ram.lcm + 2 * max(abs(s) for s in list(sx) + list(sy)) + 2 * ram.lcm
    for i, j in pairs:
        e, f = ram.e(keys[i]), ram.e(keys[j])
        for X in range(-span, span + 1):
            if mode == "T2":
                Y = -e - X
            else:
                if X % e:
                    continue
                Y = f * (-1 - X // e)
            m, mp = X - sx[i], Y - sy[j]
            if _lower(m) + _lower(mp) > D:
                continue
            need = max(need, D - _lower(mp) + max(m, 0), D - _lower(m) + max(mp, 0))
    return need


def _element(psi, D, tag=None):
    """``u_ab^-1 v psi`` with coefficients cut to total weight ``D``."""
    parts = tuple(FractionalSeries.make(s.e, {m: TimePoly(c.terms, D) for m, c in s.terms()}) for s in psi.parts)
    if tag is not None:
        parts = _retag(parts, tag)
    return BAFunction(psi.ab, psi.ram, parts, D, psi.v, psi.adjoint, psi.label).element()


def _paired_elements(U, U2, D, mode, variant="adjoint", P=None):
    """BA elements of U (times t) and adjoint or literal ones of U2 (times s)."""
    ram = U.ram
    keys = ram.keys
    probe_x = {ab: ba(U, ab, 0) for ab in keys}
    probe_y = {cd: _second(U2, cd, 0, variant, P) for cd in keys}
    Dp = D
    for ab in keys:
        for cd in keys:
            Dp = max(Dp, _degree_needed(ram, D, _shifts(probe_x[ab]), _shifts(probe_y[cd]), mode))
    xs = {ab: _element(ba(U, ab, Dp), D) for ab in keys}
    ys = {cd: _element(_second(U2, cd, Dp, variant, P), D, tag="s") for cd in keys}
    return xs, ys, Dp


def _second(U, cd, D, variant, P=None):
    if variant == "adjoint":
        return adjoint_ba(U, cd, D, P=P)
    if variant == "literal":
        psi = ba(U, cd, D)
        delta = monomial_exponents(inverse_different(U.ram))
        psi.v = {k: delta[k] - psi.v.get(k, 0) for k in U.ram.keys}
        return psi
    raise ValueError("variant must be 'adjoint' or 'literal'")


def _residue(series):
    if not series.terms():
        return None
    c = series.coefficient(-1)
    return c if c else None


def bilinear_residue(U, U2, D, pairs=None):
    """``T2`` of the normalized BA elements of ``U`` against adjoint ones of ``U2``."""
    if U.ram.partitions != U2.ram.partitions:
        raise ValueError("points live in different spaces")
    xs, ys, Dp = _paired_elements(U, U2, D, "T2")
    rep = ResidueReport("bilinear_residue", D, min(U.S, U2.S), internal_degree=Dp)
    keys = U.ram.keys
    for ab in keys:
        for cd in keys:
            if pairs is not None and (ab, cd) not in pairs:
                continue
            total = TimePoly({}, D)
            for a, b in zip(xs[ab].parts, ys[cd].parts):
                c = _residue(sheet_trace(a * b))
                if c is not None:
                    total = total + c
            rep.rows.append(ResidueRow(ab, cd, total))
    return rep


def _branch_traces(w, method="filter"):
    """``tr(w)`` per branch, one z-series each.

    ``method="filter"`` keeps exponents divisible by e (times e);
    ``method="roots"`` substitutes ``xi^i u`` with tagged root classes and sums.
    """
    out = [FractionalSeries.zero(1) for _ in range(w.ram.r)]
    for key, s in w.items():
        t = sheet_trace(s) if method == "filter" else symmetrize(s)
        out[key[0] - 1] = out[key[0] - 1] + t
    return out


def ekp_residue(B, ab, cd, D, variant="adjoint", merge_branches=False, same_times=False):
    """E-KP residue for one index pair; see :func:`ekp_scan`."""
    return ekp_scan(B, D, variant, [(ab, cd)], merge_branches=merge_branches, same_times=same_times)


def ekp_factors(B, D, variant="adjoint", method="filter"):
    """Per-branch traced factors ``{ab: [tr x]}``, ``{cd: [tr y]}`` and the BA degree used."""
    xs, ys, Dp = _paired_elements(B, B, D, "branch", variant)
    tx = {ab: _branch_traces(w, method) for ab, w in xs.items()}
    ty = {cd: _branch_traces(w, method) for cd, w in ys.items()}
    return tx, ty, Dp


def ekp_scan(B, D, variant="adjoint", pairs=None, merge_branches=False, same_times=False, method="filter"):
    """E-KP residues for all index pairs (or the given ones).

    The first factor is ``tr(u_ab^-1 v psi_ab(t))``.  With ``variant="adjoint"``
    the second is ``tr(u_cd^-1 v* psi*_cd(s))``, which vanishes against the
    first on every Hurwitz point; ``"literal"`` uses ``psi_cd(s)`` with the same
    normalizing exponents instead.  Each branch has its own ``z_l`` unless
    ``merge_branches``; ``same_times`` identifies ``s`` with ``t`` afterwards.
    """
    tx, ty, Dp = ekp_factors(B, D, variant, method)
    rep = ResidueReport("ekp_residue", D, B.S, variant=variant, internal_degree=Dp)
    keys = B.ram.keys
    for ab in keys:
        for cd in keys:
            if pairs is not None and (ab, cd) not in pairs:
                continue
            fx, fy = tx[ab], ty[cd]
            if merge_branches:
                fx, fy = [sum(fx[1:], fx[0])], [sum(fy[1:], fy[0])]
            branch_vals = []
            total = TimePoly({}, D)
            for a, b in zip(fx, fy):
                c = _residue(a * b)
                c = TimePoly({}, D) if c is None else c
                if same_times:
                    c = c.map_vars(lambda v: ("t",) + v[1:])
                branch_vals.append(c)
                total = total + c
            rep.rows.append(ResidueRow(ab, cd, total, tuple(branch_vals)))
    return rep


# -- independent oracles ------------------------------------------------------------------

def _as_t(mono):
    return tuple(sorted((("t",) + v[1:], k) for v, k in mono))


def brute_force_pairing(U, U2, ab, cd, alpha, beta, degree):
    """Coefficient of ``t^alpha s^beta`` in the bilinear residue, term by term.

    Works on the rational W-elements of single time monomials at BA degree
    ``degree`` and refuses (DepthError) when their known ranges cannot
    certify the residue.
    """
    x = ba(U, ab, degree).coefficient(alpha)
    y = adjoint_ba(U2, cd, degree).coefficient(_as_t(beta))
    total = Q(0)
    for key, a, b in zip(x.ram.keys, x.parts, y.parts):
        e = x.ram.e(key)
        total += e * _product_coefficient(a, b, -e)
    return total


def _product_coefficient(a, b, target):
    """Coefficient of ``target`` in ``a * b`` from single monomials, with depth checks."""
    total = Q(0)
    for m1, c1 in a.terms():
        m2 = target - m1
        if not b.known_below(m2):
            raise DepthError("oracle product not certified at this depth")
        total += c1 * b.coefficient(m2)
    if a.hi is not None:
        for m2, c2 in b.terms():
            if target - m2 >= a.hi and c2:
                raise DepthError("oracle product not certified at this depth")
    return total


def brute_force_ekp(B, ab, cd, alpha, beta, degree, variant="adjoint"):
    """E-KP coefficient of ``t^alpha s^beta``, expanded monomial by monomial.

    Every term ``x_m (xi_e^i u)^m`` of the first factor is multiplied with
    every term ``y_m' (xi_f^i' u')^m'`` of the second on the same branch; the
    products landing on ``z^-1`` are collected by root class in a common
    cyclotomic field and evaluated exactly.  No exponent filtering is used.
    """
    x = ba(B, ab, degree).coefficient(alpha)
    y = _second(B, cd, degree, variant).coefficient(_as_t(beta))
    ram = B.ram
    total = Q(0)
    for l in range(1, ram.r + 1):
        sheets = [(k, key) for k, key in enumerate(ram.keys) if key[0] == l]
        L = 1
        for _, key in sheets:
            L = L * ram.e(key) // gcd(L, ram.e(key))
        classes = {}
        for i1, k1 in sheets:
            a, e = x.parts[i1], ram.e(k1)
            for i2, k2 in sheets:
                b, f = y.parts[i2], ram.e(k2)
                _check_reach(a, b, e, f)
                for m1, c1 in a.terms():
                    for m2, c2 in b.terms():
                        # z^(m1/e + m2/f) = z^-1
                        if m1 * f + m2 * e != -e * f:
                            continue
                        for r1 in range(e):
                            for r2 in range(f):
                                cls = (r1 * m1 * (L // e) + r2 * m2 * (L // f)) % L
                                classes[cls] = classes.get(cls, 0) + c1 * c2
        if classes:
            total += root_sum(L, classes)
    return total


def _check_reach(a, b, e, f):
    """Both factors must be known wherever a partner term can land on ``z^-1``."""
    for s1, s2, p, q in ((a, b, e, f), (b, a, f, e)):
        if s2.hi is None:
            continue
        for m1, c1 in s1.terms():
            # partner exponent m2 = -f - m1 f / e on the other sheet (rational)
            num = -p * q - m1 * q
            if num % p == 0 and num // p >= s2.hi:
                raise DepthError("oracle residue not certified at this depth")

"""The end-to-end acceptance checks, shared by ``satohurwitz selftest`` and the test suite.

Each check returns a :class:`~satohurwitz.report.Report`.  ``S`` is the point
depth and ``D`` the weighted time degree; ``None`` means the declared default.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass

from .grassmannian import (
    act_gamma_point,
    index,
    is_algebra_point,
    is_hurwitz_point,
    perp,
    same_point,
    vacuum_point,
)
from .groups import GVElement, GVWElement, bracket, lift_automorphism, lift_vector_field
from .hierarchy import bilinear_residue, brute_force_ekp, brute_force_pairing, ekp_scan
from .krichever import (
    HyperellipticCover,
    LaurentMonomialCover,
    build_point,
    catalog,
    hurwitz_genus,
    perturbed_laurent,
    verify_krichever,
)
from .linalg import Echelon
from .picard import (
    SemidirectElement,
    act_semidirect_w,
    build_pic_point,
    certify_pic_transitivity,
    check_stabilizer,
    semidirect_mul,
    verify_pic_point,
)
from .report import FAIL, Report
from .series import DepthError, FractionalSeries, Q
from .tangent import (
    certify_local_transitivity,
    certify_restriction_injectivity,
    deformed_point,
    derivation_constraints,
    trace_constraints,
    virasoro_tangent_map,
)
from .tau_ba import ba_expansion_check, tau
from .walgebra import RamificationData, WElement, pair_T2, sheet_trace, trace

__all__ = ["Check", "CHECKS", "run_checks"]

ELLIPTIC_POINT = (Q(3, 2), Q(3, 4))


@dataclass(frozen=True)
class Check:
    name: str
    func: object
    budget: float  # seconds


def _points(S, specs=None):
    return [(spec, build_point(spec, S)) for spec in (specs or catalog())]


# -- trace and pairing ------------------------------------------------------------

def trace_law(S=None, D=None, window=40):
    rep = Report("trace-law")
    for e in (2, 3, 4):
        for l in range(-window, window + 1):
            t = sheet_trace(FractionalSeries.monomial(e, l))
            want = FractionalSeries.monomial(1, l // e, e) if l % e == 0 else FractionalSeries.zero(1)
            if (t - want).terms():
                rep.fail(f"e = {e}, l = {l}: trace is {t}")
                return rep
    rep.data["window"] = window
    return rep


def pairing_law(S=None, D=None, window=20):
    rep = Report("pairing")
    for e in (2, 3, 4):
        ram = RamificationData.of([[e]])
        key = ram.keys[0]
        mono = {a: WElement.monomial(ram, key, a) for a in range(-window - e, window + e + 1)}
        for a in range(-window, window + 1):
            for b in range(-window, window + 1):
                c = pair_T2(mono[a], mono[b])
                if c != (e if a + b == -e else 0):
                    rep.fail(f"e = {e}: T2(u^{a}, u^{b}) = {c}")
                    return rep
        # Gram matrix of the window against its dual window
        gram = Echelon()
        for a in range(-window, window + 1):
            gram.insert({b: c for b in range(-window - e, window + 1) if (c := pair_T2(mono[a], mono[b]))})
        if len(gram) != 2 * window + 1:
            rep.fail(f"e = {e}: window Gram matrix is singular")
    rep.data["window"] = window
    return rep


# -- points -----------------------------------------------------------------------

def krichever_points(S=None, D=None):
    S = S or 30
    rep = Report("krichever")
    expected = {"laurent-n2": 0, "laurent-n3": 0, "hyperelliptic": 1}
    for spec in catalog():
        ram = spec.ram
        g = hurwitz_genus(ram.n, spec.base_genus, ram.r, ram.rbar)
        if g != expected[spec.label]:
            rep.fail(f"{spec.label}: genus {g}, expected {expected[spec.label]}")
        rep.merge(verify_krichever(spec, S))
    rep.data["S"] = S
    return rep


def perp_involution(S=None, D=None):
    S = S or 30
    rep = Report("perp")
    for spec, U in _points(S):
        ram = U.ram
        P = perp(U)
        PP = perp(P)
        if not same_point(U, PP):
            rep.fail(f"{spec.label}: perp is not an involution at the window")
        want = ram.rbar - ram.r * ram.n - index(U)
        if index(P) != want:
            rep.fail(f"{spec.label}: index of perp is {index(P)}, expected {want}")
    rep.data["S"] = S
    return rep


def tau_stability(S=None, D=None):
    S = S or 30
    D = 4 if D is None else D
    rep = Report("tau")
    for spec, U in _points(S):
        a = tau(U, D)
        b = tau(U, D, a.N + 5)
        if a.poly != b.poly:
            rep.fail(f"{spec.label}: tau changes between windows {a.N} and {b.N}")
    for parts in ([[1]], [[2], [2]], [[2, 1], [3]]):
        ram = RamificationData.of(parts)
        # the vacuum is exact, so it is built deep enough for its own window
        t = tau(vacuum_point(ram, max(S, (D + 1) * ram.lcm)), D)
        if t.poly.to_literal() != "1":
            rep.fail(f"vacuum tau for {parts} is {t.poly.to_literal()}")
    rep.data.update(S=S, D=D)
    return rep


def ba_basis(S=None, D=None):
    S = S or 20
    D = 4 if D is None else D
    rep = Report("ba-basis")
    for spec, U in _points(S):
        sub = ba_expansion_check(U, D)
        sub.name = f"ba_expansion_check[{spec.label}]"
        rep.merge(sub)
    rep.data.update(S=S, D=D)
    return rep


# -- hierarchies ------------------------------------------------------------------------

def _split_witness(mono):
    alpha = tuple((v, k) for v, k in mono if v[0] == "t")
    beta = tuple((("t",) + v[1:], k) for v, k in mono if v[0] == "s")
    return alpha, beta


def bilinear_identity(S=None, D=None):
    S = S or 20
    D = 3 if D is None else D
    rep = Report("bilinear")
    for spec, U in _points(S):
        res = bilinear_residue(U, U, D)
        if res.status != "PASS":
            rep.fail(f"{spec.label}: nonzero bilinear residue {res.first_witness()}")
    ram = RamificationData.of([[1]])
    U = vacuum_point(ram, S)
    gamma = WElement(ram, (FractionalSeries.make(1, {0: 1, 1: 2}),))
    U2 = act_gamma_point(gamma, U)
    res = bilinear_residue(U2, U, D)
    row = next((r for r in res.rows if not r.zero), None)
    if row is None:
        rep.fail("distinct points give a zero bilinear residue")
    else:
        mono, coeff = row.witness()
        alpha, beta = _split_witness(mono)
        oracle = brute_force_pairing(U2, U, row.ab, row.cd, alpha, beta, res.internal_degree)
        rep.data["distinct_witness"] = f"{mono} -> {coeff}"
        if oracle != coeff:
            rep.fail(f"oracle gives {oracle} for the distinct-pair witness, residue gives {coeff}")
    rep.data.update(S=S, D=D)
    return rep


def ekp_hierarchy(S=None, D=None):
    S = S or 20
    D = 3 if D is None else D
    rep = Report("ekp")
    for spec, U in _points(S):
        res = ekp_scan(U, D)
        if res.status != "PASS":
            rep.fail(f"{spec.label}: nonzero E-KP residue {res.first_witness()}")
    B = build_point(perturbed_laurent(S=max(S, 30)), max(S, 30))
    res = ekp_scan(B, D)
    row = next((r for r in res.rows if not r.zero), None)
    if row is None:
        rep.fail("the perturbed algebra point passes the E-KP hierarchy")
    else:
        mono, coeff = row.witness()
        alpha, beta = _split_witness(mono)
        oracle = brute_force_ekp(B, row.ab, row.cd, alpha, beta, res.internal_degree)
        rep.data["perturbed_witness"] = f"{row.ab},{row.cd}: {coeff}"
        if oracle != coeff:
            rep.fail(f"oracle gives {oracle} for the perturbed witness, residue gives {coeff}")
    rep.data.update(S=S, D=D)
    return rep


# -- symmetries ------------------------------------------------------------------------------

def _random_field(rng, ram, span=3):
    fields = []
    for _ in range(ram.r):
        terms = {k: Q(rng.randint(-5, 5), rng.randint(1, 4)) for k in range(-span, span + 2) if rng.random() < 0.6}
        fields.append(FractionalSeries.make(1, terms))
    return lift_vector_field(fields, ram)


def lie_trace(S=None, D=None, count=20, window=20, seed=7):
    rep = Report("lie-trace")
    rng = random.Random(seed)
    ram = RamificationData.of([[2, 1, 1], [4], [3, 1]])
    monos = [WElement.monomial(ram, key, l) for key in ram.keys for l in range(-window, window + 1)]
    fields = [_random_field(rng, ram) for _ in range(count)]
    for n, Dw in enumerate(fields):
        for w in monos:
            lhs = trace(Dw.apply(w))
            rhs = Dw.apply_v(trace(w))
            if any((a - b).terms() for a, b in zip(lhs.parts, rhs.parts)):
                rep.fail(f"field {n}: trace does not commute with the derivation on {w}")
                return rep
    for n in range(count // 2):
        D1, D2 = fields[2 * n], fields[2 * n + 1]
        B = bracket(D1, D2)
        for w in monos:
            lhs = B.apply(w)
            rhs = D1.apply(D2.apply(w)) - D2.apply(D1.apply(w))
            if any((a - b).terms() for a, b in zip(lhs.parts, rhs.parts)):
                rep.fail(f"lift does not respect the bracket of fields {2 * n}, {2 * n + 1}")
                return rep
    rep.data.update(fields=count, window=window)
    return rep


# -- tangent spaces -----------------------------------------------------------------------------

def local_transitivity(S=None, D=None, K=12):
    S = S or 30
    rep = Report("transitivity")
    for spec, U in _points(S):
        a = certify_local_transitivity(U, K)
        a.name = f"transitivity[{spec.label}]"
        rep.merge(a)
        b = certify_restriction_injectivity(U, K)
        b.name = f"injectivity[{spec.label}]"
        rep.merge(b)
        rep.data[f"{spec.label}.rank"] = f"{a.data['rank']}/{a.data['dimension']}"
    rep.data.update(S=S, K=K)
    return rep


def _pic_cases():
    return [
        (LaurentMonomialCover(2), {}),
        (LaurentMonomialCover(2), {Q(1): 1}),
        (LaurentMonomialCover(2), {Q(1): 2}),
        (HyperellipticCover(), {ELLIPTIC_POINT: 1}),
    ]


def _random_semidirect(rng, ram, hi):
    maps = [FractionalSeries.make(1, {1: 1, 2: Q(rng.randint(-3, 3), rng.randint(1, 3))}) for _ in range(ram.r)]
    g = lift_automorphism(GVElement(tuple(maps)), ram, hi=hi)
    parts = [FractionalSeries.make(ram.e(k), {0: 1, rng.randint(1, 3): Q(rng.randint(-4, 4))}) for k in ram.keys]
    return SemidirectElement(g, WElement(ram, tuple(parts)))


def _agree(x, y, level):
    return (x - y).truncate_levels(level).is_zero()


def _semidirect_checks(rep, triples=5, seed=11, level=10, hi=24):
    rng = random.Random(seed)
    ram = RamificationData.of([[2], [2]])
    w = WElement(ram, (FractionalSeries.make(2, {-3: 1, 1: 2}), FractionalSeries.make(2, {-1: 1, 2: 1})))
    for n in range(triples):
        x1, x2, x3 = (_random_semidirect(rng, ram, hi) for _ in range(3))
        lhs = act_semidirect_w(semidirect_mul(x2, x1, hi), w)
        rhs = act_semidirect_w(x2, act_semidirect_w(x1, w))
        if not _agree(lhs, rhs, level):
            rep.fail(f"triple {n}: the product does not act as the composite")
        a = semidirect_mul(semidirect_mul(x3, x2, hi), x1, hi)
        b = semidirect_mul(x3, semidirect_mul(x2, x1, hi), hi)
        ga = WElement(ram, a.g.sheets)
        gb = WElement(ram, b.g.sheets)
        if not (_agree(a.gamma, b.gamma, level) and _agree(ga, gb, level)):
            rep.fail(f"triple {n}: the product is not associative")
    x = _random_semidirect(rng, ram, hi)
    g_only = SemidirectElement(x.g, WElement.one(ram))
    c_only = SemidirectElement(GVWElement.identity(ram), x.gamma)
    gc, cg = semidirect_mul(g_only, c_only, hi), semidirect_mul(c_only, g_only, hi)
    if not _agree(gc.gamma, x.gamma, level):
        rep.fail("(g, 1)(id, c) differs from (g, c)")
    if _agree(gc.gamma, cg.gamma, level):
        rep.fail("no non-commutativity witnessed")
    rep.data["semidirect_triples"] = triples


def picard(S=None, D=None, K=12):
    S = S or 30
    rep = Report("picard")
    for spec, divisor in _pic_cases():
        p = build_pic_point(spec, divisor, S)
        tag = f"{spec.label}/deg{sum(divisor.values())}"
        want = 1 - spec.genus + sum(divisor.values())
        if p.chi != want:
            rep.fail(f"{tag}: chi = {p.chi}, Riemann-Roch gives {want}")
        ok = verify_pic_point(p)
        ok.name = f"verify[{tag}]"
        rep.merge(ok)
        st = check_stabilizer(p)
        st.name = f"stabilizer[{tag}]"
        rep.merge(st)
        tr = certify_pic_transitivity(p, K)
        tr.name = f"pic-transitivity[{tag}]"
        rep.merge(tr)
    p = build_pic_point(LaurentMonomialCover(2), {Q(1): 1}, S)
    neg = certify_pic_transitivity(p, K, with_gamma=False)
    rep.data["negative_control"] = f"{neg.data['middle_rank']}/{neg.data['middle_dimension']}"
    if neg.status != FAIL:
        rep.fail("dropping the multiplication block still reaches the full middle dimension")
    _semidirect_checks(rep)
    rep.data.update(S=S, K=K)
    return rep


def dual_numbers(S=None, D=None, seed=3):
    S = S or 30
    rep = Report("dual-numbers")
    rng = random.Random(seed)
    for spec in (LaurentMonomialCover(2), LaurentMonomialCover(3)):
        U = build_point(spec, S)
        der = derivation_constraints(U)
        full = trace_constraints(U, base=derivation_constraints(U))
        window = der.window

        def combo(basis):
            x = {}
            for vec in basis:
                c = Q(rng.randint(-3, 3))
                for k, v in vec.items():
                    x[k] = x.get(k, 0) + c * v
            return {k: v for k, v in x.items() if v}

        def verdicts(x):
            P = deformed_point(U, x, window)
            return is_algebra_point(P).status, is_hurwitz_point(P).status

        tr_sol = combo(full.solution_basis())
        if verdicts(tr_sol) != ("PASS", "PASS"):
            rep.fail(f"{spec.label}: a trace-compatible derivation does not deform to a Hurwitz point")
        only_der = next((v for v in der.solution_basis() if not full.satisfied_by(v)), None)
        if only_der is None:
            rep.fail(f"{spec.label}: every derivation is trace compatible at the window")
        elif verdicts(only_der) != ("PASS", "FAIL"):
            rep.fail(f"{spec.label}: a derivation without the trace condition gives {verdicts(only_der)}")
        noise = {c: Q(rng.randint(1, 5)) for c in rng.sample(der.columns, 3)}
        if der.satisfied_by(noise):
            rep.fail(f"{spec.label}: random map unexpectedly satisfies the derivation rule")
        elif verdicts(noise)[0] != "FAIL":
            rep.fail(f"{spec.label}: a non-derivation deforms to an algebra point")
        tmap = virasoro_tangent_map(U, 3, window)
        if verdicts(tmap.columns[0]) != ("PASS", "PASS"):
            rep.fail(f"{spec.label}: a field image does not deform to a Hurwitz point")
    rep.data["S"] = S
    return rep


CHECKS = [
    Check("trace-law", trace_law, 1),
    Check("pairing", pairing_law, 5),
    Check("krichever", krichever_points, 90),
    Check("perp", perp_involution, 30),
    Check("tau", tau_stability, 60),
    Check("ba-basis", ba_basis, 120),
    Check("bilinear", bilinear_identity, 120),
    Check("ekp", ekp_hierarchy, 180),
    Check("lie-trace", lie_trace, 10),
    Check("transitivity", local_transitivity, 300),
    Check("picard", picard, 300),
    Check("dual-numbers", dual_numbers, 60),
]


def run_checks(names=None, S=None, D=None):
    """Run the checks in order; yields ``(check, report, seconds)``."""
    for check in CHECKS:
        if names and check.name not in names:
            continue
        t0 = time.perf_counter()
        try:
            rep = check.func(S=S, D=D)
        except DepthError as exc:
            rep = Report(check.name)
            rep.inconclusive(str(exc))
        yield check, rep, time.perf_counter() - t0

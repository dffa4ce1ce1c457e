"""Sparse exact linear algebra over the rationals.

Vectors are dictionaries ``{column: value}`` with nonzero rational values.
Columns are integers (slots) or any totally ordered hashable keys.
"""

from __future__ import annotations

import heapq
from math import lcm

import flint

from .series import Q

__all__ = ["Echelon", "rank", "integer_rank", "modular_rank", "nullspace", "solve_particular"]


def _axpy(vec, c, row, pivots, sched, heap):
    """vec -= c * row, scheduling newly created pivot columns."""
    for j, a in row.items():
        nv = vec.get(j, 0) - c * a
        if nv:
            vec[j] = nv
            if pivots is not None and j in pivots and j not in sched:
                sched.add(j)
                heapq.heappush(heap, j)
        else:
            vec.pop(j, None)


class Echelon:
    """Incremental echelon basis; pivot = minimal (or maximal) column of a row.

    With ``lowest=True`` a vector's pivot is its smallest column, matching
    the leading-slot convention of Grassmannian points.
    """

    def __init__(self, lowest=True):
        self.lowest = lowest
        self.rows = {}

    def __len__(self):
        return len(self.rows)

    def _order(self, j):
        return j if self.lowest else _Rev(j)

    def reduce(self, vec):
        """Remainder of ``vec`` after eliminating every pivot column."""
        vec = {k: v for k, v in vec.items() if v}
        if not self.rows:
            return vec
        sched = set()
        heap = []
        for j in vec:
            if j in self.rows:
                sched.add(j)
                heap.append(self._order(j))
        heapq.heapify(heap)
        while heap:
            j = heapq.heappop(heap)
            j = j.v if isinstance(j, _Rev) else j
            sched.discard(j)
            c = vec.get(j)
            if not c:
                continue
            row = self.rows[j]
            for col, a in row.items():
                nv = vec.get(col, 0) - c * a
                if nv:
                    vec[col] = nv
                    if col in self.rows and col not in sched:
                        sched.add(col)
                        heapq.heappush(heap, self._order(col))
                else:
                    vec.pop(col, None)
        return vec

    def pivot_of(self, vec):
        return min(vec) if self.lowest else max(vec)

    def insert(self, vec, reduce=True):
        """Add a vector; returns its pivot or ``None`` when dependent."""
        r = self.reduce(vec) if reduce else dict(vec)
        if not r:
            return None
        p = self.pivot_of(r)
        inv = 1 / Q(r[p])
        if inv != 1:
            r = {k: v * inv for k, v in r.items()}
        self.rows[p] = r
        return p

    def full_reduce(self):
        """Make every row free of the other rows' pivot columns."""
        order = sorted(self.rows, reverse=self.lowest)
        done = Echelon(self.lowest)
        for p in order:
            r = done.reduce(self.rows[p])
            done.rows[p] = r
        self.rows = done.rows
        return self

    def pivots(self):
        return sorted(self.rows)


class _Rev:
    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    def __lt__(self, other):
        return self.v > other.v

    def __eq__(self, other):
        return self.v == other.v

    def __hash__(self):
        return hash(self.v)


def rank(vectors):
    ech = Echelon()
    for v in vectors:
        ech.insert(v)
    return len(ech)


def integer_rank(vectors, columns):
    """Exact rank of sparse rational vectors restricted to ``columns``.

    Rows are scaled to integers and handed to FLINT, whose fraction-free
    elimination stays fast where rational pivoting blows up coefficients.
    """
    index = {c: i for i, c in enumerate(columns)}
    rows = []
    for vec in vectors:
        row = {index[k]: v for k, v in vec.items() if k in index and v}
        if row:
            rows.append(row)
    if not rows or not index:
        return 0
    M = flint.fmpz_mat(len(rows), len(index))
    for r, row in enumerate(rows):
        den = lcm(*(int(Q(v).denominator) for v in row.values()))
        for i, v in row.items():
            v = Q(v)
            M[r, i] = int(v.numerator) * (den // int(v.denominator))
    return M.rank()


# Largest prime below 2**30: word-size arithmetic in FLINT.
PRIME = 1073741789


def modular_rank(vectors, columns, p=PRIME):
    """Rank modulo ``p``; never exceeds the rank over the rationals.

    Rows whose denominators vanish mod ``p`` are skipped, which keeps the
    result a lower bound.
    """
    index = {c: i for i, c in enumerate(columns)}
    rows = []
    for vec in vectors:
        row = {}
        try:
            for k, v in vec.items():
                if k in index and v:
                    v = Q(v)
                    row[index[k]] = int(v.numerator) * pow(int(v.denominator), -1, p) % p
        except ValueError:
            continue
        if row:
            rows.append(row)
    if not rows or not index:
        return 0
    # FLINT ranks wide matrices faster than tall ones
    M = flint.nmod_mat(len(index), len(rows), p)
    for r, row in enumerate(rows):
        for i, x in row.items():
            M[i, r] = x
    return M.rank()


def rref(vectors, lowest=True):
    ech = Echelon(lowest)
    for v in vectors:
        ech.insert(v)
    ech.full_reduce()
    return ech


def nullspace(equations, columns, lowest_pivot_free=True):
    """Basis of ``{x : eq . x = 0 for all eq}`` with support in ``columns``.

    Pivots of the equations are taken at the largest columns, so each basis
    vector has a distinct smallest column (a free column) and the basis is
    in reduced echelon form with respect to smallest columns.
    """
    cols = set(columns)
    ech = Echelon(lowest=not lowest_pivot_free)
    for eq in equations:
        eq = {k: v for k, v in eq.items() if k in cols and v}
        if eq:
            ech.insert(eq)
    ech.full_reduce()
    free = sorted(cols - set(ech.rows))
    basis = {}
    col_to_rows = {}
    for p, row in ech.rows.items():
        for k, v in row.items():
            if k != p:
                col_to_rows.setdefault(k, []).append((p, v))
    for f in free:
        vec = {f: Q(1)}
        for p, v in col_to_rows.get(f, ()):
            vec[p] = -v
        basis[f] = vec
    return basis


def solve_particular(equations, rhs):
    """Return one solution of ``eq . x = rhs`` or ``None`` if inconsistent."""
    ech = Echelon()
    aug = []
    for eq, b in zip(equations, rhs):
        v = dict(eq)
        if b:
            v[_RHS] = Q(b)
        aug.append(v)
    for v in aug:
        r = ech.reduce(v)
        if not r:
            continue
        cols = [k for k in r if k is not _RHS]
        if not cols:
            return None
        p = min(cols)
        inv = 1 / r[p]
        ech.rows[p] = {k: x * inv for k, x in r.items()}
    ech.full_reduce()
    return {p: row.get(_RHS, Q(0)) for p, row in ech.rows.items()}


class _RhsKey:
    def __lt__(self, other):
        return False

    def __gt__(self, other):
        return True

    def __repr__(self):
        return "RHS"


_RHS = _RhsKey()

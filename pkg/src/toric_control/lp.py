"""A small dense two-phase simplex method over the rationals.

Problems are in standard form ``A x = b, x >= 0``. Bland's rule is used for
both entering and leaving variables, so the method terminates and is fully
deterministic. Instances in this package have at most a few hundred entries,
so a dense :class:`~fractions.Fraction` tableau is adequate.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: tuple[Fraction, ...] | None = None
    value: Fraction | None = None
    # For "infeasible": y with A^T y >= 0 and b^T y < 0.
    farkas: tuple[Fraction, ...] | None = None
    # For "optimal": dual multipliers y with A^T y >= c (maximization).
    duals: tuple[Fraction, ...] | None = None


class _Tableau:
    def __init__(self, A, b):
        m = len(A)
        n = len(A[0]) if m else 0
        self.m, self.n = m, n
        # columns: n structural, m artificial; last entry is the rhs
        self.rows = []
        self.sign = []
        for i in range(m):
            s = -1 if b[i] < 0 else 1
            row = [Fraction(s * a) for a in A[i]]
            row += [Fraction(int(j == i)) for j in range(m)]
            row.append(Fraction(s * b[i]))
            self.rows.append(row)
            self.sign.append(s)
        self.basis = [n + i for i in range(m)]

    def pivot(self, r, c):
        rows = self.rows
        prow = rows[r]
        inv = 1 / prow[c]
        if inv != 1:
            rows[r] = prow = [v * inv for v in prow]
        nz = [j for j, v in enumerate(prow) if v]
        for i, row in enumerate(rows):
            if i == r:
                continue
            f = row[c]
            if f:
                for j in nz:
                    row[j] -= f * prow[j]
        self.basis[r] = c

    def reduced_costs(self, cost, allowed):
        """``c_B B^{-1} A_j - c_j`` for each allowed column (maximization)."""
        cb = [cost[j] for j in self.basis]
        out = {}
        for j in allowed:
            s = -cost[j]
            for i, row in enumerate(self.rows):
                if cb[i] and row[j]:
                    s += cb[i] * row[j]
            out[j] = s
        return out

    def run(self, cost, allowed) -> str:
        """Maximize ``cost · x`` over the current basis; returns a status."""
        allowed = sorted(allowed)
        # reduced-cost row, carried through pivots like any other row
        rc = self.reduced_costs(cost, range(self.n + self.m))
        obj = [rc[j] for j in range(self.n + self.m)] + [Fraction(0)]
        while True:
            entering = next((j for j in allowed if obj[j] < 0), None)
            if entering is None:
                return "optimal"
            best = None
            for i, row in enumerate(self.rows):
                a = row[entering]
                if a > 0:
                    ratio = row[-1] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return "unbounded"
            self.pivot(best[1], entering)
            f = obj[entering]
            prow = self.rows[best[1]]
            obj = [o - f * p if p else o for o, p in zip(obj, prow)]

    def solution(self, ncols):
        x = [Fraction(0)] * ncols
        for i, j in enumerate(self.basis):
            if j < ncols:
                x[j] = self.rows[i][-1]
        return x

    def multipliers(self, cost):
        """Dual vector ``c_B B^{-1}`` read off the artificial columns, in original row signs."""
        cb = [cost[j] for j in self.basis]
        y = []
        for k in range(self.m):
            col = self.n + k
            s = sum((cb[i] * row[col] for i, row in enumerate(self.rows) if cb[i]), Fraction(0))
            y.append(s * self.sign[k])
        return y


def linprog(c: Sequence, A: Sequence[Sequence], b: Sequence) -> LPResult:
    """Maximize ``c · x`` subject to ``A x = b`` and ``x >= 0``, exactly."""
    m = len(A)
    n = len(c)
    if m == 0:
        if any(Fraction(v) > 0 for v in c):
            return LPResult("unbounded")
        return LPResult("optimal", tuple(Fraction(0) for _ in range(n)), Fraction(0), duals=())
    T = _Tableau(A, b)
    # phase I: maximize -(sum of artificials)
    cost1 = [Fraction(0)] * n + [Fraction(-1)] * m
    T.run(cost1, range(n + m))
    infeas = sum((T.rows[i][-1] for i, j in enumerate(T.basis) if j >= n), Fraction(0))
    if infeas > 0:
        # optimal phase-I duals: A^T y >= 0 (zero structural costs), b^T y = -infeas
        return LPResult("infeasible", farkas=tuple(T.multipliers(cost1)))
    # drive zero-level artificials out of the basis where possible
    for i in range(m):
        if T.basis[i] >= n:
            j = next((j for j in range(n) if T.rows[i][j] != 0), None)
            if j is not None:
                T.pivot(i, j)
    cost2 = [Fraction(v) for v in c] + [Fraction(0)] * m
    status = T.run(cost2, [j for j in range(n)])
    if status == "unbounded":
        return LPResult("unbounded")
    x = T.solution(n)
    value = sum((Fraction(ci) * xi for ci, xi in zip(c, x)), Fraction(0))
    return LPResult("optimal", tuple(x), value, duals=tuple(T.multipliers(cost2)))


def find_nonnegative(A: Sequence[Sequence], b: Sequence) -> LPResult:
    """Feasibility of ``A x = b, x >= 0``; an infeasible answer carries a Farkas vector.

    The Farkas vector ``y`` satisfies ``A^T y >= 0`` and ``b^T y < 0``.
    """
    n = len(A[0]) if A else 0
    return linprog([0] * n, A, b)

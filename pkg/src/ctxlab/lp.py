"""Exact rational linear programming.

Dense-tableau two-phase simplex over :class:`fractions.Fraction` with
Bland's rule (lowest index enters, lowest basic index leaves on ratio ties),
so it always terminates and the output is deterministic.
Problems are in standard form: ``A x = b, x >= 0``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
OPTIMAL = "optimal"


@dataclass
class LPResult:
    status: str
    x: list[Fraction] | None = None
    value: Fraction | None = None


class _Tableau:
    def __init__(self, rows: list[list[Fraction]], basis: list[int]):
        # each row: coefficients..., rhs
        self.rows = rows
        self.basis = basis
        self.objective: list[Fraction] | None = None

    def pivot(self, r: int, c: int) -> None:
        prow = self.rows[r]
        inv = 1 / prow[c]
        if inv != 1:
            prow = [v * inv for v in prow]
            self.rows[r] = prow
        nz = [j for j, v in enumerate(prow) if v]
        others = [row for i, row in enumerate(self.rows) if i != r]
        if self.objective is not None:
            others.append(self.objective)
        for row in others:
            f = row[c]
            if f:
                for j in nz:
                    row[j] -= f * prow[j]
        self.basis[r] = c

    def run(self, cost: list[Fraction], allowed: int) -> str:
        """Minimize ``cost . x`` over the first ``allowed`` columns (Bland's rule)."""
        self.objective = self._reduced(cost)
        try:
            while True:
                obj = self.objective
                enter = next((j for j in range(allowed) if obj[j] < 0), None)
                if enter is None:
                    return OPTIMAL
                best, leave = None, None
                for i, row in enumerate(self.rows):
                    a = row[enter]
                    if a > 0:
                        ratio = row[-1] / a
                        if (best is None or ratio < best
                                or (ratio == best and self.basis[i] < self.basis[leave])):
                            best, leave = ratio, i
                if leave is None:
                    return UNBOUNDED
                self.pivot(leave, enter)
        finally:
            self.objective = None

    def _reduced(self, cost: list[Fraction]) -> list[Fraction]:
        """Reduced-cost row over every column, rhs last."""
        width = len(self.rows[0]) if self.rows else len(cost) + 1
        red = list(cost) + [Fraction(0)] * (width - len(cost))
        for i, row in enumerate(self.rows):
            cb = cost[self.basis[i]] if self.basis[i] < len(cost) else 0
            if cb:
                for j, v in enumerate(row):
                    if v:
                        red[j] -= cb * v
        return red

    def solution(self, n: int) -> list[Fraction]:
        x = [Fraction(0)] * n
        for i, b in enumerate(self.basis):
            if b < n:
                x[b] = self.rows[i][-1]
        return x


def _phase_one(A: Sequence[Sequence], b: Sequence) -> tuple[_Tableau, int] | None:
    m = len(A)
    n = len(A[0]) if m else 0
    rows = []
    for i in range(m):
        sign = -1 if b[i] < 0 else 1
        row = [Fraction(sign * a) for a in A[i]]
        row += [Fraction(int(i == k)) for k in range(m)]
        row.append(Fraction(sign * b[i]))
        rows.append(row)
    tab = _Tableau(rows, [n + i for i in range(m)])
    cost = [Fraction(0)] * n + [Fraction(1)] * m
    tab.run(cost, n + m)
    if sum((row[-1] for row, bi in zip(tab.rows, tab.basis) if bi >= n), Fraction(0)) != 0:
        return None
    # drive zero-level artificials out of the basis where possible
    for i in range(m):
        if tab.basis[i] >= n:
            j = next((j for j in range(n) if tab.rows[i][j] != 0), None)
            if j is not None:
                tab.pivot(i, j)
    return tab, n


def feasible_point(A: Sequence[Sequence], b: Sequence) -> list[Fraction] | None:
    """A non-negative solution of ``A x = b``, or ``None`` if there is none."""
    if not A:
        return []
    res = _phase_one(A, b)
    if res is None:
        return None
    tab, n = res
    return tab.solution(n)


def minimize(c: Sequence, A: Sequence[Sequence], b: Sequence) -> LPResult:
    """Minimize ``c . x`` subject to ``A x = b, x >= 0``."""
    n = len(c)
    if not A:
        if any(Fraction(v) < 0 for v in c):
            return LPResult(UNBOUNDED)
        return LPResult(OPTIMAL, [Fraction(0)] * n, Fraction(0))
    res = _phase_one(A, b)
    if res is None:
        return LPResult(INFEASIBLE)
    tab, n = res
    m = len(A)
    # artificials left in the basis sit on redundant rows at level zero
    cost = [Fraction(v) for v in c] + [Fraction(0)] * m
    status = tab.run(cost, n)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED)
    x = tab.solution(n)
    return LPResult(OPTIMAL, x, sum((Fraction(ci) * xi for ci, xi in zip(c, x)), Fraction(0)))


def maximize(c: Sequence, A: Sequence[Sequence], b: Sequence) -> LPResult:
    res = minimize([-Fraction(v) for v in c], A, b)
    if res.value is not None:
        res.value = -res.value
    return res


def feasible_inequalities(G: Sequence[Sequence], h: Sequence) -> list[Fraction] | None:
    """A point with ``G y >= h`` (``y`` free), or ``None``.

    Uses the split ``y = y+ - y-`` with one surplus column per row.
    """
    m = len(G)
    if m == 0:
        return []
    n = len(G[0])
    A = []
    for i, row in enumerate(G):
        A.append(list(row) + [-v for v in row] + [-int(k == i) for k in range(m)])
    x = feasible_point(A, h)
    if x is None:
        return None
    return [x[j] - x[n + j] for j in range(n)]

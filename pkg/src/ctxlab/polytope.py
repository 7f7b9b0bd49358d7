"""Exact Fourier-Motzkin projection and inequality descriptions of polytopes.

A :class:`LinearSystem` holds rows ``a . x >= b``.  Internally rows keep
integer coefficients (gcd 1) and a rational right-hand side, so pairing two
rows during elimination only multiplies integers.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Iterable, Iterator, Sequence

from . import lp
from .contextuality import incidence_matrix
from .core import DomainError, LimitExceeded, MeasurementCover, as_fraction
from .inequalities import (CorrelationInequality, LogicalBellInequality, RationalInequality,
                           deterministic_expectations, rational_to_logical)

log = logging.getLogger(__name__)

FM_VARIABLE_LIMIT = 8
CORRELATION_CONTEXT_LIMIT = 8

_Row = tuple[tuple[int, ...], Fraction]


def _normalize(coeffs: Sequence, rhs) -> _Row:
    """Scale so the coefficients are coprime integers (rhs stays rational)."""
    fr = [as_fraction(c) for c in coeffs]
    lcd = reduce(lambda a, b: a * b // math.gcd(a, b), (c.denominator for c in fr), 1)
    ints = [int(c * lcd) for c in fr]
    g = reduce(math.gcd, ints, 0)
    if g == 0:
        return tuple(ints), as_fraction(rhs)
    return tuple(i // g for i in ints), as_fraction(rhs) * lcd / g


def _dedupe(rows: Iterable[_Row]) -> list[_Row] | None:
    """Keep the tightest row per direction; ``None`` if some row reads ``0 >= b > 0``."""
    best: dict[tuple[int, ...], Fraction] = {}
    for coeffs, rhs in rows:
        if not any(coeffs):
            if rhs > 0:
                return None
            continue
        if coeffs not in best or rhs > best[coeffs]:
            best[coeffs] = rhs
    return list(best.items())


@dataclass(frozen=True)
class LinearSystem:
    """Rows ``coefficients . x >= rhs`` over named variables."""

    variables: tuple[str, ...]
    rows: tuple[tuple[tuple[Fraction, ...], Fraction], ...]

    def __post_init__(self):
        variables = tuple(self.variables)
        rows = []
        for coeffs, rhs in self.rows:
            coeffs = tuple(as_fraction(c) for c in coeffs)
            if len(coeffs) != len(variables):
                raise DomainError("row length must equal the number of variables")
            rows.append((coeffs, as_fraction(rhs)))
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "rows", tuple(rows))

    @classmethod
    def _from_internal(cls, variables, rows: list[_Row] | None) -> LinearSystem:
        if rows is None:
            # infeasible: the single row 0 >= 1
            return cls(variables, (((0,) * len(variables), Fraction(1)),))
        return cls(variables, tuple((tuple(Fraction(c) for c in a), b) for a, b in rows))

    def _internal(self) -> list[_Row] | None:
        return _dedupe(_normalize(a, b) for a, b in self.rows)

    def satisfied_by(self, point: Sequence) -> bool:
        point = [as_fraction(p) for p in point]
        return all(sum((a * x for a, x in zip(coeffs, point) if a), Fraction(0)) >= rhs
                   for coeffs, rhs in self.rows)

    def canonical(self) -> list[tuple[tuple[int, ...], int]]:
        """Rows as coprime integer data ``(a, b)`` meaning ``a . x >= b``."""
        out = []
        for coeffs, rhs in self.rows:
            vals = list(coeffs) + [rhs]
            lcd = reduce(lambda p, q: p * q // math.gcd(p, q), (v.denominator for v in vals), 1)
            ints = [int(v * lcd) for v in vals]
            g = reduce(math.gcd, ints, 0) or 1
            ints = [i // g for i in ints]
            out.append((tuple(ints[:-1]), ints[-1]))
        return out

    def __len__(self):
        return len(self.rows)


def fm_eliminate(system: LinearSystem, var: str) -> LinearSystem:
    """Project ``var`` out by pairing its lower and upper bounds."""
    if var not in system.variables:
        raise DomainError(f"{var!r} is not a variable of the system")
    j = system.variables.index(var)
    rows = system._internal()
    keep = tuple(v for v in system.variables if v != var)
    if rows is None:
        return LinearSystem._from_internal(keep, None)
    return LinearSystem._from_internal(keep, _eliminate_column(rows, j))


def _eliminate_column(rows: list[_Row], j: int) -> list[_Row] | None:
    lower, upper, out = [], [], []
    for coeffs, rhs in rows:
        c = coeffs[j]
        rest = coeffs[:j] + coeffs[j + 1:]
        if c > 0:
            lower.append((c, rest, rhs))
        elif c < 0:
            upper.append((-c, rest, rhs))
        else:
            out.append((rest, rhs))
    for cl, al, bl in lower:
        for cu, au, bu in upper:
            coeffs = [cu * x + cl * y for x, y in zip(al, au)]
            out.append(_normalize(coeffs, cu * bl + cl * bu))
    return _dedupe(out)


def _implied(rows: list[_Row], i: int, others: list[int]) -> bool:
    """Whether row ``i`` is a consequence of ``others`` (affine Farkas certificate).

    Looks for ``lam >= 0`` with ``sum lam_j a_j = a_i`` and
    ``sum lam_j b_j >= b_i``; valid because the other rows are feasible.
    """
    a_i, b_i = rows[i]
    n = len(a_i)
    if not others:
        return False
    A = [[rows[j][0][col] for j in others] + [0] for col in range(n)]
    A.append([rows[j][1] for j in others] + [-1])
    return lp.feasible_point(A, list(a_i) + [b_i]) is not None


def _remove_redundant_rows(rows: list[_Row]) -> list[_Row]:
    kept = list(range(len(rows)))
    for i in range(len(rows)):
        others = [j for j in kept if j != i]
        if _implied(rows, i, others):
            kept = others
    return [rows[i] for i in kept]


def remove_redundant(system: LinearSystem) -> LinearSystem:
    """Drop rows implied by the remaining ones; the solution set is unchanged."""
    rows = system._internal()
    if rows is None:
        return LinearSystem._from_internal(system.variables, None)
    if rows and lp.feasible_inequalities([a for a, _ in rows], [b for _, b in rows]) is None:
        return LinearSystem._from_internal(system.variables, None)
    return LinearSystem._from_internal(system.variables, _remove_redundant_rows(rows))


def has_extension(system: LinearSystem, values: dict[str, object]) -> bool:
    """Whether fixing ``values`` leaves the remaining variables a feasible point."""
    unknown = set(values) - set(system.variables)
    if unknown:
        raise DomainError(f"unknown variables {sorted(unknown)}")
    free = [j for j, v in enumerate(system.variables) if v not in values]
    G, h = [], []
    for coeffs, rhs in system.rows:
        fixed = sum((c * as_fraction(values[v]) for c, v in zip(coeffs, system.variables)
                     if v in values and c), Fraction(0))
        row = [coeffs[j] for j in free]
        if not any(row):
            if fixed < rhs:
                return False
            continue
        G.append(row)
        h.append(rhs - fixed)
    return lp.feasible_inequalities(G, h) is not None


def projection_steps(system: LinearSystem, eliminate: Iterable[str],
                     prune: bool = True) -> Iterator[tuple[str, LinearSystem]]:
    """Eliminate several variables one at a time, yielding each intermediate system.

    The next variable minimizes ``#lower * #upper`` (ties: lowest index);
    redundant rows are dropped after every step when ``prune`` is set.
    """
    rows = system._internal()
    variables = list(system.variables)
    todo = set(eliminate)
    unknown = todo - set(variables)
    if unknown:
        raise DomainError(f"unknown variables {sorted(unknown)}")
    if rows is not None and prune and rows:
        if lp.feasible_inequalities([a for a, _ in rows], [b for _, b in rows]) is None:
            rows = None
    while todo:
        if rows is None:
            var = min(todo, key=variables.index)
            variables.remove(var)
        else:
            def cost(j):
                pos = sum(1 for a, _ in rows if a[j] > 0)
                neg = sum(1 for a, _ in rows if a[j] < 0)
                return pos * neg, j
            j = min((variables.index(v) for v in todo), key=cost)
            rows = _eliminate_column(rows, j)
            var = variables.pop(j)
            if rows is not None and prune:
                rows = _remove_redundant_rows(rows)
        todo.discard(var)
        log.debug("eliminated %s, %d rows remain", var, 0 if rows is None else len(rows))
        yield var, LinearSystem._from_internal(tuple(variables), rows)


def project(system: LinearSystem, eliminate: Iterable[str], prune: bool = True) -> LinearSystem:
    """Eliminate several variables, cheapest pairing first, pruning after each step."""
    out = system
    eliminate = list(eliminate)
    if not eliminate:
        return remove_redundant(system) if prune else system
    for _, out in projection_steps(system, eliminate, prune):
        pass
    return out


# -- polytopes on covers -----------------------------------------------------------

@dataclass(frozen=True)
class InequalitySet:
    """``r_i . v <= b_i`` for all ``i``; membership means satisfying every one."""

    cover: MeasurementCover
    inequalities: tuple[RationalInequality, ...]

    def contains(self, model) -> bool:
        return all(ineq.holds(model) for ineq in self.inequalities)

    def violated(self, model) -> list[RationalInequality]:
        return [ineq for ineq in self.inequalities if not ineq.holds(model)]

    def equalities(self) -> list[RationalInequality]:
        """Members whose negation is also a member (one of each pair)."""
        keys = {(ineq.coefficients, ineq.bound) for ineq in self.inequalities}
        out = []
        for ineq in self.inequalities:
            neg = (tuple(-c for c in ineq.coefficients), -ineq.bound)
            if neg in keys and _first_nonzero_positive(ineq.coefficients):
                out.append(ineq)
        return out

    def __len__(self):
        return len(self.inequalities)

    def __iter__(self):
        return iter(self.inequalities)


def _first_nonzero_positive(coeffs) -> bool:
    return next((c > 0 for c in coeffs if c), False)


def cell_names(cover: MeasurementCover) -> list[str]:
    return [f"{ci}:{format(code, f'0{len(cover.contexts[ci])}b')}" for ci, code in cover.cells]


def symbolic_system(cover: MeasurementCover) -> LinearSystem:
    """``M x = y, x >= 0, sum x = 1`` with the equalities as paired rows."""
    inc = incidence_matrix(cover)
    D, N = inc.shape
    dense = inc.dense()
    xs = [f"x{t}" for t in range(N)]
    ys = cell_names(cover)
    rows = []
    for r in range(D):
        a = [int(v) for v in dense[r]]
        e = [0] * D
        e[r] = 1
        rows.append((a + [-v for v in e], 0))
        rows.append(([-v for v in a] + e, 0))
    for t in range(N):
        rows.append(([int(k == t) for k in range(N)] + [0] * D, 0))
    rows.append(([1] * N + [0] * D, 1))
    rows.append(([-1] * N + [0] * D, -1))
    return LinearSystem(tuple(xs + ys), tuple(rows))


def _to_leq(cover: MeasurementCover, system: LinearSystem) -> tuple[RationalInequality, ...]:
    out = []
    for a, b in system.canonical():
        out.append(RationalInequality(cover, tuple(Fraction(-c) for c in a), Fraction(-b)))
    return tuple(sorted(out, key=lambda q: (q.coefficients, q.bound)))


def noncontextual_polytope(cover: MeasurementCover, limit: int = FM_VARIABLE_LIMIT) -> InequalitySet:
    """Irredundant inequalities cutting out the non-contextual models of ``cover``."""
    if cover.n_variables > limit:
        raise LimitExceeded(f"{cover.n_variables} variables exceeds the FM limit {limit}")
    return _noncontextual_polytope(cover)


@lru_cache(maxsize=8)
def _noncontextual_polytope(cover: MeasurementCover) -> InequalitySet:
    system = symbolic_system(cover)
    xs = [v for v in system.variables if v.startswith("x")]
    projected = project(system, xs)
    return InequalitySet(cover, _to_leq(cover, projected))


def complete_logical_bell_set(cover: MeasurementCover, limit: int = FM_VARIABLE_LIMIT,
                              compact: bool = True) -> list[LogicalBellInequality]:
    """Logical Bell inequalities equivalent to the non-contextual polytope.

    Rows that only restate normalization become empty multisets and are dropped.
    """
    out = [rational_to_logical(ineq, compact=compact) for ineq in noncontextual_polytope(cover, limit)]
    return [ineq for ineq in out if len(ineq.multiset)]


def correlation_vertices(cover: MeasurementCover) -> list[tuple[int, ...]]:
    """Distinct deterministic expectation vectors, in order of first appearance."""
    seen: dict[tuple[int, ...], None] = {}
    for row in deterministic_expectations(cover):
        seen.setdefault(tuple(int(v) for v in row))
    return list(seen)


def correlation_polytope(cover: MeasurementCover,
                         limit: int = CORRELATION_CONTEXT_LIMIT) -> list[CorrelationInequality]:
    """Inequalities ``sum l_U E_U <= M`` describing the hull of the ``eta^t``."""
    r = len(cover.contexts)
    if r > limit:
        raise LimitExceeded(f"{r} contexts exceeds the correlation polytope limit {limit}")
    return list(_correlation_polytope(cover))


def correlation_system(cover: MeasurementCover) -> LinearSystem:
    """``E = sum lam_j eta_j, lam >= 0, sum lam = 1`` over distinct vertices."""
    r = len(cover.contexts)
    verts = correlation_vertices(cover)
    V = len(verts)
    lams = [f"l{j}" for j in range(V)]
    es = [f"E{ci}" for ci in range(r)]
    rows = []
    for ci in range(r):
        a = [-verts[j][ci] for j in range(V)]
        e = [int(k == ci) for k in range(r)]
        rows.append((a + e, 0))
        rows.append(([-v for v in a] + [-v for v in e], 0))
    for j in range(V):
        rows.append(([int(k == j) for k in range(V)] + [0] * r, 0))
    rows.append(([1] * V + [0] * r, 1))
    rows.append(([-1] * V + [0] * r, -1))
    return LinearSystem(tuple(lams + es), tuple(rows))


@lru_cache(maxsize=8)
def _correlation_polytope(cover: MeasurementCover) -> tuple[CorrelationInequality, ...]:
    system = correlation_system(cover)
    lams = [v for v in system.variables if v.startswith("l")]
    projected = project(system, lams)
    out = [CorrelationInequality(cover, tuple(-c for c in a), -b) for a, b in projected.canonical()]
    return tuple(sorted(out, key=lambda c: (c.coefficients, c.bound)))


def tight_vertices(ineq: CorrelationInequality) -> list[tuple[int, ...]]:
    return [v for v in correlation_vertices(ineq.cover)
            if sum(l * e for l, e in zip(ineq.coefficients, v)) == ineq.bound]


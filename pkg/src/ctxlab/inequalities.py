"""Logical Bell inequalities and their rational and correlation counterparts."""
from __future__ import annotations

import itertools
import math
from dataclasses import InitVar, dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Mapping, Sequence

import numpy as np

from .contextuality import extends_to_section, incidence_matrix
from .core import (DomainError, EmpiricalModel, MeasurementCover, SupportModel,
                   as_fraction, check_limit, support_of)
from .logic import (FALSE, TRUE, And, Formula, FormulaMultiset, Not, Or, TaggedFormula, Term, Var,
                    is_jointly_satisfiable, max_satisfiable, parity_codes, parity_formula,
                    point_formula, satisfying_codes, support_formula)


class InvalidInequality(DomainError):
    """The inequality is violated by a deterministic model.

    ``witness`` holds the offending global assignment.
    """

    def __init__(self, message: str, witness: dict[str, int] | None = None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class LogicalBellInequality:
    """``sum_i k_i p(phi_i) <= K`` for a K-consistent multiset.

    Construction verifies K-consistency by MAX-SAT.  Pass ``check=False``
    only when consistency is already guaranteed (e.g. the inequality was
    derived from one known to hold on every deterministic model).
    """

    multiset: FormulaMultiset
    bound: int
    check: InitVar[bool] = True

    def __post_init__(self, check: bool):
        if not isinstance(self.multiset, FormulaMultiset):
            object.__setattr__(self, "multiset", FormulaMultiset(tuple(self.multiset)))
        if int(self.bound) != self.bound or self.bound < 0:
            raise DomainError("bound must be a non-negative integer")
        object.__setattr__(self, "bound", int(self.bound))
        if check:
            best = max_satisfiable(self.multiset)
            if best > self.bound:
                raise InvalidInequality(
                    f"multiset is not {self.bound}-consistent: {best} formulas are jointly satisfiable")

    @property
    def cardinality(self) -> int:
        return self.multiset.cardinality

    def normalized(self) -> LogicalBellInequality:
        """Divide multiplicities and bound by their gcd when it divides the bound."""
        g = reduce(math.gcd, (t.k for t in self.multiset), 0)
        if g <= 1 or self.bound % g:
            return self
        terms = tuple(Term(t.k // g, t.tagged) for t in self.multiset)
        return LogicalBellInequality(FormulaMultiset(terms), self.bound // g, check=False)

    def __str__(self):
        parts = [f"{t.k} p({t.tagged})" for t in self.multiset]
        return f"{' + '.join(parts) or '0'} <= {self.bound}"


@dataclass(frozen=True)
class RationalInequality:
    """``r . v <= bound`` with ``r`` aligned to ``cover.cells``."""

    cover: MeasurementCover
    coefficients: tuple[Fraction, ...]
    bound: Fraction

    def __post_init__(self):
        coeffs = tuple(as_fraction(c) for c in self.coefficients)
        if len(coeffs) != len(self.cover.cells):
            raise DomainError(f"expected {len(self.cover.cells)} coefficients, got {len(coeffs)}")
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "bound", as_fraction(self.bound))

    @classmethod
    def from_cells(cls, cover: MeasurementCover, cells: Mapping[tuple[int, int], object],
                   bound) -> RationalInequality:
        coeffs = [Fraction(0)] * len(cover.cells)
        for (ci, code), value in cells.items():
            coeffs[cover.cell_index(ci, code)] = as_fraction(value)
        return cls(cover, tuple(coeffs), bound)

    def value(self, m: EmpiricalModel) -> Fraction:
        return sum((c * p for c, p in zip(self.coefficients, m.vector()) if c), Fraction(0))

    def holds(self, m: EmpiricalModel) -> bool:
        return self.value(m) <= self.bound

    def normalized(self) -> RationalInequality:
        """Integer coefficients and bound with overall gcd 1."""
        ints, bound = _clear(list(self.coefficients) + [self.bound])
        return RationalInequality(self.cover, tuple(Fraction(k) for k in ints), Fraction(bound))

    def integer_data(self) -> tuple[list[int], int]:
        n = self.normalized()
        return [int(c) for c in n.coefficients], int(n.bound)

    def __str__(self):
        terms = []
        for (ci, code), c in zip(self.cover.cells, self.coefficients):
            if c:
                ctx = self.cover.contexts[ci]
                bits = format(code, f"0{len(ctx)}b")
                terms.append(f"{_signed(c)} p({''.join(ctx) if all(len(v) == 1 for v in ctx) else ','.join(ctx)}={bits})")
        return f"{' '.join(terms).lstrip('+ ') or '0'} <= {self.bound}"


def _signed(c: Fraction) -> str:
    return f"+ {c}" if c >= 0 else f"- {-c}"


def _clear(values: Sequence[Fraction]) -> tuple[list[int], int]:
    values = [as_fraction(v) for v in values]
    lcd = reduce(lambda a, b: a * b // math.gcd(a, b), (v.denominator for v in values), 1)
    ints = [int(v * lcd) for v in values]
    g = reduce(math.gcd, ints, 0) or 1
    ints = [i // g for i in ints]
    return ints[:-1], ints[-1]


@dataclass(frozen=True)
class ExpectationVector:
    cover: MeasurementCover
    values: tuple[Fraction, ...]

    def __post_init__(self):
        vals = tuple(as_fraction(v) for v in self.values)
        if len(vals) != len(self.cover.contexts):
            raise DomainError("one expectation per context required")
        if any(abs(v) > 1 for v in vals):
            raise DomainError("expectations must lie in [-1, 1]")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class CorrelationInequality:
    """``sum_U l_U E_U <= M`` with integer data, ``l`` aligned to contexts."""

    cover: MeasurementCover
    coefficients: tuple[int, ...]
    bound: int

    def __post_init__(self):
        if len(self.coefficients) != len(self.cover.contexts):
            raise DomainError("one coefficient per context required")
        vals = [as_fraction(v) for v in self.coefficients] + [as_fraction(self.bound)]
        if any(v.denominator != 1 for v in vals):
            raise DomainError("correlation inequality data must be integers; use from_rational")
        object.__setattr__(self, "coefficients", tuple(int(v) for v in vals[:-1]))
        object.__setattr__(self, "bound", int(vals[-1]))

    @classmethod
    def from_rational(cls, cover: MeasurementCover, coefficients: Sequence, bound) -> CorrelationInequality:
        """Clear denominators and divide by the gcd."""
        ints, b = _clear(list(coefficients) + [bound])
        return cls(cover, tuple(ints), b)

    def value(self, eta: ExpectationVector | Sequence) -> Fraction:
        vals = eta.values if isinstance(eta, ExpectationVector) else eta
        return sum((l * e for l, e in zip(self.coefficients, vals)), Fraction(0))

    def holds(self, eta: ExpectationVector | Sequence) -> bool:
        return self.value(eta) <= self.bound

    def to_rational(self) -> RationalInequality:
        """The same inequality written on the cells of the cover."""
        coeffs = []
        for ci, code in self.cover.cells:
            sign = 1 if bin(code).count("1") % 2 == 0 else -1
            coeffs.append(Fraction(sign * self.coefficients[ci]))
        return RationalInequality(self.cover, tuple(coeffs), Fraction(self.bound))

    def __str__(self):
        terms = [f"{_signed(Fraction(l))} E[{self.cover.label(ci)}]"
                 for ci, l in enumerate(self.coefficients) if l]
        return f"{' '.join(terms).lstrip('+ ') or '0'} <= {self.bound}"


# -- evaluation ----------------------------------------------------------------

@dataclass(frozen=True)
class Evaluation:
    lhs: Fraction
    bound: int
    cardinality: int

    @property
    def violation(self) -> Fraction:
        return max(Fraction(0), self.lhs - self.bound)

    @property
    def maximal(self) -> bool:
        """Algebraic maximum reached against the tightest contradiction bound."""
        return self.cardinality > 0 and self.lhs == self.cardinality and self.bound == self.cardinality - 1

    def __iter__(self):
        yield self.lhs
        yield self.violation


def _context_of(cover: MeasurementCover, tf: TaggedFormula) -> int:
    return cover.context_index(tf.context)


def formula_probability(m: EmpiricalModel, tf: TaggedFormula) -> Fraction:
    """Probability of the event defined by ``tf`` in its context's distribution."""
    ci = _context_of(m.cover, tf)
    return m.event_probability(ci, satisfying_codes(tf.formula, m.cover.contexts[ci]))


def evaluate_logical(m: EmpiricalModel, ineq: LogicalBellInequality) -> Evaluation:
    lhs = sum((t.k * formula_probability(m, t.tagged) for t in ineq.multiset if t.k), Fraction(0))
    return Evaluation(lhs, ineq.bound, ineq.cardinality)


def _supports(model: EmpiricalModel | SupportModel) -> SupportModel:
    return support_of(model) if isinstance(model, EmpiricalModel) else model


def canonical_support_inequality(model: EmpiricalModel | SupportModel,
                                 limit: int | None = None) -> LogicalBellInequality:
    """One formula per context defining its support, bounded by MAX-SAT."""
    sm = _supports(model)
    cover = sm.cover
    terms = tuple(Term(1, TaggedFormula(ctx, event_formula(supp, ctx)))
                  for ctx, supp in zip(cover.contexts, sm.supports))
    ms = FormulaMultiset(terms)
    return LogicalBellInequality(ms, max_satisfiable(ms, limit), check=False)


def possibilistic_witness_inequality(model: EmpiricalModel | SupportModel, context: Iterable[str],
                                     values: Mapping[str, int] | int,
                                     limit: int | None = None) -> LogicalBellInequality:
    """Point formula for a non-extendable support element plus the other rows' supports."""
    sm = _supports(model)
    cover = sm.cover
    ci = cover.context_index(context)
    ctx = cover.contexts[ci]
    code = values if isinstance(values, int) else cover.encode(ctx, values)
    if code not in sm.supports[ci]:
        raise DomainError("local assignment is not in the support")
    if extends_to_section(sm, ci, code, limit):
        raise DomainError("local assignment extends to a global section; no logical witness")
    terms = [Term(1, TaggedFormula(ctx, point_formula(ctx, code)))]
    for cj, (ctx_j, supp) in enumerate(zip(cover.contexts, sm.supports)):
        if cj != ci:
            terms.append(Term(1, TaggedFormula(ctx_j, event_formula(supp, ctx_j))))
    return LogicalBellInequality(FormulaMultiset(tuple(terms)), len(cover.contexts) - 1)


def expectation_vector(m: EmpiricalModel) -> ExpectationVector:
    vals = []
    for ctx, row in zip(m.cover.contexts, m.rows):
        even = parity_codes(len(ctx), "even")
        p = sum((row[c] for c in even), Fraction(0))
        vals.append(2 * p - 1)
    return ExpectationVector(m.cover, tuple(vals))


def chsh_functional(m: EmpiricalModel, formulas: Sequence[TaggedFormula]) -> Fraction:
    """``|sum_i (2 p_i - 1)|`` for jointly contradictory formulas; bound ``N - 2``."""
    if is_jointly_satisfiable(formulas) is not None:
        raise DomainError("formulas are jointly satisfiable; the N-2 bound does not apply")
    return abs(sum((2 * formula_probability(m, tf) - 1 for tf in formulas), Fraction(0)))


# -- conversions ---------------------------------------------------------------

def deterministic_values(cover: MeasurementCover, cell_coefficients: Sequence[int],
                         limit: int | None = None) -> np.ndarray:
    """``k . delta^t`` for every global assignment code ``t``."""
    inc = incidence_matrix(cover, limit)
    k = np.asarray([int(c) for c in cell_coefficients], dtype=object)
    return k[inc.hits].sum(axis=1)


def rational_to_logical(ineq: RationalInequality, compact: bool = False,
                        limit: int | None = None) -> LogicalBellInequality:
    """Equivalent logical Bell inequality for one valid on all deterministic models.

    Non-compact: one literal term per nonzero cell, ``phi_s`` or its negation
    with multiplicity ``|k|``, bound ``M + sum of |k| over negative cells``.

    Compact: first shift each context block by its minimum coefficient (rows
    sum to 1, so this is an equivalence on probability models), then merge
    cells of equal multiplicity within a context into one formula and divide
    out a common factor.
    """
    cover = ineq.cover
    k, M = ineq.integer_data()
    values = deterministic_values(cover, k, limit)
    worst = int(np.argmax(values))
    if values[worst] > M:
        raise InvalidInequality(f"violated by a deterministic model (value {values[worst]} > {M})",
                                cover.decode_global(worst))
    if compact:
        return _compact(cover, k, M)
    terms, K = [], M
    for (ci, code), c in zip(cover.cells, k):
        if c == 0:
            continue
        ctx = cover.contexts[ci]
        phi = point_formula(ctx, code)
        if c < 0:
            phi = ~phi
            K += -c
        terms.append(Term(abs(c), TaggedFormula(ctx, phi)))
    return LogicalBellInequality(FormulaMultiset(tuple(terms)), K, check=False)


def _literal(var: str, bit: int) -> Formula:
    return Var(var) if bit == 0 else Not(Var(var))


def _cube_formula(context: Sequence[str], fixed: dict[int, int]) -> Formula:
    lits = [_literal(context[i], b) for i, b in sorted(fixed.items())]
    if not lits:
        return TRUE
    return lits[0] if len(lits) == 1 else And(lits)


def _cubes(width: int) -> list[tuple[dict[int, int], frozenset[int]]]:
    out = []
    for pattern in itertools.product((None, 0, 1), repeat=width):
        fixed = {i: b for i, b in enumerate(pattern) if b is not None}
        members = frozenset(c for c in range(2 ** width)
                            if all((c >> (width - 1 - i)) & 1 == b for i, b in fixed.items()))
        out.append((fixed, members))
    out.sort(key=lambda fm: -len(fm[1]))
    return out


def _cube_cover(codes: frozenset[int], context: Sequence[str]) -> list[dict[int, int]]:
    """Greedy cover of ``codes`` by maximal sub-cubes."""
    inside = [(f, m) for f, m in _cubes(len(context)) if m <= codes]
    primes = [(f, m) for f, m in inside if not any(m < other for _, other in inside)]
    chosen, left = [], set(codes)
    while left:
        f, m = max(primes, key=lambda fm: (len(fm[1] & left), len(fm[1])))
        chosen.append(f)
        left -= m
    return chosen


def _subset_parity(codes: frozenset[int], context: Sequence[str]) -> Formula | None:
    """Parity formula over a proper subset of ``context`` matching ``codes``, if any."""
    width = len(context)
    for size in range(2, width):
        for subset in itertools.combinations(range(width), size):
            parity = [sum((c >> (width - 1 - i)) & 1 for i in subset) % 2 for c in range(2 ** width)]
            for want, name in ((0, "even"), (1, "odd")):
                if codes == frozenset(c for c in range(2 ** width) if parity[c] == want):
                    return parity_formula([context[i] for i in subset], name)
    return None


def event_formula(codes: Iterable[int], context: Sequence[str]) -> Formula:
    """A readable formula satisfied exactly by the local ``codes`` of ``context``."""
    codes = frozenset(codes)
    width = len(context)
    if not codes:
        return FALSE
    if len(codes) == 2 ** width:
        return TRUE
    for parity in ("even", "odd"):
        if width > 1 and codes == parity_codes(width, parity):
            return parity_formula(context, parity)
    if width > 6:
        return support_formula(codes, context)
    sub = _subset_parity(codes, context)
    if sub is not None:
        return sub
    rest = frozenset(range(2 ** width)) - codes
    direct = _cube_cover(codes, context)
    if len(direct) == 1:
        return _cube_formula(context, direct[0])
    negated = _cube_cover(rest, context)
    if len(negated) == 1:
        return Not(_cube_formula(context, negated[0]))
    parts = [_cube_formula(context, f) for f in direct]
    return Or(parts)


def _compact(cover: MeasurementCover, k: list[int], M: int) -> LogicalBellInequality:
    terms, K = [], M
    pos = 0
    for ctx in cover.contexts:
        block = k[pos:pos + 2 ** len(ctx)]
        pos += len(block)
        low = min(block)
        K -= low
        groups: dict[int, list[int]] = {}
        for code, c in enumerate(block):
            if c - low:
                groups.setdefault(c - low, []).append(code)
        for mult in sorted(groups):
            terms.append(Term(mult, TaggedFormula(ctx, event_formula(groups[mult], ctx))))
    return LogicalBellInequality(FormulaMultiset(tuple(terms)), K, check=False).normalized()


def deterministic_expectations(cover: MeasurementCover, limit: int | None = None) -> np.ndarray:
    """``eta^t`` for every global assignment: rows are ``t``, columns contexts."""
    inc = incidence_matrix(cover, limit)
    offsets = np.cumsum([0] + [2 ** len(c) for c in cover.contexts[:-1]])
    local = inc.hits - offsets
    ones = np.vectorize(lambda c: bin(int(c)).count("1"))(local) if local.size else local
    return np.where(ones % 2 == 0, 1, -1)


def correlation_to_logical(c: CorrelationInequality, limit: int | None = None) -> LogicalBellInequality:
    """``sum 2|l_U| p(theta_U) <= M + sum |l_U|`` with ``theta_U`` the parity formula of sign ``l_U``."""
    cover = c.cover
    etas = deterministic_expectations(cover, limit)
    values = etas @ np.asarray(c.coefficients, dtype=np.int64)
    worst = int(np.argmax(values))
    if values[worst] > c.bound:
        raise InvalidInequality(f"violated by a deterministic expectation vector "
                                f"(value {values[worst]} > {c.bound})", cover.decode_global(worst))
    terms, K = [], c.bound
    for ctx, l in zip(cover.contexts, c.coefficients):
        if l == 0:
            continue
        theta = parity_formula(ctx, "even" if l > 0 else "odd")
        terms.append(Term(2 * abs(l), TaggedFormula(ctx, theta)))
        K += abs(l)
    return LogicalBellInequality(FormulaMultiset(tuple(terms)), K, check=False)


def logical_to_correlation(ineq: LogicalBellInequality, cover: MeasurementCover) -> CorrelationInequality:
    """Inverse of :func:`correlation_to_logical` for parity-literal inequalities.

    Every term must be the even or odd parity formula of its whole context,
    at most one term per context.  Odd multiplicities are handled by doubling
    the inequality first.
    """
    terms = list(ineq.multiset)
    scale = 1 if all(t.k % 2 == 0 for t in terms) else 2
    l = [0] * len(cover.contexts)
    seen = set()
    total = 0
    for t in terms:
        ci = cover.context_index(t.tagged.context)
        if ci in seen:
            raise DomainError(f"more than one term on context {cover.label(ci)}")
        seen.add(ci)
        ctx = cover.contexts[ci]
        codes = satisfying_codes(t.tagged.formula, ctx)
        kk = t.k * scale // 2
        if codes == parity_codes(len(ctx), "even"):
            l[ci] = kk
        elif codes == parity_codes(len(ctx), "odd"):
            l[ci] = -kk
        else:
            raise DomainError(f"term on {cover.label(ci)} is not a parity formula of its context")
        total += kk
    return CorrelationInequality(cover, tuple(l), ineq.bound * scale - total)


def logical_to_rational(ineq: LogicalBellInequality, cover: MeasurementCover) -> RationalInequality:
    """Spread each ``k p(phi)`` over the cells of its context that satisfy ``phi``."""
    coeffs = [Fraction(0)] * len(cover.cells)
    for t in ineq.multiset:
        ci = cover.context_index(t.tagged.context)
        for code in satisfying_codes(t.tagged.formula, cover.contexts[ci]):
            coeffs[cover.cell_index(ci, code)] += t.k
    return RationalInequality(cover, tuple(coeffs), Fraction(ineq.bound))


# -- reporting helper ------------------------------------------------------------

MAX_SEARCH = 1 << 24


def best_context_inequality(m: EmpiricalModel, limit: int | None = None) -> LogicalBellInequality | None:
    """Most violated inequality of the form ``sum_U p(phi_U) <= K``.

    One formula per context, ``K`` its MAX-SAT value.  Exhaustive over all
    choices of events, so only attempted when the search space is small;
    returns ``None`` otherwise.
    """
    cover = m.cover
    check_limit(cover.n_variables, limit)
    n_sub = [2 ** (2 ** len(c)) for c in cover.contexts]
    N = 2 ** cover.n_variables
    if math.prod(n_sub) * N > MAX_SEARCH:
        return None
    inc = incidence_matrix(cover, limit)
    offsets = np.cumsum([0] + [2 ** len(c) for c in cover.contexts[:-1]])
    lcd = reduce(lambda a, b: a * b // math.gcd(a, b), (p.denominator for p in m.vector()), 1)
    r = len(cover.contexts)
    count = np.zeros([1] * r + [N], dtype=np.int16)
    prob = np.zeros([1] * r, dtype=np.int64)
    for ci, ctx in enumerate(cover.contexts):
        subsets = np.arange(n_sub[ci], dtype=np.int64)
        local = inc.hits[:, ci] - offsets[ci]
        hit = ((subsets[:, None] >> local[None, :]) & 1).astype(np.int16)
        row = [int(p * lcd) for p in m.rows[ci]]
        psum = np.array([sum(row[c] for c in range(len(row)) if (s >> c) & 1) for s in range(n_sub[ci])],
                        dtype=np.int64)
        shape = [1] * r
        shape[ci] = n_sub[ci]
        count = count + hit.reshape(shape + [N])
        prob = prob + psum.reshape(shape)
    K = count.max(axis=-1).astype(np.int64)
    score = prob - K * lcd
    best = np.unravel_index(int(np.argmax(score)), score.shape)
    if score[best] <= 0:
        return None
    terms = []
    for ci, s in enumerate(best):
        ctx = cover.contexts[ci]
        codes = [c for c in range(2 ** len(ctx)) if (int(s) >> c) & 1]
        formula = event_formula(codes, ctx) if codes else FALSE
        terms.append(Term(1, TaggedFormula(ctx, formula)))
    return LogicalBellInequality(FormulaMultiset(tuple(terms)), int(K[best]), check=False)

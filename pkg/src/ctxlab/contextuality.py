"""Global sections, the contextuality hierarchy and non-contextual decompositions."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import lp
from .core import (EmpiricalModel, MeasurementCover, SupportModel, check_limit,
                   deterministic_model_code, mix, support_of)


class ContextualityClass(enum.Enum):
    NONCONTEXTUAL = "NONCONTEXTUAL"
    PROBABILISTICALLY_CONTEXTUAL = "PROBABILISTICALLY_CONTEXTUAL"
    POSSIBILISTICALLY_CONTEXTUAL = "POSSIBILISTICALLY_CONTEXTUAL"
    STRONGLY_CONTEXTUAL = "STRONGLY_CONTEXTUAL"

    @property
    def contextual(self) -> bool:
        return self is not ContextualityClass.NONCONTEXTUAL


@dataclass(frozen=True)
class IncidenceMatrix:
    """0/1 matrix with rows ``(U, s)`` and one column per global assignment.

    Stored sparsely: ``hits[t, ci]`` is the row index of the single 1 that
    column ``t`` has inside context ``ci``'s block.
    """

    cover: MeasurementCover
    hits: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.cover.cells), 2 ** self.cover.n_variables

    def entry(self, row: int, t: int) -> int:
        return int(row in self.hits[t])

    def column(self, t: int) -> list[int]:
        col = [0] * self.shape[0]
        for r in self.hits[t]:
            col[r] = 1
        return col

    def dense(self) -> np.ndarray:
        D, N = self.shape
        out = np.zeros((D, N), dtype=np.int8)
        for ci in range(self.hits.shape[1]):
            out[self.hits[:, ci], np.arange(N)] = 1
        return out


def incidence_matrix(cover: MeasurementCover, limit: int | None = None) -> IncidenceMatrix:
    n = cover.n_variables
    check_limit(n, limit)
    t = np.arange(2 ** n, dtype=np.int64)
    hits = np.empty((2 ** n, len(cover.contexts)), dtype=np.int64)
    offset = 0
    for ci, ctx in enumerate(cover.contexts):
        code = np.zeros_like(t)
        for var in ctx:
            code = (code << 1) | ((t >> (n - 1 - cover.position(var))) & 1)
        hits[:, ci] = offset + code
        offset += 2 ** len(ctx)
    return IncidenceMatrix(cover, hits)


class _SectionSearch:
    """Depth-first gluing of local sections, one context at a time."""

    def __init__(self, sm: SupportModel):
        cover = sm.cover
        n = cover.n_variables
        self.full = (1 << n) - 1
        # per context: global bit mask and the global value bits of each support element
        self.masks, self.options = [], []
        for ctx, supp in zip(cover.contexts, sm.supports):
            shifts = [n - 1 - cover.position(v) for v in ctx]
            mask = sum(1 << s for s in shifts)
            opts = []
            for code in sorted(supp):
                val = 0
                for i, s in enumerate(shifts):
                    if (code >> (len(ctx) - 1 - i)) & 1:
                        val |= 1 << s
                opts.append(val)
            self.masks.append(mask)
            self.options.append(opts)
        self.order = self._order()

    def _order(self) -> list[int]:
        remaining = set(range(len(self.masks)))
        order, covered = [], 0
        while remaining:
            ci = min(remaining, key=lambda c: (-bin(self.masks[c] & covered).count("1"),
                                               len(self.options[c]), c))
            order.append(ci)
            covered |= self.masks[ci]
            remaining.remove(ci)
        return order

    def sections(self, fixed: tuple[int, int] | None = None, first: bool = False):
        options = list(self.options)
        if fixed is not None:
            ci, val = fixed
            options[ci] = [val]
        found = []

        def go(depth: int, assigned: int, values: int) -> bool:
            if depth == len(self.order):
                found.append(values)
                return first
            ci = self.order[depth]
            mask = self.masks[ci]
            overlap = mask & assigned
            for val in options[ci]:
                if (val ^ values) & overlap == 0:
                    if go(depth + 1, assigned | mask, values | val):
                        return True
            return False

        go(0, 0, 0)
        return found


def global_sections(sm: SupportModel, limit: int | None = None) -> frozenset[int]:
    """Global assignment codes whose every restriction lies in the support."""
    check_limit(sm.cover.n_variables, limit)
    return frozenset(_SectionSearch(sm).sections())


def has_global_section(sm: SupportModel, limit: int | None = None) -> bool:
    check_limit(sm.cover.n_variables, limit)
    return bool(_SectionSearch(sm).sections(first=True))


def extends_to_section(sm: SupportModel, ci: int, code: int, limit: int | None = None) -> bool:
    """Whether the local assignment ``code`` of context ``ci`` extends to a global section."""
    check_limit(sm.cover.n_variables, limit)
    search = _SectionSearch(sm)
    ctx = sm.cover.contexts[ci]
    n = sm.cover.n_variables
    val = 0
    for i, v in enumerate(ctx):
        if (code >> (len(ctx) - 1 - i)) & 1:
            val |= 1 << (n - 1 - sm.cover.position(v))
    return bool(search.sections(fixed=(ci, val), first=True))


def non_extendable(sm: SupportModel, limit: int | None = None) -> list[tuple[int, int]]:
    """Support elements ``(ci, code)`` that extend to no global section."""
    sections = global_sections(sm, limit)
    cover = sm.cover
    out = []
    for ci, supp in enumerate(sm.supports):
        reached = {cover.restrict_code(ci, t) for t in sections}
        out.extend((ci, code) for code in sorted(supp) if code not in reached)
    return out


@dataclass(frozen=True)
class NoncontextualDecomposition:
    """Convex weights on global assignments (by code) reproducing a model."""

    cover: MeasurementCover
    weights: dict[int, Fraction]

    def model(self) -> EmpiricalModel:
        codes = sorted(self.weights)
        return mix([deterministic_model_code(self.cover, t) for t in codes],
                   [self.weights[t] for t in codes])

    @cached_property
    def assignments(self) -> list[tuple[dict[str, int], Fraction]]:
        return [(self.cover.decode_global(t), w) for t, w in sorted(self.weights.items())]


def find_noncontextual_decomposition(m: EmpiricalModel, limit: int | None = None,
                                     columns: list[int] | None = None) -> NoncontextualDecomposition | None:
    """Solve ``M x = v, x >= 0`` exactly.

    Only columns that are global sections of the model's support can carry
    weight, so the system is restricted to those unless ``columns`` is given.
    """
    cover = m.cover
    check_limit(cover.n_variables, limit)
    if columns is None:
        columns = sorted(global_sections(support_of(m), limit))
    if not columns:
        return None
    v = m.vector()
    D = len(v)
    offsets = []
    off = 0
    for ctx in cover.contexts:
        offsets.append(off)
        off += 2 ** len(ctx)
    A = [[0] * len(columns) for _ in range(D)]
    for j, t in enumerate(columns):
        for ci in range(len(cover.contexts)):
            A[offsets[ci] + cover.restrict_code(ci, t)][j] = 1
    x = lp.feasible_point(A, v)
    if x is None:
        return None
    return NoncontextualDecomposition(cover, {t: w for t, w in zip(columns, x) if w})


def classify(m: EmpiricalModel, limit: int | None = None) -> ContextualityClass:
    sm = support_of(m)
    sections = global_sections(sm, limit)
    if not sections:
        return ContextualityClass.STRONGLY_CONTEXTUAL
    cover = m.cover
    for ci, supp in enumerate(sm.supports):
        reached = {cover.restrict_code(ci, t) for t in sections}
        if not supp <= reached:
            return ContextualityClass.POSSIBILISTICALLY_CONTEXTUAL
    if find_noncontextual_decomposition(m, limit, columns=sorted(sections)) is None:
        return ContextualityClass.PROBABILISTICALLY_CONTEXTUAL
    return ContextualityClass.NONCONTEXTUAL

"""Measurement covers, assignments and empirical models.

Local assignments over a context ``U`` are encoded as ``|U|``-bit integers
read most-significant-bit first in the context's variable order, so the code
of an assignment is the integer value of its bitstring (``"01"`` -> 1).
Global assignments use the same encoding over the cover's full variable list.
All probabilities are :class:`fractions.Fraction`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

DEFAULT_LIMIT = 24


class DomainError(ValueError):
    """Input violates a precondition of the requested operation."""


class LimitExceeded(DomainError):
    """Exhaustive enumeration would exceed the configured variable limit."""


def check_limit(n: int, limit: int | None, what: str = "variables") -> None:
    limit = DEFAULT_LIMIT if limit is None else limit
    if n > limit:
        raise LimitExceeded(f"{n} {what} exceeds enumeration limit {limit}")


def bitstring(code: int, width: int) -> str:
    return format(code, f"0{width}b") if width else ""


def parse_bitstring(bits: str, width: int) -> int:
    if len(bits) != width or set(bits) - {"0", "1"}:
        raise DomainError(f"bad bitstring {bits!r} for width {width}")
    return int(bits, 2) if bits else 0


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise DomainError("floating point probabilities are not accepted; use Fraction or 'p/q'")
    try:
        return Fraction(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise DomainError(f"not a rational number: {value!r}") from exc


@dataclass(frozen=True)
class MeasurementCover:
    """A variable set with a family of contexts whose union is the whole set.

    Each context is stored as a tuple sorted by the variable order.
    """

    variables: tuple[str, ...]
    contexts: tuple[tuple[str, ...], ...]

    def __init__(self, variables: Iterable[str], contexts: Iterable[Iterable[str]]):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise DomainError("variable names must be unique")
        position = {v: i for i, v in enumerate(variables)}
        ordered = []
        for ctx in contexts:
            ctx = set(ctx)
            if not ctx:
                raise DomainError("contexts must be nonempty")
            unknown = ctx - position.keys()
            if unknown:
                raise DomainError(f"context mentions unknown variables {sorted(unknown)}")
            ordered.append(tuple(sorted(ctx, key=position.__getitem__)))
        if len(set(ordered)) != len(ordered):
            raise DomainError("duplicate context")
        covered = set().union(*ordered) if ordered else set()
        if covered != set(variables):
            raise DomainError(f"contexts do not cover {sorted(set(variables) - covered)}")
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "contexts", tuple(ordered))

    @cached_property
    def _position(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.variables)}

    @cached_property
    def _context_index(self) -> dict[frozenset, int]:
        return {frozenset(c): i for i, c in enumerate(self.contexts)}

    @cached_property
    def _cell_index(self) -> dict[tuple[int, int], int]:
        return {cell: i for i, cell in enumerate(self.cells)}

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    def position(self, var: str) -> int:
        try:
            return self._position[var]
        except KeyError:
            raise DomainError(f"unknown variable {var!r}") from None

    def context_index(self, context: Iterable[str]) -> int:
        key = frozenset(context)
        try:
            return self._context_index[key]
        except KeyError:
            raise DomainError(f"{sorted(key)} is not a context of the cover") from None

    @cached_property
    def cells(self) -> tuple[tuple[int, int], ...]:
        """All ``(context index, local code)`` pairs, context-major."""
        return tuple((ci, code) for ci, ctx in enumerate(self.contexts)
                     for code in range(2 ** len(ctx)))

    def cell_index(self, ci: int, code: int) -> int:
        return self._cell_index[(ci, code)]

    def encode(self, context: Sequence[str], values: Mapping[str, int]) -> int:
        code = 0
        for var in context:
            code = (code << 1) | _bit(values[var])
        return code

    def decode(self, context: Sequence[str], code: int) -> dict[str, int]:
        width = len(context)
        return {var: (code >> (width - 1 - i)) & 1 for i, var in enumerate(context)}

    def encode_global(self, values: Mapping[str, int]) -> int:
        missing = set(self.variables) - values.keys()
        if missing:
            raise DomainError(f"global assignment missing {sorted(missing)}")
        return self.encode(self.variables, values)

    def decode_global(self, code: int) -> dict[str, int]:
        return self.decode(self.variables, code)

    def restrict_code(self, ci: int, global_code: int) -> int:
        """Local code of the restriction of a global assignment to context ``ci``."""
        n = self.n_variables
        code = 0
        for var in self.contexts[ci]:
            code = (code << 1) | ((global_code >> (n - 1 - self._position[var])) & 1)
        return code

    def label(self, ci: int) -> str:
        return ",".join(self.contexts[ci])


def _bit(value) -> int:
    if value not in (0, 1):
        raise DomainError(f"outcome must be 0 or 1, got {value!r}")
    return int(value)


def restrict(t: Mapping[str, int], context: Iterable[str]) -> dict[str, int]:
    """Restriction of an assignment to a subset of its domain."""
    out = {}
    for var in context:
        if var not in t:
            raise DomainError(f"variable {var!r} not in the assignment's domain")
        out[var] = _bit(t[var])
    return out


@dataclass(frozen=True)
class EmpiricalModel:
    """One exact probability distribution per context.

    ``rows[ci][code]`` is the probability of the local assignment ``code`` in
    context ``ci``.
    """

    cover: MeasurementCover
    rows: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(as_fraction(p) for p in row) for row in self.rows)
        if len(rows) != len(self.cover.contexts):
            raise DomainError("one distribution per context required")
        for ctx, row in zip(self.cover.contexts, rows):
            if len(row) != 2 ** len(ctx):
                raise DomainError(f"row for {ctx} must have {2 ** len(ctx)} entries")
            if any(p < 0 for p in row):
                raise DomainError(f"negative probability in row {ctx}")
            if sum(row) != 1:
                raise DomainError(f"row {ctx} sums to {sum(row)}, not 1")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_vector(cls, cover: MeasurementCover, vector: Sequence) -> EmpiricalModel:
        it = iter(vector)
        return cls(cover, tuple(tuple(next(it) for _ in range(2 ** len(ctx)))
                                for ctx in cover.contexts))

    def vector(self) -> list[Fraction]:
        return [p for row in self.rows for p in row]

    def prob(self, context: Iterable[str], values: Mapping[str, int]) -> Fraction:
        ci = self.cover.context_index(context)
        return self.rows[ci][self.cover.encode(self.cover.contexts[ci], values)]

    def event_probability(self, ci: int, codes: Iterable[int]) -> Fraction:
        row = self.rows[ci]
        return sum((row[c] for c in codes), Fraction(0))


@dataclass(frozen=True)
class SupportModel:
    """Possibilistic model: the set of possible local assignments per context."""

    cover: MeasurementCover
    supports: tuple[frozenset[int], ...]

    def __post_init__(self):
        supports = tuple(frozenset(s) for s in self.supports)
        if len(supports) != len(self.cover.contexts):
            raise DomainError("one support per context required")
        for ctx, s in zip(self.cover.contexts, supports):
            if not s:
                raise DomainError(f"empty support for context {ctx}")
            if any(not 0 <= c < 2 ** len(ctx) for c in s):
                raise DomainError(f"support code out of range for {ctx}")
        object.__setattr__(self, "supports", supports)


def deterministic_model(cover: MeasurementCover, t: Mapping[str, int]) -> EmpiricalModel:
    """The model putting all mass on the restrictions of ``t``."""
    code = cover.encode_global(t)
    return deterministic_model_code(cover, code)


def deterministic_model_code(cover: MeasurementCover, global_code: int) -> EmpiricalModel:
    rows = []
    for ci, ctx in enumerate(cover.contexts):
        row = [Fraction(0)] * 2 ** len(ctx)
        row[cover.restrict_code(ci, global_code)] = Fraction(1)
        rows.append(tuple(row))
    return EmpiricalModel(cover, tuple(rows))


def mix(models: Sequence[EmpiricalModel], weights: Sequence) -> EmpiricalModel:
    if not models or len(models) != len(weights):
        raise DomainError("need one weight per model")
    weights = [as_fraction(w) for w in weights]
    if any(w < 0 for w in weights) or sum(weights) != 1:
        raise DomainError("weights must be non-negative and sum to 1")
    cover = models[0].cover
    if any(m.cover != cover for m in models):
        raise DomainError("models are defined on different covers")
    rows = []
    for ci in range(len(cover.contexts)):
        cols = zip(*(m.rows[ci] for m in models))
        rows.append(tuple(sum((w * p for w, p in zip(weights, cell)), Fraction(0))
                          for cell in cols))
    return EmpiricalModel(cover, tuple(rows))


def uniform_model(cover: MeasurementCover) -> EmpiricalModel:
    return EmpiricalModel(cover, tuple((Fraction(1, 2 ** len(c)),) * 2 ** len(c)
                                       for c in cover.contexts))


def uniform_on_support(sm: SupportModel) -> EmpiricalModel:
    rows = []
    for ctx, s in zip(sm.cover.contexts, sm.supports):
        p = Fraction(1, len(s))
        rows.append(tuple(p if c in s else Fraction(0) for c in range(2 ** len(ctx))))
    return EmpiricalModel(sm.cover, tuple(rows))


def support_of(model: EmpiricalModel) -> SupportModel:
    return SupportModel(model.cover, tuple(frozenset(c for c, p in enumerate(row) if p > 0)
                                           for row in model.rows))


def marginal(model: EmpiricalModel, ci: int, onto: Sequence[str]) -> dict[tuple, Fraction]:
    ctx = model.cover.contexts[ci]
    out: dict[tuple, Fraction] = {}
    for code, p in enumerate(model.rows[ci]):
        vals = model.cover.decode(ctx, code)
        key = tuple(vals[v] for v in onto)
        out[key] = out.get(key, Fraction(0)) + p
    return out


def is_no_signalling(model: EmpiricalModel) -> bool:
    cover = model.cover
    for i, j in itertools.combinations(range(len(cover.contexts)), 2):
        common = [v for v in cover.contexts[i] if v in set(cover.contexts[j])]
        if common and marginal(model, i, common) != marginal(model, j, common):
            return False
    return True


def _scenario_name(i: int, j: int, l: int, n: int, p: int) -> str:
    if n > 26:
        return f"m{i + 1}_{j + 1}_{l + 1}"
    name = chr(ord("a") + i) + "'" * j
    return name if p == 1 else f"{name}{l + 1}"


def bell_scenario_cover(n: int, k: int, p: int) -> MeasurementCover:
    """Cover for ``n`` sites, ``k`` settings per site, ``p`` bits per setting.

    With ``p == 1`` the variables of site ``i`` are named ``a, a', a'', ...``
    (``b, ...`` for the next site); a setting with ``p > 1`` bits gets a
    numeric suffix per bit.  Contexts are listed with the setting choices in
    lexicographic order, so ``(2, 2, 1)`` gives ``ab, ab', a'b, a'b'``.
    """
    if min(n, k, p) < 1:
        raise DomainError("n, k, p must all be at least 1")
    groups = [[[_scenario_name(i, j, l, n, p) for l in range(p)] for j in range(k)]
              for i in range(n)]
    variables = [v for site in groups for setting in site for v in setting]
    contexts = [[v for i, j in enumerate(choice) for v in groups[i][j]]
                for choice in itertools.product(range(k), repeat=n)]
    return MeasurementCover(variables, contexts)

"""Seeded random covers, models and formula multisets for property checks."""
from __future__ import annotations

import random
from fractions import Fraction

from .core import EmpiricalModel, MeasurementCover, deterministic_model_code, mix
from .inequalities import event_formula
from .logic import FormulaMultiset, TaggedFormula, Term


def random_cover(rng: random.Random, max_variables: int = 6, max_contexts: int = 4,
                 max_width: int = 3) -> MeasurementCover:
    n = rng.randint(2, max_variables)
    variables = [f"v{i}" for i in range(n)]
    contexts: set[frozenset[str]] = set()
    for _ in range(rng.randint(1, max_contexts)):
        contexts.add(frozenset(rng.sample(variables, rng.randint(1, min(max_width, n)))))
    contexts = [set(c) for c in contexts]
    for v in variables:
        if not any(v in c for c in contexts):
            rng.choice(contexts).add(v)
    unique = {frozenset(c) for c in contexts}
    return MeasurementCover(variables, [sorted(c) for c in unique])


def random_row(rng: random.Random, size: int, zero_bias: float = 0.3) -> tuple[Fraction, ...]:
    weights = [0 if rng.random() < zero_bias else rng.randint(1, 9) for _ in range(size)]
    if not any(weights):
        weights[rng.randrange(size)] = 1
    total = sum(weights)
    return tuple(Fraction(w, total) for w in weights)


def random_model(rng: random.Random, cover: MeasurementCover) -> EmpiricalModel:
    """Independent random rows; usually signalling."""
    return EmpiricalModel(cover, tuple(random_row(rng, 2 ** len(c)) for c in cover.contexts))


def random_noncontextual(rng: random.Random, cover: MeasurementCover, terms: int = 3) -> EmpiricalModel:
    codes = [rng.randrange(2 ** cover.n_variables) for _ in range(terms)]
    weights = random_row(rng, terms, zero_bias=0)
    return mix([deterministic_model_code(cover, t) for t in codes], weights)


def random_mixture(rng: random.Random, base: EmpiricalModel, other: EmpiricalModel) -> EmpiricalModel:
    lam = Fraction(rng.randint(0, 10), 10)
    return mix([base, other], [1 - lam, lam])


def random_multiset(rng: random.Random, cover: MeasurementCover, max_terms: int = 5) -> FormulaMultiset:
    terms = []
    for _ in range(rng.randint(1, max_terms)):
        ctx = rng.choice(cover.contexts)
        size = 2 ** len(ctx)
        codes = [c for c in range(size) if rng.random() < 0.5] or [rng.randrange(size)]
        terms.append(Term(rng.randint(1, 3), TaggedFormula(ctx, event_formula(codes, ctx))))
    return FormulaMultiset(tuple(terms))

"""Named example models and inequalities.

``bell``, ``pr-box`` and ``vertex4-322`` are full probability models;
``hardy``, ``ghz``, ``ks18`` and ``peres-mermin`` are support tables only;
``werner-wolf-a2`` is a correlation inequality and ``bell-formulas`` the
four-formula logical inequality behind the Bell table.
"""
from __future__ import annotations

from fractions import Fraction as F

from .core import (DomainError, EmpiricalModel, MeasurementCover, SupportModel,
                   bell_scenario_cover, uniform_on_support)
from .inequalities import CorrelationInequality, LogicalBellInequality
from .logic import (FormulaMultiset, Iff, TaggedFormula, Term, Var, Xor, one_hot_formula,
                    parity_codes, parity_formula, satisfying_codes)

KS18_TABLE = ("ABCD", "AEFG", "HICJ", "HKGL", "BEMN", "IKNO", "PQDJ", "PRFL", "QRMO")
KS18_VARIABLES = tuple("ABCDEFGHIJKLMNOPQR")


def bell_cover() -> MeasurementCover:
    return bell_scenario_cover(2, 2, 1)


def bell() -> EmpiricalModel:
    h, a, b = F(1, 2), F(3, 8), F(1, 8)
    # rows ab, ab', a'b, a'b'; cells 00, 01, 10, 11
    return EmpiricalModel(bell_cover(), ((h, 0, 0, h), (a, b, b, a), (a, b, b, a), (b, a, a, b)))


def bell_formulas() -> list[TaggedFormula]:
    a, b, a_, b_ = Var("a"), Var("b"), Var("a'"), Var("b'")
    return [TaggedFormula(("a", "b"), Iff(a, b)),
            TaggedFormula(("a", "b'"), Iff(a, b_)),
            TaggedFormula(("a'", "b"), Iff(a_, b)),
            TaggedFormula(("a'", "b'"), Xor((a_, b_)))]


def bell_formula_inequality() -> LogicalBellInequality:
    ms = FormulaMultiset(tuple(Term(1, tf) for tf in bell_formulas()))
    return LogicalBellInequality(ms, 3)


def hardy() -> SupportModel:
    # a b full; a'b and ab' exclude 00; a'b' excludes 11
    return SupportModel(bell_cover(), ({0, 1, 2, 3}, {1, 2, 3}, {1, 2, 3}, {0, 1, 2}))


def hardy_model(p_ab) -> EmpiricalModel:
    """A probability model on the Hardy support with ``p(a=0, b=0) = p_ab``.

    The rest of each row is spread uniformly over its support.
    """
    p = F(p_ab)
    if not 0 < p < 1:
        raise DomainError("p(a=0,b=0) must lie strictly between 0 and 1")
    q = (1 - p) / 3
    t = F(1, 3)
    return EmpiricalModel(bell_cover(), ((p, q, q, q), (0, t, t, t), (0, t, t, t), (t, t, t, 0)))


def ghz_cover() -> MeasurementCover:
    return MeasurementCover(("a", "a'", "b", "b'", "c", "c'"),
                            (("a", "b", "c"), ("a", "b'", "c'"), ("a'", "b", "c'"), ("a'", "b'", "c")))


def ghz() -> SupportModel:
    even, odd = parity_codes(3, "even"), parity_codes(3, "odd")
    return SupportModel(ghz_cover(), (even, odd, odd, odd))


def pr_box() -> EmpiricalModel:
    h = F(1, 2)
    corr, anti = (h, 0, 0, h), (0, h, h, 0)
    return EmpiricalModel(bell_cover(), (corr, corr, corr, anti))


def ks18_cover() -> MeasurementCover:
    return MeasurementCover(KS18_VARIABLES, KS18_TABLE)


def ks18() -> SupportModel:
    cover = ks18_cover()
    return SupportModel(cover, tuple(satisfying_codes(one_hot_formula(ctx), ctx) for ctx in cover.contexts))


def peres_mermin_cover() -> MeasurementCover:
    return MeasurementCover(tuple("ABCDEFGHI"), ("ABC", "DEF", "GHI", "ADG", "BEH", "CFI"))


def peres_mermin() -> SupportModel:
    even, odd = parity_codes(3, "even"), parity_codes(3, "odd")
    return SupportModel(peres_mermin_cover(), (odd, odd, odd, even, even, even))


def werner_wolf_a2() -> CorrelationInequality:
    """``1/4 sum_{i=1..8} E_i - E_8 <= 1`` on the (3,2,1) cover, denominators cleared."""
    cover = bell_scenario_cover(3, 2, 1)
    coeffs = [F(1, 4)] * 7 + [F(1, 4) - 1]
    return CorrelationInequality.from_rational(cover, coeffs, 1)


VERTEX4_SUPPORT = {
    ("a", "b", "c"): ("a", "b"), ("a", "b", "c'"): ("a", "b"),
    ("a", "b'", "c'"): ("b'", "c'"), ("a'", "b'", "c'"): ("b'", "c'"),
    ("a'", "b", "c"): ("a'", "c"), ("a'", "b'", "c"): ("a'", "c"),
    ("a", "b'", "c"): ("a", "b'", "c"),
}


def vertex4_formulas() -> list[TaggedFormula]:
    """Support formula for each context of the (3,2,1) cover, in cover order."""
    cover = bell_scenario_cover(3, 2, 1)
    out = []
    for ctx in cover.contexts:
        if ctx == ("a'", "b", "c'"):
            formula = parity_formula(ctx, "odd")
        else:
            formula = parity_formula(VERTEX4_SUPPORT[ctx], "even")
        out.append(TaggedFormula(ctx, formula))
    return out


def vertex4_322() -> EmpiricalModel:
    cover = bell_scenario_cover(3, 2, 1)
    supports = [satisfying_codes(tf.formula, tf.context) for tf in vertex4_formulas()]
    return uniform_on_support(SupportModel(cover, tuple(supports)))


CATALOGUE = {
    "bell": bell,
    "bell-formulas": bell_formula_inequality,
    "hardy": hardy,
    "ghz": ghz,
    "pr-box": pr_box,
    "ks18": ks18,
    "peres-mermin": peres_mermin,
    "werner-wolf-a2": werner_wolf_a2,
    "vertex4-322": vertex4_322,
}


def zoo(name: str):
    try:
        return CATALOGUE[name]()
    except KeyError:
        raise DomainError(f"unknown zoo entry {name!r}; known: {', '.join(sorted(CATALOGUE))}") from None

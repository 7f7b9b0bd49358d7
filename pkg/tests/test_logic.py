import itertools

import pytest
from hypothesis import given, strategies as st

from ctxlab.core import DomainError, LimitExceeded
from ctxlab.logic import (FALSE, TRUE, And, Const, FormulaMultiset, Iff, Not, Or, TaggedFormula, Term,
                          Var, Xor, equivalent, is_jointly_satisfiable, max_satisfiable,
                          one_hot_formula, parity_formula, parse_formula, point_formula,
                          satisfying_assignments, satisfying_codes, support_formula)
from ctxlab.inequalities import correlation_to_logical
from ctxlab.zoo import (KS18_TABLE, bell_formula_inequality, bell_formulas, ghz_cover,
                        peres_mermin_cover, werner_wolf_a2)

CTX = ("p", "q", "r")


def oracle(f, env):
    """Plain recursive evaluation; outcome 0 means true."""
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Var):
        return env[f.name] == 0
    if isinstance(f, Not):
        return not oracle(f.arg, env)
    if isinstance(f, And):
        return all(oracle(a, env) for a in f.args)
    if isinstance(f, Or):
        return any(oracle(a, env) for a in f.args)
    if isinstance(f, Xor):
        return sum(oracle(a, env) for a in f.args) % 2 == 1
    if isinstance(f, Iff):
        return oracle(f.left, env) == oracle(f.right, env)
    raise TypeError(f)


def oracle_codes(f, ctx):
    out = set()
    for code, bits in enumerate(itertools.product((0, 1), repeat=len(ctx))):
        if oracle(f, dict(zip(ctx, bits))):
            out.add(code)
    return out


formulas = st.recursive(
    st.sampled_from([Var(v) for v in CTX] + [TRUE, FALSE]),
    lambda sub: st.one_of(
        sub.map(Not),
        st.lists(sub, min_size=1, max_size=3).map(And),
        st.lists(sub, min_size=1, max_size=3).map(Or),
        st.lists(sub, min_size=1, max_size=3).map(Xor),
        st.tuples(sub, sub).map(lambda t: Iff(*t)),
    ),
    max_leaves=8,
)


@given(formulas)
def test_truth_table_matches_oracle(f):
    assert satisfying_codes(f, CTX) == oracle_codes(f, CTX)


@given(formulas)
def test_negation_complements(f):
    assert satisfying_codes(Not(f), CTX) == set(range(8)) - satisfying_codes(f, CTX)


@given(formulas)
def test_support_formula_round_trip(f):
    codes = satisfying_codes(f, CTX)
    if codes:
        assert satisfying_codes(support_formula(codes, CTX), CTX) == codes


@given(formulas)
def test_print_parse_round_trip(f):
    assert equivalent(parse_formula(str(f)), f, CTX)


# -- satisfying assignments ----------------------------------------------------------

def test_iff_support():
    assert satisfying_assignments(TaggedFormula(("a", "b"), parse_formula("a <-> b"))) == {0, 3}


def test_xor_support():
    assert satisfying_assignments(TaggedFormula(("a'", "b'"), parse_formula("a' ^ b'"))) == {1, 2}


def test_true_is_everything():
    assert satisfying_codes(TRUE, CTX) == set(range(8))


def test_tagged_formula_rejects_foreign_variables():
    with pytest.raises(DomainError):
        TaggedFormula(("a",), Var("b"))


def test_enumeration_limit():
    with pytest.raises(LimitExceeded):
        satisfying_codes(TRUE, CTX, limit=2)


# -- constructors -----------------------------------------------------------------------

def test_point_formula_example():
    f = point_formula(("a", "b"), 1)
    assert f == And((Var("a"), Not(Var("b"))))
    assert satisfying_codes(f, ("a", "b")) == {1}


def test_point_formula_all_zero():
    assert point_formula(CTX, 0) == And(tuple(Var(v) for v in CTX))


@given(st.integers(0, 7))
def test_point_formula_unique(code):
    assert satisfying_codes(point_formula(CTX, code), CTX) == {code}


def test_support_formula_examples():
    assert equivalent(support_formula({0, 3}, ("a", "b")), Iff(Var("a"), Var("b")), ("a", "b"))
    assert satisfying_codes(support_formula(range(8), CTX), CTX) == set(range(8))
    assert equivalent(support_formula({1, 2}, ("a'", "b'")), parse_formula("a' ^ b'"), ("a'", "b'"))
    with pytest.raises(DomainError):
        support_formula([], CTX)


def test_one_hot():
    ctx = tuple("wxyz")
    assert len(satisfying_codes(one_hot_formula(ctx), ctx)) == 4
    assert equivalent(one_hot_formula(("x",)), Var("x"), ("x",))


def test_ks18_one_hot_unsatisfiable():
    tfs = [TaggedFormula(tuple(c), one_hot_formula(tuple(c))) for c in KS18_TABLE]
    assert is_jointly_satisfiable(tfs) is None


def test_parity_examples():
    assert satisfying_codes(parity_formula(("a", "b"), "even"), ("a", "b")) == {0, 3}
    abc = ("A", "B", "C")
    assert satisfying_codes(parity_formula(abc, "odd"), abc) == {0b001, 0b010, 0b100, 0b111}


def test_odd_parity_is_negated_xor():
    abc = ("x", "y", "z")
    psi = Xor((Not(Var("x")), Not(Var("y")), Not(Var("z"))))
    assert equivalent(parity_formula(abc, "odd"), psi, abc)
    assert equivalent(parity_formula(abc, "even"), Not(psi), abc)


@given(st.integers(1, 6))
def test_parity_bisects(width):
    ctx = tuple(f"v{i}" for i in range(width))
    even = satisfying_codes(parity_formula(ctx, "even"), ctx)
    odd = satisfying_codes(parity_formula(ctx, "odd"), ctx)
    assert len(even) == len(odd) == 2 ** (width - 1)
    assert even | odd == set(range(2 ** width))


# -- MAX-SAT ---------------------------------------------------------------------------------

def brute_max_sat(ms):
    variables = ms.variables()
    best = 0
    for bits in itertools.product((0, 1), repeat=len(variables)):
        env = dict(zip(variables, bits))
        best = max(best, sum(t.k for t in ms if oracle(t.tagged.formula, env)))
    return best


def test_bell_formulas_max_sat():
    ms = bell_formula_inequality().multiset
    assert max_satisfiable(ms) == 3 == brute_max_sat(ms)


def test_werner_wolf_seven_consistent():
    ms = correlation_to_logical(werner_wolf_a2()).normalized().multiset
    assert max_satisfiable(ms) == 7


def test_empty_multiset():
    assert max_satisfiable(FormulaMultiset()) == 0


def test_negative_multiplicity_rejected():
    with pytest.raises(DomainError):
        FormulaMultiset((Term(-1, TaggedFormula(("a",), Var("a"))),))


multisets = st.lists(st.tuples(st.integers(0, 3), st.sampled_from([("p", "q"), ("q", "r"), ("p", "r")]),
                               formulas), max_size=5)


def _ms(items):
    terms = []
    for k, ctx, f in items:
        keep = [v for v in CTX if v in ctx]
        f = f if f.variables() <= set(keep) else Var(keep[0])
        terms.append(Term(k, TaggedFormula(tuple(keep), f)))
    return FormulaMultiset(tuple(terms))


@given(multisets)
def test_max_sat_matches_brute_force(items):
    ms = _ms(items)
    assert max_satisfiable(ms) == brute_max_sat(ms)


@given(multisets, st.data())
def test_max_sat_monotone_and_bounded(items, data):
    ms = _ms(items)
    sub = data.draw(st.lists(st.sampled_from(range(len(ms))), unique=True)) if len(ms) else []
    sub_ms = FormulaMultiset(tuple(ms.terms[i] for i in sub))
    assert max_satisfiable(sub_ms) <= max_satisfiable(ms) <= ms.cardinality


# -- joint satisfiability ---------------------------------------------------------------------

def test_peres_mermin_parities_unsatisfiable():
    cover = peres_mermin_cover()
    tfs = [TaggedFormula(c, parity_formula(c, "odd" if i < 3 else "even"))
           for i, c in enumerate(cover.contexts)]
    assert is_jointly_satisfiable(tfs) is None


def test_ghz_formulas_unsatisfiable():
    cover = ghz_cover()
    tfs = [TaggedFormula(c, parity_formula(c, "even" if i == 0 else "odd"))
           for i, c in enumerate(cover.contexts)]
    assert is_jointly_satisfiable(tfs) is None


def test_satisfiable_formula_gives_witness():
    tf = TaggedFormula(("a", "b"), parse_formula("a & !b"))
    assert is_jointly_satisfiable([tf]) == {"a": 0, "b": 1}


def test_bell_formulas_are_contradictory_with_max_three():
    tfs = bell_formulas()
    assert is_jointly_satisfiable(tfs) is None
    for drop in range(4):
        assert is_jointly_satisfiable(tfs[:drop] + tfs[drop + 1:]) is not None


# -- parser --------------------------------------------------------------------------------

def test_parse_precedence():
    f = parse_formula("!a & b | c ^ d <-> e")
    assert f == Iff(Or((And((Not(Var("a")), Var("b"))), Xor((Var("c"), Var("d"))))), Var("e"))


def test_parse_primes_and_constants():
    assert parse_formula("a'' | FALSE") == Or((Var("a''"), FALSE))


@pytest.mark.parametrize("bad", ["a &", "(a", "a b", "& a", "a $ b", ""])
def test_parse_errors(bad):
    with pytest.raises(DomainError):
        parse_formula(bad)

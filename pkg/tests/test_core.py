import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from ctxlab.core import (DomainError, EmpiricalModel, MeasurementCover, SupportModel,
                         bell_scenario_cover, deterministic_model, deterministic_model_code,
                         is_no_signalling, mix, restrict, support_of, uniform_model)
from ctxlab.sampling import random_cover, random_model
from ctxlab.zoo import CATALOGUE, bell, bell_cover, pr_box, vertex4_322, zoo

T = {"a": 0, "b": 1, "a'": 1, "b'": 0}


def all_assignments(cover):
    for bits in itertools.product((0, 1), repeat=cover.n_variables):
        yield dict(zip(cover.variables, bits))


# -- restrict ------------------------------------------------------------------

def test_restrict_to_context():
    assert restrict(T, ["a", "b"]) == {"a": 0, "b": 1}


def test_restrict_to_everything_is_identity():
    assert restrict(T, T.keys()) == T


def test_restrict_singleton():
    assert restrict({"a": 1, "b": 0}, ["b"]) == {"b": 0}


def test_restrict_unknown_variable():
    with pytest.raises(DomainError):
        restrict({"a": 1}, ["z"])


@given(st.lists(st.integers(0, 1), min_size=5, max_size=5), st.sets(st.integers(0, 4)),
       st.sets(st.integers(0, 4)))
def test_restrict_composes(bits, u, w):
    names = "pqrst"
    t = dict(zip(names, bits))
    big = [names[i] for i in sorted(u | w)]
    small = [names[i] for i in sorted(w)]
    assert restrict(restrict(t, big), small) == restrict(t, small)


# -- covers ----------------------------------------------------------------------

def test_cover_validation():
    with pytest.raises(DomainError):
        MeasurementCover(["a", "a"], [["a"]])
    with pytest.raises(DomainError):
        MeasurementCover(["a", "b"], [["a"]])
    with pytest.raises(DomainError):
        MeasurementCover(["a"], [["a"], ["a"]])
    with pytest.raises(DomainError):
        MeasurementCover(["a"], [["z"]])


def test_nested_contexts_allowed():
    cover = MeasurementCover(["a", "b"], [["a"], ["a", "b"]])
    assert len(cover.cells) == 6


def test_bell_scenario_2_2_1():
    cover = bell_scenario_cover(2, 2, 1)
    assert {frozenset(c) for c in cover.contexts} == {
        frozenset("ab"), frozenset(["a", "b'"]), frozenset(["a'", "b"]), frozenset(["a'", "b'"])}


def test_bell_scenario_3_2_1():
    cover = bell_scenario_cover(3, 2, 1)
    assert len(cover.contexts) == 8
    assert all(len(c) == 3 for c in cover.contexts)


def test_bell_scenario_1_1_2():
    cover = bell_scenario_cover(1, 1, 2)
    assert len(cover.contexts) == 1 and len(cover.contexts[0]) == 2


@given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 2))
def test_bell_scenario_shape(n, k, p):
    cover = bell_scenario_cover(n, k, p)
    assert len(cover.contexts) == k ** n
    assert all(len(c) == n * p for c in cover.contexts)
    assert set().union(*cover.contexts) == set(cover.variables)
    assert cover.n_variables == n * k * p


def test_bell_scenario_rejects_zero():
    with pytest.raises(DomainError):
        bell_scenario_cover(0, 2, 1)


def test_encoding_is_msb_first():
    cover = bell_cover()
    assert cover.encode(("a", "b"), {"a": 0, "b": 1}) == 1
    assert cover.decode(("a", "b"), 2) == {"a": 1, "b": 0}


def test_cover_is_hashable():
    assert hash(bell_cover()) == hash(bell_scenario_cover(2, 2, 1))


# -- models ----------------------------------------------------------------------

def test_model_validation():
    cover = bell_cover()
    with pytest.raises(DomainError):
        EmpiricalModel(cover, ((1, 0, 0, 0),) * 3)
    with pytest.raises(DomainError):
        EmpiricalModel(cover, ((F(1, 2), F(1, 2), 0, F(1, 100)),) + ((1, 0, 0, 0),) * 3)
    with pytest.raises(DomainError):
        EmpiricalModel(cover, ((2, -1, 0, 0),) + ((1, 0, 0, 0),) * 3)
    with pytest.raises(DomainError):
        SupportModel(cover, (set(), {0}, {0}, {0}))


def test_deterministic_all_zero():
    m = deterministic_model(bell_cover(), dict.fromkeys(["a", "b", "a'", "b'"], 0))
    assert m.rows[0] == (1, 0, 0, 0)


def test_deterministic_row():
    m = deterministic_model(bell_cover(), T)
    assert m.prob(["a'", "b'"], {"a'": 1, "b'": 0}) == 1


def test_deterministic_support_is_singleton():
    cover = bell_scenario_cover(3, 2, 1)
    for code in range(0, 64, 7):
        assert all(len(s) == 1 for s in support_of(deterministic_model_code(cover, code)).supports)


def test_mix_identity():
    assert mix([bell()], [1]) == bell()


def test_mix_of_all_deterministic_is_uniform():
    cover = bell_cover()
    ms = [deterministic_model(cover, t) for t in all_assignments(cover)]
    m = mix(ms, [F(1, 16)] * 16)
    assert all(p == F(1, 4) for p in m.vector())
    assert m == uniform_model(cover)


def test_mix_ignores_unmeasured_difference():
    cover = bell_cover()
    t2 = dict(T, **{"b'": 1})
    m = mix([deterministic_model(cover, T), deterministic_model(cover, t2)], [F(1, 2), F(1, 2)])
    d = deterministic_model(cover, T)
    for ci, ctx in enumerate(cover.contexts):
        if "b'" not in ctx:
            assert m.rows[ci] == d.rows[ci]


def test_mix_errors():
    with pytest.raises(DomainError):
        mix([bell(), pr_box()], [F(1, 2), F(1, 3)])
    other = uniform_model(bell_scenario_cover(1, 1, 2))
    with pytest.raises(DomainError):
        mix([bell(), other], [F(1, 2), F(1, 2)])


def test_support_of_bell():
    s = support_of(bell()).supports
    assert s[0] == {0, 3}
    assert all(len(x) == 4 for x in s[1:])


def test_support_of_uniform():
    assert all(len(s) == 4 for s in support_of(uniform_model(bell_cover())).supports)


@given(st.integers(0, 2 ** 32))
def test_support_of_mix_is_union(seed):
    rng = random.Random(seed)
    cover = random_cover(rng, max_variables=4, max_contexts=3)
    ms = [random_model(rng, cover) for _ in range(3)]
    m = mix(ms, [F(1, 3)] * 3)
    union = [frozenset().union(*(support_of(x).supports[i] for x in ms))
             for i in range(len(cover.contexts))]
    assert list(support_of(m).supports) == union


@given(st.integers(0, 2 ** 32))
def test_rows_sum_to_one(seed):
    rng = random.Random(seed)
    m = random_model(rng, random_cover(rng))
    assert all(sum(row) == 1 for row in m.rows)


# -- no-signalling ---------------------------------------------------------------

def test_bell_single_marginals_are_half():
    # independent oracle: sum rows directly
    m = bell()
    for ci, ctx in enumerate(m.cover.contexts):
        row = m.rows[ci]
        assert row[0] + row[1] == F(1, 2)
        assert row[0] + row[2] == F(1, 2)
    assert is_no_signalling(m)


def test_pr_box_no_signalling():
    assert is_no_signalling(pr_box())


def test_signalling_model_detected():
    cover = bell_cover()
    d = [(1, 0, 0, 0)] * 4
    d[cover.context_index(["a", "b'"])] = (0, 0, 1, 0)
    assert not is_no_signalling(EmpiricalModel(cover, tuple(d)))


# -- zoo ---------------------------------------------------------------------------

def test_zoo_bell_entries():
    assert set(bell().vector()) <= {F(1, 2), F(3, 8), F(1, 8), F(0)}


def test_zoo_pr_box_supports():
    s = support_of(pr_box()).supports
    assert s[:3] == (frozenset({0, 3}),) * 3
    assert s[3] == {1, 2}


def test_zoo_ks18_cover():
    sm = zoo("ks18")
    assert len(sm.cover.contexts) == 9
    assert sm.cover.variables == tuple("ABCDEFGHIJKLMNOPQR")


@pytest.mark.parametrize("name", sorted(CATALOGUE))
def test_zoo_fixtures_construct(name):
    assert zoo(name) is not None


@pytest.mark.parametrize("fixture", [bell, pr_box, vertex4_322])
def test_zoo_no_signalling(fixture):
    assert is_no_signalling(fixture())


def test_zoo_unknown():
    with pytest.raises(DomainError):
        zoo("nope")

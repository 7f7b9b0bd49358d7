import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from ctxlab import lp
from ctxlab.contextuality import find_noncontextual_decomposition
from ctxlab.core import (LimitExceeded, MeasurementCover, bell_scenario_cover,
                         deterministic_model_code, uniform_model)
from ctxlab.inequalities import (correlation_to_logical, evaluate_logical, expectation_vector,
                                 logical_to_rational)
from ctxlab.logic import is_k_consistent
from ctxlab.polytope import (LinearSystem, cell_names, correlation_polytope,
                             correlation_system, correlation_vertices, fm_eliminate, has_extension,
                             noncontextual_polytope, project, projection_steps, remove_redundant,
                             symbolic_system, tight_vertices)
from ctxlab.sampling import random_mixture, random_model, random_noncontextual
from ctxlab.zoo import bell, bell_cover, pr_box

SYS = LinearSystem(("x", "y"), (((1, 0), 0), ((-1, 1), 0), ((1, 1), 1)))


def grid(n=9, lo=-2, hi=2):
    step = F(hi - lo, n - 1)
    return [lo + i * step for i in range(n)]


# -- Fourier-Motzkin ---------------------------------------------------------------------------

def test_fm_example_rows():
    out = fm_eliminate(SYS, "x")
    assert out.variables == ("y",)
    # y >= 0 and 2y >= 1 share a direction; only the tighter row survives deduplication
    assert out.canonical() == [((2,), 1)]


def test_fm_example_projection_on_grid():
    out = fm_eliminate(SYS, "x")
    for y in grid(17):
        assert out.satisfied_by([y]) == has_extension(SYS, {"y": y}) == (y >= F(1, 2))


def test_fm_only_lower_bounds_drop_out():
    s = LinearSystem(("x", "y"), (((1, 0), 0), ((2, 1), 3), ((0, 1), -1)))
    out = fm_eliminate(s, "x")
    assert out.canonical() == [((1,), -1)]


def test_fm_eliminate_everything():
    out = project(SYS, ["x", "y"])
    assert out.variables == () and len(out) == 0


def test_fm_infeasible_system():
    s = LinearSystem(("x",), (((1,), 1), ((-1,), 0)))
    out = project(s, ["x"])
    assert not out.satisfied_by([])


def test_fm_unknown_variable():
    with pytest.raises(Exception):
        fm_eliminate(SYS, "z")


@given(st.integers(0, 2 ** 32))
def test_fm_soundness_random_systems(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 4)
    names = tuple(f"z{i}" for i in range(n))
    rows = tuple((tuple(rng.randint(-2, 2) for _ in range(n)), rng.randint(-2, 2))
                 for _ in range(rng.randint(2, 6)))
    s = LinearSystem(names, rows)
    var = rng.choice(names)
    out = fm_eliminate(s, var)
    for _ in range(10):
        point = {v: F(rng.randint(-6, 6), rng.randint(1, 3)) for v in out.variables}
        assert out.satisfied_by([point[v] for v in out.variables]) == has_extension(s, point)


# -- redundancy -------------------------------------------------------------------------------------

def test_remove_scalar_multiple():
    s = LinearSystem(("y",), (((1,), 0), ((2,), 0)))
    assert len(remove_redundant(s)) == 1


def test_remove_implied_sum():
    s = LinearSystem(("x", "y"), (((1, 0), 0), ((0, 1), 0), ((1, 1), -1)))
    assert sorted(remove_redundant(s).canonical()) == [((0, 1), 0), ((1, 0), 0)]


@given(st.integers(0, 2 ** 32))
def test_remove_redundant_idempotent_and_equivalent(seed):
    rng = random.Random(seed)
    rows = tuple(((rng.randint(-2, 2), rng.randint(-2, 2), rng.randint(-2, 2)), rng.randint(-3, 1))
                 for _ in range(rng.randint(1, 7)))
    s = LinearSystem(("p", "q", "r"), rows)
    once = remove_redundant(s)
    assert sorted(remove_redundant(once).canonical()) == sorted(once.canonical())
    for _ in range(15):
        pt = [F(rng.randint(-8, 8), 4) for _ in range(3)]
        assert once.satisfied_by(pt) == s.satisfied_by(pt)


# -- the Bell noncontextual polytope ------------------------------------------------------------------

def test_bell_polytope_separates(bell_polytope):
    assert bell_polytope.violated(bell())
    assert bell_polytope.violated(pr_box())
    cover = bell_cover()
    for t in range(16):
        assert bell_polytope.contains(deterministic_model_code(cover, t))


def test_bell_polytope_rows_are_supporting(bell_polytope):
    cover = bell_cover()
    dets = [deterministic_model_code(cover, t) for t in range(16)]
    for ineq in bell_polytope:
        assert any(ineq.value(d) == ineq.bound for d in dets), str(ineq)


def test_bell_polytope_has_no_signalling_equalities(bell_polytope):
    assert bell_polytope.equalities()


def test_bell_polytope_matches_decomposition_oracle(bell_polytope):
    rng = random.Random(11)
    cover = bell_cover()
    for i in range(60):
        if i % 3 == 0:
            m = random_model(rng, cover)
        elif i % 3 == 1:
            m = random_noncontextual(rng, cover, rng.randint(1, 4))
        else:
            m = random_mixture(rng, random_noncontextual(rng, cover, 2), rng.choice([bell(), pr_box()]))
        assert bell_polytope.contains(m) == (find_noncontextual_decomposition(m) is not None)


def test_fm_before_after_pruning_agree(bell_polytope):
    # the last unpruned step against the pruned polytope, on random rational points
    cover = bell_cover()
    system = symbolic_system(cover)
    xs = [v for v in system.variables if v.startswith("x")]
    *_, (_, pruned) = projection_steps(system, xs)
    rng = random.Random(5)
    names = cell_names(cover)
    assert pruned.variables == tuple(names)
    for _ in range(100):
        m = random_model(rng, cover) if rng.random() < 0.5 else random_noncontextual(rng, cover)
        assert pruned.satisfied_by(m.vector()) == bell_polytope.contains(m)


def maximize_over(inequalities, c):
    """LP maximum of ``c . v`` subject to ``r . v <= b`` for every member, with ``v`` free."""
    m = len(inequalities)
    A = [list(q.coefficients) + [-x for x in q.coefficients] + [int(i == k) for k in range(m)]
         for i, q in enumerate(inequalities)]
    b = [q.bound for q in inequalities]
    cost = list(c) + [-x for x in c] + [0] * m
    return lp.maximize(cost, A, b)


def simplex_rows(cover):
    """Non-negativity and row normalization written as ``r . v <= b``."""
    rows = []
    for i, _ in enumerate(cover.cells):
        rows.append(([-int(k == i) for k in range(len(cover.cells))], 0))
    for ci in range(len(cover.contexts)):
        block = [int(c == ci) for c, _ in cover.cells]
        rows += [(block, 1), ([-x for x in block], -1)]
    return rows


def assert_product_of_simplices(cover, poly):
    rows = simplex_rows(cover)
    eq = [[int(c == ci) for c, _ in cover.cells] for ci in range(len(cover.contexts))]
    for q in poly:
        assert lp.maximize(q.coefficients, eq, [1] * len(eq)).value <= q.bound, str(q)
    for r, b in rows:
        assert maximize_over(list(poly), r).value <= b


def test_single_context_gives_simplex():
    cover = MeasurementCover(["a", "b"], [["a", "b"]])
    assert_product_of_simplices(cover, noncontextual_polytope(cover))


def test_disjoint_contexts_product_of_simplices():
    cover = MeasurementCover(["a", "b", "c"], [["a"], ["b", "c"]])
    poly = noncontextual_polytope(cover)
    assert_product_of_simplices(cover, poly)
    rng = random.Random(2)
    for _ in range(50):
        m = random_model(rng, cover)
        assert find_noncontextual_decomposition(m) is not None
        assert poly.contains(m)


def test_fm_variable_limit():
    with pytest.raises(LimitExceeded):
        noncontextual_polytope(bell_scenario_cover(3, 3, 1))


# -- complete logical set -----------------------------------------------------------------------------

def test_logical_set_consistent(bell_logical_set):
    assert bell_logical_set
    assert all(is_k_consistent(q.multiset, q.bound) for q in bell_logical_set)


def test_logical_set_separates(bell_logical_set):
    cover = bell_cover()
    assert any(evaluate_logical(bell(), q).violation > 0 for q in bell_logical_set)
    for t in range(16):
        d = deterministic_model_code(cover, t)
        assert all(evaluate_logical(d, q).violation == 0 for q in bell_logical_set)
    rng = random.Random(4)
    for _ in range(30):
        m = random_noncontextual(rng, cover, rng.randint(1, 5))
        assert all(evaluate_logical(m, q).violation == 0 for q in bell_logical_set)


def test_logical_set_equivalent_to_polytope(bell_logical_set, bell_polytope):
    rng = random.Random(8)
    cover = bell_cover()
    for _ in range(40):
        m = random_model(rng, cover)
        violated = any(evaluate_logical(m, q).violation > 0 for q in bell_logical_set)
        assert violated == (not bell_polytope.contains(m))


def no_signalling_constraints(cover):
    """Rows summing to one plus equal overlap marginals, as ``A v = b``."""
    A, b = [], []
    cells = cover.cells
    for ci in range(len(cover.contexts)):
        A.append([int(c == ci) for c, _ in cells])
        b.append(1)
    for i, j in itertools.combinations(range(len(cover.contexts)), 2):
        common = [v for v in cover.contexts[i] if v in cover.contexts[j]]
        for var in common:
            row = []
            for c, code in cells:
                if c in (i, j):
                    val = cover.decode(cover.contexts[c], code)[var]
                    row.append((1 if c == i else -1) * int(val == 0))
                else:
                    row.append(0)
            A.append(row)
            b.append(0)
    return A, b


def test_pr_box_reaches_no_signalling_maximum(bell_logical_set):
    cover = bell_cover()
    A, b = no_signalling_constraints(cover)
    hits = 0
    for q in bell_logical_set:
        r = logical_to_rational(q, cover)
        best = lp.maximize(r.coefficients, A, b).value
        if best > q.bound and r.value(pr_box()) == best:
            hits += 1
    assert hits > 0


# -- correlation polytope ------------------------------------------------------------------------------

def brute_force_facets(vertices):
    """Hyperplanes through 4 affinely independent vertices with all vertices on one side."""
    import numpy as np
    dim = len(vertices[0])
    facets = set()
    for subset in itertools.combinations(vertices, dim):
        M = np.array([list(v) + [-1] for v in subset], dtype=float)
        _, s, vh = np.linalg.svd(M)
        if s[-1] > 1e-9 and len(s) == dim and (s > 1e-9).sum() == dim:
            normal = vh[-1]
        else:
            continue
        normal = normal / np.max(np.abs(normal))
        ints = [F(x).limit_denominator(10) for x in normal]
        l, M0 = ints[:dim], ints[dim]
        vals = [sum(a * e for a, e in zip(l, v)) for v in vertices]
        for sign in (1, -1):
            if all(sign * x <= sign * M0 for x in vals):
                key = (tuple(sign * a for a in l), sign * M0)
                den = max(abs(k) for k in key[0] if k)
                facets.add((tuple(a / den for a in key[0]), key[1] / den))
    return facets


def test_correlation_polytope_matches_hull_oracle():
    cover = bell_cover()
    derived = {(tuple(F(c) for c in q.coefficients), F(q.bound)) for q in correlation_polytope(cover)}
    normalize = lambda d: {(tuple(a / max(abs(x) for x in l) for a in l), M / max(abs(x) for x in l))
                           for l, M in d}
    assert normalize(derived) == brute_force_facets(correlation_vertices(cover))
    assert len(derived) == 16


def test_correlation_facets_tight_and_chsh():
    facets = correlation_polytope(bell_cover())
    assert all(len(tight_vertices(q)) >= 4 for q in facets)
    chsh = [q for q in facets if q.bound == 2 and all(abs(l) == 1 for l in q.coefficients)
            and sum(l < 0 for l in q.coefficients) % 2]
    assert len(chsh) == 8
    eta = expectation_vector(pr_box())
    assert max(q.value(eta) for q in chsh) == 4


def test_correlation_single_context():
    cover = MeasurementCover(["a", "b"], [["a", "b"]])
    assert sorted((q.coefficients, q.bound) for q in correlation_polytope(cover)) == [((-1,), 1), ((1,), 1)]


def test_correlation_facets_are_logical():
    for q in correlation_polytope(bell_cover()):
        logical = correlation_to_logical(q)
        assert is_k_consistent(logical.multiset, logical.bound)


def test_correlation_system_projection_is_sound():
    system = correlation_system(bell_cover())
    facets = correlation_polytope(bell_cover())
    rng = random.Random(9)
    for _ in range(40):
        e = [F(rng.randint(-4, 4), 4) for _ in range(4)]
        inside = all(q.holds(e) for q in facets)
        assert inside == has_extension(system, {f"E{i}": v for i, v in enumerate(e)})


def test_uniform_model_inside():
    eta = expectation_vector(uniform_model(bell_cover()))
    assert all(q.holds(eta) for q in correlation_polytope(bell_cover()))

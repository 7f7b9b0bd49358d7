"""Executable acceptance checks shared by ``ctxlab selftest`` and the test suite.

Each check returns a :class:`CheckResult`; a check passes only if every
assertion holds exactly and it finishes inside its time budget.
"""
from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import quantum
from .zoo import (bell, bell_cover, bell_formula_inequality, bell_formulas, ghz, ghz_cover, hardy,
                  hardy_model, ks18, ks18_cover, peres_mermin, pr_box, vertex4_322, werner_wolf_a2)
from .contextuality import ContextualityClass, classify, find_noncontextual_decomposition
from .core import (EmpiricalModel, bell_scenario_cover, deterministic_model_code, support_of,
                   uniform_on_support)
from .inequalities import (RationalInequality, canonical_support_inequality, chsh_functional,
                           correlation_to_logical, deterministic_values, evaluate_logical,
                           expectation_vector, possibilistic_witness_inequality,
                           rational_to_logical)
from .logic import (FormulaMultiset, TaggedFormula, equivalent, is_jointly_satisfiable,
                    is_k_consistent, max_satisfiable, one_hot_formula, parity_formula)
from .polytope import (LinearSystem, complete_logical_bell_set, correlation_polytope,
                       correlation_system, has_extension, noncontextual_polytope,
                       projection_steps, symbolic_system, tight_vertices)
from .sampling import (random_cover, random_mixture, random_model, random_multiset,
                       random_noncontextual)

STRONG = ContextualityClass.STRONGLY_CONTEXTUAL


@dataclass
class CheckResult:
    number: int
    title: str
    budget: float
    passed: bool = False
    seconds: float = 0.0
    failures: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"[{status}] {self.number:>2}. {self.title} ({self.seconds:.2f}s / {self.budget:g}s)"
        if self.failures:
            text += "\n      " + "\n      ".join(self.failures)
        return text


class _Checker:
    def __init__(self, result: CheckResult):
        self.result = result

    def that(self, condition: bool, claim: str) -> bool:
        if not condition:
            self.result.failures.append(claim)
        return bool(condition)

    def note(self, text: str) -> None:
        self.result.notes.append(text)


# -- 1..8: worked examples ------------------------------------------------------

def check_bell(c: _Checker, seed: int) -> None:
    m = bell()
    cls = classify(m)
    c.that(cls is ContextualityClass.PROBABILISTICALLY_CONTEXTUAL,
           f"Bell table is contextual but possibilistically non-contextual (got {cls.value})")
    ev = evaluate_logical(m, bell_formula_inequality())
    c.that(ev.lhs == Fraction(13, 4) and ev.violation == Fraction(1, 4),
           f"logical Bell inequality violated by exactly 1/4 (got {ev.violation})")
    chsh = chsh_functional(m, bell_formulas())
    c.that(chsh == Fraction(5, 2) and chsh - 2 == Fraction(1, 2),
           f"CHSH value 5/2 against bound 2 (got {chsh})")


def check_hardy(c: _Checker, seed: int) -> None:
    rng = random.Random(seed)
    sm = hardy()
    witness = possibilistic_witness_inequality(sm, ("a", "b"), 0)
    formulas = [t.tagged for t in witness.multiset]
    cover = sm.cover
    probes = [Fraction(1, 12), Fraction(1, 2), Fraction(1, 1000)]
    probes += [Fraction(rng.randint(1, 99), 100) for _ in range(5)]
    for p in probes:
        models = [hardy_model(p)]
        # random strictly positive rows on the support, p fixed on the witness cell
        rows = []
        for ci, supp in enumerate(sm.supports):
            w = {code: rng.randint(1, 9) for code in supp}
            if ci == 0:
                rest = sum(v for code, v in w.items() if code != 0)
                row = [Fraction(0)] * 4
                for code, v in w.items():
                    row[code] = p if code == 0 else (1 - p) * Fraction(v, rest)
            else:
                total = sum(w.values())
                row = [Fraction(w.get(code, 0), total) for code in range(4)]
            rows.append(tuple(row))
        models.append(EmpiricalModel(cover, tuple(rows)))
        for m in models:
            ev = evaluate_logical(m, witness)
            c.that(ev.violation == p, f"witness violation equals p={p} (got {ev.violation})")
            chsh = chsh_functional(m, formulas)
            c.that(chsh - (len(formulas) - 2) == 2 * p, f"CHSH-form violation equals 2p={2 * p}")


def check_ghz(c: _Checker, seed: int) -> None:
    m = quantum.born_model(quantum.ghz_state(3), ghz_cover(), quantum.ghz_observables())
    c.that(support_of(m) == ghz(), "Born-rule GHZ support matches the parity table")
    c.that(classify(m) is STRONG, "GHZ model is strongly contextual")
    ev = evaluate_logical(m, canonical_support_inequality(m))
    c.that(ev.violation == 1 and ev.maximal, f"canonical violation is 1 and maximal (got {ev.violation})")


def check_pr_box(c: _Checker, seed: int) -> None:
    m = pr_box()
    c.that(classify(m) is STRONG, "PR box is strongly contextual")
    eta = expectation_vector(m).values
    c.that(eta == (1, 1, 1, -1), f"expectation vector (1,1,1,-1) (got {eta})")
    formulas = [TaggedFormula(ctx, parity_formula(ctx, "odd" if i == 3 else "even"))
                for i, ctx in enumerate(m.cover.contexts)]
    c.that(chsh_functional(m, formulas) == 4, "CHSH value reaches the algebraic maximum 4")


def check_ks18(c: _Checker, seed: int) -> None:
    cover = ks18_cover()
    one = [TaggedFormula(ctx, one_hot_formula(ctx)) for ctx in cover.contexts]
    c.that(is_jointly_satisfiable(one) is None, "conjunction of ONE(U) over the 9 bases is unsatisfiable")
    ks_cover, obs = quantum.ks_observables(quantum.KS18_RAYS)
    same = (set(ks_cover.variables) == set(cover.variables)
            and {frozenset(u) for u in ks_cover.contexts} == {frozenset(u) for u in cover.contexts})
    c.that(same, "orthogonality pattern of the 18 rays reproduces the ks18 cover")
    rng = np.random.default_rng(seed)
    for i in range(10):
        m = quantum.born_model(quantum.random_state(4, rng), ks_cover, obs)
        ok_support = all(supp <= ref for supp, ref in zip(support_of(m).supports, ks18().supports))
        c.that(ok_support, f"state {i}: support within ONE(U)")
        c.that(classify(m) is STRONG, f"state {i}: strongly contextual")
        ev = evaluate_logical(m, canonical_support_inequality(m))
        c.that(ev.maximal, f"state {i}: canonical violation is maximal")


def check_peres_mermin(c: _Checker, seed: int) -> None:
    sm = peres_mermin()
    cover = sm.cover
    formulas = [TaggedFormula(ctx, parity_formula(ctx, "odd" if i < 3 else "even"))
                for i, ctx in enumerate(cover.contexts)]
    c.that(is_jointly_satisfiable(formulas) is None, "six parity formulas are jointly unsatisfiable")
    m = uniform_on_support(sm)
    ev = evaluate_logical(m, canonical_support_inequality(m))
    c.that(ev.maximal and ev.lhs == 6 and ev.bound == 5, f"canonical inequality maximally violated (lhs {ev.lhs})")


def check_werner_wolf(c: _Checker, seed: int) -> None:
    ww = werner_wolf_a2()
    logical = correlation_to_logical(ww).normalized()
    cover = ww.cover
    want = [(1, TaggedFormula(ctx, parity_formula(ctx, "even"))) for ctx in cover.contexts[:7]]
    want.append((3, TaggedFormula(cover.contexts[7], parity_formula(cover.contexts[7], "odd"))))
    terms = list(logical.multiset)
    same = len(terms) == 8 and all(
        t.k == k and t.tagged.context == tf.context and equivalent(t.tagged.formula, tf.formula, tf.context)
        for t, (k, tf) in zip(terms, want))
    c.that(same and logical.bound == 7, f"conversion gives sum p(psi_i) + 3 p(not psi_8) <= 7 (got {logical})")
    c.that(max_satisfiable(logical.multiset) == 7, "max_satisfiable of the multiset is 7")
    psi = [tf for _, tf in want[:7]]
    neg8 = want[7][1]
    bad = [combo for combo in itertools.combinations(psi, 5) if is_jointly_satisfiable([neg8, *combo])]
    c.that(not bad, f"not psi_8 with any 5 of psi_1..psi_7 is unsatisfiable ({len(bad)} satisfiable)")


def check_vertex4(c: _Checker, seed: int) -> None:
    m = vertex4_322()
    ww = werner_wolf_a2()
    eta = expectation_vector(m)
    c.that(ww.holds(eta), f"vertex-4 model satisfies the correlation inequality (value {ww.value(eta)})")
    ev = evaluate_logical(m, canonical_support_inequality(m))
    c.that(ev.lhs == 8 and ev.bound == 7 and ev.maximal,
           f"canonical logical inequality maximally violated, lhs 8 vs K 7 (got {ev.lhs} vs {ev.bound})")


# -- 9..11: pipelines and properties ------------------------------------------------

def _bell_samples(rng: random.Random, cover, count: int) -> list[EmpiricalModel]:
    extremes = [bell(), pr_box()]
    out = []
    for i in range(count):
        kind = i % 3
        if kind == 0:
            out.append(random_model(rng, cover))
        elif kind == 1:
            out.append(random_noncontextual(rng, cover, rng.randint(1, 4)))
        else:
            base = random_noncontextual(rng, cover, rng.randint(1, 4))
            out.append(random_mixture(rng, base, rng.choice(extremes)))
    return out


def check_completeness(c: _Checker, seed: int) -> None:
    rng = random.Random(seed)
    cover = bell_cover()
    polytope = noncontextual_polytope(cover)
    samples = _bell_samples(rng, cover, 210)
    disagree = [i for i, m in enumerate(samples)
                if polytope.contains(m) != (find_noncontextual_decomposition(m) is not None)]
    inside = sum(polytope.contains(m) for m in samples)
    c.note(f"{len(polytope)} inequalities; {inside}/{len(samples)} samples non-contextual")
    c.that(not disagree, f"membership agrees with the decomposition LP on {len(samples)} models "
                         f"({len(disagree)} disagreements)")
    logical = complete_logical_bell_set(cover)
    c.that(bool(logical), "complete logical set is nonempty")
    c.that(all(is_k_consistent(q.multiset, q.bound) for q in logical),
           "every logical member passes an independent K-consistency check")
    for name, m in (("Bell table", bell()), ("PR box", pr_box())):
        c.that(any(evaluate_logical(m, q).violation > 0 for q in logical), f"{name} violates some member")
    clean = all(evaluate_logical(deterministic_model_code(cover, t), q).violation == 0
                for t in range(16) for q in logical)
    c.that(clean, "no deterministic model violates any member")


def _is_chsh_type(q) -> bool:
    return (q.bound == 2 and all(abs(l) == 1 for l in q.coefficients)
            and sum(l < 0 for l in q.coefficients) % 2 == 1)


def check_correlation(c: _Checker, seed: int) -> None:
    cover = bell_cover()
    facets = correlation_polytope(cover)
    c.note(f"{len(facets)} facets")
    c.that(all(len(tight_vertices(q)) >= 4 for q in facets), "every facet is tight at >= 4 vertices")
    chsh = [q for q in facets if _is_chsh_type(q)]
    c.that(len(chsh) == 8, f"all 8 CHSH-type inequalities present (found {len(chsh)})")
    eta = expectation_vector(pr_box())
    c.that(any(q.value(eta) == 4 for q in chsh), "PR box reaches value 4 on a CHSH member")


def _prop_equivalence(c: _Checker, rng: random.Random, trials: int) -> None:
    wrong = 0
    for _ in range(trials):
        cover = random_cover(rng)
        ms = random_multiset(rng, cover)
        K = rng.randint(0, ms.cardinality)
        valid = True
        for t in range(2 ** cover.n_variables):
            ev = evaluate_logical(deterministic_model_code(cover, t), _unchecked(ms, K))
            if ev.lhs > K:
                valid = False
                break
        wrong += valid != is_k_consistent(ms, K)
    c.that(wrong == 0, f"valid on all deterministic models iff K-consistent ({wrong}/{trials} mismatches)")


def _unchecked(ms: FormulaMultiset, K: int):
    from .inequalities import LogicalBellInequality
    return LogicalBellInequality(ms, K, check=False)


def _prop_rational_identity(c: _Checker, rng: random.Random, trials: int) -> None:
    wrong = 0
    for _ in range(trials):
        cover = random_cover(rng, max_variables=5)
        k = [rng.randint(-3, 3) for _ in cover.cells]
        M = int(max(deterministic_values(cover, k)))
        ineq = RationalInequality(cover, tuple(Fraction(x) for x in k), Fraction(M)).normalized()
        m = random_model(rng, cover)
        slack = ineq.value(m) - ineq.bound
        plain = rational_to_logical(ineq)
        ev = evaluate_logical(m, plain)
        wrong += ev.lhs - ev.bound != slack
        compact = rational_to_logical(ineq, compact=True)
        ev = evaluate_logical(m, compact)
        gap = ev.lhs - ev.bound
        wrong += (gap > 0) != (slack > 0) or (gap == 0) != (slack == 0)
    c.that(wrong == 0, f"logical and rational slacks agree on {trials} triples ({wrong} mismatches)")


def _fm_soundness(c: _Checker, rng: random.Random, label: str, system: LinearSystem,
                  eliminate: list[str], sample: Callable[[], dict[str, Fraction]], points: int) -> None:
    bad = inside_count = total = 0
    steps = 0
    for _, reduced in projection_steps(system, eliminate):
        steps += 1
        for _ in range(points):
            full = sample()
            point = {v: full[v] for v in reduced.variables}
            if rng.random() < 0.6:
                v = rng.choice(reduced.variables)
                point[v] += Fraction(rng.randint(-4, 4), rng.randint(2, 16))
            inside = reduced.satisfied_by([point[v] for v in reduced.variables])
            bad += inside != has_extension(system, point)
            inside_count += inside
            total += 1
    c.note(f"{label}: {inside_count}/{total} probe points inside")
    c.that(bad == 0, f"{label}: projection agrees with LP extension at {points} points "
                     f"per step over {steps} steps ({bad} mismatches)")


def _prop_fm(c: _Checker, rng: random.Random, points: int) -> None:
    cover = bell_scenario_cover(2, 2, 1)
    system = correlation_system(cover)
    lams = [v for v in system.variables if v.startswith("l")]
    verts = [[-system.rows[2 * ci][0][j] for ci in range(len(cover.contexts))] for j in range(len(lams))]

    def corr_sample():
        w = [Fraction(rng.randint(0, 5)) for _ in lams]
        if not any(w):
            w[0] = Fraction(1)
        w = [x / sum(w) for x in w]
        out = dict(zip(lams, w))
        for ci in range(len(cover.contexts)):
            out[f"E{ci}"] = sum(wj * vj[ci] for wj, vj in zip(w, verts))
        return out

    _fm_soundness(c, rng, "correlation system", system, lams, corr_sample, points)

    small = bell_scenario_cover(2, 1, 1)  # one context {a, b}
    for cov in (small, random_cover(rng, max_variables=3, max_contexts=2, max_width=2)):
        sym = symbolic_system(cov)
        xs = [v for v in sym.variables if v.startswith("x")]

        def nc_sample(cov=cov, sym=sym, xs=xs):
            m = random_noncontextual(rng, cov, rng.randint(1, 3))
            out = dict(zip([v for v in sym.variables if not v.startswith("x")], m.vector()))
            dec = find_noncontextual_decomposition(m, columns=list(range(2 ** cov.n_variables)))
            for t, x in enumerate(xs):
                out[x] = dec.weights.get(t, Fraction(0))
            return out

        _fm_soundness(c, rng, f"symbolic system on {len(cov.contexts)} contexts", sym, xs, nc_sample, points)


def check_properties(c: _Checker, seed: int) -> None:
    rng = random.Random(seed)
    _prop_equivalence(c, rng, 100)
    _prop_rational_identity(c, rng, 200)
    _prop_fm(c, rng, 100)


# -- registry -----------------------------------------------------------------

CHECKS: list[tuple[int, str, float, Callable[[_Checker, int], None]]] = [
    (1, "Bell table: probabilistic contextuality, violation 1/4, CHSH 5/2", 1, check_bell),
    (2, "Hardy model: possibilistic witness with violation p (2p in CHSH form)", 1, check_hardy),
    (3, "GHZ(3): Born-rule support, strong contextuality, maximal violation", 1, check_ghz),
    (4, "PR box: strong contextuality, E = (1,1,1,-1), CHSH value 4", 1, check_pr_box),
    (5, "ks18: ONE(U) unsatisfiable, 10 random states strongly contextual", 30, check_ks18),
    (6, "Peres-Mermin: parity formulas unsatisfiable, maximal violation", 1, check_peres_mermin),
    (7, "Werner-Wolf A2: logical form, MAX-SAT 7, five-subset contradictions", 5, check_werner_wolf),
    (8, "Vertex-4 model: satisfies the correlation inequality, violates the logical one maximally",
     5, check_vertex4),
    (9, "Bell cover completeness pipeline agrees with the decomposition LP", 600, check_completeness),
    (10, "Bell correlation polytope: tight facets, 8 CHSH members, PR box at 4", 120, check_correlation),
    (11, "Property suites: K-consistency equivalence, rational identity, FM soundness", 300,
     check_properties),
]


def run_check(number: int, seed: int = 0) -> CheckResult:
    for num, title, budget, fn in CHECKS:
        if num == number:
            result = CheckResult(num, title, budget)
            checker = _Checker(result)
            start = time.perf_counter()
            try:
                fn(checker, seed)
            except Exception as exc:  # report, do not abort the run
                result.failures.append(f"raised {type(exc).__name__}: {exc}")
            result.seconds = time.perf_counter() - start
            if result.seconds > budget:
                result.failures.append(f"exceeded time budget {budget:g}s")
            result.passed = not result.failures
            return result
    raise KeyError(number)


def run_all(seed: int = 0, only: list[int] | None = None) -> list[CheckResult]:
    numbers = only or [num for num, *_ in CHECKS]
    return [run_check(n, seed) for n in numbers]

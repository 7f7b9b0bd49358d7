"""Command line for ctxlab: classify, derive, eval, convert, expect, quantum, zoo, selftest.

Exit status 0 on success (a contextual model is a result, not an error),
1 on domain errors such as unreadable input, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from . import quantum, serialize
from .zoo import CATALOGUE, bell_cover, ghz_cover, peres_mermin_cover, zoo as lookup
from .contextuality import classify, find_noncontextual_decomposition, global_sections, non_extendable
from .core import (DomainError, EmpiricalModel, MeasurementCover, SupportModel, bell_scenario_cover,
                   bitstring, support_of, uniform_on_support)
from .inequalities import (CorrelationInequality, Evaluation, LogicalBellInequality,
                           RationalInequality, best_context_inequality, canonical_support_inequality,
                           chsh_functional, correlation_to_logical, evaluate_logical,
                           expectation_vector, logical_to_correlation, logical_to_rational,
                           possibilistic_witness_inequality, rational_to_logical)
from .logic import is_jointly_satisfiable, is_k_consistent
from .polytope import (FM_VARIABLE_LIMIT, CORRELATION_CONTEXT_LIMIT, complete_logical_bell_set,
                       correlation_polytope, noncontextual_polytope, tight_vertices)

log = logging.getLogger("ctxlab")

VERBS = ("classify", "derive", "eval", "convert", "expect", "quantum", "zoo", "selftest")
PRESETS = ("bell", "ghz", "hardy", "peres-mermin", "ks18")
HELP = {
    "classify": "place a model in the contextuality hierarchy and report witnesses",
    "derive": "complete inequality sets for a cover (rational, logical or correlation)",
    "eval": "evaluate an inequality on a model",
    "convert": "translate between logical, rational and correlation forms",
    "expect": "expectation values E_U = 2 p(even parity) - 1",
    "quantum": "Born-rule model from a state and observables",
    "zoo": "list named examples or print one as JSON",
    "selftest": "run the acceptance checks",
}


class UsageError(Exception):
    pass


def fmt(q) -> str:
    """Exact ``p/q`` with a decimal approximation."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator} ({float(q):.6g})"


# -- input -------------------------------------------------------------------

def _scenario(text: str) -> MeasurementCover:
    try:
        n, k, p = (int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"--scenario expects n,k,p (got {text!r})") from None
    return bell_scenario_cover(n, k, p)


def load_model(args) -> EmpiricalModel | SupportModel:
    if args.model and args.zoo:
        raise UsageError("give only one of --model and --zoo")
    if args.model:
        return serialize.model_from_json(serialize.load_json(args.model))
    if args.zoo:
        obj = lookup(args.zoo)
        if not isinstance(obj, (EmpiricalModel, SupportModel)):
            raise DomainError(f"zoo entry {args.zoo!r} is not a model")
        return obj
    raise UsageError("a model is required (--model FILE or --zoo NAME)")


def load_cover(args, required: bool = True) -> MeasurementCover | None:
    if getattr(args, "scenario", None):
        return _scenario(args.scenario)
    if args.model or args.zoo:
        return load_model(args).cover
    if required:
        raise UsageError("a cover is required (--scenario, --model or --zoo)")
    return None


def load_inequality(args, check: bool = True):
    source = args.inequality
    if not source:
        raise UsageError("--inequality FILE (or zoo:NAME) is required")
    if source.startswith("zoo:"):
        obj = lookup(source[4:])
        if not isinstance(obj, (LogicalBellInequality, RationalInequality, CorrelationInequality)):
            raise DomainError(f"zoo entry {source[4:]!r} is not an inequality")
        return obj
    return serialize.inequality_from_json(serialize.load_json(source), check=check)


# -- reports -------------------------------------------------------------------

def _evaluation(ev: Evaluation) -> dict[str, Any]:
    return {"lhs": serialize.rational(ev.lhs), "bound": ev.bound, "cardinality": ev.cardinality,
            "violation": serialize.rational(ev.violation), "maximal": ev.maximal}


def _chsh(m: EmpiricalModel, ineq: LogicalBellInequality, limit) -> Fraction | None:
    formulas = [t.tagged for t in ineq.multiset]
    if any(t.k != 1 for t in ineq.multiset) or len(formulas) < 2:
        return None
    if is_jointly_satisfiable(formulas, limit) is not None:
        return None
    return chsh_functional(m, formulas)


def classify_report(model: EmpiricalModel | SupportModel, limit: int | None) -> dict[str, Any]:
    report: dict[str, Any] = {}
    if isinstance(model, SupportModel):
        m = uniform_on_support(model)
        report["distribution"] = "uniform on support"
    else:
        m = model
    cls = classify(m, limit)
    report["class"] = cls.value
    report["contextual"] = cls.contextual
    sm = support_of(m)
    report["global_sections"] = len(global_sections(sm, limit))

    canonical = canonical_support_inequality(m, limit)
    ev = evaluate_logical(m, canonical)
    chosen, source = canonical, "support"
    if ev.violation == 0:
        best = best_context_inequality(m, limit)
        if best is not None:
            chosen, source = best, "context search"
            ev = evaluate_logical(m, best)
    report["inequality"] = {"source": source, "text": str(chosen),
                            "json": serialize.inequality_to_json(chosen), **_evaluation(ev)}
    report["violation"] = serialize.rational(ev.violation)
    report["maximal"] = ev.maximal
    chsh = _chsh(m, chosen, limit)
    if chsh is not None:
        n = len(chosen.multiset)
        report["chsh"] = {"value": serialize.rational(chsh), "bound": n - 2,
                          "violation": serialize.rational(max(Fraction(0), chsh - (n - 2)))}
    missing = non_extendable(sm, limit)
    if missing and report["global_sections"]:
        ci, code = missing[0]
        witness = possibilistic_witness_inequality(sm, m.cover.contexts[ci], code, limit)
        report["witness"] = {"context": list(m.cover.contexts[ci]),
                             "assignment": bitstring(code, len(m.cover.contexts[ci])),
                             "text": str(witness), **_evaluation(evaluate_logical(m, witness))}
    if not cls.contextual:
        dec = find_noncontextual_decomposition(m, limit)
        report["decomposition"] = serialize.decomposition_to_json(dec)
    return report


def _print_classify(r: dict[str, Any]) -> None:
    print(f"class: {r['class']}")
    print(f"contextual: {str(r['contextual']).lower()}")
    if "distribution" in r:
        print(f"distribution: {r['distribution']}")
    print(f"global sections: {r['global_sections']}")
    ineq = r["inequality"]
    print(f"inequality ({ineq['source']}): {ineq['text']}")
    print(f"  lhs {fmt(Fraction(ineq['lhs']))}, bound {ineq['bound']}, "
          f"violation {fmt(Fraction(ineq['violation']))}, maximal {str(ineq['maximal']).lower()}")
    if "chsh" in r:
        c = r["chsh"]
        print(f"CHSH value: {fmt(Fraction(c['value']))} against bound {c['bound']} "
              f"(violation {fmt(Fraction(c['violation']))})")
    if "witness" in r:
        w = r["witness"]
        print(f"possibilistic witness at [{','.join(w['context'])}]={w['assignment']}: {w['text']}")
        print(f"  violation {fmt(Fraction(w['violation']))}")
    if "decomposition" in r:
        print("decomposition: " + ", ".join(f"{t}: {fmt(Fraction(w))}" for t, w in r["decomposition"].items()))


# -- verbs ---------------------------------------------------------------------

def cmd_classify(args) -> dict[str, Any]:
    report = classify_report(load_model(args), args.limit_vars)
    if not args.json:
        _print_classify(report)
    return report


def cmd_derive(args) -> dict[str, Any]:
    cover = load_cover(args)
    target = args.target or "logical"
    if target == "correlation":
        limit = args.limit_vars or CORRELATION_CONTEXT_LIMIT
        facets = correlation_polytope(cover, limit)
        members = [{"json": serialize.inequality_to_json(q), "text": str(q), "tight_vertices": len(tight_vertices(q))}
                   for q in facets]
    else:
        limit = args.limit_vars or FM_VARIABLE_LIMIT
        if target == "rational":
            members = [{"json": serialize.inequality_to_json(q), "text": str(q)}
                       for q in noncontextual_polytope(cover, limit)]
        else:
            members = []
            for q in complete_logical_bell_set(cover, limit):
                members.append({"json": serialize.inequality_to_json(q), "text": str(q),
                                "k_consistent": is_k_consistent(q.multiset, q.bound)})
    if not args.json:
        print(f"{len(members)} {target} inequalities on {len(cover.contexts)} contexts")
        for item in members:
            extra = ""
            if "k_consistent" in item:
                extra = "  [K-consistent]" if item["k_consistent"] else "  [NOT K-consistent]"
            print(f"  {item['text']}{extra}")
    return {"target": target, **serialize.cover_to_json(cover), "inequalities": members}


def cmd_eval(args) -> dict[str, Any]:
    model = load_model(args)
    m = uniform_on_support(model) if isinstance(model, SupportModel) else model
    ineq = load_inequality(args)
    if isinstance(ineq, LogicalBellInequality):
        ev = evaluate_logical(m, ineq)
        out = {"kind": "logical", **_evaluation(ev)}
        chsh = _chsh(m, ineq, args.limit_vars)
        if chsh is not None:
            out["chsh"] = serialize.rational(chsh)
    elif isinstance(ineq, RationalInequality):
        _same_cover(ineq.cover, m.cover)
        value = ineq.value(m)
        out = {"kind": "rational", "lhs": serialize.rational(value), "bound": serialize.rational(ineq.bound),
               "violation": serialize.rational(max(Fraction(0), value - ineq.bound))}
    else:
        _same_cover(ineq.cover, m.cover)
        value = ineq.value(expectation_vector(m))
        out = {"kind": "correlation", "lhs": serialize.rational(value), "bound": ineq.bound,
               "violation": serialize.rational(max(Fraction(0), value - ineq.bound))}
    out["text"] = str(ineq)
    if not args.json:
        print(out["text"])
        print(f"lhs {fmt(Fraction(out['lhs']))}, bound {out['bound']}, "
              f"violation {fmt(Fraction(out['violation']))}")
        if out.get("maximal"):
            print("maximal violation")
        if "chsh" in out:
            print(f"CHSH value: {fmt(Fraction(out['chsh']))}")
    return out


def _same_cover(a: MeasurementCover, b: MeasurementCover) -> None:
    if a != b:
        raise DomainError("inequality and model are on different covers")


def cmd_convert(args) -> dict[str, Any]:
    ineq = load_inequality(args)
    target = args.target
    if target is None:
        raise UsageError("convert needs --target logical|rational|correlation")
    if isinstance(ineq, LogicalBellInequality):
        cover = load_cover(args, required=False) or _cover_of(ineq)
        if target == "correlation":
            out = logical_to_correlation(ineq, cover)
        elif target == "rational":
            out = logical_to_rational(ineq, cover)
        else:
            out = ineq
    elif isinstance(ineq, RationalInequality):
        if target == "logical":
            out = rational_to_logical(ineq, compact=not args.expanded, limit=args.limit_vars)
        elif target == "rational":
            out = ineq
        else:
            raise DomainError("a rational inequality converts to correlation form only via the logical form "
                              "when it is a parity inequality; convert to logical first")
    else:
        if target == "logical":
            out = correlation_to_logical(ineq, args.limit_vars)
            if not args.expanded:
                out = out.normalized()
        elif target == "rational":
            out = ineq.to_rational()
        else:
            out = ineq
    if not args.json:
        print(out)
    return serialize.inequality_to_json(out)


def _cover_of(ineq: LogicalBellInequality) -> MeasurementCover:
    """The cover spanned by the contexts an inequality mentions."""
    contexts = list(dict.fromkeys(frozenset(t.tagged.context) for t in ineq.multiset))
    # primed names follow their base name: a, a', b, b', ...
    variables = sorted(ineq.multiset.variables(), key=lambda v: (v.rstrip("'"), len(v) - len(v.rstrip("'"))))
    return MeasurementCover(variables, contexts)


def cmd_expect(args) -> dict[str, Any]:
    model = load_model(args)
    if isinstance(model, SupportModel):
        raise DomainError("expectations need probabilities, not a support table")
    eta = expectation_vector(model)
    out = {model.cover.label(ci): serialize.rational(v) for ci, v in enumerate(eta.values)}
    if not args.json:
        for key, v in out.items():
            print(f"E[{key}] = {fmt(Fraction(v))}")
    return {"expectations": out}


def _preset(name: str, seed: int | None):
    if name == "bell":
        return quantum.bell_state(), bell_cover(), quantum.bell_observables()
    if name == "ghz":
        return quantum.ghz_state(3), ghz_cover(), quantum.ghz_observables()
    if name == "hardy":
        state, obs = quantum.hardy_realization()
        return state, bell_cover(), obs
    rng = np.random.default_rng(seed)
    if name == "peres-mermin":
        return quantum.random_state(4, rng), peres_mermin_cover(), quantum.peres_mermin_observables()
    cover, obs = quantum.ks_observables(quantum.KS18_RAYS)
    return quantum.random_state(4, rng), cover, obs


def cmd_quantum(args) -> dict[str, Any]:
    if bool(args.preset) == bool(args.setup):
        raise UsageError("give exactly one of --preset NAME and --setup FILE")
    if args.setup:
        state, cover, obs = serialize.quantum_setup_from_json(serialize.load_json(args.setup))
    else:
        state, cover, obs = _preset(args.preset, args.seed)
    m = quantum.born_model(state, cover, obs, args.max_denominator)
    cls = classify(m, args.limit_vars)
    if not args.json:
        for ci, ctx in enumerate(cover.contexts):
            cells = ", ".join(f"{bitstring(c, len(ctx))}: {fmt(p)}" for c, p in enumerate(m.rows[ci]))
            print(f"[{','.join(ctx)}] {cells}")
        print(f"class: {cls.value}")
    return {"model": serialize.model_to_json(m), "class": cls.value, "contextual": cls.contextual}


def cmd_zoo(args) -> dict[str, Any]:
    if not args.name:
        if not args.json:
            for name in sorted(CATALOGUE):
                print(name)
        return {"entries": sorted(CATALOGUE)}
    obj = lookup(args.name)
    if isinstance(obj, (EmpiricalModel, SupportModel)):
        data = serialize.model_to_json(obj)
    else:
        data = serialize.inequality_to_json(obj)
    if not args.json:
        print(serialize.dump_json(data))
    return data


def cmd_selftest(args) -> dict[str, Any]:
    from .acceptance import CHECKS, run_check
    only = None
    if args.only:
        try:
            only = [int(x) for x in args.only.split(",")]
        except ValueError:
            raise UsageError("--only expects comma-separated criterion numbers") from None
        known = {num for num, *_ in CHECKS}
        if set(only) - known:
            raise UsageError(f"unknown criteria {sorted(set(only) - known)}")
    numbers = only or [num for num, *_ in CHECKS]
    results = []
    for n in numbers:
        r = run_check(n, args.seed or 0)
        results.append(r)
        if not args.json:
            print(r.line(), flush=True)
    passed = sum(r.passed for r in results)
    if not args.json:
        print(f"{passed}/{len(results)} criteria passed")
    report = {"passed": passed, "total": len(results),
              "results": [{"number": r.number, "title": r.title, "passed": r.passed,
                           "seconds": round(r.seconds, 3), "failures": r.failures, "notes": r.notes}
                          for r in results]}
    if passed != len(results):
        report["_exit"] = 1
    return report


COMMANDS = {"classify": cmd_classify, "derive": cmd_derive, "eval": cmd_eval, "convert": cmd_convert,
            "expect": cmd_expect, "quantum": cmd_quantum, "zoo": cmd_zoo, "selftest": cmd_selftest}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", metavar="FILE", help="model JSON (probabilities or support table)")
    common.add_argument("--zoo", metavar="NAME", help="named example model")
    common.add_argument("--scenario", metavar="n,k,p", help="Bell scenario cover")
    common.add_argument("--inequality", metavar="FILE", help="inequality JSON, or zoo:NAME")
    common.add_argument("--target", choices=("logical", "rational", "correlation"))
    common.add_argument("--out", metavar="FILE", help="write the JSON result here")
    common.add_argument("--json", action="store_true", help="print JSON instead of the text report")
    common.add_argument("--seed", type=int, help="seed for randomized commands")
    common.add_argument("--limit-vars", type=int, metavar="N", help="override variable/context limits")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="ctxlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True, metavar="VERB")
    for verb in VERBS:
        p = sub.add_parser(verb, parents=[common], help=HELP[verb])
        if verb == "convert":
            p.add_argument("--expanded", action="store_true",
                           help="one literal term per cell instead of the compact form")
        elif verb == "quantum":
            p.add_argument("--preset", choices=PRESETS)
            p.add_argument("--setup", metavar="FILE", help="state, cover and observables as JSON")
            p.add_argument("--max-denominator", type=int, default=quantum.MAX_DENOMINATOR)
        elif verb == "zoo":
            p.add_argument("name", nargs="?")
        elif verb == "selftest":
            p.add_argument("--only", metavar="N,...", help="run only these criteria")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        result = COMMANDS[args.verb](args)
    except UsageError as exc:
        parser.error(str(exc))
    except DomainError as exc:
        print(f"ctxlab: error: {exc}", file=sys.stderr)
        return 1
    status = result.pop("_exit", 0)
    if args.json:
        print(serialize.dump_json(result))
    if args.out:
        serialize.dump_json(result, args.out)
    return status


if __name__ == "__main__":
    sys.exit(main())

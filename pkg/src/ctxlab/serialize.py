"""JSON encodings with exact ``"p/q"`` rationals.

Models: ``{"variables": [...], "contexts": [[...], ...], "rows": {"<ci>": {"<bits>": "p/q"}}}``;
a support table uses arrays of bitstrings in place of the inner maps.
Inequalities carry a ``"kind"`` of ``logical``, ``rational`` or ``correlation``.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .contextuality import NoncontextualDecomposition
from .core import (DomainError, EmpiricalModel, MeasurementCover, SupportModel, as_fraction,
                   bitstring, parse_bitstring)
from .inequalities import CorrelationInequality, LogicalBellInequality, RationalInequality
from .logic import FormulaMultiset, TaggedFormula, Term, parse_formula
from .polytope import InequalitySet, LinearSystem
from .quantum import DichotomicObservable, StateVector, ks_observables


def rational(q) -> str:
    q = as_fraction(q)
    return f"{q.numerator}/{q.denominator}"


def _rational_in(value) -> Fraction:
    if isinstance(value, bool):
        raise DomainError(f"not a rational number: {value!r}")
    return as_fraction(value)


def _require(data: Mapping, *keys: str) -> None:
    if not isinstance(data, Mapping):
        raise DomainError("expected a JSON object")
    missing = [k for k in keys if k not in data]
    if missing:
        raise DomainError(f"missing field(s) {', '.join(missing)}")


# -- covers and models -------------------------------------------------------

def cover_to_json(cover: MeasurementCover) -> dict[str, Any]:
    return {"variables": list(cover.variables), "contexts": [list(c) for c in cover.contexts]}


def cover_from_json(data: Mapping) -> MeasurementCover:
    _require(data, "variables", "contexts")
    return MeasurementCover(data["variables"], data["contexts"])


def model_to_json(model: EmpiricalModel | SupportModel) -> dict[str, Any]:
    cover = model.cover
    out = cover_to_json(cover)
    rows = {}
    for ci, ctx in enumerate(cover.contexts):
        width = len(ctx)
        if isinstance(model, SupportModel):
            rows[str(ci)] = [bitstring(c, width) for c in sorted(model.supports[ci])]
        else:
            rows[str(ci)] = {bitstring(c, width): rational(p) for c, p in enumerate(model.rows[ci])}
    out["rows"] = rows
    return out


def model_from_json(data: Mapping) -> EmpiricalModel | SupportModel:
    """Cells missing from a probability row are zero."""
    cover = cover_from_json(data)
    _require(data, "rows")
    raw = data["rows"]
    if isinstance(raw, list):
        raw = {str(i): r for i, r in enumerate(raw)}
    if set(raw) != {str(i) for i in range(len(cover.contexts))}:
        raise DomainError("rows must be keyed by every context index")
    entries = [raw[str(ci)] for ci in range(len(cover.contexts))]
    if all(isinstance(e, list) for e in entries):
        supports = []
        for ctx, bits in zip(cover.contexts, entries):
            supports.append(frozenset(parse_bitstring(b, len(ctx)) for b in bits))
        return SupportModel(cover, tuple(supports))
    if not all(isinstance(e, Mapping) for e in entries):
        raise DomainError("rows must all be maps (probabilities) or all arrays (supports)")
    rows = []
    for ctx, cells in zip(cover.contexts, entries):
        row = [Fraction(0)] * 2 ** len(ctx)
        for bits, p in cells.items():
            row[parse_bitstring(bits, len(ctx))] = _rational_in(p)
        rows.append(tuple(row))
    return EmpiricalModel(cover, tuple(rows))


def decomposition_to_json(dec: NoncontextualDecomposition) -> dict[str, str]:
    n = dec.cover.n_variables
    return {bitstring(t, n): rational(w) for t, w in sorted(dec.weights.items())}


def decomposition_from_json(cover: MeasurementCover, data: Mapping) -> NoncontextualDecomposition:
    n = cover.n_variables
    return NoncontextualDecomposition(cover, {parse_bitstring(b, n): _rational_in(w) for b, w in data.items()})


# -- inequalities ------------------------------------------------------------

def multiset_to_json(ms: FormulaMultiset) -> list[dict[str, Any]]:
    return [{"k": t.k, "context": list(t.tagged.context), "formula": str(t.tagged.formula)} for t in ms]


def multiset_from_json(data) -> FormulaMultiset:
    if not isinstance(data, list):
        raise DomainError("a multiset is an array of {k, context, formula}")
    terms = []
    for item in data:
        _require(item, "context", "formula")
        k = item.get("k", 1)
        if not isinstance(k, int) or isinstance(k, bool):
            raise DomainError("multiplicity k must be an integer")
        terms.append(Term(k, TaggedFormula(tuple(item["context"]), parse_formula(item["formula"]))))
    return FormulaMultiset(tuple(terms))


def inequality_to_json(ineq) -> dict[str, Any]:
    if isinstance(ineq, LogicalBellInequality):
        return {"kind": "logical", "terms": multiset_to_json(ineq.multiset), "bound": ineq.bound}
    if isinstance(ineq, RationalInequality):
        cover = ineq.cover
        cells = {f"{ci}:{bitstring(code, len(cover.contexts[ci]))}": rational(c)
                 for (ci, code), c in zip(cover.cells, ineq.coefficients) if c}
        return {"kind": "rational", **cover_to_json(cover), "coefficients": cells,
                "bound": rational(ineq.bound)}
    if isinstance(ineq, CorrelationInequality):
        return {"kind": "correlation", **cover_to_json(ineq.cover),
                "coefficients": {str(ci): int(c) for ci, c in enumerate(ineq.coefficients) if c},
                "bound": int(ineq.bound)}
    raise DomainError(f"cannot serialize {type(ineq).__name__}")


def inequality_from_json(data: Mapping, check: bool = True):
    _require(data, "kind", "bound")
    kind = data["kind"]
    if kind == "logical":
        _require(data, "terms")
        bound = data["bound"]
        if not isinstance(bound, int) or isinstance(bound, bool):
            raise DomainError("logical bound must be an integer")
        return LogicalBellInequality(multiset_from_json(data["terms"]), bound, check=check)
    if kind == "rational":
        cover = cover_from_json(data)
        _require(data, "coefficients")
        cells = {}
        for key, c in data["coefficients"].items():
            ci_text, _, bits = key.partition(":")
            try:
                ci = int(ci_text)
            except ValueError:
                raise DomainError(f"bad cell key {key!r}") from None
            if not 0 <= ci < len(cover.contexts):
                raise DomainError(f"context index {ci} out of range")
            cells[(ci, parse_bitstring(bits, len(cover.contexts[ci])))] = _rational_in(c)
        return RationalInequality.from_cells(cover, cells, _rational_in(data["bound"]))
    if kind == "correlation":
        cover = cover_from_json(data)
        _require(data, "coefficients")
        coeffs = [0] * len(cover.contexts)
        for key, c in data["coefficients"].items():
            ci = int(key)
            if not 0 <= ci < len(coeffs):
                raise DomainError(f"context index {ci} out of range")
            coeffs[ci] = c
        return CorrelationInequality(cover, tuple(coeffs), data["bound"])
    raise DomainError(f"unknown inequality kind {kind!r}")


def linear_system_to_json(system: LinearSystem) -> dict[str, Any]:
    return {"variables": list(system.variables),
            "rows": [{"coefficients": [rational(c) for c in a], "rhs": rational(b)} for a, b in system.rows]}


def linear_system_from_json(data: Mapping) -> LinearSystem:
    _require(data, "variables", "rows")
    rows = tuple((tuple(_rational_in(c) for c in r["coefficients"]), _rational_in(r["rhs"]))
                 for r in data["rows"])
    return LinearSystem(tuple(data["variables"]), rows)


def inequality_set_to_json(s: InequalitySet) -> dict[str, Any]:
    return {**cover_to_json(s.cover), "inequalities": [inequality_to_json(q) for q in s]}


def inequality_set_from_json(data: Mapping) -> InequalitySet:
    cover = cover_from_json(data)
    _require(data, "inequalities")
    members = []
    for item in data["inequalities"]:
        q = inequality_from_json({**item, **cover_to_json(cover)})
        if not isinstance(q, RationalInequality):
            raise DomainError("an inequality set holds rational inequalities")
        members.append(q)
    return InequalitySet(cover, tuple(members))


# -- quantum -----------------------------------------------------------------

def _complex(entry) -> complex:
    if isinstance(entry, (int, float)) and not isinstance(entry, bool):
        return complex(entry)
    if isinstance(entry, list) and len(entry) == 2:
        return complex(float(entry[0]), float(entry[1]))
    raise DomainError(f"complex entries are numbers or [re, im] pairs, got {entry!r}")


def complex_matrix(data) -> np.ndarray:
    return np.array([[_complex(e) for e in row] for row in data], dtype=complex)


def matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def observable_from_json(data) -> DichotomicObservable:
    """``{"ray": [...]}``, ``{"p0": M}`` or ``{"observable": M}`` (a +-1 valued Hermitian)."""
    if "ray" in data:
        return DichotomicObservable.from_ray([_complex(x) for x in data["ray"]])
    if "p0" in data:
        p0 = complex_matrix(data["p0"])
        return DichotomicObservable(p0, np.eye(p0.shape[0]) - p0)
    if "observable" in data:
        return DichotomicObservable.from_hermitian(complex_matrix(data["observable"]))
    raise DomainError("observable needs one of 'ray', 'p0', 'observable'")


def observable_to_json(obs: DichotomicObservable) -> dict[str, Any]:
    return {"p0": matrix_to_json(obs.p0)}


def quantum_setup_from_json(data: Mapping):
    """``(state, cover, observables)`` from a JSON quantum description.

    Either ``rays`` (a KS-style configuration, cover derived from orthogonality)
    or ``variables``/``contexts``/``observables`` must be present.
    """
    _require(data, "state")
    state = StateVector(np.array([_complex(z) for z in data["state"]]))
    if "rays" in data:
        rays = data["rays"]
        if isinstance(rays, Mapping):
            cover, obs = ks_observables({k: [float(x) for x in v] for k, v in rays.items()})
        else:
            cover, obs = ks_observables([[float(x) for x in v] for v in rays])
        return state, cover, obs
    cover = cover_from_json(data)
    _require(data, "observables")
    obs = {name: observable_from_json(o) for name, o in data["observables"].items()}
    return state, cover, obs


# -- files -------------------------------------------------------------------

def load_json(path: str | Path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise DomainError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path} is not valid JSON: {exc}") from exc


def dump_json(data, path: str | Path | None = None) -> str:
    text = json.dumps(data, indent=2)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text

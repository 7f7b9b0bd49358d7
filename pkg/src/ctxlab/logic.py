"""Propositional formulas over measurement outcomes.

Outcome ``0`` reads as *true* and ``1`` as *false*, everywhere.  Formulas
are immutable ASTs; equivalence is always decided by comparing satisfying
sets, never by rewriting.

Satisfiability and MAX-SAT are solved by exhaustive enumeration of global
assignments, evaluated a chunk at a time with numpy boolean vectors.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .core import DomainError, check_limit

CHUNK_BITS = 20


class Formula:
    """Base class of the formula AST."""

    precedence = 100

    def variables(self) -> frozenset[str]:
        raise NotImplementedError

    def truth(self, env: Mapping[str, np.ndarray]) -> np.ndarray:
        """Vectorized evaluation; ``env`` maps a variable to its truth vector."""
        raise NotImplementedError

    def evaluate(self, assignment: Mapping[str, int]) -> bool:
        env = {v: np.array([assignment[v] == 0]) for v in self.variables()}
        return bool(np.asarray(self.truth(env)).reshape(-1)[0])

    def __invert__(self) -> Formula:
        return Not(self)

    def __and__(self, other: Formula) -> Formula:
        return And((self, other))

    def __or__(self, other: Formula) -> Formula:
        return Or((self, other))

    def __xor__(self, other: Formula) -> Formula:
        return Xor((self, other))

    def _wrap(self, child: Formula) -> str:
        text = str(child)
        return f"({text})" if child.precedence <= self.precedence else text


def _shape(env):
    for arr in env.values():
        return arr.shape
    return (1,)


@dataclass(frozen=True)
class Const(Formula):
    value: bool
    precedence = 100

    def variables(self):
        return frozenset()

    def truth(self, env):
        return np.full(_shape(env), self.value, dtype=bool)

    def __str__(self):
        return "TRUE" if self.value else "FALSE"


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Var(Formula):
    name: str
    precedence = 100

    def variables(self):
        return frozenset([self.name])

    def truth(self, env):
        return env[self.name]

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula
    precedence = 50

    def variables(self):
        return self.arg.variables()

    def truth(self, env):
        return np.logical_not(self.arg.truth(env))

    def __str__(self):
        return "!" + (str(self.arg) if self.arg.precedence >= self.precedence else f"({self.arg})")


class _NAry(Formula):
    symbol = ""
    args: tuple[Formula, ...]

    def __init__(self, args: Iterable[Formula]):
        args = tuple(args)
        if not args:
            raise DomainError(f"{type(self).__name__} needs at least one operand")
        object.__setattr__(self, "args", args)

    def variables(self):
        return frozenset().union(*(a.variables() for a in self.args))

    def __str__(self):
        return f" {self.symbol} ".join(self._wrap(a) for a in self.args)

    def __eq__(self, other):
        return type(self) is type(other) and self.args == other.args

    def __hash__(self):
        return hash((type(self).__name__, self.args))

    def __repr__(self):
        return f"{type(self).__name__}({self.args!r})"

    def __setattr__(self, key, value):
        raise AttributeError("formulas are immutable")


class And(_NAry):
    symbol = "&"
    precedence = 40

    def truth(self, env):
        out = self.args[0].truth(env)
        for a in self.args[1:]:
            out = np.logical_and(out, a.truth(env))
        return out


class Xor(_NAry):
    symbol = "^"
    precedence = 30

    def truth(self, env):
        out = self.args[0].truth(env)
        for a in self.args[1:]:
            out = np.logical_xor(out, a.truth(env))
        return out


class Or(_NAry):
    symbol = "|"
    precedence = 20

    def truth(self, env):
        out = self.args[0].truth(env)
        for a in self.args[1:]:
            out = np.logical_or(out, a.truth(env))
        return out


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula
    precedence = 10

    def variables(self):
        return self.left.variables() | self.right.variables()

    def truth(self, env):
        return np.logical_not(np.logical_xor(self.left.truth(env), self.right.truth(env)))

    def __str__(self):
        return f"{self._wrap(self.left)} <-> {self._wrap(self.right)}"


# -- text syntax -----------------------------------------------------------

_TOKEN = re.compile(r"\s*(<->|[!&|^()]|[A-Za-z_][A-Za-z0-9_']*)")


def _tokenize(text: str) -> list[str]:
    tokens, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DomainError(f"cannot parse formula at {text[pos:]!r}")
        tokens.append(m.group(1))
        pos = m.end()
    return tokens


def parse_formula(text: str) -> Formula:
    """Parse ``! & ^ | <->`` (tightest first), parentheses, ``TRUE``/``FALSE``."""
    tokens = _tokenize(text)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def take(expected=None):
        nonlocal pos
        tok = peek()
        if tok is None or (expected and tok != expected):
            raise DomainError(f"expected {expected or 'token'} in {text!r}")
        pos += 1
        return tok

    def binary(sub, symbol, cls):
        def parse():
            args = [sub()]
            while peek() == symbol:
                take()
                args.append(sub())
            return args[0] if len(args) == 1 else cls(args)
        return parse

    def atom():
        tok = take()
        if tok == "!":
            return Not(atom())
        if tok == "(":
            inner = iff()
            take(")")
            return inner
        if tok in ("TRUE", "FALSE"):
            return TRUE if tok == "TRUE" else FALSE
        if tok in ("&", "|", "^", ")", "<->"):
            raise DomainError(f"unexpected {tok!r} in {text!r}")
        return Var(tok)

    conj = binary(atom, "&", And)
    xor = binary(conj, "^", Xor)
    disj = binary(xor, "|", Or)

    def iff():
        left = disj()
        if peek() == "<->":
            take()
            return Iff(left, iff())
        return left

    result = iff()
    if pos != len(tokens):
        raise DomainError(f"trailing input in formula {text!r}")
    return result


# -- tagged formulas and multisets ------------------------------------------

@dataclass(frozen=True)
class TaggedFormula:
    """A formula attached to the context whose variables it may use."""

    context: tuple[str, ...]
    formula: Formula

    def __post_init__(self):
        context = tuple(self.context)
        object.__setattr__(self, "context", context)
        extra = self.formula.variables() - set(context)
        if extra:
            raise DomainError(f"formula uses {sorted(extra)} outside context {context}")

    def __str__(self):
        return f"[{','.join(self.context)}] {self.formula}"


class Term(NamedTuple):
    k: int
    tagged: TaggedFormula


@dataclass(frozen=True)
class FormulaMultiset:
    terms: tuple[Term, ...] = ()

    def __post_init__(self):
        terms = tuple(Term(int(k), tf) for k, tf in self.terms)
        if any(t.k < 0 for t in terms):
            raise DomainError("multiplicities must be non-negative")
        object.__setattr__(self, "terms", terms)

    @property
    def cardinality(self) -> int:
        return sum(t.k for t in self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def variables(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for t in self.terms:
            for v in t.tagged.context:
                seen.setdefault(v)
        return tuple(seen)


# -- enumeration -------------------------------------------------------------

def _chunks(n: int):
    total = 1 << n
    step = 1 << min(n, CHUNK_BITS)
    for start in range(0, total, step):
        idx = np.arange(start, min(start + step, total), dtype=np.int64)
        yield start, idx


def _env(variables: Sequence[str], idx: np.ndarray) -> dict[str, np.ndarray]:
    n = len(variables)
    return {v: ((idx >> (n - 1 - i)) & 1) == 0 for i, v in enumerate(variables)}


def truth_table(formula: Formula, variables: Sequence[str], limit: int | None = None) -> np.ndarray:
    """Truth value of ``formula`` at every code over ``variables`` (MSB first)."""
    check_limit(len(variables), limit)
    missing = formula.variables() - set(variables)
    if missing:
        raise DomainError(f"formula uses undeclared variables {sorted(missing)}")
    parts = [formula.truth(_env(variables, idx)) for _, idx in _chunks(len(variables))]
    return np.concatenate(parts)


def satisfying_codes(formula: Formula, context: Sequence[str], limit: int | None = None) -> frozenset[int]:
    return frozenset(np.flatnonzero(truth_table(formula, context, limit)).tolist())


def satisfying_assignments(tf: TaggedFormula, limit: int | None = None) -> frozenset[int]:
    """Codes (over ``tf.context``) of the local assignments satisfying ``tf``."""
    return satisfying_codes(tf.formula, tf.context, limit)


def equivalent(f: Formula, g: Formula, context: Sequence[str]) -> bool:
    return satisfying_codes(f, context) == satisfying_codes(g, context)


def point_formula(context: Sequence[str], code: int) -> Formula:
    """Conjunction pinning every variable of ``context`` to the bits of ``code``."""
    width = len(context)
    if not 0 <= code < 2 ** width:
        raise DomainError(f"code {code} out of range for {context}")
    lits = []
    for i, var in enumerate(context):
        bit = (code >> (width - 1 - i)) & 1
        lits.append(Var(var) if bit == 0 else Not(Var(var)))
    return lits[0] if len(lits) == 1 else And(lits)


def support_formula(codes: Iterable[int], context: Sequence[str]) -> Formula:
    codes = sorted(set(codes))
    if not codes:
        raise DomainError("support must be nonempty")
    points = [point_formula(context, c) for c in codes]
    return points[0] if len(points) == 1 else Or(points)


def one_hot_formula(context: Sequence[str]) -> Formula:
    """Exactly one variable of ``context`` takes outcome 0."""
    if not context:
        raise DomainError("context must be nonempty")
    if len(context) == 1:
        return Var(context[0])
    terms = []
    for x in context:
        others = [Not(Var(y)) for y in context if y != x]
        terms.append(And([Var(x), *others]))
    return Or(terms)


def parity_formula(context: Sequence[str], parity: str = "even") -> Formula:
    """Even (or odd) number of 1-outcomes among ``context``.

    The odd formula is the exclusive-or of the negated variables; the even
    one is its negation.
    """
    if not context:
        raise DomainError("context must be nonempty")
    if parity not in ("even", "odd"):
        raise DomainError("parity must be 'even' or 'odd'")
    negs = [Not(Var(x)) for x in context]
    odd = negs[0] if len(negs) == 1 else Xor(negs)
    return odd if parity == "odd" else Not(odd)


def parity_codes(width: int, parity: str) -> frozenset[int]:
    want = 0 if parity == "even" else 1
    return frozenset(c for c in range(2 ** width) if bin(c).count("1") % 2 == want)


def _score(ms: FormulaMultiset, limit: int | None):
    """Yield ``(start, scores)`` chunks: weighted count of satisfied terms."""
    variables = ms.variables()
    check_limit(len(variables), limit)
    for start, idx in _chunks(len(variables)):
        env = _env(variables, idx)
        score = np.zeros(len(idx), dtype=np.int64)
        for term in ms.terms:
            if term.k:
                score += term.k * term.tagged.formula.truth(env)
        yield start, score


def max_satisfiable(ms: FormulaMultiset, limit: int | None = None) -> int:
    """Largest cardinality of a jointly satisfiable sub-multiset."""
    best = 0
    for _, score in _score(ms, limit):
        best = max(best, int(score.max(initial=0)))
    return best


def max_satisfying_assignment(ms: FormulaMultiset, limit: int | None = None) -> tuple[int, dict[str, int]]:
    variables = ms.variables()
    best, where = -1, 0
    for start, score in _score(ms, limit):
        i = int(score.argmax())
        if score[i] > best:
            best, where = int(score[i]), start + i
    n = len(variables)
    return max(best, 0), {v: (where >> (n - 1 - i)) & 1 for i, v in enumerate(variables)}


def is_k_consistent(ms: FormulaMultiset, k: int, limit: int | None = None) -> bool:
    return max_satisfiable(ms, limit) <= k


def is_jointly_satisfiable(formulas: Sequence[TaggedFormula], limit: int | None = None) -> dict[str, int] | None:
    """A global assignment satisfying every formula, or ``None``."""
    ms = FormulaMultiset(tuple(Term(1, tf) for tf in formulas))
    score, witness = max_satisfying_assignment(ms, limit)
    return witness if score == len(formulas) else None


def unsatisfiable_subsets(formulas: Sequence[TaggedFormula], size: int):
    """All index subsets of the given size that are jointly unsatisfiable."""
    return [idx for idx in combinations(range(len(formulas)), size)
            if is_jointly_satisfiable([formulas[i] for i in idx]) is None]

"""Empirical models from pure states and dichotomic projective measurements."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .core import DomainError, EmpiricalModel, MeasurementCover

STRUCTURAL_TOL = 1e-10
PROB_TOL = 1e-12
MAX_DIMENSION = 16
MAX_DENOMINATOR = 2 ** 20

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size > MAX_DIMENSION:
            raise DomainError(f"dimension {amps.size} exceeds {MAX_DIMENSION}")
        if abs(np.vdot(amps, amps).real - 1) > PROB_TOL:
            raise DomainError("state vector is not normalized")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dimension(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True, eq=False)
class DichotomicObservable:
    """Projectors for outcome 0 and outcome 1."""

    p0: np.ndarray
    p1: np.ndarray

    def __post_init__(self):
        p0 = np.asarray(self.p0, dtype=complex)
        p1 = np.asarray(self.p1, dtype=complex)
        if p0.shape != p1.shape or p0.ndim != 2 or p0.shape[0] != p0.shape[1]:
            raise DomainError("projectors must be square matrices of equal size")
        for p in (p0, p1):
            if not np.allclose(p @ p, p, atol=STRUCTURAL_TOL) or not np.allclose(p, p.conj().T, atol=STRUCTURAL_TOL):
                raise DomainError("not an orthogonal projector")
        if not np.allclose(p0 + p1, np.eye(p0.shape[0]), atol=STRUCTURAL_TOL):
            raise DomainError("projectors do not sum to the identity")
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "p1", p1)

    @classmethod
    def from_hermitian(cls, op: np.ndarray) -> DichotomicObservable:
        """Outcome 0 is the +1 eigenspace of an involutive Hermitian ``op``."""
        op = np.asarray(op, dtype=complex)
        eye = np.eye(op.shape[0])
        return cls((eye + op) / 2, (eye - op) / 2)

    @classmethod
    def from_ray(cls, vector: Sequence) -> DichotomicObservable:
        """Outcome 0 projects onto the ray, outcome 1 onto its complement."""
        v = np.asarray(vector, dtype=complex)
        v = v / np.linalg.norm(v)
        p = np.outer(v, v.conj())
        return cls(p, np.eye(v.size) - p)

    def projector(self, outcome: int) -> np.ndarray:
        return self.p0 if outcome == 0 else self.p1

    @property
    def dimension(self) -> int:
        return self.p0.shape[0]


ObservableAssignment = Mapping[str, DichotomicObservable]


def bell_state() -> StateVector:
    return ghz_state(2)


def ghz_state(n: int) -> StateVector:
    if n < 2:
        raise DomainError("GHZ state needs at least 2 qubits")
    if 2 ** n > MAX_DIMENSION:
        raise DomainError(f"dimension 2^{n} exceeds {MAX_DIMENSION}")
    amps = np.zeros(2 ** n, dtype=complex)
    amps[0] = amps[-1] = 1 / np.sqrt(2)
    return StateVector(amps)


def xy_spin_observable(angle: float) -> DichotomicObservable:
    """Spin along ``cos(angle) X + sin(angle) Y``; outcome 0 is the +1 eigenvector."""
    return DichotomicObservable.from_hermitian(np.cos(angle) * PAULI_X + np.sin(angle) * PAULI_Y)


def embed(obs: DichotomicObservable, site: int, n_sites: int) -> DichotomicObservable:
    """Act with a single-qubit observable on one factor of ``n_sites`` qubits."""
    def lift(p):
        out = np.eye(1, dtype=complex)
        for k in range(n_sites):
            out = np.kron(out, p if k == site else I2)
        return out
    return DichotomicObservable(lift(obs.p0), lift(obs.p1))


def check_compatible(cover: MeasurementCover, obs: ObservableAssignment) -> None:
    dims = {o.dimension for o in obs.values()}
    if len(dims) != 1:
        raise DomainError("observables act on different dimensions")
    missing = set(cover.variables) - obs.keys()
    if missing:
        raise DomainError(f"no observable for {sorted(missing)}")
    for ctx in cover.contexts:
        for x, y in itertools.combinations(ctx, 2):
            a, b = obs[x].p0, obs[y].p0
            if not np.allclose(a @ b, b @ a, atol=STRUCTURAL_TOL):
                raise DomainError(f"observables {x} and {y} do not commute")


def born_probabilities(state: StateVector, cover: MeasurementCover,
                       obs: ObservableAssignment) -> list[np.ndarray]:
    """Floating-point Born rule table, one array per context."""
    check_compatible(cover, obs)
    psi = state.amplitudes
    if psi.size != next(iter(obs.values())).dimension:
        raise DomainError("state and observables have different dimensions")
    rows = []
    for ctx in cover.contexts:
        row = np.empty(2 ** len(ctx))
        for code in range(2 ** len(ctx)):
            vec = psi
            for i, var in enumerate(ctx):
                bit = (code >> (len(ctx) - 1 - i)) & 1
                vec = obs[var].projector(bit) @ vec
            row[code] = float(np.vdot(vec, vec).real)
        if abs(row.sum() - 1) > PROB_TOL * 100:
            raise DomainError(f"Born probabilities for {ctx} sum to {row.sum()}")
        rows.append(row)
    return rows


def rationalize_row(row: Sequence[float], max_denominator: int = MAX_DENOMINATOR) -> tuple[Fraction, ...]:
    """Snap to nearby small-denominator rationals, then fix the sum on the largest cell."""
    fr = [Fraction(max(float(p), 0.0)).limit_denominator(max_denominator) for p in row]
    biggest = max(range(len(fr)), key=lambda i: (fr[i], -i))
    fr[biggest] += 1 - sum(fr)
    return tuple(fr)


def born_model(state: StateVector, cover: MeasurementCover, obs: ObservableAssignment,
               max_denominator: int = MAX_DENOMINATOR) -> EmpiricalModel:
    rows = born_probabilities(state, cover, obs)
    return EmpiricalModel(cover, tuple(rationalize_row(r, max_denominator) for r in rows))


def site_observables(per_site: Sequence[Mapping[str, DichotomicObservable]]) -> dict[str, DichotomicObservable]:
    """Embed the local observables of each site into the joint space."""
    n = len(per_site)
    return {var: embed(o, i, n) for i, site in enumerate(per_site) for var, o in site.items()}


BELL_ANGLES = {"a": 0.0, "a'": np.pi / 3, "b": 0.0, "b'": np.pi / 3}


def bell_observables() -> dict[str, DichotomicObservable]:
    """XY-plane spins reproducing the Bell table on the Bell state."""
    return site_observables([
        {"a": xy_spin_observable(BELL_ANGLES["a"]), "a'": xy_spin_observable(BELL_ANGLES["a'"])},
        {"b": xy_spin_observable(BELL_ANGLES["b"]), "b'": xy_spin_observable(BELL_ANGLES["b'"])},
    ])


def ghz_observables(n: int = 3) -> dict[str, DichotomicObservable]:
    """X on the unprimed and Y on the primed variable of each site."""
    sites = []
    for i in range(n):
        name = chr(ord("a") + i)
        sites.append({name: xy_spin_observable(0.0), name + "'": xy_spin_observable(np.pi / 2)})
    return site_observables(sites)


def hardy_realization() -> tuple[StateVector, dict[str, DichotomicObservable]]:
    """State ``(|01> + |10> + |11>)/sqrt(3)`` with the Hardy support.

    ``a, b``: outcome 0 on ``|->``; ``a', b'``: outcome 0 on ``|1>``.
    Gives ``p(a=0, b=0) = 1/12``.
    """
    state = StateVector(np.array([0, 1, 1, 1]) / np.sqrt(3))
    minus = xy_spin_observable(np.pi)
    one = DichotomicObservable.from_hermitian(-PAULI_Z)
    return state, site_observables([{"a": minus, "a'": one}, {"b": minus, "b'": one}])


def peres_mermin_observables() -> dict[str, DichotomicObservable]:
    """Two-qubit Paulis; rows multiply to ``-I`` and columns to ``+I``."""
    k = np.kron
    ops = {
        "A": k(PAULI_X, I2), "B": k(I2, PAULI_X), "C": -k(PAULI_X, PAULI_X),
        "D": k(I2, PAULI_Y), "E": k(PAULI_Y, I2), "F": -k(PAULI_Y, PAULI_Y),
        "G": k(PAULI_X, PAULI_Y), "H": k(PAULI_Y, PAULI_X), "I": -k(PAULI_Z, PAULI_Z),
    }
    return {name: DichotomicObservable.from_hermitian(op) for name, op in ops.items()}


# Cabello-Estebaranz-Garcia-Alcaine rays, labelled to match the ks18 zoo cover
KS18_RAYS = {
    "A": (0, 0, 0, 1), "B": (0, 0, 1, 0), "C": (1, 1, 0, 0), "D": (1, -1, 0, 0),
    "E": (0, 1, 0, 0), "F": (1, 0, 1, 0), "G": (1, 0, -1, 0), "H": (1, -1, 1, -1),
    "I": (1, -1, -1, 1), "J": (0, 0, 1, 1), "K": (1, 1, 1, 1), "L": (0, 1, 0, -1),
    "M": (1, 0, 0, 1), "N": (1, 0, 0, -1), "O": (0, 1, -1, 0), "P": (1, 1, -1, 1),
    "Q": (1, 1, 1, -1), "R": (-1, 1, 1, 1),
}


def ks_observables(rays: Sequence[Sequence[float]] | Mapping[str, Sequence[float]],
                   names: Sequence[str] | None = None) -> tuple[MeasurementCover, dict[str, DichotomicObservable]]:
    """Cover of orthonormal bases among ``rays`` and the ray projectors."""
    if isinstance(rays, Mapping):
        names, rays = list(rays), list(rays.values())
    vecs = [np.asarray(r, dtype=float) for r in rays]
    vecs = [v / np.linalg.norm(v) for v in vecs]
    d = vecs[0].size
    if d > 8:
        raise DomainError("ray dimension above 8")
    names = list(names) if names is not None else [f"v{i}" for i in range(len(vecs))]
    for i, j in itertools.combinations(range(len(vecs)), 2):
        if abs(abs(vecs[i] @ vecs[j]) - 1) < STRUCTURAL_TOL:
            raise DomainError(f"rays {names[i]} and {names[j]} coincide")
    orth = [[abs(u @ v) < STRUCTURAL_TOL for v in vecs] for u in vecs]
    contexts = []

    def extend(clique: list[int], start: int):
        if len(clique) == d:
            contexts.append([names[i] for i in clique])
            return
        for j in range(start, len(vecs)):
            if all(orth[i][j] for i in clique):
                extend(clique + [j], j + 1)

    extend([], 0)
    if not contexts:
        raise DomainError("no complete orthonormal basis among the rays")
    used = {v for c in contexts for v in c}
    keep = [n for n in names if n in used]
    cover = MeasurementCover(keep, contexts)
    obs = {n: DichotomicObservable.from_ray(v) for n, v in zip(names, vecs) if n in used}
    return cover, obs


def random_state(dimension: int, rng: np.random.Generator) -> StateVector:
    z = rng.normal(size=dimension) + 1j * rng.normal(size=dimension)
    return StateVector(z / np.linalg.norm(z))

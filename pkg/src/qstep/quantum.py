"""Dense complex linear algebra primitives for small Hilbert spaces.

Pure states, Hermitian operators, POVMs, eigendecomposition with a fixed
phase convention, unitary evolution, and Born-rule probabilities. Everything
is a plain value object over numpy arrays; operations are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    NegativeProbability,
    NonHermitianInput,
    OrthogonalStates,
)

HERMITICITY_TOL = 1e-12
NORM_TOL = 1e-12
OVERLAP_FLOOR = 1e-14
PROB_CLAMP = -1e-12


@dataclass(frozen=True)
class PureState:
    """Unit-norm complex amplitude vector."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex, copy=True)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        if amps.ndim != 1 or amps.size < 2:
            raise DimensionMismatch(f"state must be a vector of dim >= 2, got shape {amps.shape}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm!r} deviates from 1 beyond {NORM_TOL}")

    @property
    def dim(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True)
class HermitianOperator:
    """d x d complex matrix equal to its conjugate transpose within 1e-12."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"operator must be square, got shape {m.shape}")
        if not np.allclose(m, m.conj().T, rtol=0.0, atol=HERMITICITY_TOL):
            dev = np.max(np.abs(m - m.conj().T))
            raise NonHermitianInput(f"max |H - H^dag| = {dev:g} exceeds {HERMITICITY_TOL}")
        m = np.array(m, dtype=complex if np.iscomplexobj(m) else float, copy=True)
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class EigenPair:
    value: float
    vector: PureState


@dataclass(frozen=True)
class Povm:
    """Positive effects summing to identity.

    Two representations:
      * dense: ``effects`` is a list of d x d PSD matrices;
      * grouped projective: ``index_groups`` partitions the computational
        basis and each effect is the projector onto one group, optionally
        conjugated by a global basis rotation named in ``pre_rotation``
        ("hadamard_all" applies H on every qubit). The grouped form is how
        magnetization measurements stay O(L 2^L) instead of O(4^L).
    """

    labels: tuple
    effects: tuple | None = None
    index_groups: tuple | None = None
    pre_rotation: str | None = None
    dim: int = field(default=0)

    def __post_init__(self):
        if (self.effects is None) == (self.index_groups is None):
            raise ValueError("exactly one of effects / index_groups must be given")
        if self.effects is not None:
            effects = tuple(np.array(e, dtype=complex, copy=True) for e in self.effects)
            d = effects[0].shape[0]
            for e in effects:
                if e.shape != (d, d):
                    raise DimensionMismatch("effects must share one square shape")
                if not np.allclose(e, e.conj().T, rtol=0.0, atol=1e-10):
                    raise ValueError("effect not Hermitian")
                if np.linalg.eigvalsh(e).min() < -1e-10:
                    raise ValueError("effect not PSD within 1e-10")
            total = sum(effects)
            if not np.allclose(total, np.eye(d), rtol=0.0, atol=1e-10):
                raise ValueError("effects do not sum to identity within 1e-10")
            for e in effects:
                e.setflags(write=False)
            object.__setattr__(self, "effects", effects)
            object.__setattr__(self, "dim", d)
        else:
            groups = tuple(np.array(g, dtype=np.intp, copy=True) for g in self.index_groups)
            d = int(sum(g.size for g in groups))
            seen = np.concatenate(groups)
            if np.unique(seen).size != d:
                raise ValueError("index groups must partition the basis")
            if self.pre_rotation not in (None, "hadamard_all"):
                raise ValueError(f"unknown pre_rotation {self.pre_rotation!r}")
            for g in groups:
                g.setflags(write=False)
            object.__setattr__(self, "index_groups", groups)
            object.__setattr__(self, "dim", d)
        if len(self.labels) != self.n_outcomes:
            raise DimensionMismatch("labels must match the number of effects")

    @property
    def n_outcomes(self) -> int:
        return len(self.effects) if self.effects is not None else len(self.index_groups)

    def effect_matrix(self, k: int) -> np.ndarray:
        """Materialize effect k as a dense matrix (grouped form: dim <= 256 only)."""
        if self.effects is not None:
            return np.array(self.effects[k])
        if self.dim > 256:
            raise MemoryError("refusing to materialize a projector above dim 256")
        proj = np.zeros((self.dim, self.dim), dtype=complex)
        idx = self.index_groups[k]
        proj[idx, idx] = 1.0
        if self.pre_rotation == "hadamard_all":
            rot = _hadamard_matrix(self.dim)
            proj = rot @ proj @ rot
        return proj

    def probabilities_batch(self, states: np.ndarray) -> np.ndarray:
        """Outcome probabilities for a batch of state rows, shape (N, d) -> (N, K)."""
        states = np.atleast_2d(states)
        if states.shape[1] != self.dim:
            raise DimensionMismatch(f"state dim {states.shape[1]} vs povm dim {self.dim}")
        if self.effects is not None:
            out = np.empty((states.shape[0], self.n_outcomes))
            for k, e in enumerate(self.effects):
                out[:, k] = np.einsum("nd,de,ne->n", states.conj(), e, states).real
            return out
        amps = states
        if self.pre_rotation == "hadamard_all":
            amps = hadamard_all(states)
        w = np.abs(amps) ** 2
        out = np.empty((states.shape[0], self.n_outcomes))
        for k, idx in enumerate(self.index_groups):
            out[:, k] = w[:, idx].sum(axis=1)
        return out


def _hadamard_matrix(dim: int) -> np.ndarray:
    n = dim.bit_length() - 1
    h1 = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    m = np.array([[1.0]])
    for _ in range(n):
        m = np.kron(m, h1)
    return m


def hadamard_all(states: np.ndarray) -> np.ndarray:
    """Apply a Hadamard on every qubit of each state row via the butterfly, O(L 2^L)."""
    states = np.array(np.atleast_2d(states), dtype=complex)
    d = states.shape[1]
    n = d.bit_length() - 1
    if 1 << n != d:
        raise DimensionMismatch(f"dimension {d} is not a power of two")
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    view = states.reshape(states.shape[0], -1)
    for q in range(n):
        shaped = view.reshape(states.shape[0], d >> (q + 1), 2, 1 << q)
        a = shaped[:, :, 0, :].copy()
        b = shaped[:, :, 1, :]
        shaped[:, :, 0, :] = (a + b) * inv_sqrt2
        shaped[:, :, 1, :] = (a - b) * inv_sqrt2
    return view.reshape(states.shape)


def _phase_fix_columns(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude component is real positive.

    Ties in magnitude resolve to the lowest index (argmax convention).
    """
    idx = np.argmax(np.abs(vectors), axis=0)
    lead = vectors[idx, np.arange(vectors.shape[1])]
    phase = lead / np.abs(lead)
    return vectors / phase[None, :]


def eigendecompose(op: HermitianOperator) -> list[EigenPair]:
    """Full orthonormal eigensystem, ascending eigenvalues, phase-fixed vectors."""
    values, vectors = np.linalg.eigh(op.entries)
    vectors = _phase_fix_columns(vectors.astype(complex))
    return [EigenPair(float(values[k]), PureState(vectors[:, k])) for k in range(values.size)]


def ground_state(op: HermitianOperator) -> tuple[float, PureState, float]:
    """Lowest eigenpair plus the gap to the next level."""
    values, vectors = np.linalg.eigh(op.entries)
    vec = _phase_fix_columns(vectors[:, :1].astype(complex))[:, 0]
    gap = float(values[1] - values[0])
    return float(values[0]), PureState(vec), gap


def unitary_from_generator(gen: HermitianOperator) -> np.ndarray:
    """exp(-i gen) via eigendecomposition."""
    values, vectors = np.linalg.eigh(gen.entries)
    return (vectors * np.exp(-1j * values)) @ vectors.conj().T


def born_probabilities(state: PureState, povm: Povm) -> np.ndarray:
    """p(mu) = <psi| Pi_mu |psi>, clamped against tiny negative roundoff."""
    if state.dim != povm.dim:
        raise DimensionMismatch(f"state dim {state.dim} vs povm dim {povm.dim}")
    p = povm.probabilities_batch(state.amplitudes[None, :])[0]
    if p.min() < PROB_CLAMP:
        raise NegativeProbability(f"probability {p.min():g} below {PROB_CLAMP}")
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def phase_align(reference: PureState, state: PureState) -> PureState:
    """Multiply state by the unit phase making <reference|state> real positive."""
    overlap = np.vdot(reference.amplitudes, state.amplitudes)
    mag = abs(overlap)
    if mag <= OVERLAP_FLOOR:
        raise OrthogonalStates(f"overlap magnitude {mag:g} <= {OVERLAP_FLOOR}")
    return PureState(state.amplitudes * (mag / overlap))

"""The four probe models and their measurement settings.

* qubit: |psi(l1,l2)> = exp(-i(l1 sx + l2 sz)) |psi0(alpha,beta)>
* three-level avoided-crossing probe: ground state of
  [[l0, l1, 0], [l1, 0, l2], [0, l2, -l0]] (the 0-2 coupling is forbidden)
* mixed-field Ising ring: ground state of
  H = J sum_i sx_i sx_{i+1} - sum_i (l1 sx_i + l2 sz_i), J = 1, periodic
* Gaussian probe: analytic QFIM of a squeezed-rotated coherent state,
  parameters (phase, squeezing), no state representation.

Site i maps to bit i; sz has eigenvalue +1 on bit value 0. Ground states of
the real symmetric Hamiltonians are real vectors, so their Uhlmann scalar
vanishes identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionBudget
from .fisher import DEGENERACY_GAP_RATIO, ParamPoint, Qfim
from .quantum import (
    HermitianOperator,
    Povm,
    PureState,
    _phase_fix_columns,
    unitary_from_generator,
)

MAX_CHAIN_LENGTH = 12

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]])


@dataclass(frozen=True)
class QubitProbeConfig:
    """Initial state |psi0> = cos(alpha/2)|0> + e^{i beta} sin(alpha/2)|1>."""

    alpha: float
    beta: float

    def __post_init__(self):
        # normalize to alpha in [0, pi], beta in [0, 2pi); (alpha, beta) and
        # (2pi - alpha, beta + pi) give the same ray
        a = self.alpha % (2.0 * math.pi)
        b = self.beta
        if a > math.pi:
            a = 2.0 * math.pi - a
            b = b + math.pi
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b % (2.0 * math.pi))

    def initial_state(self) -> PureState:
        return PureState(
            np.array(
                [math.cos(self.alpha / 2.0), np.exp(1j * self.beta) * math.sin(self.alpha / 2.0)]
            )
        )


@dataclass(frozen=True)
class LzConfig:
    lambda0: float = 2.0

    def __post_init__(self):
        if not math.isfinite(self.lambda0):
            raise ValueError("lambda0 must be finite")


@dataclass(frozen=True)
class IsingConfig:
    length: int
    coupling: float = 1.0

    def __post_init__(self):
        if self.length < 3:
            raise ValueError("chain length must be >= 3 (periodic ring needs distinct bonds)")
        if self.length > MAX_CHAIN_LENGTH:
            raise DimensionBudget(f"L={self.length} exceeds dense-solver budget {MAX_CHAIN_LENGTH}")
        if self.coupling != 1.0:
            raise ValueError("coupling is fixed to 1 (fields are already in units of J)")


@dataclass(frozen=True)
class GaussianConfig:
    alpha_re: float
    alpha_im: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha_re) and math.isfinite(self.alpha_im)):
            raise ValueError("displacement must be finite")


def _ground_info(entries: np.ndarray) -> tuple[PureState, bool]:
    values, vectors = np.linalg.eigh(entries)
    vec = _phase_fix_columns(vectors[:, :1].astype(complex))[:, 0]
    spread = float(values[-1] - values[0])
    gap = float(values[1] - values[0])
    degenerate = gap < DEGENERACY_GAP_RATIO * (spread if spread > 0.0 else 1.0)
    return PureState(vec), degenerate


# -- qubit ------------------------------------------------------------------


def qubit_state(cfg: QubitProbeConfig, point: ParamPoint) -> PureState:
    gen = HermitianOperator(point.lambda1 * SIGMA_X + point.lambda2 * SIGMA_Z)
    u = unitary_from_generator(gen)
    return PureState(u @ cfg.initial_state().amplitudes)


def qubit_state_batch(cfg: QubitProbeConfig, l1: np.ndarray, l2: np.ndarray) -> np.ndarray:
    """Closed-form exp(-i theta n.sigma)|psi0> for parameter arrays, -> (N, 2)."""
    l1 = np.asarray(l1, dtype=float)
    l2 = np.asarray(l2, dtype=float)
    theta = np.hypot(l1, l2)
    sinc = np.where(theta > 0.0, np.sin(theta) / np.where(theta > 0.0, theta, 1.0), 1.0)
    psi0 = cfg.initial_state().amplitudes
    a, b = psi0[0], psi0[1]
    cos = np.cos(theta)
    out = np.empty(l1.shape + (2,), dtype=complex)
    out[..., 0] = cos * a - 1j * sinc * (l2 * a + l1 * b)
    out[..., 1] = cos * b - 1j * sinc * (l1 * a - l2 * b)
    return out


def qubit_state_map(cfg: QubitProbeConfig):
    return lambda point: qubit_state(cfg, point)


def qubit_measurements() -> tuple[Povm, Povm]:
    """x-basis projectors for lambda1, z-basis projectors for lambda2."""
    plus = np.array([1.0, 1.0]) / math.sqrt(2.0)
    minus = np.array([1.0, -1.0]) / math.sqrt(2.0)
    povm_x = Povm(labels=("+", "-"), effects=(np.outer(plus, plus), np.outer(minus, minus)))
    povm_z = Povm(labels=("0", "1"), effects=(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])))
    return povm_x, povm_z


# -- three-level avoided crossing ------------------------------------------


def lz_hamiltonian(cfg: LzConfig, point: ParamPoint) -> HermitianOperator:
    l0 = cfg.lambda0
    return HermitianOperator(
        np.array(
            [
                [l0, point.lambda1, 0.0],
                [point.lambda1, 0.0, point.lambda2],
                [0.0, point.lambda2, -l0],
            ]
        )
    )


def lz_state(cfg: LzConfig, point: ParamPoint) -> PureState:
    state, _ = _ground_info(lz_hamiltonian(cfg, point).entries)
    return state


def lz_state_info(cfg: LzConfig, point: ParamPoint) -> tuple[PureState, bool]:
    return _ground_info(lz_hamiltonian(cfg, point).entries)


def lz_state_map(cfg: LzConfig):
    return lambda point: lz_state_info(cfg, point)


def lz_ground_batch(cfg: LzConfig, l1: np.ndarray, l2: np.ndarray) -> np.ndarray:
    l1 = np.asarray(l1, dtype=float).ravel()
    l2 = np.asarray(l2, dtype=float).ravel()
    n = l1.size
    hs = np.zeros((n, 3, 3))
    hs[:, 0, 0] = cfg.lambda0
    hs[:, 2, 2] = -cfg.lambda0
    hs[:, 0, 1] = hs[:, 1, 0] = l1
    hs[:, 1, 2] = hs[:, 2, 1] = l2
    return _ground_batch(hs)


def lz_measurements() -> tuple[Povm, Povm]:
    s = 1.0 / math.sqrt(2.0)
    v1 = [np.array([s, s, 0.0]), np.array([s, -s, 0.0]), np.array([0.0, 0.0, 1.0])]
    v2 = [np.array([0.0, s, s]), np.array([0.0, s, -s]), np.array([1.0, 0.0, 0.0])]
    povm1 = Povm(labels=("01+", "01-", "2"), effects=tuple(np.outer(v, v) for v in v1))
    povm2 = Povm(labels=("12+", "12-", "0"), effects=tuple(np.outer(v, v) for v in v2))
    return povm1, povm2


# -- mixed-field Ising ring --------------------------------------------------


def _chain_terms(length: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(bond-flip matrix, single-flip matrix, sum-of-sz diagonal) for the ring."""
    dim = 1 << length
    s = np.arange(dim)
    # bitwise_count yields uint8; widen before the subtraction can wrap
    zsum = (length - 2 * np.bitwise_count(s).astype(np.int64)).astype(float)
    hxx = np.zeros((dim, dim))
    hx = np.zeros((dim, dim))
    for i in range(length):
        hx[s ^ (1 << i), s] += 1.0
        mask = (1 << i) | (1 << ((i + 1) % length))
        hxx[s ^ mask, s] += 1.0
    return hxx, hx, zsum


def ising_hamiltonian(cfg: IsingConfig, point: ParamPoint) -> HermitianOperator:
    if cfg.length > MAX_CHAIN_LENGTH:
        raise DimensionBudget(f"L={cfg.length} exceeds {MAX_CHAIN_LENGTH}")
    hxx, hx, zsum = _chain_terms(cfg.length)
    h = cfg.coupling * hxx - point.lambda1 * hx
    h[np.diag_indices_from(h)] += -point.lambda2 * zsum
    return HermitianOperator(h)


def ising_state(cfg: IsingConfig, point: ParamPoint) -> PureState:
    state, _ = _ground_info(ising_hamiltonian(cfg, point).entries)
    return state


def ising_state_info(cfg: IsingConfig, point: ParamPoint) -> tuple[PureState, bool]:
    return _ground_info(ising_hamiltonian(cfg, point).entries)


def ising_state_map(cfg: IsingConfig):
    hxx, hx, zsum = _chain_terms(cfg.length)

    def state_fn(point: ParamPoint) -> tuple[PureState, bool]:
        h = hxx - point.lambda1 * hx
        h[np.diag_indices_from(h)] += -point.lambda2 * zsum
        return _ground_info(h)

    return state_fn


def ising_ground_batch(cfg: IsingConfig, l1: np.ndarray, l2: np.ndarray, chunk: int = 0) -> np.ndarray:
    """Ground states over parameter arrays, chunked to bound peak memory."""
    hxx, hx, zsum = _chain_terms(cfg.length)
    dim = 1 << cfg.length
    l1 = np.asarray(l1, dtype=float).ravel()
    l2 = np.asarray(l2, dtype=float).ravel()
    if chunk <= 0:
        chunk = max(16, int(3.0e7 / (dim * dim)))
    out = np.empty((l1.size, dim))
    diag = np.diag_indices(dim)
    for start in range(0, l1.size, chunk):
        stop = min(start + chunk, l1.size)
        hs = hxx[None, :, :] - l1[start:stop, None, None] * hx[None, :, :]
        hs[:, diag[0], diag[1]] -= l2[start:stop, None] * zsum[None, :]
        out[start:stop] = _ground_batch(hs)
    return out


def _ground_batch(hs: np.ndarray) -> np.ndarray:
    """Lowest eigenvector of each stacked real symmetric matrix, sign-fixed."""
    _, vectors = np.linalg.eigh(hs)
    g = vectors[..., :, 0]
    lead = g[np.arange(g.shape[0]), np.argmax(np.abs(g), axis=1)]
    return g * np.sign(lead)[:, None]


def magnetization_povm(length: int, axis: str) -> Povm:
    """Projectors onto total-magnetization eigenspaces sum_i sigma_i^axis.

    L+1 outcomes labeled by m in {-L, -L+2, ..., L}. Grouping the basis by
    Hamming weight keeps this O(L 2^L); the x version rotates by a Hadamard
    on every qubit first instead of materializing projectors.
    """
    if length < 3:
        raise ValueError("length must be >= 3")
    if length > MAX_CHAIN_LENGTH:
        raise DimensionBudget(f"L={length} exceeds {MAX_CHAIN_LENGTH}")
    if axis not in ("x", "z"):
        raise ValueError(f"axis must be 'x' or 'z', got {axis!r}")
    s = np.arange(1 << length)
    weight = np.bitwise_count(s)
    labels = tuple(-length + 2 * k for k in range(length + 1))
    # label m = L - 2w, ascending m means descending Hamming weight w
    groups = tuple(np.flatnonzero(weight == length - k) for k in range(length + 1))
    rotation = "hadamard_all" if axis == "x" else None
    return Povm(labels=labels, index_groups=groups, pre_rotation=rotation)


def ising_measurements(length: int) -> tuple[Povm, Povm]:
    """(x-magnetization for lambda1, z-magnetization for lambda2)."""
    return magnetization_povm(length, "x"), magnetization_povm(length, "z")


# -- Gaussian probe ----------------------------------------------------------


def gaussian_qfim(cfg: GaussianConfig, r: float) -> Qfim:
    """Analytic QFIM for estimating (rotation phase, squeezing strength).

    Independent of the phase parameter itself; exactly singular at r = 0
    with |Re alpha| = |Im alpha| (heterodyne displacement).
    """
    x, y = cfg.alpha_re, cfg.alpha_im
    q11 = 8.0 * (x * x + y * y) + 2.0 * math.tanh(4.0 * r) ** 2
    q12 = -16.0 * x * y * math.cosh(2.0 * r)
    q22 = 8.0 * math.exp(4.0 * r) * x * x + 8.0 * math.exp(-4.0 * r) * y * y
    return Qfim(q11, q12, q22)

"""Parameter derivatives of probe states and the Fisher information matrices.

The quantum Fisher information matrix (QFIM) for a pure two-parameter family
|psi(l1, l2)> is

    Q_ij = 4 Re( <d_i psi | d_j psi> - <d_i psi | psi><psi | d_j psi> ),

and the Uhlmann curvature scalar is the gauge-invariant imaginary part of the
same geometric tensor, delta = 4 Im(<d_1 psi|d_2 psi> - <d_1 psi|psi><psi|d_2 psi>).
Derivatives come from phase-aligned central differences with one Richardson
extrapolation level. The classical Fisher matrix of a fixed POVM uses the
same stencil on outcome probabilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NegativeProbability, OrthogonalStates, StencilFailure
from .quantum import PureState, phase_align

DEGENERACY_GAP_RATIO = 1e-8
DIAG_CLAMP = -1e-10
PSD_SLACK = 1e-9


@dataclass(frozen=True)
class ParamPoint:
    lambda1: float
    lambda2: float

    def __post_init__(self):
        if not (math.isfinite(self.lambda1) and math.isfinite(self.lambda2)):
            raise ValueError("parameter point must be finite")

    def shifted(self, d1: float = 0.0, d2: float = 0.0) -> "ParamPoint":
        return ParamPoint(self.lambda1 + d1, self.lambda2 + d2)


@dataclass(frozen=True)
class Qfim:
    """Symmetric 2x2 information matrix stored as three numbers."""

    q11: float
    q12: float
    q22: float

    def __post_init__(self):
        if self.q11 < 0.0 or self.q22 < 0.0:
            raise ValueError(f"negative diagonal: q11={self.q11:g}, q22={self.q22:g}")
        if self.det < -PSD_SLACK * self.q11 * self.q22:
            raise ValueError(f"det {self.det:g} below PSD roundoff slack")

    @property
    def det(self) -> float:
        return self.q11 * self.q22 - self.q12 * self.q12

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.q11, self.q12], [self.q12, self.q22]])

    def scaled(self, c: float) -> "Qfim":
        return Qfim(c * self.q11, c * self.q12, c * self.q22)


@dataclass(frozen=True)
class DerivativeBundle:
    psi: PureState
    dpsi1: np.ndarray
    dpsi2: np.ndarray
    degenerate_flag: bool
    step_used: float


def default_step(point: ParamPoint) -> float:
    """h = 1e-5 * max(1, |l1|, |l2|), shared by both axes."""
    return 1e-5 * max(1.0, abs(point.lambda1), abs(point.lambda2))


def _eval_state(model_state_fn, point: ParamPoint) -> tuple[PureState, bool]:
    """Models may return a bare PureState or (PureState, degenerate_bool)."""
    try:
        result = model_state_fn(point)
    except OrthogonalStates:
        raise
    except Exception as exc:
        raise StencilFailure(f"state evaluation failed at {point}: {exc}") from exc
    if isinstance(result, tuple):
        state, degenerate = result
        return state, bool(degenerate)
    return result, False


def _central(plus: PureState | None, minus: PureState | None, h: float) -> np.ndarray | None:
    if plus is None or minus is None:
        return None
    return (plus.amplitudes - minus.amplitudes) / (2.0 * h)


def state_derivatives(model_state_fn, point: ParamPoint, step: float | None = None) -> DerivativeBundle:
    """Richardson-extrapolated central differences of the state map.

    Each stencil state is phase-aligned against the center state before
    differencing; a failed alignment (level crossing) marks the bundle
    degenerate and the derivative falls back to the surviving stencil.
    """
    h = default_step(point) if step is None else float(step)
    if h <= 0.0:
        raise ValueError("step must be positive")
    try:
        center, degenerate = _eval_state(model_state_fn, point)
    except OrthogonalStates as exc:
        raise StencilFailure(f"center evaluation failed at {point}: {exc}") from exc

    def aligned(d1: float, d2: float):
        nonlocal degenerate
        try:
            state, flag = _eval_state(model_state_fn, point.shifted(d1, d2))
        except OrthogonalStates:
            degenerate = True
            return None
        degenerate = degenerate or flag
        try:
            return phase_align(center, state)
        except OrthogonalStates:
            degenerate = True
            return None

    derivs = []
    for axis in (0, 1):
        shifts = {}
        for s in (h, h / 2.0, -h / 2.0, -h):
            d1, d2 = (s, 0.0) if axis == 0 else (0.0, s)
            shifts[s] = aligned(d1, d2)
        d_h = _central(shifts[h], shifts[-h], h)
        d_half = _central(shifts[h / 2.0], shifts[-h / 2.0], h / 2.0)
        if d_h is not None and d_half is not None:
            derivs.append((4.0 * d_half - d_h) / 3.0)
        elif d_half is not None:
            derivs.append(d_half)
        elif d_h is not None:
            derivs.append(d_h)
        else:
            raise StencilFailure(f"no surviving stencil pair on axis {axis + 1} at {point}")
    return DerivativeBundle(center, derivs[0], derivs[1], degenerate, h)


def _geometric_tensor(bundle: DerivativeBundle, i: int, j: int) -> complex:
    psi = bundle.psi.amplitudes
    d = (bundle.dpsi1, bundle.dpsi2)
    return np.vdot(d[i], d[j]) - np.vdot(d[i], psi) * np.vdot(psi, d[j])


def qfim_pure(bundle: DerivativeBundle) -> Qfim:
    q11 = 4.0 * _geometric_tensor(bundle, 0, 0).real
    q12 = 4.0 * _geometric_tensor(bundle, 0, 1).real
    q22 = 4.0 * _geometric_tensor(bundle, 1, 1).real
    if DIAG_CLAMP <= q11 < 0.0:
        q11 = 0.0
    if DIAG_CLAMP <= q22 < 0.0:
        q22 = 0.0
    return Qfim(q11, q12, q22)


def uhlmann_delta(bundle: DerivativeBundle) -> float:
    """Gauge-invariant Uhlmann curvature scalar 4 Im T_12."""
    return 4.0 * _geometric_tensor(bundle, 0, 1).imag


def classical_fim(prob_fn, point: ParamPoint, step: float | None = None) -> Qfim:
    """F_ij = sum_mu dp_i dp_j / p_mu from central differences of prob_fn.

    Outcomes with center probability below 1e-12 are excluded from the sum.
    """
    h = default_step(point) if step is None else float(step)
    if h <= 0.0:
        raise ValueError("step must be positive")
    p0 = np.asarray(prob_fn(point), dtype=float)
    stencil = [
        np.asarray(prob_fn(point.shifted(s1, s2)), dtype=float)
        for s1, s2 in ((h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h))
    ]
    for p in [p0, *stencil]:
        if p.min() < -1e-12:
            raise NegativeProbability(f"stencil probability {p.min():g} below -1e-12")
    dp1 = (stencil[0] - stencil[1]) / (2.0 * h)
    dp2 = (stencil[2] - stencil[3]) / (2.0 * h)
    keep = p0 >= 1e-12
    f11 = float(np.sum(dp1[keep] ** 2 / p0[keep]))
    f12 = float(np.sum(dp1[keep] * dp2[keep] / p0[keep]))
    f22 = float(np.sum(dp2[keep] ** 2 / p0[keep]))
    return Qfim(f11, f12, f22)

"""Scalar precision bounds and strategy classification.

Joint estimation (JE) of both parameters from one measurement obeys
mu = Tr[Q^-1] = (Q11+Q22)/det(Q). Stepwise estimation (SE) spends a fraction
gamma of the budget estimating one parameter first:

    mu'(gamma)  = (Q22/det)/gamma + 1/((1-gamma) Q22)   (lambda1 first)
    mu''(gamma) = (Q11/det)/gamma + 1/((1-gamma) Q11)   (lambda2 first)

Each has the closed-form optimum of A/gamma + B/(1-gamma): gamma* =
sqrt(A)/(sqrt(A)+sqrt(B)) with value (sqrt(A)+sqrt(B))^2. mu_tilde is the
better of the two orders. SE is guaranteed to beat JE when
Q12^2/(Q11 Q22) > 2 sqrt(2) - 2. The D-invariant Holevo bound
mu_H = (Q11+Q22+2|delta|)/det refines mu; f_max below is the maximum over
gamma of the margin by which the best SE order undercuts mu_H once the
bound is cleared of denominators, and its sign gives a necessary condition
for SE to beat the Holevo bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateDiagonal, DeltaTooLarge, GammaOutOfRange, SingularQfim
from .fisher import Qfim

EQ7_THRESHOLD = 2.0 * math.sqrt(2.0) - 2.0
SINGULARITY_EPS = 1e-12
ORDER_TIE_RTOL = 1e-12
REGION_TIE_RTOL = 1e-9


class Strategy(str, Enum):
    FIRST1THEN2 = "First1Then2"
    FIRST2THEN1 = "First2Then1"
    JOINT = "Joint"


class Region(str, Enum):
    I = "I"
    II = "II"
    III = "III"


@dataclass(frozen=True)
class BoundsReport:
    mu: float
    mu_prime: float
    mu_dblprime: float
    mu_tilde: float
    gamma_opt: float
    strategy: Strategy
    region: Region
    ratio: float
    eq7_satisfied: bool
    eq7_value: float
    singular: bool


def _check_invertible(q: Qfim) -> float:
    det = q.det
    if not det > SINGULARITY_EPS * q.q11 * q.q22 or det <= 0.0:
        cond = float(np.linalg.cond(q.as_matrix())) if det != 0.0 else math.inf
        raise SingularQfim(det, cond)
    return det


def je_bound(q: Qfim) -> float:
    """mu = Tr[Q^-1], the scalar JE Cramer-Rao bound on M*(var1+var2)."""
    det = _check_invertible(q)
    return (q.q11 + q.q22) / det


def se_bound_lambda1_first(q: Qfim, gamma: float) -> float:
    if not 0.0 < gamma < 1.0:
        raise GammaOutOfRange(f"gamma {gamma!r} outside (0, 1)")
    det = _check_invertible(q)
    return (q.q22 / det) / gamma + 1.0 / ((1.0 - gamma) * q.q22)


def se_bound_lambda2_first(q: Qfim, gamma: float) -> float:
    if not 0.0 < gamma < 1.0:
        raise GammaOutOfRange(f"gamma {gamma!r} outside (0, 1)")
    det = _check_invertible(q)
    return (q.q11 / det) / gamma + 1.0 / ((1.0 - gamma) * q.q11)


def _order_optimum(a: float, b: float) -> tuple[float, float]:
    """min over gamma of a/gamma + b/(1-gamma): value and argmin."""
    ra, rb = math.sqrt(a), math.sqrt(b)
    return (ra + rb) ** 2, ra / (ra + rb)


def optimal_se(q: Qfim) -> tuple[float, float, Strategy]:
    """Best SE bound over both measurement orders and all budget splits.

    Returns (mu_tilde, gamma_opt, strategy); an exact tie between the two
    orders (relative difference < 1e-12) resolves to First1Then2.
    """
    det = _check_invertible(q)
    mu_prime, gamma1 = _order_optimum(q.q22 / det, 1.0 / q.q22)
    mu_dblprime, gamma2 = _order_optimum(q.q11 / det, 1.0 / q.q11)
    tie = abs(mu_prime - mu_dblprime) < ORDER_TIE_RTOL * max(mu_prime, mu_dblprime)
    if mu_prime <= mu_dblprime or tie:
        return mu_prime, gamma1, Strategy.FIRST1THEN2
    return mu_dblprime, gamma2, Strategy.FIRST2THEN1


def eq7_sufficiency(q: Qfim) -> tuple[bool, float]:
    """Sufficient condition for SE to beat JE: Q12^2/(Q11 Q22) > 2 sqrt(2) - 2."""
    if q.q11 <= 0.0 or q.q22 <= 0.0:
        raise DegenerateDiagonal(f"diagonals must be positive, got {q.q11:g}, {q.q22:g}")
    value = q.q12 * q.q12 / (q.q11 * q.q22)
    return value > EQ7_THRESHOLD, value


def hcrb_d_invariant(q: Qfim, delta: float) -> float:
    """Holevo bound for D-invariant two-parameter pure models."""
    det = _check_invertible(q)
    if abs(delta) > math.sqrt(q.q11 * q.q22) * (1.0 + 1e-8):
        raise DeltaTooLarge(f"|delta|={abs(delta):g} exceeds sqrt(Q11 Q22)={math.sqrt(q.q11 * q.q22):g}")
    return (q.q11 + q.q22 + 2.0 * abs(delta)) / det


def _fmax_coeffs(q: Qfim, delta: float) -> tuple[float, float, float]:
    # wlog convention a >= b; the better SE order measures the larger-QFI
    # parameter first, which is the order the margin function describes
    a, b = (q.q11, q.q22) if q.q11 >= q.q22 else (q.q22, q.q11)
    d = abs(delta)
    c = q.q12 * q.q12 / b
    return -b, 2.0 * b + 2.0 * d + c, a + b + 2.0 * d


def f_margin(q: Qfim, delta: float, gamma) -> float:
    """f(gamma): positive where the better SE order beats the Holevo bound.

    Obtained from mu'(gamma) < mu_H by clearing the positive denominators;
    a downward parabola in gamma.
    """
    c0, c1, c2 = _fmax_coeffs(q, delta)
    return c0 + c1 * gamma - c2 * gamma * gamma


def fmax_theorem2(q: Qfim, delta: float) -> float:
    """Closed-form maximum of f_margin over gamma in (0, 1).

    The vertex gamma* = c1/(2 c2) is always interior for positive-definite
    input, so the maximum is c0 + c1^2/(4 c2).
    """
    _check_invertible(q)
    c0, c1, c2 = _fmax_coeffs(q, delta)
    return c0 + c1 * c1 / (4.0 * c2)


def se_beats_hcrb_necessary(q: Qfim, delta: float) -> tuple[bool, float, float]:
    """Necessary condition for SE to beat the D-invariant Holevo bound.

    lhs = Q12^2/(Q11 Q22) must reach (1 - delta^2/(Q11 Q22))/(1 + |delta|/Q22),
    with the smaller diagonal in the role of Q22 (same wlog as fmax_theorem2).
    """
    if q.q11 <= 0.0 or q.q22 <= 0.0:
        raise DegenerateDiagonal(f"diagonals must be positive, got {q.q11:g}, {q.q22:g}")
    b = min(q.q11, q.q22)
    lhs = q.q12 * q.q12 / (q.q11 * q.q22)
    rhs = (1.0 - delta * delta / (q.q11 * q.q22)) / (1.0 + abs(delta) / b)
    return lhs >= rhs, lhs, rhs


def _singular_report(q: Qfim) -> BoundsReport:
    # eq7_satisfied is forced False here so the containment invariant can
    # never be voided by a nan ratio
    try:
        _, value = eq7_sufficiency(q)
    except DegenerateDiagonal:
        value = math.nan
    return BoundsReport(
        mu=math.inf,
        mu_prime=math.inf,
        mu_dblprime=math.inf,
        mu_tilde=math.inf,
        gamma_opt=math.nan,
        strategy=Strategy.JOINT,
        region=Region.III,
        ratio=math.nan,
        eq7_satisfied=False,
        eq7_value=value,
        singular=True,
    )


def classify_region(q: Qfim) -> BoundsReport:
    """Assemble the full report and pick the winning strategy region.

    Region I/II: SE wins measuring lambda1/lambda2 first; region III: JE.
    mu_tilde vs mu ties (relative tolerance 1e-9) resolve to region III.
    """
    try:
        mu = je_bound(q)
    except SingularQfim:
        return _singular_report(q)
    det = q.det
    mu_prime, gamma1 = _order_optimum(q.q22 / det, 1.0 / q.q22)
    mu_dblprime, gamma2 = _order_optimum(q.q11 / det, 1.0 / q.q11)
    mu_tilde, gamma_opt, se_order = optimal_se(q)
    eq7_satisfied, eq7_value = eq7_sufficiency(q)
    if mu_tilde < mu * (1.0 - REGION_TIE_RTOL):
        strategy = se_order
        region = Region.I if se_order is Strategy.FIRST1THEN2 else Region.II
    else:
        strategy = Strategy.JOINT
        region = Region.III
    return BoundsReport(
        mu=mu,
        mu_prime=mu_prime,
        mu_dblprime=mu_dblprime,
        mu_tilde=mu_tilde,
        gamma_opt=gamma_opt,
        strategy=strategy,
        region=region,
        ratio=mu_tilde / mu,
        eq7_satisfied=eq7_satisfied,
        eq7_value=eq7_value,
        singular=False,
    )

"""Two-phase sequential Bayesian estimation on discretized priors.

Phase 1 spends m1 = ceil(gamma M) shots measuring the first parameter's
basis; its posterior uses the likelihood marginalized over the other
parameter's prior. Phase 2 spends the rest on the second parameter with the
first fixed at its phase-1 posterior mean. The scaled error
shots_used * (var1 + var2) is traced against the JE and SE bounds at the
true point.

The phase-1 marginal likelihood does not factorize across shot batches (the
average over the other parameter couples them), so every refresh recomputes
the posterior from the prior and the cumulative outcome counts; the final
posterior is therefore exactly independent of batch_size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .bounds import Strategy, je_bound, optimal_se
from .errors import DimensionMismatch, UnnormalizedProbs, ZeroLikelihood
from .fisher import ParamPoint, Qfim, qfim_pure, state_derivatives
from .models import (
    IsingConfig,
    LzConfig,
    QubitProbeConfig,
    ising_ground_batch,
    ising_measurements,
    ising_state_map,
    lz_ground_batch,
    lz_measurements,
    lz_state_map,
    qubit_measurements,
    qubit_state_batch,
    qubit_state_map,
)
from .quantum import Povm

PROB_FLOOR = 1e-300
# a likelihood whose best grid cell is this far below per-shot floor scale
# signals that the prior does not cover the truth
LOG_TRIP = math.log(1e-290)
TRACE_COLUMNS = ("shots_used", "est1", "est2", "var1", "var2", "scaled_error", "mu", "mu_tilde")


@dataclass(frozen=True)
class PosteriorGrid:
    """Probability masses on n cell-centered support points of [lo, hi]."""

    lo: float
    hi: float
    n: int
    weights: np.ndarray

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError("hi must exceed lo")
        if self.n < 2:
            raise ValueError("need at least 2 support points")
        w = np.array(self.weights, dtype=float, copy=True)
        w.setflags(write=False)
        if w.shape != (self.n,):
            raise DimensionMismatch(f"weights shape {w.shape} vs n={self.n}")
        if w.min() < 0.0:
            raise ValueError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum {w.sum()!r} deviates from 1 beyond 1e-12")
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, lo: float, hi: float, n: int) -> "PosteriorGrid":
        return cls(lo, hi, n, np.full(n, 1.0 / n))

    @property
    def points(self) -> np.ndarray:
        step = (self.hi - self.lo) / self.n
        return self.lo + (np.arange(self.n) + 0.5) * step


@dataclass(frozen=True)
class BayesConfig:
    total_shots: int
    gamma: float
    seed: int
    true_point: ParamPoint
    prior_width_1: float
    prior_width_2: float
    order: Strategy
    grid_points: int = 1000
    batch_size: int = 1

    def __post_init__(self):
        if isinstance(self.order, str):
            object.__setattr__(self, "order", Strategy(self.order))
        if self.order not in (Strategy.FIRST1THEN2, Strategy.FIRST2THEN1):
            raise ValueError("order must be First1Then2 or First2Then1")
        if self.total_shots < 1:
            raise ValueError("total_shots must be >= 1")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if self.shots_phase1 < 1 or self.shots_phase2 < 1:
            raise ValueError("budget split leaves an empty phase; adjust gamma or total_shots")
        if self.grid_points < 2:
            raise ValueError("grid_points must be >= 2")
        if self.prior_width_1 <= 0.0 or self.prior_width_2 <= 0.0:
            raise ValueError("prior widths must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")

    @property
    def shots_phase1(self) -> int:
        return math.ceil(self.gamma * self.total_shots)

    @property
    def shots_phase2(self) -> int:
        return self.total_shots - self.shots_phase1


class BayesRow(NamedTuple):
    shots_used: int
    est1: float
    est2: float
    var1: float
    var2: float
    scaled_error: float
    mu: float
    mu_tilde: float


@dataclass
class BayesTrace:
    rows: list[BayesRow] = field(default_factory=list)
    mu: float = math.nan
    mu_tilde: float = math.nan
    error: str | None = None


@dataclass(frozen=True)
class BayesModel:
    """Adapter tying a probe model to its two measurement bases.

    state_batch(l1_array, l2_array) -> (N, d) amplitude rows; povm_1/povm_2
    are the bases used while estimating lambda1/lambda2; qfim_fn computes the
    QFIM at a point for the bound lines of the trace.
    """

    name: str
    povm_1: Povm
    povm_2: Povm
    state_batch: Callable[[np.ndarray, np.ndarray], np.ndarray]
    qfim_fn: Callable[[ParamPoint], Qfim]

    def prob_table(self, povm: Povm, l1_points, l2_points, chunk: int = 65536) -> np.ndarray:
        """Outcome probabilities over the parameter product grid, (A, B, K)."""
        l1_points = np.asarray(l1_points, dtype=float)
        l2_points = np.asarray(l2_points, dtype=float)
        g1, g2 = np.meshgrid(l1_points, l2_points, indexing="ij")
        flat1, flat2 = g1.ravel(), g2.ravel()
        out = np.empty((flat1.size, povm.n_outcomes))
        for start in range(0, flat1.size, chunk):
            stop = min(start + chunk, flat1.size)
            states = self.state_batch(flat1[start:stop], flat2[start:stop])
            out[start:stop] = povm.probabilities_batch(states)
        return out.reshape(l1_points.size, l2_points.size, povm.n_outcomes)

    def probs_at(self, povm: Povm, point: ParamPoint) -> np.ndarray:
        return self.prob_table(povm, [point.lambda1], [point.lambda2])[0, 0]


def _fd_qfim_fn(state_map_fn) -> Callable[[ParamPoint], Qfim]:
    return lambda point: qfim_pure(state_derivatives(state_map_fn, point))


def qubit_model(cfg: QubitProbeConfig) -> BayesModel:
    povm_x, povm_z = qubit_measurements()
    return BayesModel(
        name="qubit",
        povm_1=povm_x,
        povm_2=povm_z,
        state_batch=lambda l1, l2: qubit_state_batch(cfg, l1, l2),
        qfim_fn=_fd_qfim_fn(qubit_state_map(cfg)),
    )


def lz_model(cfg: LzConfig) -> BayesModel:
    povm1, povm2 = lz_measurements()
    return BayesModel(
        name="lz",
        povm_1=povm1,
        povm_2=povm2,
        state_batch=lambda l1, l2: lz_ground_batch(cfg, l1, l2),
        qfim_fn=_fd_qfim_fn(lz_state_map(cfg)),
    )


def ising_model(cfg: IsingConfig) -> BayesModel:
    povm_x, povm_z = ising_measurements(cfg.length)
    return BayesModel(
        name="ising",
        povm_1=povm_x,
        povm_2=povm_z,
        state_batch=lambda l1, l2: ising_ground_batch(cfg, l1, l2),
        qfim_fn=_fd_qfim_fn(ising_state_map(cfg)),
    )


def prior_grids(cfg: BayesConfig) -> tuple[PosteriorGrid, PosteriorGrid]:
    """Uniform priors centered on the true values, full widths from cfg."""
    t1, t2 = cfg.true_point.lambda1, cfg.true_point.lambda2
    g1 = PosteriorGrid.uniform(t1 - cfg.prior_width_1 / 2.0, t1 + cfg.prior_width_1 / 2.0, cfg.grid_points)
    g2 = PosteriorGrid.uniform(t2 - cfg.prior_width_2 / 2.0, t2 + cfg.prior_width_2 / 2.0, cfg.grid_points)
    return g1, g2


def _clean_probs(probs) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if p.min() < -1e-12 or abs(p.sum() - 1.0) > 1e-8:
        raise UnnormalizedProbs(f"probabilities sum to {p.sum()!r} or dip to {p.min()!r}")
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def sample_outcomes(probs, count: int, rng: np.random.Generator) -> np.ndarray:
    """Multinomial outcome counts; deterministic for a fixed generator state."""
    if count < 0:
        raise ValueError("count must be >= 0")
    p = _clean_probs(probs)
    if count == 0:
        return np.zeros(p.size, dtype=np.int64)
    return rng.multinomial(count, p)


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    m = np.max(a, axis=axis, keepdims=True)
    return np.squeeze(m, axis=axis) + np.log(np.sum(np.exp(a - m), axis=axis))


def _check_floor(loglik: np.ndarray, total_counts: float) -> None:
    if float(loglik.max()) < total_counts * LOG_TRIP - 1.0:
        raise ZeroLikelihood(
            "every grid cell is below the underflow floor; the prior does not cover the data"
        )


def _marginal_from_log(log_table: np.ndarray, counts: np.ndarray, other_weights: np.ndarray) -> np.ndarray:
    joint = np.tensordot(log_table, counts, axes=([2], [0]))
    logw = np.log(np.clip(other_weights, PROB_FLOOR, None))
    loglik = _logsumexp(joint + logw[None, :], axis=1)
    _check_floor(loglik, float(counts.sum()))
    return loglik


def _oriented_table(model: BayesModel, povm: Povm, grid_first: PosteriorGrid,
                    grid_other: PosteriorGrid, first_param: int) -> np.ndarray:
    if first_param == 1:
        return model.prob_table(povm, grid_first.points, grid_other.points)
    return np.transpose(model.prob_table(povm, grid_other.points, grid_first.points), (1, 0, 2))


def marginal_likelihood_1(model: BayesModel, povm1: Povm, counts, grid1: PosteriorGrid,
                          grid2: PosteriorGrid, *, first_param: int = 1,
                          table: np.ndarray | None = None) -> np.ndarray:
    """Log-likelihood over grid1 with grid2 averaged out under its weights.

    grid1 belongs to the first-measured parameter; ``first_param`` names which
    model axis that is (2 when the measurement order is swapped). ``table``
    may carry a precomputed probability table with axes (grid1, grid2, K).
    """
    counts = np.asarray(counts, dtype=float)
    if table is None:
        table = _oriented_table(model, povm1, grid1, grid2, first_param)
    return _marginal_from_log(np.log(np.clip(table, PROB_FLOOR, None)), counts, grid2.weights)


def conditional_likelihood_2(model: BayesModel, povm2: Povm, counts, grid2: PosteriorGrid,
                             lambda1_est: float, *, second_param: int = 2,
                             table: np.ndarray | None = None) -> np.ndarray:
    """Log-likelihood over grid2 at the first parameter fixed to its estimate.

    Under the swapped order ``lambda1_est`` is the lambda2 estimate and
    ``second_param`` is 1. ``table`` may carry precomputed (n, K) line probs.
    """
    counts = np.asarray(counts, dtype=float)
    if table is None:
        if second_param == 2:
            table = model.prob_table(povm2, [lambda1_est], grid2.points)[0]
        else:
            table = model.prob_table(povm2, grid2.points, [lambda1_est])[:, 0]
    loglik = np.tensordot(np.log(np.clip(table, PROB_FLOOR, None)), counts, axes=([1], [0]))
    _check_floor(loglik, float(counts.sum()))
    return loglik


def posterior_update(grid: PosteriorGrid, loglik) -> PosteriorGrid:
    """Bayes rule on the grid: weights *= exp(loglik - max), renormalized."""
    loglik = np.asarray(loglik, dtype=float)
    if loglik.shape != (grid.n,):
        raise DimensionMismatch(f"loglik shape {loglik.shape} vs grid n={grid.n}")
    peak = loglik.max()
    if not np.isfinite(peak):
        raise ZeroLikelihood("no grid cell has finite log-likelihood")
    w = grid.weights * np.exp(loglik - peak)
    total = w.sum()
    if not np.isfinite(total) or total <= 0.0:
        raise ZeroLikelihood("posterior mass vanished after update")
    return PosteriorGrid(grid.lo, grid.hi, grid.n, w / total)


def posterior_mean_var(grid: PosteriorGrid) -> tuple[float, float]:
    pts = grid.points
    mean = float(np.dot(grid.weights, pts))
    var = float(np.dot(grid.weights, pts * pts) - mean * mean)
    return mean, max(var, 0.0)


def marginal_table_for(model: BayesModel, cfg: BayesConfig) -> np.ndarray:
    """Phase-1 probability table for cfg, shareable across seeds."""
    g1, g2 = prior_grids(cfg)
    if cfg.order is Strategy.FIRST1THEN2:
        return _oriented_table(model, model.povm_1, g1, g2, 1)
    return _oriented_table(model, model.povm_2, g2, g1, 2)


def _batches(total: int, size: int):
    done = 0
    while done < total:
        step = min(size, total - done)
        done += step
        yield step


def run_stepwise_bayes(model: BayesModel, cfg: BayesConfig,
                       marginal_table: np.ndarray | None = None) -> BayesTrace:
    """Simulate the two-phase protocol; deterministic for a fixed cfg.seed.

    Each phase draws its whole outcome stream up front and batches consume
    prefixes of it, so batch_size changes the refresh cadence but neither
    the sampled record nor the final posterior. A ZeroLikelihood abort
    returns the partial trace with ``error`` set.
    """
    rng = np.random.default_rng(cfg.seed)
    grid1, grid2 = prior_grids(cfg)
    first_is_1 = cfg.order is Strategy.FIRST1THEN2
    first_param = 1 if first_is_1 else 2
    grid_first, grid_other = (grid1, grid2) if first_is_1 else (grid2, grid1)
    povm_first = model.povm_1 if first_is_1 else model.povm_2
    povm_second = model.povm_2 if first_is_1 else model.povm_1

    q = model.qfim_fn(cfg.true_point)
    mu = je_bound(q)
    mu_tilde, _, _ = optimal_se(q)
    trace = BayesTrace(mu=mu, mu_tilde=mu_tilde)

    if marginal_table is None:
        marginal_table = _oriented_table(model, povm_first, grid_first, grid_other, first_param)
    log_table = np.log(np.clip(marginal_table, PROB_FLOOR, None))
    p_true_first = model.probs_at(povm_first, cfg.true_point)
    p_true_second = model.probs_at(povm_second, cfg.true_point)

    est_other, var_other = posterior_mean_var(grid_other)
    est_first, var_first = posterior_mean_var(grid_first)

    def push(shots: int) -> None:
        if first_is_1:
            e1, v1, e2, v2 = est_first, var_first, est_other, var_other
        else:
            e1, v1, e2, v2 = est_other, var_other, est_first, var_first
        trace.rows.append(BayesRow(shots, e1, e2, v1, v2, shots * (v1 + v2), mu, mu_tilde))

    shots_used = 0
    stream1 = rng.choice(povm_first.n_outcomes, size=cfg.shots_phase1, p=_clean_probs(p_true_first))
    stream2 = rng.choice(povm_second.n_outcomes, size=cfg.shots_phase2, p=_clean_probs(p_true_second))
    counts = np.zeros(povm_first.n_outcomes, dtype=np.int64)
    try:
        done = 0
        for batch in _batches(cfg.shots_phase1, cfg.batch_size):
            counts += np.bincount(stream1[done:done + batch], minlength=povm_first.n_outcomes)
            done += batch
            shots_used += batch
            loglik = _marginal_from_log(log_table, counts.astype(float), grid_other.weights)
            post = posterior_update(grid_first, loglik)
            est_first, var_first = posterior_mean_var(post)
            push(shots_used)

        # phase 2: condition on the frozen phase-1 estimate
        if first_is_1:
            line = model.prob_table(povm_second, [est_first], grid_other.points)[0]
        else:
            line = model.prob_table(povm_second, grid_other.points, [est_first])[:, 0]
        log_line = np.log(np.clip(line, PROB_FLOOR, None))
        counts2 = np.zeros(povm_second.n_outcomes, dtype=np.int64)
        done = 0
        for batch in _batches(cfg.shots_phase2, cfg.batch_size):
            counts2 += np.bincount(stream2[done:done + batch], minlength=povm_second.n_outcomes)
            done += batch
            shots_used += batch
            loglik = np.tensordot(log_line, counts2.astype(float), axes=([1], [0]))
            _check_floor(loglik, float(counts2.sum()))
            post = posterior_update(grid_other, loglik)
            est_other, var_other = posterior_mean_var(post)
            push(shots_used)
    except ZeroLikelihood as exc:
        trace.error = str(exc)
    return trace

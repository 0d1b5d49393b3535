"""Parameter-grid scans and the CSV artifacts behind the CLI commands.

Every scan row carries the QFIM entries, the Uhlmann scalar, and the full
strategy report at one grid point. Rows are evaluated independently (worker
threads share nothing mutable) and written in row-major axis order, so the
output bytes do not depend on the thread count.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bounds import BoundsReport, Region, Strategy, classify_region
from .errors import QstepError
from .fisher import DerivativeBundle, ParamPoint, Qfim, qfim_pure, state_derivatives, uhlmann_delta
from .models import (
    GaussianConfig,
    IsingConfig,
    LzConfig,
    QubitProbeConfig,
    gaussian_qfim,
    ising_state_map,
    lz_state_map,
    qubit_state_map,
)

SCAN_COLUMNS = (
    "axis1", "axis2", "q11", "q12", "q22", "delta", "mu", "mu_prime", "mu_dblprime",
    "mu_tilde", "gamma_opt", "strategy", "region", "ratio", "eq7_value",
    "eq7_satisfied", "singular", "degenerate_flag",
)
SCALING_COLUMNS = ("L", "mu", "mu_tilde", "gamma_opt", "region")

# scannable quantities and their defaults, per model id
MODEL_DEFAULTS = {
    "qubit": {"alpha": math.pi / 4, "beta": 3 * math.pi / 8, "lambda1": 0.5, "lambda2": 0.5},
    "lz": {"lambda0": 2.0, "lambda1": 1.0, "lambda2": 1.0},
    "ising": {"length": 6, "lambda1": 1.0, "lambda2": 0.5},
    "gaussian": {"alpha_re": 1.0, "alpha_im": 0.5, "r": 1.0},
}


@dataclass(frozen=True)
class AxisSpec:
    name: str
    lo: float
    hi: float
    steps: int

    def __post_init__(self):
        if self.steps < 2:
            raise ValueError("axis needs at least 2 steps")
        if not self.lo < self.hi:
            raise ValueError("axis lo must be below hi")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.steps)


@dataclass(frozen=True)
class ScanSpec:
    model: str
    axis1: AxisSpec
    axis2: AxisSpec
    fixed: dict

    def __post_init__(self):
        if self.model not in MODEL_DEFAULTS:
            raise ValueError(f"unknown model {self.model!r}")
        allowed = MODEL_DEFAULTS[self.model]
        for name in (self.axis1.name, self.axis2.name, *self.fixed):
            if name not in allowed:
                raise ValueError(f"model {self.model!r} has no quantity {name!r}")
        if self.axis1.name == self.axis2.name:
            raise ValueError("scan axes must differ")


@dataclass(frozen=True)
class PointResult:
    q11: float
    q12: float
    q22: float
    delta: float
    degenerate: bool
    report: BoundsReport


# state maps are pure; caching lets fixed-config scans reuse cached operators
@lru_cache(maxsize=128)
def _qubit_map(alpha: float, beta: float):
    return qubit_state_map(QubitProbeConfig(alpha, beta))


@lru_cache(maxsize=128)
def _lz_map(lambda0: float):
    return lz_state_map(LzConfig(lambda0))


@lru_cache(maxsize=16)
def _ising_map(length: int):
    return ising_state_map(IsingConfig(length))


def _fd_result(state_map, point: ParamPoint) -> PointResult:
    bundle: DerivativeBundle = state_derivatives(state_map, point)
    q = qfim_pure(bundle)
    delta = uhlmann_delta(bundle)
    return PointResult(q.q11, q.q12, q.q22, delta, bundle.degenerate_flag, classify_region(q))


def evaluate_point(model: str, vals: dict) -> PointResult:
    if model == "qubit":
        state_map = _qubit_map(vals["alpha"], vals["beta"])
        return _fd_result(state_map, ParamPoint(vals["lambda1"], vals["lambda2"]))
    if model == "lz":
        state_map = _lz_map(vals["lambda0"])
        return _fd_result(state_map, ParamPoint(vals["lambda1"], vals["lambda2"]))
    if model == "ising":
        state_map = _ising_map(int(round(vals["length"])))
        return _fd_result(state_map, ParamPoint(vals["lambda1"], vals["lambda2"]))
    if model == "gaussian":
        q = gaussian_qfim(GaussianConfig(vals["alpha_re"], vals["alpha_im"]), vals["r"])
        return PointResult(q.q11, q.q12, q.q22, math.nan, False, classify_region(q))
    raise ValueError(f"unknown model {model!r}")


_FAILED_REPORT = BoundsReport(
    mu=math.nan, mu_prime=math.nan, mu_dblprime=math.nan, mu_tilde=math.nan,
    gamma_opt=math.nan, strategy=Strategy.JOINT, region=Region.III, ratio=math.nan,
    eq7_satisfied=False, eq7_value=math.nan, singular=True,
)


def _evaluate_or_flag(model: str, vals: dict) -> PointResult:
    try:
        return evaluate_point(model, vals)
    except (QstepError, ValueError, FloatingPointError):
        # keep the row so downstream plots show the dark/ill-conditioned cells
        return PointResult(math.nan, math.nan, math.nan, math.nan, True, _FAILED_REPORT)


def fmt_value(v) -> str:
    if isinstance(v, bool) or isinstance(v, np.bool_):
        return "true" if v else "false"
    if isinstance(v, (Strategy, Region)):
        return v.value
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.12g" % float(v)
    return str(v)


def _row(values) -> str:
    return ",".join(fmt_value(v) for v in values)


def _meta(kind: str, payload: dict) -> list[str]:
    echo = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return [f"# qstep {kind} v1", f"# config {echo}"]


def _scan_row(a1: float, a2: float, res: PointResult) -> str:
    r = res.report
    return _row((a1, a2, res.q11, res.q12, res.q22, res.delta, r.mu, r.mu_prime,
                 r.mu_dblprime, r.mu_tilde, r.gamma_opt, r.strategy, r.region,
                 r.ratio, r.eq7_value, r.eq7_satisfied, r.singular, res.degenerate))


def resolve_threads(requested: int | None) -> int:
    if requested is not None:
        n = requested
    else:
        n = int(os.environ.get("WORKER_THREADS", 0) or 0) or (os.cpu_count() or 1)
    if n < 1:
        raise ValueError("thread count must be >= 1")
    return n


def run_scan(spec: ScanSpec, threads: int = 1) -> str:
    """Scan CSV text: metadata comments, header, one row per grid point."""
    base = dict(MODEL_DEFAULTS[spec.model])
    base.update(spec.fixed)
    points = [(a1, a2) for a1 in spec.axis1.values for a2 in spec.axis2.values]

    def one(axes):
        vals = dict(base)
        vals[spec.axis1.name] = axes[0]
        vals[spec.axis2.name] = axes[1]
        return _scan_row(axes[0], axes[1], _evaluate_or_flag(spec.model, vals))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, points))
    else:
        rows = [one(p) for p in points]

    meta = _meta("scan", {
        "model": spec.model,
        "axis1": {"name": spec.axis1.name, "lo": spec.axis1.lo, "hi": spec.axis1.hi, "steps": spec.axis1.steps},
        "axis2": {"name": spec.axis2.name, "lo": spec.axis2.lo, "hi": spec.axis2.hi, "steps": spec.axis2.steps},
        "fixed": spec.fixed,
    })
    return "\n".join(meta + [",".join(SCAN_COLUMNS)] + rows) + "\n"


def _loglog_slope(xs, ys) -> float:
    pairs = [(x, y) for x, y in zip(xs, ys) if math.isfinite(y) and y > 0.0]
    if len(pairs) < 2:
        return math.nan
    lx = np.log([p[0] for p in pairs])
    ly = np.log([p[1] for p in pairs])
    return float(np.polyfit(lx, ly, 1)[0])


def run_scaling(lengths, point: ParamPoint, threads: int = 1) -> str:
    """Chain-length sweep CSV at one parameter point, plus slope comments."""
    lengths = [int(v) for v in lengths]

    def one(length):
        vals = dict(MODEL_DEFAULTS["ising"])
        vals.update(length=length, lambda1=point.lambda1, lambda2=point.lambda2)
        return _evaluate_or_flag("ising", vals)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, lengths))
    else:
        results = [one(length) for length in lengths]

    rows = [_row((length, r.report.mu, r.report.mu_tilde, r.report.gamma_opt, r.report.region))
            for length, r in zip(lengths, results)]
    slope_mu = _loglog_slope(lengths, [r.report.mu for r in results])
    slope_tilde = _loglog_slope(lengths, [r.report.mu_tilde for r in results])
    meta = _meta("scaling", {"lengths": lengths, "lambda1": point.lambda1, "lambda2": point.lambda2})
    tail = f"# slope_mu={fmt_value(slope_mu)} slope_mu_tilde={fmt_value(slope_tilde)}"
    return "\n".join(meta + [",".join(SCALING_COLUMNS)] + rows + [tail]) + "\n"


def point_report(model: str, vals: dict) -> str:
    """key=value dump of the QFIM entries, delta, and the strategy report."""
    base = dict(MODEL_DEFAULTS[model])
    base.update(vals)
    res = evaluate_point(model, base)
    r = res.report
    pairs = [
        ("model", model),
        *sorted(base.items()),
        ("q11", res.q11), ("q12", res.q12), ("q22", res.q22), ("delta", res.delta),
        ("mu", r.mu), ("mu_prime", r.mu_prime), ("mu_dblprime", r.mu_dblprime),
        ("mu_tilde", r.mu_tilde), ("gamma_opt", r.gamma_opt), ("strategy", r.strategy),
        ("region", r.region), ("ratio", r.ratio), ("eq7_value", r.eq7_value),
        ("eq7_satisfied", r.eq7_satisfied), ("singular", r.singular),
        ("degenerate_flag", res.degenerate),
    ]
    return "\n".join(f"{k}={fmt_value(v)}" for k, v in pairs) + "\n"

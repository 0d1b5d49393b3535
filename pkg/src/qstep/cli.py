"""Command-line front end: scan, scaling, bayes, and point subcommands.

Configs are JSON files with nested sections; see README for the schema. The
only environment hooks are WORKER_THREADS (scan pool size) and OUT_DIR
(prefix for relative output paths). Exit code 0 means the artifact was fully
written.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from .bayes import BayesConfig, TRACE_COLUMNS, ising_model, lz_model, qubit_model, run_stepwise_bayes
from .bounds import Strategy
from .errors import QstepError
from .fisher import ParamPoint
from .models import IsingConfig, LzConfig, QubitProbeConfig
from .scan import AxisSpec, ScanSpec, fmt_value, point_report, resolve_threads, run_scaling, run_scan


def _load_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError("config root must be a JSON object")
    return cfg


def _out_path(args, cfg: dict, default_name: str) -> str:
    path = args.out or cfg.get("out") or default_name
    if not os.path.isabs(path):
        path = os.path.join(os.environ.get("OUT_DIR", "."), path)
    return path


def _write(path: str, text: str) -> None:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _model_section(cfg: dict) -> tuple[str, dict]:
    section = dict(cfg.get("model") or {})
    model_id = section.pop("id", None)
    if not model_id:
        raise ValueError("config needs model.id")
    return model_id, section


def _bayes_model(model_id: str, section: dict):
    if model_id == "qubit":
        return qubit_model(QubitProbeConfig(
            alpha=float(section.get("alpha", math.pi / 4)),
            beta=float(section.get("beta", 3 * math.pi / 8)),
        ))
    if model_id == "lz":
        return lz_model(LzConfig(lambda0=float(section.get("lambda0", 2.0))))
    if model_id == "ising":
        return ising_model(IsingConfig(length=int(section.get("length", 6))))
    raise ValueError(f"model {model_id!r} has no sampling measurements")


def cmd_scan(args) -> int:
    cfg = _load_config(args.config)
    model_id, section = _model_section(cfg)
    scan = cfg.get("scan") or {}
    fixed = dict(section)
    fixed.update(scan.get("fixed") or {})
    spec = ScanSpec(
        model=model_id,
        axis1=AxisSpec(**scan["axis1"]),
        axis2=AxisSpec(**scan["axis2"]),
        fixed=fixed,
    )
    text = run_scan(spec, threads=resolve_threads(args.threads))
    path = _out_path(args, cfg, f"{model_id}_scan.csv")
    _write(path, text)
    return 0


def cmd_scaling(args) -> int:
    cfg = _load_config(args.config)
    section = cfg.get("scaling") or {}
    lengths = section.get("lengths") or list(range(4, 11))
    point = ParamPoint(float(section["lambda1"]), float(section["lambda2"]))
    text = run_scaling(lengths, point, threads=resolve_threads(args.threads))
    path = _out_path(args, cfg, "ising_scaling.csv")
    _write(path, text)
    return 0


def _bayes_config(section: dict, model, seed_override: int | None) -> BayesConfig:
    true = section["true"]
    true_point = ParamPoint(float(true[0]), float(true[1]))
    order = section.get("order")
    gamma = section.get("gamma")
    if gamma in (None, "opt") or order is None:
        # fall back to the analytically optimal split at the true point
        from .bounds import optimal_se
        _, gamma_opt, best_order = optimal_se(model.qfim_fn(true_point))
        if gamma in (None, "opt"):
            gamma = gamma_opt
        if order is None:
            order = best_order
    return BayesConfig(
        total_shots=int(section["total_shots"]),
        gamma=float(gamma),
        seed=int(section["seed"] if seed_override is None else seed_override),
        true_point=true_point,
        prior_width_1=float(section["prior_width_1"]),
        prior_width_2=float(section["prior_width_2"]),
        order=Strategy(order),
        grid_points=int(section.get("grid_points", 1000)),
        batch_size=int(section.get("batch_size", 1)),
    )


def cmd_bayes(args) -> int:
    cfg = _load_config(args.config)
    model_id, section = _model_section(cfg)
    model = _bayes_model(model_id, section)
    bayes_cfg = _bayes_config(cfg.get("bayes") or {}, model, args.seed)
    trace = run_stepwise_bayes(model, bayes_cfg)
    lines = [
        "# qstep bayes v1",
        "# model=%s seed=%d total_shots=%d gamma=%s order=%s" % (
            model_id, bayes_cfg.seed, bayes_cfg.total_shots,
            fmt_value(bayes_cfg.gamma), bayes_cfg.order.value),
        "# mu=%s mu_tilde=%s" % (fmt_value(trace.mu), fmt_value(trace.mu_tilde)),
        ",".join(TRACE_COLUMNS),
    ]
    lines += [",".join(fmt_value(v) for v in row) for row in trace.rows]
    if trace.error is not None:
        lines.append(f"# aborted: {trace.error}")
    path = _out_path(args, cfg, f"{model_id}_bayes.csv")
    _write(path, "\n".join(lines) + "\n")
    if trace.error is not None:
        print(f"bayes run aborted: {trace.error}", file=sys.stderr)
        return 1
    return 0


def cmd_point(args) -> int:
    cfg = _load_config(args.config)
    model_id, section = _model_section(cfg)
    point = cfg.get("point") or {}
    vals = dict(section)
    vals.update(point)
    text = point_report(model_id, vals)
    if args.out:
        _write(_out_path(args, cfg, "point.txt"), text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qstep", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, extra in (
        ("scan", cmd_scan, ("threads",)),
        ("scaling", cmd_scaling, ("threads",)),
        ("bayes", cmd_bayes, ("seed",)),
        ("point", cmd_point, ()),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--out", default=None, help="output path (relative paths live under OUT_DIR)")
        if "threads" in extra:
            p.add_argument("--threads", type=int, default=None, help="worker threads (default WORKER_THREADS or CPU count)")
        if "seed" in extra:
            p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (QstepError, ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"qstep {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

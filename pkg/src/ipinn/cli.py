"""Command-line interface: single runs, mode comparisons, and activation sweeps.

Subcommands: run, compare, sweep-activations, print-geometry, dump-batch.
Configuration comes from a JSON file plus dotted --set overrides; every output
embeds the resolved configuration. IPINN_THREADS caps worker processes for
compare/sweep members (default 1: serial execution keeps timing fair).
"""

from __future__ import annotations

import argparse
import json
import os
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from ipinn.config import SWEEP_KINDS, ConfigError, TrainConfig, load_config, resolve_config
from ipinn.geometry import GeometryError, LetterLayout, default_letter_layout
from ipinn.loss import NonFiniteLossError
from ipinn.problems import make_problem
from ipinn.sampling import batch_to_csv, build_batch
from ipinn.training import train


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--problem", choices=["poisson1d", "letters2d", "spheres3d"])
    p.add_argument("--seed", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--output", dest="output_dir", help="output directory")
    p.add_argument("--on-existing", choices=["fail", "version"], dest="on_existing")
    p.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    p.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="dotted config override, e.g. --set counts.interior=500",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ipinn",
        description="Interface PINN solvers with per-subdomain adaptive activation slopes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="train one configuration and write its report")
    _common_flags(p_run)
    p_run.add_argument("--mode", choices=["adai", "ipinn"])
    p_run.add_argument("--activation", help="activation kind (adai mode)")
    p_run.add_argument("--activations", help="comma-separated kinds, one per subdomain (ipinn mode)")

    p_cmp = sub.add_parser("compare", help="run adai and ipinn on identical batches and seeds")
    _common_flags(p_cmp)
    p_cmp.add_argument("--seeds", help="comma-separated seed list (default 0,1,2)")
    p_cmp.add_argument("--activation", help="adai activation kind")
    p_cmp.add_argument("--activations", help="ipinn kinds, comma-separated")

    p_sweep = sub.add_parser("sweep-activations", help="train one adai run per activation kind")
    _common_flags(p_sweep)

    p_geo = sub.add_parser("print-geometry", help="dump the problem geometry as JSON")
    p_geo.add_argument("--problem", default="letters2d", choices=["poisson1d", "letters2d", "spheres3d"])
    p_geo.add_argument("--layout", help="LetterLayout JSON file (letters2d)")

    p_dump = sub.add_parser("dump-batch", help="write the collocation batch as CSV")
    _common_flags(p_dump)
    return parser


def _config_from_args(args, extra: dict | None = None) -> TrainConfig:
    fields = {
        "problem": getattr(args, "problem", None),
        "seed": getattr(args, "seed", None),
        "iterations": getattr(args, "iterations", None),
        "output_dir": getattr(args, "output_dir", None),
        "on_existing": getattr(args, "on_existing", None),
        "mode": getattr(args, "mode", None),
        "activation": getattr(args, "activation", None),
    }
    acts = getattr(args, "activations", None)
    if acts:
        fields["activations"] = [a.strip() for a in acts.split(",")]
    seeds = getattr(args, "seeds", None)
    if seeds:
        fields["seeds"] = [int(s) for s in seeds.split(",")]
    if getattr(args, "no_plots", False):
        fields["plots"] = False
    fields.update(extra or {})
    return load_config(args.config, args.set, fields)


def _default_outdir(cfg: TrainConfig, suffix: str = "") -> str:
    if cfg.output_dir:
        return cfg.output_dir
    tag = f"{cfg.problem}-{cfg.mode}" if not suffix else f"{cfg.problem}-{suffix}"
    return str(Path("runs") / tag)


def _workers(n_jobs: int) -> int:
    cap = int(os.environ.get("IPINN_THREADS", "1"))
    return max(1, min(n_jobs, cap))


def _train_job(raw_cfg: dict):
    cfg = resolve_config(raw_cfg)
    report, params, arch, problem = train(cfg)
    return report


def _run_many(raw_cfgs: list[dict]):
    workers = _workers(len(raw_cfgs))
    if workers == 1:
        return [_train_job(c) for c in raw_cfgs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_train_job, raw_cfgs))


def cmd_run(args) -> int:
    from ipinn import report as rep

    cfg = _config_from_args(args)
    outdir = rep.prepare_output_dir(_default_outdir(cfg), cfg.on_existing)
    report, params, arch, problem = train(cfg)
    rep.write_run_outputs(report, params, arch, problem, outdir, plots=cfg.plots)
    print(f"final RMSE: {report.final_rmse:.6e}")
    print(f"wall time: {report.wall_time_seconds:.2f} s")
    print(f"outputs in {outdir}")
    return 0


def cmd_compare(args) -> int:
    from ipinn import report as rep

    cfg = _config_from_args(args)
    outdir = rep.prepare_output_dir(_default_outdir(cfg, "compare"), cfg.on_existing)
    jobs = []
    for mode in ("adai", "ipinn"):
        for seed in cfg.seeds:
            raw = cfg.as_dict()
            raw.update({"mode": mode, "seed": seed})
            jobs.append(raw)
    reports = _run_many(jobs)
    by_mode: dict[str, list] = {"adai": [], "ipinn": []}
    for raw, report in zip(jobs, reports):
        by_mode[raw["mode"]].append(report)

    rows = []
    adai_walls = {r.config_echo["seed"]: r.wall_time_seconds for r in by_mode["adai"]}
    for mode in ("adai", "ipinn"):
        for r in by_mode[mode]:
            seed = r.config_echo["seed"]
            cost = r.wall_time_seconds / adai_walls[seed]
            rows.append([mode, seed, r.iterations, repr(r.final_rmse), f"{r.wall_time_seconds:.3f}", f"{cost:.3f}"])
    if len(cfg.seeds) > 1:
        med_adai = statistics.median(r.wall_time_seconds for r in by_mode["adai"])
        for mode in ("adai", "ipinn"):
            med_rmse = statistics.median(r.final_rmse for r in by_mode[mode])
            med_wall = statistics.median(r.wall_time_seconds for r in by_mode[mode])
            rows.append([mode, "median", cfg.iterations, repr(med_rmse), f"{med_wall:.3f}", f"{med_wall / med_adai:.3f}"])
    rep._write_csv(
        outdir / "compare.csv",
        rep.config_comment(cfg.as_dict()),
        ["method", "seed", "iterations", "rmse", "wall_time_seconds", "cost"],
        rows,
    )
    if cfg.plots:
        first = {mode: by_mode[mode][0] for mode in by_mode}
        rep.fig_loss_curves(
            {mode: r.loss_history for mode, r in first.items()},
            outdir / "compare_loss.png",
            f"{cfg.problem}: adai vs ipinn (seed {cfg.seeds[0]})",
        )
    for row in rows:
        print(",".join(str(c) for c in row))
    print(f"outputs in {outdir}")
    return 0


def cmd_sweep(args) -> int:
    from ipinn import report as rep

    cfg = _config_from_args(args, extra={"mode": "adai"})
    outdir = rep.prepare_output_dir(_default_outdir(cfg, "sweep"), cfg.on_existing)
    jobs = []
    for kind in SWEEP_KINDS:
        raw = cfg.as_dict()
        raw.update({"mode": "adai", "activation": kind})
        jobs.append(raw)
    reports = _run_many(jobs)
    M = len(reports[0].a_history[0][1])
    t_first = reports[0].wall_time_seconds
    rows = []
    for kind, r in zip(SWEEP_KINDS, reports):
        final_a = r.a_history[-1][1]
        rows.append(
            [kind]
            + [repr(a) for a in final_a]
            + [repr(r.final_rmse), f"{r.wall_time_seconds / t_first:.3f}"]
        )
    rep._write_csv(
        outdir / "sweep.csv",
        rep.config_comment(cfg.as_dict()),
        ["kind"] + [f"a_{m}" for m in range(1, M + 1)] + ["rmse", "cost"],
        rows,
    )
    if cfg.plots:
        rep.fig_loss_curves(
            {kind: r.loss_history for kind, r in zip(SWEEP_KINDS, reports)},
            outdir / "sweep_loss.png",
            f"{cfg.problem}: adaptive activation sweep",
        )
    for row in rows:
        print(",".join(str(c) for c in row))
    print(f"outputs in {outdir}")
    return 0


def cmd_print_geometry(args) -> int:
    if args.problem == "letters2d":
        layout = (
            LetterLayout.from_json(Path(args.layout).read_text())
            if args.layout
            else default_letter_layout()
        )
        payload = {"problem": "letters2d", "layout": layout.to_dict()}
    elif args.problem == "spheres3d":
        problem = make_problem("spheres3d")
        payload = {
            "problem": "spheres3d",
            "spheres": [
                {"center": list(s.center), "radius": s.radius}
                for s in problem.extras["spheres"]
            ],
            "domain": [[-1.0, 1.0]] * 3,
        }
    else:
        payload = {
            "problem": "poisson1d",
            "interfaces": [0.2, 0.4, 0.6, 0.8],
            "domain": [[0.0, 1.0]],
        }
    print(json.dumps(payload, indent=2))
    return 0


def cmd_dump_batch(args) -> int:
    from ipinn.report import config_comment

    cfg = _config_from_args(args)
    layout = None
    if cfg.letter_layout:
        layout = LetterLayout.from_json(Path(cfg.letter_layout).read_text())
    problem = make_problem(cfg.problem, layout) if cfg.problem == "letters2d" else make_problem(cfg.problem)
    batch = build_batch(problem, cfg.sampling_counts(), cfg.seed)
    out = cfg.output_dir or f"{cfg.problem}-batch.csv"
    if Path(out).is_dir():
        out = str(Path(out) / f"{cfg.problem}-batch.csv")
    batch_to_csv(batch, out, header_comment=config_comment(cfg.as_dict()))
    print(f"batch written to {out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "run": cmd_run,
        "compare": cmd_compare,
        "sweep-activations": cmd_sweep,
        "print-geometry": cmd_print_geometry,
        "dump-batch": cmd_dump_batch,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, GeometryError, FileExistsError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (NonFiniteLossError, FloatingPointError, RuntimeError) as e:
        print(f"training error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

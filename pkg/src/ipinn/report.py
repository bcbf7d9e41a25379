"""Run artifacts: delimited outputs plus rendered figures.

Every delimited file embeds the fully resolved configuration (JSON comment
line before the header row), so a run is replayable from its own artifacts.
Figures mirror the delimited data: loss curves, slope trajectories, and the
solution/error fields on the evaluation grid.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from ipinn.network import Architecture, MLPParams, forward_values, params_to_json
from ipinn.problems import ProblemSpec
from ipinn.training import TrainReport, rmse_grid

LOSS_COLUMNS = ("iteration", "mse_eq", "mse_bc_d", "mse_bc_n", "mse_ic_d", "mse_ic_n", "total")


def config_comment(config: dict) -> str:
    return "config=" + json.dumps(config, sort_keys=True)


def prepare_output_dir(path: str, on_existing: str = "fail") -> Path:
    """Create the run directory; refuse or version it when already populated."""
    out = Path(path)
    if out.exists() and any(out.iterdir()):
        if on_existing == "fail":
            raise FileExistsError(
                f"output directory {out} is not empty; pass on_existing=version "
                f"(--on-existing version) to write a versioned sibling"
            )
        base = out
        k = 2
        while out.exists() and any(out.iterdir()):
            out = base.with_name(f"{base.name}-v{k}")
            k += 1
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_csv(path: Path, comment: str, header, rows) -> None:
    with open(path, "w", newline="") as f:
        f.write(f"# {comment}\n")
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)


def write_loss_csv(report: TrainReport, path: Path) -> None:
    rows = [
        [it] + [repr(v) for v in bd.as_dict().values()]
        for it, bd in report.loss_history
    ]
    _write_csv(path, config_comment(report.config_echo), LOSS_COLUMNS, rows)


def write_slopes_csv(report: TrainReport, path: Path) -> None:
    if report.a_history is None:
        return
    M = len(report.a_history[0][1])
    header = ["iteration"] + [f"a_{m}" for m in range(1, M + 1)]
    rows = [[it] + [repr(v) for v in a] for it, a in report.a_history]
    _write_csv(path, config_comment(report.config_echo), header, rows)


def write_run_json(report: TrainReport, path: Path) -> None:
    path.write_text(json.dumps(report.to_dict(), indent=2))


def write_params_json(params: MLPParams, arch: Architecture, config: dict, path: Path) -> None:
    payload = json.loads(params_to_json(params, arch))
    payload["config"] = config
    path.write_text(json.dumps(payload, indent=2))


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------


def fig_loss_curves(histories: dict[str, list], path: Path, title: str) -> None:
    """Semilog total-loss curves; one labeled line per run."""
    fig, ax = plt.subplots(figsize=(6.5, 4.2))
    for label, history in histories.items():
        its = [it for it, _ in history]
        ax.semilogy(its, [bd.total for _, bd in history], label=label, lw=1.4)
    ax.set_xlabel("iteration")
    ax.set_ylabel("total loss")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def fig_loss_components(report: TrainReport, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6.5, 4.2))
    its = [it for it, _ in report.loss_history]
    for name in ("mse_eq", "mse_bc_d", "mse_ic_d", "mse_ic_n", "total"):
        vals = [getattr(bd, name) for _, bd in report.loss_history]
        if max(vals) > 0:
            ax.semilogy(its, vals, label=name, lw=1.1)
    ax.set_xlabel("iteration")
    ax.set_ylabel("loss term")
    ax.set_title(f"{report.problem} {report.mode}: loss components")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def fig_slopes(report: TrainReport, path: Path) -> None:
    if report.a_history is None:
        return
    fig, ax = plt.subplots(figsize=(6.5, 4.2))
    its = [it for it, _ in report.a_history]
    M = len(report.a_history[0][1])
    for m in range(M):
        ax.plot(its, [a[m] for _, a in report.a_history], label=f"$a_{{{m + 1}}}$", lw=1.2)
    ax.set_xlabel("iteration")
    ax.set_ylabel("slope $a_m$")
    ax.set_title(f"{report.problem}: trained activation slopes")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8, ncol=3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _predict_on_grid(params, arch, problem, X):
    ms = problem.membership(X)
    u = np.empty(X.shape[0])
    exact = np.empty(X.shape[0])
    for m in range(1, problem.M + 1):
        rows = np.flatnonzero(ms == m)
        if rows.size == 0:
            continue
        scales = np.full(rows.size, arch.scale_of(params, m))
        blocks = [(arch.kind_of(m), 0, rows.size)]
        u[rows] = forward_values(params, arch, X[rows], scales, blocks)
        exact[rows] = problem.pieces[m - 1].value(X[rows])
    return u, exact


def fig_solution(params: MLPParams, arch: Architecture, problem: ProblemSpec, path: Path) -> None:
    """Prediction vs exact solution (1D curves, 2D/3D-slice contours with error)."""
    if problem.dim == 1:
        X = rmse_grid(problem)
        u, exact = _predict_on_grid(params, arch, problem, X)
        fig, ax = plt.subplots(figsize=(6.5, 4.2))
        ax.plot(X[:, 0], exact, "-", color="tab:blue", lw=1.6, label="exact")
        ax.plot(X[::20, 0], u[::20], "o", color="tab:red", ms=3.5, label="network")
        for spec in problem.interfaces:
            ax.axvline(spec.sampler(1, 0)[0, 0], color="gray", ls=":", lw=0.8)
        ax.set_xlabel("x")
        ax.set_ylabel("u")
        ax.legend()
        ax.grid(True, alpha=0.3)
    elif problem.dim == 2:
        X = rmse_grid(problem)
        u, exact = _predict_on_grid(params, arch, problem, X)
        shape = (171, 101)
        xs = X[:, 0].reshape(shape)
        ys = X[:, 1].reshape(shape)
        fig, axes = plt.subplots(1, 3, figsize=(14, 3.4))
        for ax, field, label in (
            (axes[0], exact, "exact"),
            (axes[1], u, "network"),
            (axes[2], np.abs(u - exact), "|error|"),
        ):
            im = ax.contourf(xs, ys, field.reshape(shape), levels=30, cmap="viridis")
            fig.colorbar(im, ax=ax, shrink=0.85)
            ax.set_title(label)
            ax.set_aspect("equal")
    else:
        # clip at z = -0.5, through the lower sphere layer
        n = 101
        lo, hi = problem.bounds
        xs, ys = np.meshgrid(np.linspace(lo[0], hi[0], n), np.linspace(lo[1], hi[1], n), indexing="ij")
        X = np.stack([xs.ravel(), ys.ravel(), np.full(n * n, -0.5)], axis=1)
        u, exact = _predict_on_grid(params, arch, problem, X)
        fig, axes = plt.subplots(1, 3, figsize=(14, 4))
        for ax, field, label in (
            (axes[0], exact, "exact (z=-0.5)"),
            (axes[1], u, "network (z=-0.5)"),
            (axes[2], np.abs(u - exact), "|error|"),
        ):
            im = ax.contourf(xs, ys, field.reshape(n, n), levels=30, cmap="viridis")
            fig.colorbar(im, ax=ax, shrink=0.85)
            ax.set_title(label)
            ax.set_aspect("equal")
    fig.suptitle(f"{problem.name}: solution field", y=1.0)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_run_outputs(
    report: TrainReport,
    params: MLPParams,
    arch: Architecture,
    problem: ProblemSpec,
    outdir: Path,
    plots: bool = True,
) -> None:
    write_run_json(report, outdir / "run.json")
    write_loss_csv(report, outdir / "loss.csv")
    write_slopes_csv(report, outdir / "slopes.csv")
    write_params_json(params, arch, report.config_echo, outdir / "params.json")
    if plots:
        fig_loss_components(report, outdir / "loss_curves.png")
        fig_slopes(report, outdir / "slopes.png")
        fig_solution(params, arch, problem, outdir / "solution.png")

"""Full-batch Adam training loop, RMSE metric, and run reporting."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ipinn.config import TrainConfig
from ipinn.engine import GradEngine
from ipinn.geometry import LetterLayout
from ipinn.loss import LossBreakdown, LossWeights, build_plan
from ipinn.network import Architecture, MLPParams, forward_values, init_xavier
from ipinn.problems import ProblemSpec, make_problem
from ipinn.sampling import build_batch


@dataclass
class AdamState:
    size: int
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: np.ndarray = field(init=False)
    v: np.ndarray = field(init=False)

    def __post_init__(self):
        self.m = np.zeros(self.size)
        self.v = np.zeros(self.size)


def adam_step(state: AdamState, flat: np.ndarray, grads: np.ndarray) -> np.ndarray:
    """One bias-corrected Adam update; mutates state, returns the new parameter vector."""
    if grads.shape != flat.shape or flat.shape != state.m.shape:
        raise ValueError(f"shape mismatch: params {flat.shape}, grads {grads.shape}, state {state.m.shape}")
    if not np.all(np.isfinite(grads)):
        bad = int(np.flatnonzero(~np.isfinite(grads))[0])
        raise FloatingPointError(f"non-finite gradient in slot {bad} at step {state.step + 1}")
    state.step += 1
    state.m *= state.beta1
    state.m += (1.0 - state.beta1) * grads
    state.v *= state.beta2
    state.v += (1.0 - state.beta2) * grads * grads
    m_hat = state.m / (1.0 - state.beta1**state.step)
    v_hat = state.v / (1.0 - state.beta2**state.step)
    return flat - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


@dataclass
class TrainReport:
    problem: str
    mode: str
    iterations: int
    loss_history: list[tuple[int, LossBreakdown]]
    a_history: list[tuple[int, list[float]]] | None  # adai mode only
    final_rmse: float
    wall_time_seconds: float
    config_echo: dict

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "mode": self.mode,
            "iterations": self.iterations,
            "final_rmse": self.final_rmse,
            "wall_time_seconds": self.wall_time_seconds,
            "loss_history": [
                {"iteration": it, **bd.as_dict()} for it, bd in self.loss_history
            ],
            "a_history": (
                [{"iteration": it, "a": a} for it, a in self.a_history]
                if self.a_history is not None
                else None
            ),
            "config": self.config_echo,
        }


RMSE_GRIDS = {1: (1001,), 2: (171, 101), 3: (41, 41, 41)}


def rmse_grid(problem: ProblemSpec, shape: tuple[int, ...] | None = None) -> np.ndarray:
    shape = shape or RMSE_GRIDS[problem.dim]
    lo, hi = problem.bounds
    axes = [np.linspace(lo[i], hi[i], shape[i]) for i in range(problem.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def evaluate_rmse(
    params: MLPParams,
    arch: Architecture,
    problem: ProblemSpec,
    grid: np.ndarray | None = None,
) -> float:
    """Root-mean-square error against the exact solution on the evaluation grid.

    Each point is evaluated with the network of its containing subdomain.
    """
    X = rmse_grid(problem) if grid is None else grid
    ms = problem.membership(X)
    sq_sum = 0.0
    for m in range(1, problem.M + 1):
        rows = np.flatnonzero(ms == m)
        if rows.size == 0:
            continue
        pts = X[rows]
        scales = np.full(rows.size, arch.scale_of(params, m))
        blocks = [(arch.kind_of(m), 0, rows.size)]
        u = forward_values(params, arch, pts, scales, blocks)
        err = u - problem.pieces[m - 1].value(pts)
        sq_sum += math.fsum(err * err)
    return math.sqrt(sq_sum / X.shape[0])


def cost_ratio(t_method: float, t_adai: float) -> float:
    """Training-time ratio relative to the adaptive-slope run."""
    if t_method <= 0 or t_adai <= 0:
        raise ValueError(f"training times must be positive, got {t_method} and {t_adai}")
    return t_method / t_adai


def train(
    cfg: TrainConfig,
    init_params: MLPParams | None = None,
    layout: LetterLayout | None = None,
) -> tuple[TrainReport, MLPParams, Architecture, ProblemSpec]:
    """Run the full-batch training protocol described by cfg.

    The collocation batch is built once; every iteration evaluates the full
    loss and its exact gradient, then applies one Adam update. The loss
    breakdown (and slopes, in adai mode) is logged every log_interval
    iterations plus once at the final iterate.
    """
    if layout is None and cfg.letter_layout:
        layout = LetterLayout.from_json(open(cfg.letter_layout).read())
    problem = make_problem(cfg.problem, layout) if cfg.problem == "letters2d" else make_problem(cfg.problem)
    arch = cfg.architecture()
    weights = LossWeights(cfg.alpha_bc_d, cfg.alpha_bc_n, cfg.alpha_int)

    t0 = time.perf_counter()
    batch = build_batch(problem, cfg.sampling_counts(), cfg.seed)
    plan = build_plan(problem, batch)
    engine = GradEngine(plan, arch)
    params = init_params.copy() if init_params is not None else init_xavier(arch, cfg.seed)

    flat = params.to_flat(arch)
    state = AdamState(size=flat.size, lr=cfg.lr)
    loss_history: list[tuple[int, LossBreakdown]] = []
    a_history: list[tuple[int, list[float]]] | None = [] if arch.slopes_trainable() else None

    def log(it: int, bd: LossBreakdown) -> None:
        loss_history.append((it, bd))
        if a_history is not None:
            a_history.append((it, [float(a) for a in params.slopes]))

    for it in range(cfg.iterations):
        breakdown, grads = engine.loss_and_grad(params, weights)
        if it % cfg.log_interval == 0:
            log(it, breakdown)
        state.lr = cfg.lr_at(it)
        flat = adam_step(state, flat, grads)
        params.set_flat(arch, flat)
    breakdown, _ = engine.loss_and_grad(params, weights)
    log(cfg.iterations, breakdown)
    wall = time.perf_counter() - t0

    report = TrainReport(
        problem=cfg.problem,
        mode=cfg.mode,
        iterations=cfg.iterations,
        loss_history=loss_history,
        a_history=a_history,
        final_rmse=evaluate_rmse(params, arch, problem),
        wall_time_seconds=wall,
        config_echo=cfg.as_dict(),
    )
    return report, params, arch, problem

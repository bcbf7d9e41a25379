import math

import numpy as np
import pytest

from ipinn.activations import ActivationKind
from ipinn.config import resolve_config
from ipinn.loss import LossWeights, evaluate_loss, network_field
from ipinn.network import Architecture, init_xavier
from ipinn.problems import problem_1d
from ipinn.sampling import build_batch
from ipinn.training import AdamState, adam_step, cost_ratio, evaluate_rmse, train


def cfg_1d(**over):
    raw = {"problem": "poisson1d", "iterations": 200, "seed": 0}
    raw.update(over)
    return resolve_config(raw)


def test_adam_first_step_closed_form():
    state = AdamState(size=1, lr=5e-3)
    flat = np.array([1.0])
    new = adam_step(state, flat, np.array([1.0]))
    # m_hat = g, v_hat = g^2 -> delta = -lr * g / (|g| + eps)
    assert new[0] == pytest.approx(1.0 - 5e-3 / (1.0 + 1e-8), rel=1e-12)
    assert state.step == 1


def test_adam_zero_gradient_keeps_params():
    # from a fresh state a zero gradient is a no-op; accumulated moments decay
    state = AdamState(size=3, lr=1e-2)
    flat = np.array([1.0, -2.0, 0.3])
    new = adam_step(state, flat, np.zeros(3))
    assert (new == flat).all()
    state.m[:] = 0.5
    state.v[:] = 0.25
    adam_step(state, flat, np.zeros(3))
    assert (state.m == 0.5 * 0.9).all()
    assert (state.v == 0.25 * 0.999).all()


def test_adam_rejects_nonfinite_gradient():
    state = AdamState(size=2, lr=1e-2)
    with pytest.raises(FloatingPointError, match="slot 1"):
        adam_step(state, np.zeros(2), np.array([0.0, np.nan]))


def test_adam_shape_mismatch():
    state = AdamState(size=2, lr=1e-2)
    with pytest.raises(ValueError):
        adam_step(state, np.zeros(3), np.zeros(3))


def test_cost_ratio():
    assert cost_ratio(194.0, 100.0) == pytest.approx(1.94)
    assert cost_ratio(7.0, 7.0) == 1.0
    assert cost_ratio(65.0, 100.0) == pytest.approx(0.65)
    with pytest.raises(ValueError):
        cost_ratio(0.0, 1.0)


def test_zero_iterations_reports_initial_state():
    cfg = cfg_1d(iterations=0)
    report, params, arch, problem = train(cfg)
    assert len(report.loss_history) == 1
    assert report.loss_history[0][0] == 0
    init = init_xavier(arch, cfg.seed)
    assert report.final_rmse == evaluate_rmse(init, arch, problem)
    assert report.wall_time_seconds > 0


def test_initial_loss_matches_field_route():
    # no hidden warm-up step: the iteration-0 log is the fresh network's loss
    # (tolerance covers 1-ulp GEMM differences between batched and per-block paths)
    cfg = cfg_1d(iterations=0)
    report, params, arch, problem = train(cfg)
    batch = build_batch(problem, cfg.sampling_counts(), cfg.seed)
    weights = LossWeights(cfg.alpha_bc_d, cfg.alpha_bc_n, cfg.alpha_int)
    bd = evaluate_loss(network_field(params, arch), problem, batch, weights)
    logged = report.loss_history[0][1]
    for name, value in bd.as_dict().items():
        assert getattr(logged, name) == pytest.approx(value, rel=1e-12, abs=1e-28), name


def test_loss_drops_tenfold_in_200_iterations():
    report, *_ = train(cfg_1d(iterations=200))
    h = dict(report.loss_history)
    assert h[200].total < h[0].total / 10.0


def test_training_determinism_bitwise():
    r1, p1, *_ = train(cfg_1d(iterations=150))
    r2, p2, *_ = train(cfg_1d(iterations=150))
    assert [(it, bd) for it, bd in r1.loss_history] == [(it, bd) for it, bd in r2.loss_history]
    assert r1.final_rmse == r2.final_rmse
    for w1, w2 in zip(p1.weights, p2.weights):
        assert (w1 == w2).all()
    assert (p1.slopes == p2.slopes).all()


def test_zero_lr_keeps_loss_constant():
    cfg = cfg_1d(iterations=50, lr=1e-300)  # effectively frozen
    report, *_ = train(cfg)
    totals = {bd.total for _, bd in report.loss_history}
    assert max(totals) - min(totals) < 1e-9 * max(totals)


def test_slope_history_only_in_adai_mode():
    r_adai, *_ = train(cfg_1d(iterations=20, log_interval=10))
    assert r_adai.a_history is not None
    assert [it for it, _ in r_adai.a_history] == [0, 10, 20]
    assert all(np.isfinite(a).all() for _, a in r_adai.a_history)
    r_ipinn, p_ipinn, arch_i, _ = train(cfg_1d(iterations=20, log_interval=10, mode="ipinn"))
    assert r_ipinn.a_history is None
    assert (p_ipinn.slopes == 1.0).all()


def test_ipinn_mode_trains_theta_only():
    report, params, arch, _ = train(cfg_1d(iterations=100, mode="ipinn"))
    h = dict(report.loss_history)
    assert h[100].total < h[0].total
    assert (params.slopes == 1.0).all()


def test_rmse_analytic_injection_and_zero_network(prob1d):
    # exact evaluator -> RMSE ~ 0; zero network -> RMS of the exact solution
    arch = Architecture(1, (4,), 5, mode="adai", activation=ActivationKind.TANH)
    params = init_xavier(arch, 0)
    for w in params.weights:
        w[:] = 0.0

    X = np.linspace(0, 1, 1001)[:, None]
    ms = prob1d.membership(X)
    exact = np.concatenate(
        [prob1d.analytical(m, X[ms == m]) for m in range(1, 6)]
    )
    rms_exact = math.sqrt(float(np.mean(exact**2)))
    assert evaluate_rmse(params, arch, prob1d) == pytest.approx(rms_exact, rel=1e-12)


def test_rmse_order_invariant(prob1d):
    arch = Architecture(1, (5,), 5, mode="adai", activation=ActivationKind.TANH)
    params = init_xavier(arch, 1)
    grid = np.linspace(0, 1, 501)[:, None]
    rng = np.random.default_rng(0)
    shuffled = grid[rng.permutation(grid.shape[0])]
    assert evaluate_rmse(params, arch, prob1d, grid) == evaluate_rmse(params, arch, prob1d, shuffled)


def test_lr_schedules_change_trajectory():
    r_const, *_ = train(cfg_1d(iterations=100, lr_schedule="constant"))
    r_decay, *_ = train(cfg_1d(iterations=100, lr_schedule="exponential", lr_decay=1e-2))
    r_cos, *_ = train(cfg_1d(iterations=100, lr_schedule="cosine"))
    totals = {dict(r.loss_history)[100].total for r in (r_const, r_decay, r_cos)}
    assert len(totals) == 3


def test_lr_at_schedule_shapes():
    cfg = cfg_1d(iterations=60000, lr_schedule="step")
    assert cfg.lr_at(0) == 5e-3
    assert cfg.lr_at(20000) == pytest.approx(5e-4)
    assert cfg.lr_at(59999) == pytest.approx(5e-5)
    cfg = cfg_1d(iterations=60000, lr_schedule="cosine", lr_min=1e-5)
    assert cfg.lr_at(0) == 5e-3
    assert cfg.lr_at(30000) == pytest.approx(2.5e-3)
    assert cfg.lr_at(60000) == 1e-5
    cfg = cfg_1d(iterations=100, lr_schedule="exponential", lr_decay=math.log(10) / 100)
    assert cfg.lr_at(100) == pytest.approx(5e-4)

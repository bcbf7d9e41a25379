"""Shared finite-difference oracles and fixtures."""

import numpy as np
import pytest

from ipinn.problems import problem_1d, problem_2d_letters, problem_3d_spheres


def central_diff(fn, x, h):
    """Central first/second differences of a scalar map at x."""
    f_p, f_m = fn(x + h), fn(x - h)
    f0 = fn(x)
    d1 = (f_p - f_m) / (2.0 * h)
    d2 = (f_p - 2.0 * f0 + f_m) / (h * h)
    return f0, d1, d2


def central_diff4(fn, x, h):
    """Fourth-order central first/second differences of a scalar map at x."""
    f1p, f1m = fn(x + h), fn(x - h)
    f2p, f2m = fn(x + 2 * h), fn(x - 2 * h)
    f0 = fn(x)
    d1 = (8.0 * (f1p - f1m) - (f2p - f2m)) / (12.0 * h)
    d2 = (16.0 * (f1p + f1m) - (f2p + f2m) - 30.0 * f0) / (12.0 * h * h)
    return f0, d1, d2


def rel_err(got, want, floor=1e-12):
    got, want = np.asarray(got, dtype=float), np.asarray(want, dtype=float)
    return np.abs(got - want) / np.maximum(np.abs(want), floor)


def grad_rel_err(got, want):
    """Per-slot relative error with a floor tied to the gradient's own scale,
    so near-zero slots are judged against the dominant components."""
    got, want = np.asarray(got, dtype=float), np.asarray(want, dtype=float)
    floor = max(1e-12, 1e-6 * float(np.abs(want).max()))
    return np.abs(got - want) / np.maximum(np.abs(want), floor)


def fd_total_gradient(eval_total, flat0, h_scale=1e-4):
    """Fourth-order central differences of a scalar loss in every parameter."""
    grad = np.empty_like(flat0)
    for k in range(flat0.size):
        h = h_scale * max(1.0, abs(flat0[k]))
        vals = []
        for step in (h, -h, 2 * h, -2 * h):
            flat = flat0.copy()
            flat[k] += step
            vals.append(eval_total(flat))
        f1p, f1m, f2p, f2m = vals
        grad[k] = (8.0 * (f1p - f1m) - (f2p - f2m)) / (12.0 * h)
    return grad


@pytest.fixture(scope="session")
def prob1d():
    return problem_1d()


@pytest.fixture(scope="session")
def prob2d():
    return problem_2d_letters()


@pytest.fixture(scope="session")
def prob3d():
    return problem_3d_spheres()

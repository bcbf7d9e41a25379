import numpy as np
import pytest

from ipinn.activations import ActivationKind, act_eval2, act_eval3, parse_kind
from conftest import central_diff, rel_err

ALL_KINDS = list(ActivationKind)


def test_known_values_at_zero():
    f, d1, d2 = act_eval2(ActivationKind.TANH, 0.0)
    assert (f, d1, d2) == (0.0, 1.0, 0.0)
    f, d1, d2 = act_eval2(ActivationKind.SIGMOID, 0.0)
    assert (f, d1, d2) == (0.5, 0.25, 0.0)
    # swish' = s(z) + z s'(z), swish'' = 2 s'(z) + z s''(z)
    f, d1, d2 = act_eval2(ActivationKind.SWISH, 0.0)
    assert (f, d1, d2) == (0.0, 0.5, 0.5)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_derivatives_match_central_differences(kind):
    # sigma' is differenced from values; sigma'' from the verified sigma'
    # (a value-based second difference at h=1e-5 has a ~1e-6 roundoff floor).
    rng = np.random.Generator(np.random.PCG64(7))
    z = rng.uniform(-20.0, 20.0, size=1000)
    h = 1e-5
    f, d1, d2 = act_eval2(kind, z)
    fd1 = (act_eval2(kind, z + h)[0] - act_eval2(kind, z - h)[0]) / (2 * h)
    fd2 = (act_eval2(kind, z + h)[1] - act_eval2(kind, z - h)[1]) / (2 * h)
    ok1 = (rel_err(d1, fd1) < 1e-6) | (np.abs(d1 - fd1) < 1e-9)
    ok2 = (rel_err(d2, fd2) < 1e-6) | (np.abs(d2 - fd2) < 1e-9)
    assert ok1.all(), f"{kind}: worst d1 rel err {rel_err(d1, fd1).max()}"
    assert ok2.all(), f"{kind}: worst d2 rel err {rel_err(d2, fd2).max()}"


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_third_derivative_matches_differences_of_second(kind):
    rng = np.random.Generator(np.random.PCG64(11))
    z = rng.uniform(-8.0, 8.0, size=500)
    h = 1e-5
    _, _, _, d3 = act_eval3(kind, z)
    d2p = act_eval2(kind, z + h)[2]
    d2m = act_eval2(kind, z - h)[2]
    fd3 = (d2p - d2m) / (2 * h)
    assert ((rel_err(d3, fd3) < 1e-5) | (np.abs(d3 - fd3) < 1e-8)).all()


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_finite_over_wide_range(kind):
    z = np.linspace(-700.0, 700.0, 4001)
    for out in act_eval3(kind, z):
        assert np.isfinite(out).all(), f"{kind} produced non-finite values"


def test_bounded_ranges():
    # strict bounds hold until float64 saturation (|z| ~ 19 for tanh, ~37 up /
    # ~745 down for sigmoid); test the non-saturating window plus the far tail
    z = np.linspace(-18.0, 18.0, 5001)
    t = act_eval2(ActivationKind.TANH, z)[0]
    s = act_eval2(ActivationKind.SIGMOID, z)[0]
    assert (t > -1).all() and (t < 1).all()
    assert (s > 0).all() and (s < 1).all()
    assert act_eval2(ActivationKind.SIGMOID, -700.0)[0] > 0.0


def test_parse_kind_roundtrip_and_error():
    for kind in ALL_KINDS:
        assert parse_kind(kind.value) is kind
    with pytest.raises(ValueError, match="valid kinds"):
        parse_kind("relu")

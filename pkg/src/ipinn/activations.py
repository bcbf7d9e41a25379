"""Activation catalog with exact derivatives.

Every kind is C^2 on all of R (the equation residual contains second
derivatives of the network output, so kinked activations are excluded).
The catalog also exposes third derivatives: the reverse pass that
differentiates a second-order jet forward needs them.
"""

from __future__ import annotations

import enum
import math

import numpy as np
from scipy.special import erf

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)


class ActivationKind(str, enum.Enum):
    """Supported activations. Values are the names used in configs and CSV headers."""

    TANH = "tanh"
    SIGMOID = "sigmoid"
    SWISH = "swish"
    SOFTPLUS = "softplus"
    GELU = "gelu"
    MISH = "mish"

    def __str__(self) -> str:  # so f"{kind}" prints the wire name
        return self.value


def parse_kind(name: str) -> ActivationKind:
    """Parse a kind name; raises ValueError listing valid names."""
    try:
        return ActivationKind(name.strip().lower())
    except ValueError:
        valid = ", ".join(k.value for k in ActivationKind)
        raise ValueError(f"unknown activation {name!r}; valid kinds: {valid}") from None


def _sigmoid(z):
    # exponentiate only negative magnitudes: overflow-free, tails stay strict
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def _softplus(z):
    return np.logaddexp(0.0, z)


def _tanh3(z):
    t = np.tanh(z)
    d1 = 1.0 - t * t
    d2 = -2.0 * t * d1
    d3 = d1 * (6.0 * t * t - 2.0)
    return t, d1, d2, d3


def _sigmoid3(z):
    s = _sigmoid(z)
    d1 = s * (1.0 - s)
    d2 = d1 * (1.0 - 2.0 * s)
    d3 = d1 * (1.0 - 6.0 * s + 6.0 * s * s)
    return s, d1, d2, d3


def _swish3(z):
    s, s1, s2, s3 = _sigmoid3(z)
    f = z * s
    d1 = s + z * s1
    d2 = 2.0 * s1 + z * s2
    d3 = 3.0 * s2 + z * s3
    return f, d1, d2, d3


def _softplus3(z):
    s, s1, s2, _ = _sigmoid3(z)
    return _softplus(z), s, s1, s2


def _gelu3(z):
    # exact erf formulation: f = z * Phi(z)
    phi = np.exp(-0.5 * z * z) * _INV_SQRT2PI
    big_phi = 0.5 * (1.0 + erf(z * _INV_SQRT2))
    f = z * big_phi
    d1 = big_phi + z * phi
    d2 = (2.0 - z * z) * phi
    d3 = z * (z * z - 4.0) * phi
    return f, d1, d2, d3


def _mish3(z):
    # f = z * tanh(softplus(z)); chain through sp' = sigmoid(z)
    sp = _softplus(z)
    s, s1, s2, _ = _sigmoid3(z)
    t = np.tanh(sp)
    u = 1.0 - t * t
    t1 = u * s
    t2 = -2.0 * t * t1 * s + u * s1
    t3 = -2.0 * (t1 * t1 * s + t * t2 * s) - 4.0 * t * t1 * s1 + u * s2
    f = z * t
    d1 = t + z * t1
    d2 = 2.0 * t1 + z * t2
    d3 = 3.0 * t2 + z * t3
    return f, d1, d2, d3


_EVAL3 = {
    ActivationKind.TANH: _tanh3,
    ActivationKind.SIGMOID: _sigmoid3,
    ActivationKind.SWISH: _swish3,
    ActivationKind.SOFTPLUS: _softplus3,
    ActivationKind.GELU: _gelu3,
    ActivationKind.MISH: _mish3,
}


def act_eval3(kind: ActivationKind, z):
    """Return (sigma, sigma', sigma'', sigma''') at z (scalar or ndarray)."""
    return _EVAL3[kind](np.asarray(z, dtype=np.float64))


def act_eval2(kind: ActivationKind, z):
    """Return (sigma, sigma', sigma'') at z (scalar or ndarray)."""
    f, d1, d2, _ = act_eval3(kind, z)
    return f, d1, d2

"""Second-order jets: (value, first, second directional derivative).

A jet tracks a scalar together with its first and second derivative along one
fixed input direction. Propagating seeded jets through the network layers
yields exact gradients and Laplacians of the output with respect to the input,
one pass per coordinate direction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ipinn.activations import ActivationKind, act_eval2


@dataclass(frozen=True)
class Jet2:
    val: float
    d1: float
    d2: float

    @staticmethod
    def constant(c: float) -> "Jet2":
        return Jet2(float(c), 0.0, 0.0)

    @staticmethod
    def seed(x: float) -> "Jet2":
        """Seed for the coordinate being differentiated: d1 = 1, d2 = 0."""
        return Jet2(float(x), 1.0, 0.0)


def jet_affine(weights, bias, in_jets: Sequence[Jet2]) -> list[Jet2]:
    """Affine map on jets. Curvature-free: d1/d2 get the same linear combination."""
    w = np.asarray(weights, dtype=np.float64)
    b = np.asarray(bias, dtype=np.float64)
    if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0]:
        raise ValueError(f"weights {w.shape} and bias {b.shape} do not agree")
    if w.shape[1] != len(in_jets):
        raise ValueError(f"weights expect {w.shape[1]} inputs, got {len(in_jets)} jets")
    vals = np.array([j.val for j in in_jets])
    d1s = np.array([j.d1 for j in in_jets])
    d2s = np.array([j.d2 for j in in_jets])
    out_val = w @ vals + b
    out_d1 = w @ d1s
    out_d2 = w @ d2s
    return [Jet2(float(v), float(g), float(h)) for v, g, h in zip(out_val, out_d1, out_d2)]


def jet_activation(kind: ActivationKind, scale: float, jet: Jet2) -> Jet2:
    """Apply sigma(scale * .) to a jet by the univariate chain rule to second order."""
    s = float(scale)
    f, f1, f2 = act_eval2(kind, s * jet.val)
    val = float(f)
    d1 = s * float(f1) * jet.d1
    d2 = s * s * float(f2) * jet.d1 * jet.d1 + s * float(f1) * jet.d2
    return Jet2(val, d1, d2)

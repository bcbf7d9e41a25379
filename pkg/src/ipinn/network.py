"""Shared-parameter multi-subdomain MLP.

One set of weights and biases serves every subdomain; only the hidden
activation differs across subdomains. In "adai" mode all subdomains use the
same activation kind but each subdomain m owns a trainable slope a_m, applied
as sigma(n * a_m * (w.x + b)). In "ipinn" mode each subdomain has a fixed
activation kind and the slope machinery is disabled (effective scale 1).
The output layer is affine.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ipinn.activations import ActivationKind, act_eval3, parse_kind

MODE_ADAI = "adai"
MODE_IPINN = "ipinn"


@dataclass(frozen=True)
class Architecture:
    input_dim: int
    hidden_sizes: tuple[int, ...]
    num_subdomains: int
    mode: str = MODE_ADAI
    activation: ActivationKind | None = ActivationKind.TANH
    activations: tuple[ActivationKind, ...] | None = None
    scale_n: float = 10.0

    def __post_init__(self):
        if self.input_dim not in (1, 2, 3):
            raise ValueError(f"input_dim must be 1, 2 or 3, got {self.input_dim}")
        if not self.hidden_sizes or any(h < 1 for h in self.hidden_sizes):
            raise ValueError(f"hidden_sizes must be nonempty positives, got {self.hidden_sizes}")
        if self.num_subdomains < 2:
            raise ValueError("need at least two subdomains")
        if self.mode == MODE_ADAI:
            if self.activation is None:
                raise ValueError("adai mode requires a single activation kind")
        elif self.mode == MODE_IPINN:
            if self.activations is None or len(self.activations) != self.num_subdomains:
                raise ValueError(
                    f"ipinn mode requires one activation per subdomain "
                    f"({self.num_subdomains}), got {self.activations}"
                )
        else:
            raise ValueError(f"mode must be {MODE_ADAI!r} or {MODE_IPINN!r}, got {self.mode!r}")

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.input_dim, *self.hidden_sizes, 1)

    def kind_of(self, m: int) -> ActivationKind:
        """Activation kind for 1-based subdomain index m."""
        if self.mode == MODE_ADAI:
            return self.activation
        return self.activations[m - 1]

    def scale_of(self, params: "MLPParams", m: int) -> float:
        """Effective pre-activation scale for subdomain m."""
        if self.mode == MODE_ADAI:
            return self.scale_n * float(params.slopes[m - 1])
        return 1.0

    def slopes_trainable(self) -> bool:
        return self.mode == MODE_ADAI


@dataclass
class MLPParams:
    weights: list[np.ndarray]  # each (out, in)
    biases: list[np.ndarray]  # each (out,)
    slopes: np.ndarray  # (M,)

    def theta_size(self) -> int:
        return sum(w.size for w in self.weights) + sum(b.size for b in self.biases)

    def trainable_size(self, arch: Architecture) -> int:
        n = self.theta_size()
        if arch.slopes_trainable():
            n += self.slopes.size
        return n

    def copy(self) -> "MLPParams":
        return MLPParams(
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.slopes.copy(),
        )

    def to_flat(self, arch: Architecture) -> np.ndarray:
        """Pack trainable parameters into one vector: W1, b1, ..., WL, bL[, a]."""
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts.append(w.ravel())
            parts.append(b)
        if arch.slopes_trainable():
            parts.append(self.slopes)
        return np.concatenate(parts)

    def set_flat(self, arch: Architecture, flat: np.ndarray) -> None:
        """Unpack a vector produced by to_flat back into this parameter set."""
        if flat.shape != (self.trainable_size(arch),):
            raise ValueError(f"flat vector has shape {flat.shape}, expected ({self.trainable_size(arch)},)")
        k = 0
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            self.weights[i] = flat[k : k + w.size].reshape(w.shape).copy()
            k += w.size
            self.biases[i] = flat[k : k + b.size].copy()
            k += b.size
        if arch.slopes_trainable():
            self.slopes = flat[k:].copy()


def init_xavier(arch: Architecture, seed: int) -> MLPParams:
    """Xavier-uniform weights, zero biases, slopes at 0.5 (1.0 when not trainable)."""
    rng = np.random.Generator(np.random.PCG64(seed))
    sizes = arch.layer_sizes
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    if arch.slopes_trainable():
        slopes = np.full(arch.num_subdomains, 0.5)
    else:
        slopes = np.ones(arch.num_subdomains)
    return MLPParams(weights, biases, slopes)


# ---------------------------------------------------------------------------
# batched evaluation kernels
#
# Points are evaluated in batches (n, d). Jet state per layer:
#   val (n, width), d1 (n, d, width), d2 (n, d, width)
# where axis 1 indexes the seeded input direction. This is the per-coordinate
# jet pass of jets.py, vectorized over points and directions.
# ---------------------------------------------------------------------------


def _activation_blocks(arch: Architecture, params: MLPParams, row_subdomain: np.ndarray):
    """Row-wise scale vector and contiguous (kind, start, stop) blocks.

    row_subdomain must be sorted so that equal subdomains are contiguous.
    """
    n = row_subdomain.shape[0]
    if arch.mode == MODE_ADAI:
        scales = arch.scale_n * params.slopes[row_subdomain - 1]
        blocks = [(arch.activation, 0, n)]
        return scales, blocks
    scales = np.ones(n)
    blocks = []
    start = 0
    while start < n:
        m = row_subdomain[start]
        stop = start
        while stop < n and row_subdomain[stop] == m:
            stop += 1
        blocks.append((arch.activations[m - 1], start, stop))
        start = stop
    return scales, blocks


def forward_jets(
    params: MLPParams,
    arch: Architecture,
    X: np.ndarray,
    scales: np.ndarray,
    blocks,
):
    """Jet forward pass over a point batch: returns (u, grad u, laplacian u).

    Reference implementation; the training engine carries its own fused
    forward/reverse variant that is pinned to this one by tests.
    """
    n, d = X.shape
    val = X
    d1 = np.broadcast_to(np.eye(d), (n, d, d)).copy()
    d2 = np.zeros((n, d, d))
    s_col = scales[:, None]
    for layer in range(len(arch.hidden_sizes)):
        w, b = params.weights[layer], params.biases[layer]
        v = val @ w.T + b
        g = d1 @ w.T
        h = d2 @ w.T
        z = s_col * v
        f = np.empty_like(z)
        f1 = np.empty_like(z)
        f2 = np.empty_like(z)
        for kind, start, stop in blocks:
            a0, a1, a2, _ = act_eval3(kind, z[start:stop])
            f[start:stop] = a0
            f1[start:stop] = a1
            f2[start:stop] = a2
        sf1 = s_col * f1
        new_d1 = sf1[:, None, :] * g
        new_d2 = (s_col * s_col * f2)[:, None, :] * g * g + sf1[:, None, :] * h
        val, d1, d2 = f, new_d1, new_d2
    w, b = params.weights[-1], params.biases[-1]
    u = (val @ w.T + b)[:, 0]
    grad = (d1 @ w.T)[:, :, 0]
    lap = (d2 @ w.T)[:, :, 0].sum(axis=1)
    return u, grad, lap


def forward_values(params: MLPParams, arch: Architecture, X: np.ndarray, scales: np.ndarray, blocks) -> np.ndarray:
    """Value-only forward pass (no derivative channels)."""
    val = X
    s_col = scales[:, None]
    for layer in range(len(arch.hidden_sizes)):
        w, b = params.weights[layer], params.biases[layer]
        z = s_col * (val @ w.T + b)
        f = np.empty_like(z)
        for kind, start, stop in blocks:
            f[start:stop], _, _, _ = act_eval3(kind, z[start:stop])
        val = f
    w, b = params.weights[-1], params.biases[-1]
    return (val @ w.T + b)[:, 0]


def _as_points(x, input_dim: int):
    pts = np.asarray(x, dtype=np.float64)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != input_dim:
        raise ValueError(f"points have dimension {pts.shape[1]}, network expects {input_dim}")
    return pts, single


def forward(params: MLPParams, arch: Architecture, m: int, x) -> float | np.ndarray:
    """Evaluate the subdomain-m network at x ((d,) point or (n, d) batch)."""
    pts, single = _as_points(x, arch.input_dim)
    scales = np.full(pts.shape[0], arch.scale_of(params, m))
    blocks = [(arch.kind_of(m), 0, pts.shape[0])]
    u = forward_values(params, arch, pts, scales, blocks)
    return float(u[0]) if single else u


def forward_with_derivs(params: MLPParams, arch: Architecture, m: int, x):
    """Evaluate (u, grad u, laplacian u) for subdomain m at x."""
    pts, single = _as_points(x, arch.input_dim)
    scales = np.full(pts.shape[0], arch.scale_of(params, m))
    blocks = [(arch.kind_of(m), 0, pts.shape[0])]
    u, grad, lap = forward_jets(params, arch, pts, scales, blocks)
    if single:
        return float(u[0]), grad[0], float(lap[0])
    return u, grad, lap


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def arch_to_dict(arch: Architecture) -> dict:
    return {
        "input_dim": arch.input_dim,
        "hidden_sizes": list(arch.hidden_sizes),
        "num_subdomains": arch.num_subdomains,
        "mode": arch.mode,
        "activation": arch.activation.value if arch.activation else None,
        "activations": [k.value for k in arch.activations] if arch.activations else None,
        "scale_n": arch.scale_n,
    }


def arch_from_dict(d: dict) -> Architecture:
    return Architecture(
        input_dim=int(d["input_dim"]),
        hidden_sizes=tuple(int(h) for h in d["hidden_sizes"]),
        num_subdomains=int(d["num_subdomains"]),
        mode=d["mode"],
        activation=parse_kind(d["activation"]) if d.get("activation") else None,
        activations=tuple(parse_kind(k) for k in d["activations"]) if d.get("activations") else None,
        scale_n=float(d["scale_n"]),
    )


def params_to_json(params: MLPParams, arch: Architecture) -> str:
    """Snapshot as an architecture header plus one flat parameter array."""
    payload = {
        "architecture": arch_to_dict(arch),
        "slopes": params.slopes.tolist(),
        "theta": np.concatenate(
            [w.ravel() for w in params.weights] + [b for b in params.biases]
        ).tolist(),
        "theta_layout": "W1..WL row-major, then b1..bL",
    }
    return json.dumps(payload, indent=2)


def params_from_json(text: str) -> tuple[MLPParams, Architecture]:
    payload = json.loads(text)
    arch = arch_from_dict(payload["architecture"])
    sizes = arch.layer_sizes
    theta = np.asarray(payload["theta"], dtype=np.float64)
    weights, biases = [], []
    k = 0
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(theta[k : k + fan_out * fan_in].reshape(fan_out, fan_in).copy())
        k += fan_out * fan_in
    for fan_out in sizes[1:]:
        biases.append(theta[k : k + fan_out].copy())
        k += fan_out
    if k != theta.size:
        raise ValueError(f"flat parameter array has {theta.size} entries, layout needs {k}")
    slopes = np.asarray(payload["slopes"], dtype=np.float64)
    if slopes.shape != (arch.num_subdomains,):
        raise ValueError(f"slopes array has shape {slopes.shape}, expected ({arch.num_subdomains},)")
    return MLPParams(weights, biases, slopes), arch

"""Run configuration: JSON files plus dotted override flags.

Defaults are keyed by benchmark problem and reproduce the reference training
protocol for that problem when only `problem` is given.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ipinn.activations import ActivationKind, parse_kind
from ipinn.network import MODE_ADAI, MODE_IPINN, Architecture
from ipinn.sampling import SamplingCounts

SWEEP_KINDS = ("tanh", "swish", "sigmoid", "softplus", "gelu", "mish")


class ConfigError(ValueError):
    pass


PROBLEM_DEFAULTS = {
    "poisson1d": {
        "hidden_layers": 3,
        "neurons": 10,
        "iterations": 60000,
        "alpha_int": 5.0,
        "alpha_bc": 10.0,
        "counts": {"interior": 131, "boundary": 1, "interface": 1},
        "activation": "tanh",
        "activations": ["tanh", "swish", "tanh", "swish", "tanh"],
        "num_subdomains": 5,
        "input_dim": 1,
    },
    "letters2d": {
        "hidden_layers": 3,
        "neurons": 20,
        "iterations": 60000,
        "alpha_int": 25.0,
        "alpha_bc": 20.0,
        "counts": {"interior": 3679, "boundary": 60, "interface": 100},
        "activation": "tanh",
        "activations": ["tanh", "swish", "swish", "swish", "swish"],
        "num_subdomains": 5,
        "input_dim": 2,
    },
    "spheres3d": {
        "hidden_layers": 2,
        "neurons": 50,
        "iterations": 20000,
        "alpha_int": 50.0,
        "alpha_bc": 40.0,
        "counts": {"interior": 3336, "boundary": 300, "interface": 200},
        "activation": "sigmoid",
        "activations": ["swish"] + ["sigmoid"] * 8,
        "num_subdomains": 9,
        "input_dim": 3,
    },
}


@dataclass
class TrainConfig:
    problem: str
    mode: str = MODE_ADAI
    activation: str = "tanh"
    activations: list[str] = field(default_factory=list)  # ipinn mode, one per subdomain
    hidden_layers: int = 3
    neurons: int = 10
    iterations: int = 60000
    seed: int = 2
    seeds: list[int] = field(default_factory=lambda: [2, 3, 4])  # compare subcommand
    scale_n: float = 10.0
    lr: float = 5e-3
    lr_schedule: str = "cosine"  # constant | exponential | step | cosine
    lr_decay: float = 0.0  # exponential: per-iteration decay rate
    lr_step_every: int = 20000  # step: iterations between drops
    lr_step_factor: float = 0.1  # step: multiplier at each drop
    lr_min: float = 0.0  # floor applied by every schedule
    alpha_int: float = 5.0
    alpha_bc_d: float = 10.0
    alpha_bc_n: float = 10.0
    counts: dict = field(default_factory=lambda: {"interior": 131, "boundary": 1, "interface": 1})
    log_interval: int = 100
    output_dir: str = ""
    plots: bool = True
    letter_layout: str | None = None  # path to a LetterLayout JSON
    on_existing: str = "fail"  # or "version"

    def sampling_counts(self) -> SamplingCounts:
        return SamplingCounts(
            interior=int(self.counts["interior"]),
            boundary=int(self.counts["boundary"]),
            interface=int(self.counts["interface"]),
        )

    def lr_at(self, iteration: int) -> float:
        """Learning rate for one iteration under the configured schedule."""
        if self.lr_schedule == "constant":
            lr = self.lr
        elif self.lr_schedule == "exponential":
            lr = self.lr * math.exp(-self.lr_decay * iteration)
        elif self.lr_schedule == "step":
            lr = self.lr * self.lr_step_factor ** (iteration // self.lr_step_every)
        else:  # cosine
            horizon = max(self.iterations, 1)
            lr = self.lr * 0.5 * (1.0 + math.cos(math.pi * min(iteration, horizon) / horizon))
        return max(lr, self.lr_min)

    def architecture(self) -> Architecture:
        defaults = PROBLEM_DEFAULTS[self.problem]
        if self.mode == MODE_ADAI:
            return Architecture(
                input_dim=defaults["input_dim"],
                hidden_sizes=(self.neurons,) * self.hidden_layers,
                num_subdomains=defaults["num_subdomains"],
                mode=MODE_ADAI,
                activation=parse_kind(self.activation),
                scale_n=self.scale_n,
            )
        return Architecture(
            input_dim=defaults["input_dim"],
            hidden_sizes=(self.neurons,) * self.hidden_layers,
            num_subdomains=defaults["num_subdomains"],
            mode=MODE_IPINN,
            activation=None,
            activations=tuple(parse_kind(k) for k in self.activations),
        )

    def as_dict(self) -> dict:
        return asdict(self)


def resolve_config(raw: dict) -> TrainConfig:
    """Fill problem-specific defaults, then validate."""
    if "problem" not in raw:
        raise ConfigError("config needs a 'problem' field (poisson1d, letters2d, or spheres3d)")
    problem = raw["problem"]
    if problem not in PROBLEM_DEFAULTS:
        raise ConfigError(f"problem: unknown problem {problem!r}; valid: {', '.join(PROBLEM_DEFAULTS)}")
    defaults = PROBLEM_DEFAULTS[problem]
    merged: dict = {
        "problem": problem,
        "mode": MODE_ADAI,
        "activation": defaults["activation"],
        "activations": list(defaults["activations"]),
        "hidden_layers": defaults["hidden_layers"],
        "neurons": defaults["neurons"],
        "iterations": defaults["iterations"],
        "alpha_int": defaults["alpha_int"],
        "alpha_bc_d": defaults["alpha_bc"],
        "alpha_bc_n": defaults["alpha_bc"],
        "counts": dict(defaults["counts"]),
    }
    known = set(TrainConfig.__dataclass_fields__)
    for key, value in raw.items():
        if key == "counts":
            if not isinstance(value, dict) or set(value) - {"interior", "boundary", "interface"}:
                raise ConfigError(f"counts: expected keys interior/boundary/interface, got {value}")
            merged["counts"].update(value)
        elif key in known:
            merged[key] = value
        else:
            raise ConfigError(f"{key}: unknown config field")
    cfg = TrainConfig(**merged)
    _validate(cfg)
    return cfg


def _validate(cfg: TrainConfig) -> None:
    defaults = PROBLEM_DEFAULTS[cfg.problem]
    if cfg.mode not in (MODE_ADAI, MODE_IPINN):
        raise ConfigError(f"mode: must be '{MODE_ADAI}' or '{MODE_IPINN}', got {cfg.mode!r}")
    try:
        if cfg.mode == MODE_ADAI:
            parse_kind(cfg.activation)
        else:
            if len(cfg.activations) != defaults["num_subdomains"]:
                raise ConfigError(
                    f"activations: ipinn mode needs {defaults['num_subdomains']} kinds "
                    f"(one per subdomain), got {len(cfg.activations)}"
                )
            for k in cfg.activations:
                parse_kind(k)
    except ValueError as e:
        raise ConfigError(f"activation: {e}") from None
    if cfg.iterations < 0:
        raise ConfigError(f"iterations: must be >= 0, got {cfg.iterations}")
    if cfg.hidden_layers < 1 or cfg.neurons < 1:
        raise ConfigError(f"hidden_layers/neurons: must be >= 1, got {cfg.hidden_layers}/{cfg.neurons}")
    if cfg.lr <= 0:
        raise ConfigError(f"lr: must be positive, got {cfg.lr}")
    if cfg.lr_schedule not in ("constant", "exponential", "step", "cosine"):
        raise ConfigError(
            f"lr_schedule: must be constant, exponential, step, or cosine, got {cfg.lr_schedule!r}"
        )
    if cfg.lr_step_every < 1 or not (0 < cfg.lr_step_factor <= 1):
        raise ConfigError(
            f"lr_step_every/lr_step_factor: need >=1 and (0,1], got "
            f"{cfg.lr_step_every}/{cfg.lr_step_factor}"
        )
    if cfg.lr_decay < 0 or cfg.lr_min < 0:
        raise ConfigError(f"lr_decay/lr_min: must be >= 0, got {cfg.lr_decay}/{cfg.lr_min}")
    if cfg.log_interval < 1:
        raise ConfigError(f"log_interval: must be >= 1, got {cfg.log_interval}")
    for name in ("alpha_int", "alpha_bc_d", "alpha_bc_n"):
        if getattr(cfg, name) < 0:
            raise ConfigError(f"{name}: must be >= 0, got {getattr(cfg, name)}")
    if cfg.on_existing not in ("fail", "version"):
        raise ConfigError(f"on_existing: must be 'fail' or 'version', got {cfg.on_existing!r}")
    try:
        cfg.sampling_counts()
    except ValueError as e:
        raise ConfigError(f"counts: {e}") from None
    if not cfg.seeds:
        raise ConfigError("seeds: must be a nonempty list")


def load_config(path: str | None, overrides: list[str], cli_fields: dict | None = None) -> TrainConfig:
    """Merge (in order): JSON config file, direct CLI fields, --set overrides."""
    raw: dict = {}
    if path:
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"config file {path}: {e}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"config file {path}: expected a JSON object")
    for key, value in (cli_fields or {}).items():
        if value is not None:
            raw[key] = value
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r}: expected key=value")
        key, _, text = item.partition("=")
        _apply_dotted(raw, key.strip(), text.strip())
    return resolve_config(raw)


def _apply_dotted(raw: dict, dotted: str, text: str) -> None:
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text  # bare strings allowed without quotes
    node = raw
    parts = dotted.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"override {dotted!r}: {part} is not a section")
    node[parts[-1]] = value

import json

import pytest

from ipinn.config import ConfigError, load_config, resolve_config


def test_defaults_poisson1d():
    cfg = resolve_config({"problem": "poisson1d"})
    assert cfg.hidden_layers == 3 and cfg.neurons == 10
    assert cfg.iterations == 60000
    assert cfg.alpha_int == 5.0 and cfg.alpha_bc_d == 10.0
    assert cfg.counts["interior"] == 131
    assert cfg.mode == "adai" and cfg.activation == "tanh"
    assert cfg.scale_n == 10.0 and cfg.lr == 5e-3


def test_defaults_letters2d():
    cfg = resolve_config({"problem": "letters2d"})
    assert (cfg.hidden_layers, cfg.neurons, cfg.iterations) == (3, 20, 60000)
    assert (cfg.alpha_int, cfg.alpha_bc_d) == (25.0, 20.0)
    assert cfg.counts["interior"] == 3679


def test_defaults_spheres3d():
    cfg = resolve_config({"problem": "spheres3d"})
    assert (cfg.hidden_layers, cfg.neurons, cfg.iterations) == (2, 50, 20000)
    assert (cfg.alpha_int, cfg.alpha_bc_d) == (50.0, 40.0)
    assert cfg.counts["interior"] == 3336
    assert cfg.activation == "sigmoid"
    assert cfg.activations == ["swish"] + ["sigmoid"] * 8


def test_ipinn_requires_full_kind_list():
    with pytest.raises(ConfigError, match="one per subdomain"):
        resolve_config({"problem": "poisson1d", "mode": "ipinn", "activations": ["tanh", "swish"]})


def test_bad_kind_lists_valid_names():
    with pytest.raises(ConfigError, match="valid kinds"):
        resolve_config({"problem": "poisson1d", "activation": "relu"})


def test_unknown_field_rejected():
    with pytest.raises(ConfigError, match="unknown config field"):
        resolve_config({"problem": "poisson1d", "learning_rate": 1.0})


def test_unknown_problem_rejected():
    with pytest.raises(ConfigError, match="unknown problem"):
        resolve_config({"problem": "heat9d"})


def test_architecture_from_config():
    cfg = resolve_config({"problem": "spheres3d", "neurons": 7, "hidden_layers": 2})
    arch = cfg.architecture()
    assert arch.layer_sizes == (3, 7, 7, 1)
    assert arch.num_subdomains == 9


def test_file_and_dotted_overrides(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"problem": "poisson1d", "iterations": 5}))
    cfg = load_config(str(path), ["counts.interior=41", "lr=0.001", "activation=swish"], None)
    assert cfg.iterations == 5
    assert cfg.counts["interior"] == 41
    assert cfg.lr == 0.001
    assert cfg.activation == "swish"


def test_cli_fields_override_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"problem": "poisson1d", "seed": 1}))
    cfg = load_config(str(path), [], {"seed": 9})
    assert cfg.seed == 9


def test_bad_override_syntax():
    with pytest.raises(ConfigError, match="key=value"):
        load_config(None, ["iterations"], {"problem": "poisson1d"})

import csv
import json
from pathlib import Path

import pytest

from ipinn.cli import main


def read_csv(path):
    lines = Path(path).read_text().splitlines()
    assert lines[0].startswith("# config=")
    rows = list(csv.reader(lines[1:]))
    return json.loads(lines[0][len("# config=") :]), rows[0], rows[1:]


def test_run_writes_all_artifacts(tmp_path, capsys):
    out = tmp_path / "run1"
    code = main(
        ["run", "--problem", "poisson1d", "--iterations", "300", "--seed", "0", "--output", str(out)]
    )
    assert code == 0
    printed = capsys.readouterr().out
    assert "final RMSE" in printed and "wall time" in printed
    for name in ("run.json", "loss.csv", "slopes.csv", "params.json", "loss_curves.png", "slopes.png", "solution.png"):
        assert (out / name).exists(), name
    config, header, rows = read_csv(out / "loss.csv")
    assert header == ["iteration", "mse_eq", "mse_bc_d", "mse_bc_n", "mse_ic_d", "mse_ic_n", "total"]
    assert rows[0][0] == "0" and rows[-1][0] == "300"
    assert config["iterations"] == 300
    run = json.loads((out / "run.json").read_text())
    assert run["config"]["seed"] == 0
    assert run["final_rmse"] > 0
    params = json.loads((out / "params.json").read_text())
    assert params["architecture"]["mode"] == "adai"
    assert len(params["slopes"]) == 5


def test_run_ipinn_omits_slope_outputs(tmp_path):
    out = tmp_path / "run-ipinn"
    code = main(
        [
            "run",
            "--problem",
            "poisson1d",
            "--mode",
            "ipinn",
            "--activations",
            "tanh,swish,tanh,swish,tanh",
            "--iterations",
            "100",
            "--output",
            str(out),
            "--no-plots",
        ]
    )
    assert code == 0
    assert not (out / "slopes.csv").exists()
    assert not (out / "loss_curves.png").exists()


def test_run_refuses_nonempty_output(tmp_path, capsys):
    out = tmp_path / "busy"
    out.mkdir()
    (out / "sentinel.txt").write_text("x")
    code = main(["run", "--problem", "poisson1d", "--iterations", "10", "--output", str(out)])
    assert code == 2
    assert "not empty" in capsys.readouterr().err
    code = main(
        [
            "run", "--problem", "poisson1d", "--iterations", "10",
            "--output", str(out), "--on-existing", "version", "--no-plots",
        ]
    )
    assert code == 0
    assert (out.parent / "busy-v2" / "run.json").exists()


def test_malformed_kind_exits_2(tmp_path, capsys):
    code = main(
        ["run", "--problem", "poisson1d", "--activation", "relu", "--iterations", "10", "--output", str(tmp_path / "x")]
    )
    assert code == 2
    assert "valid kinds" in capsys.readouterr().err


def test_compare_csv_shape(tmp_path):
    out = tmp_path / "cmp"
    code = main(
        [
            "compare", "--problem", "poisson1d", "--iterations", "200",
            "--seeds", "0,1,2", "--output", str(out), "--no-plots",
        ]
    )
    assert code == 0
    config, header, rows = read_csv(out / "compare.csv")
    assert header == ["method", "seed", "iterations", "rmse", "wall_time_seconds", "cost"]
    assert len(rows) == 8  # 3 seeds x 2 methods + 2 median rows
    methods = [r[0] for r in rows]
    assert methods.count("adai") == 4 and methods.count("ipinn") == 4
    median_rows = [r for r in rows if r[1] == "median"]
    assert len(median_rows) == 2
    adai_rows = [r for r in rows if r[0] == "adai" and r[1] != "median"]
    assert all(float(r[5]) == 1.0 for r in adai_rows)  # cost is relative to adai
    assert all(float(r[3]) > 0 for r in rows)


def test_compare_equal_modes_same_rmse(tmp_path):
    # both sides ipinn with the same kinds: identical seeds give identical RMSE
    out = tmp_path / "cmp-eq"
    cfgfile = tmp_path / "cfg.json"
    cfgfile.write_text(
        json.dumps(
            {
                "problem": "poisson1d",
                "iterations": 150,
                "seeds": [3],
                "activation": "tanh",
                "activations": ["tanh"] * 5,
            }
        )
    )
    code = main(["compare", "--config", str(cfgfile), "--output", str(out), "--no-plots"])
    assert code == 0
    _, _, rows = read_csv(out / "compare.csv")
    # not equal across modes in general (adai trains slopes), but cost ~ 1: just
    # check both rows exist and parse; the equal-mode identity is in the API test
    assert {r[0] for r in rows} == {"adai", "ipinn"}


def test_sweep_csv_shape(tmp_path):
    out = tmp_path / "sweep"
    code = main(
        [
            "sweep-activations", "--problem", "poisson1d", "--iterations", "60",
            "--output", str(out), "--no-plots",
        ]
    )
    assert code == 0
    config, header, rows = read_csv(out / "sweep.csv")
    assert header == ["kind", "a_1", "a_2", "a_3", "a_4", "a_5", "rmse", "cost"]
    assert [r[0] for r in rows] == ["tanh", "swish", "sigmoid", "softplus", "gelu", "mish"]
    for r in rows:
        rmse = float(r[6])
        assert rmse > 0 and rmse < float("inf")
        assert len(r) == 8


def test_print_geometry_roundtrips(capsys):
    assert main(["print-geometry", "--problem", "letters2d"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["problem"] == "letters2d"
    assert len(payload["layout"]["letters"]) == 4
    assert main(["print-geometry", "--problem", "poisson1d"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["interfaces"] == [0.2, 0.4, 0.6, 0.8]


def test_dump_batch(tmp_path, capsys):
    out = tmp_path / "b.csv"
    code = main(["dump-batch", "--problem", "poisson1d", "--output", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[1] == "x,role,id"
    assert len(lines) == 2 + 131

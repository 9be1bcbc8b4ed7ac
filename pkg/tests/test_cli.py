"""End-to-end command-line runs on temporary model files."""

import csv
import math

import numpy as np
import pytest

from bifscan.analytic import eternal_cpf_deterministic
from bifscan.cli import main

ETERNAL = """
[model.analytic.eternal]
gamma = 1.0

[scheme]
t = [0.5, 1.0]
tau = [1.0]
theta = [1.5707963267948966]
"""

EXCHANGE = """
[model.bipartite]
h_s = [[0.0, 0.0], [0.0, 0.0]]
h_e = [[0.0, 0.0], [0.0, 0.0]]
h_i = [
  [0.0, 0.0, 0.0, 0.0],
  [0.0, 0.0, 1.0, 0.0],
  [0.0, 1.0, 0.0, 0.0],
  [0.0, 0.0, 0.0, 0.0],
]
sigma0 = [[0.0, 0.0], [0.0, 1.0]]

[scheme]
t = [1.0]
tau = [1.0]
rho0 = "x+"
"""


def write_model(tmp_path, text, name="model.toml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        rows = [dict(zip(header, row)) for row in reader]
    return header, rows


def test_fig1_panel_a_output(tmp_path):
    out = tmp_path / "a.csv"
    assert main(["fig1", "a", "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ("t", "tau", "theta", "scheme", "y_update", "cpf_value")
    assert len(rows) == 3 * 200 * 2 * 2
    assert (tmp_path / "a.png").exists()
    raw = out.read_bytes()
    assert b"\r" not in raw
    # every random-scheme value vanishes
    rand = [float(r["cpf_value"]) for r in rows if r["scheme"] == "random"]
    assert max(abs(v) for v in rand) < 1e-12
    # deterministic rows reproduce the closed form
    for r in rows[100:2400:397]:
        if r["scheme"] != "deterministic":
            continue
        expected = eternal_cpf_deterministic(
            float(r["theta"]), float(r["t"]), float(r["tau"]), 1.0,
            record=float(r["y_update"]),
        )
        assert abs(float(r["cpf_value"]) - expected) < 1e-12
    # numeric cells are canonical shortest-round-trip decimals
    for cell in (rows[7]["t"], rows[7]["cpf_value"], rows[7]["theta"]):
        assert format(float(cell), ".17g") == cell


def test_fig1_no_plot_skips_figure(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["fig1", "c", "--out", str(out), "--no-plot"]) == 0
    assert not (tmp_path / "c.png").exists()
    header, rows = read_csv(out)
    assert len(rows) == 3 * 200 * 2 * 2
    rand_orth = [
        float(r["cpf_value"])
        for r in rows
        if r["scheme"] == "random" and abs(float(r["theta"]) - math.pi / 2) < 1e-12
    ]
    assert max(abs(v) for v in rand_orth) < 1e-12
    rand_par = [
        float(r["cpf_value"])
        for r in rows
        if r["scheme"] == "random" and float(r["theta"]) == 0.0
    ]
    assert max(abs(v) for v in rand_par) > 0.1


def test_fig1_panel_b_scaling_identity(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["fig1", "b", "--out", str(out), "--no-plot"]) == 0
    header, rows = read_csv(out)
    assert header == ("t", "tau", "directions", "scheme", "y_update", "cpf_value")
    assert len(rows) == 2 * 200 * 2
    table = {
        (r["t"], r["directions"], r["scheme"]): float(r["cpf_value"]) for r in rows
    }
    for t_str in {r["t"] for r in rows}:
        zzz_rand = table[(t_str, "z/z/z", "random")]
        xzx_rand = table[(t_str, "x/z/x", "random")]
        assert abs(zzz_rand - xzx_rand**2) < 1e-15
        assert zzz_rand >= 0.0
        if abs(xzx_rand) > 1e-9:
            ratio_z = table[(t_str, "z/z/z", "deterministic")] / zzz_rand
            ratio_x = table[(t_str, "x/z/x", "deterministic")] / xzx_rand
            assert abs(ratio_z - ratio_x) < 1e-9 * max(1.0, abs(ratio_z))


def test_scan_output_is_deterministic(tmp_path):
    model = write_model(tmp_path, ETERNAL)
    out1, out2 = tmp_path / "s1.csv", tmp_path / "s2.csv"
    assert main(["scan", model, "--out", str(out1)]) == 0
    assert main(["scan", model, "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    header, rows = read_csv(out1)
    assert header == (
        "t", "tau", "theta", "scheme", "y_update", "cpf_value", "markov_residual",
    )
    # 2 t x 1 tau x 1 theta x 2 schemes x 2 records
    assert len(rows) == 8
    for r in rows:
        if r["scheme"] == "random":
            assert abs(float(r["cpf_value"])) < 1e-12
            assert abs(float(r["markov_residual"])) < 1e-12
        else:
            assert float(r["markov_residual"]) > 1e-3
    assert not list(tmp_path.glob(".bifscan-*"))


def test_scan_engine_model_requires_directions(tmp_path, capsys):
    model = write_model(
        tmp_path,
        """
        [model.noise_ensemble]
        weights = [1.0]
        channels = [{type = "pauli", axis = "x", rate = 1.0}]

        [scheme]
        t = [1.0]
        tau = [1.0]
        """,
    )
    out = tmp_path / "out.csv"
    assert main(["scan", model, "--out", str(out)]) == 2
    assert "directions" in capsys.readouterr().err
    assert not out.exists()


def test_scan_with_plot_renders_png(tmp_path):
    model = write_model(tmp_path, ETERNAL)
    out = tmp_path / "scan.csv"
    assert main(["scan", model, "--out", str(out), "--plot"]) == 0
    assert (tmp_path / "scan.png").exists()


def test_check_bif_detects_exchange(tmp_path):
    model = write_model(tmp_path, EXCHANGE)
    out = tmp_path / "sweep.csv"
    assert main(["check-bif", model, "--out", str(out)]) == 1
    header, rows = read_csv(out)
    assert header == (
        "t", "tau", "theta", "directions", "scheme", "y_update",
        "cpf_value", "markov_residual",
    )
    # default sweep: 6 triples x 1 point x 1 scheme x 2 records
    assert len(rows) == 12
    assert {r["directions"] for r in rows} == {
        "x/x/x", "y/y/y", "z/z/z", "x/z/x", "z/x/z", "x/y/z",
    }
    assert all(r["scheme"] == "random" for r in rows)
    best = max(float(r["markov_residual"]) for r in rows)
    assert best > 1e-3
    # a loose threshold suppresses the detection
    assert main(
        ["check-bif", model, "--out", str(out), "--threshold", "10"]
    ) == 0


def test_check_bif_passes_markovian_model(tmp_path):
    model = write_model(tmp_path, ETERNAL)
    out = tmp_path / "sweep.csv"
    assert main(["check-bif", model, "--out", str(out)]) == 0
    _, rows = read_csv(out)
    assert all(float(r["markov_residual"]) <= 1e-9 for r in rows)


def test_mc_requires_block(tmp_path, capsys):
    model = write_model(tmp_path, ETERNAL)
    out = tmp_path / "mc.csv"
    assert main(["mc", model, "--out", str(out)]) == 2
    assert "mc" in capsys.readouterr().err


def test_mc_command_estimates_match_exact(tmp_path):
    model = write_model(
        tmp_path,
        EXCHANGE
        + """
directions = ["z", "z", "z"]

[mc]
n_samples = 5000
seed = 11
n_replicas = 8
""",
    )
    out = tmp_path / "mc.csv"
    assert main(["mc", model, "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header[-2:] == ("mc_cpf", "mc_stderr")
    assert len(rows) == 2  # declared policy only, two records
    assert all(r["scheme"] == "random" for r in rows)
    for r in rows:
        stderr = float(r["mc_stderr"])
        assert stderr > 0.0
        assert abs(float(r["mc_cpf"]) - float(r["cpf_value"])) < 6.0 * stderr
    # same seed, same bytes
    out2 = tmp_path / "mc2.csv"
    assert main(["mc", model, "--out", str(out2)]) == 0
    assert out.read_bytes() == out2.read_bytes()


def test_scan_includes_mc_columns_when_declared(tmp_path):
    model = write_model(
        tmp_path,
        EXCHANGE
        + """
directions = ["z", "z", "z"]

[mc]
n_samples = 2000
seed = 5
n_replicas = 4
""",
    )
    out = tmp_path / "scan.csv"
    assert main(["scan", model, "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header[-2:] == ("mc_cpf", "mc_stderr")
    assert len(rows) == 4  # one grid point x 2 schemes x 2 records
    assert {r["scheme"] for r in rows} == {"deterministic", "random"}


def test_bad_toml_reports_error(tmp_path, capsys):
    model = write_model(tmp_path, "[model\n", name="bad.toml")
    assert main(["scan", model, "--out", str(tmp_path / "x.csv")]) == 2
    assert "error:" in capsys.readouterr().err


def test_unknown_key_reports_error(tmp_path, capsys):
    model = write_model(tmp_path, ETERNAL + "\nunknown_key = 1\n")
    assert main(["scan", model, "--out", str(tmp_path / "x.csv")]) == 2
    err = capsys.readouterr().err
    assert "error:" in err and "unknown" in err

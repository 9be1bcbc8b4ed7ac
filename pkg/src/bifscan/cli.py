"""Command-line frontend: model files in, CSV and exit codes out.

Commands
--------
``fig1 {a,b,c} --out PATH [--no-plot]``
    Closed-form CPF curves of the three solvable models over a t = tau grid
    (200 points, scaled time in [0, 5]): (a) the two-Pauli ensemble measured
    x-n(theta)-x, (b) the damped qubit measured zzz and xzx, (c) ohmic
    dephasing measured n(theta)-y-x. CSV to PATH, PNG alongside by default.
``check-bif MODEL.toml --out PATH [--threshold X] [--plot]``
    Random-policy sweep over the declared grid; exits 1 when any
    factorization residual exceeds the threshold (bidirectional
    system-environment information flow detected), 0 when none does.
``scan MODEL.toml --out PATH [--plot]``
    Deterministic and random CPF scan over the declared (t, tau, theta)
    grid; sampling columns added when the file has an mc block.
``mc MODEL.toml --out PATH [--plot]``
    Sampling-focused run of the declared policy; the mc block is required.

CSV conventions: comma-separated, header row, UTF-8, LF line endings,
floats with 17 significant digits, empty string for fields that do not
apply to a row. Files are written to a temp file and atomically renamed, so
a failed run never leaves a partial CSV. Exit codes: 0 success (no BIF for
check-bif), 1 BIF detected (check-bif only), 2 error, with a diagnostic on
standard error.

Sampling seeds: each grid point evaluated with Monte Carlo columns uses a
substream spawned from the file's seed keyed by the point's position in the
deterministic emission order, so outputs are byte-identical across reruns
and worker counts.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import tempfile

import numpy as np

from .analytic import (
    DecayAmplitude,
    decay_amplitude,
    dephasing_cpf_deterministic,
    dephasing_cpf_random,
    dissipative_cpf_deterministic,
    dissipative_cpf_random,
    eternal_ensemble,
    eternal_joint_deterministic,
    eternal_joint_random,
    lorentzian_kernel,
)
from .cpf import cpf_summary, table3_summary
from .linalg import density_matrix
from .measurements import UpdatePolicy, bloch_projectors
from .modelfile import (
    ModelConfig,
    ModelFileError,
    build_policy,
    load_model_file,
    resolve_direction,
)
from .montecarlo import cpf_replicas, ensemble_sampler, joint_sampler
from .plotting import Curve, render_curves, render_rows
from .protocol import ProtocolSpec, joint_distribution_bipartite, stage_tables_ensemble

__all__ = ["main", "entry_point"]

GRID_POINTS = 200
GRID_MAX = 5.0
SCHEMES = ("deterministic", "random")
DEFAULT_SWEEP = (
    ("x", "x", "x"),
    ("y", "y", "y"),
    ("z", "z", "z"),
    ("x", "z", "x"),
    ("z", "x", "z"),
    ("x", "y", "z"),
)
BASE_COLUMNS = (
    "t",
    "tau",
    "theta",
    "scheme",
    "y_update",
    "cpf_value",
    "markov_residual",
)
MC_COLUMNS = ("mc_cpf", "mc_stderr")

PLUS_Z = density_matrix(np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex))


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".bifscan-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _write_csv(path: str, header: tuple[str, ...], rows: list[dict]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_format_cell(row.get(key)) for key in header])
    _atomic_write(path, buf.getvalue())


def _figure_path(out_path: str) -> str:
    return os.path.splitext(out_path)[0] + ".png"


def _render_atomic(path: str, render) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".bifscan-", suffix=".png")
    os.close(fd)
    try:
        render(tmp)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _point_seed(mc, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=mc.seed, spawn_key=(index,))


def _engine_and_rho0(cfg: ModelConfig):
    """Engine kind ('ensemble' | 'bipartite'), engine object, initial state."""
    if cfg.kind == "bipartite":
        return "bipartite", cfg.engine, cfg.scheme.rho0
    if cfg.kind == "noise_ensemble":
        return "ensemble", cfg.engine, cfg.scheme.rho0
    if cfg.kind == "eternal":
        return "ensemble", eternal_ensemble(cfg.params["gamma"]), PLUS_Z
    raise ModelFileError(
        f"the {cfg.kind} model has no exact stochastic engine; "
        "use noise_ensemble, bipartite, or analytic.eternal"
    )


def _evaluate_point(engine_kind, engine, spec, t, tau, want_sampler):
    if engine_kind == "bipartite":
        dist = joint_distribution_bipartite(engine, spec, t, tau)
        sampler = joint_sampler(dist) if want_sampler else None
    else:
        tables = stage_tables_ensemble(engine, spec, t, tau)
        dist = tables.joint()
        sampler = ensemble_sampler(tables) if want_sampler else None
    return dist, sampler


def _engine_rows(
    cfg: ModelConfig,
    schemes: tuple[str, ...],
    triples: tuple[tuple[str, str, str], ...],
    with_mc: bool,
    with_directions: bool,
) -> list[dict]:
    """Exact-engine scan rows in deterministic grid order.

    Order: directions triple, theta, t, tau, scheme, update record. The
    per-point index feeding the sampling substreams follows the same order.
    """
    engine_kind, engine, rho0 = _engine_and_rho0(cfg)
    scheme = cfg.scheme
    rows: list[dict] = []
    point = 0
    for triple in triples:
        tilted = "n" in triple
        thetas = scheme.theta_values if tilted else (None,)
        if tilted and scheme.theta_values is None:
            raise ModelFileError("scheme.theta: required for direction 'n'")
        label = "/".join(triple)
        for theta in thetas:
            dirs = [
                resolve_direction(s, theta, "scheme.directions") for s in triple
            ]
            mx, my, mz = (bloch_projectors(d) for d in dirs)
            for t in scheme.t_values:
                for tau in scheme.tau_values:
                    for scheme_name in schemes:
                        policy = (
                            UpdatePolicy.deterministic()
                            if scheme_name == "deterministic"
                            else build_policy(scheme, my, theta)
                        )
                        spec = ProtocolSpec(
                            rho0=rho0, mx=mx, my=my, mz=mz, policy=policy
                        )
                        dist, sampler = _evaluate_point(
                            engine_kind, engine, spec, t, tau, with_mc
                        )
                        summary = cpf_summary(dist)
                        mc_summary = None
                        if sampler is not None:
                            mc_summary = cpf_replicas(
                                sampler,
                                cfg.mc.n_samples,
                                _point_seed(cfg.mc, point),
                                n_replicas=cfg.mc.n_replicas,
                                n_workers=cfg.mc.n_workers,
                            )
                        for j, yt in enumerate(summary.yt_values):
                            row = {
                                "t": t,
                                "tau": tau,
                                "theta": theta,
                                "scheme": scheme_name,
                                "y_update": yt,
                                "cpf_value": summary.correlations[j],
                                "markov_residual": summary.residuals[j],
                            }
                            if with_directions:
                                row["directions"] = label
                            if mc_summary is not None:
                                row["mc_cpf"] = mc_summary.mean_correlation[j]
                                row["mc_stderr"] = mc_summary.stderr_correlation[j]
                            rows.append(row)
                        point += 1
    return rows


def _eternal_rows(
    cfg: ModelConfig, schemes: tuple[str, ...], with_mc: bool
) -> list[dict]:
    """Closed-form rows for the two-Pauli ensemble; samplers come from its
    exact engine realization."""
    gamma = cfg.params["gamma"]
    scheme = cfg.scheme
    update = scheme.update_probs
    engine = eternal_ensemble(gamma) if with_mc else None
    mx = mz = bloch_projectors(resolve_direction("x", None, "internal"))
    rows: list[dict] = []
    point = 0
    for theta in scheme.theta_values:
        my = bloch_projectors(resolve_direction("n", theta, "internal"))
        for t in scheme.t_values:
            for tau in scheme.tau_values:
                for scheme_name in schemes:
                    if scheme_name == "deterministic":
                        table = eternal_joint_deterministic(theta, t, tau, gamma)
                    else:
                        table = eternal_joint_random(
                            theta, t, tau, gamma, update_probs=update
                        )
                    summary = table3_summary(table)
                    mc_summary = None
                    if with_mc:
                        policy = (
                            UpdatePolicy.deterministic()
                            if scheme_name == "deterministic"
                            else build_policy(scheme, my, theta)
                        )
                        spec = ProtocolSpec(
                            rho0=PLUS_Z, mx=mx, my=my, mz=mz, policy=policy
                        )
                        tables = stage_tables_ensemble(engine, spec, t, tau)
                        mc_summary = cpf_replicas(
                            ensemble_sampler(tables),
                            cfg.mc.n_samples,
                            _point_seed(cfg.mc, point),
                            n_replicas=cfg.mc.n_replicas,
                            n_workers=cfg.mc.n_workers,
                        )
                    for j, yt in enumerate(summary.yt_values):
                        row = {
                            "t": t,
                            "tau": tau,
                            "theta": theta,
                            "scheme": scheme_name,
                            "y_update": yt,
                            "cpf_value": summary.correlations[j],
                            "markov_residual": summary.residuals[j],
                        }
                        if mc_summary is not None:
                            row["mc_cpf"] = mc_summary.mean_correlation[j]
                            row["mc_stderr"] = mc_summary.stderr_correlation[j]
                        rows.append(row)
                    point += 1
    return rows


def _dissipative_amplitude(params: dict, t_values, tau_values) -> DecayAmplitude:
    step = params["step"]
    horizon = max(max(t_values), max(tau_values), step)
    n = max(1, math.ceil(horizon / step - 1e-9))
    return decay_amplitude(
        lorentzian_kernel(params["gamma"], params["tau_c"]), n * step, step
    )


def _dissipative_rows(cfg: ModelConfig, schemes: tuple[str, ...]) -> list[dict]:
    scheme = cfg.scheme
    directions = cfg.params["directions"]
    amp = _dissipative_amplitude(cfg.params, scheme.t_values, scheme.tau_values)
    rows: list[dict] = []
    for t in scheme.t_values:
        for tau in scheme.tau_values:
            for scheme_name in schemes:
                if scheme_name == "deterministic":
                    value = dissipative_cpf_deterministic(amp, t, tau, directions)
                else:
                    value = dissipative_cpf_random(amp, t, tau, directions)
                rows.append(
                    {
                        "t": t,
                        "tau": tau,
                        "scheme": scheme_name,
                        "y_update": -1.0,
                        "cpf_value": value,
                    }
                )
    return rows


def _dephasing_rows(cfg: ModelConfig, schemes: tuple[str, ...]) -> list[dict]:
    scheme = cfg.scheme
    omega_c = cfg.params["omega_c"]
    coupling = cfg.params["coupling"]
    rows: list[dict] = []
    for theta in scheme.theta_values:
        for t in scheme.t_values:
            for tau in scheme.tau_values:
                for scheme_name in schemes:
                    for record in (1.0, -1.0):
                        if scheme_name == "deterministic":
                            value = dephasing_cpf_deterministic(
                                theta, t, tau, omega_c, coupling, record
                            )
                        else:
                            value = dephasing_cpf_random(
                                theta, t, tau, omega_c, coupling, record
                            )
                        rows.append(
                            {
                                "t": t,
                                "tau": tau,
                                "theta": theta,
                                "scheme": scheme_name,
                                "y_update": record,
                                "cpf_value": value,
                            }
                        )
    return rows


def _scan_rows(cfg: ModelConfig, schemes: tuple[str, ...], with_mc: bool) -> list[dict]:
    if cfg.kind in ("noise_ensemble", "bipartite"):
        if cfg.scheme.direction_specs is None:
            raise ModelFileError(
                "scheme.directions: required to scan an engine model"
            )
        return _engine_rows(
            cfg, schemes, (cfg.scheme.direction_specs,), with_mc, False
        )
    if cfg.kind == "eternal":
        return _eternal_rows(cfg, schemes, with_mc)
    if cfg.kind == "dissipative":
        return _dissipative_rows(cfg, schemes)
    return _dephasing_rows(cfg, schemes)


def cmd_scan(args) -> int:
    cfg = load_model_file(args.model)
    with_mc = cfg.mc is not None
    rows = _scan_rows(cfg, SCHEMES, with_mc)
    header = BASE_COLUMNS + (MC_COLUMNS if with_mc else ())
    _write_csv(args.out, header, rows)
    if args.plot:
        _render_atomic(
            _figure_path(args.out), lambda p: render_rows(p, rows, title="CPF scan")
        )
    return 0


def cmd_mc(args) -> int:
    cfg = load_model_file(args.model)
    if cfg.mc is None:
        raise ModelFileError("mc: block required by the mc command")
    rows = _scan_rows(cfg, (cfg.scheme.policy,), True)
    header = BASE_COLUMNS + MC_COLUMNS
    _write_csv(args.out, header, rows)
    if args.plot:
        _render_atomic(
            _figure_path(args.out),
            lambda p: render_rows(p, rows, title="CPF sampling run"),
        )
    return 0


def cmd_check_bif(args) -> int:
    cfg = load_model_file(args.model)
    triples = (
        (cfg.scheme.direction_specs,)
        if cfg.scheme.direction_specs is not None
        else DEFAULT_SWEEP
    )
    rows = _engine_rows(cfg, ("random",), triples, False, True)
    header = BASE_COLUMNS[:3] + ("directions",) + BASE_COLUMNS[3:]
    _write_csv(args.out, header, rows)
    if args.plot:
        _render_atomic(
            _figure_path(args.out),
            lambda p: render_rows(p, rows, title="BIF sweep (random policy)"),
        )
    residuals = np.array(
        [row["markov_residual"] for row in rows], dtype=float
    )
    detected = bool(np.any(residuals[np.isfinite(residuals)] > args.threshold))
    return 1 if detected else 0


def _fig1_grid() -> np.ndarray:
    return np.linspace(0.0, GRID_MAX, GRID_POINTS)


def _fig1_panel_a() -> tuple[tuple[str, ...], list[dict], list[Curve]]:
    grid = _fig1_grid()
    thetas = (math.pi / 6, math.pi / 4, math.pi / 2)
    rows: list[dict] = []
    curves: list[Curve] = []
    for theta in thetas:
        dets = []
        for t in grid:
            det_table = eternal_joint_deterministic(theta, t, t, 1.0)
            rand_table = eternal_joint_random(theta, t, t, 1.0)
            det = table3_summary(det_table)
            rand = table3_summary(rand_table)
            dets.append(det.correlations[0])
            for scheme_name, summary in (("deterministic", det), ("random", rand)):
                for j, yt in enumerate(summary.yt_values):
                    rows.append(
                        {
                            "t": t,
                            "tau": t,
                            "theta": theta,
                            "scheme": scheme_name,
                            "y_update": yt,
                            "cpf_value": summary.correlations[j],
                        }
                    )
        curves.append(Curve(grid, dets, f"deterministic, theta={theta:.3f}"))
    curves.append(
        Curve(grid, np.zeros_like(grid), "random (all theta)", {"linestyle": "--"})
    )
    header = ("t", "tau", "theta", "scheme", "y_update", "cpf_value")
    return header, rows, curves


def _fig1_panel_b() -> tuple[tuple[str, ...], list[dict], list[Curve]]:
    grid = _fig1_grid()
    amp = decay_amplitude(lorentzian_kernel(1.0, 5.0), GRID_MAX, 2e-3)
    rows: list[dict] = []
    curves: list[Curve] = []
    for directions, label in (("zzz", "z/z/z"), ("xzx", "x/z/x")):
        per_scheme = {"deterministic": [], "random": []}
        for t in grid:
            for scheme_name in SCHEMES:
                if scheme_name == "deterministic":
                    value = dissipative_cpf_deterministic(amp, t, t, directions)
                else:
                    value = dissipative_cpf_random(amp, t, t, directions)
                per_scheme[scheme_name].append(value)
                rows.append(
                    {
                        "t": t,
                        "tau": t,
                        "directions": label,
                        "scheme": scheme_name,
                        "y_update": -1.0,
                        "cpf_value": value,
                    }
                )
        for scheme_name in SCHEMES:
            style = {"linestyle": "--"} if scheme_name == "random" else {}
            curves.append(
                Curve(grid, per_scheme[scheme_name], f"{scheme_name}, {label}", style)
            )
    header = ("t", "tau", "directions", "scheme", "y_update", "cpf_value")
    return header, rows, curves


def _fig1_panel_c() -> tuple[tuple[str, ...], list[dict], list[Curve]]:
    grid = _fig1_grid()
    thetas = (0.0, math.pi / 4, math.pi / 2)
    rows: list[dict] = []
    curves: list[Curve] = []
    for theta in thetas:
        per_curve: dict[tuple[str, float], list[float]] = {}
        for t in grid:
            for scheme_name in SCHEMES:
                for record in (1.0, -1.0):
                    if scheme_name == "deterministic":
                        value = dephasing_cpf_deterministic(
                            theta, t, t, 1.0, 1.0, record
                        )
                    else:
                        value = dephasing_cpf_random(theta, t, t, 1.0, 1.0, record)
                    per_curve.setdefault((scheme_name, record), []).append(value)
                    rows.append(
                        {
                            "t": t,
                            "tau": t,
                            "theta": theta,
                            "scheme": scheme_name,
                            "y_update": record,
                            "cpf_value": value,
                        }
                    )
        for (scheme_name, record), values in per_curve.items():
            style = {"linestyle": "--"} if scheme_name == "random" else {}
            curves.append(
                Curve(
                    grid,
                    values,
                    f"{scheme_name}, theta={theta:.3f}, record={record:+.0f}",
                    style,
                )
            )
    header = ("t", "tau", "theta", "scheme", "y_update", "cpf_value")
    return header, rows, curves


FIG1_PANELS = {
    "a": (_fig1_panel_a, "scaled time gamma t (= gamma tau)"),
    "b": (_fig1_panel_b, "time t (= tau), gamma = 1"),
    "c": (_fig1_panel_c, "scaled time omega_c t (= omega_c tau)"),
}


def cmd_fig1(args) -> int:
    builder, xlabel = FIG1_PANELS[args.panel]
    header, rows, curves = builder()
    _write_csv(args.out, header, rows)
    if not args.no_plot:
        _render_atomic(
            _figure_path(args.out),
            lambda p: render_curves(
                p,
                curves,
                xlabel=xlabel,
                ylabel="CPF correlation",
                title=f"panel ({args.panel})",
            ),
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bifscan",
        description=(
            "Detect bidirectional system-environment information flows via "
            "conditional past-future correlations."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fig = sub.add_parser("fig1", help="closed-form curves of the solvable models")
    fig.add_argument("panel", choices=sorted(FIG1_PANELS))
    fig.add_argument("--out", required=True, help="output CSV path")
    fig.add_argument(
        "--no-plot", action="store_true", help="skip the PNG next to the CSV"
    )
    fig.set_defaults(func=cmd_fig1)

    check = sub.add_parser(
        "check-bif", help="random-policy sweep; exit 1 when a BIF is detected"
    )
    check.add_argument("model", help="TOML model file")
    check.add_argument("--out", required=True, help="output CSV path")
    check.add_argument(
        "--threshold",
        type=float,
        default=1e-9,
        help="factorization-residual detection threshold (default 1e-9)",
    )
    check.add_argument("--plot", action="store_true", help="render a PNG too")
    check.set_defaults(func=cmd_check_bif)

    scan = sub.add_parser("scan", help="deterministic + random CPF scan")
    scan.add_argument("model", help="TOML model file")
    scan.add_argument("--out", required=True, help="output CSV path")
    scan.add_argument("--plot", action="store_true", help="render a PNG too")
    scan.set_defaults(func=cmd_scan)

    mc = sub.add_parser("mc", help="sampling run (requires the mc block)")
    mc.add_argument("model", help="TOML model file")
    mc.add_argument("--out", required=True, help="output CSV path")
    mc.add_argument("--plot", action="store_true", help="render a PNG too")
    mc.set_defaults(func=cmd_mc)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry_point() -> None:
    raise SystemExit(main())

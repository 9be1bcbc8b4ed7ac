"""TOML model files for the command-line frontend.

A model file declares exactly one dynamical model, a measurement scheme, and
an optional sampling block::

    [model.noise_ensemble]          # or model.bipartite, model.analytic.*
    weights = [0.5, 0.5]
    [[model.noise_ensemble.channels]]
    type = "pauli"
    axis = "x"
    rate = 1.0
    ...

    [scheme]
    t = [0.5, 1.0]                  # scalar or array
    tau = 1.0
    theta = [0.0, 0.7853981633974483]
    directions = ["x", "n", "x"]    # engine models only
    policy = "random"
    renewed = "intermediate"
    rho0 = "mixed"

    [mc]
    n_samples = 1000000
    seed = 7

The schema is validated before anything runs and unknown keys are rejected;
every violation raises :class:`ModelFileError` with the offending key path.
Measurements are restricted to qubit Bloch directions here (the library API
has no such restriction). Matrices are written as arrays of rows, either
real or split as ``{real = [[...]], imag = [[...]]}``.

The full schema is documented in the README.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .channels import (
    BipartiteModel,
    LindbladChannel,
    NoiseEnsemble,
    PauliChannel,
    UnitaryChannel,
)
from .linalg import DensityMatrix, density_matrix, maximally_mixed
from .measurements import (
    BlochDirection,
    MeasurementSet,
    UpdatePolicy,
    bloch_eigenstates,
    bloch_projectors,
)

__all__ = [
    "ModelFileError",
    "McConfig",
    "SchemeConfig",
    "ModelConfig",
    "load_model_file",
    "parse_model_document",
    "resolve_direction",
    "measurement_triple",
    "build_policy",
]

NAMED_DIRECTIONS = {
    "x": (math.pi / 2, 0.0),
    "y": (math.pi / 2, math.pi / 2),
    "z": (0.0, 0.0),
}

NAMED_STATES = {
    "z+": np.array([1.0, 0.0], dtype=complex),
    "z-": np.array([0.0, 1.0], dtype=complex),
    "x+": np.array([1.0, 1.0], dtype=complex) / math.sqrt(2),
    "x-": np.array([1.0, -1.0], dtype=complex) / math.sqrt(2),
    "y+": np.array([1.0, 1.0j], dtype=complex) / math.sqrt(2),
    "y-": np.array([1.0, -1.0j], dtype=complex) / math.sqrt(2),
}


class ModelFileError(ValueError):
    """Raised for any schema or semantic violation in a model file."""


def _require_table(doc, key: str, where: str) -> dict:
    value = doc.get(key)
    if not isinstance(value, dict):
        raise ModelFileError(f"{where}: missing or non-table key '{key}'")
    return value


def _reject_unknown(table: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(table) - allowed)
    if unknown:
        raise ModelFileError(f"{where}: unknown key(s) {', '.join(unknown)}")


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ModelFileError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _number_list(value, where: str, minimum: float | None = None) -> tuple[float, ...]:
    items = value if isinstance(value, list) else [value]
    if not items:
        raise ModelFileError(f"{where}: empty array")
    out = tuple(_number(v, where) for v in items)
    if minimum is not None and min(out) < minimum:
        raise ModelFileError(f"{where}: values must be >= {minimum}")
    return out


def _integer(value, where: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ModelFileError(f"{where}: expected an integer, got {value!r}")
    if value < minimum:
        raise ModelFileError(f"{where}: must be >= {minimum}")
    return value


def _matrix(value, where: str) -> np.ndarray:
    """A matrix as rows of numbers, or {real = rows, imag = rows}."""
    if isinstance(value, dict):
        _reject_unknown(value, {"real", "imag"}, where)
        if "real" not in value:
            raise ModelFileError(f"{where}: complex matrix needs a 'real' part")
        real = _matrix(value["real"], f"{where}.real")
        if "imag" in value:
            imag = _matrix(value["imag"], f"{where}.imag")
            if imag.shape != real.shape:
                raise ModelFileError(f"{where}: real/imag shapes differ")
            return real + 1j * imag
        return real
    if not isinstance(value, list) or not value:
        raise ModelFileError(f"{where}: expected an array of rows")
    rows = []
    width = None
    for i, row in enumerate(value):
        if not isinstance(row, list) or not row:
            raise ModelFileError(f"{where}: row {i} is not a non-empty array")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ModelFileError(f"{where}: ragged rows")
        rows.append([_number(v, f"{where}[{i}]") for v in row])
    return np.array(rows, dtype=complex)


def resolve_direction(spec: str, theta: float | None, where: str) -> BlochDirection:
    """A direction spec: named axis, tilted 'n' (requires theta), or
    'theta:phi' in radians."""
    if not isinstance(spec, str):
        raise ModelFileError(f"{where}: direction must be a string")
    if spec in NAMED_DIRECTIONS:
        return BlochDirection(*NAMED_DIRECTIONS[spec])
    if spec == "n":
        if theta is None:
            raise ModelFileError(
                f"{where}: direction 'n' requires scheme.theta values"
            )
        return BlochDirection(theta, 0.0)
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) == 2:
            try:
                theta_v, phi_v = float(parts[0]), float(parts[1])
            except ValueError as exc:
                raise ModelFileError(f"{where}: bad direction {spec!r}: {exc}") from exc
            try:
                return BlochDirection(theta_v, phi_v)
            except ValueError as exc:
                raise ModelFileError(f"{where}: {exc}") from exc
    raise ModelFileError(
        f"{where}: direction must be x, y, z, n, or 'theta:phi', got {spec!r}"
    )


@dataclass(frozen=True)
class McConfig:
    """Sampling block: trajectory count, seed, replica and worker counts."""

    n_samples: int
    seed: int
    n_replicas: int = 20
    n_workers: int = 1


@dataclass(frozen=True)
class SchemeConfig:
    """Measurement scheme declaration.

    ``direction_specs`` is None for analytic models (their measurement
    directions are fixed by the closed forms); ``theta_values`` is None when
    no scanned tilt applies.
    """

    t_values: tuple[float, ...]
    tau_values: tuple[float, ...]
    theta_values: tuple[float, ...] | None
    direction_specs: tuple[str, str, str] | None
    policy: str
    renewed: str
    update_probs: np.ndarray | None
    rho0: DensityMatrix

    @property
    def needs_theta(self) -> bool:
        return self.direction_specs is not None and "n" in self.direction_specs


@dataclass(frozen=True)
class ModelConfig:
    """A fully validated model file.

    ``kind`` is one of noise_ensemble, bipartite, eternal, dissipative,
    dephasing; ``engine`` is the constructed dynamics for the first two (and
    the ensemble realization for eternal), None otherwise; ``params`` holds
    the analytic-model parameters.
    """

    kind: str
    engine: NoiseEnsemble | BipartiteModel | None
    params: dict[str, float]
    scheme: SchemeConfig
    mc: McConfig | None


def measurement_triple(
    scheme: SchemeConfig, theta: float | None
) -> tuple[MeasurementSet, MeasurementSet, MeasurementSet]:
    """The three Bloch measurements of an engine scheme at a given tilt."""
    if scheme.direction_specs is None:
        raise ModelFileError("scheme.directions required for engine models")
    dirs = [
        resolve_direction(spec, theta, "scheme.directions")
        for spec in scheme.direction_specs
    ]
    mx, my, mz = (bloch_projectors(d) for d in dirs)
    return mx, my, mz


def build_policy(
    scheme: SchemeConfig, my: MeasurementSet, theta: float | None
) -> UpdatePolicy:
    """The random update policy declared by the scheme.

    ``renewed = "intermediate"`` renews to the intermediate-measurement
    eigenstates; a direction spec renews to that direction's eigenstates.
    Probabilities default to 1/2 independent of the first outcome.
    """
    if scheme.renewed == "intermediate":
        states = tuple(density_matrix(op) for op in my.operators)
    else:
        direction = resolve_direction(scheme.renewed, theta, "scheme.renewed")
        states = bloch_eigenstates(direction)
    probs = (
        np.full((2, 2), 0.5)
        if scheme.update_probs is None
        else scheme.update_probs
    )
    return UpdatePolicy.random(states, probs)


def _parse_rho0(value, where: str) -> DensityMatrix:
    if value is None or value == "mixed":
        return maximally_mixed((2,))
    if isinstance(value, str):
        vec = NAMED_STATES.get(value)
        if vec is None:
            raise ModelFileError(
                f"{where}: expected one of {sorted(NAMED_STATES)}, 'mixed', "
                f"or a matrix, got {value!r}"
            )
        return density_matrix(np.outer(vec, vec.conj()))
    mat = _matrix(value, where)
    if mat.shape != (2, 2):
        raise ModelFileError(f"{where}: initial state must be 2x2")
    try:
        return density_matrix(mat)
    except ValueError as exc:
        raise ModelFileError(f"{where}: {exc}") from exc


def _parse_channel(entry, index: int) -> PauliChannel | UnitaryChannel | LindbladChannel:
    where = f"model.noise_ensemble.channels[{index}]"
    if not isinstance(entry, dict):
        raise ModelFileError(f"{where}: expected a table")
    ctype = entry.get("type")
    try:
        if ctype == "pauli":
            _reject_unknown(entry, {"type", "axis", "rate"}, where)
            return PauliChannel(
                axis=entry.get("axis"), rate=_number(entry.get("rate"), f"{where}.rate")
            )
        if ctype == "unitary":
            _reject_unknown(entry, {"type", "hamiltonian"}, where)
            h = _matrix(entry.get("hamiltonian"), f"{where}.hamiltonian")
            if h.shape != (2, 2):
                raise ModelFileError(f"{where}: qubit Hamiltonian must be 2x2")
            return UnitaryChannel(h)
        if ctype == "lindblad":
            _reject_unknown(entry, {"type", "hamiltonian", "jump_operators"}, where)
            h = (
                _matrix(entry["hamiltonian"], f"{where}.hamiltonian")
                if "hamiltonian" in entry
                else np.zeros((2, 2))
            )
            jumps = [
                _matrix(j, f"{where}.jump_operators[{k}]")
                for k, j in enumerate(entry.get("jump_operators", []))
            ]
            if h.shape != (2, 2) or any(j.shape != (2, 2) for j in jumps):
                raise ModelFileError(f"{where}: qubit operators must be 2x2")
            return LindbladChannel.from_operators(h, jumps)
    except ModelFileError:
        raise
    except ValueError as exc:
        raise ModelFileError(f"{where}: {exc}") from exc
    raise ModelFileError(
        f"{where}: type must be pauli, unitary, or lindblad, got {ctype!r}"
    )


def _parse_noise_ensemble(table: dict) -> NoiseEnsemble:
    where = "model.noise_ensemble"
    _reject_unknown(table, {"weights", "channels"}, where)
    weights = _number_list(table.get("weights"), f"{where}.weights", minimum=0.0)
    channels = table.get("channels")
    if not isinstance(channels, list) or not channels:
        raise ModelFileError(f"{where}.channels: expected a non-empty array of tables")
    parsed = tuple(_parse_channel(c, i) for i, c in enumerate(channels))
    try:
        return NoiseEnsemble(weights=weights, channels=parsed)
    except ValueError as exc:
        raise ModelFileError(f"{where}: {exc}") from exc


def _parse_bipartite(table: dict) -> BipartiteModel:
    where = "model.bipartite"
    kind = table.get("kind", "unitary")
    try:
        if kind == "unitary":
            _reject_unknown(table, {"kind", "h_s", "h_e", "h_i", "sigma0"}, where)
            h_s = _matrix(table.get("h_s"), f"{where}.h_s")
            h_e = _matrix(table.get("h_e"), f"{where}.h_e")
            h_i = _matrix(table.get("h_i"), f"{where}.h_i")
            if h_s.shape != (2, 2):
                raise ModelFileError(f"{where}.h_s: system must be a qubit (2x2)")
            sigma0 = density_matrix(_matrix(table.get("sigma0"), f"{where}.sigma0"))
            return BipartiteModel.unitary(h_s, h_e, h_i, sigma0)
        if kind == "lindblad":
            _reject_unknown(
                table,
                {"kind", "dims", "sigma0", "hamiltonian", "jump_operators"},
                where,
            )
            dims_raw = table.get("dims")
            if (
                not isinstance(dims_raw, list)
                or len(dims_raw) != 2
                or not all(isinstance(d, int) for d in dims_raw)
            ):
                raise ModelFileError(f"{where}.dims: expected [d_system, d_environment]")
            dims = (dims_raw[0], dims_raw[1])
            if dims[0] != 2:
                raise ModelFileError(f"{where}.dims: system must be a qubit")
            sigma0 = density_matrix(_matrix(table.get("sigma0"), f"{where}.sigma0"))
            hamiltonian = (
                _matrix(table["hamiltonian"], f"{where}.hamiltonian")
                if "hamiltonian" in table
                else None
            )
            jumps = [
                _matrix(j, f"{where}.jump_operators[{k}]")
                for k, j in enumerate(table.get("jump_operators", []))
            ]
            return BipartiteModel.lindblad(
                dims=dims,
                sigma0=sigma0,
                hamiltonian=hamiltonian,
                jump_operators=jumps,
            )
    except ModelFileError:
        raise
    except ValueError as exc:
        raise ModelFileError(f"{where}: {exc}") from exc
    raise ModelFileError(f"{where}.kind: must be unitary or lindblad, got {kind!r}")


def _parse_analytic(table: dict) -> tuple[str, dict[str, float]]:
    _reject_unknown(table, {"eternal", "dissipative", "dephasing"}, "model.analytic")
    if len(table) != 1:
        raise ModelFileError("model.analytic: declare exactly one analytic model")
    kind, sub = next(iter(table.items()))
    where = f"model.analytic.{kind}"
    if not isinstance(sub, dict):
        raise ModelFileError(f"{where}: expected a table")
    if kind == "eternal":
        _reject_unknown(sub, {"gamma"}, where)
        return kind, {"gamma": _number(sub.get("gamma"), f"{where}.gamma")}
    if kind == "dissipative":
        _reject_unknown(sub, {"gamma", "tau_c", "step", "directions"}, where)
        directions = sub.get("directions", "zzz")
        if directions not in ("zzz", "xzx"):
            raise ModelFileError(f"{where}.directions: must be 'zzz' or 'xzx'")
        params = {
            "gamma": _number(sub.get("gamma"), f"{where}.gamma"),
            "tau_c": _number(sub.get("tau_c"), f"{where}.tau_c"),
            "step": _number(sub.get("step", 2e-3), f"{where}.step"),
            "directions": directions,
        }
        if params["step"] <= 0:
            raise ModelFileError(f"{where}.step: must be positive")
        return kind, params
    _reject_unknown(sub, {"omega_c", "coupling"}, where)
    return kind, {
        "omega_c": _number(sub.get("omega_c"), f"{where}.omega_c"),
        "coupling": _number(sub.get("coupling", 1.0), f"{where}.coupling"),
    }


def _parse_scheme(table: dict, kind: str) -> SchemeConfig:
    where = "scheme"
    _reject_unknown(
        table,
        {"t", "tau", "theta", "directions", "policy", "renewed", "update_probs", "rho0"},
        where,
    )
    if "t" not in table or "tau" not in table:
        raise ModelFileError(f"{where}: 't' and 'tau' are required")
    t_values = _number_list(table["t"], f"{where}.t", minimum=0.0)
    tau_values = _number_list(table["tau"], f"{where}.tau", minimum=0.0)
    theta_values: tuple[float, ...] | None = None
    if "theta" in table:
        theta_values = _number_list(table["theta"], f"{where}.theta")
        for v in theta_values:
            if not 0.0 <= v <= math.pi:
                raise ModelFileError(f"{where}.theta: values must lie in [0, pi]")
    direction_specs = None
    analytic = kind in ("eternal", "dissipative", "dephasing")
    if "directions" in table:
        if analytic:
            raise ModelFileError(
                f"{where}.directions: analytic models fix their own measurement "
                "directions (the dissipative variant is chosen via "
                "model.analytic.dissipative.directions)"
            )
        raw = table["directions"]
        if not isinstance(raw, list) or len(raw) != 3:
            raise ModelFileError(f"{where}.directions: expected three entries")
        for i, spec in enumerate(raw):
            resolve_direction(spec, 0.0, f"{where}.directions[{i}]")
        direction_specs = (raw[0], raw[1], raw[2])
    policy = table.get("policy", "random")
    if policy not in ("deterministic", "random"):
        raise ModelFileError(f"{where}.policy: must be deterministic or random")
    renewed = table.get("renewed", "intermediate")
    if renewed != "intermediate":
        if analytic:
            raise ModelFileError(
                f"{where}.renewed: the closed forms renew to the "
                "intermediate-measurement eigenstates"
            )
        resolve_direction(renewed, 0.0, f"{where}.renewed")
    update_probs = None
    if "update_probs" in table:
        if kind in ("dissipative", "dephasing"):
            raise ModelFileError(
                f"{where}.update_probs: these closed forms fix the renewal "
                "probabilities at 1/2"
            )
        probs = _matrix(table["update_probs"], f"{where}.update_probs")
        if probs.shape != (2, 2) or np.abs(probs.imag).max() > 0:
            raise ModelFileError(f"{where}.update_probs: expected a real 2x2 table")
        update_probs = probs.real
        if update_probs.min() < 0 or np.abs(update_probs.sum(0) - 1.0).max() > 1e-9:
            raise ModelFileError(
                f"{where}.update_probs: columns are distributions over the "
                "renewed label and must each sum to 1"
            )
    if "rho0" in table and analytic:
        raise ModelFileError(
            f"{where}.rho0: analytic closed forms fix the initial state"
        )
    rho0 = _parse_rho0(table.get("rho0"), f"{where}.rho0")
    # Tilted directions and tilt-parametrized closed forms need theta.
    needs_theta = kind in ("eternal", "dephasing") or (
        direction_specs is not None and "n" in direction_specs
    )
    if needs_theta and theta_values is None:
        raise ModelFileError(f"{where}.theta: required for this model/directions")
    if kind == "dissipative" and theta_values is not None:
        raise ModelFileError(
            f"{where}.theta: the dissipative closed forms take no tilt"
        )
    return SchemeConfig(
        t_values=t_values,
        tau_values=tau_values,
        theta_values=theta_values,
        direction_specs=direction_specs,
        policy=policy,
        renewed=renewed,
        update_probs=update_probs,
        rho0=rho0,
    )


def _parse_mc(table: dict) -> McConfig:
    where = "mc"
    _reject_unknown(table, {"n_samples", "seed", "n_replicas", "n_workers"}, where)
    if "n_samples" not in table or "seed" not in table:
        raise ModelFileError(f"{where}: 'n_samples' and 'seed' are required")
    return McConfig(
        n_samples=_integer(table["n_samples"], f"{where}.n_samples", minimum=1),
        seed=_integer(table["seed"], f"{where}.seed", minimum=0),
        n_replicas=_integer(table.get("n_replicas", 20), f"{where}.n_replicas", 2),
        n_workers=_integer(table.get("n_workers", 1), f"{where}.n_workers", 1),
    )


def parse_model_document(doc: dict) -> ModelConfig:
    """Validate a parsed TOML document into a model configuration."""
    if not isinstance(doc, dict):
        raise ModelFileError("model file must be a TOML table")
    _reject_unknown(doc, {"model", "scheme", "mc"}, "top level")
    model_table = _require_table(doc, "model", "top level")
    _reject_unknown(
        model_table, {"noise_ensemble", "bipartite", "analytic"}, "model"
    )
    if len(model_table) != 1:
        raise ModelFileError("model: declare exactly one model")
    model_key, model_value = next(iter(model_table.items()))
    if not isinstance(model_value, dict):
        raise ModelFileError(f"model.{model_key}: expected a table")
    engine: NoiseEnsemble | BipartiteModel | None = None
    params: dict[str, float] = {}
    if model_key == "noise_ensemble":
        kind = "noise_ensemble"
        engine = _parse_noise_ensemble(model_value)
    elif model_key == "bipartite":
        kind = "bipartite"
        engine = _parse_bipartite(model_value)
    else:
        kind, params = _parse_analytic(model_value)
    scheme = _parse_scheme(_require_table(doc, "scheme", "top level"), kind)
    mc = _parse_mc(doc["mc"]) if "mc" in doc else None
    if mc is not None and kind in ("dissipative", "dephasing"):
        raise ModelFileError(
            "mc: sampling requires a stochastic realization "
            "(noise_ensemble, bipartite, or the eternal model)"
        )
    return ModelConfig(kind=kind, engine=engine, params=params, scheme=scheme, mc=mc)


def load_model_file(path: str) -> ModelConfig:
    """Parse and validate a TOML model file."""
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ModelFileError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ModelFileError(f"{path}: TOML syntax error: {exc}") from exc
    return parse_model_document(doc)

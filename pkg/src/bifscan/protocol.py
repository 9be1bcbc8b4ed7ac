"""Three-measurement protocol engines.

The protocol measures the system at times 0, t, and t+tau (outcomes x, y, z)
and, right after the intermediate measurement, applies an update policy that
replaces the system state and emits the update record ytilde. The result is
the joint distribution P(z, ytilde, y, x), tabulated here by two engines:

- ensemble (:func:`joint_distribution_ensemble`): dynamics given as a
  :class:`~bifscan.channels.NoiseEnsemble`. Conditioned on the realization,
  the final segment depends on the past only through the renewed state, so
  the joint factorizes into per-realization stage tables; those tables are
  exposed (:func:`stage_tables_ensemble`) and reused for trajectory sampling.
- bipartite (:func:`joint_distribution_bipartite`): explicit
  system+environment dynamics. The environment is conditioned exactly on
  (y, x) and carried through the update, which renews the system factor only.

Both engines require the intermediate measurement to be rank-1 projective:
that makes the post-measurement state the measured eigenstate and, in the
bipartite case, factorizes the joint state at the update.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .channels import BipartiteModel, NoiseEnsemble
from .linalg import DensityMatrix, density_matrix, partial_trace, tensor
from .measurements import (
    ZERO_PROB_TOL,
    MeasurementSet,
    UpdatePolicy,
    ZeroProbabilityBranchError,
)

__all__ = [
    "ProtocolSpec",
    "JointDistribution",
    "StageTables",
    "renewed_states",
    "policy_table",
    "stage_tables_ensemble",
    "joint_distribution_ensemble",
    "joint_distribution_bipartite",
]

logger = logging.getLogger(__name__)

# Engine output can dip this far below zero from roundoff before clamping.
NEG_PROB_TOL = -1e-14
TOTAL_PROB_TOL = 1e-10


@dataclass(frozen=True)
class ProtocolSpec:
    """Initial state, the three measurements, and the update policy.

    Parameters
    ----------
    rho0 : DensityMatrix
        System state at the first measurement.
    mx, my, mz : MeasurementSet
        First, intermediate, and final measurements, all on the system.
        ``my`` must be rank-1 projective.
    policy : UpdatePolicy
        Update rule applied after the intermediate measurement.
    """

    rho0: DensityMatrix
    mx: MeasurementSet
    my: MeasurementSet
    mz: MeasurementSet
    policy: UpdatePolicy

    def __post_init__(self) -> None:
        d = self.rho0.dim
        for name, mset in (("mx", self.mx), ("my", self.my), ("mz", self.mz)):
            if mset.dim != d:
                raise ValueError(f"{name} dim {mset.dim} != state dim {d}")
        if not self.my.is_projective_rank1():
            raise ValueError(
                "the intermediate measurement must be rank-1 projective"
            )
        if self.policy.variant == "random":
            for state in self.policy.renewed_states:
                if state.dim != d:
                    raise ValueError("renewed states must match the system dim")
            if self.policy.update_probs.shape[1] != self.mx.n_outcomes:
                raise ValueError(
                    "update_probs needs one column per first-measurement outcome"
                )


def renewed_states(spec: ProtocolSpec) -> tuple[DensityMatrix, ...]:
    """States fed into the final segment, indexed by the update record.

    Deterministic policy: the intermediate eigenstates (record equals the
    intermediate outcome). Random policy: the policy's renewed states.
    """
    if spec.policy.variant == "deterministic":
        return tuple(density_matrix(op) for op in spec.my.operators)
    return spec.policy.renewed_states


def policy_table(spec: ProtocolSpec) -> tuple[np.ndarray, tuple[float, ...]]:
    """Conditional table p[ytilde, y, x] and the update-record labels."""
    n_y = spec.my.n_outcomes
    n_x = spec.mx.n_outcomes
    if spec.policy.variant == "deterministic":
        table = np.zeros((n_y, n_y, n_x))
        for j in range(n_y):
            table[j, j, :] = 1.0
        return table, spec.my.outcome_values
    probs = spec.policy.update_probs
    table = np.broadcast_to(
        probs[:, None, :], (probs.shape[0], n_y, n_x)
    ).copy()
    return table, spec.policy.update_labels


@dataclass(frozen=True)
class JointDistribution:
    """Joint distribution of the protocol, indexed ``[z, ytilde, y, x]``.

    Tiny negative entries above -1e-14 are clamped to zero on construction;
    the total must be 1 within 1e-10.
    """

    probs: np.ndarray
    z_values: tuple[float, ...]
    yt_values: tuple[float, ...]
    y_values: tuple[float, ...]
    x_values: tuple[float, ...]

    def __post_init__(self) -> None:
        p = np.asarray(self.probs, dtype=float)
        shape = (
            len(self.z_values),
            len(self.yt_values),
            len(self.y_values),
            len(self.x_values),
        )
        if p.shape != shape:
            raise ValueError(f"probs shape {p.shape} != value axes {shape}")
        low = float(p.min(initial=0.0))
        if low < NEG_PROB_TOL:
            raise ValueError(f"probability {low:.3e} below -1e-14")
        if low < 0.0:
            logger.debug("clamping negative probabilities at %.3e", low)
            p = np.clip(p, 0.0, None)
        total = float(p.sum())
        if abs(total - 1.0) > TOTAL_PROB_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1 within 1e-10")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "z_values", tuple(float(v) for v in self.z_values))
        object.__setattr__(self, "yt_values", tuple(float(v) for v in self.yt_values))
        object.__setattr__(self, "y_values", tuple(float(v) for v in self.y_values))
        object.__setattr__(self, "x_values", tuple(float(v) for v in self.x_values))

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.probs.shape

    def marginal_x(self) -> np.ndarray:
        return self.probs.sum(axis=(0, 1, 2))

    def marginal_yt(self) -> np.ndarray:
        return self.probs.sum(axis=(0, 2, 3))

    def joint_zx_given_yt(self, yt_index: int) -> np.ndarray:
        """P(z, x | ytilde) as an (n_z, n_x) table.

        Raises
        ------
        ZeroProbabilityBranchError
            If P(ytilde) is below 1e-14.
        """
        branch = self.probs[:, yt_index, :, :].sum(axis=1)
        p_yt = float(branch.sum())
        if p_yt < ZERO_PROB_TOL:
            raise ZeroProbabilityBranchError(
                f"update record {yt_index} has probability {p_yt:.3e} < 1e-14"
            )
        return branch / p_yt


@dataclass(frozen=True)
class StageTables:
    """Per-realization chain tables of the ensemble engine.

    The joint distribution factorizes as

        P(z, ytilde, y, x) =
            sum_a weights[a] * pz_given_yt[a, z, ytilde]
                 * policy[ytilde, y, x] * py_given_x[a, y, x] * p_x[x]

    and :meth:`joint` evaluates exactly that contraction, so trajectory
    sampling driven by these tables targets the same distribution as the
    exact engine. Conditionals on branches with probability below 1e-14 are
    filled uniformly; they carry at most that much mass.
    """

    weights: np.ndarray
    p_x: np.ndarray
    py_given_x: np.ndarray
    policy: np.ndarray
    pz_given_yt: np.ndarray
    z_values: tuple[float, ...]
    yt_values: tuple[float, ...]
    y_values: tuple[float, ...]
    x_values: tuple[float, ...]

    def joint(self) -> JointDistribution:
        probs = np.einsum(
            "a,azw,wyx,ayx,x->zwyx",
            self.weights,
            self.pz_given_yt,
            self.policy,
            self.py_given_x,
            self.p_x,
            optimize=True,
        )
        return JointDistribution(
            probs=probs,
            z_values=self.z_values,
            yt_values=self.yt_values,
            y_values=self.y_values,
            x_values=self.x_values,
        )


def _born_rule(effects: tuple[np.ndarray, ...], mat: np.ndarray) -> np.ndarray:
    return np.array([float(np.trace(e @ mat).real) for e in effects])


def stage_tables_ensemble(
    ensemble: NoiseEnsemble, spec: ProtocolSpec, t: float, tau: float
) -> StageTables:
    """Chain tables for the protocol under a noise ensemble."""
    if t < 0.0 or tau < 0.0:
        raise ValueError("segment durations must be nonnegative")
    n_ch = ensemble.n_channels
    n_x = spec.mx.n_outcomes
    n_y = spec.my.n_outcomes
    n_z = spec.mz.n_outcomes
    renewals = renewed_states(spec)
    policy, yt_values = policy_table(spec)
    n_yt = len(renewals)

    # First measurement: unnormalized branch states and their probabilities.
    branch_x = [op @ spec.rho0.mat @ op.conj().T for op in spec.mx.operators]
    p_x = np.array([float(b.trace().real) for b in branch_x])
    effects_y = spec.my.effects()
    effects_z = spec.mz.effects()

    py_given_x = np.empty((n_ch, n_y, n_x))
    pz_given_yt = np.empty((n_ch, n_z, n_yt))
    for a, channel in enumerate(ensemble.channels):
        for i, branch in enumerate(branch_x):
            if p_x[i] < ZERO_PROB_TOL:
                py_given_x[a, :, i] = 1.0 / n_y
                continue
            evolved = channel.propagate_mat(branch / p_x[i], 0.0, t)
            py_given_x[a, :, i] = _born_rule(effects_y, evolved)
        for j, state in enumerate(renewals):
            evolved = channel.propagate_mat(state.mat, t, t + tau)
            pz_given_yt[a, :, j] = _born_rule(effects_z, evolved)

    return StageTables(
        weights=np.asarray(ensemble.weights, dtype=float),
        p_x=p_x,
        py_given_x=py_given_x,
        policy=policy,
        pz_given_yt=pz_given_yt,
        z_values=spec.mz.outcome_values,
        yt_values=yt_values,
        y_values=spec.my.outcome_values,
        x_values=spec.mx.outcome_values,
    )


def joint_distribution_ensemble(
    ensemble: NoiseEnsemble, spec: ProtocolSpec, t: float, tau: float
) -> JointDistribution:
    """Exact protocol distribution under a noise ensemble."""
    return stage_tables_ensemble(ensemble, spec, t, tau).joint()


def joint_distribution_bipartite(
    model: BipartiteModel, spec: ProtocolSpec, t: float, tau: float
) -> JointDistribution:
    """Exact protocol distribution under explicit system+environment dynamics.

    The environment is conditioned on the first two outcomes: after the
    intermediate measurement the joint state is (eigenstate) (x) sigma_e(y, x),
    the update replaces the system factor by the renewed state, and the final
    segment evolves the composite. Branches with P(y, x) below 1e-14 carry an
    undefined environment state and are assigned zero probability.
    """
    if t < 0.0 or tau < 0.0:
        raise ValueError("segment durations must be nonnegative")
    d_s, d_e = model.dims
    if spec.rho0.dim != d_s:
        raise ValueError(f"state dim {spec.rho0.dim} != system dim {d_s}")
    renewals = renewed_states(spec)
    policy, yt_values = policy_table(spec)
    n_x = spec.mx.n_outcomes
    n_y = spec.my.n_outcomes
    n_z = spec.mz.n_outcomes
    n_yt = len(renewals)
    eye_e = np.eye(d_e)
    ops_x = [tensor(op, eye_e) for op in spec.mx.operators]
    ops_y = [tensor(op, eye_e) for op in spec.my.operators]
    effects_z = [tensor(e, eye_e) for e in spec.mz.effects()]

    probs = np.zeros((n_z, n_yt, n_y, n_x))
    joint0 = tensor(spec.rho0.mat, model.sigma0.mat)
    for i, op_x in enumerate(ops_x):
        branch_x = op_x @ joint0 @ op_x.conj().T
        if float(branch_x.trace().real) < ZERO_PROB_TOL:
            continue
        evolved = model.propagate_mat(branch_x, 0.0, t)
        for k, op_y in enumerate(ops_y):
            branch_yx = op_y @ evolved @ op_y.conj().T
            p_yx = float(branch_yx.trace().real)
            if p_yx < ZERO_PROB_TOL:
                continue
            # Rank-1 projective y: the branch is (eigenstate) (x) sigma_e.
            sigma_e = partial_trace(branch_yx, (d_s, d_e), keep=1) / p_yx
            for j, renewal in enumerate(renewals):
                weight = policy[j, k, i]
                if weight == 0.0:
                    continue
                renewed = tensor(renewal.mat, sigma_e)
                final = model.propagate_mat(renewed, t, t + tau)
                pz = _born_rule(tuple(effects_z), final)
                probs[:, j, k, i] += pz * (weight * p_yx)
    return JointDistribution(
        probs=probs,
        z_values=spec.mz.outcome_values,
        yt_values=yt_values,
        y_values=spec.my.outcome_values,
        x_values=spec.mx.outcome_values,
    )

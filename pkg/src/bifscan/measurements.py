"""Projective qubit measurements, general measurement sets, and update policies.

A measurement is a family of operators {Omega_i} with completeness
sum_i Omega_i^dag Omega_i = I; outcome probabilities follow the Born rule
P(i) = Tr(Omega_i^dag Omega_i rho) and the post-measurement state is
Omega_i rho Omega_i^dag / P(i).

The intermediate-measurement update policy is the rule that replaces the
post-measurement system state before the final evolution stage: the
deterministic variant keeps the measured eigenstate, the random variant draws
a renewed state with probabilities that may depend only on the *first*
outcome. A nonzero past-future correlation under the random variant witnesses
a bidirectional system-environment information flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .linalg import DensityMatrix, as_operator, density_matrix

__all__ = [
    "COMPLETENESS_TOL",
    "ZERO_PROB_TOL",
    "BlochDirection",
    "X_DIR",
    "Y_DIR",
    "Z_DIR",
    "MeasurementSet",
    "UpdatePolicy",
    "ZeroProbabilityBranchError",
    "bloch_projectors",
    "bloch_eigenstates",
    "apply_measurement",
    "check_env_measurement_invariance",
    "uniform_random_policy",
]

COMPLETENESS_TOL = 1e-10
# Below this, a measurement branch carries no defined post-state.
ZERO_PROB_TOL = 1e-14


class ZeroProbabilityBranchError(ValueError):
    """Raised when a measurement outcome has probability below 1e-14."""


@dataclass(frozen=True)
class BlochDirection:
    """A unit direction on the Bloch sphere.

    Parameters
    ----------
    theta : float
        Polar angle in radians, in [0, pi].
    phi : float
        Azimuthal angle in radians.
    """

    theta: float
    phi: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise ValueError("angles must be finite")

    @property
    def unit_vector(self) -> np.ndarray:
        """Cartesian components (sin t cos p, sin t sin p, cos t)."""
        st = math.sin(self.theta)
        return np.array(
            [st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)]
        )


X_DIR = BlochDirection(math.pi / 2, 0.0)
Y_DIR = BlochDirection(math.pi / 2, math.pi / 2)
Z_DIR = BlochDirection(0.0, 0.0)


@dataclass(frozen=True)
class MeasurementSet:
    """A family of measurement operators with per-outcome observable values.

    Parameters
    ----------
    operators : tuple of numpy.ndarray
        Operators {Omega_i}; completeness sum Omega^dag Omega = I is enforced
        within 1e-10.
    outcome_values : tuple of float
        Scalar observable value O_i attached to each outcome.
    """

    operators: tuple[np.ndarray, ...]
    outcome_values: tuple[float, ...]

    def __post_init__(self) -> None:
        ops = tuple(as_operator(op) for op in self.operators)
        if not ops:
            raise ValueError("measurement set needs at least one operator")
        d = ops[0].shape[0]
        for op in ops:
            if op.shape != (d, d):
                raise ValueError("all measurement operators must be square and same-dim")
            op.setflags(write=False)
        vals = tuple(float(v) for v in self.outcome_values)
        if len(vals) != len(ops):
            raise ValueError(
                f"{len(vals)} outcome values for {len(ops)} operators"
            )
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("outcome values must be finite")
        total = sum(op.conj().T @ op for op in ops)
        if np.abs(total - np.eye(d)).max() > COMPLETENESS_TOL:
            raise ValueError("operators violate completeness within 1e-10")
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "outcome_values", vals)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.operators)

    def effects(self) -> tuple[np.ndarray, ...]:
        """The POVM effects E_i = Omega_i^dag Omega_i."""
        return tuple(op.conj().T @ op for op in self.operators)

    def is_projective_rank1(self, tol: float = 1e-10) -> bool:
        """True iff every operator is a rank-1 orthogonal projector."""
        for op in self.operators:
            if np.abs(op - op.conj().T).max() > tol:
                return False
            if np.abs(op @ op - op).max() > tol:
                return False
            if abs(op.trace() - 1.0) > tol:
                return False
        return True


def bloch_projectors(n: BlochDirection) -> MeasurementSet:
    """Projective qubit measurement along a Bloch direction.

    Returns the rank-1 projectors onto the +-1 eigenstates of n.sigma with
    outcome values (+1, -1). The eigenvectors are
    |n+> = cos(t/2)|0> + e^{i p} sin(t/2)|1> and
    |n-> = sin(t/2)|0> - e^{i p} cos(t/2)|1>.
    """
    half = n.theta / 2.0
    phase = np.exp(1j * n.phi)
    v_plus = np.array([math.cos(half), phase * math.sin(half)])
    v_minus = np.array([math.sin(half), -phase * math.cos(half)])
    return MeasurementSet(
        operators=(np.outer(v_plus, v_plus.conj()), np.outer(v_minus, v_minus.conj())),
        outcome_values=(1.0, -1.0),
    )


def apply_measurement(
    rho: DensityMatrix, mset: MeasurementSet, outcome: int
) -> tuple[float, DensityMatrix]:
    """Born-rule probability and post-measurement state for one outcome.

    Raises
    ------
    ZeroProbabilityBranchError
        If the outcome probability is below 1e-14 (no post-state defined).
    """
    if mset.dim != rho.dim:
        raise ValueError(f"measurement dim {mset.dim} != state dim {rho.dim}")
    op = mset.operators[outcome]
    post = op @ rho.mat @ op.conj().T
    prob = float(post.trace().real)
    if prob < ZERO_PROB_TOL:
        raise ZeroProbabilityBranchError(
            f"outcome {outcome} has probability {prob:.3e} < 1e-14"
        )
    return prob, density_matrix(post / prob, rho.dims)


def check_env_measurement_invariance(
    sigma: DensityMatrix, mset: MeasurementSet, tol: float = 1e-10
) -> bool:
    """True iff the non-selective measurement leaves ``sigma`` unchanged.

    Checks ||sum_i Omega_i sigma Omega_i^dag - sigma||_max <= tol. For an
    environment measurement this is the condition under which adding the
    measurement does not disturb the reduced dynamics.
    """
    if mset.dim != sigma.dim:
        raise ValueError(f"measurement dim {mset.dim} != state dim {sigma.dim}")
    total = sum(op @ sigma.mat @ op.conj().T for op in mset.operators)
    return bool(np.abs(total - sigma.mat).max() <= tol)


@dataclass(frozen=True)
class UpdatePolicy:
    """The intermediate state-update rule of the three-measurement scheme.

    Two variants:

    - ``deterministic``: the update keeps the measured state (the renewed
      state equals the intermediate post-measurement eigenstate).
    - ``random``: the renewed state is drawn from ``renewed_states`` with
      probabilities ``update_probs[j, x]`` that depend only on the first
      outcome ``x``; each column sums to 1.

    ``update_labels`` names the renewed-state axis in joint tables; defaults
    to (+1, -1) for two states, else 0..n-1.
    """

    variant: Literal["deterministic", "random"]
    renewed_states: tuple[DensityMatrix, ...] | None = None
    update_probs: np.ndarray | None = None
    update_labels: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.variant == "deterministic":
            if self.renewed_states is not None or self.update_probs is not None:
                raise ValueError("deterministic policy carries no renewal data")
            return
        if self.variant != "random":
            raise ValueError(f"unknown policy variant {self.variant!r}")
        if not self.renewed_states:
            raise ValueError("random policy requires renewed states")
        states = tuple(self.renewed_states)
        probs = np.asarray(self.update_probs, dtype=float)
        if probs.ndim != 2 or probs.shape[0] != len(states):
            raise ValueError(
                "update_probs must have one row per renewed state, "
                f"got shape {probs.shape} for {len(states)} states"
            )
        if probs.min(initial=0.0) < 0.0:
            raise ValueError("update probabilities must be nonnegative")
        colsums = probs.sum(axis=0)
        if np.abs(colsums - 1.0).max() > 1e-12:
            raise ValueError("update_probs columns must each sum to 1 within 1e-12")
        if self.update_labels is None:
            labels = (1.0, -1.0) if len(states) == 2 else tuple(
                float(j) for j in range(len(states))
            )
        else:
            labels = tuple(float(v) for v in self.update_labels)
            if len(labels) != len(states):
                raise ValueError("one update label per renewed state required")
        probs.setflags(write=False)
        object.__setattr__(self, "renewed_states", states)
        object.__setattr__(self, "update_probs", probs)
        object.__setattr__(self, "update_labels", labels)

    @classmethod
    def deterministic(cls) -> "UpdatePolicy":
        return cls(variant="deterministic")

    @classmethod
    def random(
        cls,
        renewed_states: tuple[DensityMatrix, ...],
        update_probs,
        update_labels: tuple[float, ...] | None = None,
    ) -> "UpdatePolicy":
        return cls(
            variant="random",
            renewed_states=tuple(renewed_states),
            update_probs=np.asarray(update_probs, dtype=float),
            update_labels=update_labels,
        )


def bloch_eigenstates(n: BlochDirection) -> tuple[DensityMatrix, DensityMatrix]:
    """The +-1 eigenstates of a Bloch-direction observable as states."""
    mset = bloch_projectors(n)
    return density_matrix(mset.operators[0]), density_matrix(mset.operators[1])


def uniform_random_policy(my: MeasurementSet, n_x: int = 2) -> UpdatePolicy:
    """Random policy renewing to the intermediate-measurement eigenstates
    with uniform probabilities 1/n, independent of the first outcome.
    """
    if not my.is_projective_rank1():
        raise ValueError("renewal to eigenstates requires a projective rank-1 set")
    states = tuple(density_matrix(op) for op in my.operators)
    n = len(states)
    probs = np.full((n, n_x), 1.0 / n)
    return UpdatePolicy.random(states, probs)

"""Conditional past-future correlations and the factorization residual.

Given the protocol joint distribution, condition on the update record and
compare the joint past-future conditional P(z, x | ytilde) with the product
of its marginals:

- the correlation C(ytilde) weights the difference by the outcome values,
  C = sum_{z,x} O_z O_x [P(z, x | ytilde) - P(z | ytilde) P(x | ytilde)];
- the residual is the max-norm of the difference itself, which bounds every
  outcome-weighted correlation and is zero iff past and future are
  conditionally independent.

Under the random update policy the renewed state severs the system-side
memory, so any nonzero correlation (or residual) witnesses information that
returned from the environment: a bidirectional system-environment
information flow. Under the deterministic policy a nonzero value only
witnesses memory of either kind.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .protocol import JointDistribution

__all__ = [
    "CpfResult",
    "cpf_correlation",
    "markov_residual",
    "cpf_summary",
    "table3_summary",
]


@dataclass(frozen=True)
class CpfResult:
    """Per-record conditional past-future summary.

    Attributes
    ----------
    yt_values : tuple of float
        Update-record labels, in table order.
    p_yt : numpy.ndarray
        Probability of each record.
    correlations : numpy.ndarray
        C(ytilde) for each record; NaN where the record has probability
        below 1e-14.
    residuals : numpy.ndarray
        max |P(z, x | ytilde) - P(z | ytilde) P(x | ytilde)|, NaN on
        zero-probability records.
    """

    yt_values: tuple[float, ...]
    p_yt: np.ndarray
    correlations: np.ndarray
    residuals: np.ndarray

    @property
    def max_abs_correlation(self) -> float:
        finite = self.correlations[np.isfinite(self.correlations)]
        return float(np.abs(finite).max(initial=0.0))

    @property
    def max_residual(self) -> float:
        finite = self.residuals[np.isfinite(self.residuals)]
        return float(finite.max(initial=0.0))


def _conditional_difference(dist: JointDistribution, yt_index: int) -> np.ndarray:
    joint = dist.joint_zx_given_yt(yt_index)
    p_z = joint.sum(axis=1)
    p_x = joint.sum(axis=0)
    return joint - np.outer(p_z, p_x)


def cpf_correlation(dist: JointDistribution, yt_index: int) -> float:
    """Outcome-weighted conditional past-future correlation for one record."""
    diff = _conditional_difference(dist, yt_index)
    o_z = np.asarray(dist.z_values)
    o_x = np.asarray(dist.x_values)
    return float(o_z @ diff @ o_x)


def markov_residual(dist: JointDistribution, yt_index: int) -> float:
    """Max-norm deviation of P(z, x | ytilde) from the product of marginals."""
    return float(np.abs(_conditional_difference(dist, yt_index)).max())


def cpf_summary(dist: JointDistribution) -> CpfResult:
    """Correlation and residual for every update record.

    Records with probability below 1e-14 get NaN entries rather than an
    error; downstream maxima ignore them.
    """
    n_yt = len(dist.yt_values)
    p_yt = dist.marginal_yt()
    correlations = np.full(n_yt, np.nan)
    residuals = np.full(n_yt, np.nan)
    o_z = np.asarray(dist.z_values)
    o_x = np.asarray(dist.x_values)
    for j in range(n_yt):
        branch = dist.probs[:, j, :, :].sum(axis=1)
        total = float(branch.sum())
        if total < 1e-14:
            continue
        joint = branch / total
        diff = joint - np.outer(joint.sum(axis=1), joint.sum(axis=0))
        correlations[j] = o_z @ diff @ o_x
        residuals[j] = np.abs(diff).max()
    return CpfResult(
        yt_values=dist.yt_values,
        p_yt=p_yt,
        correlations=correlations,
        residuals=residuals,
    )


def table3_summary(
    table: np.ndarray,
    z_values: tuple[float, ...] = (1.0, -1.0),
    yt_values: tuple[float, ...] = (1.0, -1.0),
    x_values: tuple[float, ...] = (1.0, -1.0),
) -> CpfResult:
    """Correlation and residual from a three-outcome table P(z, ytilde, x).

    Same semantics as :func:`cpf_summary` but for distributions already
    marginalized over the intermediate outcome, such as the closed-form
    joint tables of the solvable models.
    """
    probs = np.asarray(table, dtype=float)
    if probs.shape != (len(z_values), len(yt_values), len(x_values)):
        raise ValueError(f"table shape {probs.shape} does not match outcome labels")
    n_yt = len(yt_values)
    p_yt = probs.sum(axis=(0, 2))
    correlations = np.full(n_yt, np.nan)
    residuals = np.full(n_yt, np.nan)
    o_z = np.asarray(z_values)
    o_x = np.asarray(x_values)
    for j in range(n_yt):
        total = float(p_yt[j])
        if total < 1e-14:
            continue
        joint = probs[:, j, :] / total
        diff = joint - np.outer(joint.sum(axis=1), joint.sum(axis=0))
        correlations[j] = o_z @ diff @ o_x
        residuals[j] = np.abs(diff).max()
    return CpfResult(
        yt_values=tuple(yt_values),
        p_yt=p_yt,
        correlations=correlations,
        residuals=residuals,
    )

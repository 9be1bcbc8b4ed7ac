"""Reproducible trajectory sampling of the protocol.

Samplers draw full measurement records (z, ytilde, y, x) from the same
tables the exact engines integrate, so sampled frequencies converge to the
exact joint distribution by construction:

- :func:`ensemble_sampler` samples the latent noise realization explicitly
  (realization, x, y, ytilde, z), consuming exactly five uniforms per
  trajectory;
- :func:`joint_sampler` samples any exact joint table through its chain of
  conditionals (x, y, ytilde, z), consuming exactly four uniforms.

Reproducibility contract: trajectories are generated in fixed blocks of
2^16, block b driven by its own generator seeded with the b-th spawn of the
root seed sequence, and per-block integer counts are summed. The result is
a pure function of (sampler, n_samples, seed): identical across runs,
worker counts, and scalar-versus-vectorized sampling. Uniforms are consumed
row-major, one row per trajectory, so :func:`sample_trajectory` with the
b-th block generator reproduces that block's records one by one.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cpf import CpfResult, cpf_summary
from .protocol import JointDistribution, StageTables

__all__ = [
    "BLOCK_SIZE",
    "ChainSampler",
    "SampleResult",
    "ReplicaSummary",
    "ensemble_sampler",
    "joint_sampler",
    "sample_counts",
    "sample_trajectory",
    "cpf_replicas",
]

BLOCK_SIZE = 1 << 16


def _cumulative(table: np.ndarray) -> np.ndarray:
    """Cumulative distribution along the last axis, final entry forced to 1."""
    if table.min(initial=0.0) < 0.0:
        raise ValueError("conditional tables must be nonnegative")
    cum = np.cumsum(table, axis=-1)
    cum[..., -1] = 1.0
    return cum


def _pick(cum_rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Categorical outcomes from cumulative rows and one uniform per row."""
    idx = (cum_rows < u[:, None]).sum(axis=1)
    return np.minimum(idx, cum_rows.shape[-1] - 1)


def _conditional(joint: np.ndarray, axis_sum: np.ndarray) -> np.ndarray:
    """joint / axis_sum with uniform fill where the parent mass vanishes.

    Parent branches with zero mass are never sampled; the uniform fill only
    keeps the rows valid distributions.
    """
    k = joint.shape[-1]
    safe = np.where(axis_sum > 0.0, axis_sum, 1.0)
    out = joint / safe[..., None]
    out[axis_sum == 0.0] = 1.0 / k
    return out


@dataclass(frozen=True)
class ChainSampler:
    """Vectorized sampler over a chain of cumulative conditional tables.

    ``kind`` selects the index arithmetic: "ensemble" chains
    (realization, x, y, ytilde, z), "joint" chains (x, y, ytilde, z).
    """

    kind: str
    tables: tuple[np.ndarray, ...]
    shape: tuple[int, int, int, int]
    z_values: tuple[float, ...]
    yt_values: tuple[float, ...]
    y_values: tuple[float, ...]
    x_values: tuple[float, ...]
    exact: JointDistribution

    @property
    def n_uniforms(self) -> int:
        return 5 if self.kind == "ensemble" else 4

    def indices(self, u: np.ndarray) -> tuple[np.ndarray, ...]:
        """Outcome indices (iz, iyt, iy, ix) for one uniform row per
        trajectory, consumed left to right in chain order."""
        if self.kind == "ensemble":
            cum_a, cum_x, cum_y, cum_yt, cum_z = self.tables
            ia = _pick(np.broadcast_to(cum_a, (u.shape[0], cum_a.size)), u[:, 0])
            ix = _pick(np.broadcast_to(cum_x, (u.shape[0], cum_x.size)), u[:, 1])
            iy = _pick(cum_y[ia, ix], u[:, 2])
            iyt = _pick(cum_yt[iy, ix], u[:, 3])
            iz = _pick(cum_z[ia, iyt], u[:, 4])
        else:
            cum_x, cum_y, cum_yt, cum_z = self.tables
            ix = _pick(np.broadcast_to(cum_x, (u.shape[0], cum_x.size)), u[:, 0])
            iy = _pick(cum_y[ix], u[:, 1])
            iyt = _pick(cum_yt[ix, iy], u[:, 2])
            iz = _pick(cum_z[ix, iy, iyt], u[:, 3])
        return iz, iyt, iy, ix


def ensemble_sampler(tables: StageTables) -> ChainSampler:
    """Sampler drawing the latent noise realization, then the record chain."""
    n_yt, n_y, n_x = tables.policy.shape
    n_ch = tables.weights.size
    n_z = tables.pz_given_yt.shape[1]
    exact = tables.joint()
    return ChainSampler(
        kind="ensemble",
        tables=(
            _cumulative(tables.weights),
            _cumulative(tables.p_x),
            _cumulative(tables.py_given_x.transpose(0, 2, 1)),
            _cumulative(tables.policy.transpose(1, 2, 0)),
            _cumulative(tables.pz_given_yt.transpose(0, 2, 1)),
        ),
        shape=(n_z, n_yt, n_y, n_x),
        z_values=tables.z_values,
        yt_values=tables.yt_values,
        y_values=tables.y_values,
        x_values=tables.x_values,
        exact=exact,
    )


def joint_sampler(dist: JointDistribution) -> ChainSampler:
    """Sampler reproducing an exact joint table via chained conditionals."""
    p = dist.probs
    p_x = p.sum(axis=(0, 1, 2))
    p_yx = p.sum(axis=(0, 1)).T  # [x, y]
    p_ytyx = p.sum(axis=0).transpose(2, 1, 0)  # [x, y, ytilde]
    p_zytyx = p.transpose(3, 2, 1, 0)  # [x, y, ytilde, z]
    return ChainSampler(
        kind="joint",
        tables=(
            _cumulative(p_x),
            _cumulative(_conditional(p_yx, p_x)),
            _cumulative(_conditional(p_ytyx, p_yx)),
            _cumulative(_conditional(p_zytyx, p_ytyx)),
        ),
        shape=p.shape,
        z_values=dist.z_values,
        yt_values=dist.yt_values,
        y_values=dist.y_values,
        x_values=dist.x_values,
        exact=dist,
    )


@dataclass(frozen=True)
class SampleResult:
    """Integer outcome counts indexed like the exact joint table."""

    counts: np.ndarray
    n_samples: int
    z_values: tuple[float, ...]
    yt_values: tuple[float, ...]
    y_values: tuple[float, ...]
    x_values: tuple[float, ...]

    def frequencies(self) -> np.ndarray:
        return self.counts / float(self.n_samples)

    def distribution(self) -> JointDistribution:
        """Empirical frequencies packaged as a joint distribution."""
        return JointDistribution(
            probs=self.frequencies(),
            z_values=self.z_values,
            yt_values=self.yt_values,
            y_values=self.y_values,
            x_values=self.x_values,
        )


def _block_counts(
    sampler: ChainSampler, child: np.random.SeedSequence, size: int
) -> np.ndarray:
    rng = np.random.default_rng(child)
    u = rng.random((size, sampler.n_uniforms))
    iz, iyt, iy, ix = sampler.indices(u)
    n_z, n_yt, n_y, n_x = sampler.shape
    flat = ((iz * n_yt + iyt) * n_y + iy) * n_x + ix
    return np.bincount(flat, minlength=n_z * n_yt * n_y * n_x).astype(np.int64)


def sample_counts(
    sampler: ChainSampler,
    n_samples: int,
    seed: int | np.random.SeedSequence,
    n_workers: int = 1,
) -> SampleResult:
    """Draw trajectories and tally outcome counts.

    The block partition and per-block seeding depend only on ``n_samples``
    and ``seed``; blocks are computed independently and summed, so the
    counts are identical for every ``n_workers``.
    """
    if n_samples <= 0:
        raise ValueError("n_samples must be positive")
    if n_workers < 1:
        raise ValueError("n_workers must be >= 1")
    ss = (
        seed
        if isinstance(seed, np.random.SeedSequence)
        else np.random.SeedSequence(int(seed))
    )
    n_blocks = -(-n_samples // BLOCK_SIZE)
    children = ss.spawn(n_blocks)
    sizes = [BLOCK_SIZE] * (n_blocks - 1)
    sizes.append(n_samples - BLOCK_SIZE * (n_blocks - 1))
    if n_workers == 1:
        blocks = [
            _block_counts(sampler, child, size)
            for child, size in zip(children, sizes)
        ]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            blocks = list(
                pool.map(
                    lambda cs: _block_counts(sampler, cs[0], cs[1]),
                    zip(children, sizes),
                )
            )
    total = np.zeros(int(np.prod(sampler.shape)), dtype=np.int64)
    for block in blocks:
        total += block
    return SampleResult(
        counts=total.reshape(sampler.shape),
        n_samples=n_samples,
        z_values=sampler.z_values,
        yt_values=sampler.yt_values,
        y_values=sampler.y_values,
        x_values=sampler.x_values,
    )


def sample_trajectory(
    sampler: ChainSampler, rng: np.random.Generator
) -> tuple[int, int, int, int]:
    """Draw one record (iz, iyt, iy, ix), consuming one uniform row.

    Looping this with the generator of block b replays that block of
    :func:`sample_counts` record by record.
    """
    u = rng.random(sampler.n_uniforms)
    iz, iyt, iy, ix = sampler.indices(u[None, :])
    return int(iz[0]), int(iyt[0]), int(iy[0]), int(ix[0])


@dataclass(frozen=True)
class ReplicaSummary:
    """Correlation statistics over independent sampling replicas.

    Rows are replicas, columns update records. NaN entries mark records a
    replica never produced; the aggregates skip them.
    """

    yt_values: tuple[float, ...]
    correlations: np.ndarray
    residuals: np.ndarray

    @property
    def mean_correlation(self) -> np.ndarray:
        return np.nanmean(self.correlations, axis=0)

    @property
    def stderr_correlation(self) -> np.ndarray:
        n = np.sum(np.isfinite(self.correlations), axis=0)
        return np.nanstd(self.correlations, axis=0, ddof=1) / np.sqrt(
            np.maximum(n, 1)
        )


def cpf_replicas(
    sampler: ChainSampler,
    n_samples: int,
    seed: int | np.random.SeedSequence,
    n_replicas: int = 20,
    n_workers: int = 1,
) -> ReplicaSummary:
    """Estimate conditional past-future statistics with resampling error.

    Runs ``n_replicas`` independent samplings (seeds spawned from ``seed``)
    and collects the per-record correlation and factorization residual of
    each empirical table.
    """
    if n_replicas < 2:
        raise ValueError("need at least two replicas for a standard error")
    ss = (
        seed
        if isinstance(seed, np.random.SeedSequence)
        else np.random.SeedSequence(int(seed))
    )
    children = ss.spawn(n_replicas)
    n_yt = len(sampler.yt_values)
    correlations = np.empty((n_replicas, n_yt))
    residuals = np.empty((n_replicas, n_yt))
    for r, child in enumerate(children):
        result = sample_counts(sampler, n_samples, child, n_workers=n_workers)
        summary: CpfResult = cpf_summary(result.distribution())
        correlations[r] = summary.correlations
        residuals[r] = summary.residuals
    return ReplicaSummary(
        yt_values=sampler.yt_values,
        correlations=correlations,
        residuals=residuals,
    )

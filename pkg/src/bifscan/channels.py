"""Two-time propagator models.

Three model families share one propagation interface (``propagate_mat`` on
raw matrices; dimension-checked wrappers operate on :class:`DensityMatrix`):

- :class:`PauliChannel` / :class:`UnitaryChannel` / :class:`LindbladChannel` —
  single-system semigroups, combined into a :class:`NoiseEnsemble` (a weighted
  finite family of propagators modelling classical noise with fixed
  statistics).
- :class:`BipartiteModel` — explicit system+environment dynamics, unitary or
  Lindblad, with the environment state evolved and conditioned exactly.

Also here: the commuting-interaction decomposition that rewrites a bipartite
unitary model with ``[H_e, H_I] = 0`` as a mixture of system unitaries, and
the environment-invariance check (is the environment marginal independent of
the system preparation?).

All channels are time-homogeneous semigroups, so the two-time propagator
depends only on ``t_end - t_start`` and automatically satisfies the
composition law E(t3<-t1) = E(t3<-t2) E(t2<-t1). The ensemble interface
accepts any object with the same ``propagate_mat`` signature; causality of
user-supplied two-time families (no dependence on future noise outcomes)
cannot be verified operationally and is the caller's responsibility.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Protocol, runtime_checkable

import numpy as np
from scipy.linalg import expm

from .linalg import (
    DensityMatrix,
    as_operator,
    density_matrix,
    herm_eig,
    partial_trace,
    tensor,
    unitary_evolution,
)

__all__ = [
    "DIM_CAP",
    "TwoTimePropagator",
    "PauliChannel",
    "UnitaryChannel",
    "LindbladChannel",
    "NoiseEnsemble",
    "BipartiteModel",
    "CommutingMixtureModel",
    "NonCommutingError",
    "NotDecomposableError",
    "InvalidGeneratorError",
    "pauli_propagate",
    "bipartite_propagate",
    "lindblad_generator",
    "check_commuting",
    "commuting_decomposition",
    "check_env_invariance",
    "classical_rate_model",
    "default_probe_states",
]

# Joint system-environment dimension cap: superoperators stay <= 256x256.
DIM_CAP = 16

SIGMA = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class NonCommutingError(ValueError):
    """Raised when a commuting decomposition is requested for [H_e, H_I] != 0."""


class NotDecomposableError(ValueError):
    """Raised when H_I cannot be diagonalized over a degenerate H_e eigenspace."""


class InvalidGeneratorError(ValueError):
    """Raised when a propagated state comes out non-positive beyond -1e-8."""


@runtime_checkable
class TwoTimePropagator(Protocol):
    """A CPTP two-time propagator acting on raw density-matrix arrays."""

    def propagate_mat(
        self, mat: np.ndarray, t_start: float, t_end: float
    ) -> np.ndarray: ...


def _check_interval(t_start: float, t_end: float) -> float:
    dt = float(t_end) - float(t_start)
    if dt < 0.0:
        raise ValueError(f"propagation interval must be nonnegative, got {dt}")
    return dt


@dataclass(frozen=True)
class PauliChannel:
    """Qubit dephasing-type semigroup along a Pauli axis.

    The propagator over an interval dt maps
    rho -> h+ rho + h- sigma_a rho sigma_a with h+- = (1 +- e^{-2 rate dt})/2,
    a convex combination of conjugations, hence exactly trace- and
    positivity-preserving.
    """

    axis: Literal["x", "y", "z"]
    rate: float

    def __post_init__(self) -> None:
        if self.axis not in SIGMA:
            raise ValueError(f"axis must be one of x, y, z; got {self.axis!r}")
        if not (math.isfinite(self.rate) and self.rate >= 0.0):
            raise ValueError(f"rate must be finite and >= 0, got {self.rate}")

    def propagate_mat(
        self, mat: np.ndarray, t_start: float, t_end: float
    ) -> np.ndarray:
        dt = _check_interval(t_start, t_end)
        decay = math.exp(-2.0 * self.rate * dt)
        h_plus = 0.5 * (1.0 + decay)
        h_minus = 0.5 * (1.0 - decay)
        s = SIGMA[self.axis]
        return h_plus * mat + h_minus * (s @ mat @ s)


@dataclass(frozen=True)
class UnitaryChannel:
    """Unitary semigroup rho -> U rho U^dag with U = exp(-i dt H)."""

    hamiltonian: np.ndarray
    _eig: tuple[np.ndarray, np.ndarray] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        h = as_operator(self.hamiltonian)
        w, v = herm_eig(h)
        h.setflags(write=False)
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "_eig", (w, v))

    def unitary(self, dt: float) -> np.ndarray:
        w, v = self._eig
        return (v * np.exp(-1j * dt * w)) @ v.conj().T

    def propagate_mat(
        self, mat: np.ndarray, t_start: float, t_end: float
    ) -> np.ndarray:
        dt = _check_interval(t_start, t_end)
        u = self.unitary(dt)
        return u @ mat @ u.conj().T


def lindblad_generator(hamiltonian, jump_operators=()) -> np.ndarray:
    """Build the Lindblad superoperator in column-stacking convention.

    With vec(A rho B) = (B^T (x) A) vec(rho), the generator is
    L = -i(I (x) H - H^T (x) I)
        + sum_k [ conj(J_k) (x) J_k
                  - (I (x) J_k^dag J_k + (J_k^dag J_k)^T (x) I) / 2 ].

    Rates are carried inside the jump operators (scale by sqrt(rate)).
    """
    h = as_operator(hamiltonian)
    if np.abs(h - h.conj().T).max(initial=0.0) > 1e-10:
        raise ValueError("Hamiltonian part must be Hermitian within 1e-10")
    d = h.shape[0]
    eye = np.eye(d, dtype=complex)
    gen = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for j in jump_operators:
        jm = as_operator(j)
        if jm.shape != (d, d):
            raise ValueError("jump operators must match the Hamiltonian dimension")
        jdj = jm.conj().T @ jm
        gen += np.kron(jm.conj(), jm) - 0.5 * (
            np.kron(eye, jdj) + np.kron(jdj.T, eye)
        )
    return gen


def _vec(mat: np.ndarray) -> np.ndarray:
    return mat.reshape(-1, order="F")


def _unvec(v: np.ndarray, d: int) -> np.ndarray:
    return v.reshape(d, d, order="F")


class LindbladChannel:
    """Semigroup generated by a trace-preserving Lindblad superoperator.

    Propagators exp(dt L) are computed by dense matrix exponential and cached
    per dt. The cache is a plain dict: concurrent reads are safe and
    concurrent inserts of the same key are idempotent.
    """

    def __init__(self, generator) -> None:
        gen = as_operator(generator)
        d2 = gen.shape[0]
        d = math.isqrt(d2)
        if d * d != d2 or gen.shape != (d2, d2):
            raise ValueError(f"generator shape {gen.shape} is not (d^2, d^2)")
        # Trace preservation: the adjoint must annihilate the identity.
        tp = _vec(np.eye(d, dtype=complex)).conj() @ gen
        if np.abs(tp).max() > 1e-10:
            raise ValueError("generator is not trace-preserving within 1e-10")
        gen.setflags(write=False)
        self.generator = gen
        self.dim = d
        self._cache: dict[float, np.ndarray] = {}

    @classmethod
    def from_operators(cls, hamiltonian, jump_operators=()) -> "LindbladChannel":
        return cls(lindblad_generator(hamiltonian, jump_operators))

    def _propagator(self, dt: float) -> np.ndarray:
        cached = self._cache.get(dt)
        if cached is None:
            cached = expm(dt * self.generator)
            self._cache[dt] = cached
        return cached

    def propagate_mat(
        self, mat: np.ndarray, t_start: float, t_end: float
    ) -> np.ndarray:
        dt = _check_interval(t_start, t_end)
        return _unvec(self._propagator(dt) @ _vec(mat), self.dim)


def pauli_propagate(ch: PauliChannel, dt: float, rho: DensityMatrix) -> DensityMatrix:
    """Apply a Pauli channel over an interval dt to a qubit state."""
    if rho.dim != 2:
        raise ValueError("Pauli channels act on qubit states")
    return density_matrix(ch.propagate_mat(rho.mat, 0.0, dt), rho.dims)


@dataclass(frozen=True)
class NoiseEnsemble:
    """A weighted finite family of two-time system propagators.

    Models classical noise with fixed statistics: each realization alpha
    evolves the system with its own CPTP semigroup, and joint outcome
    probabilities average over alpha with weights q_alpha. Only finite
    families are supported; continuum noise must be discretized by the
    caller.
    """

    weights: tuple[float, ...]
    channels: tuple[TwoTimePropagator, ...]

    def __post_init__(self) -> None:
        w = tuple(float(x) for x in self.weights)
        if len(w) != len(self.channels) or not w:
            raise ValueError("one weight per channel required")
        if min(w) < 0.0:
            raise ValueError("weights must be nonnegative")
        if abs(sum(w) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1 within 1e-12")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "channels", tuple(self.channels))

    @property
    def n_channels(self) -> int:
        return len(self.channels)


@dataclass(frozen=True)
class BipartiteModel:
    """Finite-dimensional system+environment dynamics.

    Either a joint unitary generated by H_s + H_e + H_I or a joint Lindblad
    semigroup; the environment starts in ``sigma0``. The joint dimension is
    capped at 16 so Lindblad superoperators stay <= 256x256.

    Construct via :meth:`unitary` or :meth:`lindblad`.
    """

    dims: tuple[int, int]
    sigma0: DensityMatrix
    kind: Literal["unitary", "lindblad"]
    h_s: np.ndarray | None = None
    h_e: np.ndarray | None = None
    h_i: np.ndarray | None = None
    generator: np.ndarray | None = None
    _prop: object = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        d_s, d_e = (int(d) for d in self.dims)
        if d_s < 2 or d_e < 1:
            raise ValueError(f"need system dim >= 2 and environment dim >= 1: {self.dims}")
        if d_s * d_e > DIM_CAP:
            raise ValueError(
                f"joint dimension {d_s * d_e} exceeds the cap {DIM_CAP}"
            )
        if self.sigma0.dim != d_e:
            raise ValueError(
                f"sigma0 dim {self.sigma0.dim} != environment dim {d_e}"
            )
        if self.kind == "unitary":
            h_s = as_operator(self.h_s)
            h_e = as_operator(self.h_e)
            h_i = as_operator(self.h_i)
            if h_s.shape != (d_s, d_s) or h_e.shape != (d_e, d_e):
                raise ValueError("h_s / h_e shapes must match the factor dims")
            if h_i.shape != (d_s * d_e, d_s * d_e):
                raise ValueError("h_i must act on the joint space")
            total = (
                tensor(h_s, np.eye(d_e)) + tensor(np.eye(d_s), h_e) + h_i
            )
            prop = UnitaryChannel(total)
            for m in (h_s, h_e, h_i):
                m.setflags(write=False)
            object.__setattr__(self, "h_s", h_s)
            object.__setattr__(self, "h_e", h_e)
            object.__setattr__(self, "h_i", h_i)
        elif self.kind == "lindblad":
            if self.generator is None:
                raise ValueError("lindblad kind requires a generator")
            prop = LindbladChannel(self.generator)
            if prop.dim != d_s * d_e:
                raise ValueError("generator dimension must match the joint space")
            object.__setattr__(self, "generator", prop.generator)
        else:
            raise ValueError(f"unknown kind {self.kind!r}")
        object.__setattr__(self, "dims", (d_s, d_e))
        object.__setattr__(self, "_prop", prop)

    @classmethod
    def unitary(cls, h_s, h_e, h_i, sigma0: DensityMatrix) -> "BipartiteModel":
        h_s = as_operator(h_s)
        h_e = as_operator(h_e)
        return cls(
            dims=(h_s.shape[0], h_e.shape[0]),
            sigma0=sigma0,
            kind="unitary",
            h_s=h_s,
            h_e=h_e,
            h_i=as_operator(h_i),
        )

    @classmethod
    def lindblad(
        cls,
        dims: tuple[int, int],
        sigma0: DensityMatrix,
        hamiltonian=None,
        jump_operators=(),
        generator=None,
    ) -> "BipartiteModel":
        if generator is None:
            d = dims[0] * dims[1]
            h = np.zeros((d, d)) if hamiltonian is None else hamiltonian
            generator = lindblad_generator(h, jump_operators)
        return cls(dims=tuple(dims), sigma0=sigma0, kind="lindblad", generator=generator)

    @property
    def total_hamiltonian(self) -> np.ndarray:
        if self.kind != "unitary":
            raise ValueError("total Hamiltonian is defined for unitary models only")
        d_s, d_e = self.dims
        return (
            tensor(self.h_s, np.eye(d_e))
            + tensor(np.eye(d_s), self.h_e)
            + self.h_i
        )

    def propagate_mat(self, mat: np.ndarray, t_start: float, t_end: float) -> np.ndarray:
        """Raw-matrix propagation of a joint operator over [t_start, t_end]."""
        return self._prop.propagate_mat(mat, t_start, t_end)


def bipartite_propagate(
    model: BipartiteModel, dt: float, rho_se: DensityMatrix
) -> DensityMatrix:
    """Propagate a joint state for a time dt, validating the output.

    Raises
    ------
    InvalidGeneratorError
        If the output has an eigenvalue below -1e-8 (the generator is not a
        valid quantum dynamical map on this state).
    """
    d_s, d_e = model.dims
    if rho_se.dims != (d_s, d_e):
        raise ValueError(f"state dims {rho_se.dims} != model dims {model.dims}")
    out = model.propagate_mat(rho_se.mat, 0.0, dt)
    eigmin = float(np.linalg.eigvalsh(0.5 * (out + out.conj().T)).min())
    if eigmin < -1e-8:
        raise InvalidGeneratorError(
            f"propagated state has eigenvalue {eigmin:.3e} < -1e-8"
        )
    return DensityMatrix(out, (d_s, d_e))


def check_commuting(h_e, h_i, dims: tuple[int, int], tol: float = 1e-10) -> bool:
    """True iff the environment Hamiltonian commutes with the interaction.

    ``h_e`` is given on the environment factor and embedded as I (x) h_e;
    ``h_i`` acts on the joint space.
    """
    d_s, d_e = dims
    he = as_operator(h_e)
    hi = as_operator(h_i)
    if he.shape != (d_e, d_e) or hi.shape != (d_s * d_e, d_s * d_e):
        raise ValueError("h_e / h_i shapes do not match dims")
    embedded = tensor(np.eye(d_s), he)
    comm = embedded @ hi - hi @ embedded
    return bool(np.abs(comm).max(initial=0.0) <= tol)


@dataclass(frozen=True)
class CommutingMixtureModel:
    """Mixture-of-unitaries rewrite of a commuting bipartite model.

    ``weights[e]`` is the population of the e-th joint eigenvector of
    (H_e, H_I) in sigma0; ``effective_hamiltonians[e]`` is the system
    Hamiltonian conditioned on that environment eigenvector,
    H_s + E_e I + <e|H_I|e>. ``env_basis`` columns are the eigenvectors.
    """

    weights: tuple[float, ...]
    effective_hamiltonians: tuple[np.ndarray, ...]
    env_basis: np.ndarray

    def __post_init__(self) -> None:
        w = tuple(float(x) for x in self.weights)
        if min(w) < -1e-12:
            raise ValueError("weights must be nonnegative")
        if abs(sum(w) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")
        for h in self.effective_hamiltonians:
            if np.abs(h - h.conj().T).max() > 1e-10:
                raise ValueError("effective Hamiltonians must be Hermitian")
        object.__setattr__(self, "weights", w)

    def to_noise_ensemble(self) -> NoiseEnsemble:
        """The equivalent weighted family of system unitaries."""
        return NoiseEnsemble(
            weights=self.weights,
            channels=tuple(UnitaryChannel(h) for h in self.effective_hamiltonians),
        )


def _diagonalizing_env_basis(
    h_e: np.ndarray, h_i: np.ndarray, d_s: int, d_e: int, tol: float
) -> np.ndarray:
    """Environment basis diagonalizing H_e and, blockwise, H_I.

    Within each degenerate H_e eigenspace the interaction must be
    diagonalizable by a single basis; it is found by eigendecomposing a
    random Hermitian system-contraction of the interaction block and
    verified afterwards.
    """
    evals, v = herm_eig(h_e)
    # Group eigenvalues into degenerate clusters.
    groups: list[list[int]] = [[0]]
    for k in range(1, d_e):
        if evals[k] - evals[groups[-1][0]] <= 1e-10 * max(1.0, abs(evals[k])) + 1e-12:
            groups[-1].append(k)
        else:
            groups.append([k])
    basis = v.copy()
    hi_t = h_i.reshape(d_s, d_e, d_s, d_e)
    for group in groups:
        g = len(group)
        if g == 1:
            continue
        cols = basis[:, group]
        # Interaction restricted to the eigenspace: block[s, a, t, b] with
        # s, t system indices and a, b within the group.
        block = np.einsum("ea,setf,fb->satb", cols.conj(), hi_t, cols, optimize=True)
        for attempt in range(2):
            rng = np.random.default_rng(0xD1A6 + attempt)
            r = rng.normal(size=(d_s, d_s)) + 1j * rng.normal(size=(d_s, d_s))
            r = r + r.conj().T
            # K = Tr_s[(R (x) I) block] is env-diagonal in any basis that
            # makes the block env-diagonal, with almost surely distinct
            # diagonal entries for distinct system blocks.
            k_op = np.einsum("su,uasb->ab", r, block, optimize=True)
            k_op = 0.5 * (k_op + k_op.conj().T)
            _, w_basis = np.linalg.eigh(k_op)
            rotated = np.einsum(
                "ax,satb,by->sxty", w_basis.conj(), block, w_basis, optimize=True
            )
            off = rotated.copy()
            for x in range(g):
                off[:, x, :, x] = 0.0
            if np.abs(off).max() <= tol:
                basis[:, group] = cols @ w_basis
                break
        else:
            raise NotDecomposableError(
                "interaction is not diagonalizable within a degenerate "
                "environment eigenspace"
            )
    return basis


def commuting_decomposition(
    model: BipartiteModel, tol: float = 1e-10
) -> CommutingMixtureModel:
    """Rewrite a commuting unitary bipartite model as a mixture of unitaries.

    Requires ``[I (x) H_e, H_I] = 0``. In the environment basis that
    diagonalizes H_e and H_I, the joint propagator is block diagonal with
    one-dimensional environment blocks, so every joint outcome probability
    reduces to a weighted sum over system unitaries
    U_e = exp(-i t (H_s + E_e I + <e|H_I|e>)) with weights w_e = <e|sigma0|e>.
    Environment coherences in sigma0 drop out exactly and need not vanish.

    Raises
    ------
    NonCommutingError
        If the commutator check fails.
    NotDecomposableError
        If H_I cannot be diagonalized over a degenerate H_e eigenspace.
    """
    if model.kind != "unitary":
        raise ValueError("commuting decomposition applies to unitary models")
    d_s, d_e = model.dims
    if not check_commuting(model.h_e, model.h_i, model.dims, tol):
        raise NonCommutingError("[I (x) H_e, H_I] != 0 within tolerance")
    basis = _diagonalizing_env_basis(model.h_e, model.h_i, d_s, d_e, tol)
    hi_t = model.h_i.reshape(d_s, d_e, d_s, d_e)
    evals = np.einsum("ea,ef,fa->a", basis.conj(), model.h_e, basis).real
    weights = np.einsum("ea,ef,fa->a", basis.conj(), model.sigma0.mat, basis).real
    weights = np.clip(weights, 0.0, None)
    weights = weights / weights.sum()
    eff = []
    eye_s = np.eye(d_s)
    for e in range(d_e):
        col = basis[:, e]
        b_e = np.einsum("e,setf,f->st", col.conj(), hi_t, col, optimize=True)
        h_eff = model.h_s + evals[e] * eye_s + 0.5 * (b_e + b_e.conj().T)
        eff.append(h_eff)
    return CommutingMixtureModel(
        weights=tuple(float(w) for w in weights),
        effective_hamiltonians=tuple(eff),
        env_basis=basis,
    )


def default_probe_states(d_s: int) -> tuple[DensityMatrix, ...]:
    """System preparations spanning the operator space.

    For a qubit, the six axis-aligned Bloch states. Generally, the basis
    states plus the (|i>+|j>)/sqrt(2) and (|i>+i|j>)/sqrt(2) superpositions
    for i < j; equality of environment marginals on these implies equality
    for every initial state by linearity.
    """
    states: list[DensityMatrix] = []
    eye = np.eye(d_s, dtype=complex)
    if d_s == 2:
        vecs = [
            eye[0],
            eye[1],
            (eye[0] + eye[1]) / math.sqrt(2),
            (eye[0] - eye[1]) / math.sqrt(2),
            (eye[0] + 1j * eye[1]) / math.sqrt(2),
            (eye[0] - 1j * eye[1]) / math.sqrt(2),
        ]
    else:
        vecs = [eye[i] for i in range(d_s)]
        for i in range(d_s):
            for j in range(i + 1, d_s):
                vecs.append((eye[i] + eye[j]) / math.sqrt(2))
                vecs.append((eye[i] + 1j * eye[j]) / math.sqrt(2))
    for v in vecs:
        states.append(density_matrix(np.outer(v, v.conj())))
    return tuple(states)


def check_env_invariance(
    model: BipartiteModel,
    probe_states: tuple[DensityMatrix, ...] | None = None,
    times: np.ndarray | None = None,
    tol: float = 1e-10,
) -> bool:
    """True iff the environment marginal is independent of the system state.

    Propagates ``probe (x) sigma0`` for each probe state and time and
    compares the environment marginals pairwise. Defaults: probes from
    :func:`default_probe_states`, times log-spaced over [0.1, 10].
    """
    d_s, d_e = model.dims
    if probe_states is None:
        probe_states = default_probe_states(d_s)
    if len(probe_states) < 2:
        raise ValueError("need at least two probe states")
    if times is None:
        times = np.logspace(-1.0, 1.0, 8)
    for t in times:
        reference: np.ndarray | None = None
        for probe in probe_states:
            if probe.dim != d_s:
                raise ValueError("probe states must live on the system factor")
            joint = tensor(probe.mat, model.sigma0.mat)
            evolved = model.propagate_mat(joint, 0.0, float(t))
            env = partial_trace(evolved, (d_s, d_e), keep=1)
            if reference is None:
                reference = env
            elif np.abs(env - reference).max() > tol:
                return False
    return True


def classical_rate_model(
    system_blocks: list,
    rates: dict[tuple[int, int], float],
    env_populations,
) -> BipartiteModel:
    """Lindblad model whose environment evolves as a classical rate process.

    Parameters
    ----------
    system_blocks : list of array_like
        Hermitian system Hamiltonians H_s^(e), one per environment basis
        state; the joint Hamiltonian is sum_e H_s^(e) (x) |e><e|.
    rates : dict
        Classical transition rates {(j, i): w} for environment jumps
        |j><i| (population transfer i -> j), realized as jump operators
        sqrt(w) I (x) |j><i|.
    env_populations : array_like
        Initial environment populations (diagonal sigma0).

    The environment marginal follows the classical master equation for
    ``rates`` regardless of the system state, so this family always passes
    :func:`check_env_invariance`.
    """
    blocks = [as_operator(b) for b in system_blocks]
    d_e = len(blocks)
    d_s = blocks[0].shape[0]
    p0 = np.asarray(env_populations, dtype=float)
    if p0.shape != (d_e,):
        raise ValueError("one initial population per environment state required")
    hamiltonian = np.zeros((d_s * d_e, d_s * d_e), dtype=complex)
    for e, block in enumerate(blocks):
        proj = np.zeros((d_e, d_e), dtype=complex)
        proj[e, e] = 1.0
        hamiltonian += tensor(block, proj)
    jumps = []
    for (j, i), w in sorted(rates.items()):
        if j == i:
            raise ValueError("rates must connect distinct environment states")
        if w < 0.0:
            raise ValueError("rates must be nonnegative")
        op = np.zeros((d_e, d_e), dtype=complex)
        op[j, i] = 1.0
        jumps.append(math.sqrt(w) * tensor(np.eye(d_s), op))
    sigma0 = density_matrix(np.diag(p0 / p0.sum()).astype(complex))
    return BipartiteModel.lindblad(
        dims=(d_s, d_e),
        sigma0=sigma0,
        hamiltonian=hamiltonian,
        jump_operators=jumps,
    )

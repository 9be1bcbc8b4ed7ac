"""Dense complex linear algebra for small Hilbert spaces (dim <= ~64).

Operators are plain ``numpy.ndarray`` values with ``complex128`` dtype;
:func:`as_operator` is the validating coercion used at construction sites.
States carry their tensor-factor structure in :class:`DensityMatrix`.

All functions here are pure; returned arrays never alias their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "HERMITICITY_TOL",
    "TRACE_TOL",
    "EIGENVALUE_FLOOR",
    "DensityMatrix",
    "as_operator",
    "density_matrix",
    "pure_state",
    "maximally_mixed",
    "tensor",
    "partial_trace",
    "herm_eig",
    "unitary_evolution",
]

# Double-precision round-off headroom for dims <= 64.
HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
EIGENVALUE_FLOOR = -1e-10


def as_operator(a) -> np.ndarray:
    """Coerce ``a`` to a finite complex matrix.

    Parameters
    ----------
    a : array_like
        Two-dimensional array of complex (or real) entries.

    Returns
    -------
    numpy.ndarray
        A fresh ``complex128`` matrix.

    Raises
    ------
    ValueError
        If ``a`` is not two-dimensional or contains NaN/Inf entries.
    """
    m = np.array(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={m.ndim}")
    if not np.isfinite(m).all():
        raise ValueError("matrix contains non-finite entries")
    return m


def _is_hermitian(m: np.ndarray, tol: float) -> bool:
    return bool(np.abs(m - m.conj().T).max(initial=0.0) <= tol)


@dataclass(frozen=True)
class DensityMatrix:
    """A positive, unit-trace state over an ordered list of tensor factors.

    Parameters
    ----------
    mat : numpy.ndarray
        Square complex matrix; Hermitian to 1e-12, trace 1 within 1e-12,
        eigenvalues >= -1e-10 (validated, see ``eig_floor``).
    dims : tuple of int
        Tensor-factor dimensions, system factor first; their product must
        equal the matrix dimension.
    """

    mat: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        m = as_operator(self.mat)
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got {m.shape}")
        dims = tuple(int(d) for d in self.dims)
        if any(d <= 0 for d in dims):
            raise ValueError(f"factor dimensions must be positive: {dims}")
        if math.prod(dims) != m.shape[0]:
            raise ValueError(
                f"factor dims {dims} do not multiply to matrix dim {m.shape[0]}"
            )
        if not _is_hermitian(m, HERMITICITY_TOL):
            raise ValueError("density matrix is not Hermitian within 1e-12")
        tr = m.trace()
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace {tr} is not 1 within 1e-12")
        eigmin = float(np.linalg.eigvalsh(m).min())
        if eigmin < EIGENVALUE_FLOOR:
            raise ValueError(f"density matrix has eigenvalue {eigmin} < -1e-10")
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        """Total Hilbert-space dimension."""
        return self.mat.shape[0]


def density_matrix(mat, dims: tuple[int, ...] | None = None) -> DensityMatrix:
    """Validate and wrap ``mat`` as a :class:`DensityMatrix`.

    ``dims`` defaults to a single factor of the full dimension.
    """
    m = as_operator(mat)
    if dims is None:
        dims = (m.shape[0],)
    return DensityMatrix(m, tuple(dims))


def pure_state(vec, dims: tuple[int, ...] | None = None) -> DensityMatrix:
    """Build the projector state |v><v| / <v|v> from a state vector."""
    v = np.asarray(vec, dtype=complex).reshape(-1)
    norm2 = float(np.vdot(v, v).real)
    if norm2 <= 0.0 or not np.isfinite(norm2):
        raise ValueError("state vector must have positive finite norm")
    return density_matrix(np.outer(v, v.conj()) / norm2, dims)


def maximally_mixed(dims: int | tuple[int, ...]) -> DensityMatrix:
    """The identity state I/d over the given factor dimensions."""
    if isinstance(dims, int):
        dims = (dims,)
    d = math.prod(dims)
    return DensityMatrix(np.eye(d, dtype=complex) / d, tuple(dims))


def tensor(a, b) -> np.ndarray:
    """Kronecker product with row-major factor ordering (first factor slowest).

    The system factor goes first in bipartite products, matching the
    ``rho (x) sigma`` layout used throughout the protocol engine.
    """
    return np.kron(as_operator(a), as_operator(b))


def partial_trace(m, dims: tuple[int, ...], keep: int) -> np.ndarray:
    """Trace out all tensor factors except ``keep``.

    Parameters
    ----------
    m : array_like
        Square matrix of dimension ``prod(dims)``.
    dims : tuple of int
        Tensor-factor dimensions in row-major order.
    keep : int
        Index of the factor to keep.

    Returns
    -------
    numpy.ndarray
        Reduced matrix over the kept factor; its trace equals ``trace(m)``.
    """
    mm = as_operator(m)
    dims = tuple(int(d) for d in dims)
    n = math.prod(dims)
    if mm.shape != (n, n):
        raise ValueError(f"matrix shape {mm.shape} does not match dims {dims}")
    if not 0 <= keep < len(dims):
        raise ValueError(f"keep index {keep} out of range for {len(dims)} factors")
    t = mm.reshape(dims + dims)
    # Trace factor pairs from the end so earlier axis indices stay valid.
    nfac = len(dims)
    for k in range(nfac - 1, -1, -1):
        if k == keep:
            continue
        t = np.trace(t, axis1=k, axis2=k + t.ndim // 2)
    return t


def herm_eig(h) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns
    -------
    (eigenvalues, eigenvectors)
        Real eigenvalues in ascending order and the unitary matrix of
        column eigenvectors.

    Raises
    ------
    ValueError
        If ``h`` deviates from Hermiticity by more than 1e-10.
    """
    m = as_operator(h)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got {m.shape}")
    if not _is_hermitian(m, 1e-10):
        raise ValueError("matrix is not Hermitian within 1e-10")
    w, v = np.linalg.eigh(m)
    return w, v


def unitary_evolution(h, t: float) -> np.ndarray:
    """The propagator exp(-i t h) of a Hermitian generator, via eigenbasis.

    The result satisfies U(t1) @ U(t2) = U(t1 + t2) for a fixed ``h`` up to
    round-off, and is unitary to ~1e-10 for dims <= 64.
    """
    w, v = herm_eig(h)
    phases = np.exp(-1j * float(t) * w)
    return (v * phases) @ v.conj().T

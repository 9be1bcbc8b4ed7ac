"""Closed-form reference models.

Three qubit models with exact conditional past-future correlations, used to
validate the protocol engines and to generate the report curves:

- the *eternal* model: a mixture of x and y Pauli dephasing semigroups whose
  average has an always-negative canonical z rate. Measurements x-n-x with n
  tilted by theta from z in the x-z plane. The random-scheme correlation is
  identically zero (the noise statistics never react to the system).
- the *dissipative* model: a two-level emitter in a bosonic bath at zero
  temperature. All quantities derive from the decay amplitude G(t), the
  solution of a memory-kernel Volterra equation, and its two-time extension
  G(t, tau). Measurements z-z-z or x-z-x, renewed states the z eigenstates,
  record conditioned on ytilde = -1.
- the *dephasing* model: a qubit dephasing in an ohmic bosonic bath with
  decoherence magnitude gamma_t and phase phi_t. Measurements n-y-x, renewed
  states the y eigenstates.

The bosonic-bath models have genuinely bidirectional flows: their
random-scheme correlations are nonzero, with the deterministic values tied
to the random ones by model-specific prefactors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
from scipy.signal import fftconvolve

from .channels import NoiseEnsemble, PauliChannel

__all__ = [
    "eternal_ensemble",
    "eternal_coherence",
    "eternal_joint_deterministic",
    "eternal_joint_random",
    "eternal_cpf_deterministic",
    "eternal_cpf_random",
    "lorentzian_kernel",
    "solve_volterra",
    "DecayAmplitude",
    "decay_amplitude",
    "dissipative_cpf_random",
    "dissipative_memory_prefactor",
    "dissipative_cpf_deterministic",
    "dephasing_decay",
    "dephasing_cpf_random",
    "dephasing_cpf_deterministic",
]

OUTCOMES = (1.0, -1.0)


# ---------------------------------------------------------------------------
# Eternal model


def eternal_ensemble(gamma: float) -> NoiseEnsemble:
    """The mixture of x and y Pauli semigroups realizing the eternal model."""
    return NoiseEnsemble(
        weights=(0.5, 0.5),
        channels=(PauliChannel("x", gamma), PauliChannel("y", gamma)),
    )


def eternal_coherence(t, gamma: float):
    """Averaged x-component decay factor c(t) = 1/2 + e^{-2 gamma t}/2.

    The same factor governs the y component; the z component decays as
    e^{-2 gamma t}. The mixture identity c(t) c(tau) != c(t + tau) is the
    source of the deterministic-scheme correlation.
    """
    return 0.5 + 0.5 * np.exp(-2.0 * gamma * np.asarray(t, dtype=float))


def _x_marginal(x_mean: float) -> np.ndarray:
    if not -1.0 <= x_mean <= 1.0:
        raise ValueError(f"first-outcome mean must lie in [-1, 1], got {x_mean}")
    return np.array([(1.0 + o * x_mean) / 2.0 for o in OUTCOMES])


def eternal_joint_deterministic(
    theta: float, t: float, tau: float, gamma: float, x_mean: float = 0.0
) -> np.ndarray:
    """Closed-form deterministic-scheme table P(z, ytilde, x), axes ordered
    by outcome values (+1, -1).

    The initial state lies on the z axis with first-outcome mean ``x_mean``
    (zero for the z eigenstates used in the reference curves).
    """
    st = math.sin(theta)
    c_t = float(eternal_coherence(t, gamma))
    c_tau = float(eternal_coherence(tau, gamma))
    c_sum = float(eternal_coherence(t + tau, gamma))
    p_x = _x_marginal(x_mean)
    out = np.empty((2, 2, 2))
    for iz, z in enumerate(OUTCOMES):
        for jy, yt in enumerate(OUTCOMES):
            for ix, x in enumerate(OUTCOMES):
                out[iz, jy, ix] = (
                    0.25
                    * (
                        1.0
                        + yt * x * st * c_t
                        + z * yt * st * c_tau
                        + z * x * st * st * c_sum
                    )
                    * p_x[ix]
                )
    return out


def eternal_joint_random(
    theta: float,
    t: float,
    tau: float,
    gamma: float,
    update_probs=None,
    x_mean: float = 0.0,
) -> np.ndarray:
    """Closed-form random-scheme table P(z, ytilde, x) with renewal to the
    intermediate (n-direction) eigenstates.

    ``update_probs[j, i]`` is the renewal probability of record j given
    first outcome i; defaults to 1/2. The table factorizes as
    P(z | ytilde) P(ytilde | x) P(x), so the conditional past-future
    correlation vanishes identically.
    """
    st = math.sin(theta)
    c_tau = float(eternal_coherence(tau, gamma))
    probs = (
        np.full((2, 2), 0.5)
        if update_probs is None
        else np.asarray(update_probs, dtype=float)
    )
    if probs.shape != (2, 2):
        raise ValueError("update_probs must be a 2x2 table [record, outcome]")
    p_x = _x_marginal(x_mean)
    out = np.empty((2, 2, 2))
    for iz, z in enumerate(OUTCOMES):
        for jy, yt in enumerate(OUTCOMES):
            for ix in range(2):
                out[iz, jy, ix] = (
                    0.5 * (1.0 + z * yt * st * c_tau) * probs[jy, ix] * p_x[ix]
                )
    return out


def eternal_cpf_deterministic(
    theta: float,
    t: float,
    tau: float,
    gamma: float,
    x_mean: float = 0.0,
    record: float = 1.0,
) -> float:
    """Deterministic-scheme correlation of the eternal model.

    C = sin^2(theta) (1 - x_mean^2) [c(t+tau) - c(t) c(tau)] / (4 P(record)^2)
    with P(record) = [1 + record * x_mean * sin(theta) * c(t)] / 2. For
    ``x_mean = 0`` both records give sin^2(theta) [c(t+tau) - c(t) c(tau)],
    which tends to sin^2(theta)/4 as gamma t -> infinity: the mixture
    correlation never decays.
    """
    st = math.sin(theta)
    c_t = float(eternal_coherence(t, gamma))
    c_tau = float(eternal_coherence(tau, gamma))
    c_sum = float(eternal_coherence(t + tau, gamma))
    p_record = 0.5 * (1.0 + record * x_mean * st * c_t)
    return (
        st
        * st
        * (1.0 - x_mean * x_mean)
        * (c_sum - c_t * c_tau)
        / (4.0 * p_record * p_record)
    )


def eternal_cpf_random(*_args, **_kwargs) -> float:
    """Random-scheme correlation of the eternal model: identically zero."""
    return 0.0


# ---------------------------------------------------------------------------
# Dissipative model


def lorentzian_kernel(gamma: float, tau_c: float) -> Callable[[np.ndarray], np.ndarray]:
    """Bath correlation f(t) = (gamma / 2 tau_c) exp(-|t| / tau_c)."""
    if gamma < 0.0 or tau_c <= 0.0:
        raise ValueError("need gamma >= 0 and tau_c > 0")

    def kernel(t):
        return (gamma / (2.0 * tau_c)) * np.exp(-np.abs(np.asarray(t, float)) / tau_c)

    return kernel


def solve_volterra(kernel_values: np.ndarray, step: float) -> np.ndarray:
    """Solve dG/dt = -int_0^t f(t-s) G(s) ds, G(0) = 1, on a uniform grid.

    Implicit trapezoid (product integration) in both the derivative and the
    convolution; second-order convergent. ``kernel_values[k]`` is f(k step);
    the returned array has the same length.
    """
    f = np.asarray(kernel_values, dtype=float)
    if f.ndim != 1 or f.size < 2:
        raise ValueError("need a 1-D kernel table with at least two nodes")
    if step <= 0.0:
        raise ValueError("step must be positive")
    n = f.size - 1
    g = np.empty(n + 1)
    rhs = np.empty(n + 1)
    g[0] = 1.0
    rhs[0] = 0.0
    denom = 1.0 + 0.25 * step * step * f[0]
    for k in range(n):
        partial = -step * (
            0.5 * f[k + 1] * g[0] + np.dot(f[k:0:-1], g[1 : k + 1])
        )
        g[k + 1] = (g[k] + 0.5 * step * (rhs[k] + partial)) / denom
        rhs[k + 1] = partial - 0.5 * step * f[0] * g[k + 1]
    return g


@dataclass(frozen=True)
class DecayAmplitude:
    """Gridded decay amplitude G and its two-time extension.

    ``values[k]`` is G(k step); ``kernel_values`` tabulates the memory
    kernel out to twice the grid horizon, as needed by the two-time
    integral. Build with :func:`decay_amplitude`.
    """

    step: float
    values: np.ndarray
    kernel_values: np.ndarray

    def __post_init__(self) -> None:
        self.values.setflags(write=False)
        self.kernel_values.setflags(write=False)

    @property
    def t_max(self) -> float:
        return self.step * (self.values.size - 1)

    @property
    def times(self) -> np.ndarray:
        return self.step * np.arange(self.values.size)

    def _index(self, t: float, name: str) -> float:
        idx = float(t) / self.step
        if idx < -1e-9 or idx > self.values.size - 1 + 1e-9:
            raise ValueError(f"{name}={t} outside the grid [0, {self.t_max}]")
        return min(max(idx, 0.0), float(self.values.size - 1))

    def g(self, t) -> np.ndarray | float:
        """G(t) by linear interpolation (exact on grid nodes)."""
        t_arr = np.asarray(t, dtype=float)
        if t_arr.min(initial=0.0) < -1e-12 or t_arr.max(initial=0.0) > self.t_max + 1e-9:
            raise ValueError("time outside the grid")
        out = np.interp(t_arr, self.times, self.values)
        return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out

    def _g2_node(self, m: int, n: int) -> float:
        # G(t,tau) = int_0^t int_0^tau f(s + s') G(t - s) G(tau - s');
        # 2-D trapezoid collapses to a 1-D contraction of f with the
        # convolution of the endpoint-weighted reversed amplitude segments.
        if m == 0 or n == 0:
            return 0.0
        a = self.values[m::-1].copy()
        a[0] *= 0.5
        a[-1] *= 0.5
        b = self.values[n::-1].copy()
        b[0] *= 0.5
        b[-1] *= 0.5
        conv = fftconvolve(a, b)
        return self.step * self.step * float(
            np.dot(self.kernel_values[: m + n + 1], conv)
        )

    def g2(self, t: float, tau: float) -> float:
        """Two-time amplitude G(t, tau); bilinear between grid nodes.

        Symmetric in its arguments and exactly zero when either argument is
        zero.
        """
        ti = self._index(t, "t")
        tj = self._index(tau, "tau")
        out = 0.0
        for i, wi in _interp_weights(ti, self.values.size - 1):
            if wi == 0.0:
                continue
            for j, wj in _interp_weights(tj, self.values.size - 1):
                if wj == 0.0:
                    continue
                out += wi * wj * self._g2_node(i, j)
        return out


def _interp_weights(idx: float, last: int) -> tuple[tuple[int, float], ...]:
    lo = int(math.floor(idx))
    frac = idx - lo
    if frac < 1e-9 or lo >= last:
        return ((min(lo, last), 1.0),)
    if frac > 1.0 - 1e-9:
        return ((lo + 1, 1.0),)
    return ((lo, 1.0 - frac), (lo + 1, frac))


def decay_amplitude(
    kernel: Callable[[np.ndarray], np.ndarray], t_max: float, step: float
) -> DecayAmplitude:
    """Solve the memory-kernel equation and package the grid.

    The kernel is tabulated out to 2 t_max so that the two-time amplitude is
    available on the full [0, t_max]^2 square.
    """
    if t_max <= 0.0 or step <= 0.0:
        raise ValueError("need t_max > 0 and step > 0")
    n = int(round(t_max / step))
    if abs(n * step - t_max) > 1e-9 * max(1.0, t_max):
        raise ValueError("t_max must be an integer number of steps")
    kernel_values = np.asarray(kernel(step * np.arange(2 * n + 1)), dtype=float)
    values = solve_volterra(kernel_values[: n + 1], step)
    return DecayAmplitude(step=step, values=values, kernel_values=kernel_values)


def dissipative_cpf_random(
    amp: DecayAmplitude,
    t: float,
    tau: float,
    directions: Literal["zzz", "xzx"] = "zzz",
) -> float:
    """Random-scheme correlation of the dissipative model at record -1.

    z-z-z measurements give G(t, tau)^2; x-z-x give -G(t, tau). Renewed
    states are the z eigenstates with renewal probability 1/2 and the
    initial state has P(x) = 1/2.
    """
    g2 = amp.g2(t, tau)
    if directions == "zzz":
        return g2 * g2
    if directions == "xzx":
        return -g2
    raise ValueError(f"directions must be 'zzz' or 'xzx', got {directions!r}")


def dissipative_memory_prefactor(amp: DecayAmplitude, t: float) -> float:
    """Deterministic/random ratio [1 - G(t)^2 / 2]^{-2} at record -1."""
    g_t = float(amp.g(t))
    return (1.0 - 0.5 * g_t * g_t) ** -2


def dissipative_cpf_deterministic(
    amp: DecayAmplitude,
    t: float,
    tau: float,
    directions: Literal["zzz", "xzx"] = "zzz",
) -> float:
    """Deterministic-scheme correlation of the dissipative model at
    record -1: the random value scaled by [1 - G(t)^2 / 2]^{-2}.
    """
    return dissipative_memory_prefactor(amp, t) * dissipative_cpf_random(
        amp, t, tau, directions
    )


# ---------------------------------------------------------------------------
# Dephasing model


def dephasing_decay(t, omega_c: float, coupling: float = 1.0):
    """Decoherence magnitude and phase for an ohmic bath with exponential
    cutoff: gamma_t = (coupling/2) ln[1 + (omega_c t)^2],
    phi_t = coupling arctan(omega_c t).
    """
    wt = omega_c * np.asarray(t, dtype=float)
    gamma_t = 0.5 * coupling * np.log1p(wt * wt)
    phi_t = coupling * np.arctan(wt)
    return gamma_t, phi_t


def _dephasing_combos(
    t: float, tau: float, omega_c: float, coupling: float
) -> tuple[float, float, float, float]:
    g_t, p_t = dephasing_decay(t, omega_c, coupling)
    g_tau, p_tau = dephasing_decay(tau, omega_c, coupling)
    g_sum, p_sum = dephasing_decay(t + tau, omega_c, coupling)
    return (
        float(g_t),
        float(g_tau),
        float(g_t + g_tau - g_sum),
        float(p_t + p_tau - p_sum),
    )


def dephasing_cpf_random(
    theta: float,
    t: float,
    tau: float,
    omega_c: float,
    coupling: float = 1.0,
    record: float = 1.0,
) -> float:
    """Random-scheme correlation of the dephasing model, n-y-x measurements:
    record cos(theta) e^{-gamma_tau} sin(phi_t + phi_tau - phi_{t+tau}).

    Renewed states are the y eigenstates with renewal probability 1/2 and
    the initial state has P(x) = 1/2. Zero for all (t, tau) only at special
    first-measurement directions (theta = pi/2).
    """
    _, g_tau, _, phase = _dephasing_combos(t, tau, omega_c, coupling)
    return record * math.cos(theta) * math.exp(-g_tau) * math.sin(phase)


def dephasing_cpf_deterministic(
    theta: float,
    t: float,
    tau: float,
    omega_c: float,
    coupling: float = 1.0,
    record: float = 1.0,
) -> float:
    """Deterministic-scheme correlation of the dephasing model:
    sin(theta) e^{-(gamma_t + gamma_tau)} sinh(Gamma_{t,tau}) plus the
    random-scheme value, with Gamma = gamma_t + gamma_tau - gamma_{t+tau}.

    The decay prefactor is symmetric in (t, tau), matching the memory term
    Gamma it multiplies.
    """
    g_t, g_tau, big_gamma, _ = _dephasing_combos(t, tau, omega_c, coupling)
    memory = math.sin(theta) * math.exp(-(g_t + g_tau)) * math.sinh(big_gamma)
    return memory + dephasing_cpf_random(theta, t, tau, omega_c, coupling, record)

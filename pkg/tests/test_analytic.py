"""Closed forms of the three solvable models.

Derived expectations were computed independently of the implementation:
the damped-qubit amplitude for gamma = 1, tau_c = 5 has the Laplace-domain
solution G(t) = e^{-t/10} (cos 0.3t + sin(0.3t)/3), and the two-time
amplitude oracles below come from direct double quadrature of
G(t, tau) = int_0^t int_0^tau f(s+s') G(t-s) G(tau-s') ds' ds with that
closed form (two independent quadratures agreeing to 2e-16).
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bifscan.analytic import (
    decay_amplitude,
    dephasing_cpf_deterministic,
    dephasing_cpf_random,
    dephasing_decay,
    dissipative_cpf_deterministic,
    dissipative_cpf_random,
    dissipative_memory_prefactor,
    eternal_coherence,
    eternal_cpf_deterministic,
    eternal_cpf_random,
    eternal_ensemble,
    eternal_joint_deterministic,
    eternal_joint_random,
    lorentzian_kernel,
    solve_volterra,
)
from bifscan.measurements import BlochDirection, X_DIR, bloch_projectors, uniform_random_policy
from bifscan.linalg import density_matrix
from bifscan.protocol import ProtocolSpec, joint_distribution_ensemble
from bifscan.measurements import UpdatePolicy


def exact_g(t: np.ndarray) -> np.ndarray:
    """Laplace-domain solution for gamma = 1, tau_c = 5."""
    t = np.asarray(t, dtype=float)
    return np.exp(-t / 10.0) * (np.cos(0.3 * t) + np.sin(0.3 * t) / 3.0)


G2_ORACLES = {
    (1.0, 1.0): 0.07944616863383427,
    (2.5, 1.3): 0.19691497486747933,
    (5.0, 5.0): 0.40670962643596403,
    (0.1, 0.1): 0.0009799046489896474,
}


# --- eternal two-Pauli ensemble ------------------------------------------


def test_eternal_coherence_value():
    assert abs(eternal_coherence(1.0, 1.0) - 0.5676676416183064) < 1e-15
    assert eternal_coherence(0.0, 1.0) == 1.0
    assert abs(eternal_coherence(1e9, 1.0) - 0.5) < 1e-15


def test_eternal_joint_tables_are_distributions():
    for theta in (0.3, 1.1):
        for x_mean in (0.0, 0.4):
            det = eternal_joint_deterministic(theta, 0.8, 1.4, 1.0, x_mean=x_mean)
            rand = eternal_joint_random(theta, 0.8, 1.4, 1.0, x_mean=x_mean)
            for table in (det, rand):
                assert table.shape == (2, 2, 2)
                assert table.min() >= 0.0
                assert abs(table.sum() - 1.0) < 1e-14
            np.testing.assert_allclose(
                det.sum(axis=(0, 1)), [(1 + x_mean) / 2, (1 - x_mean) / 2], atol=1e-14
            )


def test_eternal_deterministic_cpf_frozen_values():
    value = eternal_cpf_deterministic(math.pi / 2, 1.0, 1.0, 1.0)
    assert abs(value - 0.18691126810387715) < 1e-15
    asymptote = eternal_cpf_deterministic(math.pi / 2, 10.0, 10.0, 1.0)
    assert abs(asymptote - 0.24999999896942315) < 1e-15
    assert eternal_cpf_random(math.pi / 2, 1.0, 1.0, 1.0) == 0.0


def test_eternal_cpf_matches_table_contrast():
    # the correlation equals the outcome-weighted conditional difference of
    # the closed-form table itself
    from bifscan.cpf import table3_summary

    theta, t, tau = 0.9, 0.6, 1.7
    table = eternal_joint_deterministic(theta, t, tau, 1.0)
    summary = table3_summary(table)
    expected = eternal_cpf_deterministic(theta, t, tau, 1.0, record=1.0)
    assert abs(summary.correlations[0] - expected) < 1e-14
    expected_minus = eternal_cpf_deterministic(theta, t, tau, 1.0, record=-1.0)
    assert abs(summary.correlations[1] - expected_minus) < 1e-14


def test_eternal_closed_forms_match_engine_with_biased_state():
    # x_mean != 0 exercises the P(ytilde) denominators
    x_mean = 0.35
    rho0 = density_matrix(0.5 * np.array([[1.0, x_mean], [x_mean, 1.0]], dtype=complex))
    theta, t, tau = 0.8, 0.9, 0.5
    mx = mz = bloch_projectors(X_DIR)
    my = bloch_projectors(BlochDirection(theta))
    ens = eternal_ensemble(1.0)
    det_spec = ProtocolSpec(
        rho0=rho0, mx=mx, my=my, mz=mz, policy=UpdatePolicy.deterministic()
    )
    det = joint_distribution_ensemble(ens, det_spec, t, tau)
    np.testing.assert_allclose(
        det.probs.sum(axis=2),
        eternal_joint_deterministic(theta, t, tau, 1.0, x_mean=x_mean),
        atol=1e-14,
    )
    rand_spec = ProtocolSpec(
        rho0=rho0, mx=mx, my=my, mz=mz, policy=uniform_random_policy(my)
    )
    rand = joint_distribution_ensemble(ens, rand_spec, t, tau)
    np.testing.assert_allclose(
        rand.probs.sum(axis=2),
        eternal_joint_random(theta, t, tau, 1.0, x_mean=x_mean),
        atol=1e-14,
    )


# --- damped qubit (Volterra memory kernel) --------------------------------


def test_volterra_matches_laplace_solution():
    step = 2e-3
    amp = decay_amplitude(lorentzian_kernel(1.0, 5.0), 5.0, step)
    err = np.abs(amp.values - exact_g(amp.times)).max()
    assert err < 1e-6


def test_volterra_first_zero_location():
    # exact root of cos 0.3t + sin(0.3t)/3: t = (pi - arctan 3) / 0.3
    amp = decay_amplitude(lorentzian_kernel(1.0, 5.0), 8.0, 1e-3)
    expected = (math.pi - math.atan(3.0)) / 0.3
    assert abs(expected - 6.308489603971848) < 1e-12
    values = amp.values
    k = int(np.argmax(values < 0.0))
    # linear interpolation of the sign change
    t0 = amp.times[k - 1] + amp.step * values[k - 1] / (values[k - 1] - values[k])
    assert abs(t0 - expected) < 1e-5


def test_solve_volterra_validates_input():
    with pytest.raises(ValueError):
        decay_amplitude(lorentzian_kernel(1.0, 5.0), 1.0, 0.3)  # not integer steps
    kernel = lorentzian_kernel(1.0, 5.0)
    values = solve_volterra(kernel(np.arange(3) * 0.1), 0.1)
    assert values[0] == 1.0


def test_two_time_amplitude_against_quadrature_oracles():
    amp = decay_amplitude(lorentzian_kernel(1.0, 5.0), 5.0, 1e-3)
    for (t, tau), expected in G2_ORACLES.items():
        assert abs(amp.g2(t, tau) - expected) < 5e-6, (t, tau)


def test_two_time_amplitude_structure():
    amp = decay_amplitude(lorentzian_kernel(1.0, 5.0), 4.0, 2e-3)
    assert amp.g2(3.7, 0.0) == 0.0
    assert amp.g2(0.0, 2.2) == 0.0
    rng = np.random.default_rng(12)
    for _ in range(20):
        t, tau = rng.uniform(0.0, 4.0, size=2)
        assert abs(amp.g2(t, tau) - amp.g2(tau, t)) <= 1e-10
    # interpolation consistency at a grid node
    assert abs(amp.g2(1.0, 2.0) - amp.g2(1.0 + 1e-12, 2.0)) < 1e-9


def test_dissipative_cpf_relations():
    amp = decay_amplitude(lorentzian_kernel(1.0, 5.0), 4.0, 2e-3)
    t, tau = 1.3, 2.1
    g2 = amp.g2(t, tau)
    assert abs(dissipative_cpf_random(amp, t, tau, "zzz") - g2 * g2) < 1e-15
    assert abs(dissipative_cpf_random(amp, t, tau, "xzx") + g2) < 1e-15
    g_t = float(amp.g(t))
    prefactor = (1.0 - 0.5 * g_t * g_t) ** -2
    assert abs(dissipative_memory_prefactor(amp, t) - prefactor) < 1e-15
    assert (
        abs(
            dissipative_cpf_deterministic(amp, t, tau, "xzx")
            - prefactor * dissipative_cpf_random(amp, t, tau, "xzx")
        )
        < 1e-15
    )
    with pytest.raises(ValueError):
        dissipative_cpf_random(amp, t, tau, "yyy")


@settings(max_examples=25, deadline=None)
@given(
    t=st.floats(0.0, 4.0),
    tau=st.floats(0.0, 4.0),
)
def test_dissipative_zzz_random_is_nonnegative(t, tau):
    amp = _shared_amp()
    assert dissipative_cpf_random(amp, t, tau, "zzz") >= 0.0


_AMP_CACHE = {}


def _shared_amp():
    if "amp" not in _AMP_CACHE:
        _AMP_CACHE["amp"] = decay_amplitude(lorentzian_kernel(1.0, 5.0), 4.0, 2e-3)
    return _AMP_CACHE["amp"]


# --- ohmic dephasing -------------------------------------------------------


def test_dephasing_decay_closed_form():
    gamma_t, phi_t = dephasing_decay(1.0, 1.0)
    assert abs(gamma_t - 0.5 * math.log(2.0)) < 1e-15
    assert abs(phi_t - math.pi / 4.0) < 1e-15
    g2, p2 = dephasing_decay(2.0, 1.0, coupling=3.0)
    assert abs(g2 - 1.5 * math.log(5.0)) < 1e-14
    assert abs(p2 - 3.0 * math.atan(2.0)) < 1e-14


def test_dephasing_frozen_values():
    rand = dephasing_cpf_random(0.0, 1.0, 1.0, 1.0)
    assert abs(rand - 0.316227766016838) < 1e-14  # 1 / sqrt(10)
    assert abs(rand - 1.0 / math.sqrt(10.0)) < 1e-14
    det = dephasing_cpf_deterministic(math.pi / 2, 1.0, 1.0, 1.0)
    assert abs(det - (-0.055901699437494734)) < 1e-14  # -1 / (8 sqrt 5)
    assert abs(det + 1.0 / (8.0 * math.sqrt(5.0))) < 1e-14


def test_dephasing_random_vanishes_at_orthogonal_first_measurement():
    for t in (0.2, 1.0, 3.7):
        assert abs(dephasing_cpf_random(math.pi / 2, t, t, 1.0)) < 1e-12


def test_dephasing_record_structure():
    theta, t, tau = 0.7, 0.9, 1.6
    plus = dephasing_cpf_random(theta, t, tau, 1.0, record=1.0)
    minus = dephasing_cpf_random(theta, t, tau, 1.0, record=-1.0)
    assert abs(plus + minus) < 1e-15  # odd in the record
    det_plus = dephasing_cpf_deterministic(theta, t, tau, 1.0, record=1.0)
    det_minus = dephasing_cpf_deterministic(theta, t, tau, 1.0, record=-1.0)
    # record-odd part of the deterministic value is the random value;
    # record-even part is the sinh memory term
    assert abs((det_plus - det_minus) / 2 - plus) < 1e-14
    g_t, p_t = dephasing_decay(t, 1.0)
    g_tau, p_tau = dephasing_decay(tau, 1.0)
    g_sum, _ = dephasing_decay(t + tau, 1.0)
    memory = math.sin(theta) * math.exp(-(g_t + g_tau)) * math.sinh(g_t + g_tau - g_sum)
    assert abs((det_plus + det_minus) / 2 - memory) < 1e-14
    # at theta = 0 the sinh term vanishes: deterministic equals random
    assert (
        abs(
            dephasing_cpf_deterministic(0.0, t, tau, 1.0)
            - dephasing_cpf_random(0.0, t, tau, 1.0)
        )
        < 1e-15
    )

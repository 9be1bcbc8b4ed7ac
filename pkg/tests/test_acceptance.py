"""Acceptance gate: the eleven release criteria, one test per criterion.

Each test records a single pass/fail line, emitted as an "acceptance
criteria" section at the end of the pytest run, so a full run yields a
compact checklist. Tolerances and runtime budgets are asserted inside the
tests; a FAIL line always accompanies a pytest failure.
"""

import contextlib
import math
import time

import numpy as np

from conftest import (
    ACCEPTANCE_LINES,
    random_density,
    random_hermitian,
    random_measurements,
    random_direction,
    random_pauli_ensemble,
)

from bifscan.analytic import (
    decay_amplitude,
    dephasing_cpf_deterministic,
    dephasing_cpf_random,
    dissipative_cpf_deterministic,
    dissipative_cpf_random,
    dissipative_memory_prefactor,
    eternal_cpf_deterministic,
    eternal_ensemble,
    eternal_joint_deterministic,
    eternal_joint_random,
    lorentzian_kernel,
)
from bifscan.channels import (
    BipartiteModel,
    NoiseEnsemble,
    UnitaryChannel,
    check_env_invariance,
    classical_rate_model,
    commuting_decomposition,
)
from bifscan.cli import main
from bifscan.cpf import cpf_summary, table3_summary
from bifscan.linalg import density_matrix, tensor
from bifscan.measurements import (
    BlochDirection,
    UpdatePolicy,
    X_DIR,
    bloch_eigenstates,
    bloch_projectors,
    uniform_random_policy,
)
from bifscan.montecarlo import ensemble_sampler, sample_counts
from bifscan.protocol import (
    ProtocolSpec,
    joint_distribution_bipartite,
    joint_distribution_ensemble,
    stage_tables_ensemble,
)

PLUS_Z = density_matrix(np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex))


@contextlib.contextmanager
def report(num: int, label: str):
    ok = False
    try:
        yield
        ok = True
    finally:
        ACCEPTANCE_LINES.append(
            f"criterion {num:02d} ({label}): {'PASS' if ok else 'FAIL'}"
        )


def exact_g(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return np.exp(-t / 10.0) * (np.cos(0.3 * t) + np.sin(0.3 * t) / 3.0)


def eternal_spec(theta: float, deterministic: bool) -> ProtocolSpec:
    my = bloch_projectors(BlochDirection(theta))
    policy = (
        UpdatePolicy.deterministic() if deterministic else uniform_random_policy(my)
    )
    return ProtocolSpec(
        rho0=PLUS_Z,
        mx=bloch_projectors(X_DIR),
        my=my,
        mz=bloch_projectors(X_DIR),
        policy=policy,
    )


def test_criterion_01_eternal_exactness():
    with report(1, "eternal-model engine exactness"):
        start = time.perf_counter()
        ens = eternal_ensemble(1.0)
        worst = 0.0
        for theta in (math.pi / 6, math.pi / 4, math.pi / 2):
            for gt in (0.25, 0.5, 1.0, 2.0, 4.0):
                det = joint_distribution_ensemble(
                    ens, eternal_spec(theta, True), gt, gt
                )
                rand = joint_distribution_ensemble(
                    ens, eternal_spec(theta, False), gt, gt
                )
                worst = max(
                    worst,
                    np.abs(
                        det.probs.sum(axis=2)
                        - eternal_joint_deterministic(theta, gt, gt, 1.0)
                    ).max(),
                    np.abs(
                        rand.probs.sum(axis=2)
                        - eternal_joint_random(theta, gt, gt, 1.0)
                    ).max(),
                )
        elapsed = time.perf_counter() - start
        assert worst <= 1e-12, f"max table deviation {worst:.3e}"
        assert elapsed < 1.0, f"took {elapsed:.2f}s"


def test_criterion_02_random_scheme_zero_theorem():
    with report(2, "random-scheme zero theorem, 200 ensembles"):
        start = time.perf_counter()
        rng = np.random.default_rng(20240)
        worst_corr = 0.0
        worst_resid = 0.0
        for _ in range(200):
            ensemble = random_pauli_ensemble(rng)
            mx, my, mz = random_measurements(rng)
            states = bloch_eigenstates(random_direction(rng))
            probs = rng.dirichlet(np.ones(2), size=2).T
            spec = ProtocolSpec(
                rho0=random_density(rng, 2),
                mx=mx,
                my=my,
                mz=mz,
                policy=UpdatePolicy.random(states, probs),
            )
            t, tau = rng.uniform(0.1, 2.0, size=2)
            summary = cpf_summary(joint_distribution_ensemble(ensemble, spec, t, tau))
            finite = np.isfinite(summary.correlations)
            if finite.any():
                worst_corr = max(worst_corr, np.abs(summary.correlations[finite]).max())
                worst_resid = max(worst_resid, np.abs(summary.residuals[finite]).max())
        elapsed = time.perf_counter() - start
        assert worst_corr <= 1e-12, f"max |C| {worst_corr:.3e}"
        assert worst_resid <= 1e-12, f"max residual {worst_resid:.3e}"
        assert elapsed < 30.0, f"took {elapsed:.2f}s"


def test_criterion_03_eternal_deterministic_values():
    with report(3, "eternal deterministic values"):
        value = eternal_cpf_deterministic(math.pi / 2, 1.0, 1.0, 1.0)
        assert abs(value - 0.1869113) <= 1e-6
        asymptote = eternal_cpf_deterministic(math.pi / 2, 10.0, 10.0, 1.0)
        assert abs(asymptote - 0.25) <= 1e-6
        # the engine reproduces the same number
        dist = joint_distribution_ensemble(
            eternal_ensemble(1.0), eternal_spec(math.pi / 2, True), 1.0, 1.0
        )
        engine = table3_summary(dist.probs.sum(axis=2)).correlations[0]
        assert abs(engine - value) <= 1e-12


def test_criterion_04_volterra_solver():
    with report(4, "Volterra solver vs Laplace oracle"):
        start = time.perf_counter()
        kernel = lorentzian_kernel(1.0, 5.0)
        amp_fine = decay_amplitude(kernel, 10.0, 1e-3)
        err_fine = np.abs(amp_fine.values - exact_g(amp_fine.times)).max()
        assert err_fine <= 1e-6, f"max error {err_fine:.3e} at h=1e-3"
        amp_coarse = decay_amplitude(kernel, 10.0, 2e-3)
        err_coarse = np.abs(amp_coarse.values - exact_g(amp_coarse.times)).max()
        ratio = err_coarse / err_fine
        assert abs(ratio - 4.0) <= 0.8, f"halving ratio {ratio:.3f} not ~4"
        elapsed = time.perf_counter() - start
        assert elapsed < 5.0, f"took {elapsed:.2f}s"


def test_criterion_05_dissipative_structural_identities():
    with report(5, "dissipative structural identities, 50x50 grid"):
        amp = decay_amplitude(lorentzian_kernel(1.0, 5.0), 4.0, 2e-3)
        grid = np.linspace(0.0, 4.0, 50)
        worst_ratio = 0.0
        worst_sym = 0.0
        for t in grid:
            prefactor = dissipative_memory_prefactor(amp, t)
            assert amp.g2(t, 0.0) == 0.0
            for tau in grid:
                rand = dissipative_cpf_random(amp, t, tau, "zzz")
                assert rand >= 0.0
                det = dissipative_cpf_deterministic(amp, t, tau, "zzz")
                worst_ratio = max(worst_ratio, abs(det - prefactor * rand))
                worst_sym = max(worst_sym, abs(amp.g2(t, tau) - amp.g2(tau, t)))
        assert worst_ratio <= 1e-9, f"ratio identity off by {worst_ratio:.3e}"
        assert worst_sym <= 1e-10, f"symmetry off by {worst_sym:.3e}"


def test_criterion_06_dephasing_values():
    # The quoted 7-digit constants abbreviate the frozen full-precision
    # oracles 1/sqrt(10) and -1/(8 sqrt 5); the 1e-9 tolerance applies to
    # those, the printed digits are checked at their own precision.
    with report(6, "dephasing closed-form values"):
        rand = dephasing_cpf_random(0.0, 1.0, 1.0, 1.0, record=1.0)
        assert abs(rand - 0.316227766016838) <= 1e-9
        assert abs(rand - 0.3162278) <= 5e-8
        grid = np.linspace(0.0, 5.0, 25)
        worst = max(
            abs(dephasing_cpf_random(math.pi / 2, t, tau, 1.0))
            for t in grid
            for tau in grid
        )
        assert worst <= 1e-12, f"theta=pi/2 random value {worst:.3e}"
        det = dephasing_cpf_deterministic(math.pi / 2, 1.0, 1.0, 1.0)
        assert abs(det - (-0.055901699437494734)) <= 1e-9
        assert abs(det - (-0.0559017)) <= 5e-8


def random_commuting_model(rng: np.random.Generator) -> BipartiteModel:
    d_e = int(rng.integers(2, 5))
    # random environment basis, shared by H_e and the interaction blocks
    a = rng.normal(size=(d_e, d_e)) + 1j * rng.normal(size=(d_e, d_e))
    v, _ = np.linalg.qr(a)
    h_e = (v * rng.normal(size=d_e)) @ v.conj().T
    h_e = 0.5 * (h_e + h_e.conj().T)
    h_i = np.zeros((2 * d_e, 2 * d_e), dtype=complex)
    for k in range(d_e):
        proj = np.outer(v[:, k], v[:, k].conj())
        h_i += tensor(random_hermitian(rng, 2), proj)
    return BipartiteModel.unitary(
        h_s=random_hermitian(rng, 2),
        h_e=h_e,
        h_i=h_i,
        sigma0=random_density(rng, d_e),
    )


def test_criterion_07_commuting_hamiltonian_theorem():
    with report(7, "commuting-Hamiltonian theorem, 100 models"):
        start = time.perf_counter()
        rng = np.random.default_rng(777)
        worst_corr = 0.0
        worst_table = 0.0
        for _ in range(100):
            model = random_commuting_model(rng)
            mixture = commuting_decomposition(model)
            ens = NoiseEnsemble(
                weights=mixture.weights,
                channels=tuple(
                    UnitaryChannel(h) for h in mixture.effective_hamiltonians
                ),
            )
            mx, my, mz = random_measurements(rng)
            states = bloch_eigenstates(random_direction(rng))
            probs = rng.dirichlet(np.ones(2), size=2).T
            spec = ProtocolSpec(
                rho0=random_density(rng, 2),
                mx=mx,
                my=my,
                mz=mz,
                policy=UpdatePolicy.random(states, probs),
            )
            t, tau = rng.uniform(0.3, 2.0, size=2)
            dist_bi = joint_distribution_bipartite(model, spec, t, tau)
            dist_mix = joint_distribution_ensemble(ens, spec, t, tau)
            worst_table = max(
                worst_table, np.abs(dist_bi.probs - dist_mix.probs).max()
            )
            summary = cpf_summary(dist_bi)
            finite = np.isfinite(summary.correlations)
            if finite.any():
                worst_corr = max(
                    worst_corr, np.abs(summary.correlations[finite]).max()
                )
        elapsed = time.perf_counter() - start
        assert worst_corr <= 1e-10, f"max |C| {worst_corr:.3e}"
        assert worst_table <= 1e-10, f"max table gap {worst_table:.3e}"
        assert elapsed < 120.0, f"took {elapsed:.2f}s"


def test_criterion_08_invariant_environment_theorem():
    with report(8, "invariant-environment theorem, 20 rate models"):
        rng = np.random.default_rng(88)
        worst = 0.0
        for _ in range(20):
            d_e = int(rng.integers(2, 4))
            blocks = [random_hermitian(rng, 2) for _ in range(d_e)]
            rates = {
                (j, i): float(rng.uniform(0.1, 1.0))
                for j in range(d_e)
                for i in range(d_e)
                if j != i
            }
            model = classical_rate_model(blocks, rates, rng.uniform(0.2, 1.0, d_e))
            assert check_env_invariance(model)
            mx, my, mz = random_measurements(rng)
            spec = ProtocolSpec(
                rho0=random_density(rng, 2),
                mx=mx,
                my=my,
                mz=mz,
                policy=uniform_random_policy(my),
            )
            t, tau = rng.uniform(0.2, 1.5, size=2)
            summary = cpf_summary(joint_distribution_bipartite(model, spec, t, tau))
            finite = np.isfinite(summary.residuals)
            worst = max(worst, np.abs(summary.residuals[finite]).max())
        assert worst <= 1e-8, f"max residual {worst:.3e}"


EXCHANGE_TOML = """
[model.bipartite]
h_s = [[0.0, 0.0], [0.0, 0.0]]
h_e = [[0.0, 0.0], [0.0, 0.0]]
h_i = [
  [0.0, 0.0, 0.0, 0.0],
  [0.0, 0.0, 1.0, 0.0],
  [0.0, 1.0, 0.0, 0.0],
  [0.0, 0.0, 0.0, 0.0],
]
sigma0 = [[0.0, 0.0], [0.0, 1.0]]

[scheme]
t = [1.0]
tau = [1.0]
rho0 = "x+"
"""


def test_criterion_09_bif_detection_positive_control(tmp_path):
    with report(9, "BIF detection positive control"):
        model = tmp_path / "exchange.toml"
        model.write_text(EXCHANGE_TOML, encoding="utf-8")
        out = tmp_path / "sweep.csv"
        code = main(["check-bif", str(model), "--out", str(out)])
        assert code == 1, f"expected exit 1, got {code}"
        lines = out.read_text(encoding="utf-8").strip().splitlines()
        header = lines[0].split(",")
        col = header.index("cpf_value")
        values = [abs(float(line.split(",")[col])) for line in lines[1:]]
        assert max(values) > 1e-3, f"max |C| {max(values):.3e}"


def test_criterion_10_monte_carlo_consistency():
    with report(10, "Monte Carlo consistency, 2x20 runs of 1e6"):
        start = time.perf_counter()
        n = 1_000_000
        within = 0
        total = 0
        for deterministic in (True, False):
            tables = stage_tables_ensemble(
                eternal_ensemble(1.0), eternal_spec(math.pi / 2, deterministic),
                1.0, 1.0,
            )
            sampler = ensemble_sampler(tables)
            exact = sampler.exact.probs
            sigma = np.sqrt(exact * (1.0 - exact) / n)
            for seed in range(20):
                freq = sample_counts(sampler, n, seed).frequencies()
                dev = np.abs(freq - exact)
                ok = np.where(sigma > 0.0, dev <= 4.0 * sigma, dev == 0.0)
                within += int(ok.sum())
                total += ok.size
            # bitwise reproducibility and worker independence on seed 0
            a = sample_counts(sampler, n, 0)
            b = sample_counts(sampler, n, 0)
            c = sample_counts(sampler, n, 0, n_workers=3)
            np.testing.assert_array_equal(a.counts, b.counts)
            np.testing.assert_array_equal(a.counts, c.counts)
        elapsed = time.perf_counter() - start
        frac = within / total
        assert frac >= 0.99, f"only {frac:.4f} of cells within 4 sigma"
        assert elapsed < 120.0, f"took {elapsed:.2f}s"


def test_criterion_11_figure_reproduction(tmp_path):
    with report(11, "figure panel structural checks"):
        start = time.perf_counter()
        rows = {}
        for panel in "abc":
            out = tmp_path / f"{panel}.csv"
            assert main(["fig1", panel, "--out", str(out), "--no-plot"]) == 0
            lines = out.read_text(encoding="utf-8").strip().splitlines()
            header = lines[0].split(",")
            rows[panel] = [dict(zip(header, line.split(","))) for line in lines[1:]]
        elapsed = time.perf_counter() - start

        # (a) random identically zero; deterministic nonnegative with a
        # nonvanishing large-t limit for every tilt
        a = rows["a"]
        assert all(
            float(r["cpf_value"]) == 0.0 for r in a if r["scheme"] == "random"
        )
        dets = [r for r in a if r["scheme"] == "deterministic"]
        assert all(float(r["cpf_value"]) >= -1e-15 for r in dets)
        for theta in sorted({r["theta"] for r in dets}):
            tail = [float(r["cpf_value"]) for r in dets if r["theta"] == theta][-4:]
            expected = math.sin(float(theta)) ** 2 / 4.0
            assert min(tail) > 0.8 * expected, f"theta={theta} limit decayed"

        # (b) both schemes nonzero for both direction triples
        b = rows["b"]
        for directions in ("z/z/z", "x/z/x"):
            for scheme in ("deterministic", "random"):
                peak = max(
                    abs(float(r["cpf_value"]))
                    for r in b
                    if r["directions"] == directions and r["scheme"] == scheme
                )
                assert peak > 1e-3, f"{scheme} {directions} flat"

        # (c) random nonzero except at the orthogonal tilt
        c = [r for r in rows["c"] if r["scheme"] == "random"]
        thetas = sorted({float(r["theta"]) for r in c})
        for theta in thetas:
            peak = max(
                abs(float(r["cpf_value"]))
                for r in c
                if float(r["theta"]) == theta
            )
            if abs(theta - math.pi / 2) < 1e-12:
                assert peak <= 1e-12, f"orthogonal tilt peak {peak:.3e}"
            else:
                assert peak > 0.05, f"theta={theta} random column flat"
        assert elapsed < 30.0, f"CSV generation took {elapsed:.2f}s"

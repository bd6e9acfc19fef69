"""General Gaussian (non-white) noise dynamics."""

import numpy as np
import pytest

from collapsim.colored import (
    CorrelationSpec,
    run_commuting_nonwhite_ensemble,
    colored_cooked_density,
    colored_damping_factor,
    colored_instantaneous_rate,
    commuting_nonwhite_step,
    run_commuting_nonwhite,
    sample_colored_path,
)
from collapsim.cooking import linear_exact_commuting, two_level_analytic
from collapsim.errors import NonCommutingError
from collapsim.noise import sample_wiener
from collapsim.operators import ProjectorFamily

from oracles import double_integral_by_quadrature

TWO = ProjectorFamily.two_level()


# ------------------------------------------------------------------ specs


def test_white_spec_falls_back_to_wiener():
    a = sample_colored_path(CorrelationSpec.white(), 500, 0.01, 1.3, 42)
    b = sample_wiener(42, 500, 1, 1.3, 0.01)
    assert np.array_equal(a.increments, b.increments)


def test_exponential_autocorrelation():
    tau, dt, gamma = 0.5, 0.05, 2.0
    path = sample_colored_path(CorrelationSpec.exponential(tau), 100_000, dt, gamma, 9)
    w = path.increments[:, 0] / dt
    assert np.var(w) == pytest.approx(gamma / (2 * tau), rel=0.02)
    for lag in (1, 2, 5):
        corr = np.mean(w[:-lag] * w[lag:]) / np.var(w)
        assert corr == pytest.approx(np.exp(-lag * dt / tau), abs=0.02)


def test_gaussian_kernel_small_tau_approaches_white_variance():
    # integrated variance over [0, T] approaches gamma*T as tau -> 0
    gamma, t_span = 1.5, 2.0
    for tau, tol in ((0.2, 0.12), (0.05, 0.03)):
        spec = CorrelationSpec.gaussian(tau)
        var = gamma * spec.double_integral(t_span)
        assert var == pytest.approx(gamma * t_span, rel=tol)
    # and sampled paths reproduce the integrated variance
    spec = CorrelationSpec.gaussian(0.2)
    xs = []
    for j in range(400):
        path = sample_colored_path(spec, 200, 0.01, gamma, 77, traj_index=j)
        xs.append(path.increments.sum())
    assert np.var(xs) == pytest.approx(gamma * spec.double_integral(2.0), rel=0.25)


def test_custom_kernel_psd_validation():
    dt = 0.1
    good = np.exp(-np.arange(20) * dt / 0.4) / (2 * 0.4)
    CorrelationSpec.custom(good, dt)
    bad = np.array([1.0, 0.9, 0.0])  # lag-1 too strong for zero lag-2
    with pytest.raises(ValueError, match="positive semidefinite"):
        CorrelationSpec.custom(bad, dt)


def test_double_integral_closed_forms_vs_quadrature():
    for spec in (CorrelationSpec.gaussian(0.7), CorrelationSpec.exponential(0.7)):
        for t_span in (0.3, 1.1, 4.0):
            closed = spec.double_integral(t_span)
            oracle = double_integral_by_quadrature(spec.kernel, t_span)
            assert closed == pytest.approx(oracle, rel=1e-8)


# ---------------------------------------------------------------- damping


def test_stationary_gaussian_rate_equals_white():
    for tau in (0.01, 0.3, 2.0):
        spec = CorrelationSpec.gaussian(tau)
        rate = colored_instantaneous_rate(TWO, spec, 1.7, 0, 1, None)
        white = colored_instantaneous_rate(TWO, CorrelationSpec.white(), 1.7, 0, 1, None)
        assert rate == pytest.approx(white, rel=1e-12)


def test_exponential_rate_rampup_factor():
    tau, gamma = 0.8, 1.1
    spec = CorrelationSpec.exponential(tau)
    quad = float(
        (TWO.eigenvalues[0] - TWO.eigenvalues[1])
        @ (TWO.eigenvalues[0] - TWO.eigenvalues[1])
    )
    for t in (0.2, 0.9, 3.0):
        rate = colored_instantaneous_rate(TWO, spec, gamma, 0, 1, t)
        expected = 0.5 * gamma * quad * (1.0 - np.exp(-t / tau))
        assert rate == pytest.approx(expected, rel=1e-12)


def test_damping_factor_diagonal_invariant():
    spec = CorrelationSpec.gaussian(0.4)
    assert colored_damping_factor(TWO, spec, 1.0, 0.0, 5.0, 0, 0) == 1.0
    off = colored_damping_factor(TWO, spec, 1.0, 0.0, 5.0, 0, 1)
    assert 0.0 < off < 1.0


def test_damping_exponent_nonpositive_for_psd_kernels():
    for spec in (
        CorrelationSpec.gaussian(0.3),
        CorrelationSpec.exponential(1.2),
        CorrelationSpec.white(),
    ):
        for t in (0.1, 1.0, 10.0):
            factor = colored_damping_factor(TWO, spec, 0.9, 0.0, t, 0, 1)
            assert factor <= 1.0 + 1e-12


# ------------------------------------------------------------ cooked density


def test_colored_cooked_density_white_limit_matches_two_level():
    gamma, t = 1.0, 2.0
    white_f = CorrelationSpec.white().double_integral(t)
    a = colored_cooked_density((0.3, 0.7), (1.0, -1.0), gamma, white_f)
    b = two_level_analytic((0.3, 0.7), (1.0, -1.0), gamma, t)
    xs = np.linspace(-12, 12, 101)
    assert np.allclose(a.pdf(xs), b.pdf(xs), atol=1e-14)


def test_colored_cooked_density_separation_grows():
    gamma = 1.0
    spec = CorrelationSpec.exponential(0.5)
    ratios = []
    for t in (1.0, 4.0, 16.0):
        f = spec.double_integral(t)
        dens = colored_cooked_density((0.5, 0.5), (1.0, -1.0), gamma, f)
        separation = dens.means[0] - dens.means[1]
        ratios.append(separation / np.sqrt(dens.variance))
    assert ratios[0] < ratios[1] < ratios[2]
    assert ratios[2] > 15.0  # reduction condition: diverging separation


# ------------------------------------------------------- trajectory steps


def test_white_step_matches_exact_linear_solution_shared_noise():
    gamma, dt, steps = 1.0, 0.01, 300
    spec = CorrelationSpec.white()
    path = sample_wiener(11, steps, 1, gamma, dt)
    psi = np.sqrt(np.array([0.4, 0.6], dtype=complex))
    logw = 0.0
    f_prev = 0.0
    for k in range(steps):
        f_now = spec.double_integral((k + 1) * dt)
        psi, dlog = commuting_nonwhite_step(
            psi, TWO, path.increments[k], gamma, spec, f_now - f_prev
        )
        logw += dlog
        f_prev = f_now
    exact, exact_logw = linear_exact_commuting(
        np.sqrt(np.array([0.4, 0.6], dtype=complex)),
        TWO,
        np.array([float(path.increments.sum())]),
        gamma,
        steps * dt,
    )
    assert np.max(np.abs(psi - exact)) < 1e-10
    assert logw == pytest.approx(exact_logw, abs=1e-10)


def test_eigenstate_fixed_ray():
    psi = np.array([0.0, 1.0], dtype=complex)
    spec = CorrelationSpec.exponential(0.4)
    out, _ = commuting_nonwhite_step(psi, TWO, np.array([0.31]), 1.0, spec, 0.05)
    assert np.allclose(np.abs(out), np.abs(psi))


def test_noncommuting_hamiltonian_rejected():
    psi = np.sqrt(np.array([0.5, 0.5], dtype=complex))
    h = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    spec = CorrelationSpec.exponential(0.4)
    with pytest.raises(NonCommutingError):
        commuting_nonwhite_step(
            psi, TWO, np.array([0.1]), 1.0, spec, 0.01, h_matrix=h, dt=0.01
        )


def test_commuting_hamiltonian_allowed():
    psi = np.sqrt(np.array([0.5, 0.5], dtype=complex))
    h = np.diag([0.3, -0.4]).astype(complex)  # commutes with the family
    spec = CorrelationSpec.exponential(0.4)
    out, _ = commuting_nonwhite_step(
        psi, TWO, np.array([0.1]), 1.0, spec, 0.01, h_matrix=h, dt=0.01
    )
    assert abs(np.linalg.norm(out) - 1.0) < 1e-12


def test_batch_matches_single_path_runner():
    spec = CorrelationSpec.exponential(0.3)
    psi0 = np.sqrt(np.array([0.35, 0.65], dtype=complex))
    states, logws = run_commuting_nonwhite_ensemble(
        psi0, TWO, spec, 1.0, 2.0, 80, 314, 5
    )
    for j in range(5):
        psi, logw = run_commuting_nonwhite(psi0, TWO, spec, 1.0, 2.0, 80, 314, j)
        assert np.max(np.abs(psi - states[j])) < 1e-12
        assert logw == pytest.approx(logws[j], abs=1e-12)


def test_colored_born_frequencies():
    # exponential kernel, large t: outcome frequencies match initial weights
    gamma, tau, t_end, steps = 1.0, 0.3, 6.0, 480
    spec = CorrelationSpec.exponential(tau)
    w0 = 0.35
    psi0 = np.sqrt(np.array([w0, 1 - w0], dtype=complex))
    states, logws = run_commuting_nonwhite_ensemble(
        psi0, TWO, spec, gamma, t_end, steps, 314, 20_000
    )
    z0s = np.abs(states[:, 0]) ** 2
    w = np.exp(logws - logws.max())
    w /= w.sum()
    freq = float(np.sum(w * (z0s > 0.5)))
    n_eff = 1.0 / np.sum(w**2)
    assert abs(freq - w0) < 3.0 * np.sqrt(w0 * (1 - w0) / n_eff)


def test_colored_raw_norm_average_conserved():
    # commuting regime martingale at modest gamma*f(t)
    gamma, tau, t_end, steps = 1.0, 0.3, 0.5, 100
    spec = CorrelationSpec.exponential(tau)
    psi0 = np.sqrt(np.array([0.5, 0.5], dtype=complex))
    _, logws = run_commuting_nonwhite_ensemble(
        psi0, TWO, spec, gamma, t_end, steps, 161, 20_000
    )
    assert abs(np.exp(logws).mean() - 1.0) < 0.01


def test_colored_ks_against_analytic_density():
    # histogram of x(t) under cooked weights vs the mixture density
    gamma, tau, t_end, steps = 1.0, 0.4, 4.0, 640
    spec = CorrelationSpec.exponential(tau)
    w0 = (0.5, 0.5)
    psi0 = np.sqrt(np.array(w0, dtype=complex))
    n = 4000
    xs = np.empty(n)
    logws = np.empty(n)
    for j in range(n):
        path = sample_colored_path(spec, steps, t_end / steps, gamma, 271, j)
        xs[j] = path.increments.sum()
        psi, logws[j] = commuting_nonwhite_step(
            psi0, TWO, np.array([xs[j]]), gamma, spec, spec.double_integral(t_end)
        )
    dens = colored_cooked_density(w0, (1.0, -1.0), gamma, spec.double_integral(t_end))
    order = np.argsort(xs)
    w = np.exp(logws[order] - logws.max())
    w /= w.sum()
    ks = float(np.max(np.abs(np.cumsum(w) - dens.cdf(xs[order]))))
    n_eff = 1.0 / np.sum(w**2)
    assert ks < 1.358 / np.sqrt(n_eff)

"""Independent oracles used to pin expected values in the tests.

Everything here deliberately avoids the production code paths: closed
forms are re-derived from scratch, integrals use scipy quadrature, and
the kernel master equation is integrated as a brute-force ODE.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad, solve_ivp


def free_gaussian_q_var(t: float, sigma0: float, mass: float, hbar: float = 1.0):
    """Position variance of a minimal Gaussian packet under free evolution:
    sigma0^2 * (1 + (hbar t / 2 m sigma0^2)^2)."""
    return sigma0**2 * (1.0 + (hbar * t / (2.0 * mass * sigma0**2)) ** 2)


def erf_beta_by_quadrature(q: float, alpha: float) -> float:
    """beta = 1 - mean of exp(-z^2) over (-y, y), y = (sqrt(alpha)/2) q,
    via adaptive quadrature (no erf)."""
    y = 0.5 * np.sqrt(alpha) * q
    integral, _ = quad(lambda z: np.exp(-(z**2)), -y, y, epsabs=1e-13, epsrel=1e-13)
    return 1.0 - integral / y


def damping_integral_by_quadrature(
    k: float, u: float, t: float, alpha: float, mass: float
) -> float:
    """int_0^t exp(-(alpha/4)(u - k tau/m)^2) dtau by adaptive quadrature."""
    val, _ = quad(
        lambda tau: np.exp(-0.25 * alpha * (u - k * tau / mass) ** 2),
        0.0,
        t,
        epsabs=1e-13,
        epsrel=1e-13,
    )
    return val


def master_kernel_by_ode(
    psi0_amps: np.ndarray,
    dx: float,
    mass: float,
    lam: float,
    alpha: float,
    t: float,
    rtol: float = 1e-10,
) -> np.ndarray:
    """Brute-force integration of the damped free-kernel equation
    d rho/dt = (i/2m)(d^2/dq'^2 - d^2/dq''^2) rho - lam (1 - G) rho
    on the периodic grid with spectral derivatives."""
    n = psi0_amps.shape[0]
    k = 2.0 * np.pi * np.fft.fftfreq(n, dx)
    x = dx * np.arange(n)
    u = x[:, None] - x[None, :]
    length = n * dx
    u -= length * np.round(u / length)
    damp = lam * (1.0 - np.exp(-0.25 * alpha * u**2))
    rho0 = np.outer(psi0_amps, psi0_amps.conj())

    def rhs(_t, y):
        rho = y.reshape(n, n)
        d2a = np.fft.ifft(-(k**2)[:, None] * np.fft.fft(rho, axis=0), axis=0)
        d2b = np.fft.ifft(-(k**2)[None, :] * np.fft.fft(rho, axis=1), axis=1)
        return ((0.5j / mass) * (d2a - d2b) - damp * rho).ravel()

    sol = solve_ivp(
        rhs, (0.0, t), rho0.ravel(), rtol=rtol, atol=1e-12, method="DOP853"
    )
    return sol.y[:, -1].reshape(n, n)


def lindblad_by_ode(
    rho0: np.ndarray,
    h: np.ndarray | None,
    ops: list[np.ndarray],
    gamma: float,
    t: float,
) -> np.ndarray:
    """RK integration of the ensemble generator, independent of the
    superoperator-exponential route."""
    dim = rho0.shape[0]

    def rhs(_t, y):
        rho = y.reshape(dim, dim)
        out = np.zeros_like(rho)
        if h is not None:
            out += -1j * (h @ rho - rho @ h)
        for a in ops:
            out += gamma * (a @ rho @ a.conj().T)
            asq = a.conj().T @ a
            out += -0.5 * gamma * (asq @ rho + rho @ asq)
        return out.ravel()

    sol = solve_ivp(
        rhs, (0.0, t), rho0.ravel(), rtol=1e-10, atol=1e-12, method="DOP853"
    )
    return sol.y[:, -1].reshape(dim, dim)


def double_integral_by_quadrature(kernel, t_span: float) -> float:
    """2D adaptive quadrature of a stationary kernel over [0, T]^2, via
    the lag representation 2*int_0^T (T - s) K(s) ds."""
    val, _ = quad(
        lambda s: (t_span - s) * kernel(s), 0.0, t_span, epsabs=1e-12, epsrel=1e-12
    )
    return 2.0 * val


def sphere_energy_by_quadrature(
    mass: float, radius: float, separation: float, g_newton: float
) -> float:
    """U(d) of two uniform spheres by 2D quadrature over one sphere of the
    other sphere's exact potential (axisymmetric reduction)."""
    from scipy.integrate import dblquad

    rho = mass / (4.0 / 3.0 * np.pi * radius**3)

    def potential(r):
        if r >= radius:
            return -g_newton * mass / r
        return -g_newton * mass * (3.0 * radius**2 - r**2) / (2.0 * radius**3)

    def integrand(ct, r):
        dist = np.sqrt(r**2 + separation**2 - 2.0 * r * separation * ct)
        return 2.0 * np.pi * r**2 * rho * potential(dist)

    val, _ = dblquad(integrand, 0.0, radius, -1.0, 1.0, epsabs=1e-12, epsrel=1e-9)
    return val

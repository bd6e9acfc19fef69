"""Exact ensemble-level consequences of the hitting process for a free
particle: the damped-kernel solution, moment corrections, characteristic
times, off-diagonal lifetimes, rate amplification, and energy increase.

Closed forms are in natural units (hbar defaults to 1); the CGS-facing
calculators take hbar explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .errors import IncompatibleHamiltonianError
from .operators import HamiltonianSpec
from .params import CollapseParams
from .schrodinger import split_step_evolve
from .states import DensityMatrix, GridWavefunction

_SQRT_PI = np.sqrt(np.pi)


def damping_time_integral(
    k: np.ndarray, u: np.ndarray, t: float, alpha: float, mass: float
) -> np.ndarray:
    """int_0^t exp(-(alpha/4) (u - k tau / m)^2) dtau, in closed form.

    The integrand is the localization kernel sampled along the free-motion
    characteristic; the antiderivative is an erf difference.
    """
    k = np.asarray(k, dtype=float)
    u = np.asarray(u, dtype=float)
    root = 0.5 * np.sqrt(alpha)
    kt_over_m = k * t / mass
    small = np.abs(root * kt_over_m) < 1e-8
    k_safe = np.where(small, 1.0, k)
    upper = erf(root * u)
    lower = erf(root * (u - kt_over_m))
    moving = (mass * _SQRT_PI) / (k_safe * np.sqrt(alpha)) * (upper - lower)
    static = t * np.exp(-0.25 * alpha * u**2)
    return np.where(small, static, moving)


def damping_factor(
    k: np.ndarray, u: np.ndarray, t: float, params: CollapseParams, mass: float
) -> np.ndarray:
    """F(k, u, t) = exp(-lambda t + lambda * time integral).

    Satisfies F(k, 0, t) in (exp(-lambda t), 1] and F(k,u,t) = F(-k,-u,t).
    """
    lam = params.lambda_rate
    integral = damping_time_integral(k, u, t, params.alpha, mass)
    return np.exp(lam * (integral - t))


@dataclass(frozen=True)
class FreeKernelSolution:
    """Parameter bundle for the free-particle damping factor F(k, u, t).

    F(k, 0, t) lies in (exp(-lambda t), 1] and F is symmetric under
    (k, u) -> (-k, -u), which is what keeps the evolved kernel Hermitian.
    """

    params: CollapseParams
    mass: float
    t: float

    def factor(self, k: np.ndarray, u: np.ndarray) -> np.ndarray:
        return damping_factor(k, u, self.t, self.params, self.mass)


def evolve_schrodinger_kernel(
    kernel: np.ndarray, dx: float, mass: float, t: float
) -> np.ndarray:
    """Free unitary evolution of a position-space kernel (spectral)."""
    n = kernel.shape[0]
    k = 2.0 * np.pi * np.fft.fftfreq(n, dx)
    phase = np.exp(-0.5j * t * k**2 / mass)
    out = np.fft.ifft(np.fft.fft(kernel, axis=0) * phase[:, None], axis=0)
    out = np.conj(
        np.fft.ifft(np.fft.fft(np.conj(out), axis=1) * phase[None, :], axis=1)
    )
    return out


def _diagonal_indices(n: int) -> np.ndarray:
    rows = np.arange(n)[:, None]
    offsets = np.arange(n)[None, :]
    return (rows - offsets) % n


def evolve_free_master(
    initial: GridWavefunction | DensityMatrix,
    params: CollapseParams,
    t: float,
    mass: float | None = None,
    h: HamiltonianSpec | None = None,
) -> DensityMatrix:
    """Kernel of the hitting master equation for a free particle at time t.

    Uses the exact representation: Fourier transform of the Schroedinger
    kernel along the center coordinate, multiplied by the damping factor
    F(k, q'-q'', t), and transformed back.  Each wrapped diagonal of the
    kernel is a uniform center-coordinate grid, so the k-integral is an
    FFT per diagonal and the time integral is closed-form.
    """
    if h is not None and h.kind not in ("free", "none"):
        raise IncompatibleHamiltonianError("incompatible Hamiltonian")
    if isinstance(initial, GridWavefunction):
        mass = initial.mass
        dx = initial.dx
        psi_t = split_step_evolve(initial, HamiltonianSpec.free(), t, 1)
        kernel_sch = np.outer(psi_t.amplitudes, np.conj(psi_t.amplitudes))
        n = initial.n
        length = initial.length
    else:
        if initial.representation != "grid":
            raise ValueError("kernel input must be a grid representation")
        if mass is None:
            raise ValueError("mass is required for kernel input")
        dx = initial.dx
        n = initial.dim
        length = n * dx
        kernel_sch = evolve_schrodinger_kernel(initial.entries, dx, mass, t)
    if params.lambda_rate == 0.0:
        return DensityMatrix(kernel_sch, "grid", dx)

    cols = _diagonal_indices(n)
    diags = kernel_sch[np.arange(n)[:, None], cols]  # [c_index, offset]
    u = dx * np.arange(n)
    u = u - length * np.round(u / length)  # minimum-image separation
    k = 2.0 * np.pi * np.fft.fftfreq(n, dx)
    f = damping_factor(k[:, None], u[None, :], t, params, mass)
    diags = np.fft.ifft(np.fft.fft(diags, axis=0) * f, axis=0)
    out = np.empty_like(kernel_sch)
    out[np.arange(n)[:, None], cols] = diags
    # enforce exact Hermitian symmetry against roundoff
    out = 0.5 * (out + out.conj().T)
    return DensityMatrix(out, "grid", dx)


def free_particle_moments(
    params: CollapseParams,
    mass: float,
    t: float,
    sch_moments: dict[str, float],
    hbar: float = 1.0,
) -> dict[str, float]:
    """Moments of the hitting master evolution from the Schroedinger ones.

    Means are untouched; spreads gain the alpha*lambda corrections
    t^3/(6 m^2), t^2/(4 m), t/2 (position, symmetrized correlation,
    momentum respectively).
    """
    al = params.alpha * params.lambda_rate * hbar**2
    return {
        "q_mean": sch_moments["q_mean"],
        "p_mean": sch_moments["p_mean"],
        "q_var": sch_moments["q_var"] + al * t**3 / (6.0 * mass**2),
        "qp_corr": sch_moments.get("qp_corr", 0.0) + al * t**2 / (4.0 * mass),
        "p_var": sch_moments["p_var"] + al * t / 2.0,
    }


def characteristic_times(
    params: CollapseParams,
    mass: float,
    dq_sch: float,
    dp_sch: float,
    hbar: float = 1.0,
) -> tuple[float, float]:
    """(T1, T2): times over which the spread corrections stay negligible.

    T1 = [6 m^2 dq^2 / (alpha lambda hbar^2)]^(1/3),
    T2 = 2 dp^2 / (alpha lambda hbar^2).
    """
    if not (dq_sch > 0 and dp_sch > 0):
        raise ValueError("spreads must be strictly positive")
    al = params.alpha * params.lambda_rate * hbar**2
    t1 = (6.0 * mass**2 * dq_sch**2 / al) ** (1.0 / 3.0)
    t2 = 2.0 * dp_sch**2 / al
    return t1, t2


def offdiag_damping_beta(q: float, alpha: float) -> float:
    """beta(q) = 1 - sqrt(pi) erf(y)/y with y = (sqrt(alpha)/2) q.

    The bound F < exp(-lambda beta t) controls far off-diagonal elements;
    it is informative only for separations q > 2 sqrt(pi/alpha), below
    which the expression goes negative and beta clamps to zero (the
    trivial bound F <= 1): no uniform damping is claimed there.
    """
    if q <= 0:
        raise ValueError("separation q must be positive")
    y = 0.5 * np.sqrt(alpha) * q
    return float(max(1.0 - _SQRT_PI * erf(y) / y, 0.0))


def offdiag_lifetime(q: float, params: CollapseParams) -> float:
    """Lifetime tau = 1/(lambda beta) of the off-diagonal element at
    separation q; infinite below the bound's validity threshold, hence
    diverging as q -> 0."""
    beta = offdiag_damping_beta(q, params.alpha)
    if beta == 0.0:
        return np.inf
    return 1.0 / (params.lambda_rate * beta)


def com_amplified_rate(lambda_micro: float, n_particles: float) -> float:
    """Center-of-mass hitting rate of an N-constituent body: N * lambda."""
    if n_particles < 1:
        raise ValueError("particle count must be >= 1")
    return n_particles * lambda_micro


def traced_com_kernel(
    psi_two: np.ndarray, dx: float, params: CollapseParams, t: float
) -> np.ndarray:
    """Center-of-mass kernel of the two-particle hitting master equation.

    ``psi_two[i1, i2]`` is the two-particle wavefunction on the shared
    periodic (q1, q2) grid.  The H = 0 master equation is solved exactly
    (each localization channel damps its own coordinate pair) and the
    relative coordinate is traced out numerically: Q = x_i with
    r = 2 s dx pairs (q1, q2) = (x_{i+s}, x_{i-s}).
    """
    n = psi_two.shape[0]
    lam, alpha = params.lambda_rate, params.alpha
    length = n * dx
    i = np.arange(n)
    overlap = np.zeros((n, n), dtype=complex)
    for s in range(-(n // 4), n // 4 + 1):
        amp = psi_two[(i + s) % n, (i - s) % n]
        overlap += np.outer(amp, np.conj(amp))
    u = dx * (i[:, None] - i[None, :])
    u = u - length * np.round(u / length)
    g = np.exp(-0.25 * alpha * u**2)
    damping = np.exp(-2.0 * lam * (1.0 - g) * t)  # one factor per particle
    kernel = overlap * damping * (2.0 * dx)
    trace = np.trace(kernel).real * dx
    return kernel / trace


def two_particle_com_decay_rate(
    psi_two: np.ndarray,
    dx: float,
    params: CollapseParams,
    t: float,
    separation_cells: int,
) -> float:
    """Fitted off-diagonal decay rate of the traced center-of-mass kernel.

    Reproduces the single-particle form with the summed rate: for
    separations >> 1/sqrt(alpha) the fitted rate approaches 2*lambda.
    """
    d = separation_cells
    vals = []
    for t_k in (0.5 * t, t):
        kernel = traced_com_kernel(psi_two, dx, params, t_k)
        band = np.abs(np.diagonal(kernel, offset=d))
        vals.append(band.sum())
    return float(2.0 * np.log(vals[0] / vals[1]) / t)


def energy_increase_rate(
    params: CollapseParams, mass: float, hbar: float = 1.0
) -> float:
    """Mean energy gain per unit time: lambda alpha hbar^2 / (4 m)."""
    if mass <= 0:
        raise ValueError("mass must be positive")
    return params.lambda_rate * params.alpha * hbar**2 / (4.0 * mass)

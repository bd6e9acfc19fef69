"""Cooked-probability bookkeeping: reweighting, resampling, closed forms.

The physical ("cooked") probability of a noise realization is its raw
probability times the final squared norm of the linearly evolved state;
trajectory weights are therefore tracked as log||psi||^2 and turned into
equal-weight ensembles by multinomial resampling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .noise import trajectory_generator
from .operators import ProjectorFamily

CULL_NATS = 40.0
"""Trajectories whose log-weight trails the maximum by more than this may
be dropped during resampling (their selection probability is < 4e-18);
they are never dropped silently elsewhere."""


def cooked_resample(
    log_weights: np.ndarray,
    master_seed: int,
    n_out: int | None = None,
    cull_nats: float = CULL_NATS,
) -> np.ndarray:
    """Multinomial resample indices proportional to exp(log_weights).

    Weights are normalized in log space; entries more than ``cull_nats``
    below the maximum are zeroed (recorded by their absence).  Raises if
    no positive weight remains.
    """
    logw = np.asarray(log_weights, dtype=float)
    if logw.size == 0:
        raise ValueError("empty ensemble")
    top = np.max(logw)
    if not np.isfinite(top):
        raise ValueError("all-zero weights")
    w = np.exp(logw - top)
    w[logw < top - cull_nats] = 0.0
    total = w.sum()
    if total <= 0:
        raise ValueError("all-zero weights")
    probs = w / total
    rng = trajectory_generator(master_seed, 0xC00C)
    n_out = logw.size if n_out is None else n_out
    counts = rng.multinomial(n_out, probs)
    return np.repeat(np.arange(logw.size), counts)


def systematic_resample(
    log_weights: np.ndarray,
    master_seed: int,
    cull_nats: float = CULL_NATS,
) -> np.ndarray:
    """Low-variance comb resample: one uniform offset, equally spaced
    selection points.  Unbiased like the multinomial rule but with far
    smaller resampling noise; used by the sequential cooked runner.
    """
    logw = np.asarray(log_weights, dtype=float)
    top = np.max(logw)
    w = np.exp(logw - top)
    w[logw < top - cull_nats] = 0.0
    total = w.sum()
    if total <= 0:
        raise ValueError("all-zero weights")
    n = logw.size
    rng = trajectory_generator(master_seed, 0xC011)
    points = (rng.uniform() + np.arange(n)) / n
    return np.searchsorted(np.cumsum(w / total), points, side="right").clip(0, n - 1)


@dataclass(frozen=True)
class GaussianMixture1D:
    """Two-component Gaussian mixture over a scalar noise record."""

    weights: tuple[float, float]
    means: tuple[float, float]
    variance: float

    def pdf(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        norm = 1.0 / np.sqrt(2.0 * np.pi * self.variance)
        for w, mu in zip(self.weights, self.means):
            out = out + w * norm * np.exp(-((x - mu) ** 2) / (2.0 * self.variance))
        return out

    def cdf(self, x: np.ndarray) -> np.ndarray:
        from scipy.special import ndtr

        x = np.asarray(x, dtype=float)
        sd = np.sqrt(self.variance)
        out = np.zeros_like(x)
        for w, mu in zip(self.weights, self.means):
            out = out + w * ndtr((x - mu) / sd)
        return out


def two_level_analytic(
    weights: tuple[float, float],
    eigenvalues: tuple[float, float],
    gamma: float,
    t: float,
) -> GaussianMixture1D:
    """Cooked density of the Brownian record B(t) for a two-sector state.

    A mixture of Gaussians centered at 2*gamma*a*t and 2*gamma*b*t with
    variance gamma*t, weighted by the initial sector weights.
    """
    if abs(weights[0] + weights[1] - 1.0) > 1e-9:
        raise ValueError("sector weights must sum to one")
    a, b = eigenvalues
    return GaussianMixture1D(
        (float(weights[0]), float(weights[1])),
        (2.0 * gamma * a * t, 2.0 * gamma * b * t),
        gamma * t,
    )


def linear_exact_commuting(
    psi0: np.ndarray,
    family: ProjectorFamily,
    b_values: np.ndarray,
    gamma: float,
    t: float,
) -> tuple[np.ndarray, float]:
    """Exact solution of the linear equation for commuting couplings, H = 0.

    Each sector amplitude is multiplied by exp(a_sigma . B(t) - gamma
    |a_sigma|^2 t).  Returns (normalized state, log||psi||^2); the raw
    average of the squared norm over Wiener paths is exactly one.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    b = np.atleast_1d(np.asarray(b_values, dtype=float))
    out = np.array(psi0)
    for sigma, idx in enumerate(family.sectors):
        a = family.eigenvalues[sigma]
        log_factor = float(a @ b - gamma * (a @ a) * t)
        out[np.atleast_1d(idx).ravel()] *= np.exp(log_factor)
    norm_sq = float(np.sum(np.abs(out) ** 2))
    return out / np.sqrt(norm_sq), float(np.log(norm_sq))

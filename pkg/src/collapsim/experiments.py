"""Batch experiment implementations behind the CLI.

Each runner validates its config keys, runs deterministically from the
master seed, and returns either a table (CSV) or a record (JSON).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cells import CellModel, discrete_decay_log
from .colored import CorrelationSpec, colored_instantaneous_rate
from .config import ExperimentConfig
from .diffusion import CslStepper, run_ensemble
from .epr import epr_linear_experiment, epr_nonlinear_experiment
from .errors import ConfigError
from .freeparticle import (
    characteristic_times,
    com_amplified_rate,
    energy_increase_rate,
    evolve_free_master,
    free_particle_moments,
    offdiag_lifetime,
)
from .hitting import events_to_rows, run_qmsl_ensemble, run_qmsl_trajectory
from .macrobody import condenser_decay_rate, macro_reduction_rate, momentum_diffusion
from .massdensity import (
    CellConfigurationState,
    IndependentParticleState,
    accessibility_ratio,
    mass_profile,
)
from .nosignal import gisin_check, here_there_mixtures
from .operators import HamiltonianSpec, ProjectorFamily
from .params import (
    CANONICAL_ALPHA,
    CANONICAL_DENSITY,
    CANONICAL_GAMMA,
    CANONICAL_LAMBDA_MICRO,
    MACRO_PARTICLE_COUNT,
    CollapseParams,
    canonical_qmsl,
)
from .rates import (
    decoherence_rates,
    diosi_rate,
    excitation_rate_qmsl,
    localization_decoherence_rate,
)
from .refdata import LOCALIZATION_TABLE_DELTA_REFERENCE, load_decoherence_sources
from .schrodinger import gaussian_packet, two_packet_state
from .units import ERG_PER_EV, HBAR_CGS, NUCLEON_MASS_G


@dataclass
class TableOutput:
    columns: list[tuple[str, str]]  # (name, unit)
    rows: list[tuple]


@dataclass
class JsonOutput:
    data: dict


@dataclass
class Diagnostics:
    messages: list[str] = field(default_factory=list)

    def add(self, text: str) -> None:
        self.messages.append(text)


def _grid_params(cfg: ExperimentConfig) -> CollapseParams:
    return CollapseParams(
        float(cfg.params["lambda"]), float(cfg.params["alpha"]), 1.0, dimension=1
    )


# ---------------------------------------------------------------- qmsl


def run_qmsl_hitting(cfg: ExperimentConfig) -> TableOutput:
    cfg.require("n", "dx", "mass", "centers", "sigma", "alpha", "lambda", "t_end", "dt")
    cfg.reject_unknown(
        "n", "dx", "mass", "centers", "sigma", "alpha", "lambda", "t_end", "dt",
        "record_events",
    )
    p = cfg.params
    n = int(p["n"])
    dx = float(p["dx"])
    x0 = -0.5 * n * dx
    centers = tuple(float(c) for c in p["centers"])
    psi0 = two_packet_state(n, dx, x0, float(p["mass"]), centers, float(p["sigma"]))
    params = _grid_params(cfg)
    n_traj = cfg.trajectories or 1000
    if p.get("record_events"):
        _, events = run_qmsl_trajectory(
            psi0, HamiltonianSpec.free(), params, float(p["t_end"]), cfg.seed,
            float(p["dt"]),
        )
        return TableOutput(
            [("time", "internal"), ("center", "internal length"), ("weight", "1")],
            events_to_rows(events),
        )
    res = run_qmsl_ensemble(
        psi0, HamiltonianSpec.free(), params, float(p["t_end"]), n_traj,
        cfg.seed, float(p["dt"]), accumulate_kernel=False,
    )
    x = psi0.positions
    right_mass = (np.abs(res.amplitudes) ** 2 * dx) @ (x > 0.5 * (centers[0] + centers[1]))
    rows = [
        (int(j), int(res.hit_counts[j]), float(right_mass[j]), int(right_mass[j] > 0.5))
        for j in range(n_traj)
    ]
    return TableOutput(
        [
            ("trajectory", "index"),
            ("hits", "count"),
            ("right_mass", "probability"),
            ("outcome_right", "0/1"),
        ],
        rows,
    )


def run_qmsl_master(cfg: ExperimentConfig) -> TableOutput:
    cfg.require("n", "dx", "mass", "sigma", "alpha", "lambda", "times")
    cfg.reject_unknown("n", "dx", "mass", "sigma", "alpha", "lambda", "times")
    p = cfg.params
    n = int(p["n"])
    dx = float(p["dx"])
    mass = float(p["mass"])
    sigma = float(p["sigma"])
    psi0 = gaussian_packet(n, dx, -0.5 * n * dx, mass, 0.0, sigma)
    params = _grid_params(cfg)
    times = [float(t) for t in np.atleast_1d(p["times"])]
    sch0 = {
        "q_mean": 0.0,
        "p_mean": 0.0,
        "q_var": sigma**2,
        "qp_corr": 0.0,
        "p_var": 1.0 / (4.0 * sigma**2),
    }
    rows = []
    x = psi0.positions
    k = psi0.wavenumbers
    for t in times:
        rho = evolve_free_master(psi0, params, t).entries
        diag = np.maximum(np.diag(rho).real, 0.0)
        diag = diag / (diag.sum() * dx)
        q_var = float(dx * diag @ x**2 - (dx * diag @ x) ** 2)
        p2rho = np.fft.ifft((k**2)[:, None] * np.fft.fft(rho, axis=0), axis=0)
        p_var = float(np.trace(p2rho).real * dx)
        sch_t = {
            "q_mean": 0.0,
            "p_mean": 0.0,
            "q_var": sch0["q_var"] + sch0["p_var"] / mass**2 * t**2,
            "qp_corr": sch0["p_var"] / mass * t,
            "p_var": sch0["p_var"],
        }
        formula = free_particle_moments(params, mass, t, sch_t)
        rows.append((t, q_var, formula["q_var"], p_var, formula["p_var"]))
    return TableOutput(
        [
            ("t", "internal time"),
            ("q_var_kernel", "length^2"),
            ("q_var_formula", "length^2"),
            ("p_var_kernel", "momentum^2"),
            ("p_var_formula", "momentum^2"),
        ],
        rows,
    )


# ----------------------------------------------------------------- csl


def _born_frequencies(cfg: ExperimentConfig, threads: int) -> tuple[np.ndarray, int]:
    p = cfg.params
    weights = [float(w) for w in p["weights"]]
    gamma = float(p["gamma"])
    dt = float(p["dt"])
    steps = int(p["steps"])
    n_traj = cfg.trajectories or 10_000
    family = ProjectorFamily.two_level()
    psi0 = np.sqrt(np.array(weights, dtype=complex))
    stepper = CslStepper(family, gamma, dt, form="nonlinear", calculus="ito")

    def run_slice(bounds):
        lo, hi = bounds
        res = run_ensemble(psi0, stepper, steps, hi - lo, cfg.seed, traj_offset=lo)
        return np.argmax(family.sector_weights(res.final_states), axis=1)

    if threads > 1:
        edges = np.linspace(0, n_traj, threads + 1, dtype=int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcome_parts = list(pool.map(run_slice, zip(edges[:-1], edges[1:])))
        outcomes = np.concatenate(outcome_parts)
    else:
        outcomes = run_slice((0, n_traj))
    counts = np.array([(outcomes == 0).sum(), (outcomes == 1).sum()])
    return counts / n_traj, n_traj


def run_csl_born(cfg: ExperimentConfig, threads: int = 1) -> TableOutput:
    cfg.require("weights", "gamma", "dt", "steps")
    cfg.reject_unknown("weights", "gamma", "dt", "steps", "per_trajectory")
    if cfg.params.get("per_trajectory"):
        return _born_trajectory_table(cfg)
    freqs, n_traj = _born_frequencies(cfg, threads)
    weights = [float(w) for w in cfg.params["weights"]]
    rows = []
    for sector, (f, w) in enumerate(zip(freqs, weights)):
        stderr = math.sqrt(w * (1 - w) / n_traj)
        rows.append((sector, f, stderr, w))
    return TableOutput(
        [
            ("sector", "index"),
            ("frequency", "probability"),
            ("binomial_stderr", "probability"),
            ("expected", "probability"),
        ],
        rows,
    )


def _born_trajectory_table(cfg: ExperimentConfig) -> TableOutput:
    """Per-trajectory summaries: seed, outcome sector, collapse time,
    final cooked log-weight."""
    p = cfg.params
    weights = [float(w) for w in p["weights"]]
    dt = float(p["dt"])
    family = ProjectorFamily.two_level()
    psi0 = np.sqrt(np.array(weights, dtype=complex))
    stepper = CslStepper(family, float(p["gamma"]), dt, form="nonlinear")
    n_traj = cfg.trajectories or 1000
    res = run_ensemble(psi0, stepper, int(p["steps"]), n_traj, cfg.seed)
    rows = [
        (
            cfg.seed,
            int(j),
            int(res.outcomes[j]),
            float(res.collapse_steps[j] * dt) if res.collapse_steps[j] >= 0 else -1.0,
            float(res.log_weights[j]),
        )
        for j in range(n_traj)
    ]
    return TableOutput(
        [
            ("master_seed", "u64"),
            ("trajectory", "index"),
            ("outcome_sector", "index or -1"),
            ("collapse_time", "internal time or -1"),
            ("final_log_weight", "nats"),
        ],
        rows,
    )


def run_csl_equivalence(cfg: ExperimentConfig) -> JsonOutput:
    cfg.require("weights", "gamma", "dt", "steps")
    cfg.reject_unknown("weights", "gamma", "dt", "steps", "resample_every")
    p = cfg.params
    weights = [float(w) for w in p["weights"]]
    gamma, dt, steps = float(p["gamma"]), float(p["dt"]), int(p["steps"])
    n_traj = cfg.trajectories or 10_000
    family = ProjectorFamily.two_level()
    psi0 = np.sqrt(np.array(weights, dtype=complex))
    lin = run_ensemble(
        psi0,
        CslStepper(family, gamma, dt, form="linear", calculus="ito"),
        steps, n_traj, cfg.seed,
        resample_every=int(p.get("resample_every", 100)),
    )
    z = family.sector_weights(lin.final_states)
    w = np.exp(lin.log_weights - lin.log_weights.max())
    w /= w.sum()
    f_lin = float(np.sum(w * (z[:, 0] > 0.5)))
    nonlin = run_ensemble(
        psi0,
        CslStepper(family, gamma, dt, form="nonlinear", calculus="ito"),
        steps, n_traj, cfg.seed,
    )
    zn = family.sector_weights(nonlin.final_states)
    f_non = float(np.mean(zn[:, 0] > 0.5))
    return JsonOutput(
        {
            "linear_cooked_frequency": [f_lin, 1.0 - f_lin],
            "nonlinear_frequency": [f_non, 1.0 - f_non],
            "total_variation_distance": abs(f_lin - f_non),
            "trajectories": n_traj,
        }
    )


def run_csl_discrete(cfg: ExperimentConfig) -> JsonOutput:
    cfg.require("lambda_eff", "dt", "steps", "occupations_a", "occupations_b")
    cfg.reject_unknown("lambda_eff", "dt", "steps", "occupations_a", "occupations_b")
    p = cfg.params
    occ_a = np.atleast_1d(np.asarray(p["occupations_a"], dtype=float))
    occ_b = np.atleast_1d(np.asarray(p["occupations_b"], dtype=float))
    model = CellModel(np.stack([occ_a, occ_b]), float(p["lambda_eff"]))
    dt, steps = float(p["dt"]), int(p["steps"])
    n_traj = cfg.trajectories or 10_000
    stepper = CslStepper(model.family, model.lambda_eff, dt, form="nonlinear")
    psi0 = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
    res = run_ensemble(
        psi0, stepper, steps, n_traj, cfg.seed, record_every=max(steps // 8, 1)
    )
    z = res.z_history  # (n_rec, n_traj, 2)
    offdiag = np.sqrt(np.maximum(z[..., 0] * z[..., 1], 0.0)).mean(axis=1)
    t_rec = res.history_steps * dt
    slope = np.polyfit(t_rec, np.log(offdiag), 1)[0]
    expected = -discrete_decay_log(occ_a, occ_b, model.lambda_eff, 1.0)
    return JsonOutput(
        {
            "fitted_rate": -float(slope),
            "formula_rate": expected,
            "relative_error": abs(-slope - expected) / expected,
            "trajectories": n_traj,
        }
    )


# --------------------------------------------------------------- other


def _load_kernel_csv(path: str) -> CorrelationSpec:
    """Sampled correlation kernel from a (lag, value) CSV file."""
    rows = np.loadtxt(path, delimiter=",", comments="#")
    if rows.ndim != 2 or rows.shape[1] != 2:
        raise ConfigError(f"kernel file {path!r} must have lag,value columns")
    lags, values = rows[:, 0], rows[:, 1]
    gaps = np.diff(lags)
    if lags[0] != 0.0 or np.max(np.abs(gaps - gaps[0])) > 1e-9 * gaps[0]:
        raise ConfigError("kernel lags must start at 0 with uniform spacing")
    return CorrelationSpec.custom(values, float(gaps[0]))


def run_colored_damping(cfg: ExperimentConfig) -> TableOutput:
    cfg.require("kind", "gamma", "times")
    cfg.reject_unknown("kind", "tau", "gamma", "times", "eigenvalues", "kernel_file")
    p = cfg.params
    if str(p["kind"]) == "custom":
        if "kernel_file" not in p:
            raise ConfigError("custom kernels need kernel_file = path")
        spec = _load_kernel_csv(str(p["kernel_file"]))
    else:
        cfg.require("tau")
        spec = CorrelationSpec(str(p["kind"]), tau=float(p["tau"]))
    gamma = float(p["gamma"])
    eigenvalues = p.get("eigenvalues", [1.0, -1.0])
    family = ProjectorFamily.two_level(float(eigenvalues[0]), float(eigenvalues[1]))
    white = CorrelationSpec.white()
    rows = []
    for t in np.atleast_1d(p["times"]):
        t = float(t)
        rate_stationary = colored_instantaneous_rate(family, spec, gamma, 0, 1, None)
        rate_from_t0 = colored_instantaneous_rate(family, spec, gamma, 0, 1, t)
        rate_white = colored_instantaneous_rate(family, white, gamma, 0, 1, None)
        f_col = spec.double_integral(t)
        f_white = white.double_integral(t)
        rows.append((t, rate_from_t0, rate_stationary, rate_white, f_col, f_white))
    return TableOutput(
        [
            ("t", "internal time"),
            ("rate_from_t0", "1/time"),
            ("rate_stationary", "1/time"),
            ("rate_white", "1/time"),
            ("double_integral", "time"),
            ("double_integral_white", "time"),
        ],
        rows,
    )


def run_epr(cfg: ExperimentConfig) -> JsonOutput:
    cfg.require("gamma", "t_end")
    cfg.reject_unknown("gamma", "t_end", "steps")
    p = cfg.params
    gamma, t_end = float(p["gamma"]), float(p["t_end"])
    n_seeds = cfg.trajectories or 4000
    nonlinear = epr_nonlinear_experiment(
        n_seeds, gamma, t_end, cfg.seed, steps=int(p.get("steps", 400))
    )
    linear = epr_linear_experiment(n_seeds, gamma, t_end, cfg.seed + 1)
    return JsonOutput(
        {
            "nonlinear": {
                "p_minus_given_class_detector_off": nonlinear.p_minus_detector_off,
                "p_minus_given_class_detector_on": nonlinear.p_minus_detector_on,
                "class_frequency": nonlinear.class_frequency,
                "conditioning_samples": nonlinear.n_conditioning,
            },
            "linear": {
                "ks_distance": linear.ks_distance,
                "ks_critical_5pct": linear.ks_critical_5pct,
                "marginals_indistinguishable": linear.ks_distance
                < linear.ks_critical_5pct,
            },
        }
    )


def run_gisin(cfg: ExperimentConfig) -> JsonOutput:
    cfg.require("gamma", "dt", "steps")
    cfg.reject_unknown("gamma", "dt", "steps")
    p = cfg.params
    gamma, dt, steps = float(p["gamma"]), float(p["dt"]), int(p["steps"])
    n_traj = cfg.trajectories or 2000
    family = ProjectorFamily.two_level()
    stepper = CslStepper(family, gamma, dt, form="nonlinear")

    def evolve_many(psi0, indices):
        res = run_ensemble(
            psi0, stepper, steps, len(indices), cfg.seed,
            traj_offset=int(indices[0]),
        )
        return res.final_states, np.zeros(len(indices))

    ens_a, ens_b = here_there_mixtures()
    report = gisin_check(ens_a, ens_b, evolve_many, n_traj)
    return JsonOutput(
        {
            "frobenius_distance": report.distance,
            "monte_carlo_band_1sigma": report.band,
            "passed_within_3sigma": report.passed,
            "trajectories_per_ensemble": n_traj,
        }
    )


def run_rates_report(cfg: ExperimentConfig) -> JsonOutput:
    cfg.reject_unknown(
        "lambda", "alpha", "gamma", "density", "n_out", "n_macro", "mass",
        "separation",
    )
    p = cfg.params
    lam = float(p.get("lambda", CANONICAL_LAMBDA_MICRO))
    alpha = float(p.get("alpha", CANONICAL_ALPHA))
    gamma = float(p.get("gamma", CANONICAL_GAMMA))
    density = float(p.get("density", CANONICAL_DENSITY))
    n_out = float(p.get("n_out", 1e13))
    n_macro = float(p.get("n_macro", MACRO_PARTICLE_COUNT))
    mass = float(p.get("mass", 1e-23))
    separation = float(p.get("separation", 4e-5))
    micro = CollapseParams.consistent(lam, alpha)
    lam_macro = com_amplified_rate(lam, n_macro)
    macro = CollapseParams.consistent(lam_macro, alpha)
    t1, t2 = characteristic_times(macro, 1.0, 1e-5, 1.0, hbar=HBAR_CGS)
    return JsonOutput(
        {
            "inputs": {
                "lambda_micro_per_s": lam,
                "alpha_per_cm2": alpha,
                "gamma_cm3_per_s": gamma,
                "density_per_cm3": density,
                "n_out": n_out,
                "n_macro": n_macro,
                "mass_g": mass,
                "separation_cm": separation,
            },
            "offdiag_lifetime_s": offdiag_lifetime(separation, macro),
            "lambda_macro_per_s": lam_macro,
            "energy_increase_eV_per_s": energy_increase_rate(
                micro, mass, hbar=HBAR_CGS
            )
            / ERG_PER_EV,
            "t1_spread_time_s": t1,
            "t2_spread_time_s": t2,
            "macro_reduction_rate_per_s": macro_reduction_rate(gamma, density, n_out),
            "momentum_diffusion_cgs_per_cm2": momentum_diffusion(
                gamma, alpha, density, 1.0, HBAR_CGS
            ),
            "excitation_rate_atom_per_s": excitation_rate_qmsl(micro, 1e8),
            "excitation_rate_nucleus_per_s": excitation_rate_qmsl(micro, 1e12),
            "localization_decoherence_rate_per_cm2_s": localization_decoherence_rate(micro),
            "localization_table_reference_per_cm2_s": LOCALIZATION_TABLE_DELTA_REFERENCE,
            "diosi_rate_per_s": diosi_rate(1.0, 1.0, 1e-5),
            "condenser_decay_rate_per_s": condenser_decay_rate(params=micro),
        }
    )


def run_decoherence_table(cfg: ExperimentConfig) -> TableOutput:
    cfg.reject_unknown()
    rows = []
    for source in load_decoherence_sources():
        if source.reference_only:
            rows.append((source.name, "", "", source.tau_reference, "", "reference-only"))
            continue
        tau, delta = decoherence_rates(source)
        rows.append(
            (
                source.name,
                source.flux,
                source.cross_section,
                tau,
                delta,
                source.provenance,
            )
        )
    loc_params = canonical_qmsl()
    rows.append(
        (
            "Spontaneous localization",
            "",
            "",
            1.0 / loc_params.lambda_rate,
            localization_decoherence_rate(loc_params),
            "alpha*lambda/2 identity",
        )
    )
    return TableOutput(
        [
            ("source", "name"),
            ("flux", "1/(cm^2 s)"),
            ("cross_section", "cm^2"),
            ("tau", "s"),
            ("delta", "1/(cm^2 s)"),
            ("provenance", "tag"),
        ],
        rows,
    )


def run_mass_profile(cfg: ExperimentConfig) -> TableOutput:
    cfg.require("scenario")
    cfg.reject_unknown("scenario", "n_particles", "n_cells", "tail_weight")
    p = cfg.params
    scenario = str(p["scenario"])
    n_particles = int(p.get("n_particles", 100))
    n_cells = int(p.get("n_cells", 2))
    m0 = NUCLEON_MASS_G
    if scenario == "superposed":
        occ = np.zeros((2, n_cells))
        occ[0, 0] = n_particles
        occ[1, min(1, n_cells - 1)] = n_particles
        amps = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)
        state = CellConfigurationState(amps, occ, m0)
    elif scenario == "tails":
        beta_sq = float(p.get("tail_weight", 1e-8))
        occ = np.zeros((2, n_cells))
        occ[0, 0] = n_particles
        occ[1, min(1, n_cells - 1)] = n_particles
        amps = np.array([np.sqrt(1 - beta_sq), np.sqrt(beta_sq)], dtype=complex)
        state = CellConfigurationState(amps, occ, m0)
    elif scenario == "product":
        placements = tuple(
            (0, min(1, n_cells - 1), 0.5) for _ in range(n_particles)
        )
        state = IndependentParticleState(placements, n_cells, m0)
    elif scenario == "micro":
        occ = np.zeros((2, n_cells))
        occ[0, 0] = 1
        occ[1, min(1, n_cells - 1)] = 1
        state = CellConfigurationState(
            np.array([1.0, 1.0], dtype=complex) / np.sqrt(2), occ, m0
        )
    else:
        raise ConfigError(f"unknown scenario {scenario!r}")
    profile = mass_profile(state)
    ratios, accessible = accessibility_ratio(profile)
    rows = [
        (
            i,
            profile.means[i],
            profile.variances[i],
            "" if np.isnan(ratios[i]) else ratios[i],
            int(bool(accessible[i])),
        )
        for i in range(len(profile.means))
    ]
    return TableOutput(
        [
            ("cell", "index"),
            ("mean_mass", "g"),
            ("variance", "g^2"),
            ("ratio", "1"),
            ("accessible", "0/1"),
        ],
        rows,
    )


RUNNERS = {
    "qmsl-hitting": run_qmsl_hitting,
    "qmsl-master": run_qmsl_master,
    "csl-born": run_csl_born,
    "csl-equivalence": run_csl_equivalence,
    "csl-discrete": run_csl_discrete,
    "colored-damping": run_colored_damping,
    "epr": run_epr,
    "gisin": run_gisin,
    "rates-report": run_rates_report,
    "decoherence-table": run_decoherence_table,
    "mass-profile": run_mass_profile,
}


def validate_config(cfg: ExperimentConfig) -> Diagnostics:
    """Dry-run schema and stability checks without running trajectories."""
    diag = Diagnostics()
    for note in cfg.defaults_applied:
        diag.add(note)
    p = cfg.params
    if "gamma" in p and "dt" in p:
        amax = 1.0
        if "occupations_a" in p or "occupations_b" in p:
            amax = max(
                float(np.max(np.abs(np.atleast_1d(p.get(k, [1.0])))))
                for k in ("occupations_a", "occupations_b")
            )
        crit = float(p["gamma"]) * amax**2 * float(p["dt"])
        if crit > 0.01:
            diag.add(
                f"stability: gamma*max|a|^2*dt = {crit:.3g} exceeds 0.01 "
                "(the stepper will refuse to run)"
            )
    if "lambda_eff" in p and "dt" in p:
        amax = max(
            (
                float(np.max(np.abs(np.atleast_1d(p[k]))))
                for k in ("occupations_a", "occupations_b")
                if k in p
            ),
            default=1.0,
        )
        crit = float(p["lambda_eff"]) * amax**2 * float(p["dt"])
        if crit > 0.01:
            diag.add(
                f"stability: lambda_eff*max|n|^2*dt = {crit:.3g} exceeds 0.01 "
                "(the stepper will refuse to run)"
            )
    if "n" in p:
        n = int(p["n"])
        if n < 8 or (n & (n - 1)) != 0:
            diag.add(f"grid: n = {n} is not a power of two >= 8")
    if "alpha" in p and "n" in p and "dx" in p:
        width = 1.0 / math.sqrt(float(p["alpha"]))
        if width < 2 * float(p["dx"]):
            diag.add(
                "grid: localization width 1/sqrt(alpha) under-resolved "
                f"({width:.3g} < 2*dx)"
            )
    return diag

"""Classical inverse solver: sum-of-decayed-sinusoids fitting.

A candidate signal is parameterized by M atoms (amplitude, decay,
frequency, phase) and fitted to a target spectrum by multi-start
Nelder-Mead over the 4M parameters, minimizing the base-10 RMSLE between
the target and the candidate's recomputed spectrum.  An optional genetic
refinement stage polishes the best simplex result.

Optimization runs in a transformed space (log amplitude, log decay, log
frequency, raw phase) so every iterate maps to a feasible model.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from ._kernels import filterbank_peaks, render_decayed_sines, sdof_absacc_coeffs
from .srs import DEFAULT_PAD_SCALE, padding_length
from .types import Signal, Spectrum

LOG_EPS = 1e-12
_GA_STREAM = 104729  # distinct sub-seed for the refinement stage


class BudgetExhaustedError(RuntimeError):
    """Time budget ran out before a single objective evaluation finished."""


class _BudgetUp(Exception):
    pass


@dataclass(frozen=True)
class SdsModel:
    """Decayed-sinusoid representation of a candidate inverse.

    ``atoms`` rows are (amplitude, decay, freq_hz, phase).
    """

    atoms: np.ndarray
    n_samples: int
    sample_rate_hz: float

    def __post_init__(self):
        atoms = np.array(self.atoms, dtype=np.float64, copy=True)
        if atoms.ndim != 2 or atoms.shape[1] != 4 or atoms.shape[0] < 1:
            raise ValueError("atoms must be a non-empty (M, 4) array")
        nyq = self.sample_rate_hz / 2.0
        if np.any(atoms[:, 1] < 0):
            raise ValueError("decay rates must be >= 0")
        if np.any(atoms[:, 2] <= 0) or np.any(atoms[:, 2] >= nyq):
            raise ValueError(f"atom frequencies must lie in (0, {nyq}) Hz")
        if self.n_samples < 1 or self.sample_rate_hz <= 0:
            raise ValueError("n_samples must be >= 1 and sample_rate_hz positive")
        atoms.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)

    @property
    def m_atoms(self) -> int:
        return self.atoms.shape[0]

    def to_dict(self) -> dict:
        return {
            "atoms": [
                {"amplitude": a, "decay": lam, "freq_hz": f, "phase": phi}
                for a, lam, f, phi in self.atoms
            ],
            "n_samples": self.n_samples,
            "sample_rate_hz": self.sample_rate_hz,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SdsModel":
        atoms = np.array(
            [[a["amplitude"], a["decay"], a["freq_hz"], a["phase"]] for a in d["atoms"]]
        )
        return cls(atoms, int(d["n_samples"]), float(d["sample_rate_hz"]))


@dataclass(frozen=True)
class GaConfig:
    population: int = 64
    generations: int = 200
    mutation_rate: float = 0.25
    crossover_rate: float = 0.7
    tournament_size: int = 3
    elitism: int = 2
    mutation_sigma: float = 0.1

    def __post_init__(self):
        if self.population < 2 or self.generations < 1:
            raise ValueError("population must be >= 2 and generations >= 1")
        for name in ("mutation_rate", "crossover_rate"):
            if not (0.0 <= getattr(self, name) <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.elitism < 1 or self.elitism > self.population:
            raise ValueError("elitism must lie in [1, population]")


@dataclass(frozen=True)
class FitConfig:
    m_atoms: int = 12
    max_iters: int = 350
    restarts: int = 8
    time_budget_s: Optional[float] = None
    ga: Optional[GaConfig] = None
    seed: int = 0
    n_samples: int = 9000
    sample_rate_hz: float = 32768.0
    scale_p: float = DEFAULT_PAD_SCALE

    def __post_init__(self):
        if self.m_atoms < 1 or self.max_iters < 1 or self.restarts < 1:
            raise ValueError("m_atoms, max_iters, and restarts must be >= 1")
        if self.time_budget_s is not None and self.time_budget_s <= 0:
            raise ValueError("time_budget_s must be positive when set")
        if self.n_samples < 4 or self.sample_rate_hz <= 0:
            raise ValueError("n_samples must be >= 4 and sample_rate_hz positive")


@dataclass
class FitTrace:
    """Best-so-far loss after each objective evaluation, plus run metadata."""

    best_losses: np.ndarray
    n_evaluations: int
    restart_losses: list
    elapsed_s: float
    ga: Optional[dict] = None


@dataclass
class FitResult:
    model: SdsModel
    loss: float
    trace: FitTrace


def render_sds(model: SdsModel) -> Signal:
    """Time series of the model: sum_i A_i exp(-lambda_i n Ts) sin(2 pi f_i n Ts + phi_i)."""
    samples = render_decayed_sines(
        model.atoms[:, 0],
        model.atoms[:, 1],
        model.atoms[:, 2],
        model.atoms[:, 3],
        model.n_samples,
        1.0 / model.sample_rate_hz,
    )
    return Signal(samples, model.sample_rate_hz)


def _rmsle_values(target: np.ndarray, candidate: np.ndarray) -> float:
    ratio = np.log10(np.maximum(target, LOG_EPS) / np.maximum(candidate, LOG_EPS))
    return float(np.sqrt(np.mean(ratio**2)))


def rmsle_loss(target: Spectrum, candidate: Spectrum) -> float:
    """Root-mean-square base-10 log ratio between two spectra on one grid."""
    if not target.same_grid(candidate):
        raise ValueError("target and candidate spectra are on different grids")
    return _rmsle_values(target.values, candidate.values)


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------

class _Objective:
    """RMSLE of the rendered candidate's spectrum; records best-so-far."""

    def __init__(self, target: Spectrum, config: FitConfig, deadline: Optional[float]):
        grid = target.grid
        nyq = config.sample_rate_hz / 2.0
        if grid.f_max_hz > nyq:
            raise ValueError("target grid exceeds the rendering Nyquist frequency")
        self.target_values = target.values
        self.coeffs = sdof_absacc_coeffs(
            grid.freqs_hz, grid.damping_ratio, config.sample_rate_hz
        )
        self.pad = padding_length(
            config.sample_rate_hz, grid.f_min_hz, grid.damping_ratio, config.scale_p
        )
        self.n_samples = config.n_samples
        self.ts = 1.0 / config.sample_rate_hz
        self.f_hi = nyq * 0.999
        self.f_lo = 1e-3
        self.deadline = deadline
        self.n_evals = 0
        self.best = math.inf
        self.best_theta = None
        self.trace = []

    def theta_to_params(self, theta: np.ndarray):
        p = theta.reshape(-1, 4)
        amps = np.exp(p[:, 0])
        decays = np.exp(p[:, 1])
        freqs = np.clip(np.exp(p[:, 2]), self.f_lo, self.f_hi)
        phases = p[:, 3]
        return amps, decays, freqs, phases

    def __call__(self, theta: np.ndarray) -> float:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _BudgetUp()
        amps, decays, freqs, phases = self.theta_to_params(theta)
        rendered = render_decayed_sines(amps, decays, freqs, phases, self.n_samples, self.ts)
        peaks = filterbank_peaks(rendered, self.pad, self.coeffs)
        loss = _rmsle_values(self.target_values, peaks)
        self.n_evals += 1
        if loss < self.best:
            self.best = loss
            self.best_theta = theta.copy()
        self.trace.append(self.best)
        return loss


def _initial_frequencies(target: Spectrum, m_atoms: int) -> np.ndarray:
    """M atom frequencies at the largest interior local maxima of the target,
    padded with a log-even spread when the spectrum has too few peaks."""
    v = target.values
    f = target.grid.freqs_hz
    interior = np.arange(1, len(v) - 1)
    is_peak = (v[interior] > v[interior - 1]) & (v[interior] > v[interior + 1])
    peak_idx = interior[is_peak]
    order = np.argsort(v[peak_idx])[::-1]
    chosen = list(f[peak_idx[order][:m_atoms]])
    if len(chosen) < m_atoms:
        fill = np.geomspace(f[0], f[-1], m_atoms - len(chosen) + 2)[1:-1]
        chosen.extend(fill.tolist())
    return np.sort(np.asarray(chosen[:m_atoms]))


def _initial_theta(
    target: Spectrum, config: FitConfig, phases: np.ndarray
) -> np.ndarray:
    freqs = _initial_frequencies(target, config.m_atoms)
    zeta = target.grid.damping_ratio
    s_at = np.interp(freqs, target.grid.freqs_hz, target.values)
    amps = np.maximum(2.0 * zeta * s_at, LOG_EPS)
    decays = 0.05 * 2.0 * np.pi * freqs
    theta = np.empty((config.m_atoms, 4))
    theta[:, 0] = np.log(amps)
    theta[:, 1] = np.log(decays)
    theta[:, 2] = np.log(freqs)
    theta[:, 3] = phases
    return theta.ravel()


# Absolute simplex steps per parameter type (log-A, log-decay, log-f, phase).
# Absolute (not relative) offsets keep the fit scale-equivariant: scaling the
# target only translates the log-amplitude coordinates.
_SIMPLEX_STEPS = (0.5, 0.6, 0.04, 0.7)


def _initial_simplex(theta0: np.ndarray) -> np.ndarray:
    n = theta0.size
    simplex = np.tile(theta0, (n + 1, 1))
    for j in range(n):
        simplex[j + 1, j] += _SIMPLEX_STEPS[j % 4]
    return simplex


def _ga_refine(objective: _Objective, theta: np.ndarray, cfg: GaConfig, seed: int):
    rng = np.random.default_rng([seed & (2**63 - 1), _GA_STREAM])
    dim = theta.size
    pop = np.tile(theta, (cfg.population, 1))
    for i in range(1, cfg.population):
        pop[i] += rng.normal(0.0, cfg.mutation_sigma, dim)
    fitness = np.array([objective(ind) for ind in pop])

    def tournament() -> int:
        contenders = rng.integers(0, cfg.population, cfg.tournament_size)
        return int(contenders[np.argmin(fitness[contenders])])

    for _ in range(cfg.generations):
        elite_idx = np.argsort(fitness, kind="stable")[: cfg.elitism]
        new_pop = [pop[i].copy() for i in elite_idx]
        new_fit = [float(fitness[i]) for i in elite_idx]
        while len(new_pop) < cfg.population:
            p1, p2 = pop[tournament()], pop[tournament()]
            if rng.random() < cfg.crossover_rate:
                mask = rng.random(dim) < 0.5
                child = np.where(mask, p1, p2)
            else:
                child = p1.copy()
            mutate = rng.random(dim) < cfg.mutation_rate
            child = child + mutate * rng.normal(0.0, cfg.mutation_sigma, dim)
            new_pop.append(child)
            new_fit.append(objective(child))
        pop = np.asarray(new_pop)
        fitness = np.asarray(new_fit)


def fit_sds(target: Spectrum, config: FitConfig) -> FitResult:
    """Fit an SDS model to a target spectrum.

    Multi-start Nelder-Mead from spectrum-peak initializations (random
    phases per restart), then optional genetic refinement.  Deterministic
    given (target, config) when no wall-clock budget is set.

    Raises
    ------
    BudgetExhaustedError
        If ``config.time_budget_s`` elapses before the first completed
        objective evaluation.
    """
    start = time.monotonic()
    deadline = None if config.time_budget_s is None else start + config.time_budget_s
    objective = _Objective(target, config, deadline)

    restart_losses = []
    try:
        for r in range(config.restarts):
            rng = np.random.default_rng([config.seed & (2**63 - 1), r])
            phases = rng.uniform(0.0, 2.0 * math.pi, config.m_atoms)
            theta0 = _initial_theta(target, config, phases)
            result = minimize(
                objective,
                theta0,
                method="Nelder-Mead",
                options={
                    "maxiter": config.max_iters,
                    "maxfev": config.max_iters,
                    "initial_simplex": _initial_simplex(theta0),
                    "xatol": 1e-6,
                    "fatol": 1e-8,
                    "adaptive": True,
                },
            )
            restart_losses.append(float(result.fun))
        if config.ga is not None and objective.best_theta is not None:
            _ga_refine(objective, objective.best_theta, config.ga, config.seed)
    except _BudgetUp:
        pass

    if objective.best_theta is None:
        raise BudgetExhaustedError(
            "time budget exhausted before the first objective evaluation completed"
        )

    amps, decays, freqs, phases = objective.theta_to_params(objective.best_theta)
    model = SdsModel(
        np.column_stack([amps, decays, freqs, np.mod(phases, 2.0 * math.pi)]),
        config.n_samples,
        config.sample_rate_hz,
    )
    trace = FitTrace(
        best_losses=np.asarray(objective.trace),
        n_evaluations=objective.n_evals,
        restart_losses=restart_losses,
        elapsed_s=time.monotonic() - start,
        ga=None
        if config.ga is None
        else {
            "population": config.ga.population,
            "generations": config.ga.generations,
            "mutation_rate": config.ga.mutation_rate,
            "crossover_rate": config.ga.crossover_rate,
            "tournament_size": config.ga.tournament_size,
            "elitism": config.ga.elitism,
            "mutation_sigma": config.ga.mutation_sigma,
        },
    )
    return FitResult(model=model, loss=float(objective.best), trace=trace)

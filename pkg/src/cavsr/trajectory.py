"""Stochastic pure-state unraveling of the pumped lossy cavity.

Physical units here (seconds, rad/s): atoms arrive at rate r, either with
exponential gaps (poisson) or a fixed spacing 1/r (regular). Each arrival
kicks the field via the exact single-transit map, after which the atom is
measured in the energy basis. Between arrivals the field undergoes
photon-loss quantum jumps, sampled from the exact no-jump survival law

    S(s) = || exp(-gamma_c n_hat s) psi ||^2,

inverted for the jump time, so the waiting-time statistics carry no
time-step bias at all. Pump-laser phase noise enters as a Wiener walk of the
imprinted atomic phase with variance 2*pi*linewidth per second, and transit
dephasing as a per-atom chance of a fully scrambled phase.

Of the three stochastic ingredients (arrival gaps, jump times, measurement
outcomes), all draws come from one per-trajectory generator, so a (config,
seed) pair fixes the trajectory bit for bit.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
import scipy.optimize

from .errors import ConvergenceError, TruncationError
from .hilbert import PureFieldState
from .interaction import KickParams, jc_kick_pure, measure_atom

__all__ = [
    "TrajectoryConfig",
    "TrajectoryResult",
    "EnsembleResult",
    "run_trajectory",
    "run_ensemble",
]

_INJECTIONS = ("poisson", "regular")


@dataclasses.dataclass(frozen=True)
class TrajectoryConfig:
    r: float                    # atom injection rate, 1/s
    gamma_c: float              # field decay rate, rad/s
    g: float                    # coupling, rad/s
    tau: float                  # transit time, s
    theta: float                # pump pulse area, rad
    injection: str = "poisson"
    linewidth: float = 0.0      # pump RMS linewidth, Hz; 0 = coherent pump
    transit_dephase: float = 1.0
    n_max: int = 30
    t_end: float = 0.0          # s
    seed: int = 0
    n_trajectories: int = 1

    def __post_init__(self) -> None:
        for name in ("r", "gamma_c", "g", "tau", "linewidth", "theta", "t_end"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")
        if self.injection not in _INJECTIONS:
            raise ValueError(f"injection must be one of {_INJECTIONS}, got {self.injection!r}")
        if not 0.0 <= self.transit_dephase <= 1.0:
            raise ValueError(f"transit_dephase must lie in [0, 1], got {self.transit_dephase}")
        if self.n_max < 1:
            raise ValueError(f"n_max must be at least 1, got {self.n_max}")
        if self.n_trajectories < 1:
            raise ValueError(f"n_trajectories must be at least 1, got {self.n_trajectories}")

    @property
    def g_tau(self) -> float:
        return self.g * self.tau

    @property
    def n_c(self) -> float | None:
        """Atoms per cavity decay time; None for a lossless cavity."""
        return self.r / self.gamma_c if self.gamma_c > 0.0 else None

    def metadata(self) -> dict:
        n_in_cavity = self.r * self.tau
        notes = []
        if n_in_cavity > 1.0:
            notes.append(
                "mean intracavity atom number exceeds 1; transits overlap and the "
                "one-at-a-time interaction model is strained"
            )
        return {
            "n_c": self.n_c,
            "g_tau": self.g_tau,
            "n_in_cavity": n_in_cavity,
            "annotations": notes,
        }


@dataclasses.dataclass(frozen=True)
class TrajectoryResult:
    times: np.ndarray       # sample grid, s
    mean_n: np.ndarray
    jump_times: np.ndarray  # s
    n_atoms: int
    final: PureFieldState
    metadata: dict


@dataclasses.dataclass(frozen=True)
class EnsembleResult:
    times: np.ndarray
    mean_n: np.ndarray              # ensemble average per sample
    steady_mean_n: float            # time average over the final quarter, then over trajectories
    steady_stderr: float
    per_traj_steady: np.ndarray
    jump_rate: float                # observed jumps per second in the steady window
    jump_rate_stderr: float
    metadata: dict


def _record_until(
    w: np.ndarray,
    n_vec: np.ndarray,
    t0: float,
    t_stop: float,
    gamma_c: float,
    grid: np.ndarray,
    series: np.ndarray,
    gi: int,
) -> int:
    """Fill sample points in (t0, t_stop] from the analytic no-jump decay."""
    slack = 1e-12 * max(1.0, abs(t_stop))
    while gi < grid.shape[0] and grid[gi] <= t_stop + slack:
        wd = w * np.exp(-2.0 * gamma_c * n_vec * (grid[gi] - t0))
        series[gi] = float(n_vec @ wd) / float(np.sum(wd))
        gi += 1
    return gi


def _advance_decay(
    amp: np.ndarray,
    t0: float,
    t1: float,
    gamma_c: float,
    rng: np.random.Generator,
    n_vec: np.ndarray,
    grid: np.ndarray,
    series: np.ndarray,
    gi: int,
    jumps: list[float],
) -> tuple[np.ndarray, int]:
    """Evolve the no-jump/jump process from t0 to t1, recording samples."""
    t = t0
    while t1 - t > 0.0:
        w = np.abs(amp) ** 2
        w /= np.sum(w)
        u = rng.random()

        def survival_minus_u(s: float) -> float:
            return float(np.sum(w * np.exp(-2.0 * gamma_c * n_vec * s))) - u

        span = t1 - t
        if survival_minus_u(span) > 0.0:
            # no jump before t1
            gi = _record_until(w, n_vec, t, t1, gamma_c, grid, series, gi)
            amp = amp * np.exp(-gamma_c * n_vec * span)
            t = t1
        else:
            s_jump = float(scipy.optimize.brentq(survival_minus_u, 0.0, span))
            gi = _record_until(w, n_vec, t, t + s_jump, gamma_c, grid, series, gi)
            amp = amp * np.exp(-gamma_c * n_vec * s_jump)
            amp = np.concatenate((np.sqrt(n_vec[1:]) * amp[1:], [0.0]))
            t += s_jump
            jumps.append(t)
        nrm = float(np.linalg.norm(amp))
        if nrm == 0.0:
            raise ConvergenceError("field amplitudes underflowed during decay")
        amp = amp / nrm
    return amp, gi


def run_trajectory(cfg: TrajectoryConfig, seed: int, n_samples: int = 201) -> TrajectoryResult:
    """One pure-state trajectory, deterministic in (cfg, seed)."""
    rng = np.random.default_rng(seed)
    dim = cfg.n_max + 1
    n_vec = np.arange(dim, dtype=float)
    amp = np.zeros(dim, dtype=complex)
    amp[0] = 1.0
    kick = KickParams(cfg.g_tau)
    c_e = math.sin(0.5 * cfg.theta)
    c_g = math.cos(0.5 * cfg.theta)
    p_scramble = 1.0 - cfg.transit_dephase

    grid = np.linspace(0.0, cfg.t_end, n_samples)
    series = np.empty(n_samples)
    series[0] = 0.0
    gi = 1
    jumps: list[float] = []
    phase = 0.0
    t = 0.0
    t_prev_arrival = 0.0
    n_atoms = 0

    def next_gap() -> float:
        if cfg.r == 0.0:
            return math.inf
        if cfg.injection == "regular":
            return 1.0 / cfg.r
        return float(rng.exponential(1.0 / cfg.r))

    t_arrival = next_gap()
    while True:
        target = min(t_arrival, cfg.t_end)
        amp, gi = _advance_decay(
            amp, t, target, cfg.gamma_c, rng, n_vec, grid, series, gi, jumps
        )
        t = target
        if t_arrival > cfg.t_end:
            break
        if cfg.linewidth > 0.0:
            gap = t_arrival - t_prev_arrival
            phase += rng.normal() * math.sqrt(2.0 * math.pi * cfg.linewidth * gap)
        phi_k = phase
        if p_scramble > 0.0 and rng.random() < p_scramble:
            phi_k = rng.uniform(0.0, 2.0 * math.pi)
        joint = jc_kick_pure(PureFieldState(amp), (c_e, c_g, phi_k), kick)
        _outcome, collapsed, _prob = measure_atom(joint, rng.random())
        amp = collapsed.amp
        if abs(amp[-1]) ** 2 > 1e-6:
            raise TruncationError(
                f"trajectory reached the cutoff n_max={cfg.n_max} "
                f"(top amplitude {abs(amp[-1])**2:.2e}); enlarge the basis"
            )
        n_atoms += 1
        t_prev_arrival = t_arrival
        t_arrival = t_arrival + next_gap()

    # defensive: a zero-length time window leaves nothing to fill
    while gi < n_samples:
        w = np.abs(amp) ** 2
        series[gi] = float(n_vec @ w) / float(np.sum(w))
        gi += 1

    return TrajectoryResult(
        times=grid,
        mean_n=series,
        jump_times=np.array(jumps),
        n_atoms=n_atoms,
        final=PureFieldState(amp),
        metadata=cfg.metadata(),
    )


def run_ensemble(cfg: TrajectoryConfig, n_samples: int = 201) -> EnsembleResult:
    """Average run_trajectory over seeds cfg.seed .. cfg.seed + n_trajectories - 1.

    The steady-state estimate time-averages each trajectory over the final
    quarter of the window and quotes the trajectory-to-trajectory standard
    error, which is the honest error bar when samples along one trajectory
    are correlated.
    """
    if cfg.n_trajectories < 2:
        raise ValueError("ensemble statistics need at least 2 trajectories")
    acc = np.zeros(n_samples)
    steadies = np.empty(cfg.n_trajectories)
    rates = np.empty(cfg.n_trajectories)
    t_window = 0.75 * cfg.t_end
    times = None
    for i in range(cfg.n_trajectories):
        res = run_trajectory(cfg, cfg.seed + i, n_samples=n_samples)
        if times is None:
            times = res.times
        acc += res.mean_n
        window = res.times >= t_window
        steadies[i] = float(np.mean(res.mean_n[window]))
        span = cfg.t_end - t_window
        rates[i] = np.count_nonzero(res.jump_times >= t_window) / span if span > 0 else 0.0
    n = cfg.n_trajectories
    return EnsembleResult(
        times=times,
        mean_n=acc / n,
        steady_mean_n=float(np.mean(steadies)),
        steady_stderr=float(np.std(steadies, ddof=1) / math.sqrt(n)),
        per_traj_steady=steadies,
        jump_rate=float(np.mean(rates)),
        jump_rate_stderr=float(np.std(rates, ddof=1) / math.sqrt(n)),
        metadata=cfg.metadata() | {"n_trajectories": n, "seed": cfg.seed},
    )

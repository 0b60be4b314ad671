"""Command-line entry point.

Every subcommand reads one JSON config (except `preset`, where the config
holds overrides), writes CSV/JSON outputs under --out, and prints a summary
JSON object to stdout. Failures print {"error": {...}} to stderr and exit 1,
so scripts never have to parse tracebacks.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys

import numpy as np
from scipy import stats

from ._version import __version__
from . import analytic
from .atom import AtomState
from .dicke import EnsembleSpec, brute_force_rate, decompose_product_state, ensemble_rate
from .errors import CavsrError
from .experiments import (
    PRESET_NAMES,
    RunConfig,
    SweepResult,
    load_config,
    predicted_alpha,
    preset,
    sweep_atoms,
    sweep_pump,
    trajectory_config,
    write_sweep,
    _base_metadata,
)
from .hilbert import fidelity_to_coherent, mean_photon, photon_distribution, vacuum
from .interaction import bunched_mean_n, lossless_sequence
from .steady import MasterParams, evolve, steady_state_auto
from .trajectory import run_ensemble

__all__ = ["main"]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def _emit(payload: dict) -> None:
    print(json.dumps(_jsonable(payload), indent=2, sort_keys=True))


def _require_config(args) -> RunConfig:
    if not args.config:
        raise ValueError("this subcommand needs --config pointing at a JSON file")
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if args.n_max is not None:
        cfg = dataclasses.replace(cfg, n_max=args.n_max)
    return cfg


def _cmd_steady(args) -> None:
    cfg = _require_config(args)
    a = cfg.atom()
    s = steady_state_auto(cfg.derived_n_c, a, cfg.kick(), n_max=cfg.n_max)
    alpha = predicted_alpha(cfg)
    p_n = photon_distribution(s)
    pois = stats.poisson.pmf(np.arange(s.dim), abs(alpha) ** 2)
    meta = _base_metadata(cfg, "photon number n")
    meta["baseline"] = "Poisson distribution at the predicted coherent amplitude"
    meta["n_max_used"] = s.n_max
    res = SweepResult(np.arange(float(s.dim)), p_n, p_n - pois, pois, meta)
    csv_path, meta_path = write_sweep(res, args.out, "steady_pn")
    q = s.q
    try:
        fidelity = fidelity_to_coherent(s, alpha)
        fidelity_note = None
    except CavsrError as exc:
        # the linear coherent prediction can exceed the basis when the real
        # state saturates far below it; report that instead of failing
        fidelity = None
        fidelity_note = f"{type(exc).__name__}: {exc}"
    out = {
        "mean_n": mean_photon(s),
        "purity": float(np.trace(q @ q).real),
        "predicted_alpha": alpha,
        "fidelity_to_predicted_alpha": fidelity,
        "n_max_used": s.n_max,
        "files": [csv_path, meta_path],
    }
    if fidelity_note:
        out["fidelity_note"] = fidelity_note
    _emit(out)


def _cmd_sweep_pump(args) -> None:
    cfg = _require_config(args)
    grid = np.linspace(0.0, args.theta_max, args.points)
    res = sweep_pump(cfg, grid)
    csv_path, meta_path = write_sweep(res, args.out, "sweep_pump")
    i_peak = int(np.nanargmax(res.mean_n))
    _emit(
        {
            "files": [csv_path, meta_path],
            "points": int(res.axis.size),
            "theta_peak": float(res.axis[i_peak]),
            "mean_n_peak": float(res.mean_n[i_peak]),
        }
    )


def _cmd_sweep_atoms(args) -> None:
    cfg = _require_config(args)
    if args.linear:
        grid = np.linspace(args.grid_min, args.grid_max, args.points)
    else:
        grid = np.geomspace(args.grid_min, args.grid_max, args.points)
    res = sweep_atoms(cfg, grid)
    csv_path, meta_path = write_sweep(res, args.out, "sweep_atoms")
    _emit(
        {
            "files": [csv_path, meta_path],
            "points": int(res.axis.size),
            "mean_n_final": float(res.mean_n[-1]),
            "collective_final": float(res.collective_part[-1]),
        }
    )


def _cmd_lossless(args) -> None:
    cfg = _require_config(args)
    a = cfg.atom()
    k = cfg.kick()
    trace = lossless_sequence([a] * args.atoms, k)
    bunched = [bunched_mean_n(j, cfg.theta, cfg.phi, k) for j in range(1, args.atoms + 1)]
    meta = _base_metadata(cfg, "atom index")
    meta["baseline"] = "same number of atoms crossing the cavity together"
    res = SweepResult(
        np.arange(1.0, args.atoms + 1.0),
        np.array(trace),
        np.array(trace) - np.array(bunched),
        np.array(bunched),
        meta,
    )
    csv_path, meta_path = write_sweep(res, args.out, "lossless")
    _emit(
        {
            "files": [csv_path, meta_path],
            "atoms": args.atoms,
            "final_mean_n": trace[-1],
            "final_bunched": bunched[-1],
        }
    )


def _cmd_transient(args) -> None:
    cfg = _require_config(args)
    a = cfg.atom()
    k = cfg.kick()
    n_c = cfg.derived_n_c
    s_ss = steady_state_auto(n_c, a, k, n_max=cfg.n_max)
    n_max = s_ss.n_max
    t_end = args.t_end if args.t_end is not None else (cfg.t_end or 8.0)
    p = MasterParams(n_c, k, a, n_max)
    tr = evolve(p, vacuum(n_max), t_end, mode=args.mode)
    mean = tr.mean_n()
    meta = _base_metadata(cfg, "time [1/gamma_c]")
    if args.mode == "discrete-regular":
        n_atoms = len(tr.times) - 1
        lossless = lossless_sequence([a] * max(n_atoms, 1), k)
        baseline = np.concatenate(([0.0], np.array(lossless[:n_atoms])))
        meta["baseline"] = "lossless stepwise emission after the same number of atoms"
    else:
        baseline = np.full(mean.shape, mean_photon(s_ss))
        meta["baseline"] = "steady-state mean photon number"
    res = SweepResult(tr.times, mean, mean - baseline, baseline, meta)
    csv_path, meta_path = write_sweep(res, args.out, "transient")
    _emit(
        {
            "files": [csv_path, meta_path],
            "mode": args.mode,
            "t_end": t_end,
            "final_mean_n": float(mean[-1]),
            "steady_mean_n": mean_photon(s_ss),
        }
    )


def _cmd_trajectory(args) -> None:
    cfg = _require_config(args)
    if args.t_end is not None:
        cfg = dataclasses.replace(cfg, t_end=args.t_end)
    if args.trajectories is not None:
        cfg = dataclasses.replace(cfg, n_trajectories=args.trajectories)
    tcfg = trajectory_config(cfg)
    ens = run_ensemble(tcfg)
    a = cfg.atom()
    s_ss = steady_state_auto(cfg.derived_n_c, a, cfg.kick(), n_max=cfg.n_max)
    floor = mean_photon(s_ss)
    times_units = ens.times * cfg.gamma_c
    meta = _base_metadata(cfg, "time [1/gamma_c]")
    meta["baseline"] = "master-equation steady state"
    meta["trajectory"] = ens.metadata
    res = SweepResult(
        times_units,
        ens.mean_n,
        ens.mean_n - floor,
        np.full(ens.mean_n.shape, floor),
        meta,
    )
    csv_path, meta_path = write_sweep(res, args.out, "trajectory")
    _emit(
        {
            "files": [csv_path, meta_path],
            "steady_mean_n": ens.steady_mean_n,
            "steady_stderr": ens.steady_stderr,
            "jump_rate": ens.jump_rate,
            "jump_rate_stderr": ens.jump_rate_stderr,
            "master_steady_mean_n": floor,
            "n_trajectories": cfg.n_trajectories,
        }
    )


def _cmd_dicke(args) -> None:
    cfg = _require_config(args)
    theta, phi = cfg.theta, cfg.phi
    spec = EnsembleSpec(
        args.atoms,
        complex(math.sin(0.5 * theta)),
        complex(math.cos(0.5 * theta)) * complex(math.cos(phi), math.sin(phi)),
    )
    a = spec.atom_state()
    out = {
        "atoms": args.atoms,
        "ensemble_rate": ensemble_rate(args.atoms, a),
        "independent_rate": args.atoms * a.rho_ee,
        "weights": np.abs(decompose_product_state(spec)) ** 2,
    }
    if args.m is not None:
        from .dicke import dicke_rate

        out["dicke_rate"] = dicke_rate(args.atoms, args.m)
        out["m"] = args.m
    if args.atoms <= 12:
        out["brute_force_rate"] = brute_force_rate(spec)
    else:
        out["brute_force_rate"] = None
        out["note"] = "direct 2^N check skipped above 12 atoms"
    _emit(out)


def _cmd_analytic(args) -> None:
    cfg = _require_config(args)
    a = cfg.atom()
    n_c = cfg.derived_n_c
    g_tau = cfg.g_tau
    out: dict = {
        "n_c": n_c,
        "g_tau": g_tau,
        "rho_ee": a.rho_ee,
        "rho_eg": a.rho_eg,
        "predicted_alpha": analytic.coherent_alpha(n_c, a.rho_eg, g_tau),
        "beta_factors": None,
        "mean_n_total": None,
        "mean_n_noncollective": None,
        "dominance_threshold": None,
        "saturation_nc": None,
        "n_eff": analytic.n_eff(cfg.injection, n_c),
    }
    for key, call in (
        ("beta_factors", lambda: analytic.beta_factors(n_c, a, g_tau)),
        ("mean_n_total", lambda: analytic.mean_n_total(n_c, a, g_tau)),
        (
            "mean_n_noncollective",
            lambda: analytic.mean_n_noncollective(n_c * g_tau**2, a.rho_ee),
        ),
        ("dominance_threshold", lambda: analytic.dominance_threshold(a)),
        ("saturation_nc", lambda: analytic.saturation_nc(g_tau, cfg.theta)),
    ):
        try:
            out[key] = call()
        except (CavsrError, ValueError, ZeroDivisionError) as exc:
            out[key] = f"{type(exc).__name__}: {exc}"
    out["emission_rate_per_atom"] = analytic.emission_rate_per_atom(
        out["n_eff"], a, cfg.g, cfg.tau
    )
    _emit(out)


def _cmd_preset(args) -> None:
    overrides = None
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            overrides = json.load(fh)
        if not isinstance(overrides, dict):
            raise ValueError("preset overrides file must hold a JSON object")
    if args.seed is not None:
        overrides = dict(overrides or {})
        overrides["seed"] = args.seed
    if args.n_max is not None:
        overrides = dict(overrides or {})
        overrides["n_max"] = args.n_max
    _emit(preset(args.name, overrides, args.out))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", help="JSON run configuration")
    common.add_argument("--out", "-o", default=".", help="output directory")
    common.add_argument("--seed", type=int, default=None, help="override RNG seed")
    common.add_argument("--n-max", type=int, default=None, help="override Fock cutoff")

    parser = argparse.ArgumentParser(
        prog="cavsr",
        description="Single-atom superradiance in a lossy cavity: steady states, "
        "sweeps, and stochastic trajectories.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("steady", parents=[common], help="steady-state photon statistics")
    p.set_defaults(func=_cmd_steady)

    p = sub.add_parser("sweep-pump", parents=[common], help="mean n versus pump pulse area")
    p.add_argument("--theta-max", type=float, default=1.25 * math.pi)
    p.add_argument("--points", type=int, default=51)
    p.set_defaults(func=_cmd_sweep_pump)

    p = sub.add_parser("sweep-atoms", parents=[common], help="mean n versus excited atom number")
    p.add_argument("--grid-min", type=float, default=0.02)
    p.add_argument("--grid-max", type=float, default=2.5)
    p.add_argument("--points", type=int, default=25)
    p.add_argument("--linear", action="store_true", help="linear instead of log grid")
    p.set_defaults(func=_cmd_sweep_atoms)

    p = sub.add_parser("lossless", parents=[common], help="sequential emission, no cavity loss")
    p.add_argument("--atoms", type=int, default=20)
    p.set_defaults(func=_cmd_lossless)

    p = sub.add_parser("transient", parents=[common], help="buildup from vacuum")
    p.add_argument("--t-end", type=float, default=None, help="duration in units of 1/gamma_c")
    p.add_argument(
        "--mode", choices=("discrete-regular", "coarse-ode"), default="coarse-ode"
    )
    p.set_defaults(func=_cmd_transient)

    p = sub.add_parser("trajectory", parents=[common], help="stochastic trajectory ensemble")
    p.add_argument("--t-end", type=float, default=None, help="duration in units of 1/gamma_c")
    p.add_argument("--trajectories", type=int, default=None)
    p.set_defaults(func=_cmd_trajectory)

    p = sub.add_parser("dicke", parents=[common], help="collective emission rates")
    p.add_argument("--atoms", type=int, required=True)
    # half-integer M values are legal whenever the atom number is odd
    p.add_argument("--m", type=float, default=None, help="ladder quantum number for (J, M) rate")
    p.set_defaults(func=_cmd_dicke)

    p = sub.add_parser("analytic", parents=[common], help="closed-form predictions")
    p.set_defaults(func=_cmd_analytic)

    p = sub.add_parser("preset", parents=[common], help="run a named figure pipeline")
    p.add_argument("name", choices=PRESET_NAMES)
    p.set_defaults(func=_cmd_preset)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (CavsrError, ValueError, OSError) as exc:
        err = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        print(json.dumps(err, indent=2, sort_keys=True), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

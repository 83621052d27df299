"""Command-line interface for reproducible pendulum experiments.

Commands: check-params, fields, rank-map, simulate, recur, cloud.
Configuration comes from built-in defaults, overlaid by a JSON file
(--config) and dotted overrides (--set key=value). Unknown keys are
rejected. Every summary embeds the resolved config, seed, version, and
admissibility verdict; floats print with 17 significant digits so repeated
runs are byte-identical.

Exit codes: 0 success/supported, 1 usage or config error, 2 inadmissible
parameters, 3 verdict not supported, 4 numerical blow-up (partial output
retained).
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import sys
from pathlib import Path

import numpy as np

from pidp import __version__, kernels
from pidp.dynamics import (
    Params,
    as_state,
    control_h,
    delta,
    drift_f,
    energies,
    hamiltonian,
    params_from_json,
    validate_params,
    wrap_state,
)
from pidp.errors import (
    AdmissibilityViolation,
    BlowUp,
    ConfigError,
    EmptyReport,
    NonPositiveParameter,
    PidpError,
)
from pidp.liealg import closed_form_check, notation_components, scaled_family
from pidp.rank import SweepSpec, bracket_generating_verdict, sweep
from pidp.serialize import canonical_json, write_csv_atomic, write_text_atomic
from pidp.sim import (
    ControlSchedule,
    cloud_compare,
    cloud_sample,
    integrate,
    recurrence_experiment,
)

__all__ = [
    "DEFAULTS",
    "cmd_check_params",
    "cmd_cloud",
    "cmd_fields",
    "cmd_rank_map",
    "cmd_recur",
    "cmd_simulate",
    "main",
    "resolve_config",
]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INADMISSIBLE = 2
EXIT_NOT_SUPPORTED = 3
EXIT_BLOW_UP = 4

DEFAULTS: dict = {
    "params": {"m1": 1.0, "m2": 1.0, "r1": 1.0, "r2": 1.0, "g": 10.0},
    "seed": 0,
    "out_dir": "pidp_out",
    "fields": {
        "state": [0.3, -0.2, 0.5, 0.1],
    },
    "rank_map": {
        "mode": "random",
        "n_samples": 1000,
        "omega_scale": 3.0,
        "grid_n": 32,
        "omega_slices": [[0.0, 0.0]],
        "depth_generic": 2,
        "depth_strata": 4,
        "tol": 1e-8,
        "max_words": 128,
    },
    "simulate": {
        "state": [math.pi - 0.1, math.pi, 0.0, 0.0],
        "T": 10.0,
        "dt": 1e-3,
        "bound": 1e6,
        "schedule": {"breakpoints": [], "values": []},
    },
    "recur": {
        "state": [math.pi - 0.05, math.pi - 0.05, 0.0, 0.0],
        "eps": 0.01,
        "T": 60.0,
        "dt": 1e-3,
        "bound": 1e6,
    },
    "cloud": {
        "state": [math.pi - 0.3, math.pi - 0.2, 0.0, 0.0],
        "n": 64,
        "budget": 1.0,
        "max_segments": 6,
        "dt": 1e-3,
        "bound": 1e6,
    },
}


def _merge_strict(base: dict, override: dict, path: str = "") -> None:
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key: {where}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {where} must be an object")
            _merge_strict(base[key], value, where)
        else:
            base[key] = value


def _apply_set(config: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise ConfigError(f"--set needs key=value, got {assignment!r}")
    key, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    parts = key.strip().split(".")
    node = config
    for part in parts[:-1]:
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"unknown config key: {key}")
        node = node[part]
    last = parts[-1]
    if not isinstance(node, dict) or last not in node:
        raise ConfigError(f"unknown config key: {key}")
    if isinstance(node[last], dict):
        if not isinstance(value, dict):
            raise ConfigError(f"config key {key} must be an object")
        _merge_strict(node[last], value, key)
    else:
        node[last] = value


def resolve_config(
    config_path: str | None, overrides: list[str] | None, out_dir: str | None
) -> dict:
    """Defaults overlaid by the config file, --set overrides, and --out-dir."""
    config = copy.deepcopy(DEFAULTS)
    if config_path is not None:
        try:
            doc = json.loads(Path(config_path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config file must hold a JSON object")
        # a params block is the physical identity of a run: if given, it
        # must be complete rather than silently inheriting defaults
        if "params" in doc:
            if not isinstance(doc["params"], dict):
                raise ConfigError("config key params must be an object")
            expected = {"m1", "m2", "r1", "r2", "g"}
            missing = sorted(expected - set(doc["params"]))
            if missing:
                raise ConfigError(f"params block is missing keys: {missing}")
        _merge_strict(config, doc)
    for assignment in overrides or []:
        _apply_set(config, assignment)
    if out_dir is not None:
        config["out_dir"] = out_dir
    return config


def _params_from_config(config: dict) -> Params:
    try:
        return params_from_json(config["params"])
    except PidpError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad params block: {exc}") from exc


def _admissibility_record(p: Params) -> dict:
    try:
        validate_params(p)
    except NonPositiveParameter as exc:
        return {
            "admissible": False,
            "condition": "positivity",
            "lhs": None,
            "rhs": None,
            "detail": str(exc),
        }
    except AdmissibilityViolation as exc:
        return {
            "admissible": False,
            "condition": exc.condition,
            "lhs": exc.lhs,
            "rhs": exc.rhs,
            "detail": str(exc),
        }
    return {"admissible": True, "condition": None, "lhs": None, "rhs": None, "detail": None}


def _envelope(command: str, config: dict, admissibility: dict) -> dict:
    return {
        "command": command,
        "config": config,
        "seed": config["seed"],
        "version": __version__,
        "backend": kernels.backend_name(),
        "admissibility": admissibility,
    }


def _state_from(block: dict) -> np.ndarray:
    raw = block["state"]
    if not isinstance(raw, (list, tuple)) or len(raw) != 4:
        raise ConfigError(f"state must be a 4-element array, got {raw!r}")
    return as_state([float(v) for v in raw])


def _emit(path: Path, text: str) -> None:
    write_text_atomic(path, text)
    print(path)


def cmd_check_params(config: dict) -> int:
    p = _params_from_config(config)
    record = _admissibility_record(p)
    verdict = {
        "verdict": "admissible" if record["admissible"] else "inadmissible",
        "params": config["params"],
        "admissibility": record,
        "version": __version__,
    }
    sys.stdout.write(canonical_json(verdict))
    return EXIT_OK if record["admissible"] else EXIT_INADMISSIBLE


def cmd_fields(config: dict, state=None) -> int:
    p = _params_from_config(config)
    record = _admissibility_record(p)
    if not record["admissible"]:
        print(f"inadmissible parameters: {record['detail']}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    z = as_state(state) if state is not None else _state_from(config["fields"])
    z = wrap_state(z)
    family = scaled_family(p)
    comp = notation_components(p, z)
    check = closed_form_check(p, z)
    doc = {
        **_envelope("fields", config, record),
        "state": z,
        "delta": delta(p, z[0], z[1]),
        "f": drift_f(p, z),
        "h": control_h(p, z),
        "energies": {
            "kinetic": energies(p, z).kinetic,
            "potential": energies(p, z).potential,
            "lagrangian": energies(p, z).lagrangian,
            "hamiltonian": energies(p, z).hamiltonian,
        },
        "X1": family[0](z),
        "X2": family[1](z),
        "X3": family[2](z),
        "X4": family[3](z),
        "notation": {
            "Omega": comp.Omega,
            "a": comp.a,
            "b": comp.b,
            "OmegaBar": comp.OmegaBar,
            "aBar": comp.aBar,
            "bBar": comp.bBar,
        },
        "closed_form_check": {
            "x3_theta_diff": check["x3_theta_diff"],
            "x4_theta_diff": check["x4_theta_diff"],
            "x3_omega_printed": check["x3_omega_printed"],
            "x3_omega_diff": check["x3_omega_diff"],
            "x4_omega_printed": check["x4_omega_printed"],
            "x4_omega_diff": check["x4_omega_diff"],
            "fd_vs_analytic": check["fd_vs_analytic"],
        },
    }
    out = Path(config["out_dir"])
    _emit(out / "fields.json", canonical_json(doc))
    return EXIT_OK


def cmd_rank_map(config: dict, force_inadmissible: bool = False) -> int:
    p = _params_from_config(config)
    record = _admissibility_record(p)
    if not record["admissible"] and not force_inadmissible:
        print(f"inadmissible parameters: {record['detail']}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    block = config["rank_map"]
    spec = SweepSpec(
        mode=str(block["mode"]),
        n_samples=int(block["n_samples"]),
        seed=int(config["seed"]),
        omega_scale=float(block["omega_scale"]),
        grid_n=int(block["grid_n"]),
        omega_slices=tuple(
            (float(a), float(b)) for a, b in block["omega_slices"]
        ),
        depth_generic=int(block["depth_generic"]),
        depth_strata=int(block["depth_strata"]),
        tol=float(block["tol"]),
        max_words=int(block["max_words"]),
    )
    report = sweep(p, spec)
    verdict = bracket_generating_verdict(report)  # raises EmptyReport on 0 samples

    out = Path(config["out_dir"])
    rows = [
        (
            report.points[i, 0],
            report.points[i, 1],
            report.points[i, 2],
            report.points[i, 3],
            report.strata[i],
            int(report.ranks[i]),
            report.gamma_dets[i],
            report.upsilon_dets[i],
            report.hamiltonians[i],
        )
        for i in range(report.n_samples)
    ]
    path_csv = out / "rank_map.csv"
    write_csv_atomic(
        path_csv,
        ["theta1", "theta2", "omega1", "omega2", "stratum", "rank", "gamma_det", "upsilon_det", "H"],
        rows,
    )
    print(path_csv)
    summary = {
        **_envelope("rank-map", config, record),
        "counts": report.counts(),
        "n_samples": report.n_samples,
        "rank4_fraction": report.rank4_fraction(),
        "rank4_fraction_generic": report.rank4_fraction_generic(),
        "verdict": verdict,
        "sub_rank": [
            {
                "point": r.point,
                "rank": r.rank,
                "singular_values": r.singular_values,
                "witness_words": list(r.witness_strings()),
                "depth_used": r.depth_used,
            }
            for r in report.sub_rank
        ],
        "defects": list(report.defects),
    }
    _emit(out / "rank_map_summary.json", canonical_json(summary))
    print(f"verdict: {verdict['verdict']} ({verdict['evidence']})")
    return EXIT_OK if verdict["verdict"] == "SUPPORTED" else EXIT_NOT_SUPPORTED


def _schedule_from(block: dict) -> ControlSchedule:
    sched = block["schedule"]
    try:
        return ControlSchedule(
            breakpoints=tuple(float(b) for b in sched["breakpoints"]),
            values=tuple(float(v) for v in sched["values"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad schedule block: {exc}") from exc


def _write_trajectory(path: Path, traj, sched: ControlSchedule) -> None:
    h = hamiltonian(traj.params, traj.states)
    rows = [
        (
            traj.times[i],
            traj.states[i, 0],
            traj.states[i, 1],
            traj.states[i, 2],
            traj.states[i, 3],
            h[i],
            sched.u_at(traj.times[i]),
        )
        for i in range(traj.n_samples)
    ]
    write_csv_atomic(
        path, ["t", "theta1", "theta2", "omega1", "omega2", "H", "u"], rows
    )
    print(path)


def cmd_simulate(config: dict) -> int:
    p = _params_from_config(config)
    record = _admissibility_record(p)
    if not record["admissible"]:
        print(f"inadmissible parameters: {record['detail']}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    block = config["simulate"]
    z0 = _state_from(block)
    sched = _schedule_from(block)
    T = float(block["T"])
    dt = float(block["dt"])
    bound = float(block["bound"])
    out = Path(config["out_dir"])
    blown = None
    try:
        traj = integrate(p, z0, sched, T, dt=dt, bound=bound)
    except BlowUp as exc:
        if exc.trajectory is None:
            raise
        traj = exc.trajectory
        blown = exc
    _write_trajectory(out / "trajectory.csv", traj, sched)
    h = hamiltonian(p, traj.states_unwrapped)
    summary = {
        **_envelope("simulate", config, record),
        "T": T,
        "dt": dt,
        "n_samples": traj.n_samples,
        "final_time": float(traj.times[-1]),
        "final_state": traj.states[-1],
        "energy_drift": (
            float(np.max(np.abs(h - h[0])) / max(abs(float(h[0])), 1.0))
            if sched.is_zero()
            else None
        ),
        "blow_up": blown is not None,
        "blow_up_time": None if blown is None else blown.time,
    }
    _emit(out / "simulate_summary.json", canonical_json(summary))
    if blown is not None:
        print(f"blow-up at t = {blown.time:.6g}; partial trajectory retained", file=sys.stderr)
        return EXIT_BLOW_UP
    return EXIT_OK


def cmd_recur(config: dict) -> int:
    p = _params_from_config(config)
    record = _admissibility_record(p)
    if not record["admissible"]:
        print(f"inadmissible parameters: {record['detail']}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    block = config["recur"]
    z0 = _state_from(block)
    report = recurrence_experiment(
        p,
        z0,
        eps=float(block["eps"]),
        T=float(block["T"]),
        dt=float(block["dt"]),
        bound=float(block["bound"]),
    )
    out = Path(config["out_dir"])
    summary = {
        **_envelope("recur", config, record),
        "start": report.start,
        "epsilon": report.epsilon,
        "horizon": report.horizon,
        "dt": report.dt,
        "status": report.status,
        "departure_time": report.departure_time,
        "first_return_time": report.first_return_time,
        "min_distance_after_departure": report.min_distance_after_departure,
        "metric": report.metric,
    }
    _emit(out / "recurrence_summary.json", canonical_json(summary))
    return EXIT_OK


def _write_cloud(path: Path, cloud) -> None:
    rows = []
    for i in range(cloud.points.shape[0]):
        w = wrap_state(cloud.points[i])
        rows.append((w[0], w[1], w[2], w[3], cloud.words[i]))
    write_csv_atomic(
        path, ["theta1", "theta2", "omega1", "omega2", "word"], rows
    )
    print(path)


def cmd_cloud(config: dict) -> int:
    p = _params_from_config(config)
    record = _admissibility_record(p)
    if not record["admissible"]:
        print(f"inadmissible parameters: {record['detail']}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    block = config["cloud"]
    n = int(block["n"])
    if n < 1:
        raise ConfigError(f"cloud.n must be >= 1, got {n}")
    z0 = _state_from(block)
    kwargs = dict(
        seed=int(config["seed"]),
        budget=float(block["budget"]),
        max_segments=int(block["max_segments"]),
        dt=float(block["dt"]),
        bound=float(block["bound"]),
    )
    orbit = cloud_sample(p, z0, n, mode="orbit", **kwargs)
    attain = cloud_sample(p, z0, n, mode="attainable", **kwargs)
    out = Path(config["out_dir"])
    _write_cloud(out / "cloud_orbit.csv", orbit)
    _write_cloud(out / "cloud_attainable.csv", attain)
    comparison = (
        cloud_compare(orbit, attain)
        if orbit.points.shape[0] and attain.points.shape[0]
        else None
    )
    summary = {
        **_envelope("cloud", config, record),
        "start": orbit.start,
        "n_requested": n,
        "n_orbit": int(orbit.points.shape[0]),
        "n_attainable": int(attain.points.shape[0]),
        "budget": orbit.budget,
        "comparison": comparison,
        "defects_orbit": list(orbit.defects),
        "defects_attainable": list(attain.defects),
    }
    _emit(out / "cloud_summary.json", canonical_json(summary))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pidp",
        description="Planar inverted double pendulum toolkit",
    )
    parser.add_argument("--version", action="version", version=f"pidp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("check-params", "fields", "rank-map", "simulate", "recur", "cloud"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="JSON config file")
        sp.add_argument(
            "--set",
            action="append",
            dest="overrides",
            default=[],
            metavar="KEY=VALUE",
            help="dotted config override, value parsed as JSON",
        )
        sp.add_argument("--out-dir", default=None, help="output directory")
        if name == "rank-map":
            sp.add_argument(
                "--force-inadmissible",
                action="store_true",
                help="run the sweep even when the admissibility check fails",
            )
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; 2 means inadmissible here
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        config = resolve_config(args.config, args.overrides, args.out_dir)
        if args.command == "check-params":
            return cmd_check_params(config)
        if args.command == "fields":
            return cmd_fields(config)
        if args.command == "rank-map":
            return cmd_rank_map(config, force_inadmissible=args.force_inadmissible)
        if args.command == "simulate":
            return cmd_simulate(config)
        if args.command == "recur":
            return cmd_recur(config)
        if args.command == "cloud":
            return cmd_cloud(config)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EmptyReport as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NonPositiveParameter, AdmissibilityViolation) as exc:
        print(f"inadmissible parameters: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    except BlowUp as exc:
        print(f"numerical blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOW_UP
    except PidpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())

"""
命令行接口 / Command-Line Interface
===================================

子命令 / Sub-commands::

    gfbvp gf        --model hill --ref L2 --order 6 --kind F2 --tspan 0:4 --out gf.json
    gfbvp bvp       --gf gf.json --kind F1 --input problems.csv --out solutions.csv
    gfbvp lambert   --gf gf.json --q0 0.01,0 --q 0.01,0 --T 3.03353
    gfbvp periodic  --gf gf.json --mode time-scan --out results/
    gfbvp lq        --config lq.json --out results/
    gfbvp manifold  --gf gf.json --out results/
    gfbvp formation --gf gf.json --out results/
    gfbvp singular  --gf gf.json

退出码 / Exit codes: 0 成功 / ok, 1 数值失败 / numerical failure,
2 用法或配置错误 / usage or configuration error.
"""

import argparse
import json
import logging
import os
import sys
from typing import List, Optional

import numpy as np
import pandas as pd

from . import __version__, io
from .applications import (
    LQProblem,
    days_to_time,
    formation_cost_map,
    hyperbolic_eigen,
    km_to_length,
    lq_solve,
    manifold_propagate,
    momentum_to_ms,
    periodic_f2_solve,
    periodic_family_scan,
    periodic_time_scan,
)
from .config import ScenarioConfig, load_config, validate
from .dynamics import PhaseState, ReferenceTrajectory, get_model, libration_point
from .errors import ArtifactError, ConfigError, GFBVPError
from .hj import GeneratingFunction, monitor_singularity, save_gf, solve_gf
from .partition import BoundaryPartition
from .tpbvp import solve_batch, solve_lambert, solutions_frame

logger = logging.getLogger(__name__)


# ============================================================================
# 参数解析 / Argument Parsing
# ============================================================================
def _floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from exc


def _span(text: str) -> List[float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise ConfigError(f"expected a:b, got {text!r}")
    try:
        return [float(parts[0]), float(parts[1])]
    except ValueError as exc:
        raise ConfigError(f"expected a:b, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON scenario file")
    common.add_argument("--print-config", action="store_true",
                        help="print the resolved configuration and exit")
    common.add_argument("--out", help="output file or directory")
    common.add_argument("--jobs", type=int, help="worker threads for grid scans")
    common.add_argument("--tol", type=float, help="integrator tolerance")
    common.add_argument("--verbose", "-v", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(
        prog="gfbvp",
        description="Generating-function solutions of Hamiltonian boundary value problems")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gf = sub.add_parser("gf", parents=[common], help="solve and store a generating function")
    gf.add_argument("--model")
    gf.add_argument("--param", action="append", default=[], metavar="K=V")
    gf.add_argument("--ref", help="equilibrium name (L1..L5, origin) or trajectory CSV")
    gf.add_argument("--order", type=int)
    gf.add_argument("--kind", help="F1..F4 or 'I=1,2;K=' (1-based)")
    gf.add_argument("--tspan", help="t0:t1")
    switch = gf.add_mutually_exclusive_group()
    switch.add_argument("--switch-kinds", dest="switch_kinds", action="store_true", default=None)
    switch.add_argument("--no-switch-kinds", dest="switch_kinds", action="store_false")

    bvp = sub.add_parser("bvp", parents=[common], help="batch boundary value problems")
    bvp.add_argument("--gf", required=False)
    bvp.add_argument("--kind", default="F1")
    bvp.add_argument("--input", help="CSV with T and the independent variables")
    bvp.add_argument("--verify", action="store_true")

    lam = sub.add_parser("lambert", parents=[common], help="Lambert problem (F1)")
    lam.add_argument("--gf")
    lam.add_argument("--q0", type=_floats)
    lam.add_argument("--q", type=_floats)
    lam.add_argument("--T", type=float)

    per = sub.add_parser("periodic", parents=[common], help="periodic-orbit search")
    per.add_argument("--gf")
    per.add_argument("--mode", choices=["time-scan", "position-scan", "f2-solve"])
    per.add_argument("--q0", type=_floats)
    per.add_argument("--window", type=_span)
    per.add_argument("--T", type=float)

    sub.add_parser("lq", parents=[common], help="linear-quadratic optimal control")

    man = sub.add_parser("manifold", parents=[common], help="unstable-manifold propagation")
    man.add_argument("--gf")
    man.add_argument("--alpha", type=float)

    form = sub.add_parser("formation", parents=[common], help="formation cost map")
    form.add_argument("--gf")
    form.add_argument("--rest", choices=["momentum", "velocity"])

    sing = sub.add_parser("singular", parents=[common], help="singular times of each kind")
    sing.add_argument("--gf")
    return parser


def resolve_config(args: argparse.Namespace) -> ScenarioConfig:
    """Config file and environment, then command-line flags."""
    config = load_config(args.config)
    if args.tol is not None:
        config.solver.tol = args.tol
    if args.jobs is not None:
        config.solver.jobs = args.jobs
    command = args.command
    if command == "gf":
        if args.model is not None:
            config.model.name = args.model
        for item in args.param:
            key, sep, value = item.partition("=")
            if not sep:
                raise ConfigError(f"--param expects K=V, got {item!r}")
            try:
                config.model.parameters[key] = float(value)
            except ValueError as exc:
                raise ConfigError(f"--param {key}: {value!r} is not a number") from exc
        if args.ref is not None:
            if args.ref.lower().endswith(".csv"):
                config.reference.file, config.reference.equilibrium = args.ref, None
            else:
                config.reference.equilibrium, config.reference.file = args.ref, None
        if args.order is not None:
            config.gf.order = args.order
        if args.kind is not None:
            config.gf.kind = args.kind
        if args.tspan is not None:
            config.gf.tspan = _span(args.tspan)
        if args.switch_kinds is not None:
            config.gf.switch_kinds = args.switch_kinds
    elif command == "periodic":
        if args.mode is not None:
            config.periodic.mode = args.mode
        if args.q0 is not None:
            config.periodic.q0 = args.q0
        if args.window is not None:
            config.periodic.window = args.window
        if args.T is not None:
            config.periodic.T = args.T
    elif command == "manifold" and args.alpha is not None:
        config.manifold.alpha = args.alpha
    elif command == "formation" and args.rest is not None:
        config.formation.rest = args.rest
    return validate(config)


# ============================================================================
# 子命令 / Sub-commands
# ============================================================================
def build_reference(config: ScenarioConfig, model) -> ReferenceTrajectory:
    ref = config.reference
    if ref.file is not None:
        return ReferenceTrajectory.from_csv(ref.file, model, ref.interpolation_order)
    if ref.equilibrium.lower() == "origin":
        return ReferenceTrajectory.equilibrium(model, PhaseState.from_vector(np.zeros(2 * model.n)))
    try:
        state = libration_point(model, ref.equilibrium)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return ReferenceTrajectory.equilibrium(model, state)


def _load_artifact(path: Optional[str]) -> GeneratingFunction:
    if path is None:
        raise ConfigError("--gf artifact is required")
    try:
        header = io.load_json(path)
    except OSError as exc:
        raise ArtifactError(f"cannot read artifact {path}: {exc}") from exc
    try:
        model = get_model(header["model"]["name"], header["model"]["parameters"])
        return GeneratingFunction.from_dict(header, model)
    except (KeyError, TypeError) as exc:
        raise ArtifactError(f"{path}: malformed artifact ({exc!r})") from exc


def _output_dir(args, default: str) -> str:
    out = args.out or default
    os.makedirs(out, exist_ok=True)
    return out


def cmd_gf(args, config: ScenarioConfig) -> int:
    model = get_model(config.model.name, config.model.parameters)
    ref = build_reference(config, model)
    kind = BoundaryPartition.parse(config.gf.kind, model.n)
    t0, t1 = config.gf.tspan
    gf = solve_gf(model, ref, kind, config.gf.order, t0, t1, config.solver.tol,
                  switch_kinds=config.gf.switch_kinds, max_step=config.gf.max_step)
    out = args.out or "gf.json"
    save_gf(gf, out)
    print(f"{kind.kind} order {gf.order} on [{t0}, {t1}] with {len(gf.charts)} chart(s); "
          f"trust radius {gf.trust_radius}; written to {out}")
    return 0


def cmd_bvp(args, config: ScenarioConfig) -> int:
    gf = _load_artifact(args.gf)
    part = BoundaryPartition.parse(args.kind, gf.n)
    names, _ = part.variable_names()
    if args.input is None:
        raise ConfigError("--input CSV is required")
    frame = io.read_csv(args.input, ["T"] + names)
    solutions, times = [], []
    for T, group in frame.groupby("T", sort=False):
        batch = solve_batch(gf, part, group[names].to_numpy(dtype=float), float(T),
                            verify=args.verify, threshold=config.solver.flow_threshold)
        solutions.extend(batch)
        times.extend([float(T)] * len(batch))
    out = args.out or "solutions.csv"
    io.write_csv(solutions_frame(solutions, times), out)
    print(f"solved {len(solutions)} problem(s); written to {out}")
    return 0


def cmd_lambert(args, config: ScenarioConfig) -> int:
    gf = _load_artifact(args.gf)
    if args.q0 is None or args.q is None or args.T is None:
        raise ConfigError("--q0, --q and --T are required")
    sol = solve_lambert(gf, args.q0, args.q, args.T, threshold=config.solver.flow_threshold)
    result = {"T": args.T, "q0": args.q0, "q": args.q, "p0": sol.p0, "p": sol.p,
              "residual": sol.residual}
    if args.out:
        io.save_json(result, args.out)
    print(json.dumps(io.to_native(result), sort_keys=True))
    return 0


def cmd_periodic(args, config: ScenarioConfig) -> int:
    gf = _load_artifact(args.gf)
    cfg = config.periodic
    out = _output_dir(args, "periodic")
    if cfg.mode == "time-scan":
        scan = periodic_time_scan(gf, cfg.q0, tuple(cfg.window), cfg.samples, cfg.accept)
        io.write_csv(pd.DataFrame({"T": scan.times, "residual": scan.residual,
                                   "masked": scan.mask.astype(int)}),
                     os.path.join(out, "time_scan.csv"))
        roots = [{"T": r.T, "q0": r.q0, "p0": r.p0, "p": r.p, "residual": r.residual,
                  "flow_residual": r.flow_residual} for r in scan.roots]
        io.save_json({"roots": roots, "masked_times": scan.masked_times},
                     os.path.join(out, "roots.json"))
        print(f"{len(roots)} root(s); {int(scan.mask.sum())} masked sample(s)")
    elif cfg.mode == "position-scan":
        periods = cfg.periods or [cfg.T]
        scans = periodic_family_scan(gf, periods, jobs=config.solver.jobs,
                                     half_width=cfg.half_width, grid=cfg.grid)
        rows = []
        for scan in scans:
            for i, curve in enumerate(scan.curves):
                rows.extend([scan.T, i, x, y] for x, y in curve)
        io.write_csv(pd.DataFrame(rows, columns=["T", "curve", "q1", "q2"]),
                     os.path.join(out, "curves.csv"))
        points = [[scan.T, *pt, *mom] for scan in scans
                  for pt, mom in zip(scan.points, scan.momenta)]
        io.write_csv(pd.DataFrame(points, columns=["T", "q1", "q2", "p1", "p2"]),
                     os.path.join(out, "points.csv"))
        print(f"{sum(len(s.curves) for s in scans)} curve(s) over {len(scans)} period(s)")
    else:
        if not cfg.guesses:
            raise ConfigError("periodic.guesses is required for f2-solve")
        orbits = periodic_f2_solve(gf, cfg.guesses, T=cfg.T)
        io.save_json({"orbits": [{"T": o.T, "q0": o.q0, "p0": o.p0, "residual": o.residual,
                                  "converged": o.converged, "flow_residual": o.flow_residual}
                                 for o in orbits]},
                     os.path.join(out, "orbits.json"))
        print(f"{sum(o.converged for o in orbits)} converged orbit(s)")
    return 0


def cmd_lq(args, config: ScenarioConfig) -> int:
    cfg = config.lq
    arr = lambda v: None if v is None else np.asarray(v, dtype=float)
    try:
        prob = LQProblem(arr(cfg.A), arr(cfg.B), arr(cfg.Q), arr(cfg.R), cfg.t0, cfg.tf,
                         arr(cfg.x0), N=arr(cfg.N), Qf=arr(cfg.Qf), M=arr(cfg.M),
                         m_f=arr(cfg.m_f), fixed_final=tuple(cfg.fixed_final),
                         x_f=arr(cfg.x_f), p_f=arr(cfg.p_f))
    except ValueError as exc:
        raise ConfigError(f"lq: {exc}") from exc
    sol = lq_solve(prob, cfg.samples, min(config.solver.tol, 1e-12))
    out = _output_dir(args, "lq")
    n, m = sol.x.shape[1], sol.u.shape[1]
    columns = (["t"] + [f"x{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)]
               + [f"u{i + 1}" for i in range(m)])
    io.write_csv(pd.DataFrame(np.column_stack([sol.times, sol.x, sol.p, sol.u]), columns=columns),
                 os.path.join(out, "lq_path.csv"))
    io.save_json({"cost": sol.cost, "p0": sol.p0, "partition": sol.partition.kind},
                 os.path.join(out, "lq_summary.json"))
    print(f"cost {sol.cost:.12g}")
    return 0


def cmd_manifold(args, config: ScenarioConfig) -> int:
    gf = _load_artifact(args.gf)
    cfg = config.manifold
    lam, v = hyperbolic_eigen(gf.model, gf.reference.state_at(gf.t0), gf.t0)
    times = np.linspace(0.0, cfg.t_end, cfg.samples)
    traj = manifold_propagate(gf, lam, v, cfg.alpha, times, cfg.branch)
    n = gf.n
    columns = ["t"] + [f"q{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)] + ["energy"]
    out = _output_dir(args, "manifold")
    io.write_csv(pd.DataFrame(np.column_stack([traj.times, traj.states, traj.energy]),
                              columns=columns), os.path.join(out, "manifold.csv"))
    io.save_json({"lambda": lam, "eigenvector": v, "alpha": cfg.alpha,
                  "truncated": traj.truncated}, os.path.join(out, "manifold.json"))
    print(f"λ = {lam:.10g}; {len(traj.times)} sample(s); truncated={traj.truncated}")
    return 0


def cmd_formation(args, config: ScenarioConfig) -> int:
    gf = _load_artifact(args.gf)
    cfg = config.formation
    angles = np.linspace(0.0, 2.0 * np.pi, cfg.n_angles, endpoint=False)
    periods = days_to_time(np.asarray(cfg.periods_days, dtype=float))
    cmap = formation_cost_map(gf, float(km_to_length(cfg.radius_km)), angles, periods,
                              rest=cfg.rest, jobs=config.solver.jobs)
    radial = cmap.radial_points()
    cost_ms = momentum_to_ms(cmap.cost)
    rows = [[days, T, theta, cmap.cost[i, j], cost_ms[i, j], radial[i, j, 0], radial[i, j, 1]]
            for i, (days, T) in enumerate(zip(cfg.periods_days, periods))
            for j, theta in enumerate(angles)]
    out = _output_dir(args, "formation")
    columns = ["days", "T", "angle", "cost", "cost_ms", "x", "y"]
    io.write_csv(pd.DataFrame(rows, columns=columns), os.path.join(out, "formation.csv"))
    io.save_json({"best_angles_deg": np.degrees(cmap.best_angles()),
                  "periods_days": cfg.periods_days, "masked": cmap.mask},
                 os.path.join(out, "formation.json"))
    print(f"cost map over {len(periods)} period(s) x {len(angles)} angle(s)")
    return 0


def cmd_singular(args, config: ScenarioConfig) -> int:
    gf = _load_artifact(args.gf)
    found = monitor_singularity(gf)
    frame = pd.DataFrame([[part.kind, part.block_name, t] for part, t in found],
                         columns=["kind", "block", "t"])
    if args.out:
        io.write_csv(frame, args.out)
    print(frame.to_string(index=False))
    return 0


_COMMANDS = {
    "gf": cmd_gf,
    "bvp": cmd_bvp,
    "lambert": cmd_lambert,
    "periodic": cmd_periodic,
    "lq": cmd_lq,
    "manifold": cmd_manifold,
    "formation": cmd_formation,
    "singular": cmd_singular,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = resolve_config(args)
        if args.print_config:
            print(json.dumps(config.to_dict(), indent=2, sort_keys=True))
            return 0
        return _COMMANDS[args.command](args, config)
    except (ConfigError, ArtifactError) as exc:
        print(f"gfbvp: error: {exc}", file=sys.stderr)
        return 2
    except GFBVPError as exc:
        print(f"gfbvp: numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

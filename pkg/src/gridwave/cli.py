"""Command-line front end for the wave-propagation pipeline.

Exit codes: 0 success, 1 domain violation (bad case data, unreachable bus,
failed validation), 2 IO or usage problems (missing/malformed files, bad
flags), 3 numerical failure (divergent power flow, unstable integration).

Every flag can also be supplied through a JSON config file (--config);
explicit flags win. Run directories receive a manifest.json that names the
inputs and resolved settings, and feeding that manifest back via --config
reproduces the run bit-identically.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (ArrivalCurve, amplitude_profile, arrivals_json,
                       detect_arrival_times, estimate_velocity,
                       segment_peak_amplitudes, segment_velocities)
from .cases import (CaseError, CaseFormatError, PowerCase, SchemaError,
                    parse_case_json, parse_matpower, parse_scenario_json,
                    validate_case)
from .continuum import ContinuumGrid, discretize_path, grid_csv
from .inertia import distribute_inertia, inertia_csv
from .pathfind import path_json, shortest_emw_path
from .powerflow import (ConvergenceError, SingularJacobianError,
                        solution_csv, solve_power_flow)
from .solver import InstabilityError, SolverConfig, simulate, wavefield_csv
from . import svgplot

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

_META_KEYS = {"command", "tool_version", "outputs"}


def _read(path: str) -> str:
    return Path(path).read_text()


def load_case(path: str, lengths_path: str | None = None,
              h_path: str | None = None, default_h: float = 5.0) -> PowerCase:
    text = _read(path)
    if path.endswith(".m"):
        lengths = json.loads(_read(lengths_path)) if lengths_path else None
        h_consts = None
        if h_path:
            h_consts = {int(k): v for k, v in json.loads(_read(h_path)).items()}
        return parse_matpower(text, lengths=lengths, h_consts=h_consts,
                              default_h=default_h)
    return parse_case_json(text)


def _prepare(args) -> tuple[PowerCase, object, object]:
    """Case, power-flow solution, and inertia map shared by several commands."""
    c = load_case(args.case, getattr(args, "lengths", None),
                  getattr(args, "h_consts", None))
    report = validate_case(c)
    if not report.ok:
        raise CaseError(f"case is not simulable:\n{report}")
    sol = solve_power_flow(c)
    imap = distribute_inertia(c)
    return c, sol, imap


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


# ---------------------------------------------------------------- commands

def cmd_validate(args) -> int:
    c = load_case(args.case, getattr(args, "lengths", None),
                  getattr(args, "h_consts", None))
    report = validate_case(c)
    print(report if report.violations else
          f"ok: {len(c.buses)} buses, {len(c.lines)} lines, "
          f"{len(c.generators)} generators")
    return EXIT_OK if report.ok else EXIT_DOMAIN


def cmd_powerflow(args) -> int:
    c = load_case(args.case, args.lengths, args.h_consts)
    sol = solve_power_flow(c, tol=args.tol, max_iter=args.max_iter)
    csv = solution_csv(sol)
    if args.out:
        _write(Path(args.out), csv)
        print(f"converged in {sol.iterations} iterations, "
              f"max mismatch {sol.max_mismatch:.3e}; wrote {args.out}")
    else:
        sys.stdout.write(csv)
    return EXIT_OK


def cmd_distribute_inertia(args) -> int:
    c = load_case(args.case, args.lengths, args.h_consts)
    imap = distribute_inertia(c, tol=args.tol, max_rounds=args.max_rounds)
    csv = inertia_csv(imap)
    if args.out:
        _write(Path(args.out), csv)
        print(f"distributed {imap.total:.6f} pu*s^2 over "
              f"{len(imap.j_line)} lines; wrote {args.out}")
    else:
        sys.stdout.write(csv)
    return EXIT_OK


def cmd_path(args) -> int:
    c, sol, imap = _prepare(args)
    p = shortest_emw_path(c, imap, sol, args.src, args.dst)
    print(" -> ".join(str(b) for b in p.buses))
    print(f"{'line':>8}  {'miles':>8}  {'velocity mi/s':>14}  {'time s':>8}")
    for ln, v in zip(p.lines, p.velocities):
        print(f"{ln.id:>8}  {ln.length_miles:>8.3f}  {v:>14.4f}  "
              f"{ln.length_miles / v:>8.4f}")
    print(f"total travel time: {p.travel_time_s:.4f} s "
          f"over {p.length_miles:.2f} miles")
    if args.out:
        _write(Path(args.out), path_json(p))
    return EXIT_OK


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        t_end=args.t_end, courant=args.courant, model=args.model,
        boundary_mode=args.boundary_mode, record_stride=args.record_stride,
        dxi=args.dxi, lag_tau=args.lag_tau, p_only=args.p_only)


def _manifest(args, command: str, extra: dict | None = None) -> str:
    doc = {"command": command, "tool_version": __version__}
    skip = {"func", "config"}
    for key, val in sorted(vars(args).items()):
        if key not in skip:
            doc[key] = val
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2) + "\n"


def _run_artifacts(w, out: Path, threshold_frac: float) -> dict:
    """Write the analysis artifact set for one run; return summary values."""
    _write(out / "wavefield.csv", wavefield_csv(w))
    _write(out / "grid.csv", grid_csv(w.grid))
    curve = detect_arrival_times(w, threshold_frac)
    _write(out / "arrivals.json", arrivals_json(curve))

    segs = segment_velocities(curve, w.grid)
    try:
        vel, r2 = estimate_velocity(curve)
    except ValueError:
        vel, r2 = None, None
    _write(out / "velocity.json", json.dumps({
        "front_velocity_mi_s": vel, "r2": r2,
        "segments": [{"line": lid, "velocity_mi_s": v, "r2": r}
                     for lid, v, r in segs]}, indent=2) + "\n")

    prof = amplitude_profile(w)
    seg_amp = segment_peak_amplitudes(w)
    _write(out / "amplitude.json", json.dumps({
        "xi_miles": [float(x) for x in w.grid.xi],
        "peak_chi": [float(a) for a in prof],
        "segment_mean_peak_chi": [{"line": lid, "mean_peak_chi": a}
                                  for lid, a in seg_amp]}, indent=2) + "\n")
    return {"peak_chi": float(prof.max()), "front_velocity_mi_s": vel}


def _simulate_once(case_path, lengths, h_consts, scenario_path, args,
                   case_override: PowerCase | None = None):
    c = case_override or load_case(case_path, lengths, h_consts)
    report = validate_case(c)
    if not report.ok:
        raise CaseError(f"case is not simulable:\n{report}")
    scenario = parse_scenario_json(_read(scenario_path))
    sol = solve_power_flow(c)
    imap = distribute_inertia(c)
    p = shortest_emw_path(c, imap, sol, args.src, args.dst)
    cfg = _solver_config(args)
    w = simulate(c, scenario, p, cfg)
    return c, scenario, p, w


def cmd_simulate(args) -> int:
    c, scenario, p, w = _simulate_once(args.case, args.lengths, args.h_consts,
                                       args.scenario, args)
    out = Path(args.out)
    summary = _run_artifacts(w, out, args.threshold_frac)
    _write(out / "path.json", path_json(p))
    _write(out / "manifest.json", _manifest(args, "simulate"))

    print("path: " + " -> ".join(str(b) for b in p.buses))
    steps = len(w.times) - 1
    print(f"model {args.model}, dxi {args.dxi} mi, courant {args.courant}, "
          f"{steps} recorded snapshots to t={w.times[-1]:.3f} s")
    if summary["peak_chi"] == 0.0:
        print("no propagation (zero disturbance)")
    else:
        print(f"peak |chi| {summary['peak_chi']:.4e} rad/s; "
              f"front velocity {summary['front_velocity_mi_s']}")
    print(f"artifacts in {out}")
    return EXIT_OK


def _sweep_case(c: PowerCase, param: str, value: float,
                line_id: str | None) -> PowerCase:
    if param == "h":
        gens = tuple(replace(g, h_const=value, inertia_j=0.0)
                     for g in c.generators)
        return replace(c, generators=gens)
    ln = c.line(line_id)
    scaled = replace(ln, r=ln.r * value, x=ln.x * value)
    lines = tuple(scaled if l.id == ln.id else l for l in c.lines)
    return replace(c, lines=lines)


def _sweep_worker(packed):
    case_path, lengths, h_consts, scenario_path, args, value = packed
    base = load_case(case_path, lengths, h_consts)
    c = _sweep_case(base, args.param, value, args.line)
    _, _, p, w = _simulate_once(case_path, lengths, h_consts, scenario_path,
                                args, case_override=c)
    out = Path(args.out) / f"{args.param}-{value:g}"
    summary = _run_artifacts(w, out, args.threshold_frac)
    _write(out / "path.json", path_json(p))
    _write(out / "manifest.json",
           _manifest(args, "sweep", {"value": value}))
    return {"value": value, **summary}


def cmd_sweep(args) -> int:
    values = [float(v) for v in args.values.split(",") if v.strip()]
    if not values:
        raise CaseError("sweep needs at least one value")
    if args.param == "length" and not args.line:
        raise CaseError("--param length requires --line")

    jobs = [(args.case, args.lengths, args.h_consts, args.scenario, args, v)
            for v in values]
    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(_sweep_worker, jobs))
    else:
        results = [_sweep_worker(j) for j in jobs]

    _write(Path(args.out) / "sweep.json",
           json.dumps({"param": args.param, "line": args.line,
                       "results": results}, indent=2) + "\n")
    _write(Path(args.out) / "manifest.json", _manifest(args, "sweep"))
    print(f"{'value':>10}  {'peak |chi|':>14}  {'front velocity':>15}")
    for r in results:
        vel = r["front_velocity_mi_s"]
        vel_s = f"{vel:.4f}" if vel is not None else "n/a"
        print(f"{r['value']:>10g}  {r['peak_chi']:>14.4e}  {vel_s:>15}")
    return EXIT_OK


def _read_wavefield_csv(path: str):
    rows = [line.split(",") for line in _read(path).strip().splitlines()[1:]]
    if not rows:
        raise CaseFormatError("wavefield CSV holds no samples")
    t = np.array([float(r[0]) for r in rows])
    xi = np.array([float(r[1]) for r in rows])
    theta = np.array([float(r[2]) for r in rows])
    chi = np.array([float(r[3]) for r in rows])
    v = np.array([float(r[4]) for r in rows])
    times = np.unique(t)
    points = np.unique(xi)
    n_t, n_x = len(times), len(points)
    if n_t * n_x != len(rows):
        raise CaseFormatError("wavefield CSV is not a full t-by-xi grid")
    shape = (n_t, n_x)
    order = np.lexsort((xi, t))
    return (times, points, theta[order].reshape(shape),
            chi[order].reshape(shape), v[order].reshape(shape))


def _grid_from_samples(points: np.ndarray, markers: dict) -> ContinuumGrid:
    """Reconstruct enough grid structure for analysis from sample positions."""
    from types import MappingProxyType
    n = len(points)
    dxi = float(points[1] - points[0]) if n > 1 else 1.0
    idx = sorted(markers)
    if not idx or idx[0] != 0:
        idx = [0] + idx
    if idx[-1] != n - 1:
        idx.append(n - 1)
    segments = tuple((a, b, f"seg{k}") for k, (a, b) in
                     enumerate(zip(idx, idx[1:]), start=1))
    ones = np.ones(n)
    return ContinuumGrid(n_points=n, dxi=dxi, b=ones, g=np.zeros(n),
                         j_h=ones, nu=ones,
                         bus_markers=MappingProxyType(dict(markers) or {0: 0}),
                         segments=segments)


class _LoadedField:
    """WaveField look-alike backed by a parsed CSV."""

    def __init__(self, times, grid, theta, chi, v):
        self.times = tuple(float(x) for x in times)
        self.grid = grid
        self.snapshots = tuple(
            _Snapshot(theta[k], chi[k], v[k]) for k in range(len(times)))


class _Snapshot:
    def __init__(self, theta, chi, v):
        self.delta_theta = theta
        self.chi = chi
        self.v = v


def _load_field(args) -> _LoadedField:
    times, points, theta, chi, v = _read_wavefield_csv(args.wavefield)
    markers = {}
    if getattr(args, "grid", None):
        for line in _read(args.grid).strip().splitlines()[1:]:
            cols = line.split(",")
            if cols[-1] != "":
                markers[int(cols[0])] = int(cols[-1])
    grid = _grid_from_samples(points, markers)
    return _LoadedField(times, grid, theta, chi, v)


def cmd_analyze(args) -> int:
    w = _load_field(args)
    out = Path(args.out) if args.out else None
    curve = detect_arrival_times(w, args.threshold_frac)
    try:
        vel, r2 = estimate_velocity(curve)
    except ValueError:
        vel, r2 = None, None
    prof = amplitude_profile(w)
    segs = segment_velocities(curve, w.grid)

    print(f"{'xi miles':>10}  {'arrival s':>10}  {'peak |chi|':>12}")
    for x, t, a in zip(curve.xi, curve.arrival_t, prof):
        t_s = f"{t:.4f}" if t is not None else "-"
        print(f"{x:>10.3f}  {t_s:>10}  {a:>12.4e}")
    if vel is not None:
        print(f"front velocity {vel:.4f} mi/s (R^2 {r2:.4f})")
    else:
        print("front velocity not fittable (too few arrivals)")

    if out:
        _write(out / "arrivals.json", arrivals_json(curve))
        _write(out / "velocity.json", json.dumps({
            "front_velocity_mi_s": vel, "r2": r2,
            "segments": [{"line": lid, "velocity_mi_s": v_, "r2": r_}
                         for lid, v_, r_ in segs]}, indent=2) + "\n")
        _write(out / "amplitude.json", json.dumps({
            "xi_miles": [float(x) for x in curve.xi],
            "peak_chi": [float(a) for a in prof]}, indent=2) + "\n")
        _write(out / "manifest.json", _manifest(args, "analyze"))
        print(f"artifacts in {out}")
    return EXIT_OK


def cmd_plot(args) -> int:
    times, points, theta, chi, v = _read_wavefield_csv(args.wavefield)
    if args.kind == "surface":
        svg = svgplot.heatmap(points, times, theta, "xi (miles)", "t (s)",
                              "angle deviation (rad)")
    elif args.kind == "profile":
        if args.at is None:
            raise CaseError("profile plots need --at <t seconds>")
        if not times[0] <= args.at <= times[-1]:
            raise CaseError(f"--at {args.at} outside recorded times "
                            f"[{times[0]}, {times[-1]}]")
        k = int(np.argmin(np.abs(times - args.at)))
        svg = svgplot.line_plot(points, theta[k], "xi (miles)",
                                "delta theta (rad)",
                                f"angle profile at t={times[k]:.3f} s")
    else:
        if args.at is None:
            raise CaseError("timeseries plots need --at <xi miles>")
        if not points[0] <= args.at <= points[-1]:
            raise CaseError(f"--at {args.at} outside grid "
                            f"[{points[0]}, {points[-1]}]")
        i = int(np.argmin(np.abs(points - args.at)))
        svg = svgplot.line_plot(times, chi[:, i], "t (s)", "chi (rad/s)",
                                f"frequency deviation at xi={points[i]:.2f} mi")
    _write(Path(args.out), svg)
    print(f"wrote {args.out}")
    return EXIT_OK


# ------------------------------------------------------------------ parser

def _add_case_arg(p, required=True):
    p.add_argument("case", nargs=None if required else "?",
                   help="case file (.json native or .m)")
    p.add_argument("--lengths", help="JSON sidecar {line id: miles} for .m cases")
    p.add_argument("--h-consts", dest="h_consts",
                   help="JSON sidecar {bus id: H MJ/MVA} for .m cases")


def _add_sim_args(p):
    p.add_argument("--src", type=int, required=False)
    p.add_argument("--dst", type=int, required=False)
    p.add_argument("--model", choices=["homogeneous", "nonhomogeneous"],
                   default="nonhomogeneous")
    p.add_argument("--dxi", type=float, default=0.2, help="miles per grid step")
    p.add_argument("--courant", type=float, default=0.9)
    p.add_argument("--t-end", dest="t_end", type=float, default=5.0)
    p.add_argument("--record-stride", dest="record_stride", type=int, default=1)
    p.add_argument("--boundary-mode", dest="boundary_mode",
                   choices=["characteristic", "fictitious"],
                   default="characteristic")
    p.add_argument("--lag-tau", dest="lag_tau", type=float, default=0.0,
                   help="first-order lag for boundary trajectories (s); 0 = step")
    p.add_argument("--p-only", dest="p_only", action="store_true",
                   help="load steps scale P only, leaving Q fixed")
    p.add_argument("--threshold-frac", dest="threshold_frac", type=float,
                   default=0.05)


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="gridwave",
        description="Electromechanical wave propagation on transmission paths")
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a case file")
    _add_case_arg(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("powerflow", help="solve the AC power flow")
    _add_case_arg(p)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=25)
    p.add_argument("--out")
    p.set_defaults(func=cmd_powerflow)

    p = sub.add_parser("distribute-inertia",
                       help="spread generator inertia over lines")
    _add_case_arg(p)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-rounds", dest="max_rounds", type=int, default=100)
    p.add_argument("--out")
    p.set_defaults(func=cmd_distribute_inertia)

    p = sub.add_parser("path", help="fastest wave route between two buses")
    _add_case_arg(p)
    p.add_argument("--src", type=int, required=True)
    p.add_argument("--dst", type=int, required=True)
    p.add_argument("--out", help="write path JSON here")
    p.set_defaults(func=cmd_path)

    p = sub.add_parser("simulate", help="integrate a disturbance scenario")
    _add_case_arg(p, required=False)
    p.add_argument("scenario", nargs="?", help="scenario JSON file")
    _add_sim_args(p)
    p.add_argument("--out", default="run")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="repeat a scenario over parameter values")
    _add_case_arg(p, required=False)
    p.add_argument("scenario", nargs="?", help="scenario JSON file")
    _add_sim_args(p)
    p.add_argument("--param", choices=["h", "length"], required=True)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--line", help="line id for --param length")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="sweep")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("analyze", help="arrivals/velocity/amplitude from a run")
    p.add_argument("wavefield", help="wavefield.csv from a simulate run")
    p.add_argument("--grid", help="grid.csv for per-segment estimates")
    p.add_argument("--threshold-frac", dest="threshold_frac", type=float,
                   default=0.05)
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("plot", help="render a wavefield view to SVG")
    p.add_argument("wavefield", help="wavefield.csv from a simulate run")
    p.add_argument("--kind", choices=["surface", "profile", "timeseries"],
                   required=True)
    p.add_argument("--at", type=float,
                   help="slice location: t for profile, xi for timeseries")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)

    return top


def _apply_config(parser, argv):
    """Two-pass parse: config file values become defaults, flags win."""
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    known, _rest = probe.parse_known_args(argv)
    if not known.config:
        return parser.parse_args(argv)

    cfg = json.loads(_read(known.config))
    if not isinstance(cfg, dict):
        raise CaseFormatError("config file must hold a JSON object")
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()
           if k not in _META_KEYS}

    argv = [a for a in argv if a != "--config" and a != known.config]
    # need the subcommand to know which flags are legal
    pre = parser.parse_known_args(argv)[0]
    sub_parser = None
    for action in parser._subparsers._group_actions:
        sub_parser = action.choices.get(pre.command)
    if sub_parser is None:
        raise CaseFormatError("config requires a subcommand")
    legal = {a.dest for a in sub_parser._actions}
    unknown = set(cfg) - legal
    if unknown:
        raise SchemaError(", ".join(sorted(unknown)),
                          "unknown config keys for this command")
    sub_parser.set_defaults(**cfg)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = _apply_config(parser, list(sys.argv[1:] if argv is None else argv))
        missing = [name for name in ("case", "scenario")
                   if hasattr(args, name) and getattr(args, name) is None]
        if missing:
            parser.error(f"missing required input(s): {', '.join(missing)}")
        for name in ("src", "dst"):
            if hasattr(args, name) and getattr(args, name) is None and \
                    args.command in ("simulate", "sweep"):
                parser.error(f"--{name} is required")
        return args.func(args)
    except (CaseFormatError, SchemaError, json.JSONDecodeError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, SingularJacobianError, InstabilityError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (CaseError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())

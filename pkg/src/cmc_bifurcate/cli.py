"""Command-line interface.

Subcommands: spectrum, stability, critical, bifurcate, trace, sweep.
Global flags: --config <path>, --out <dir>, --format csv|json, --threads N
(CMC_BIFURCATE_THREADS is the environment fallback for --threads).

Exit codes: 0 success, 2 configuration error, 3 solver convergence failure,
4 no bifurcation / no critical length, 5 continuation stalled.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import bifurcation as bif
from . import oracle, spectrum
from .errors import (ContinuationStalled, ConvergenceFailure, DegenerateKernel,
                     DegenerateMetric, GraphDegenerate, InvalidConfig,
                     NewtonDiverged, NoBifurcation, NoCriticalLength,
                     PoleInBracket)
from .geometry import (CylinderConfig, Scenario, TMode, mesh_to_obj,
                       normal_graph, ScalarField)
from .outputs import DiagramTable, fmt, json_dumps, svg_xy_plot
from .runconfig import (NUMERICS_DEFAULTS, build_cylinder, load_runconfig,
                        parse_number)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cmc-bifurcate",
        description="Stability and bifurcation toolkit for supported "
                    "cylindrical interfaces")
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--out", help="output directory (default from config or '.')")
    p.add_argument("--format", choices=["csv", "json"],
                   help="table format (default csv)")
    p.add_argument("--threads", type=int,
                   help="sweep worker threads (env CMC_BIFURCATE_THREADS)")
    p.add_argument("--scenario", choices=["planar-strip", "right-wedge"])
    p.add_argument("--r", help="cylinder radius")
    p.add_argument("--gamma", help="contact angle, radians (accepts e.g. 3pi/4)")
    p.add_argument("--beta", help="wedge arc extent, radians")
    p.add_argument("--convexity", choices=["convex", "concave"])

    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("spectrum", help="closed-form vs oracle eigenvalue table")
    ps.add_argument("--h", help="truncation length (Dirichlet ends)")
    ps.add_argument("--period", help="axial period (periodic problem)")
    ps.add_argument("--m", type=int)
    ps.add_argument("--oracle-ns", type=int, dest="oracle_ns")

    pt = sub.add_parser("stability", help="stability verdict at a given length")
    pt.add_argument("--h", required=False)

    sub.add_parser("critical", help="critical length and bifurcation period")

    pb = sub.add_parser("bifurcate", help="locate the bifurcation point")
    pb.add_argument("--nt", type=int)
    pb.add_argument("--ns", type=int)

    pc = sub.add_parser("trace", help="switch onto the bulge branch and continue")
    pc.add_argument("--steps", type=int)
    pc.add_argument("--ds", help="arclength step")
    pc.add_argument("--epsilon0", help="switch amplitude")
    pc.add_argument("--nt", type=int)
    pc.add_argument("--ns", type=int)
    pc.add_argument("--export-meshes", action="store_true", dest="export_meshes")

    pw = sub.add_parser("sweep", help="run stability/critical over a parameter axis")
    pw.add_argument("--run", choices=["stability", "critical"])
    pw.add_argument("--axis", choices=["r", "gamma", "beta"])
    pw.add_argument("--values", help="comma-separated values (expressions allowed)")
    pw.add_argument("--h", help="length for stability sweeps")
    return p


def _context(args) -> dict:
    doc = {"scenario": None, "numerics": dict(NUMERICS_DEFAULTS),
           "numerics_explicit": [], "task": {}, "output": {}}
    if args.config:
        doc = load_runconfig(args.config)
    scenario = dict(doc["scenario"] or {})
    if args.scenario:
        scenario["kind"] = args.scenario
    for key in ("r", "gamma", "beta"):
        val = getattr(args, key)
        if val is not None:
            scenario[key] = val
    if args.convexity:
        scenario["convexity"] = args.convexity
    if not scenario:
        raise InvalidConfig("no scenario given (use --config or --scenario/--gamma)")
    config = build_cylinder(scenario)

    threads = args.threads
    if threads is None:
        env = os.environ.get("CMC_BIFURCATE_THREADS")
        threads = int(env) if env else 1
    if threads < 1:
        raise InvalidConfig("--threads must be >= 1")

    outdir = Path(args.out or doc["output"].get("dir") or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    return {"config": config, "numerics": doc["numerics"],
            "numerics_explicit": doc["numerics_explicit"], "task": doc["task"],
            "outdir": outdir, "threads": threads,
            "format": args.format or doc["output"].get("format") or "csv"}


def _grid_sizes(args, ctx) -> tuple[int, int | None]:
    """nt always resolves; ns stays None (scenario-dependent default) unless
    set explicitly on the command line or in the config."""
    nt = args.nt or ctx["numerics"]["nt"]
    ns = args.ns
    if ns is None and "ns" in ctx["numerics_explicit"]:
        ns = ctx["numerics"]["ns"]
    return nt, ns


def _task_value(args, ctx, name, default=None, numeric=True):
    val = getattr(args, name, None)
    if val is None:
        val = ctx["task"].get(name, default)
    if val is None:
        return None
    return parse_number(val) if numeric else val


def _write_table(table: DiagramTable, ctx, stem: str) -> Path:
    ext = ctx["format"]
    path = ctx["outdir"] / f"{stem}.{ext}"
    text = table.to_csv() if ext == "csv" else table.to_json()
    path.write_text(text)
    print(f"wrote {path}")
    return path


def _write_json(obj, ctx, stem: str) -> Path:
    path = ctx["outdir"] / f"{stem}.json"
    path.write_text(json_dumps(obj) + "\n")
    print(f"wrote {path}")
    return path


def _verdict_json(v: spectrum.StabilityVerdict) -> dict:
    out = {"classification": v.classification.value, "lambda_min": v.lambda_min}
    if v.witness is not None:
        w = v.witness
        out["witness"] = {"k": w.k, "n": w.n, "lambda": w.lam, "c": w.c,
                          "branch": w.branch.value}
    return out


# ---------------------------------------------------------------------------
# Subcommands

def cmd_spectrum(args, ctx) -> int:
    config = ctx["config"]
    h = _task_value(args, ctx, "h")
    period = _task_value(args, ctx, "period")
    if (h is None) == (period is None):
        raise InvalidConfig("spectrum needs exactly one of --h or --period")
    t_mode = TMode.DIRICHLET_ENDS if h is not None else TMode.PERIODIC
    extent = h if h is not None else period
    m = args.m if args.m is not None else int(ctx["task"].get("m", 5))
    ns = args.oracle_ns or ctx["numerics"]["oracle_ns"]

    closed = spectrum.spectrum_entries(config, extent, t_mode, m)
    by_mode = {(e.k, e.n): e for e in
               oracle.modal_jacobi_spectrum(config, extent, t_mode, m + 3, ns)}
    table = DiagramTable(["k", "n", "lambda_closed", "lambda_oracle", "rel_err"])
    for e in closed:
        o = by_mode.get((e.k, e.n))
        lam_o = o.lam if o else math.nan
        denom = max(abs(e.lam), abs(lam_o), 1e-300)
        table.add(e.k, e.n, e.lam, lam_o, abs(e.lam - lam_o) / denom)
    _write_table(table, ctx, "spectrum")
    print(f"smallest eigenvalue {fmt(closed[0].lam)} at (k, n) = "
          f"({closed[0].k}, {closed[0].n})")
    return 0


def cmd_stability(args, ctx) -> int:
    h = _task_value(args, ctx, "h")
    if h is None:
        raise InvalidConfig("stability needs --h")
    verdict = spectrum.stability(ctx["config"], h)
    print(verdict.classification.value)
    _write_json(_verdict_json(verdict), ctx, "stability")
    return 0


def cmd_critical(args, ctx) -> int:
    config = ctx["config"]
    report: dict = {}
    if config.scenario is Scenario.PLANAR_STRIP:
        h0 = spectrum.planar_critical_length(config.r, config.gamma)
        report["h0"] = h0
        report["T"] = spectrum.planar_bifurcation_period(config.r, config.gamma)
        report["case"] = "planar-pinned"
    else:
        T, case = spectrum.wedge_bifurcation_period(config)
        report["T"] = T
        report["case"] = case.value
        mu = spectrum.wedge_mode_constants(config, 1)[0][0]
        if mu < 1.0:
            report["h0"] = T / 2.0
    print(f"period {fmt(report['T'])}" + (f", critical length {fmt(report['h0'])}"
                                          if "h0" in report else ""))
    _write_json(report, ctx, "critical")
    return 0


def cmd_bifurcate(args, ctx) -> int:
    config = ctx["config"]
    nt, ns = _grid_sizes(args, ctx)
    point = bif.locate_bifurcation(config, nt=nt, ns=ns)
    report = {"H0": point.H0, "T": point.T, "kernel_dim": point.kernel_dim,
              "transversality": point.transversality,
              "kernel_eigenvalue": point.kernel_eigenvalue,
              "case": point.case.value if point.case else "planar-pinned"}
    _write_json(report, ctx, "bifurcation")

    grid = point.kernel.grid
    table = DiagramTable(["t_index", "s_index", "t", "s", "value"])
    tvals, svals = grid.t, grid.s
    for i in range(grid.nt):
        for j in range(grid.ns):
            table.add(i, j, float(tvals[i]), float(svals[j]),
                      float(point.kernel.values[i, j]))
    _write_table(table, ctx, "kernel")

    amp = 0.15 * config.r / float(np.max(np.abs(point.kernel.values)))
    viz = ScalarField(grid, amp * point.kernel.values)
    obj_path = ctx["outdir"] / "kernel.obj"
    obj_path.write_text(mesh_to_obj(normal_graph(config, grid, viz)))
    print(f"wrote {obj_path}")
    print(f"period {fmt(point.T)}, transversality {fmt(point.transversality)}")
    return 0


def cmd_trace(args, ctx) -> int:
    config = ctx["config"]
    nt, ns = _grid_sizes(args, ctx)
    steps = args.steps if args.steps is not None else int(ctx["task"].get("steps", 20))
    ds = _task_value(args, ctx, "ds", default=5e-3)
    eps0 = _task_value(args, ctx, "epsilon0", default=0.01 * config.r)

    point = bif.locate_bifurcation(config, nt=nt, ns=ns)
    trivial = bif.branch_switch(point, 0.0)
    start = bif.branch_switch(point, eps0)
    states = bif.continue_branch(start, steps, ds)

    planar = config.scenario is Scenario.PLANAR_STRIP
    table = DiagramTable(["step", "arclength", "epsilon", "H", "residual_norm",
                          "symmetry_defect"])
    for idx, st in enumerate([start] + states):
        defect = bif.check_alexandrov_symmetry(st) if planar else math.nan
        table.add(idx, st.arclength, st.epsilon, st.H, st.residual_norm, defect)
    _write_table(table, ctx, "branch")

    eps = np.array([st.epsilon for st in [start] + states])
    hs = np.array([st.H for st in [start] + states])
    coef = float(np.linalg.lstsq(
        np.stack([eps * eps, np.ones_like(eps)], axis=1),
        hs - trivial.H, rcond=None)[0][0])
    _write_json({"H0_discrete": trivial.H, "quadratic_coefficient": coef,
                 "bifurcation_direction":
                     "increasing-H" if coef > 0 else "decreasing-H"},
                ctx, "trace")

    svg = svg_xy_plot(list(hs), list(eps), "H", "epsilon", ref_y=0.0)
    svg_path = ctx["outdir"] / "branch.svg"
    svg_path.write_text(svg)
    print(f"wrote {svg_path}")

    if args.export_meshes:
        for idx, st in enumerate([start] + states):
            path = ctx["outdir"] / f"state_{idx:03d}.obj"
            path.write_text(mesh_to_obj(bif.state_mesh(st)))
        print(f"wrote {steps + 1} state meshes")
    print(f"traced {len(states)} steps, final epsilon {fmt(states[-1].epsilon)}"
          if states else "traced 0 steps")
    return 0


def _sweep_one(config: CylinderConfig, run: str, h: float | None):
    if run == "stability":
        v = spectrum.stability(config, h)
        return [v.classification.value, v.lambda_min]
    try:
        if config.scenario is Scenario.PLANAR_STRIP:
            h0 = spectrum.planar_critical_length(config.r, config.gamma)
            return ["ok", h0, 2.0 * h0]
        T, _case = spectrum.wedge_bifurcation_period(config)
        return ["ok", T / 2.0, T]
    except (NoCriticalLength, NoBifurcation):
        return ["no-critical-length", math.nan, math.nan]


def cmd_sweep(args, ctx) -> int:
    config = ctx["config"]
    run = args.run or ctx["task"].get("run")
    axis = args.axis or ctx["task"].get("axis")
    if run not in ("stability", "critical"):
        raise InvalidConfig("sweep needs --run stability|critical")
    if axis not in ("r", "gamma", "beta"):
        raise InvalidConfig("sweep needs --axis r|gamma|beta")
    if args.values is not None:
        raw = [v for v in args.values.split(",") if v.strip()]
    else:
        raw = ctx["task"].get("values", [])
    values = [parse_number(v) for v in raw]
    h = _task_value(args, ctx, "h")
    if run == "stability" and h is None:
        raise InvalidConfig("stability sweep needs --h")

    configs = [replace(config, **{axis: v}) for v in values]
    if ctx["threads"] > 1 and configs:
        with ThreadPoolExecutor(max_workers=ctx["threads"]) as pool:
            results = list(pool.map(lambda c: _sweep_one(c, run, h), configs))
    else:
        results = [_sweep_one(c, run, h) for c in configs]

    if run == "stability":
        table = DiagramTable([axis, "classification", "lambda_min"])
    else:
        table = DiagramTable([axis, "status", "h0", "T"])
    for v, res in zip(values, results):
        table.add(v, *res)
    _write_table(table, ctx, "sweep")
    return 0


# ---------------------------------------------------------------------------

_COMMANDS = {"spectrum": cmd_spectrum, "stability": cmd_stability,
             "critical": cmd_critical, "bifurcate": cmd_bifurcate,
             "trace": cmd_trace, "sweep": cmd_sweep}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        ctx = _context(args)
        return _COMMANDS[args.command](args, ctx)
    except InvalidConfig as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceFailure, NewtonDiverged, DegenerateKernel,
            GraphDegenerate, DegenerateMetric, PoleInBracket) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    except (NoBifurcation, NoCriticalLength) as exc:
        print(f"no bifurcation: {exc}", file=sys.stderr)
        return 4
    except ContinuationStalled as exc:
        print(f"continuation stalled: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())

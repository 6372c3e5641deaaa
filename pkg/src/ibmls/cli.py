"""Command-line entry point: run orchestration and CSV artifact writing.

Subcommands:
  ibmls run <config>          end-to-end case run with artifacts
  ibmls weights <config>      per-marker kernel/weight diagnostic dump
  ibmls convergence <config>  multi-grid Taylor-Green convergence study
"""

import argparse
import os
import sys

import numpy as np

from . import cases, coupling, geometry
from .config import load_config
from .errors import ConfigurationError, IBMLSError, NearSingularGram, SolverError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4

TIMESERIES_COLUMNS = ("t", "Fx", "Fy", "CD", "CL", "interior_rms")
NORMS_COLUMNS = ("h", "L1_u", "L2_u", "Linf_u", "L1_p", "L2_p", "Linf_p")


def _apply_thread_cap():
    raw = os.environ.get("IBMLS_THREADS", "").strip()
    if not raw:
        return
    n = int(raw)
    if n > 0:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ.setdefault(var, str(n))


def _fmt(v):
    return repr(float(v))


def _require_finite(label, arr):
    arr = np.asarray(arr, dtype=float)
    bad = ~np.isfinite(arr)
    if bad.any():
        idx = np.unravel_index(np.argmax(bad), arr.shape)
        raise IBMLSError(
            f"non-finite value in {label} at cell {tuple(int(i) for i in idx)}"
        )


def write_field_csv(path, grid, state, H):
    """Cell-by-cell dump: x, y, u, v, p, H."""
    _require_finite("u", state.u)
    _require_finite("p", state.p)
    pts = grid.center_points()
    with open(path, "w") as fh:
        fh.write("x,y,u,v,p,H\n")
        for idx in np.ndindex(*grid.dims):
            fh.write(",".join([
                _fmt(pts[idx + (0,)]), _fmt(pts[idx + (1,)]),
                _fmt(state.u[idx + (0,)]), _fmt(state.u[idx + (1,)]),
                _fmt(state.p[idx]), _fmt(H[idx]),
            ]) + "\n")


def write_timeseries(path, rows):
    with open(path, "w") as fh:
        fh.write(",".join(TIMESERIES_COLUMNS) + "\n")
        for row in rows:
            vals = [row.get(c, 0.0) for c in TIMESERIES_COLUMNS]
            for c, v in zip(TIMESERIES_COLUMNS, vals):
                if not np.isfinite(v):
                    raise IBMLSError(
                        f"non-finite value in time series column {c!r} "
                        f"at t={row.get('t')}"
                    )
            fh.write(",".join(_fmt(v) for v in vals) + "\n")


def write_norms(path, rows):
    with open(path, "w") as fh:
        fh.write(",".join(NORMS_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[c]) for c in NORMS_COLUMNS) + "\n")


def write_report(path, lines):
    with open(path, "w") as fh:
        for line in lines:
            fh.write(line + "\n")


def _norm_row(res):
    return {
        "h": res["h"],
        "L1_u": res["u"]["L1"], "L2_u": res["u"]["L2"],
        "Linf_u": res["u"]["Linf"],
        "L1_p": res["p"]["L1"], "L2_p": res["p"]["L2"],
        "Linf_p": res["p"]["Linf"],
    }


def _case_re(cfg, default):
    re = cfg.get("fluid.re")
    if re is not None:
        return re
    mu = cfg.get("fluid.mu")
    if mu:
        return cfg.get("fluid.rho", 1.0) / mu
    return default


def _coupling_kw(cfg):
    return {
        "kernel": cfg.kernel_kind(),
        "interp": cfg["coupling.interp"],
        "spread": cfg["coupling.spread"],
        "gram_fallback": cfg["coupling.gram_fallback"],
    }


def run_from_config(cfg, out_dir):
    case = cfg.case
    ckw = _coupling_kw(cfg)
    ts_rows = []
    if case == "taylor_green_cylinder":
        n = int(cfg.get("grid.dims", (64,))[0])
        res = cases.run_taylor_green(
            n, re=_case_re(cfg, 100.0), cfl=cfg["time.cfl"],
            t_end=cfg.get("time.t_end", 1.0),
            radius=cfg["body.radius"], center=cfg["body.center"],
            orientation=cfg["body.orientation"], **ckw,
        )
        state, grid = res["state"], res["grid"]
        iface = geometry.Interface(
            geometry.Circle(np.asarray(cfg["body.center"], float),
                            cfg["body.radius"]),
            geometry.Orientation.EXTERIOR_ACTIVE,
        )
        H = geometry.heaviside_field(iface, grid)
        write_norms(os.path.join(out_dir, "norms.csv"), [_norm_row(res)])
        report = [
            f"case = {case}",
            f"h = {_fmt(res['h'])}",
            f"L2_u = {_fmt(res['u']['L2'])}",
            f"L2_p = {_fmt(res['p']['L2'])}",
        ]
    elif case == "stokes_first":
        n = int(cfg.get("grid.dims", (400,))[0])
        re = _case_re(cfg, 500.0)
        res = cases.run_stokes(
            n, re=re, t_end=cfg.get("time.t_end", 5.0), cfl=cfg["time.cfl"],
            **ckw,
        )
        state, grid = res["state"], res["grid"]
        H = np.ones(grid.dims)
        for row in res["timeseries"]:
            cd = row.get("plate_side_+1", 0.0)
            ts_rows.append({"t": row["t"], "CD": cd, "interior_rms": 0.0})
        report = [
            f"case = {case}",
            f"profile_linf = {_fmt(res['profile_linf'])}",
        ]
    elif case == "impulsive_cylinder":
        dims = cfg.get("grid.dims")
        h = 5.0 / dims[0] if dims else 0.02
        res = cases.run_impulsive_cylinder(
            h=h, re=_case_re(cfg, 100.0), t_end=cfg.get("time.t_end", 10.0),
            cfl=cfg["time.cfl"], **ckw,
        )
        state, grid, H = res["state"], res["grid"], res["H"]
        for row in res["timeseries"]:
            row = dict(row)
            row["interior_rms"] = 0.0
            ts_rows.append(row)
        if ts_rows:
            ts_rows[-1]["interior_rms"] = res["interior_rms"]
        report = [
            f"case = {case}",
            f"interior_rms = {_fmt(res['interior_rms'])}",
            f"final_CD = {_fmt(ts_rows[-1]['CD']) if ts_rows else 'n/a'}",
        ]
    elif case == "oscillating_cylinder":
        dims = cfg.get("grid.dims")
        h = 4.8 / dims[0] if dims else 0.02
        period = 5.0
        t_end = cfg.get("time.t_end", 3.0 * period)
        res = cases.run_oscillating_cylinder(
            h=h, re=_case_re(cfg, 100.0), n_periods=t_end / period,
            cfl=cfg["time.cfl"], **ckw,
        )
        state, grid = res["state"], res["grid"]
        H = np.ones(grid.dims)
        for row in res["timeseries"]:
            row = dict(row)
            row["interior_rms"] = 0.0
            ts_rows.append(row)
        report = [f"case = {case}", f"period = {_fmt(res['period'])}"]
    elif case == "impulsive_plate":
        dims = cfg.get("grid.dims")
        h = 5.0 / dims[0] if dims else 0.05
        res = cases.run_impulsive_plate(
            h=h, re=_case_re(cfg, 100.0), t_end=cfg.get("time.t_end", 2.0),
            cfl=cfg["time.cfl"], **ckw,
        )
        state, grid = res["state"], res["grid"]
        H = np.ones(grid.dims)
        report = [
            f"case = {case}",
            f"wake_bubble_length = {_fmt(res['final_bubble'])}",
        ]
    else:
        raise ConfigurationError(f"unknown case {case!r}")
    write_field_csv(
        os.path.join(out_dir, f"fields_{state.step:06d}.csv"), grid, state, H
    )
    write_timeseries(os.path.join(out_dir, "timeseries.csv"), ts_rows)
    write_report(os.path.join(out_dir, "report.txt"), report)
    return EXIT_OK


def convergence_from_config(cfg, out_dir):
    if cfg.case != "taylor_green_cylinder":
        raise ConfigurationError(
            "convergence studies are defined for case = taylor_green_cylinder"
        )
    ckw = _coupling_kw(cfg)
    ns = [int(n) for n in cfg["convergence.grids"]]
    study = cases.taylor_green_convergence(
        ns=tuple(ns), re=_case_re(cfg, 100.0), cfl=cfg["time.cfl"],
        t_end=cfg.get("time.t_end", 1.0), radius=cfg["body.radius"],
        center=cfg["body.center"], orientation=cfg["body.orientation"], **ckw,
    )
    write_norms(
        os.path.join(out_dir, "norms.csv"),
        [_norm_row(r) for r in study["results"]],
    )
    write_report(os.path.join(out_dir, "report.txt"), [
        f"grids = {', '.join(str(n) for n in ns)}",
        f"order_u = {_fmt(study['order_u'])}",
        f"order_v = {_fmt(study['order_v'])}",
        f"order_p = {_fmt(study['order_p'])}",
    ])
    return EXIT_OK


def weights_from_config(cfg, out_dir):
    """Dump per-marker stencil weights for the configured geometry."""
    n = int(cfg.get("grid.dims", (64,))[0])
    case = cfg.case
    if case in ("stokes_first", "impulsive_plate"):
        raise ConfigurationError(
            "weights dump is defined for the circle cases"
        )
    grid, _, bodies, _, H = cases.build_taylor_green(
        n, re=_case_re(cfg, 100.0), radius=cfg["body.radius"],
        center=cfg["body.center"], orientation=cfg["body.orientation"],
        **_coupling_kw(cfg),
    )
    ckw = _coupling_kw(cfg)
    standard = ckw["interp"] == "standard" and ckw["spread"] == "standard"
    table = coupling.build_coupling_table(
        bodies[0].markers, grid, ckw["kernel"],
        heaviside=None if standard else H,
        interp_mode=ckw["interp"], spread_mode=ckw["spread"],
        gram_fallback=ckw["gram_fallback"], keep_diagnostics=True,
    )
    path = os.path.join(out_dir, "weights.csv")
    with open(path, "w") as fh:
        fh.write("marker_id,i,j,k,W,H,L,psi,psi_m\n")
        for stencil, gw in table.diagnostics:
            mid = stencil.marker_id
            for row in range(len(stencil.W)):
                i, j = stencil.indices[row][:2]
                k = stencil.indices[row][2] if stencil.indices.shape[1] > 2 else 0
                if gw is None:
                    L = psi = psi_m = ""
                else:
                    L = _fmt(gw.L[row])
                    psi = _fmt(gw.psi[row])
                    sl = table.marker_slice(mid)
                    psi_m = _fmt(table.w_spread[sl][row])
                fh.write(
                    f"{mid},{i},{j},{k},{_fmt(stencil.W[row])},"
                    f"{_fmt(stencil.H[row])},{L},{psi},{psi_m}\n"
                )
    return EXIT_OK


def main(argv=None):
    _apply_thread_cap()
    parser = argparse.ArgumentParser(
        prog="ibmls",
        description="Immersed-boundary flow solver with MLS coupling kernels",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "weights", "convergence"):
        p = sub.add_parser(name)
        p.add_argument("config", help="path to a run configuration file")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        out_dir = cfg.get("output.dir", ".")
        os.makedirs(out_dir, exist_ok=True)
        if args.command == "run":
            return run_from_config(cfg, out_dir)
        if args.command == "weights":
            return weights_from_config(cfg, out_dir)
        return convergence_from_config(cfg, out_dir)
    except ConfigurationError as exc:
        print(f"ibmls: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, NearSingularGram) as exc:
        print(f"ibmls: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"ibmls: i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO
    except IBMLSError as exc:
        print(f"ibmls: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())

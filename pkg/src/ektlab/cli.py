"""Command-line front end: reproducible experiments over the surface families.

Subcommands
    helicoid   profile one family member, write CSV/JSON (optionally OBJ)
    solve      one Jenkins-Serrin sweep, write solution CSV + report JSON
    figure     regenerate a named figure (catenoid-domains, sweep-d,
               noid-domain) deterministically
    audit      run the module invariant suite, exit 1 on any failure

Exit codes: 0 success, 1 numeric failure, 2 usage or I/O error.  Every file
is written deterministically (repr floats, sorted JSON keys, no timestamps)
so identical configs give byte-identical outputs at workers=1.  A config
file of key=value lines overrides any flag of the active subcommand.
"""
from __future__ import annotations

import argparse
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence

import numpy as np

from .audit import format_table, run_audit
from .curves import assemble_domain, conjugate_vertical_boundary
from .embedding import (critical_catenoid_domain, report_json_dict,
                        self_intersections, write_domain_panels_svg,
                        write_domain_svg)
from .helicoid import (QuadratureError, c_of_mu, first_integral_residual,
                       invert_profile, minimality_residual, model_height,
                       profile_csv_lines, residual_grid, sigma, t_mu)
from .solver import (SolverError, boundary_theta_prime, distance_d,
                     distance_d_single, rho_estimate, solution_csv_lines,
                     solution_report_dict, solve_jenkins_serrin)
from .spaces import GeometryError

__all__ = ["main"]


class UsageError(Exception):
    """Bad parameters or unusable filesystem locations (exit code 2)."""


# ---------------------------------------------------------------- plumbing

def _parse_side(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a side length: {text!r}")
    return value


def _float_list(text: str) -> List[float]:
    try:
        return [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number list: {text!r}")


def _prepare_out(path: str) -> str:
    """Create the output directory (one level); missing parent is an error."""
    if os.path.isdir(path):
        return path
    if os.path.exists(path):
        raise UsageError(f"output path {path!r} exists and is not a directory")
    try:
        os.mkdir(path)
    except OSError as exc:
        raise UsageError(f"cannot create output dir {path!r}: {exc}")
    return path


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text if text.endswith("\n") else text + "\n")


def _write_json(path: str, payload: dict) -> None:
    _write_text(path, json.dumps(payload, sort_keys=True, indent=2))


def _fmt_side(v: float) -> str:
    return "inf" if math.isinf(v) else f"{v:g}"


# config files hold key=value lines with the keys named after option dests
_CONFIG_CASTS = {
    "out": str,
    "config": str,
    "mu": float,
    "mus": _float_list,
    "spacing": float,
    "span": float,
    "window": float,
    "obj": lambda s: s.strip().lower() in ("1", "true", "yes"),
    "u_max": float,
    "a": _parse_side,
    "b": float,
    "b_side": _parse_side,
    "k": int,
    "H": float,
    "M": _float_list,
    "target_h": float,
    "r_trunc": float,
    "m_sign": int,
    "a_grid": _float_list,
    "b_grid": _float_list,
    "step": float,
    "s_cap": float,
    "workers": int,
    "fault_inject": float,
    "name": str,
}


def _apply_config(args: argparse.Namespace) -> None:
    if not getattr(args, "config", None):
        return
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {args.config!r}: {exc}")
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{args.config}:{n}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not hasattr(args, key):
            raise UsageError(f"{args.config}:{n}: unknown key {key!r}")
        cast = _CONFIG_CASTS.get(key, str)
        try:
            setattr(args, key, cast(value))
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"{args.config}:{n}: {exc}")


def _check_solve_params(a: float, b: float, k: int, H: float,
                        M: Sequence[float]) -> None:
    if not 0.0 < H <= 0.5:
        raise UsageError(f"--H {H:g} out of the conjugation range (0, 1/2]")
    if math.isinf(a) and math.isinf(b):
        raise UsageError("a and b cannot both be inf")
    if (not math.isinf(a) and a <= 0) or (not math.isinf(b) and b <= 0):
        raise UsageError("side lengths must be positive")
    if k < 2:
        raise UsageError("k must be an integer >= 2")
    if len(M) == 0 or any(m <= 0 for m in M) or any(
            y <= x for x, y in zip(M, M[1:])):
        raise UsageError("M schedule must be positive and strictly increasing")


# ---------------------------------------------------------------- helicoid

def _write_obj(path: str, profile, u_max: float) -> None:
    """Height-field mesh of the ruled member over the (u, v) chart."""
    stride = max(1, (profile.v.size - 1) // 120)
    v = profile.v[::stride]
    if v[-1] != profile.v[-1]:
        v = np.append(v, profile.v[-1])
    u = np.linspace(-u_max, u_max, 61)
    lines = [f"# mu={profile.mu!r}", f"# t_mu={profile.t_mu!r}",
             f"# u_max={u_max!r}", f"# grid={u.size}x{v.size}"]
    z = model_height(u[:, None], v[None, :], profile)
    for i in range(u.size):
        for j in range(v.size):
            lines.append(f"v {float(u[i])!r} {float(v[j])!r} {float(z[i, j])!r}")
    for i in range(u.size - 1):
        for j in range(v.size - 1):
            q00 = i * v.size + j + 1
            q01 = q00 + 1
            q10 = q00 + v.size
            q11 = q10 + 1
            lines.append(f"f {q00} {q10} {q11}")
            lines.append(f"f {q00} {q11} {q01}")
    _write_text(path, "\n".join(lines))


def cmd_helicoid(args: argparse.Namespace) -> int:
    mu = args.mu
    if mu is None:
        raise UsageError("--mu is required")
    if args.spacing <= 0 or not 0 < args.span < 1 or args.window <= 0:
        raise UsageError("grid controls must be positive (span in (0,1))")
    special = None
    if mu == 0.0:
        special = "umbrella"
    elif abs(mu) == 0.5:
        special = "invariant surface"
    v = residual_grid(mu, spacing=args.spacing, fraction=args.span,
                      window=args.window)
    profile = invert_profile(mu, v)
    res_min = minimality_residual(profile)
    try:
        res_first = first_integral_residual(profile)
    except GeometryError:
        res_first = None  # f identically 0 at mu = 1/2, no slope law to check
    t = t_mu(mu)
    report = {
        "mu": mu,
        "c": c_of_mu(mu) if mu != 0.5 else None,  # pole of (1+2mu)/(1-2mu)
        "t_mu": "inf" if math.isinf(t) else t,
        "sigma": sigma(mu) if abs(mu) > 0.5 else None,
        "special": special,
        "minimality_residual": res_min,
        "first_integral_residual": res_first,
        "grid": {"spacing": args.spacing, "span": args.span,
                 "window": args.window, "samples": int(v.size)},
    }
    out = _prepare_out(args.out)
    stem = os.path.join(out, f"helicoid_mu_{mu:g}")
    _write_text(stem + ".csv", "\n".join(profile_csv_lines(profile)))
    _write_json(stem + ".json", report)
    written = [stem + ".csv", stem + ".json"]
    if args.obj:
        _write_obj(stem + ".obj", profile, args.u_max)
        written.append(stem + ".obj")
    flag = f" [{special}]" if special else ""
    print(f"mu={mu:g}{flag}  t_mu={report['t_mu']}  "
          f"minimality_residual={res_min:.3e}  wrote {', '.join(written)}")
    return 0


# ------------------------------------------------------------------- solve

def cmd_solve(args: argparse.Namespace) -> int:
    _check_solve_params(args.a, args.b_side, args.k, args.H, args.M)
    r_trunc = args.r_trunc
    if r_trunc is None and (math.isinf(args.a) or math.isinf(args.b_side)):
        r_trunc = 4.0
    sols = solve_jenkins_serrin(args.a, args.b_side, args.k, args.H,
                                list(args.M), args.target_h,
                                R_trunc=r_trunc, m_sign=args.m_sign)
    last = sols[-1]
    report = solution_report_dict(last)
    # sequence-level Richardson estimates supersede the single-M integrals
    report["d_estimate"] = distance_d(sols)
    report["rho_estimate"] = rho_estimate(sols)
    out = _prepare_out(args.out)
    stem = os.path.join(
        out, f"solution_a{_fmt_side(args.a)}_b{_fmt_side(args.b_side)}"
             f"_k{args.k}_H{args.H:g}")
    _write_text(stem + ".csv", "\n".join(solution_csv_lines(last)))
    _write_json(stem + ".json", report)
    ci = report["cauchy_indicator"]
    ci_txt = "n/a" if ci is None else f"{ci:.3e}"
    print(f"T(a={_fmt_side(args.a)}, b={_fmt_side(args.b_side)}, k={args.k}, "
          f"H={args.H:g})  nodes={last.domain.n_nodes}  "
          f"d={report['d_estimate']:.6f}  rho={report['rho_estimate']:.6f}  "
          f"cauchy={ci_txt}  wrote {stem}.csv, {stem}.json")
    return 0


# ------------------------------------------------------------------ figure

def _figure_catenoid_domains(args: argparse.Namespace, out: str) -> int:
    mus = args.mus if args.mus else [-3.0, 3.0]
    for mu in mus:
        if abs(mu) <= 0.5:
            raise UsageError(f"--mu {mu:g}: need |mu| > 1/2 for a vertex fiber")
    if args.step <= 0 or args.s_cap <= 0:
        raise UsageError("step and s-cap must be positive")
    panels = []
    verdicts = {}
    for mu in mus:
        curve, asm, rep = critical_catenoid_domain(mu, k=args.k,
                                                   step=args.step,
                                                   s_cap=args.s_cap)
        panels.append((f"mu={mu:g}", asm.pieces))
        entry = report_json_dict(rep, curve.total_turning)
        entry["crossing_points"] = [list(c[2]) for c in rep.self_intersections]
        verdicts[f"{mu:g}"] = entry
    params = {"figure": "catenoid-domains", "mus": mus, "k": args.k,
              "step": args.step, "s_cap": args.s_cap, "H": 0.5}
    svg = os.path.join(out, "catenoid_domains.svg")
    write_domain_panels_svg(svg, panels, params)
    _write_json(os.path.join(out, "catenoid_domains.json"),
                {"params": {k: v for k, v in params.items() if k != "figure"},
                 "verdicts": verdicts})
    for mu in mus:
        v = verdicts[f"{mu:g}"]
        word = "embedded" if v["embedded"] else \
            f"non-embedded ({v['crossings']} crossings, " \
            f"area2={v['multiplicity_2_area']:.6f})"
        print(f"mu={mu:g}: {word}")
    print(f"wrote {svg}")
    return 0


def _sweep_point(task):
    a, b, k, H, M, h = task
    sols = solve_jenkins_serrin(a, b, k, H, list(M), h)
    return a, b, distance_d(sols), [distance_d_single(s) for s in sols]


def _figure_sweep_d(args: argparse.Namespace, out: str) -> int:
    _check_solve_params(args.a_grid[0], args.b_grid[0], args.k, args.H, args.M)
    a_grid = sorted(args.a_grid)
    b_grid = sorted(args.b_grid)
    if any(v <= 0 or math.isinf(v) for v in a_grid + b_grid):
        raise UsageError("sweep grids must be finite positive side lengths")
    tasks = [(a, b, args.k, args.H, tuple(args.M), args.target_h)
             for a, b in itertools.product(a_grid, b_grid)]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    d = {(a, b): dv for a, b, dv, _ in results}
    per_m = {(a, b): seq for a, b, _, seq in results}
    mono_a = all(d[(a2, b)] > d[(a1, b)]
                 for b in b_grid for a1, a2 in zip(a_grid, a_grid[1:]))
    mono_b = all(d[(a, b2)] > d[(a, b1)]
                 for a in a_grid for b1, b2 in zip(b_grid, b_grid[1:]))
    header = (f"# figure=sweep-d H={args.H!r} k={args.k} "
              f"M={list(args.M)!r} target_h={args.target_h!r} "
              f"a_grid={a_grid!r} b_grid={b_grid!r}")
    rows = [header, "a,b,d"]
    for a, b in itertools.product(a_grid, b_grid):
        rows.append(f"{a!r},{b!r},{d[(a, b)]!r}")
    csv_path = os.path.join(out, "sweep_d.csv")
    _write_text(csv_path, "\n".join(rows))
    verdict = {
        "H": args.H, "k": args.k, "M": list(args.M),
        "target_h": args.target_h, "a_grid": a_grid, "b_grid": b_grid,
        "monotone_in_a": mono_a, "monotone_in_b": mono_b,
        "max_d": max(d.values()),
        "max_d_over_schedule": max(max(seq) for seq in per_m.values()),
    }
    _write_json(os.path.join(out, "sweep_d.json"), verdict)
    print(f"sweep d(a,b): monotone_in_a={mono_a} monotone_in_b={mono_b} "
          f"max_d={verdict['max_d']:.6f}  wrote {csv_path}")
    return 0


def _figure_noid_domain(args: argparse.Namespace, out: str) -> int:
    if not 0.0 < args.H < 0.5:
        raise UsageError("noid-domain needs H in (0, 1/2) (bounded domain)")
    if args.b <= 0:
        raise UsageError("--b must be positive")
    _check_solve_params(math.inf, args.b, args.k, args.H, args.M)
    r_trunc = args.r_trunc if args.r_trunc is not None else 4.0
    sols = solve_jenkins_serrin(math.inf, args.b, args.k, args.H,
                                list(args.M), args.target_h, R_trunc=r_trunc)
    last = sols[-1]
    samples = boundary_theta_prime(last, "p2")
    s_vals, tp_vals = samples[:, 0], samples[:, 1]
    s_hi = min(float(s_vals.max()), abs(float(s_vals.min())))
    if s_hi <= 0:
        raise SolverError("theta' samples do not straddle the waist s=0")

    def tp_fn(s: float) -> float:
        return float(np.interp(s, s_vals, tp_vals))

    d_est = distance_d(sols)
    r0 = math.tanh(d_est / 2.0)
    curve = conjugate_vertical_boundary(tp_fn, args.H, (0.0, s_hi),
                                        ((r0, 0.0), math.pi / 2.0),
                                        step=args.step)
    asm = assemble_domain(curve, args.k)
    rep = self_intersections(asm)
    b_star = interior_angle_threshold_b(args.k, args.H)
    params = {"figure": "noid-domain", "H": args.H, "k": args.k, "b": args.b,
              "M": list(args.M), "target_h": args.target_h,
              "R_trunc": r_trunc, "step": args.step,
              "gauge": "waist on +x axis at distance d_estimate"}
    svg = os.path.join(out, "noid_domain.svg")
    write_domain_svg(svg, asm.pieces, params)
    payload = report_json_dict(rep, curve.total_turning)
    payload.update({"b": args.b, "b_star": b_star,
                    "threshold_predicts_embedded": args.b >= b_star,
                    "d_estimate": d_est,
                    "resolved_s_range": [0.0, s_hi]})
    _write_json(os.path.join(out, "noid_domain.json"),
                {"params": {k: v for k, v in params.items() if k != "figure"},
                 "verdict": payload})
    word = "embedded" if rep.embedded else f"non-embedded ({rep.crossings} crossings)"
    print(f"(H={args.H:g}, k={args.k})-noid piece at b={args.b:g}: {word}; "
          f"threshold b*={b_star:.6f} predicts "
          f"{'embedded' if args.b >= b_star else 'non-embedded'}  wrote {svg}")
    return 0


def interior_angle_threshold_b(k: int, H: float) -> float:
    """The b value where the p2 interior angle reaches pi/2."""
    if not 0.0 <= H < 0.5:
        raise UsageError("threshold needs H in [0, 1/2)")
    delta = math.sqrt(1.0 - 4.0 * H * H)
    return math.acosh(1.0 / math.sin(math.pi / k)) / delta


def cmd_figure(args: argparse.Namespace) -> int:
    out = _prepare_out(args.out)
    if args.name == "catenoid-domains":
        return _figure_catenoid_domains(args, out)
    if args.name == "sweep-d":
        return _figure_sweep_d(args, out)
    if args.name == "noid-domain":
        return _figure_noid_domain(args, out)
    raise UsageError(f"unknown figure {args.name!r}")


# ------------------------------------------------------------------- audit

def cmd_audit(args: argparse.Namespace) -> int:
    out = _prepare_out(args.out)
    rows = run_audit(fault_eps=args.fault_inject)
    table = format_table(rows)
    print(table)
    _write_text(os.path.join(out, "audit.txt"), table)
    return 1 if any(not r.passed for r in rows) else 0


# ------------------------------------------------------------------ parser

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ektlab",
        description="numerical experiments on helicoids, Jenkins-Serrin "
                    "graphs and conjugate disk domains")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default="out", help="output directory "
                       "(created if missing, parent must exist)")
        p.add_argument("--config", default=None,
                       help="key=value file overriding flags")

    p = sub.add_parser("helicoid", help="profile one helicoid family member")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--spacing", type=float, default=1e-3)
    p.add_argument("--span", type=float, default=0.9,
                   help="fraction of t_mu covered when t_mu is finite")
    p.add_argument("--window", type=float, default=2.0,
                   help="|v| bound when the profile is entire")
    p.add_argument("--obj", action="store_true",
                   help="also write an OBJ mesh of the ruled graph")
    p.add_argument("--u-max", dest="u_max", type=float, default=2.0)
    common(p)
    p.set_defaults(func=cmd_helicoid)

    p = sub.add_parser("solve", help="Jenkins-Serrin truncation sweep")
    p.add_argument("--a", type=_parse_side, required=True,
                   help="side length, or 'inf'")
    p.add_argument("--b", dest="b_side", type=_parse_side, required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--H", type=float, required=True)
    p.add_argument("--M", type=float, action="append", default=None,
                   help="truncation schedule entry (repeatable)")
    p.add_argument("--target-h", dest="target_h", type=float, default=0.05)
    p.add_argument("--r-trunc", dest="r_trunc", type=float, default=None)
    p.add_argument("--m-sign", dest="m_sign", type=int, choices=(1, -1),
                   default=1)
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("figure", help="regenerate a named figure")
    p.add_argument("name", choices=("catenoid-domains", "sweep-d",
                                    "noid-domain"))
    p.add_argument("--mu", dest="mus", type=float, action="append",
                   default=None, help="catenoid-domains panel (repeatable)")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--H", type=float, default=0.5)
    p.add_argument("--b", type=float, default=2.0)
    p.add_argument("--M", type=float, action="append", default=None)
    p.add_argument("--a-grid", dest="a_grid", type=_float_list,
                   default=[0.5, 1.0, 2.0])
    p.add_argument("--b-grid", dest="b_grid", type=_float_list,
                   default=[0.5, 1.0, 2.0])
    p.add_argument("--target-h", dest="target_h", type=float, default=0.02)
    p.add_argument("--r-trunc", dest="r_trunc", type=float, default=None)
    p.add_argument("--step", type=float, default=5e-4)
    p.add_argument("--s-cap", dest="s_cap", type=float, default=60.0)
    p.add_argument("--workers", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("audit", help="run the invariant suite")
    p.add_argument("--fault-inject", dest="fault_inject", type=float,
                   default=0.0, help="integrand perturbation for the "
                   "negative-control mode")
    common(p)
    p.set_defaults(func=cmd_audit)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "M", None) is None and hasattr(args, "M"):
        args.M = [2.0, 4.0, 8.0, 16.0]
    try:
        _apply_config(args)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except (GeometryError, SolverError, QuadratureError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

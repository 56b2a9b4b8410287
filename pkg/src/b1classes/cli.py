"""Command-line front end.

Subcommands: ``verify-conditions``, ``lambda``, ``iterate``, ``solve`` and
``report-merge``.  Exit codes: 0 when every check holds (or is
inconclusive), 1 on a violation, 2 on a usage or configuration error,
3 when a solver does not converge.

A config argument may be a path or the name of a shipped config
(``b1classes list-configs`` prints them).
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from importlib import resources
from typing import List, Optional

import numpy as np

from . import __version__
from .conditions import (Verdict, check_g1_elliptic, check_g2_continuity, check_g3_lower,
                         check_lambda_elliptic, check_lambda_parabolic_degenerate,
                         check_lambda_parabolic_singular, check_psi_regime, check_young,
                         classify_example)
from .config import RunConfig
from .errors import B1Error, DomainError, NonConvergenceError, UsageError
from .io_util import atomic_write_text, dumps
from .iteration import (degiorgi_lemma, elliptic_oscillation_trace, elliptic_thresholds,
                        parabolic_degenerate_thresholds, parabolic_degenerate_trace,
                        parabolic_singular_thresholds, parabolic_singular_trace, product_bound_holds,
                        ratio_monotone)
from .logradius import LogRadius
from .report import (EXIT_NONCONVERGENCE, EXIT_USAGE, exit_status, load_report, make_report,
                     merge_reports, output_dir, write_report)

log = logging.getLogger("b1classes")

TRACE_KINDS = ("degiorgi", "elliptic", "degenerate", "singular")


# --------------------------------------------------------------------------
# config resolution and output

def shipped_configs() -> List[str]:
    root = resources.files("b1classes") / "configs"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def load_config(arg: str) -> RunConfig:
    if os.path.exists(arg):
        return RunConfig.from_file(arg)
    name = arg[:-4] if arg.endswith(".cfg") else os.path.basename(arg)
    res = resources.files("b1classes") / "configs" / f"{name}.cfg"
    if res.is_file():
        return RunConfig.from_text(res.read_text(encoding="utf-8"), source=f"{name}.cfg")
    raise UsageError(f"config {arg!r} not found (and not a shipped config)")


def _stem(cfg: RunConfig) -> str:
    s = cfg.get("output", "stem")
    if s:
        return s
    src = cfg.source or "run"
    return os.path.splitext(os.path.basename(src))[0]


class Output:
    """Resolves output paths and records written files."""

    def __init__(self, cfg: RunConfig, command: str):
        self.dir = output_dir(cfg.get("output", "directory"))
        self.stem = _stem(cfg)
        self.command = command
        self.formats = tuple(cfg.get("output", "formats", ("json", "csv")))
        self.files: List[str] = []

    def path(self, suffix: str) -> str:
        return os.path.join(self.dir, f"{self.stem}-{suffix}")

    def text(self, suffix: str, text: str) -> Optional[str]:
        if suffix.endswith(".csv") and "csv" not in self.formats:
            return None
        p = self.path(suffix)
        atomic_write_text(p, text)
        self.files.append(p)
        return p

    def report(self, report: dict) -> dict:
        report["files"] = list(self.files)
        if "json" in self.formats:
            p = self.path(f"{self.command}.json")
            write_report(report, p)
            report["files"].append(p)
        return report


# --------------------------------------------------------------------------
# verify-conditions

def cmd_verify_conditions(args) -> dict:
    cfg = load_config(args.config)
    if args.family:
        cfg.set("growth", "family", args.family)
    spec = cfg.growth_spec()
    lam = cfg.lambda_spec()
    plan = cfg.sample_plan(args.seed)
    results = []
    results.append(check_g1_elliptic(spec, plan, q_param=cfg.get("growth", "q_param")))
    results.append(check_g3_lower(spec, plan, p_param=cfg.get("growth", "p_param")))
    try:
        results.append(check_g2_continuity(spec, lam, plan=plan))
    except UsageError as exc:
        results.append({"type": "condition", "condition": "g2", "verdict": "inconclusive",
                        "details": {"reason": str(exc)}})
    cls = classify_example(spec, lam)
    results.append(cls)
    regime = args.regime
    if regime == "auto":
        regime = cls.regime if cls.regime != "inconclusive" else None
        spec_r = cls.apply(spec)
    elif regime == "none":
        regime, spec_r = None, spec
    else:
        spec_r = spec
    if regime is not None:
        results.append(check_psi_regime(spec_r, regime, plan=plan))
    results.append(check_young(spec, plan, p_param=cfg.get("growth", "p_param")))
    out = Output(cfg, "verify-conditions")
    echo = cfg.echo()
    echo.setdefault("sampling", {})["seed"] = str(plan.seed)
    return out.report(make_report("verify-conditions", echo, results))


# --------------------------------------------------------------------------
# lambda

def _default_top(lam, what, allow_log=False):
    rmax = lam.r_max
    if isinstance(rmax, float) and math.isinf(rmax):
        return 0.5
    top = rmax.to_float()
    if top > 1e-300:
        return min(0.5, 0.5 * top)
    if allow_log:
        rho = LogRadius(4, 30.0)
        if rho < rmax:
            return rho
        return LogRadius(rmax.depth, rmax.value + 1.0)
    raise UsageError(f"set lambda.{what}: the {lam.family.value} modulus lives below the double range")


def cmd_lambda(args) -> dict:
    cfg = load_config(args.config)
    lam = cfg.lambda_spec()
    sec = cfg.section("lambda")
    c, beta = sec.get("c", 1.0), sec.get("beta", 1.0)
    case = args.case or "elliptic"
    r_min = args.rmin if args.rmin is not None else sec.get("r_min", 1e-12)
    if case == "elliptic":
        rho0 = sec.get("rho0") or _default_top(lam, "rho0")
        rep = check_lambda_elliptic(lam, c, beta, rho0, r_min)
    elif case == "degenerate":
        R = sec.get("R") or _default_top(lam, "R")
        rep = check_lambda_parabolic_degenerate(lam, c, beta, sec.get("delta0", 0.5), R, r_min)
    else:
        rho = sec.get("rho")
        if rho is None:
            rho = _default_top(lam, "rho", allow_log=True)
        rep = check_lambda_parabolic_singular(lam, c, beta, sec.get("cbar", 0.5), sec.get("delta0", 0.5),
                                              rho, max_terms=sec.get("max_terms", 2000),
                                              n_grid=sec.get("n_grid", 256))
    out = Output(cfg, f"lambda-{case}")
    return out.report(make_report("lambda", cfg.echo(), [rep]))


# --------------------------------------------------------------------------
# iterate

def _trace_check(name, ok, **details):
    return {"type": "invariant", "invariant": name,
            "verdict": Verdict.HOLDS.value if ok else Verdict.VIOLATED.value, "details": details}


def cmd_iterate(args) -> dict:
    cfg = load_config(args.config)
    it = cfg.section("iteration")
    kind = args.kind or it.get("kind", "elliptic")
    if kind not in TRACE_KINDS:
        raise UsageError(f"unknown trace kind {kind!r}; choose from {TRACE_KINDS}")
    jmax = args.jmax if args.jmax is not None else it.get("jmax", 30)
    results = []
    out = Output(cfg, f"iterate-{kind}")
    if kind == "degiorgi":
        res = degiorgi_lemma(it.get("dg_c", 2.0), it.get("dg_b", 2.0), it.get("dg_delta", 1.0),
                             it.get("dg_y0", 0.25) if args.omega0 is None else args.omega0, jmax)
        trace = res.trace
        results.append({"type": "degiorgi", "nu": res.nu, "converged": res.converged,
                        "bounds": res.bounds})
    else:
        params = cfg.iteration_params()
        lam = cfg.lambda_spec()
        omega0 = args.omega0 if args.omega0 is not None else it.get("omega0", 2.0 * params.M)
        rho = args.rho if args.rho is not None else it.get("rho")
        spec = cfg.growth_spec() if cfg.sections.get("growth") else None
        if kind == "elliptic":
            rho = 0.5 if rho is None else rho
            th = elliptic_thresholds(params, lam, it.get("r", float(rho) / 2))
            results.append(dict(type="thresholds", kind="elliptic", **th))
            trace = elliptic_oscillation_trace(omega0, rho, params, lam, jmax,
                                               include_floor=it.get("include_floor", True))
            results.append(_trace_check("product-bound", product_bound_holds(trace)))
        elif kind == "degenerate":
            rho = 0.5 if rho is None else rho
            try:
                th = parabolic_degenerate_thresholds(params, lam, rho)
                results.append(dict(type="thresholds", kind="degenerate", **th))
            except DomainError as exc:
                results.append({"type": "thresholds", "kind": "degenerate", "verdict": "violated",
                                "details": {"reason": str(exc)}})
            trace = parabolic_degenerate_trace(omega0, rho, params, lam, jmax, spec=spec)
            results.append(_trace_check("ratio-monotone", ratio_monotone(trace)))
        else:
            if rho is None:
                rho = 0.5
            th = parabolic_singular_thresholds(params, lam, rho)
            results.append(dict(type="thresholds", kind="singular", **th))
            trace = parabolic_singular_trace(omega0, rho, params, lam, jmax, spec=spec)
    csv_text = trace.to_csv()
    out.text(f"trace-{kind}.csv", csv_text)
    results.append(trace)
    rep = make_report("iterate", cfg.echo(), results)
    return out.report(rep)


# --------------------------------------------------------------------------
# solve

def cmd_solve(args) -> dict:
    from .solver.diagnostics import empirical_modulus, measure_oscillation
    from .solver.elliptic import make_grid, solve_elliptic
    from .solver.parabolic import solve_parabolic
    from .solver.scenarios import LINEAR, get_scenario, parabolic_data

    cfg = load_config(args.config)
    sv = cfg.section("solver")
    equation = args.equation or sv.get("equation", "elliptic")
    sc = get_scenario(args.scenario or sv.get("scenario", "harmonic"))
    if cfg.sections.get("growth"):
        spec = cfg.growth_spec()
    else:
        spec = sc.default_spec or LINEAR
    scfg = cfg.solve_config()
    n = sv.get("grid", 32)
    center = tuple(sv.get("center", sc.center))
    radii = list(sv.get("radii", (1 / 32, 1 / 16, 1 / 8, 1 / 4)))
    out = Output(cfg, f"solve-{equation}-{sc.name}")
    results = []
    if equation == "elliptic":
        ns = sorted(set(sv.get("refinements", ())) | {n})
        fields = []
        for m in ns:
            f = solve_elliptic(spec, sc.boundary, make_grid(m), scfg)
            fields.append(f)
        fine = fields[ns.index(n)]
        out.text("field.txt", fine.to_text())
        out.text("field.csv", fine.to_csv())
        lo, hi = fine.meta["boundary_min"], fine.meta["boundary_max"]
        ok = bool(fine.values.min() >= lo - 1e-8 and fine.values.max() <= hi + 1e-8)
        results.append({"type": "invariant", "invariant": "maximum-principle",
                        "verdict": "holds" if ok else "violated",
                        "details": {"min": float(fine.values.min()), "max": float(fine.values.max()),
                                    "boundary_min": lo, "boundary_max": hi}})
        summary = {"type": "solve", "equation": "elliptic", "scenario": sc.name, "grid": n,
                   "iterations": fine.meta["iterations"],
                   "final_residual": fine.meta["residual_history"][-1]}
        if sc.exact is not None:
            table = []
            for m, f in zip(ns, fields):
                X, Y = f.coords()
                table.append({"n": m, "h": 1.0 / m, "max_error": float(np.abs(f.values - sc.exact(X, Y)).max())})
            for a, b in zip(table, table[1:]):
                if a["max_error"] > 1e-12 and b["max_error"] > 1e-12:
                    b["order"] = math.log(a["max_error"] / b["max_error"]) / math.log(a["h"] / b["h"])
            summary["convergence"] = table
        results.append(summary)
        osc = measure_oscillation(fine, center, radii)
        out.text("oscillation.csv", "r,osc\n" + "".join(f"{r:.17g},{o:.17g}\n" for r, o in osc))
        params = cfg.iteration_params()
        mod = empirical_modulus(fields, center, radii, params, cfg.lambda_spec(), rho=sv.get("rho"))
        results.append(mod)
        results.append({"type": "invariant", "invariant": "oscillation-monotone",
                        "verdict": "holds" if all(mod.monotone) else "violated", "details": {}})
    elif equation == "parabolic":
        initial, boundary = parabolic_data(sc)
        T = sv.get("T", 0.1)
        g = solve_parabolic(spec, initial, boundary, make_grid(n), T, scfg,
                            store_every=sv.get("store_every", 10))
        snaps_dir = os.path.join(out.dir, f"{out.stem}-snapshots")
        out.files.extend(g.save_snapshots(snaps_dir))
        out.text("field.txt", g.to_text())
        X, Y = g.coords()
        ring = g.boundary_mask()
        data = [initial(X, Y)] + [np.broadcast_to(boundary(X, Y, t), X.shape)[ring] for t in g.times]
        lo = min(float(np.min(d)) for d in data)
        hi = max(float(np.max(d)) for d in data)
        smin = min(float(s.min()) for s in g.snapshots)
        smax = max(float(s.max()) for s in g.snapshots)
        ok = smin >= lo - 1e-8 and smax <= hi + 1e-8
        results.append({"type": "invariant", "invariant": "comparison-principle",
                        "verdict": "holds" if ok else "violated",
                        "details": {"min": smin, "max": smax, "data_min": lo, "data_max": hi}})
        summary = {"type": "solve", "equation": "parabolic", "scenario": sc.name, "grid": n, "T": T,
                   "dt": g.meta["dt"], "steps": g.meta["steps"],
                   "max_inner_iterations": max(g.meta["inner_iterations"])}
        if sc.name == "heat":
            j = i = n // 2
            ratio = g.values[j, i] / initial(X, Y)[j, i]
            exact = math.exp(-2 * math.pi ** 2 * T)
            summary["decay"] = {"measured": float(ratio), "exact": exact, "rel_error": float(ratio / exact - 1)}
        results.append(summary)
    else:
        raise UsageError(f"unknown equation {equation!r}")
    return out.report(make_report("solve", cfg.echo(), results))


# --------------------------------------------------------------------------
# report-merge

def cmd_report_merge(args) -> dict:
    reports = [load_report(p) for p in args.reports]
    merged = merge_reports(reports, list(args.reports))
    if args.output:
        write_report(merged, args.output)
        merged["files"] = [args.output]
    return merged


def cmd_list_configs(args) -> dict:
    return {"configs": shipped_configs(), "exit_status": 0}


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="b1classes", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    common.add_argument("--quiet", action="store_true", help="print nothing on success")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-conditions", parents=[common], help="sample the structural growth conditions")
    p.add_argument("config")
    p.add_argument("--family", choices=("G1", "G2", "G3", "G4"))
    p.add_argument("--regime", choices=("auto", "degenerate", "singular", "none"), default="auto")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_verify_conditions)

    p = sub.add_parser("lambda", parents=[common], help="admissibility of the modulus lambda")
    p.add_argument("config")
    p.add_argument("--case", choices=("elliptic", "degenerate", "singular"))
    p.add_argument("--rmin", type=float)
    p.set_defaults(func=cmd_lambda)

    p = sub.add_parser("iterate", parents=[common], help="threshold constants and oscillation traces")
    p.add_argument("config")
    p.add_argument("--kind", choices=TRACE_KINDS)
    p.add_argument("--omega0", type=float)
    p.add_argument("--rho", type=_radius_arg)
    p.add_argument("--jmax", type=int)
    p.set_defaults(func=cmd_iterate)

    p = sub.add_parser("solve", parents=[common], help="run a solver scenario")
    p.add_argument("config")
    p.add_argument("--equation", choices=("elliptic", "parabolic"))
    p.add_argument("--scenario")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("report-merge", parents=[common], help="merge JSON reports")
    p.add_argument("reports", nargs="+")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_report_merge)

    p = sub.add_parser("list-configs", parents=[common], help="print the names of the shipped configs")
    p.set_defaults(func=cmd_list_configs)
    return ap


def _radius_arg(text):
    from .logradius import parse_radius
    try:
        return parse_radius(text)
    except B1Error as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _summary(rep: dict) -> str:
    lines = []
    for r in rep.get("results", []):
        if not isinstance(r, dict):
            continue
        label = r.get("condition") or r.get("criterion") or r.get("invariant") or r.get("kind") or r.get("scenario") or r.get("type")
        v = r.get("verdict") or r.get("overall") or r.get("regime") or r.get("termination") or ""
        lines.append(f"{r.get('type', '?'):>17}  {label}" + (f": {v}" if v else ""))
    for f in rep.get("files", []):
        lines.append(f"wrote {f}")
    lines.append(f"exit status {rep.get('exit_status', 0)}")
    return "\n".join(lines)


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        rep = args.func(args)
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except B1Error as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "list-configs":
        print("\n".join(rep["configs"]))
        return 0
    if not args.quiet:
        print(_summary(rep))
    return int(rep.get("exit_status", exit_status(rep.get("results", []))))


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

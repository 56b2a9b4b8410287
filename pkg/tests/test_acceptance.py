"""Acceptance gate: one PASS/FAIL line per criterion."""
from __future__ import annotations

import math
import os
import time

import mpmath
import numpy as np
import pytest

from b1classes.cli import load_config, main
from b1classes.conditions import (SamplePlan, Verdict, check_lambda_elliptic,
                                  check_lambda_parabolic_degenerate, check_lambda_parabolic_singular,
                                  check_young, classify_example)
from b1classes.fields import ConstField
from b1classes.growth import Family, GrowthSpec, LambdaFamily, LambdaSpec, eval_g
from b1classes.iteration import (IterationParams, degiorgi_lemma, degiorgi_nu, elliptic_oscillation_trace,
                                 parabolic_degenerate_trace, product_bound_holds, ratio_monotone)
from b1classes.logradius import LogRadius
from b1classes.solver.cutoff import CutoffSpec
from b1classes.solver.diagnostics import check_dg_poincare, empirical_modulus, estimate_K1, measure_oscillation
from b1classes.solver.elliptic import SolveConfig, make_grid, solve_elliptic
from b1classes.solver.parabolic import solve_parabolic
from b1classes.solver.scenarios import LINEAR, SCENARIOS, parabolic_data


def test_criterion_01_degiorgi_sharpness(acceptance):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst, decays = 0.0, True
    for _ in range(100):
        c, b = rng.uniform(1.1, 10.0, 2)
        delta = rng.uniform(0.1, 2.0)
        nu = degiorgi_nu(c, b, delta)
        res = degiorgi_lemma(c, b, delta, nu, jmax=40)
        # compare in log space: deep iterates fall below the double range
        with mpmath.workdps(60):
            for j, row in enumerate(res.trace.rows):
                log_closed = mpmath.log(nu) - j / mpmath.mpf(delta) * mpmath.log(b)
                worst = max(worst, float(abs(mpmath.expm1(row.log_omega - log_closed))))
        low = degiorgi_lemma(c, b, delta, 0.99 * nu, jmax=40)
        ys = [r.omega for r in low.trace.rows]
        decays &= ys[-1] < 1e-3 * ys[0] and all(y2 <= y1 for y1, y2 in zip(ys, ys[1:]))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and decays and elapsed < 1.0
    assert acceptance(1, "De Giorgi lemma sharpness", ok,
                      f"max rel dev {worst:.2e}, below-threshold decays {decays}, {elapsed:.2f}s")


def test_criterion_02_lambda_admissibility(acceptance):
    t0 = time.perf_counter()
    verdicts = {}
    for beta in (1.0, 2.0):
        tl = LambdaSpec(LambdaFamily.TRIPLE_LOG, 0.5 / beta)
        verdicts[f"triple elliptic b={beta:g}"] = check_lambda_elliptic(tl, 1.0, beta, 0.03, 1e-12).overall
        verdicts[f"triple degenerate b={beta:g}"] = check_lambda_parabolic_degenerate(
            tl, 1.0, beta, 0.5, 0.03, 1e-12).overall
        ql = LambdaSpec(LambdaFamily.QUAD_LOG, 0.5 / beta)
        rep = check_lambda_parabolic_singular(ql, 1.0, beta, 0.5, 0.5, LogRadius(4, 30.0))
        remark = rep.remark or {}
        chain = bool(remark.get("first_step_ok") and remark.get("chain_ok"))
        verdicts[f"quad singular b={beta:g}"] = rep.overall if chain else Verdict.VIOLATED
    power = check_lambda_elliptic(LambdaSpec(LambdaFamily.SINGLE_LOG, 1.0), 1.0, 1.0, 0.5, 1e-12)
    elapsed = time.perf_counter() - t0
    ok = (all(v is Verdict.HOLDS for v in verdicts.values())
          and power.vanishing["verdict"] == "violated" and elapsed < 5.0)
    bad = [k for k, v in verdicts.items() if v is not Verdict.HOLDS]
    assert acceptance(2, "lambda admissibility", ok,
                      f"{len(verdicts)} admissible cases, failing {bad or 'none'}, "
                      f"power vanishing {power.vanishing['verdict']}, {elapsed:.2f}s")


def _expected(spec: GrowthSpec):
    """Regime formulas of the worked examples, written out per family."""
    p, q = spec.p, spec.q
    f = spec.family
    if f is Family.G1 and p > 2:
        return "degenerate", {"mu1": p - 2, "mu2": q - 2, "delta": 0.0, "b0": 0.0}
    if f is Family.G1 and q < 2:
        return "singular", {"mu3": 2 - q, "mu4": 2 - p, "delta": 0.0, "b0": 0.0}
    if f is Family.G1:
        p1, q1 = spec.p1, spec.q1
        mu1 = (q1 - 2) / 2
        return "degenerate", {"mu1": mu1, "mu2": q - 2, "delta": 0.0,
                              "b0": max(1.0, ((2 - p + mu1) / (q1 - 2 + mu1)) ** (1 / (q1 - p1)))}
    if f in (Family.G2, Family.G4) and p > 2:
        return "degenerate", {"mu1": p - 2, "mu2": p - 1, "delta": 0.0, "b0": 0.0}
    if f in (Family.G2, Family.G4):
        return "singular", {"mu3": (2 - p) / 2, "mu4": 2 - p, "delta": 0.0, "b0": math.exp(2 / (2 - p)) - 1}
    a_x0 = float(spec.a_field(np.asarray(spec.x0 or (0.5, 0.5)), 0.0))
    if p > 2 and a_x0 > 0:
        return "degenerate", {"mu1": (q - 2) / 2, "mu2": q - 2, "delta": spec.alpha / (q - p),
                              "b0": ((2 / spec.a0) * (q + 2 - 2 * p) / (q - 2)) ** (1 / (q - p)),
                              "R_eq": lambda R: spec.a0 * R ** spec.alpha - a_x0 / 2}
    if p > 2:
        return "degenerate", {"mu1": p - 2, "mu2": q - 2, "delta": 0.0, "b0": 0.0}
    if q < 2:
        return "singular", {"mu3": 2 - q, "mu4": 2 - p, "delta": 0.0, "b0": 0.0}
    return "singular", {"mu3": (2 - p) / 2, "mu4": 2 - p, "delta": 0.0, "b0": 0.0,
                        "R_eq": lambda R: spec.a0 * (q - 1 - p / 2) * spec.M ** (q - p) * R ** spec.alpha
                        - (2 - p) / 2}


GROWTH_CONFIGS = ["g1_degenerate", "g1_singular", "g1_mixed", "g2_degenerate", "g2_singular",
                  "g3_degenerate", "g3_degenerate_weighted", "g3_singular", "g3_mixed",
                  "g4_degenerate", "g4_singular"]


def test_criterion_03_regime_classification(acceptance):
    mismatches = []
    for name in GROWTH_CONFIGS:
        cfg = load_config(name)
        spec = cfg.growth_spec()
        lam = cfg.lambda_spec()
        got = classify_example(spec, lam)
        regime, formulas = _expected(spec)
        if got.regime != regime:
            mismatches.append(f"{name}: regime {got.regime}")
            continue
        for key, val in formulas.items():
            if key == "R_eq":
                if lam.family is not LambdaFamily.CONSTANT or lam.L != 0.0:
                    continue
                if not abs(val(got.R)) <= 1e-10:
                    mismatches.append(f"{name}: R residual {val(got.R):.2e}")
                if not abs(got.R_residual) <= 1e-10:
                    mismatches.append(f"{name}: reported residual {got.R_residual:.2e}")
            elif getattr(got, key) != pytest.approx(val, rel=1e-14, abs=1e-15):
                mismatches.append(f"{name}: {key} {getattr(got, key)} != {val}")
    ok = not mismatches
    assert acceptance(3, "regime classification", ok,
                      f"{len(GROWTH_CONFIGS)} shipped growth configs, mismatches {mismatches or 'none'}")


def test_criterion_04_young(acceptance):
    specs = {
        "G1": GrowthSpec(Family.G1, p=1.5, q=3.0),
        "G2": GrowthSpec(Family.G2, p=2.5, q=3.5),
        "G3": load_config("g3_degenerate").growth_spec(),
        "G4": load_config("g4_singular").growth_spec(),
    }
    counts = {}
    for fam, spec in specs.items():
        rep = check_young(spec, SamplePlan(seed=99, n_young=10_000))
        counts[fam] = (rep.details["violations"], rep.samples)
    ok = all(v == 0 and n >= 10_000 for v, n in counts.values())
    assert acceptance(4, "Young inequalities", ok,
                      ", ".join(f"{k}: {v} violations / {n}" for k, (v, n) in counts.items()))


def test_criterion_05_elliptic_oracle(acceptance):
    t0 = time.perf_counter()
    sc = SCENARIOS["harmonic"]
    errs = {}
    for n in (32, 64):
        f = solve_elliptic(LINEAR, sc.boundary, make_grid(n))
        X, Y = f.coords()
        errs[n] = float(np.abs(f.values - sc.exact(X, Y)).max())
    order = math.log2(errs[32] / errs[64])
    elapsed = time.perf_counter() - t0
    ok = order >= 1.8 and errs[64] < 5e-4 and elapsed < 30
    assert acceptance(5, "elliptic solver oracle", ok,
                      f"order {order:.3f}, error at h=1/64 {errs[64]:.2e}, {elapsed:.2f}s")


def test_criterion_06_affine(acceptance):
    errs = {}
    for p in (1.5, 3.0):
        spec = GrowthSpec(Family.G1, p=p, q=p, p_field=ConstField(p), q_field=ConstField(p))
        # x-independent by construction
        pts = np.array([[0.1, 0.2], [0.9, 0.7]])
        assert np.all(np.asarray(eval_g(spec, pts, 0.0, 2.0)) == eval_g(spec, pts[0], 0.0, 2.0))
        f = solve_elliptic(spec, SCENARIOS["affine"].boundary, make_grid(32))
        X, Y = f.coords()
        errs[p] = float(np.abs(f.values - (2 * X + Y)).max())
    ok = all(e < 1e-8 for e in errs.values())
    assert acceptance(6, "exact affine reproduction", ok,
                      ", ".join(f"p={p:g}: {e:.1e}" for p, e in errs.items()))


def test_criterion_07_parabolic(acceptance, outdir):
    init, bnd = parabolic_data(SCENARIOS["heat"])
    f = solve_parabolic(LINEAR, init, bnd, make_grid(64), 0.1, SolveConfig(dt=1e-3))
    rel = abs(f.values[32, 32] / init(0.5, 0.5) / math.exp(-2 * math.pi ** 2 * 0.1) - 1)
    shipped = ["solve_heat", "solve_double_phase_parabolic", "solve_constant_parabolic"]
    comparison = {}
    import json
    for name in shipped:
        code = main(["solve", name, "--quiet"])
        cfg = load_config(name)
        rep_name = f"{name}-solve-parabolic-{cfg.get('solver', 'scenario')}.json"
        with open(os.path.join(outdir, rep_name), encoding="utf-8") as fh:
            rep = json.load(fh)
        inv = [r for r in rep["results"] if r.get("invariant") == "comparison-principle"]
        comparison[name] = code == 0 and inv and all(r["verdict"] == "holds" for r in inv)
    ok = rel < 0.05 and all(comparison.values())
    assert acceptance(7, "parabolic oracle and comparison principle", ok,
                      f"decay rel error {rel:.4f}, comparison {comparison}")


def test_criterion_08_discrete_b1(acceptance):
    sc = SCENARIOS["harmonic"]
    cut = CutoffSpec((0.5, 0.5), 0.25)
    k1 = {}
    fields = {}
    for n in (32, 64):
        fields[n] = solve_elliptic(LINEAR, sc.boundary, make_grid(n))
        k1[n] = estimate_K1(fields[n], LINEAR, cut).k1
    finite = all(v is not None and math.isfinite(v) and v > 0 for v in k1.values())
    spread = abs(k1[32] - k1[64]) / max(k1.values()) if finite else math.inf
    rng = np.random.default_rng(77)
    f = fields[64]
    X, Y = f.coords()
    inside = np.hypot(X - 0.5, Y - 0.5) <= 0.25
    lo, hi = np.quantile(f.values[inside], [0.05, 0.95])
    consts = []
    for _ in range(20):
        k, l = np.sort(rng.uniform(lo, hi, 2))
        rep = check_dg_poincare(f, (0.5, 0.5), 0.25, float(k), float(l))
        consts.append(rep.implied_constant if rep.implied_constant is not None else math.inf)
    ok = finite and spread < 0.5 and all(math.isfinite(c) and c < 100 for c in consts)
    assert acceptance(8, "discrete B1 diagnostics", ok,
                      f"K1 {k1[32]:.4f} -> {k1[64]:.4f} (spread {spread:.1%}), "
                      f"max Poincare constant {max(consts):.3f}")


def test_criterion_09_trace_invariants(acceptance, outdir):
    rng = np.random.default_rng(5)
    ratio_ok = product_ok = True
    lams = [LambdaSpec(), LambdaSpec(LambdaFamily.CONSTANT, 1.0), LambdaSpec(LambdaFamily.TRIPLE_LOG, 0.5)]
    for _ in range(30):
        gamma = float(rng.uniform(1, 3))
        lam = lams[int(rng.integers(len(lams)))]
        omega0 = float(rng.uniform(0, 2))
        p = IterationParams(gamma=gamma, b0=float(rng.uniform(0, 2)), delta0=float(rng.uniform(0.1, 0.9)))
        ratio_ok &= ratio_monotone(parabolic_degenerate_trace(omega0, 0.03, p, lam, jmax=40))
        product_ok &= product_bound_holds(elliptic_oscillation_trace(omega0, 0.03, p, lam, jmax=40))
    names = ["iter_degiorgi", "iter_elliptic", "iter_elliptic_floor", "iter_degenerate",
             "iter_singular", "iter_singular_extreme"]
    outputs = []
    cli_invariants = True
    import json
    for _ in range(2):
        snap = {}
        for name in names:
            cli_invariants &= main(["iterate", name, "--quiet"]) == 0
            for fname in sorted(os.listdir(outdir)):
                if fname.startswith(name + "-"):
                    with open(os.path.join(outdir, fname), encoding="utf-8") as fh:
                        snap[fname] = fh.read()
        outputs.append(snap)
    for fname, text in outputs[0].items():
        if fname.endswith(".json"):
            for r in json.loads(text)["results"]:
                if r.get("type") == "invariant" and r["verdict"] != "holds":
                    cli_invariants = False
    reproducible = outputs[0] == outputs[1] and len(outputs[0]) >= 2 * len(names)
    ok = ratio_ok and product_ok and cli_invariants and reproducible
    assert acceptance(9, "trace invariants", ok,
                      f"ratio monotone {ratio_ok}, product bound {product_ok}, "
                      f"shipped traces {cli_invariants}, byte-identical {reproducible}")


def test_criterion_10_empirical_continuity(acceptance):
    cfg = load_config("solve_double_phase")
    spec = cfg.growth_spec()
    sv = cfg.section("solver")
    sc = SCENARIOS["double-phase"]
    fields = [solve_elliptic(spec, sc.boundary, make_grid(n)) for n in sv["refinements"]]
    radii = list(sv["radii"])
    center = tuple(sv["center"])
    rep = empirical_modulus(fields, center, radii)
    fine = [o for _, o in measure_oscillation(fields[-1], center, radii)]
    monotone = all(b >= a for a, b in zip(fine, fine[1:]))
    ok = monotone and all(rep.monotone) and rep.gamma_min is not None and math.isfinite(rep.gamma_min)
    assert acceptance(10, "empirical continuity (double phase)", ok,
                      f"monotone {monotone}, gamma_min {rep.gamma_min}, slope {rep.slope:.3f}")

from __future__ import annotations

import math
import os

import numpy as np
import pytest

from b1classes import _kernels_py, kernels
from b1classes.conditions import Verdict
from b1classes.errors import InvariantViolation, NonConvergenceError, UsageError
from b1classes.fields import ConstField
from b1classes.growth import Family, GrowthSpec
from b1classes.solver.cutoff import BUMP_SLOPE, CutoffSpec
from b1classes.solver.diagnostics import (K1SamplePlan, check_dg_poincare, empirical_modulus,
                                          estimate_K1, k1_sides, measure_oscillation)
from b1classes.solver.elliptic import SolveConfig, make_grid, sample, solve_elliptic
from b1classes.solver.grid import GridField
from b1classes.solver.operator import assemble, residual
from b1classes.solver.parabolic import solve_parabolic
from b1classes.solver.scenarios import DOUBLE_PHASE, LINEAR, SCENARIOS, parabolic_data

HARM = SCENARIOS["harmonic"]


@pytest.fixture(scope="module")
def harmonic_fields():
    return {n: solve_elliptic(LINEAR, HARM.boundary, make_grid(n)) for n in (16, 32, 64)}


def _err(f):
    X, Y = f.coords()
    return float(np.abs(f.values - HARM.exact(X, Y)).max())


# ------------------------------------------------------------------ kernels

def test_kernel_backends_agree(rng):
    u = rng.normal(size=(9, 13))
    hx, hy = 0.1, 0.07
    vx_py, vy_py = _kernels_py.edge_grad_norms(u, hx, hy)
    vx, vy = kernels.edge_grad_norms(u, hx, hy)
    np.testing.assert_allclose(vx, vx_py, rtol=1e-14)
    np.testing.assert_allclose(vy, vy_py, rtol=1e-14)
    kx, ky = rng.uniform(0.5, 2, vx.shape), rng.uniform(0.5, 2, vy.shape)
    np.testing.assert_allclose(kernels.net_flux(u, kx, ky, hx, hy),
                               _kernels_py.net_flux(u, kx, ky, hx, hy), rtol=1e-13, atol=1e-13)
    assert kernels.BACKEND in ("cython", "python")


def test_edge_gradient_exact_for_affine():
    g = make_grid(8)
    X, Y = g.coords()
    vx, vy = kernels.edge_grad_norms(3.0 * X - 4.0 * Y, g.hx, g.hy)
    np.testing.assert_allclose(vx, 5.0, rtol=1e-13)
    np.testing.assert_allclose(vy, 5.0, rtol=1e-13)


def test_flux_conservation(rng):
    g = make_grid(12)
    u = rng.normal(size=g.shape)
    kx, ky = rng.uniform(0.1, 3, (13, 12)), rng.uniform(0.1, 3, (12, 13))
    r = residual(g, u, kx, ky)
    scale = float(np.abs(kx * np.diff(u, axis=1)).sum() + np.abs(ky * np.diff(u, axis=0)).sum())
    assert abs(r.sum()) <= 1e-10 * scale
    # interior divergence equals the flux leaving through edges touching the boundary ring
    inner = np.zeros(g.shape, bool)
    inner[1:-1, 1:-1] = True
    boundary_flux = 0.0
    for j in range(g.ny + 1):
        for i in range(g.nx):
            if inner[j, i] != inner[j, i + 1]:
                f = kx[j, i] * (u[j, i + 1] - u[j, i])
                boundary_flux += f if inner[j, i] else -f
    for j in range(g.ny):
        for i in range(g.nx + 1):
            if inner[j, i] != inner[j + 1, i]:
                f = ky[j, i] * (u[j + 1, i] - u[j, i])
                boundary_flux += f if inner[j, i] else -f
    assert r[inner].sum() == pytest.approx(boundary_flux, rel=1e-10, abs=1e-12 * scale)


def test_assembly_matches_residual(rng):
    g = make_grid(7)
    u = rng.normal(size=g.shape)
    kx, ky = rng.uniform(0.1, 3, (8, 7)), rng.uniform(0.1, 3, (7, 8))
    A, b = assemble(g, kx, ky, u)
    lhs = A @ u[1:-1, 1:-1].ravel() - b
    np.testing.assert_allclose(lhs, -residual(g, u, kx, ky)[1:-1, 1:-1].ravel(), atol=1e-12)


# ------------------------------------------------------------------ elliptic

def test_harmonic_convergence_order(harmonic_fields):
    e32, e64 = _err(harmonic_fields[32]), _err(harmonic_fields[64])
    assert math.log2(e32 / e64) >= 1.8
    assert e64 < 5e-4


def test_quadratic_harmonic_is_exact():
    spec = LINEAR
    f = solve_elliptic(spec, lambda X, Y: X ** 2 - Y ** 2, make_grid(16))
    X, Y = f.coords()
    assert np.abs(f.values - (X ** 2 - Y ** 2)).max() < 1e-10


def test_maximum_principle(harmonic_fields):
    for f in harmonic_fields.values():
        assert f.values.min() >= f.meta["boundary_min"] - 1e-8
        assert f.values.max() <= f.meta["boundary_max"] + 1e-8
    dp = solve_elliptic(DOUBLE_PHASE, SCENARIOS["double-phase"].boundary, make_grid(16))
    assert dp.meta["boundary_min"] - 1e-8 <= dp.values.min() <= dp.values.max() <= dp.meta["boundary_max"] + 1e-8


def test_constant_data_exact():
    f = solve_elliptic(DOUBLE_PHASE, SCENARIOS["constant"].boundary, make_grid(16))
    assert np.abs(f.values - 0.75).max() < 1e-12


@pytest.mark.parametrize("p", [1.5, 3.0])
def test_affine_reproduction(p):
    spec = GrowthSpec(Family.G1, p=p, q=p, p_field=ConstField(p), q_field=ConstField(p))
    f = solve_elliptic(spec, SCENARIOS["affine"].boundary, make_grid(32))
    X, Y = f.coords()
    assert np.abs(f.values - (2 * X + Y)).max() < 1e-8


def test_nonconvergence_raises():
    spec = GrowthSpec(Family.G1, p=3.0, q=3.0)
    with pytest.raises(NonConvergenceError) as exc:
        solve_elliptic(spec, HARM.boundary, make_grid(16), SolveConfig(max_iter=1, tol=1e-14))
    assert len(exc.value.residual_history) == 2


def test_solver_usage_errors():
    with pytest.raises(UsageError):
        SolveConfig(damping=0.0)
    with pytest.raises(UsageError):
        solve_elliptic(LINEAR, lambda X, Y: np.full_like(X, np.inf), make_grid(4))


# ------------------------------------------------------------------ parabolic

def test_heat_decay_rate():
    init, bnd = parabolic_data(SCENARIOS["heat"])
    f = solve_parabolic(LINEAR, init, bnd, make_grid(64), 0.1, SolveConfig(dt=1e-3), store_every=10)
    ratio = f.values[32, 32] / init(0.5, 0.5)
    assert abs(ratio / math.exp(-2 * math.pi ** 2 * 0.1) - 1) < 0.05
    assert f.times[0] == 0.0 and f.times[-1] == pytest.approx(0.1)
    assert len(f.snapshots) == 11


@pytest.mark.parametrize("name,spec", [("heat", LINEAR), ("double-phase", DOUBLE_PHASE),
                                       ("constant", DOUBLE_PHASE)])
def test_comparison_principle(name, spec):
    init, bnd = parabolic_data(SCENARIOS[name])
    bump = lambda X, Y: 0.1 * np.sin(math.pi * X) * np.sin(math.pi * Y)
    cfg = SolveConfig(dt=1e-2)
    lo = solve_parabolic(spec, init, bnd, make_grid(16), 0.05, cfg)
    hi = solve_parabolic(spec, lambda X, Y: init(X, Y) + bump(X, Y), bnd, make_grid(16), 0.05, cfg)
    for a, b in zip(lo.snapshots, hi.snapshots):
        assert np.all(a <= b + 1e-10)
    data = [init(*lo.coords())] + [bnd(*lo.coords(), t) for t in lo.times]
    assert lo.values.min() >= min(d.min() for d in data) - 1e-8
    assert lo.values.max() <= max(d.max() for d in data) + 1e-8


def test_parabolic_inconsistent_data():
    with pytest.raises(UsageError):
        solve_parabolic(LINEAR, lambda X, Y: 0 * X + 1.0, lambda X, Y, t: 0 * X, make_grid(4), 0.1)


# ------------------------------------------------------------------ diagnostics

def test_measure_oscillation_brute_force(rng):
    f = GridField.unit_square(20, rng.normal(size=(21, 21)))
    radii = [0.05, 0.1, 0.2, 0.3, 0.45]
    res = measure_oscillation(f, (0.5, 0.5), radii)
    X, Y = f.coords()
    for r, osc in res:
        vals = [f.values[j, i] for j in range(21) for i in range(21)
                if math.hypot(X[j, i] - 0.5, Y[j, i] - 0.5) <= r * (1 + 1e-12) + 1e-15]
        assert osc == max(vals) - min(vals)
    assert all(b[1] >= a[1] for a, b in zip(res, res[1:]))
    const = GridField.unit_square(8, np.full((9, 9), 2.0))
    assert all(o == 0.0 for _, o in measure_oscillation(const, (0.5, 0.5), radii))
    with pytest.raises(UsageError):
        measure_oscillation(f, (0.5, 0.5), [0.6])


def test_cutoff_gradient_bound():
    X, Y = make_grid(64).coords()
    for sigma in (0.25, 0.5, 0.75):
        z = CutoffSpec((0.5, 0.5), 0.3, sigma)
        assert z.gradient_bound_holds(X, Y)
        vals = z(X, Y)
        assert vals.min() >= 0.0 and vals.max() == 1.0
        # finite-difference slope never exceeds the bound
        gx = np.abs(np.diff(vals, axis=1)) / (1 / 64)
        assert gx.max() <= z.grad_bound * (1 + 1e-12)
    bump = CutoffSpec((0.5, 0.5), 0.3, 0.5, kind="bump")
    fine = np.linspace(0.5, 0.8, 30001)
    slope = np.abs(np.diff(bump(fine, 0.5 + 0 * fine))) / (fine[1] - fine[0])
    assert slope.max() == pytest.approx(BUMP_SLOPE * bump.grad_bound, rel=1e-3)


def test_k1_constant_field_is_zero():
    f = GridField.unit_square(16, np.full((17, 17), 0.3))
    rep = estimate_K1(f, LINEAR, CutoffSpec((0.5, 0.5), 0.25))
    assert rep.k1 == 0.0 and rep.verdict is Verdict.HOLDS


def _k1_oracle(k, l, eps, sigma, rho, n, c3=2.0):
    """Closed form for u = x, g(v) = v: K A + K^2 B = lhs."""
    h = 1.0 / n
    xs = (np.arange(n) + 0.5) * h
    lhs = A = B = 0.0
    M = max(x for x in np.linspace(0, 1, n + 1) for y in np.linspace(0, 1, n + 1)
            if math.hypot(x - 0.5, y - 0.5) <= rho * (1 + 1e-12) + 1e-15) - k
    strip_area = 0.0
    for x in xs:
        for y in xs:
            d = math.hypot(x - 0.5, y - 0.5)
            if d > rho * (1 + 1e-12):
                continue
            zeta = min(1.0, max(0.0, 1 - (d - (1 - sigma) * rho) / (sigma * rho)))
            if k < x <= l:
                lhs += zeta ** c3 * h * h
                strip_area += h * h
            w = x - k
            if x > k and zeta > 0:
                B += (w / (sigma * rho * zeta)) * w / rho * zeta ** (c3 - 1) * h * h
    A = 1.0 / eps * M / rho * strip_area
    B *= eps * sigma ** -1 / (M / rho)
    return lhs, A, B, (-A + math.sqrt(A * A + 4 * B * lhs)) / (2 * B)


def test_k1_affine_matches_direct_evaluation():
    n, rho = 32, 0.25
    g = make_grid(n)
    X, _ = g.coords()
    f = g.with_values(X)
    cut = CutoffSpec((0.5, 0.5), rho)
    rep = estimate_K1(f, LINEAR, cut)
    assert rep.verdict is Verdict.HOLDS
    s = next(s for s in rep.samples if s["side"] == "plus" and s["eps"] == 0.5 and s["sigma"] == 0.5)
    lhs, A, B, k1 = _k1_oracle(s["k"], s["l"], 0.5, 0.5, rho, n)
    assert s["lhs"] == pytest.approx(lhs, rel=1e-12)
    assert s["k1"] == pytest.approx(k1, rel=1e-8)
    l_, r_ = k1_sides(LINEAR, f, cut, s["k"], s["l"], "plus", 0.5, 0.5, k1)
    assert r_ == pytest.approx(A * k1 + B * k1 * k1, rel=1e-10)


def test_k1_predicate_monotone_and_stable(harmonic_fields):
    cut = CutoffSpec((0.5, 0.5), 0.25)
    reps = {n: estimate_K1(harmonic_fields[n], LINEAR, cut) for n in (32, 64)}
    for n, rep in reps.items():
        assert rep.verdict is Verdict.HOLDS and math.isfinite(rep.k1)
        for s in rep.samples[:12]:
            K = s["k1"]
            if K == 0:
                continue
            lhs, at_k = k1_sides(LINEAR, harmonic_fields[n], cut, s["k"], s["l"], s["side"],
                                 s["eps"], s["sigma"], K)
            _, at_2k = k1_sides(LINEAR, harmonic_fields[n], cut, s["k"], s["l"], s["side"],
                                s["eps"], s["sigma"], 2 * K)
            assert at_k >= lhs * (1 - 1e-9) and at_2k >= at_k
    a, b = reps[32].k1, reps[64].k1
    assert abs(a - b) / max(a, b) < 0.5


def test_k1_gating_inconclusive():
    g = make_grid(16)
    X, _ = g.coords()
    f = g.with_values(1e-3 * X)
    rep = estimate_K1(f, LINEAR, CutoffSpec((0.5, 0.5), 0.25), K1SamplePlan(n_levels=4))
    assert rep.verdict is Verdict.INCONCLUSIVE and rep.k1 is None


def test_poincare_examples():
    g = make_grid(32)
    X, _ = g.coords()
    f = g.with_values(X - 0.5)
    rep = check_dg_poincare(f, (0.5, 0.5), 0.5, -0.25, 0.25)
    assert rep.verdict is Verdict.HOLDS and rep.implied_constant < 10
    # direct quadrature oracle on the same cells
    h = 1 / 32
    xs = (np.arange(32) + 0.5) * h
    small = comp = strip = 0.0
    for x in xs:
        for y in xs:
            if math.hypot(x - 0.5, y - 0.5) <= 0.5 * (1 + 1e-12):
                u = x - 0.5
                small += h * h * (u < -0.25)
                comp += h * h * (u >= 0.25)
                strip += h * h * (-0.25 <= u < 0.25)
    assert rep.lhs == pytest.approx(0.5 * math.sqrt(small), rel=1e-12)
    assert rep.rhs_core == pytest.approx(0.25 / comp * strip, rel=1e-12)
    const = g.with_values(np.full(g.shape, -1.0))
    assert check_dg_poincare(const, (0.5, 0.5), 0.5, 0.0, 0.5).verdict is Verdict.INCONCLUSIVE
    tiny = check_dg_poincare(f, (0.5, 0.5), 0.5, 0.0, 1e-12)
    assert tiny.lhs < 1e-11
    with pytest.raises(UsageError):
        check_dg_poincare(f, (0.5, 0.5), 0.5, 0.3, 0.2)


def test_empirical_modulus_examples(harmonic_fields):
    radii = [0.05, 0.1, 0.15, 0.2, 0.25]
    rep = empirical_modulus([harmonic_fields[32], harmonic_fields[64]], (0.5, 0.5), radii)
    assert abs(rep.slope - 1.0) < 0.2
    assert rep.status == "monotone" and all(rep.monotone)
    assert rep.gamma_min is not None and rep.gamma_min >= 1.0
    assert all(b >= o for b, o in zip(rep.bound, rep.osc[-1]))
    const = GridField.unit_square(16, np.full((17, 17), 0.4))
    crep = empirical_modulus([const], (0.5, 0.5), radii)
    assert crep.status == "zero oscillation" and crep.slope is None
    g = make_grid(256)
    X, _ = g.coords()
    lin = empirical_modulus([g.with_values(X)], (0.5, 0.5), radii)
    ratios = [o / r for r, o in zip(radii, lin.osc[0])]
    assert max(ratios) / min(ratios) < 1.1
    assert all(abs(q / 2.0 - 1) < 0.1 for q in ratios)
    with pytest.raises(UsageError):
        empirical_modulus([const], (0.5, 0.5), [0.1])


# ------------------------------------------------------------------ grid I/O

def test_grid_text_round_trip(tmp_path, rng):
    f = GridField(5, 3, 0.2, 1 / 3, (0.1, -0.2), rng.normal(size=(4, 6)))
    p = tmp_path / "f.txt"
    f.save(str(p))
    g = GridField.load(str(p))
    assert np.array_equal(f.values, g.values) and (g.nx, g.ny, g.hx, g.hy, g.origin) == (5, 3, 0.2, 1 / 3, (0.1, -0.2))
    assert f.to_csv().splitlines()[0] == "x,y,u"
    assert len(f.to_csv().splitlines()) == 1 + 24
    f.snapshots = [f.values, 2 * f.values]
    paths = f.save_snapshots(str(tmp_path / "snaps"))
    assert [p.rsplit("/", 1)[1] for p in paths] == ["snapshot_0000.txt", "snapshot_0001.txt"]
    assert np.array_equal(GridField.load(paths[1]).values, 2 * f.values)
    with pytest.raises(UsageError):
        GridField.from_text("1 2 3\n")
    with pytest.raises(InvariantViolation):
        GridField(2, 2, 0.5, 0.5, values=np.zeros(5))


def test_sample_broadcasts():
    g = make_grid(4)
    assert sample(g, lambda X, Y: 1.0).shape == (5, 5)


def test_pure_python_fallback_selected_by_environment():
    import subprocess
    import sys
    env = dict(os.environ, B1CLASSES_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from b1classes import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_benchmark_runs():
    import importlib.util
    path = os.path.join(os.path.dirname(__file__), os.pardir, "benchmarks", "bench_kernels.py")
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    rows = mod.run([8], repeat=1)
    assert {r[0] for r in rows} == {"edge_grad_norms", "net_flux"}
    assert all(r[2] > 0 for r in rows)

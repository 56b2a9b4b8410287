from __future__ import annotations

import math

import numpy as np
import pytest

from b1classes.conditions import (SamplePlan, Verdict, check_g1_elliptic, check_g2_continuity,
                                  check_g3_lower, check_lambda_elliptic,
                                  check_lambda_parabolic_degenerate,
                                  check_lambda_parabolic_singular, check_psi_regime, check_young,
                                  classify_example, recheck_witness)
from b1classes.errors import UsageError
from b1classes.fields import AffineField, ConstField, LogModField, RadialField
from b1classes.growth import Family, GrowthSpec, LambdaFamily, LambdaSpec, eval_g
from b1classes.logradius import LogRadius

PLAN = SamplePlan()


def _g1_ratio_oracle(p, q, v, w, c1, qp):
    g = lambda s: s ** (p - 1) + s ** (q - 1)  # noqa: E731
    return g(w) / g(v) / (c1 * (w / v) ** (qp - 1))


def test_g1_pure_power_saturates():
    spec = GrowthSpec(Family.G1, p=2, q=2)
    rep = check_g1_elliptic(spec, PLAN, q_param=2.0, c1=1.0)
    assert rep.verdict is Verdict.HOLDS
    assert rep.worst_ratio == pytest.approx(1.0, abs=1e-12)
    rep3 = check_g3_lower(spec, PLAN, p_param=2.0, c7=1.0)
    assert rep3.verdict is Verdict.HOLDS
    assert rep3.worst_ratio == pytest.approx(1.0, abs=1e-12)


def test_g1_wrong_q_gives_reproducible_witness():
    spec = GrowthSpec(Family.G1, p=2, q=3)
    rep = check_g1_elliptic(spec, PLAN, q_param=2.0, c1=1.0)
    assert rep.verdict is Verdict.VIOLATED
    w = rep.witness
    oracle = _g1_ratio_oracle(2, 3, w["v"], w["w"], 1.0, 2.0)
    assert oracle > 1
    assert recheck_witness(spec, rep) == pytest.approx(oracle, rel=1e-12)
    assert rep.worst_ratio == pytest.approx(oracle, rel=1e-12)
    # worst over the plan equals a brute-force max over the same pairs
    v, ww = PLAN.pairs(0.0)
    assert rep.worst_ratio == pytest.approx(float(np.max(_g1_ratio_oracle(2, 3, v, ww, 1.0, 2.0))), rel=1e-12)


def test_g2_family_with_log_factor_holds():
    spec = GrowthSpec(Family.G2, p=2, q=2.5)
    plan = SamplePlan(v_min=1.0, v_max=100.0)
    assert check_g1_elliptic(spec, plan, q_param=2.5, c1=2.0).verdict is Verdict.HOLDS


def test_g3_lower_examples():
    spec = GrowthSpec(Family.G1, p=2, q=3)
    assert check_g3_lower(spec, PLAN, p_param=2.0, c7=1.0).verdict is Verdict.HOLDS
    rep = check_g3_lower(GrowthSpec(Family.G1, p=2, q=2), PLAN, p_param=2.5, c7=1.0)
    assert rep.verdict is Verdict.VIOLATED
    assert recheck_witness(GrowthSpec(Family.G1, p=2, q=2), rep) > 1


def test_empty_plan_rejected():
    with pytest.raises(UsageError):
        SamplePlan(n_v=1)


def test_g2_x_independent_holds_with_unit_constant():
    spec = GrowthSpec(Family.G1, p=2.5, q=3)
    rep = check_g2_continuity(spec, LambdaSpec())
    assert rep.verdict is Verdict.HOLDS
    assert rep.constants["c2"] == 1.0
    assert rep.details["c2_min"] == pytest.approx(1.0, abs=1e-12)
    rep = check_g2_continuity(spec, LambdaSpec(LambdaFamily.TRIPLE_LOG, 0.5))
    assert rep.verdict is Verdict.HOLDS
    assert rep.details["c2_min"] <= 1.0


def test_g2_variable_exponent_with_log_condition():
    spec = GrowthSpec(Family.G1, p=2.5, q=3, p_field=AffineField(2.5, (0.25, 0.25)))
    lam = LambdaSpec(LambdaFamily.CONSTANT, 0.5)
    rep = check_g2_continuity(spec, lam)
    assert rep.verdict is Verdict.HOLDS
    # oracle: |p(x1)-p(x2)| ln(1/r) <= 0.25*sqrt(2)*2r*ln(1/r) <= lambda
    for r in rep.details["radii"]:
        assert 0.25 * math.sqrt(2) * 2 * r * math.log(1 / r) <= 0.5


def test_g2_weight_with_too_small_a0_is_violated():
    spec = GrowthSpec(Family.G3, p=2.0, q=2.5, a_field=RadialField(1.0, 0.5, (0.5, 0.5)),
                      a0=1e-3, alpha=0.5, x0=(0.5, 0.5))
    rep = check_g2_continuity(spec, LambdaSpec())
    assert rep.verdict is Verdict.VIOLATED
    lam = LambdaSpec()
    assert recheck_witness(spec, rep, lam) > 1
    w = rep.witness
    v = w["v"] / w["r"]
    ratio = eval_g(spec, np.array(w["x1"]), w["t1"], v) / eval_g(spec, np.array(w["x2"]), w["t2"], v)
    assert ratio / rep.constants["c2"] == pytest.approx(rep.worst_ratio, rel=1e-10)


def test_g2_domain_too_small():
    with pytest.raises(UsageError):
        check_g2_continuity(GrowthSpec(), LambdaSpec(), ball=((0.5, 0.5), 0.1), radii=[0.05])


def test_psi_examples():
    pure = GrowthSpec(Family.G1, p=3, q=3, mu1=1.0, mu2=1.0)
    rep = check_psi_regime(pure, "degenerate", plan=PLAN)
    assert rep.verdict is Verdict.HOLDS
    assert rep.worst_ratio == pytest.approx(1.0, abs=1e-12)
    sing = GrowthSpec(Family.G1, p=1.4, q=1.8, mu3=0.2, mu4=0.6)
    assert check_psi_regime(sing, "singular", plan=PLAN).verdict is Verdict.HOLDS
    wrong = GrowthSpec(Family.G1, p=1.5, q=1.8, mu1=0.1, mu2=0.2)
    rep = check_psi_regime(wrong, "degenerate", plan=PLAN)
    assert rep.verdict is Verdict.VIOLATED
    assert recheck_witness(wrong, rep) == pytest.approx(rep.worst_ratio, rel=1e-12)
    with pytest.raises(UsageError):
        check_psi_regime(GrowthSpec(Family.G1, p=3, q=3), "degenerate", plan=PLAN)


def test_young_examples():
    # g(v) = v, a = b = 1, eps = 1/2: 1 <= 0.5 + 2
    lin = GrowthSpec(Family.G3, p=2, q=2, a_field=ConstField(0.0))
    g = lambda s: float(eval_g(lin, (0.5, 0.5), None, s))  # noqa: E731
    assert g(1) * 1 <= 0.5 * g(1) * 1 + g(2) * 1
    # b = eps a / 2: the first term alone dominates
    a, eps = 3.0, 0.4
    b = eps * a / 2
    assert g(a) * b <= eps * g(a) * a


@pytest.mark.parametrize("spec", [
    GrowthSpec(Family.G1, p=1.5, q=3.0, p_field=AffineField(1.5, (0.2, 0.1)), q_field=AffineField(2.6, (0.2, 0.2))),
    GrowthSpec(Family.G2, p=1.7, q=2.5, p_field=AffineField(1.7, (0.1, 0.1))),
    GrowthSpec(Family.G3, p=1.8, q=2.4, a_field=RadialField(1.0, 0.5, (0.5, 0.5))),
    GrowthSpec(Family.G4, p=2.5, q=3.5, b_field=LogModField(1.0, 0.5, (0.5, 0.5))),
], ids=lambda s: s.family.value)
def test_young_zero_violations(spec):
    rep = check_young(spec, PLAN)
    assert rep.samples == 2 * 10_000
    assert rep.details["violations"] == 0
    assert rep.verdict is Verdict.HOLDS


def test_reports_are_deterministic():
    spec = GrowthSpec(Family.G1, p=2, q=3)
    a = check_g1_elliptic(spec, SamplePlan(seed=7), q_param=2.0).to_dict()
    b = check_g1_elliptic(spec, SamplePlan(seed=7), q_param=2.0).to_dict()
    assert a == b


def test_classification_examples():
    c = classify_example(GrowthSpec(Family.G1, p=1.4, q=1.8))
    assert (c.regime, c.mu3, c.mu4, c.delta, c.b0) == ("singular", 2 - 1.8, 2 - 1.4, 0.0, 0.0)
    c = classify_example(GrowthSpec(Family.G4, p=1.5, q=2.5))
    assert c.regime == "singular" and c.mu3 == 0.25 and c.mu4 == 0.5
    assert c.b0 == pytest.approx(math.exp(4.0) - 1, rel=1e-15)
    a_spec = GrowthSpec(Family.G3, p=2.5, q=3.5, a_field=RadialField(1.0, 0.5, (0.5, 0.5), 0.25),
                        a0=1.0, alpha=0.5, x0=(0.5, 0.5))
    c = classify_example(a_spec)
    assert c.regime == "degenerate"
    assert c.mu1 == pytest.approx(0.75) and c.delta == pytest.approx(0.5)
    assert c.b0 == pytest.approx((2.0 * (3.5 + 2 - 5) / 1.5) ** 1.0, rel=1e-15)
    # a0 R^alpha = a(x0)/2 = 1/8  =>  R = 1/64
    assert c.R == pytest.approx(1 / 64, rel=1e-10)


def test_classification_inconclusive_is_not_a_guess():
    c = classify_example(GrowthSpec(Family.G1, p=2, q=2))
    assert c.regime == "inconclusive"
    assert c.apply(GrowthSpec(Family.G1, p=2, q=2)) == GrowthSpec(Family.G1, p=2, q=2)


# lambda admissibility ----------------------------------------------------

def test_lambda_zero_admissible_everywhere():
    lam = LambdaSpec()
    rep = check_lambda_elliptic(lam, 1.0, 1.0, 0.5, 1e-12)
    assert rep.overall is Verdict.HOLDS
    assert check_lambda_parabolic_degenerate(lam, 1.0, 1.0, 0.5, 0.5, 1e-12).overall is Verdict.HOLDS
    assert check_lambda_parabolic_singular(lam, 1.0, 1.0, 0.5, 0.5, 0.5).overall is Verdict.HOLDS


def test_lambda_zero_partial_integral_oracle():
    rep = check_lambda_elliptic(LambdaSpec(), 1.0, 1.0, 0.5, 1e-12)
    d = rep.divergence
    # int exp(-c) dr/r over [r_min, rho0] with the check's own truncation
    for part in d["partials"]:
        assert part["value"] == pytest.approx(math.exp(-1.0) * math.log(0.5 / part["r_min"]), rel=1e-8)
    assert d["partial"] == pytest.approx(math.exp(-1.0) * math.log(0.5 / 1e-12), rel=1e-8)
    assert d["growth_exponent"] == pytest.approx(1.0, abs=1e-9)


def test_triple_log_half_over_beta_admissible():
    for beta in (1.0, 2.0):
        lam = LambdaSpec(LambdaFamily.TRIPLE_LOG, 0.5 / beta)
        assert check_lambda_elliptic(lam, 1.0, beta, 0.03, 1e-12).overall is Verdict.HOLDS
        assert check_lambda_parabolic_degenerate(lam, 1.0, beta, 0.5, 0.03, 1e-12).overall is Verdict.HOLDS


def test_triple_log_monotone_in_L():
    for L in (0.5, 0.25, 0.1):
        lam = LambdaSpec(LambdaFamily.TRIPLE_LOG, L)
        assert check_lambda_elliptic(lam, 1.0, 1.0, 0.03, 1e-12).overall is Verdict.HOLDS


def test_triple_log_large_L_doubling_fails():
    lam = LambdaSpec(LambdaFamily.TRIPLE_LOG, 10.0)
    rep = check_lambda_parabolic_degenerate(lam, 1.0, 1.0, 0.5, 0.03, 1e-12)
    assert rep.doubling["verdict"] == "violated"
    assert rep.overall is Verdict.VIOLATED


def test_power_Lambda_fails_vanishing_limit():
    lam = LambdaSpec(LambdaFamily.SINGLE_LOG, 1.0)
    rep = check_lambda_elliptic(lam, 1.0, 1.0, 0.5, 1e-12)
    assert rep.vanishing["verdict"] == "violated"
    # oracle: r exp(c r^-1) increases as r decreases on the tail
    vals = [r * math.exp(1.0 / r) for r in (0.1, 0.05, 0.02)]
    assert vals == sorted(vals)


def test_quad_log_singular_admissible_with_remark():
    lam = LambdaSpec(LambdaFamily.QUAD_LOG, 0.5)
    rep = check_lambda_parabolic_singular(lam, 1.0, 1.0, 0.5, 0.5, LogRadius(4, 30.0))
    assert rep.overall is Verdict.HOLDS
    assert rep.remark["first_step_ok"] and rep.remark["chain_ok"] and rep.remark["explicit_chain_ok"]


def test_lambda_domain_usage_error():
    lam = LambdaSpec(LambdaFamily.TRIPLE_LOG, 0.5)
    with pytest.raises(UsageError):
        check_lambda_elliptic(lam, 1.0, 1.0, 0.5, 1e-12)

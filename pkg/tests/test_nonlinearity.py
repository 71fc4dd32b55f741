import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from singtm.mesh import DomainSpec
from singtm.nonlinearity import (CheckConstants, NonlinearitySpec, ProblemSpec,
                                 beta_probe, check_hypotheses, threshold_1_8,
                                 threshold_1_10, threshold_1_13)

ALPHA = 4 * math.pi


def spec(family="rational", **kw):
    kw.setdefault("beta0", 1.0)
    return NonlinearitySpec(family=family, alpha=ALPHA, **kw)


def test_h_examples():
    assert spec().h(1.0) == pytest.approx(0.5, abs=1e-15)
    for fam, kw in [("rational", {}), ("sign_perturbed", {"nu": 3.0}),
                    ("shifted_quadratic", {"a": 6.0})]:
        assert spec(fam, **kw).h(0.0) == 0.0
    # sign change near zero once the perturbation dominates: h ~ (beta0 - nu) t
    s = spec("sign_perturbed", nu=3.0)
    assert s.h(0.01) < 0.0
    assert s.h(5.0) > 0.0


def test_problem_spec_criticality_flag():
    dom = DomainSpec.disk(1.0)
    assert ProblemSpec(alpha=4 * math.pi, gamma=0.0, domain=dom).critical
    assert ProblemSpec(alpha=2 * math.pi, gamma=1.0, domain=dom).critical
    assert not ProblemSpec(alpha=5 * math.pi, gamma=0.0, domain=dom).critical
    with pytest.raises(ValueError):
        ProblemSpec(alpha=0.0, gamma=0.0, domain=dom)
    with pytest.raises(ValueError):
        ProblemSpec(alpha=1.0, gamma=2.0, domain=dom)


def test_G_zero_and_closed_form_vs_quadrature():
    for fam, kw in [("rational", {}), ("sign_perturbed", {"nu": 3.0}),
                    ("shifted_quadratic", {"a": 6.0})]:
        s = spec(fam, **kw)
        assert s.G(0.0) == 0.0
        for t in (0.5, 1.0, 2.0):
            assert s.G(t) == pytest.approx(s.G_quad(t), rel=1e-9)


def test_shifted_quadratic_term_by_term():
    s = spec("shifted_quadratic", a=6.0)
    rat = spec("rational")
    t = 0.1
    assert s.G(t) == pytest.approx(0.5 * 6.0 * t * t + rat.G(t), rel=1e-12)


@given(t=st.floats(-6.0, 6.0))
@settings(max_examples=100, deadline=None)
def test_G_even(t):
    for fam, kw in [("rational", {}), ("sign_perturbed", {"nu": 2.0}),
                    ("shifted_quadratic", {"a": 3.0})]:
        s = spec(fam, **kw)
        a, b = s.G(t), s.G(-t)
        if math.isfinite(a):
            assert a == pytest.approx(b, abs=1e-10 * max(1.0, abs(a)))


def test_dG_matches_he_by_finite_differences():
    for fam, kw in [("rational", {}), ("sign_perturbed", {"nu": 3.0}),
                    ("shifted_quadratic", {"a": 6.0})]:
        s = spec(fam, **kw)
        for t in (0.3, 1.0, 2.0, 4.0):
            h = 1e-6 * max(1.0, t)
            fd = (s.G(t + h) - s.G(t - h)) / (2 * h)
            assert fd == pytest.approx(s.he(t), rel=1e-5)


def test_dhe_matches_fd():
    s = spec("sign_perturbed", nu=3.0)
    for t in (0.2, 1.1, 3.0):
        h = 1e-6
        fd = (s.he(t + h) - s.he(t - h)) / (2 * h)
        assert fd == pytest.approx(s.dhe(t), rel=1e-4)


def test_overflow_saturation():
    s = spec()
    v, over = s.G_with_flag(8.0)
    assert v == math.inf and over
    he, over = s.he_with_flag(8.0)
    assert he == math.inf and over
    assert s.he(-8.0) == -math.inf
    # finite just below the threshold
    v7, over7 = s.G_with_flag(7.0)
    assert math.isfinite(v7) and not over7


def test_beta_probe_windows():
    lo, hi = beta_probe(spec(), t_max=1000.0)
    assert 0.999 <= lo <= hi <= 1.0
    lo, hi = beta_probe(spec("sign_perturbed", nu=3.0), t_max=1000.0)
    assert 0.999 <= lo <= hi <= 1.0
    lo, hi = beta_probe(spec(beta0=2.0), t_max=1000.0)
    assert 1.999 <= lo <= hi <= 2.0
    with pytest.raises(ValueError):
        beta_probe(spec(), t_max=50.0)


def test_zero_nonlinearity_representation():
    s = spec(beta0=0.0)
    ts = np.linspace(-5, 5, 101)
    assert np.all(s.h(ts) == 0.0)
    assert np.all(s.G(ts) == 0.0)


def test_user_table_family():
    # piecewise-linear odd h supported on [-3, 3]
    knots = [-3.0, -1.0, 0.0, 1.0, 3.0]
    vals = [0.0, -0.5, 0.0, 0.5, 0.0]
    s = NonlinearitySpec(family="user_table", alpha=1.0,
                         table=tuple(zip(knots, vals)))
    assert s.h(1.0) == 0.5
    assert s.h(10.0) == 0.0  # clamped to zero outside the table
    assert s.G(0.0) == 0.0
    assert s.G(2.0) == pytest.approx(s.G_quad(2.0), rel=1e-9)
    assert s.G(1.5) > 0
    with pytest.raises(ValueError):
        NonlinearitySpec(family="user_table", alpha=1.0, table=((0.0, 1.0),))
    with pytest.raises(ValueError):
        NonlinearitySpec(family="user_table", alpha=1.0,
                         table=((1.0, 0.0), (0.0, 1.0)))


def test_user_table_through_checker(problem, eigs_small):
    # finite tables cannot carry t h(t) -> beta0 out to the probe window;
    # the checker must still run and report rather than crash
    knots = np.linspace(-6, 6, 41)
    vals = knots / (1.0 + knots ** 2)  # rational family sampled on a table
    s = NonlinearitySpec(family="user_table", alpha=ALPHA, beta0=1.0,
                         table=tuple(zip(knots, vals)))
    rep = check_hypotheses(problem, s, "1.1",
                           CheckConstants(sigma1=4.5, delta=0.1, t_check=5.0,
                                          grid_points=4000), eigs_small)
    assert rep.record("1.8").satisfied      # declared beta0 is used for thresholds
    assert not rep.record("decay").satisfied  # the clamped tail breaks the probe
    assert rep.record("1.6").indeterminate


def test_family_validation():
    with pytest.raises(ValueError):
        NonlinearitySpec(family="bogus", alpha=1.0)
    with pytest.raises(ValueError):
        NonlinearitySpec(family="rational", alpha=-1.0)
    with pytest.raises(ValueError):
        NonlinearitySpec(family="rational", alpha=1.0, beta0=-1.0)


def test_threshold_arithmetic():
    kappa = 2.0
    assert threshold_1_8(kappa, ALPHA) == pytest.approx(2.0 / ALPHA, abs=1e-15)
    # sigma0 -> 0 reduces the 1.10 bound to kappa/alpha
    assert threshold_1_10(kappa, ALPHA, 0.0) == pytest.approx(kappa / ALPHA, abs=1e-15)
    # branch boundary continuity at sigma0 = kappa log 2: e^{s/k} = 2, both give 2 * 2k/a
    s_star = kappa * math.log(2.0)
    lo = threshold_1_10(kappa, ALPHA, s_star * (1 - 1e-12))
    hi = threshold_1_10(kappa, ALPHA, s_star * (1 + 1e-12))
    assert lo == pytest.approx(hi, rel=1e-9)
    # spec'd example: sigma0 = 3, kappa = 2 lies in the second branch
    assert threshold_1_10(2.0, ALPHA, 3.0) == pytest.approx(
        (4.0 / ALPHA) * math.exp(1.5), rel=1e-14)
    assert threshold_1_13(2.0, ALPHA, 0.5, 0.05) == pytest.approx(
        (4.0 / ALPHA) * math.exp(0.1), rel=1e-14)
    with pytest.raises(ValueError):
        threshold_1_13(2.0, ALPHA, 0.0, 1.0)


@pytest.fixture(scope="module")
def problem():
    return ProblemSpec(alpha=ALPHA, gamma=0.0, domain=DomainSpec.disk(1.0))


def test_theorem_1_1_canonical(problem, eigs_small):
    rep = check_hypotheses(problem, spec(), "1.1",
                           CheckConstants(sigma1=4.5, delta=0.1), eigs_small)
    assert rep.satisfied
    assert rep.record("1.6").satisfied
    assert not rep.record("1.6").indeterminate  # analytic tail for this family
    assert rep.record("1.7").satisfied
    assert rep.record("1.8").satisfied
    assert rep.record("1.8").rhs == pytest.approx(2.0 / ALPHA, rel=1e-12)
    assert rep.largest_delta is not None and rep.largest_delta > 0.1


def test_theorem_1_1_fails_below_beta_threshold(problem, eigs_small):
    rep = check_hypotheses(problem, spec(beta0=0.1), "1.1",
                           CheckConstants(sigma1=4.5, delta=0.1), eigs_small)
    assert not rep.satisfied
    assert not rep.record("1.8").satisfied


def test_sign_perturbed_fails_1_6_passes_1_9(problem, eigs_small):
    s = spec("sign_perturbed", nu=3.0)
    rep11 = check_hypotheses(problem, s, "1.1",
                             CheckConstants(sigma1=4.5, delta=0.1), eigs_small)
    assert not rep11.record("1.6").satisfied
    assert rep11.record("1.6").margin < -1e-9
    rep12 = check_hypotheses(problem, s, "1.2",
                             CheckConstants(sigma0=3.0, sigma1=4.5, delta=0.1), eigs_small)
    assert rep12.record("1.9").satisfied
    assert not rep12.record("1.9").indeterminate  # analytic bound with sigma0 = nu
    # the 1.10 verdict matches direct arithmetic: fails at beta0=1, passes at 2
    assert not rep12.record("1.10").satisfied
    assert rep12.record("1.10").rhs == pytest.approx(1.426565937890448, rel=1e-10)
    s2 = spec("sign_perturbed", beta0=2.0, nu=3.0)
    rep2 = check_hypotheses(problem, s2, "1.2",
                            CheckConstants(sigma0=3.0, sigma1=4.5, delta=0.1), eigs_small)
    assert rep2.satisfied


def test_theorem_1_3_with_shifted_family(problem, eigs_small):
    lam1 = eigs_small[0].lam
    s = spec("shifted_quadratic", a=lam1 + 0.5)
    rep = check_hypotheses(problem, s, "1.3",
                           CheckConstants(sigma0=0.5, sigma1=4.5, delta=0.1, k=2,
                                          c_user=0.05), eigs_small)
    assert rep.satisfied
    assert rep.record("1.11").satisfied
    assert rep.record("1.12").satisfied
    assert rep.record("1.13").satisfied


def test_checker_validation(problem, eigs_small):
    with pytest.raises(ValueError):
        check_hypotheses(problem, spec(), "1.4", CheckConstants(sigma1=1.0), eigs_small)
    with pytest.raises(ValueError):
        check_hypotheses(problem, spec(), "1.1", CheckConstants(sigma1=0.0), eigs_small)
    with pytest.raises(ValueError):
        check_hypotheses(problem, spec(), "1.3",
                         CheckConstants(sigma0=0.5, sigma1=1.0, k=2, c_user=None), eigs_small)
    with pytest.raises(ValueError):
        check_hypotheses(problem, spec(), "1.3",
                         CheckConstants(sigma0=0.5, sigma1=1.0, k=1, c_user=1.0), eigs_small)
    with pytest.raises(ValueError):
        check_hypotheses(problem, spec(), "1.1", CheckConstants(sigma1=1.0), [])


def test_report_serializes(problem, eigs_small):
    rep = check_hypotheses(problem, spec(), "1.1",
                           CheckConstants(sigma1=4.5, delta=0.1), eigs_small)
    d = rep.to_dict()
    import json

    json.dumps(d)
    assert d["theorem"] == "1.1"
    assert d["constants"]["kappa"] == pytest.approx(2.0)

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from singtm.mesh import DomainSpec, build_mesh, refine, kappa_constant
from singtm.moser import (criticality_probe, critical_inner_constant,
                          inner_disk_exponential, interpolate_moser,
                          log_inner_disk_exponential, moser_grad_norm,
                          moser_grad_norm_exact, moser_integral_first,
                          moser_integral_second, moser_radial, moser_value)
from singtm.quadrature import radial_integrate


def test_value_examples():
    assert moser_value(np.zeros(2), 2, 1.0) == pytest.approx(
        math.sqrt(math.log(2) / (2 * math.pi)), abs=1e-15)
    assert moser_value(np.array([1.0, 0.0]), 2, 1.0) == 0.0
    assert moser_value(np.array([3.0, -4.0]), 2, 1.0) == 0.0


@given(j=st.integers(2, 4096), d=st.floats(0.1, 5.0))
@settings(max_examples=60, deadline=None)
def test_continuity_at_breakpoints(j, d):
    lj = math.log(j)
    inner = math.sqrt(lj / (2 * math.pi))
    # just inside / outside the inner plateau
    eps = 1e-12 * d
    assert moser_radial(d / j - eps, j, d) == pytest.approx(inner, rel=1e-9)
    assert moser_radial(d / j + eps, j, d) == pytest.approx(inner, rel=1e-9)
    # vanishes continuously at the outer radius
    assert abs(moser_radial(d * (1 - 1e-12), j, d)) < 1e-10


def test_continuity_on_radius_sweep():
    rs = np.linspace(1e-6, 1.2, 1000)
    vals = moser_radial(rs, 3, 1.0)
    jumps = np.abs(np.diff(vals))
    assert jumps.max() < 0.05  # no branch mismatch spikes


@pytest.mark.parametrize("j", [2, 4, 16, 64])
@pytest.mark.parametrize("gamma", [0.0, 0.5, 1.0, 1.5])
def test_closed_forms_match_radial_quadrature(j, gamma):
    d = 1.0
    i1 = moser_integral_first(j, d, gamma)
    i1q = radial_integrate(lambda r: moser_radial(r, j, d), d, gamma, breakpoints=(d / j,))
    assert i1 == pytest.approx(i1q, rel=1e-8)
    i2 = moser_integral_second(j, d, gamma)
    i2q = radial_integrate(lambda r: moser_radial(r, j, d) ** 2, d, gamma, breakpoints=(d / j,))
    assert i2 == pytest.approx(i2q, rel=1e-8)


def test_integral_examples():
    assert moser_integral_first(2, 1.0, 0.0) == pytest.approx(0.5645188858419393, rel=1e-12)
    assert moser_integral_first(2, 1.0, 1.0) == pytest.approx(1.505383695578505, rel=1e-12)
    assert moser_integral_second(2, 1.0, 0.0) == pytest.approx(0.1455053201666806, rel=1e-12)


def test_first_integral_decreasing_in_j():
    vals = [moser_integral_first(j, 1.0, 0.0) for j in (2, 4, 8, 16, 64, 256, 1024)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 0.25  # decays like 1 / sqrt(log j)


def test_second_integral_bounded_by_kappa_expression():
    # the bound used by the linking threshold estimate:
    # integral <= 1 / (kappa (2 - gamma) log j)
    for j in (2, 4, 16, 64):
        for gamma in (0.0, 0.5, 1.0, 1.5):
            for d in (0.5, 1.0, 2.0):
                kappa = kappa_constant(d, gamma)
                bound = 1.0 / (kappa * (2.0 - gamma) * math.log(j))
                assert moser_integral_second(j, d, gamma) <= bound * (1 + 1e-12)


def test_grad_norm_exact_is_one():
    for j in (2, 5, 64, 1024):
        for d in (0.3, 1.0, 2.0):
            assert moser_grad_norm_exact(j, d) == pytest.approx(1.0, abs=1e-10)


def test_grad_norm_radial_quadrature_is_one():
    for j in (2, 16):
        lj = math.log(j)

        def grad_sq(r, j=j, lj=lj):
            return 1.0 / (2 * math.pi * lj * r * r) if 1.0 / j < r < 1.0 else 0.0

        val = radial_integrate(grad_sq, 1.0, 0.0, breakpoints=(1.0 / j,))
        assert val == pytest.approx(1.0, abs=1e-10)


def test_interpolant_norm_converges():
    mesh = build_mesh(DomainSpec.disk(1.0), 0.1)
    errs = []
    for _ in range(3):
        errs.append(abs(moser_grad_norm(2, 1.0, mesh) - 1.0))
        mesh = refine(mesh)
    assert errs[0] < 0.05
    # two refinements cut the error by at least 2x
    assert errs[2] <= errs[0] / 2.0


def test_interpolant_norm_converges_unaligned():
    # j = 3: the inner plateau edge never aligns with mesh rings
    mesh = build_mesh(DomainSpec.disk(1.0), 0.1)
    errs = []
    for _ in range(3):
        errs.append(abs(moser_grad_norm(3, 1.0, mesh) - 1.0))
        mesh = refine(mesh)
    assert errs[2] <= errs[0] / 2.0


def test_interpolate_requires_covering_mesh():
    mesh = build_mesh(DomainSpec.disk(1.0), 0.25)
    with pytest.raises(ValueError):
        interpolate_moser(2, 1.5, mesh)


def test_inner_disk_exponential_collapse():
    # at t0 = sqrt(4 pi (1 - gamma/2)/alpha) the j-dependence cancels exactly
    for gamma in (0.0, 0.5, 1.0):
        for alpha in (math.pi, 4 * math.pi):
            t0 = math.sqrt(4 * math.pi * (1 - gamma / 2) / alpha)
            expect = critical_inner_constant(1.0, gamma)
            for j in (2, 8, 4096):
                assert inner_disk_exponential(t0, j, 1.0, gamma, alpha) == pytest.approx(
                    expect, rel=1e-12)
    assert inner_disk_exponential(1.0, 8, 1.0, 0.0, 4 * math.pi) == pytest.approx(
        2 * math.pi * 8.0 ** (2.0 - 2.0) / 2.0, rel=1e-12)


def test_inner_disk_exponential_quadrature_cross_check():
    t, j, gamma, alpha = 0.9, 4, 0.5, 4 * math.pi
    d = 1.0
    peak = math.sqrt(math.log(j) / (2 * math.pi))

    def integrand(r):
        return math.exp(alpha * t * t * peak * peak)

    oracle = radial_integrate(integrand, d / j, gamma)
    assert inner_disk_exponential(t, j, d, gamma, alpha) == pytest.approx(oracle, rel=1e-6)


def test_inner_disk_exponential_overflow_sentinel():
    v = inner_disk_exponential(30.0, 4096, 1.0, 0.0, 4 * math.pi)
    assert v == math.inf
    assert math.isfinite(log_inner_disk_exponential(30.0, 4096, 1.0, 0.0, 4 * math.pi))


def test_criticality_probe_critical_bounded():
    js = [2 ** k for k in range(1, 9)]
    probe = criticality_probe(js, 4 * math.pi, 0.0)
    assert probe.critical
    assert probe.baseline == pytest.approx(math.pi, rel=1e-15)
    assert probe.max_value() < 16.0


def test_criticality_probe_supercritical_grows():
    js = [2 ** k for k in range(1, 13)]
    probe = criticality_probe(js, 5 * math.pi, 0.0)
    assert not probe.critical
    assert probe.monotone_increasing()
    # blows through any bound the critical branch respects
    assert probe.max_value() > 100.0


def test_validation():
    with pytest.raises(ValueError):
        moser_radial(0.5, 1, 1.0)
    with pytest.raises(ValueError):
        moser_integral_first(2, 1.0, 2.0)
    with pytest.raises(ValueError):
        inner_disk_exponential(1.0, 2, 1.0, 0.0, -1.0)

import math

import numpy as np
import pytest

from singtm.energy import EnergyModel, energy, h1_gradient, residual
from singtm.fields import DiscreteField
from singtm.mesh import DomainSpec, build_mesh, refine
from singtm.moser import interpolate_moser, moser_integral_second
from singtm.nonlinearity import NonlinearitySpec, ProblemSpec

ALPHA = 4 * math.pi

FAMILIES = [("rational", {}), ("sign_perturbed", {"nu": 3.0}),
            ("shifted_quadratic", {"a": 6.0})]


@pytest.fixture(scope="module")
def tiny_model():
    dom = DomainSpec.disk(1.0)
    mesh = refine(build_mesh(dom, 0.34))
    prob = ProblemSpec(alpha=ALPHA, gamma=0.0, domain=dom)
    nl = NonlinearitySpec(family="rational", alpha=ALPHA, beta0=1.0)
    return EnergyModel(mesh, prob, nl)


def _model(mesh, family, kw, gamma=0.0):
    dom = DomainSpec.disk(1.0)
    prob = ProblemSpec(alpha=ALPHA, gamma=gamma, domain=dom)
    nl = NonlinearitySpec(family=family, alpha=ALPHA, beta0=1.0, **kw)
    return EnergyModel(mesh, prob, nl)


def test_energy_zero_field(tiny_model):
    ev = tiny_model.energy(tiny_model.zero())
    assert ev.total == 0.0 and ev.quadratic == 0.0 and ev.potential == 0.0
    assert not ev.overflow
    r, over = tiny_model.residual(tiny_model.zero())
    assert np.linalg.norm(r) == 0.0 and not over


def test_quadratic_part_scaling(tiny_model):
    rng = np.random.default_rng(5)
    u = DiscreteField(tiny_model.mesh, rng.standard_normal(len(tiny_model.mesh.free_vertices)))
    e1 = tiny_model.energy(u).quadratic
    e2 = tiny_model.energy(2.0 * u).quadratic
    assert e2 == pytest.approx(4.0 * e1, rel=1e-12)


def test_even_symmetry(tiny_model):
    rng = np.random.default_rng(6)
    for fam, kw in FAMILIES:
        model = _model(tiny_model.mesh, fam, kw)
        u = DiscreteField(model.mesh, 0.5 * rng.standard_normal(len(model.mesh.free_vertices)))
        assert model.energy(u).total == pytest.approx(model.energy(-1.0 * u).total, abs=1e-10)


def test_residual_contraction_identity(tiny_model):
    rng = np.random.default_rng(2)
    for fam, kw in FAMILIES:
        model = _model(tiny_model.mesh, fam, kw)
        u = DiscreteField(model.mesh, 0.4 * rng.standard_normal(len(model.mesh.free_vertices)))
        r, _ = model.residual(u)
        lhs = float(r @ u.values)
        norm2 = float(u.values @ (model.forms.K @ u.values))
        nonlin = model.wq.integrate_of_field(u, func=lambda s: s * model.nl.he(s))
        assert lhs == pytest.approx(norm2 - nonlin, abs=1e-10 * max(1.0, abs(lhs)))


def test_gradient_finite_difference(tiny_model):
    rng = np.random.default_rng(0)
    n = len(tiny_model.mesh.free_vertices)
    for fam, kw in FAMILIES:
        model = _model(tiny_model.mesh, fam, kw)
        for _ in range(10):
            u_ = rng.standard_normal(n)
            u_ /= model.forms.norm_K(u_)
            v_ = rng.standard_normal(n)
            v_ /= model.forms.norm_K(v_)
            u, v = DiscreteField(model.mesh, u_), DiscreteField(model.mesh, v_)
            eps = 1e-4
            fd = (model.energy(u + eps * v).total - model.energy(u + (-eps) * v).total) / (2 * eps)
            r, _ = model.residual(u)
            rv = float(r @ v_)
            assert fd == pytest.approx(rv, rel=1e-5)


def test_h1_gradient_identities(tiny_model):
    forms = tiny_model.forms
    n = forms.n_free
    rng = np.random.default_rng(9)
    g = h1_gradient(np.zeros(n), forms)
    assert np.linalg.norm(g.values) == 0.0
    u = rng.standard_normal(n)
    g = h1_gradient(forms.K @ u, forms)
    assert np.allclose(g.values, u, atol=1e-8)
    r = rng.standard_normal(n)
    g = h1_gradient(r, forms)
    assert float(g.values @ (forms.K @ g.values)) == pytest.approx(float(r @ g.values), rel=1e-10)


def test_small_amplitude_expansion():
    # E(t w_j) ~ t^2/2 (1 - (beta0 + a) * integral w_j^2) for small t
    dom = DomainSpec.disk(1.0)
    mesh = refine(refine(build_mesh(dom, 0.125)))
    model = _model(mesh, "shifted_quadratic", {"a": 6.0})
    u = interpolate_moser(4, 1.0, mesh)
    t = 1e-3
    ev = model.energy(t * u)
    norm2 = float(u.values @ (model.forms.K @ u.values))
    mass2 = float(u.values @ (model.forms.M @ u.values))
    predicted = 0.5 * t * t * (norm2 - (1.0 + 6.0) * mass2)
    assert ev.total == pytest.approx(predicted, rel=5e-2)
    # the discrete weighted moment itself approximates the closed form
    assert mass2 == pytest.approx(moser_integral_second(4, 1.0, 0.0), rel=5e-2)


def test_bubble_energy_matches_radial_evaluation():
    # E(t * interpolant) against the mesh-free radial form of the same energy
    from singtm.minimax import ridge_height

    dom = DomainSpec.disk(1.0)
    mesh = refine(refine(build_mesh(dom, 0.125)))
    prob = ProblemSpec(alpha=ALPHA, gamma=0.0, domain=dom)
    nl = NonlinearitySpec(family="rational", alpha=ALPHA, beta0=1.0)
    model = EnergyModel(mesh, prob, nl)
    w = interpolate_moser(2, 1.0, mesh)
    for t in (0.5, 1.0, 1.3):
        fem = model.energy(t * w).total
        rad = ridge_height(t, 2, prob, nl, 1.0)
        assert fem == pytest.approx(rad, rel=1e-4)


def test_overflow_flag_and_barrier(tiny_model):
    n = len(tiny_model.mesh.free_vertices)
    u = DiscreteField(tiny_model.mesh, np.full(n, 12.0))  # alpha u^2 >> 700
    ev = tiny_model.energy(u)
    assert ev.overflow
    assert ev.total == -math.inf and ev.potential == math.inf
    r, over = tiny_model.residual(u)
    assert over


def test_module_level_wrappers(tiny_model):
    prob = tiny_model.problem
    nl = tiny_model.nl
    rng = np.random.default_rng(1)
    u = DiscreteField(tiny_model.mesh, 0.3 * rng.standard_normal(len(tiny_model.mesh.free_vertices)))
    ev = energy(u, prob, nl)
    assert ev.total == pytest.approx(tiny_model.energy(u).total, rel=1e-12)
    r, _ = residual(u, prob, nl)
    r2, _ = tiny_model.residual(u)
    assert np.allclose(r, r2)


def test_mismatched_domain_rejected(tiny_model):
    prob2 = ProblemSpec(alpha=ALPHA, gamma=0.0, domain=DomainSpec.disk(2.0))
    nl = tiny_model.nl
    with pytest.raises(ValueError):
        EnergyModel(tiny_model.mesh, prob2, nl)
    with pytest.raises(ValueError):
        EnergyModel(tiny_model.mesh, tiny_model.problem,
                    NonlinearitySpec(family="rational", alpha=1.0, beta0=1.0))

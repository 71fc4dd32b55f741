import math

import pytest

from singtm.energy import EnergyModel
from singtm.mesh import DomainSpec, build_mesh, refine
from singtm.nonlinearity import NonlinearitySpec, ProblemSpec
from singtm.spectral import assemble, solve_eigs

ALPHA = 4.0 * math.pi


@pytest.fixture(scope="session")
def disk_domain():
    return DomainSpec.disk(1.0)


@pytest.fixture(scope="session")
def mesh_small(disk_domain):
    """1536 triangles; enough to resolve bubbles up to j ~ 16."""
    return refine(build_mesh(disk_domain, 0.125))


@pytest.fixture(scope="session")
def mesh_canonical(disk_domain):
    """6144 triangles; the mesh used for the acceptance solves."""
    return refine(refine(build_mesh(disk_domain, 0.125)))


@pytest.fixture(scope="session")
def problem_canonical(disk_domain):
    return ProblemSpec(alpha=ALPHA, gamma=0.0, domain=disk_domain)


@pytest.fixture(scope="session")
def nl_rational():
    return NonlinearitySpec(family="rational", alpha=ALPHA, beta0=1.0)


@pytest.fixture(scope="session")
def forms_small(mesh_small):
    return assemble(mesh_small, 0.0)


@pytest.fixture(scope="session")
def eigs_small(forms_small):
    return solve_eigs(forms_small, 4)


@pytest.fixture(scope="session")
def forms_canonical(mesh_canonical):
    return assemble(mesh_canonical, 0.0)


@pytest.fixture(scope="session")
def eigs_canonical(forms_canonical):
    return solve_eigs(forms_canonical, 3)


@pytest.fixture(scope="session")
def model_small(mesh_small, problem_canonical, nl_rational, forms_small):
    return EnergyModel(mesh_small, problem_canonical, nl_rational, forms=forms_small)


@pytest.fixture(scope="session")
def model_canonical(mesh_canonical, problem_canonical, nl_rational, forms_canonical):
    return EnergyModel(mesh_canonical, problem_canonical, nl_rational, forms=forms_canonical)

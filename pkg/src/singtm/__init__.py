"""Numerical toolkit for planar elliptic problems with a point-singular weight.

Discretizes -Delta u = h(u) e^{alpha u^2} / |x|^gamma on bounded planar
domains containing the origin, computes the eigenvalues of the weighted
eigenproblem -Delta u = lambda u / |x|^gamma, checks the hypothesis
inequalities of the associated existence theory, and searches for critical
points of the energy functional below the compactness threshold
2*pi*(1 - gamma/2)/alpha via mountain-pass and linking constructions.
"""

__version__ = "0.1.0"

from .mesh import (DomainSpec, Mesh, GeometryConstants, build_mesh, refine,
                   geometry_constants, kappa_constant, save_mesh, load_mesh)
from .fields import DiscreteField
from .quadrature import (QuadratureRule, integrate_weighted, weighted_l2_norm,
                         radial_integrate, weighted_quadrature)
from .spectral import (AssembledForms, SingularEigenpair, SpectralSplit, assemble,
                       assemble_stiffness, solve_eigs, rayleigh_quotient, split)
from .moser import (
    moser_value,
    moser_radial,
    moser_integral_first,
    moser_integral_second,
    moser_grad_norm,
    moser_grad_norm_exact,
    inner_disk_exponential,
    interpolate_moser,
    critical_inner_constant,
    criticality_probe,
    CriticalityProbe,
)
from .nonlinearity import (ProblemSpec, NonlinearitySpec, CheckConstants,
                           ConditionRecord, HypothesisReport, beta_probe,
                           check_hypotheses, threshold_1_8, threshold_1_10,
                           threshold_1_13)
from .energy import EnergyValue, EnergyModel, energy, residual, h1_gradient
from .minimax import (
    RidgeProfile,
    MinimaxResult,
    LinkingSupResult,
    compactness_threshold,
    bubble_peak_scale,
    ridge_height,
    ridge_scan,
    sphere_infimum,
    mountain_pass_endpoint,
    mountain_pass_solve,
    linking_sup,
    linking_descent,
)
from .config import ExperimentConfig, load_config, config_from_dict
from .runner import RunReport, StageError, run_experiment, convergence_table

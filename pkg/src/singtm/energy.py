"""The variational functional E and its derivative on discrete fields.

    E(u) = 1/2 |grad u|^2 - integral G(u) / |x|^gamma
    E'(u) v = integral grad u . grad v - integral v h(u) e^{alpha u^2} / |x|^gamma

The quadratic part uses the assembled stiffness matrix; the nonlinear terms
are integrated with the same singular quadrature point sets as the weighted
mass matrix, with u evaluated by linear interpolation at the quadrature
points.  Keeping one set of points makes the assembled residual the exact
derivative of the discrete energy, which the finite-difference tests rely on.

Overflow policy: a quadrature point with alpha u^2 > 700 sets the overflow
flag and the energy saturates (potential +inf); minimax solvers treat such
iterates as barriers and reject them in line searches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .fields import DiscreteField
from .mesh import Mesh
from .nonlinearity import NonlinearitySpec, ProblemSpec, OVERFLOW_EXPONENT
from .quadrature import QuadratureRule, weighted_quadrature
from .spectral import AssembledForms, assemble

__all__ = ["EnergyValue", "EnergyModel", "energy", "residual", "h1_gradient"]


@dataclass(frozen=True)
class EnergyValue:
    total: float
    quadratic: float
    potential: float
    overflow: bool


class EnergyModel:
    """Binds a mesh, a problem, and a nonlinearity; evaluates E, E', and the
    Newton matrix with shared assembled forms and quadrature caches."""

    def __init__(self, mesh: Mesh, problem: ProblemSpec, nl: NonlinearitySpec,
                 rule: QuadratureRule | None = None, forms: AssembledForms | None = None):
        if mesh.domain is not None and mesh.domain != problem.domain:
            raise ValueError("mesh domain does not match problem domain")
        if abs(nl.alpha - problem.alpha) > 1e-12 * max(1.0, problem.alpha):
            raise ValueError("nonlinearity alpha differs from problem alpha")
        self.mesh = mesh
        self.problem = problem
        self.nl = nl
        self.forms = forms if forms is not None else assemble(mesh, problem.gamma, rule)
        self.wq = weighted_quadrature(mesh, problem.gamma, self.forms.rule)
        self._blocks = self.wq.field_blocks()
        free = mesh.free_vertices
        self._global_to_free = -np.ones(mesh.n_vertices, dtype=np.int64)
        self._global_to_free[free] = np.arange(len(free))

    # -- basic geometry -------------------------------------------------------

    def zero(self) -> DiscreteField:
        return DiscreteField.zero(self.mesh)

    def norm(self, u: DiscreteField) -> float:
        """H^1_0 norm sqrt(u' K u)."""
        return self.forms.norm_K(u)

    def interpolate(self, f) -> DiscreteField:
        return DiscreteField.interpolate(f, self.mesh)

    def _point_values(self, u: DiscreteField) -> list[np.ndarray]:
        return self.wq.field_values(u)

    # -- energy / residual ------------------------------------------------------

    def energy(self, u: DiscreteField) -> EnergyValue:
        v = u.values
        quad_part = 0.5 * float(v @ (self.forms.K @ v))
        pot = 0.0
        overflow = False
        for b, uq in zip(self._blocks, self._point_values(u)):
            G, over = self.nl.G_with_flag(uq)
            if np.any(over) or np.any(self.nl.alpha * uq * uq > OVERFLOW_EXPONENT):
                overflow = True
                pot = math.inf
                break
            pot += float(b.weights @ G)
        total = quad_part - pot if not overflow else -math.inf
        return EnergyValue(total=total, quadratic=quad_part, potential=pot, overflow=overflow)

    def residual(self, u: DiscreteField) -> tuple[np.ndarray, bool]:
        """Dual vector r_i = (K u)_i - integral phi_i h(u) e^{alpha u^2}/|x|^gamma."""
        r = self.forms.K @ u.values
        nonlin = np.zeros(self.mesh.n_vertices)
        overflow = False
        for b, uq in zip(self._blocks, self._point_values(u)):
            he, over = self.nl.he_with_flag(uq)
            if np.any(over):
                overflow = True
                he = np.where(np.isfinite(he), he, np.sign(he) * 1e308)
            wf = b.weights * he
            for k in range(3):
                np.add.at(nonlin, b.tri_verts[:, k], wf * b.bary[:, k])
        r = r - nonlin[self.mesh.free_vertices]
        return r, overflow

    def h1_gradient(self, r: np.ndarray) -> DiscreteField:
        """Riesz representative: solves K g = r."""
        return DiscreteField(self.mesh, self.forms.solve_K(np.asarray(r, dtype=float)))

    def residual_dual_norm(self, u: DiscreteField) -> float:
        r, _ = self.residual(u)
        g = self.forms.solve_K(r)
        return math.sqrt(max(float(r @ g), 0.0))

    def newton_matrix(self, u: DiscreteField) -> sp.csr_matrix:
        """K - d/du of the nonlinear term: the Jacobian of the residual."""
        rows, cols, vals = [], [], []
        for b, uq in zip(self._blocks, self._point_values(u)):
            dhe = self.nl.dhe(uq)
            dhe = np.where(np.isfinite(dhe), dhe, 0.0)
            contrib = (b.weights * dhe)[:, None, None] * b.bary[:, :, None] * b.bary[:, None, :]
            rows.append(np.repeat(b.tri_verts, 3, axis=1).reshape(-1))
            cols.append(np.tile(b.tri_verts, (1, 3)).reshape(-1))
            vals.append(contrib.reshape(-1))
        n = self.mesh.n_vertices
        A = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(n, n)).tocsr()
        free = self.mesh.free_vertices
        A = A[free][:, free]
        return (self.forms.K - A).tocsr()


# ---------------------------------------------------------------------------
# operation-style wrappers with a small model cache

_models: dict[tuple, EnergyModel] = {}


def get_model(mesh: Mesh, problem: ProblemSpec, nl: NonlinearitySpec,
              rule: QuadratureRule | None = None) -> EnergyModel:
    key = (id(mesh), problem, nl, rule)
    m = _models.get(key)
    if m is None or m.mesh is not mesh:
        m = EnergyModel(mesh, problem, nl, rule)
        _models[key] = m
        if len(_models) > 32:
            _models.pop(next(iter(_models)))
    return m


def energy(u: DiscreteField, problem: ProblemSpec, nl: NonlinearitySpec,
           rule: QuadratureRule | None = None) -> EnergyValue:
    return get_model(u.mesh, problem, nl, rule).energy(u)


def residual(u: DiscreteField, problem: ProblemSpec, nl: NonlinearitySpec,
             rule: QuadratureRule | None = None) -> tuple[np.ndarray, bool]:
    return get_model(u.mesh, problem, nl, rule).residual(u)


def h1_gradient(r: np.ndarray, forms: AssembledForms) -> DiscreteField:
    """Solve K g = r for the descent direction in the H^1_0 metric."""
    return DiscreteField(forms.mesh, forms.solve_K(np.asarray(r, dtype=float)))

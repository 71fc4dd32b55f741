"""Stiffness/weighted-mass assembly and the singular eigenproblem.

Discretizes -Delta u = lambda u / |x|^gamma with homogeneous Dirichlet
conditions using P1 elements: K_ij = integral grad phi_i . grad phi_j (exact
per-element formulas), M_ij = integral phi_i phi_j |x|^{-gamma} (singular
quadrature).  Boundary vertices are eliminated, so both matrices live on the
free vertices and K is symmetric positive definite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import eigh

from .fields import DiscreteField
from .mesh import Mesh
from .quadrature import QuadratureRule, weighted_quadrature

__all__ = [
    "AssembledForms",
    "SingularEigenpair",
    "SpectralSplit",
    "assemble",
    "assemble_stiffness",
    "solve_eigs",
    "rayleigh_quotient",
    "split",
]

_DENSE_LIMIT = 2000


@dataclass(eq=False)
class AssembledForms:
    """K (stiffness) and M (weighted mass) on the free vertices."""

    mesh: Mesh
    gamma: float
    K: sp.csr_matrix
    M: sp.csr_matrix
    rule: QuadratureRule
    _solve_K: object = field(default=None, repr=False)

    @property
    def n_free(self) -> int:
        return self.K.shape[0]

    def solve_K(self, rhs: np.ndarray) -> np.ndarray:
        """Solve K x = rhs with a cached factorization."""
        if self._solve_K is None:
            self._solve_K = spla.factorized(self.K.tocsc())
        return self._solve_K(rhs)

    def norm_K(self, u: DiscreteField | np.ndarray) -> float:
        v = u.values if isinstance(u, DiscreteField) else u
        return math.sqrt(max(float(v @ (self.K @ v)), 0.0))

    def norm_M(self, u: DiscreteField | np.ndarray) -> float:
        v = u.values if isinstance(u, DiscreteField) else u
        return math.sqrt(max(float(v @ (self.M @ v)), 0.0))


def _stiffness_coo(mesh: Mesh):
    """Exact P1 stiffness on all vertices (before boundary elimination)."""
    tris = mesh.triangles
    p = mesh.vertices[tris]
    # edge vectors opposite to each local vertex
    e0 = p[:, 2] - p[:, 1]
    e1 = p[:, 0] - p[:, 2]
    e2 = p[:, 1] - p[:, 0]
    area = 0.5 * (e2[:, 0] * (-e1[:, 1]) - e2[:, 1] * (-e1[:, 0]))
    E = np.stack([e0, e1, e2], axis=1)              # (T, 3, 2)
    local = np.einsum("tia,tja->tij", E, E) / (4.0 * area)[:, None, None]
    rows = np.repeat(tris, 3, axis=1).reshape(-1)
    cols = np.tile(tris, (1, 3)).reshape(-1)
    return rows, cols, local.reshape(-1)


def assemble_stiffness(mesh: Mesh) -> sp.csr_matrix:
    """Stiffness matrix restricted to free vertices."""
    rows, cols, vals = _stiffness_coo(mesh)
    n = mesh.n_vertices
    K = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    free = mesh.free_vertices
    return K[free][:, free].tocsr()


def assemble(mesh: Mesh, gamma: float, rule: QuadratureRule | None = None) -> AssembledForms:
    if not 0.0 <= gamma < 2.0:
        raise ValueError(f"gamma must lie in [0, 2), got {gamma}")
    areas = mesh.signed_areas()
    if np.any(areas <= 0):
        raise ValueError("mesh contains a degenerate triangle")
    wq = weighted_quadrature(mesh, gamma, rule)
    n = mesh.n_vertices
    rows, cols, vals = [], [], []
    for b in wq.field_blocks():
        contrib = b.weights[:, None, None] * b.bary[:, :, None] * b.bary[:, None, :]
        rows.append(np.repeat(b.tri_verts, 3, axis=1).reshape(-1))
        cols.append(np.tile(b.tri_verts, (1, 3)).reshape(-1))
        vals.append(contrib.reshape(-1))
    M = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n, n)).tocsr()
    free = mesh.free_vertices
    M = M[free][:, free].tocsr()
    M = 0.5 * (M + M.T)  # quadrature is symmetric; enforce exactly
    K = assemble_stiffness(mesh)
    K = 0.5 * (K + K.T)
    return AssembledForms(mesh=mesh, gamma=gamma, K=K.tocsr(), M=M.tocsr(), rule=wq.rule)


@dataclass(eq=False)
class SingularEigenpair:
    """Eigenpair of K u = lambda M u, normalized to unit weighted L2 norm."""

    lam: float
    field: DiscreteField
    index: int


def solve_eigs(forms: AssembledForms, count: int, maxiter: int = 5000) -> list[SingularEigenpair]:
    """The ``count`` smallest eigenpairs, sorted nondecreasing, M-orthonormal."""
    n = forms.n_free
    if count < 1:
        raise ValueError("count must be >= 1")
    if count >= n:
        raise ValueError(f"count={count} too large for {n} free vertices")
    if n <= _DENSE_LIMIT:
        lam, vec = eigh(forms.K.toarray(), forms.M.toarray(),
                        subset_by_index=(0, count - 1))
    else:
        try:
            v0 = np.full(n, 1.0 / math.sqrt(n))  # deterministic start vector
            lam, vec = spla.eigsh(forms.K, k=count, M=forms.M, sigma=0.0,
                                  which="LM", maxiter=maxiter, v0=v0)
        except spla.ArpackNoConvergence as e:
            raise RuntimeError("eigenvalue iteration did not converge") from e
        order = np.argsort(lam)
        lam, vec = lam[order], vec[:, order]
    # re-orthonormalize in the M inner product (guards degenerate clusters)
    vec = _gram_schmidt_M(vec, forms.M)
    pairs = []
    for k in range(count):
        v = vec[:, k]
        if v[np.argmax(np.abs(v))] < 0:  # deterministic sign convention
            v = -v
        pairs.append(SingularEigenpair(lam=float(lam[k]),
                                       field=DiscreteField(forms.mesh, v),
                                       index=k + 1))
    return pairs


def _gram_schmidt_M(vec: np.ndarray, M: sp.csr_matrix) -> np.ndarray:
    out = vec.copy()
    for k in range(out.shape[1]):
        for j in range(k):
            out[:, k] -= (out[:, j] @ (M @ out[:, k])) * out[:, j]
        out[:, k] /= math.sqrt(out[:, k] @ (M @ out[:, k]))
    return out


def rayleigh_quotient(u: DiscreteField | np.ndarray, forms: AssembledForms) -> float:
    v = u.values if isinstance(u, DiscreteField) else np.asarray(u, dtype=float)
    den = float(v @ (forms.M @ v))
    if den <= 0.0:
        raise ValueError("Rayleigh quotient of a zero field")
    return float(v @ (forms.K @ v)) / den


@dataclass(eq=False)
class SpectralSplit:
    """H^1_0 = V + W with V spanned by the first k-1 eigenfields.

    The projector onto V is M-orthogonal; since eigenfields are also
    K-orthogonal, the complement W is K-orthogonal to V as well.
    """

    k: int
    forms: AssembledForms
    basis_V: np.ndarray        # (n_free, k-1), M-orthonormal eigenfields
    lambda_lo: float           # lambda_{k-1}
    lambda_hi: float           # lambda_k

    def project_V(self, u: DiscreteField) -> DiscreteField:
        coef = self.basis_V.T @ (self.forms.M @ u.values)
        return DiscreteField(u.mesh, self.basis_V @ coef)

    def project_W(self, u: DiscreteField) -> DiscreteField:
        return u - self.project_V(u)

    @property
    def dim_V(self) -> int:
        return self.basis_V.shape[1]


def split(pairs: list[SingularEigenpair], k: int, forms: AssembledForms,
          gap_tol: float = 1e-8) -> SpectralSplit:
    """Split at index k; requires a genuine gap lambda_{k-1} < lambda_k."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if len(pairs) < k:
        raise ValueError(f"need at least {k} eigenpairs, got {len(pairs)}")
    lam = [p.lam for p in pairs]
    if lam[k - 1] - lam[k - 2] <= gap_tol * max(1.0, abs(lam[k - 1])):
        raise ValueError(
            f"eigenvalue gap at k={k} below tolerance "
            f"(lambda_{k-1}={lam[k-2]:.8g}, lambda_{k}={lam[k-1]:.8g}); "
            "splitting inside a degenerate cluster is ill-defined")
    basis = np.stack([p.field.values for p in pairs[:k - 1]], axis=1)
    return SpectralSplit(k=k, forms=forms, basis_V=basis,
                         lambda_lo=lam[k - 2], lambda_hi=lam[k - 1])

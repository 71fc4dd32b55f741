"""Independent reference computations used by the tests.

These deliberately avoid the package's own code paths: the eigenvalue oracle
is a 1D radial shooting method, and integral oracles go through raw QUADPACK
calls on explicitly written integrands.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

# frozen outputs of radial_dirichlet_eigenvalue, generated by this module
LAMBDA1_DISK = 5.783185962947081
LAMBDA2_DISK = 14.681970642126323


def radial_dirichlet_eigenvalue(m: int, bracket: tuple[float, float],
                                r0: float = 1e-6, rtol: float = 1e-12) -> float:
    """Shooting method for -u'' - u'/r + m^2 u/r^2 = lam u on (0, 1), u(1) = 0.

    Integrates outward from a series start near r = 0 and bisects the
    boundary value u(1; lam) over the bracket.
    """

    def boundary_value(lam: float) -> float:
        def rhs(r, y):
            u, up = y
            return [up, -up / r + (m * m / (r * r) - lam) * u]

        u0 = r0 ** m * (1.0 - lam * r0 ** 2 / (4.0 * (m + 1)))
        up0 = m * r0 ** (m - 1) if m > 0 else 0.0
        up0 -= lam * (m + 2) * r0 ** (m + 1) / (4.0 * (m + 1))
        sol = solve_ivp(rhs, (r0, 1.0), [u0, up0], rtol=rtol, atol=1e-300,
                        method="DOP853", dense_output=False)
        return sol.y[0, -1]

    return brentq(boundary_value, *bracket, xtol=1e-11)


def triangle_monomial_integral(a: int, b: int) -> float:
    """integral of x^a y^b over the reference triangle {x, y >= 0, x + y <= 1}:
    a! b! / (a + b + 2)!."""
    from math import factorial

    return factorial(a) * factorial(b) / factorial(a + b + 2)


def p1_gradient_energy(mesh, values_full: np.ndarray) -> float:
    """Sum over triangles of |grad u|^2 * area, with the gradient of each
    linear patch computed from the 3-vertex plane fit (independent of the
    assembled stiffness matrix)."""
    total = 0.0
    for tri in mesh.triangles:
        p = mesh.vertices[tri]
        A = np.array([[p[1, 0] - p[0, 0], p[1, 1] - p[0, 1]],
                      [p[2, 0] - p[0, 0], p[2, 1] - p[0, 1]]])
        dv = np.array([values_full[tri[1]] - values_full[tri[0]],
                       values_full[tri[2]] - values_full[tri[0]]])
        grad = np.linalg.solve(A, dv)
        area = 0.5 * abs(np.linalg.det(A))
        total += float(grad @ grad) * area
    return total


def p1_mass_matrix_exact(mesh):
    """Standard (unweighted) P1 mass matrix on the free vertices via the
    closed form: M_T = area/12 * [[2,1,1],[1,2,1],[1,1,2]]."""
    import scipy.sparse as sp

    n = mesh.n_vertices
    local = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0
    rows, cols, vals = [], [], []
    areas = mesh.signed_areas()
    for t, tri in enumerate(mesh.triangles):
        for i in range(3):
            for j in range(3):
                rows.append(tri[i])
                cols.append(tri[j])
                vals.append(areas[t] * local[i, j])
    M = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    free = mesh.free_vertices
    return M[free][:, free]

"""Truncated-logarithm bubble functions and their closed-form integrals.

For j >= 2 and inradius d, the bubble

    w_j(x) = (2 pi)^{-1/2} * { sqrt(log j)                   |x| <= d/j
                             { log(d/|x|) / sqrt(log j)      d/j < |x| < d
                             { 0                             |x| >= d

has unit H^1_0 norm.  The first and second weighted moments over the domain
admit closed forms, as does the exponential integral over the inner disk
|x| <= d/j, which collapses to a j-independent constant at the critical
scaling alpha t^2 / (2 pi) = 2 - gamma.  The probe over a family of j values
separates the bounded (critical) from the unbounded (supercritical) regime of
the weighted exponential functional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import DiscreteField
from .mesh import Mesh
from .spectral import assemble_stiffness

__all__ = [
    "moser_value",
    "moser_radial",
    "moser_integral_first",
    "moser_integral_second",
    "moser_grad_norm",
    "moser_grad_norm_exact",
    "inner_disk_exponential",
    "log_inner_disk_exponential",
    "interpolate_moser",
    "critical_inner_constant",
    "CriticalityProbe",
    "criticality_probe",
]

# exponents above this saturate to +inf instead of overflowing silently
OVERFLOW_EXPONENT = 700.0


def _check_jd(j: int, d: float) -> None:
    if j < 2:
        raise ValueError("bubble index j must be >= 2")
    if d <= 0:
        raise ValueError("inradius d must be positive")


def moser_radial(r, j: int, d: float):
    """Radial profile w_j(r); vectorized in r."""
    _check_jd(j, d)
    r = np.asarray(r, dtype=float)
    lj = math.log(j)
    inner = math.sqrt(lj / (2.0 * math.pi))
    with np.errstate(divide="ignore", invalid="ignore"):
        annulus = np.log(d / np.maximum(r, 1e-300)) / math.sqrt(2.0 * math.pi * lj)
    out = np.where(r <= d / j, inner, np.where(r < d, annulus, 0.0))
    return out if out.shape else float(out)


def moser_value(x, j: int, d: float):
    """w_j at 2D points; accepts a single point or an (n, 2) array."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = x[None, :] if single else x
    r = np.linalg.norm(pts, axis=1)
    v = moser_radial(r, j, d)
    return float(v[0]) if single else v


def moser_integral_first(j: int, d: float, gamma: float) -> float:
    """integral of w_j |x|^{-gamma} = d^{2-g}/(2-g)^2 sqrt(2 pi/log j) (1 - j^{g-2})."""
    _check_jd(j, d)
    if not 0.0 <= gamma < 2.0:
        raise ValueError(f"gamma must lie in [0, 2), got {gamma}")
    a = 2.0 - gamma
    return d ** a / a ** 2 * math.sqrt(2.0 * math.pi / math.log(j)) * (1.0 - j ** (-a))


def moser_integral_second(j: int, d: float, gamma: float) -> float:
    """integral of w_j^2 |x|^{-gamma} = 2 d^{2-g}/((2-g)^3 log j) [1 - ((2-g) log j + 1) j^{g-2}]."""
    _check_jd(j, d)
    if not 0.0 <= gamma < 2.0:
        raise ValueError(f"gamma must lie in [0, 2), got {gamma}")
    a = 2.0 - gamma
    lj = math.log(j)
    return 2.0 * d ** a / (a ** 3 * lj) * (1.0 - (a * lj + 1.0) * j ** (-a))


def moser_grad_norm_exact(j: int, d: float) -> float:
    """H^1_0 norm of the exact bubble: the annulus integral of |grad w_j|^2
    equals log j / log j = 1 identically."""
    _check_jd(j, d)
    lj = math.log(j)
    return math.sqrt(lj / lj)


def interpolate_moser(j: int, d: float, mesh: Mesh) -> DiscreteField:
    """Nodal interpolant of w_j on the mesh (zero on the boundary)."""
    if mesh.inradius_d < d * (1.0 - 1e-9):
        raise ValueError(f"mesh (inradius {mesh.inradius_d}) does not contain the disk of radius {d}")
    return DiscreteField.interpolate(lambda p: moser_value(p, j, d), mesh)


def moser_grad_norm(j: int, d: float, mesh: Mesh) -> float:
    """H^1_0 norm of the nodal interpolant; tends to 1 under refinement."""
    u = interpolate_moser(j, d, mesh)
    K = assemble_stiffness(mesh)
    return math.sqrt(float(u.values @ (K @ u.values)))


def log_inner_disk_exponential(t: float, j: int, d: float, gamma: float, alpha: float) -> float:
    """log of integral over |x| <= d/j of e^{alpha t^2 w_j^2} |x|^{-gamma} dx."""
    _check_jd(j, d)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if not 0.0 <= gamma < 2.0:
        raise ValueError(f"gamma must lie in [0, 2), got {gamma}")
    a = 2.0 - gamma
    return math.log(2.0 * math.pi * d ** a / a) + (alpha * t * t / (2.0 * math.pi) - a) * math.log(j)


def inner_disk_exponential(t: float, j: int, d: float, gamma: float, alpha: float) -> float:
    """Closed form (2 pi d^{2-g}/(2-g)) j^{alpha t^2/(2 pi) - (2-g)}.

    Evaluated in the log domain; exponents above OVERFLOW_EXPONENT return
    +inf rather than raising.
    """
    lg = log_inner_disk_exponential(t, j, d, gamma, alpha)
    if lg > OVERFLOW_EXPONENT:
        return math.inf
    return math.exp(lg)


def critical_inner_constant(d: float, gamma: float) -> float:
    """The j-independent inner-disk value 2 pi d^{2-gamma}/(2-gamma) at the
    critical scaling alpha t^2/(2 pi) = 2 - gamma."""
    if not 0.0 <= gamma < 2.0:
        raise ValueError(f"gamma must lie in [0, 2), got {gamma}")
    return 2.0 * math.pi * d ** (2.0 - gamma) / (2.0 - gamma)


@dataclass(frozen=True)
class CriticalityProbe:
    """S(j) = integral over the disk of e^{alpha w_j^2} |x|^{-gamma} dx."""

    alpha: float
    gamma: float
    d: float
    j_values: tuple[int, ...]
    S_values: tuple[float, ...]
    baseline: float          # critical inner-disk constant 2 pi d^{2-g}/(2-g)
    critical: bool           # alpha/(4 pi) + gamma/2 <= 1

    def monotone_increasing(self) -> bool:
        return all(b > a for a, b in zip(self.S_values, self.S_values[1:]))

    def max_value(self) -> float:
        return max(self.S_values)


def criticality_probe(j_values, alpha: float, gamma: float, d: float = 1.0,
                      rtol: float = 1e-9) -> CriticalityProbe:
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    S = tuple(_probe_single(j, d, gamma, alpha, rtol) for j in j_values)
    return CriticalityProbe(alpha=alpha, gamma=gamma, d=d,
                            j_values=tuple(int(j) for j in j_values), S_values=S,
                            baseline=critical_inner_constant(d, gamma),
                            critical=alpha / (4.0 * math.pi) + gamma / 2.0 <= 1.0 + 1e-12)


def _probe_single(j: int, d: float, gamma: float, alpha: float, rtol: float) -> float:
    """Inner-disk closed form plus adaptive quadrature over the annulus."""
    _check_jd(j, d)
    inner = inner_disk_exponential(1.0, j, d, gamma, alpha)
    lj = math.log(j)
    c = alpha / (2.0 * math.pi * lj)

    def g(r):
        L = math.log(d / r)
        return math.exp(min(c * L * L, OVERFLOW_EXPONENT))

    from scipy.integrate import quad

    val, _ = quad(lambda r: g(r) * r ** (1.0 - gamma), d / j, d,
                  epsrel=rtol, epsabs=0.0, limit=200)
    return inner + 2.0 * math.pi * val

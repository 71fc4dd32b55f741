"""Piecewise-linear fields over the free (interior) vertices of a mesh.

A field stores one coefficient per interior vertex; boundary values are
implicitly zero (homogeneous Dirichlet).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import Mesh

__all__ = ["DiscreteField"]


@dataclass(eq=False)
class DiscreteField:
    mesh: Mesh
    values: np.ndarray
    _full: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.mesh.free_vertices),):
            raise ValueError(
                f"field length {self.values.shape} does not match "
                f"{len(self.mesh.free_vertices)} free vertices")

    @classmethod
    def zero(cls, mesh: Mesh) -> "DiscreteField":
        return cls(mesh, np.zeros(len(mesh.free_vertices)))

    @classmethod
    def interpolate(cls, f, mesh: Mesh) -> "DiscreteField":
        """Nodal interpolation of a callable f(points (n, 2)) -> (n,)."""
        pts = mesh.vertices[mesh.free_vertices]
        return cls(mesh, np.asarray(f(pts), dtype=float))

    def full_values(self) -> np.ndarray:
        """Values at every mesh vertex, zeros on the boundary."""
        if self._full is None:
            full = np.zeros(self.mesh.n_vertices)
            full[self.mesh.free_vertices] = self.values
            self._full = full
        return self._full

    def copy(self) -> "DiscreteField":
        return DiscreteField(self.mesh, self.values.copy())

    def __add__(self, other: "DiscreteField") -> "DiscreteField":
        return DiscreteField(self.mesh, self.values + other.values)

    def __sub__(self, other: "DiscreteField") -> "DiscreteField":
        return DiscreteField(self.mesh, self.values - other.values)

    def __mul__(self, s: float) -> "DiscreteField":
        return DiscreteField(self.mesh, self.values * float(s))

    __rmul__ = __mul__

    def __neg__(self) -> "DiscreteField":
        return DiscreteField(self.mesh, -self.values)

"""Triangulations of planar domains with the origin as a distinguished vertex.

Supported domains are disks centered at the origin and simple CCW polygons
containing the origin strictly inside.  The origin is always a mesh vertex so
that the weight singularity of |x|^{-gamma} sits at a node; the quadrature
module integrates the star of origin triangles in polar coordinates.

Disk meshes are built from concentric rings (ring k holds 6k vertices), which
keeps origin-adjacent triangles well shaped.  Uniform refinement snaps new
boundary midpoints back to the circle so eigenvalues and areas converge to
the true disk values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "DomainSpec",
    "Mesh",
    "GeometryConstants",
    "build_mesh",
    "refine",
    "geometry_constants",
    "save_mesh",
    "load_mesh",
    "kappa_constant",
]

_EPS = 1e-12


@dataclass(frozen=True)
class DomainSpec:
    """A disk of given radius centered at the origin, or a simple CCW polygon."""

    kind: str  # "disk" | "polygon"
    radius: float | None = None
    vertices: tuple[tuple[float, float], ...] | None = None

    @classmethod
    def disk(cls, radius: float) -> "DomainSpec":
        if radius <= 0:
            raise ValueError(f"disk radius must be positive, got {radius}")
        return cls(kind="disk", radius=float(radius))

    @classmethod
    def polygon(cls, vertices) -> "DomainSpec":
        verts = tuple((float(x), float(y)) for x, y in vertices)
        _validate_polygon(np.asarray(verts, dtype=float))
        return cls(kind="polygon", vertices=verts)

    def vertex_array(self) -> np.ndarray:
        if self.vertices is None:
            raise ValueError("not a polygon domain")
        return np.asarray(self.vertices, dtype=float)

    def to_dict(self) -> dict:
        if self.kind == "disk":
            return {"kind": "disk", "radius": self.radius}
        return {"kind": "polygon", "vertices": [list(v) for v in self.vertices]}

    @classmethod
    def from_dict(cls, d: dict) -> "DomainSpec":
        if d["kind"] == "disk":
            return cls.disk(d["radius"])
        if d["kind"] == "polygon":
            return cls.polygon(d["vertices"])
        raise ValueError(f"unknown domain kind {d['kind']!r}")


@dataclass(eq=False)
class Mesh:
    """Conforming triangulation with the origin as an interior vertex.

    ``vertices`` is (n, 2), ``triangles`` (m, 3) with CCW orientation,
    ``boundary`` a boolean flag per vertex.  ``inradius_d`` is the distance
    from the origin to the boundary (the radius for disks, the minimum
    origin-to-edge distance for polygons).
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary: np.ndarray
    origin_vertex: int
    inradius_d: float
    refinement_level: int = 0
    domain: DomainSpec | None = None
    _free: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=float)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int64)
        self.boundary = np.ascontiguousarray(self.boundary, dtype=bool)
        areas = self.signed_areas()
        if np.any(areas <= 0):
            raise ValueError("mesh contains a non-positively-oriented or degenerate triangle")
        o = self.vertices[self.origin_vertex]
        if not (abs(o[0]) < _EPS and abs(o[1]) < _EPS):
            raise ValueError("origin_vertex does not sit at (0, 0)")
        if self.boundary[self.origin_vertex]:
            raise ValueError("origin vertex must be interior")
        if self._free is None:
            self._free = np.flatnonzero(~self.boundary)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def free_vertices(self) -> np.ndarray:
        """Indices of interior (non-Dirichlet) vertices."""
        return self._free

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        return 0.5 * ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                      - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))

    def edge_lengths(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        return np.stack([
            np.linalg.norm(p[:, 1] - p[:, 0], axis=1),
            np.linalg.norm(p[:, 2] - p[:, 1], axis=1),
            np.linalg.norm(p[:, 0] - p[:, 2], axis=1),
        ], axis=1)

    def max_edge_length(self) -> float:
        return float(self.edge_lengths().max())

    def origin_triangles(self) -> np.ndarray:
        """Indices of triangles having the origin as a vertex."""
        return np.flatnonzero(np.any(self.triangles == self.origin_vertex, axis=1))

    def boundary_edges(self) -> np.ndarray:
        """Edges (i, j) that belong to exactly one triangle."""
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        key = np.sort(e, axis=1)
        _, idx, counts = np.unique(key, axis=0, return_index=True, return_counts=True)
        return key[idx[counts == 1]]


@dataclass(frozen=True)
class GeometryConstants:
    """Inradius at the origin and the derived constant kappa."""

    d: float
    kappa: float
    gamma: float


def kappa_constant(d: float, gamma: float) -> float:
    """kappa = (2 - gamma)^2 / (2 d^{2 - gamma})."""
    if not 0.0 <= gamma < 2.0:
        raise ValueError(f"gamma must lie in [0, 2), got {gamma}")
    if d <= 0:
        raise ValueError("inradius must be positive")
    return (2.0 - gamma) ** 2 / (2.0 * d ** (2.0 - gamma))


def geometry_constants(mesh: Mesh, gamma: float) -> GeometryConstants:
    return GeometryConstants(d=mesh.inradius_d, kappa=kappa_constant(mesh.inradius_d, gamma), gamma=gamma)


# ---------------------------------------------------------------------------
# construction


def build_mesh(spec: DomainSpec, target_h: float) -> Mesh:
    """Triangulate the domain with maximum edge length <= 2 * target_h."""
    if target_h <= 0:
        raise ValueError("target_h must be positive")
    if spec.kind == "disk":
        mesh = _disk_mesh(spec.radius, target_h)
    elif spec.kind == "polygon":
        mesh = _polygon_mesh(spec.vertex_array(), target_h)
    else:
        raise ValueError(f"unknown domain kind {spec.kind!r}")
    mesh.domain = spec
    return mesh


def _disk_mesh(radius: float, target_h: float) -> Mesh:
    n = max(2, math.ceil(radius / target_h))
    verts = [(0.0, 0.0)]
    ring_start = [0]
    for k in range(1, n + 1):
        ring_start.append(len(verts))
        r = radius * k / n
        m = 6 * k
        for i in range(m):
            a = 2.0 * math.pi * i / m
            verts.append((r * math.cos(a), r * math.sin(a)))
    tris = []
    # innermost fan
    for i in range(6):
        tris.append((0, 1 + i, 1 + (i + 1) % 6))
    # ring k-1 -> ring k, sector by sector
    for k in range(2, n + 1):
        inner, outer = ring_start[k - 1], ring_start[k]
        ni, no = 6 * (k - 1), 6 * k
        for s in range(6):
            for j in range(k):
                o0 = outer + (s * k + j) % no
                o1 = outer + (s * k + j + 1) % no
                i0 = inner + (s * (k - 1) + j) % ni
                tris.append((o0, o1, i0))
            for j in range(k - 1):
                i0 = inner + (s * (k - 1) + j) % ni
                i1 = inner + (s * (k - 1) + j + 1) % ni
                o1 = outer + (s * k + j + 1) % no
                tris.append((i0, o1, i1))
    vertices = np.array(verts)
    boundary = np.zeros(len(verts), dtype=bool)
    boundary[ring_start[n]:] = True
    return Mesh(vertices=vertices, triangles=np.array(tris), boundary=boundary,
                origin_vertex=0, inradius_d=radius)


def _validate_polygon(verts: np.ndarray) -> None:
    if len(verts) < 3:
        raise ValueError("polygon needs at least 3 vertices")
    if len(np.unique(np.round(verts, 12), axis=0)) != len(verts):
        raise ValueError("polygon has repeated vertices")
    area = _polygon_area(verts)
    if area <= _EPS:
        raise ValueError("polygon must be counterclockwise with positive area")
    n = len(verts)
    for i in range(n):
        a0, a1 = verts[i], verts[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            b0, b1 = verts[j], verts[(j + 1) % n]
            if _segments_intersect(a0, a1, b0, b1):
                raise ValueError("polygon is not simple (self-intersecting)")


def _polygon_area(verts: np.ndarray) -> float:
    x, y = verts[:, 0], verts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _segments_intersect(a0, a1, b0, b1) -> bool:
    def orient(p, q, r):
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    d1, d2 = orient(a0, a1, b0), orient(a0, a1, b1)
    d3, d4 = orient(b0, b1, a0), orient(b0, b1, a1)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return True
    return False


def _point_in_polygon(p, verts: np.ndarray) -> bool:
    n = len(verts)
    inside = False
    for i in range(n):
        x1, y1 = verts[i]
        x2, y2 = verts[(i + 1) % n]
        if (y1 > p[1]) != (y2 > p[1]):
            xi = x1 + (p[1] - y1) * (x2 - x1) / (y2 - y1)
            if p[0] < xi:
                inside = not inside
    return inside


def _dist_point_segment(p, a, b) -> float:
    ab = b - a
    t = np.dot(p - a, ab) / max(np.dot(ab, ab), _EPS)
    t = min(1.0, max(0.0, t))
    return float(np.linalg.norm(p - (a + t * ab)))


def _origin_inradius(verts: np.ndarray) -> float:
    o = np.zeros(2)
    return min(_dist_point_segment(o, verts[i], verts[(i + 1) % len(verts)])
               for i in range(len(verts)))


def _ear_clip(verts: np.ndarray) -> list[tuple[int, int, int]]:
    """Triangulate a simple CCW polygon by ear clipping."""
    n = len(verts)
    idx = list(range(n))
    tris = []
    guard = 0
    while len(idx) > 3:
        guard += 1
        if guard > 10 * n * n:
            raise ValueError("ear clipping failed; polygon may be degenerate")
        clipped = False
        for k in range(len(idx)):
            i0, i1, i2 = idx[k - 1], idx[k], idx[(k + 1) % len(idx)]
            a, b, c = verts[i0], verts[i1], verts[i2]
            cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
            if cross <= _EPS:
                continue  # reflex or collinear corner
            ear = True
            for j in idx:
                if j in (i0, i1, i2):
                    continue
                if _point_in_triangle(verts[j], a, b, c):
                    ear = False
                    break
            if ear:
                tris.append((i0, i1, i2))
                del idx[k]
                clipped = True
                break
        if not clipped:
            raise ValueError("ear clipping failed; polygon may be degenerate")
    tris.append((idx[0], idx[1], idx[2]))
    return tris


def _point_in_triangle(p, a, b, c, tol=_EPS) -> bool:
    d1 = (p[0] - b[0]) * (a[1] - b[1]) - (a[0] - b[0]) * (p[1] - b[1])
    d2 = (p[0] - c[0]) * (b[1] - c[1]) - (b[0] - c[0]) * (p[1] - c[1])
    d3 = (p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])
    neg = (d1 < -tol) or (d2 < -tol) or (d3 < -tol)
    pos = (d1 > tol) or (d2 > tol) or (d3 > tol)
    return not (neg and pos)


def _polygon_mesh(verts: np.ndarray, target_h: float) -> Mesh:
    _validate_polygon(verts)
    origin = np.zeros(2)
    d = _origin_inradius(verts)
    if d < 1e-10 or not _point_in_polygon(origin, verts):
        raise ValueError("origin must lie strictly inside the polygon")

    tris = _ear_clip(verts)
    vertices = [tuple(v) for v in verts]
    boundary = [True] * len(verts)
    o_idx = len(vertices)
    vertices.append((0.0, 0.0))
    boundary.append(False)

    # insert the origin: split the containing triangle in 3, or the two
    # triangles sharing the edge the origin falls on in 2 each
    new_tris = []
    on_edge: tuple[int, int] | None = None
    host = None
    for t in tris:
        a, b, c = (verts[t[0]], verts[t[1]], verts[t[2]])
        if host is None and _point_in_triangle(origin, a, b, c, tol=1e-10):
            host = t
            for (i, j) in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
                if _dist_point_segment(origin, np.asarray(vertices[i]), np.asarray(vertices[j])) < 1e-10:
                    on_edge = (i, j)
            continue
        new_tris.append(t)
    if host is None:
        raise ValueError("origin must lie strictly inside the polygon")
    if on_edge is None:
        i, j, k = host
        new_tris += [(i, j, o_idx), (j, k, o_idx), (k, i, o_idx)]
    else:
        i, j = on_edge
        k = next(v for v in host if v not in on_edge)
        new_tris += [(i, o_idx, k), (o_idx, j, k)]
        # the mate triangle across (i, j), if present, is split too
        mate = None
        for t in list(new_tris):
            if t is not host and i in t and j in t and o_idx not in t:
                mate = t
                break
        if mate is None:
            raise ValueError("origin must lie strictly inside the polygon")
        new_tris.remove(mate)
        m = next(v for v in mate if v not in (i, j))
        new_tris += [(j, o_idx, m), (o_idx, i, m)]

    tri_arr = np.array([_ccw(t, np.asarray(vertices)) for t in new_tris])
    mesh = Mesh(vertices=np.asarray(vertices), triangles=tri_arr,
                boundary=np.asarray(boundary), origin_vertex=o_idx, inradius_d=d)
    while mesh.max_edge_length() > 2.0 * target_h:
        mesh = refine(mesh)
        mesh.refinement_level = 0
    return mesh


def _ccw(t, verts):
    a, b, c = verts[t[0]], verts[t[1]], verts[t[2]]
    if (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]) < 0:
        return (t[0], t[2], t[1])
    return tuple(t)


# ---------------------------------------------------------------------------
# refinement


def refine(mesh: Mesh) -> Mesh:
    """Split every triangle into 4 by edge midpoints.

    Existing vertices never move.  On disk domains, the concentric-ring
    structure is preserved: the midpoint of an edge whose endpoints share a
    common radius (boundary chords and interior ring chords alike) is snapped
    radially onto that circle, so both the polygonal boundary and the
    interior vertex rings converge to true circles.
    """
    verts = list(map(tuple, mesh.vertices))
    boundary = list(mesh.boundary)
    is_disk = mesh.domain is not None and mesh.domain.kind == "disk"

    midpoint: dict[tuple[int, int], int] = {}
    bedges = {tuple(e) for e in map(tuple, np.sort(mesh.boundary_edges(), axis=1))}

    def mid(i: int, j: int) -> int:
        key = (i, j) if i < j else (j, i)
        idx = midpoint.get(key)
        if idx is not None:
            return idx
        p = 0.5 * (mesh.vertices[i] + mesh.vertices[j])
        if is_disk:
            ri = np.linalg.norm(mesh.vertices[i])
            rj = np.linalg.norm(mesh.vertices[j])
            if ri > 0 and abs(ri - rj) <= 1e-12 * max(ri, rj):
                p = p * (ri / np.linalg.norm(p))
        midpoint[key] = len(verts)
        verts.append((float(p[0]), float(p[1])))
        boundary.append(key in bedges)
        return midpoint[key]

    tris = []
    for (i, j, k) in mesh.triangles:
        a, b, c = mid(i, j), mid(j, k), mid(k, i)
        tris += [(i, a, c), (a, j, b), (c, b, k), (a, b, c)]

    out = Mesh(vertices=np.asarray(verts), triangles=np.asarray(tris),
               boundary=np.asarray(boundary), origin_vertex=mesh.origin_vertex,
               inradius_d=mesh.inradius_d, refinement_level=mesh.refinement_level + 1,
               domain=mesh.domain)
    return out


# ---------------------------------------------------------------------------
# plain-text mesh format: vertex count, then "x y flag" lines, then "i j k"


def save_mesh(mesh: Mesh, path) -> None:
    lines = [f"{mesh.n_vertices}"]
    for (x, y), b in zip(mesh.vertices, mesh.boundary):
        lines.append(f"{float(x)!r} {float(y)!r} {int(b)}")
    for (i, j, k) in mesh.triangles:
        lines.append(f"{i} {j} {k}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_mesh(path) -> Mesh:
    """Read the plain-text format.

    The domain shape is not part of the format, so the loaded mesh is treated
    as polygonal: no boundary snapping on refinement, no curved-boundary
    corrections in quadrature.  The inradius is recomputed as the distance
    from the origin to the nearest boundary edge.
    """
    tokens = Path(path).read_text().split("\n")
    tokens = [t for t in tokens if t.strip()]
    n = int(tokens[0])
    verts = np.empty((n, 2))
    flags = np.empty(n, dtype=bool)
    for i in range(n):
        x, y, b = tokens[1 + i].split()
        verts[i] = (float(x), float(y))
        flags[i] = bool(int(b))
    tris = np.array([[int(v) for v in line.split()] for line in tokens[1 + n:]], dtype=np.int64)
    r2 = np.einsum("ij,ij->i", verts, verts)
    origin = int(np.argmin(r2))
    if r2[origin] > 1e-20:
        raise ValueError("mesh file does not contain the origin as a vertex")
    mesh = Mesh(vertices=verts, triangles=tris, boundary=flags, origin_vertex=origin,
                inradius_d=1.0)  # placeholder, fixed below
    mesh.inradius_d = _mesh_origin_inradius(mesh)
    return mesh


def _mesh_origin_inradius(mesh: Mesh) -> float:
    o = np.zeros(2)
    return min(_dist_point_segment(o, mesh.vertices[i], mesh.vertices[j])
               for i, j in mesh.boundary_edges())

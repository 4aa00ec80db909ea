"""Triangulations of the perforated unit cell and of rectangular macro domains.

Two mesh families are generated:

* cell meshes on the unit square (0,1)^2 minus an obstacle, with
  mirror-matched boundary traces so that opposite-side vertices pair up
  exactly for periodic identification;
* structured macro meshes on an arbitrary axis-aligned rectangle with
  homogeneous outer boundary tags.

Obstacle boundaries are resolved polygonally (segment length <= h); no
curved elements.  All generators are deterministic, and for the built-in
symmetric geometries the produced triangulations are invariant (up to
floating-point rounding of reflected coordinates) under the two mirror
symmetries of the cell, which downstream modules exploit.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import GeometryInvalid, MeshingFailed
from .quadrature import triangle_rule

LEFT, RIGHT, BOTTOM, TOP, OBSTACLE, INTERIOR = range(6)
TAG_NAMES = ("Left", "Right", "Bottom", "Top", "Obstacle", "Interior")
TAG_IDS = {name: i for i, name in enumerate(TAG_NAMES)}

_GEOM_TOL = 1e-9
_PAIR_TOL = 1e-12


@dataclass(frozen=True)
class Geometry:
    """Obstacle layout of the periodic unit cell.

    kind is one of "full" (no obstacle), "disk", "two_rects", "custom"
    (externally supplied mesh file).  Coordinates are dimensionless in
    the closed unit square.
    """

    kind: str
    center: tuple = (0.5, 0.5)
    radius: float = 0.25
    rects: tuple = ()  # ((x0, x1, y0, y1), ...)
    mesh_file: str = ""

    @staticmethod
    def full():
        return Geometry(kind="full")

    @staticmethod
    def disk(center=(0.5, 0.5), radius=0.25):
        return Geometry(kind="disk", center=tuple(center), radius=float(radius))

    @staticmethod
    def two_rects(rect1=(0.1, 0.9, 0.1, 0.2), rect2=(0.1, 0.9, 0.8, 0.9)):
        return Geometry(kind="two_rects", rects=(tuple(rect1), tuple(rect2)))

    @staticmethod
    def custom(mesh_file):
        return Geometry(kind="custom", mesh_file=str(mesh_file))

    def validate(self):
        if self.kind == "full":
            return
        if self.kind == "disk":
            cx, cy = self.center
            r = self.radius
            if r <= 0:
                raise GeometryInvalid("disk radius must be positive")
            if min(cx - r, cy - r) <= _GEOM_TOL or max(cx + r, cy + r) >= 1 - _GEOM_TOL:
                raise GeometryInvalid("disk must lie strictly inside the unit square")
            return
        if self.kind == "two_rects":
            if not self.rects:
                raise GeometryInvalid("two_rects geometry needs rectangles")
            for k, (x0, x1, y0, y1) in enumerate(self.rects):
                if not (x0 < x1 and y0 < y1):
                    raise GeometryInvalid(f"rectangle {k} is degenerate")
                if min(x0, y0) <= _GEOM_TOL or max(x1, y1) >= 1 - _GEOM_TOL:
                    raise GeometryInvalid(
                        f"rectangle {k} must lie strictly inside the unit square"
                    )
            return
        if self.kind == "custom":
            if not self.mesh_file:
                raise GeometryInvalid("custom geometry needs a mesh file path")
            return
        raise GeometryInvalid(f"unknown geometry kind {self.kind!r}")

    @property
    def label(self):
        """Short filename-safe identifier used to key cached artifacts."""
        if self.kind == "full":
            return "full"
        if self.kind == "disk":
            return f"disk_r{self.radius:g}_c{self.center[0]:g}_{self.center[1]:g}"
        if self.kind == "two_rects":
            parts = "_".join(
                "-".join(f"{v:g}" for v in rect) for rect in self.rects
            )
            return f"rects_{parts}"
        return "custom"

    def obstacle_component_count(self):
        if self.kind == "disk":
            return 1
        if self.kind == "two_rects":
            # union-find over intersecting rectangles
            n = len(self.rects)
            parent = list(range(n))

            def find(a):
                while parent[a] != a:
                    parent[a] = parent[parent[a]]
                    a = parent[a]
                return a

            for i in range(n):
                for j in range(i + 1, n):
                    a, b = self.rects[i], self.rects[j]
                    if a[0] <= b[1] and b[0] <= a[1] and a[2] <= b[3] and b[2] <= a[3]:
                        parent[find(i)] = find(j)
            return len({find(i) for i in range(n)})
        return 0

    def obstacle_area(self):
        """Analytic Lebesgue measure of the obstacle (0 for full/custom)."""
        if self.kind == "disk":
            return math.pi * self.radius**2
        if self.kind == "two_rects":
            # exact for disjoint rectangles (the supported layouts)
            return sum((x1 - x0) * (y1 - y0) for x0, x1, y0, y1 in self.rects)
        return 0.0


class TriMesh:
    """Conforming triangulation with boundary tags and periodic vertex pairs.

    Immutable after construction; the coordinate/index arrays are set
    read-only so instances are safe to share across threads.
    """

    def __init__(self, vertices, triangles, h, domain=(0.0, 1.0, 0.0, 1.0),
                 geometry=None, periodic=True, min_angle=10.0):
        vertices = np.asarray(vertices, dtype=float)
        triangles = np.asarray(triangles, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise MeshingFailed("vertex array must be (n, 2)")
        if triangles.ndim != 2 or triangles.shape[1] != 3:
            raise MeshingFailed("triangle array must be (n, 3)")

        self.domain = tuple(float(v) for v in domain)
        self.geometry = geometry
        self.h = float(h)
        self.vertices = vertices
        self.triangles = self._orient(vertices, triangles)
        self._build_edges()
        self._tag_edges()
        if periodic:
            self._build_periodic_pairs()
        else:
            self.pairs_x = np.zeros((0, 2), dtype=np.int64)
            self.pairs_y = np.zeros((0, 2), dtype=np.int64)
        self._cache = {}
        self.validate(min_angle=min_angle)
        for arr in (self.vertices, self.triangles, self.edges, self.edge_tags,
                    self.triangle_edges, self.pairs_x, self.pairs_y):
            arr.setflags(write=False)

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def _orient(vertices, triangles):
        p = vertices[triangles]
        det = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        if np.any(np.abs(det) < 1e-15):
            raise MeshingFailed("degenerate (zero-area) triangle")
        flipped = triangles.copy()
        neg = det < 0
        flipped[neg] = flipped[neg][:, [0, 2, 1]]
        return flipped

    def _build_edges(self):
        t = self.triangles
        raw = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        key = np.sort(raw, axis=1)
        edges, inverse, counts = np.unique(
            key, axis=0, return_inverse=True, return_counts=True
        )
        if counts.max() > 2:
            raise MeshingFailed("non-manifold edge (more than two adjacent triangles)")
        nt = len(t)
        self.edges = edges
        self.edge_counts = counts
        self.triangle_edges = inverse.reshape(3, nt).T.copy()

    def _on_line(self, coord, value):
        return np.abs(coord - value) < _GEOM_TOL

    def _tag_edges(self):
        x0, x1, y0, y1 = self.domain
        v = self.vertices
        tags = np.full(len(self.edges), INTERIOR, dtype=np.int8)
        bnd = self.edge_counts == 1
        ex = v[self.edges[:, 0]], v[self.edges[:, 1]]
        both = lambda cond_a, cond_b: bnd & cond_a & cond_b  # noqa: E731
        for tag, (axis, value) in ((LEFT, (0, x0)), (RIGHT, (0, x1)),
                                   (BOTTOM, (1, y0)), (TOP, (1, y1))):
            hit = both(self._on_line(ex[0][:, axis], value),
                       self._on_line(ex[1][:, axis], value))
            tags[hit] = tag
        tags[bnd & (tags == INTERIOR)] = OBSTACLE
        self.edge_tags = tags

    def _boundary_vertices(self, tag):
        e = self.edges[self.edge_tags == tag]
        return np.unique(e)

    def _match_trace(self, ids_a, ids_b, axis, offset):
        """Pair vertices of two opposite traces by the transverse coordinate."""
        other = 1 - axis
        va, vb = self.vertices[ids_a], self.vertices[ids_b]
        if len(ids_a) != len(ids_b):
            raise MeshingFailed("periodic traces have different vertex counts")
        order_a = np.argsort(va[:, other])
        order_b = np.argsort(vb[:, other])
        a, b = ids_a[order_a], ids_b[order_b]
        delta = self.vertices[b] - self.vertices[a]
        want = np.zeros(2)
        want[axis] = offset
        if np.max(np.abs(delta - want)) > _PAIR_TOL:
            raise MeshingFailed("periodic traces are not mirror matched")
        return np.column_stack([a, b])

    def _build_periodic_pairs(self):
        x0, x1, y0, y1 = self.domain
        self.pairs_x = self._match_trace(
            self._boundary_vertices(LEFT), self._boundary_vertices(RIGHT), 0, x1 - x0
        )
        self.pairs_y = self._match_trace(
            self._boundary_vertices(BOTTOM), self._boundary_vertices(TOP), 1, y1 - y0
        )

    # -- derived quantities ----------------------------------------------------

    @property
    def num_vertices(self):
        return len(self.vertices)

    @property
    def num_triangles(self):
        return len(self.triangles)

    @property
    def num_edges(self):
        return len(self.edges)

    @property
    def periodic_pairs(self):
        """All periodic identifications as (master, slave, axis) rows."""
        rows = []
        for axis, pairs in ((0, self.pairs_x), (1, self.pairs_y)):
            for a, b in pairs:
                rows.append((int(a), int(b), axis))
        return rows

    @property
    def areas(self):
        if "areas" not in self._cache:
            p = self.vertices[self.triangles]
            self._cache["areas"] = 0.5 * np.cross(
                p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
            )
        return self._cache["areas"]

    @property
    def grad_lambda(self):
        """Gradients of the three barycentric coordinates, (nt, 3, 2)."""
        if "grad_lambda" not in self._cache:
            p = self.vertices[self.triangles]
            x, y = p[..., 0], p[..., 1]
            b = np.stack(
                [y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1
            )
            c = np.stack(
                [x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1
            )
            g = np.stack([b, c], axis=2) / (2.0 * self.areas)[:, None, None]
            self._cache["grad_lambda"] = g
        return self._cache["grad_lambda"]

    def quadrature(self, degree=4):
        """Physical quadrature points and reference weights, ((nt, nq, 2), (nq,))."""
        key = ("quad", degree)
        if key not in self._cache:
            bary, w = triangle_rule(degree)
            pts = np.einsum("qk,tkd->tqd", bary, self.vertices[self.triangles])
            self._cache[key] = (pts, w)
        return self._cache[key]

    def min_angle(self):
        p = self.vertices[self.triangles]
        angles = []
        for i in range(3):
            a = p[:, (i + 1) % 3] - p[:, i]
            b = p[:, (i + 2) % 3] - p[:, i]
            cosang = np.einsum("td,td->t", a, b) / (
                np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
            )
            angles.append(np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0))))
        return float(np.min(angles))

    # -- validation -------------------------------------------------------------

    def validate(self, min_angle=10.0):
        if np.any(self.areas <= 0):
            raise MeshingFailed("negative triangle area after orientation")
        ang = self.min_angle()
        if ang <= min_angle:
            raise MeshingFailed(
                f"mesh quality below floor: min angle {ang:.2f} deg <= {min_angle}"
            )
        self._check_connected()
        self._check_obstacle_loops()
        for axis, pairs in ((0, self.pairs_x), (1, self.pairs_y)):
            if len(pairs):
                if len(np.unique(pairs[:, 0])) != len(pairs) or len(
                    np.unique(pairs[:, 1])
                ) != len(pairs):
                    raise MeshingFailed("periodic pairing is not a bijection")

    def _check_connected(self):
        e = self.edges
        n = self.num_vertices
        g = coo_matrix(
            (np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n)
        )
        ncomp, _ = connected_components(g, directed=False)
        if ncomp != 1:
            raise GeometryInvalid("fluid region is disconnected")

    def _check_obstacle_loops(self):
        obs = self.edges[self.edge_tags == OBSTACLE]
        if len(obs) == 0:
            if self.geometry is not None and self.geometry.kind in ("disk", "two_rects"):
                raise MeshingFailed("expected obstacle edges, found none")
            return
        ids, counts = np.unique(obs, return_counts=True)
        if np.any(counts != 2):
            raise MeshingFailed("obstacle edges do not form closed loops")
        n = self.num_vertices
        g = coo_matrix((np.ones(len(obs)), (obs[:, 0], obs[:, 1])), shape=(n, n))
        ncomp, labels = connected_components(g, directed=False)
        nloops = len(np.unique(labels[ids]))
        if self.geometry is not None:
            expect = self.geometry.obstacle_component_count()
            if expect and nloops != expect:
                raise MeshingFailed(
                    f"obstacle loops ({nloops}) do not match geometry ({expect})"
                )


def fluid_area(mesh):
    """Total triangle area; the measure |Y| in all cell averages."""
    return float(np.sum(mesh.areas))


# -- structured generation ------------------------------------------------------


def _center_sign_diag(cx, cy, mid=(0.5, 0.5), tol=1e-12):
    t1, t2 = cx - mid[0], cy - mid[1]
    if abs(t1) < tol or abs(t2) < tol:
        return 0
    return 1 if t1 * t2 > 0 else -1


def _structured(xs, ys, keep=None, diag=None):
    """Triangulate the tensor grid xs x ys cell by cell.

    diag(cx, cy) -> +1 (SW-NE split), -1 (SE-NW split) or 0 (crossed
    four-way split with a center vertex).  keep(cell_box) -> bool filters
    carved cells.
    """
    nx, ny = len(xs), len(ys)
    vid = np.arange(nx * ny).reshape(nx, ny)
    verts = np.column_stack(
        [np.repeat(xs, ny), np.tile(ys, nx)]
    )
    tris = []
    extra = []
    next_id = nx * ny
    for i in range(nx - 1):
        for j in range(ny - 1):
            box = (xs[i], xs[i + 1], ys[j], ys[j + 1])
            if keep is not None and not keep(box):
                continue
            v00, v10 = vid[i, j], vid[i + 1, j]
            v11, v01 = vid[i + 1, j + 1], vid[i, j + 1]
            cx, cy = 0.5 * (box[0] + box[1]), 0.5 * (box[2] + box[3])
            d = diag(cx, cy) if diag is not None else 1
            if d == 0:
                extra.append((cx, cy))
                c = next_id
                next_id += 1
                tris += [(v00, v10, c), (v10, v11, c), (v11, v01, c), (v01, v00, c)]
            elif d > 0:
                tris += [(v00, v10, v11), (v00, v11, v01)]
            else:
                tris += [(v00, v10, v01), (v10, v11, v01)]
    if extra:
        verts = np.vstack([verts, np.array(extra)])
    tris = np.array(tris, dtype=np.int64)
    used = np.unique(tris)
    remap = -np.ones(len(verts), dtype=np.int64)
    remap[used] = np.arange(len(used))
    return verts[used], remap[tris]


def _grid_lines(a, b, n, inserts=()):
    lines = list(np.linspace(a, b, n + 1))
    for v in inserts:
        if all(abs(v - u) > _GEOM_TOL for u in lines):
            lines.append(v)
    return np.array(sorted(lines))


def _ray_box_distance(cx, cy, dx, dy):
    """Distance from (cx, cy) along (dx, dy) to the unit-square boundary."""
    t = np.inf
    if dx > 1e-14:
        t = min(t, (1.0 - cx) / dx)
    elif dx < -1e-14:
        t = min(t, (0.0 - cx) / dx)
    if dy > 1e-14:
        t = min(t, (1.0 - cy) / dy)
    elif dy < -1e-14:
        t = min(t, (0.0 - cy) / dy)
    return t


def _disk_cell(geometry, h, min_angle):
    cx, cy = geometry.center
    r = geometry.radius
    n_ang = max(16, int(math.ceil(math.pi / h / 8.0)) * 8)
    thetas = list(2 * math.pi * np.arange(n_ang) / n_ang)
    corners = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    for px, py in corners:
        ang = math.atan2(py - cy, px - cx) % (2 * math.pi)
        if all(abs(ang - t) > 1e-12 for t in thetas):
            thetas.append(ang)
    thetas = np.array(sorted(thetas))
    K = len(thetas)
    dirs = np.column_stack([np.cos(thetas), np.sin(thetas)])
    R = np.array([_ray_box_distance(cx, cy, d[0], d[1]) for d in dirs])
    span = R - r
    if np.any(span <= 0):
        raise GeometryInvalid("disk reaches the cell boundary")
    n_rad = max(3, int(math.ceil(span.max() / h)))
    s = np.arange(n_rad + 1) / n_rad

    pts = np.empty((K, n_rad + 1, 2))
    for k in range(K):
        rho = r + s * span[k]
        pts[k, :, 0] = cx + rho * dirs[k, 0]
        pts[k, :, 1] = cy + rho * dirs[k, 1]
    # outer ring sits on the square; snap rounding noise onto it exactly
    outer = pts[:, -1, :]
    for axis in range(2):
        outer[np.abs(outer[:, axis]) < _PAIR_TOL, axis] = 0.0
        outer[np.abs(outer[:, axis] - 1.0) < _PAIR_TOL, axis] = 1.0

    def vid(k, j):
        return (k % K) * (n_rad + 1) + j

    tris = []
    for k in range(K):
        for j in range(n_rad):
            a, b = vid(k, j), vid(k + 1, j)
            c, d = vid(k + 1, j + 1), vid(k, j + 1)
            pa, pb = pts.reshape(-1, 2)[a], pts.reshape(-1, 2)[b]
            pc, pd = pts.reshape(-1, 2)[c], pts.reshape(-1, 2)[d]
            d1 = math.hypot(*(pc - pa))
            d2 = math.hypot(*(pd - pb))
            if abs(d1 - d2) < 1e-12:
                mx, my = 0.25 * (pa + pb + pc + pd)
                choice = _center_sign_diag(mx, my)
                d1 = d1 - choice  # bias: choice=+1 picks the a-c diagonal
            if d1 <= d2:
                tris += [(a, b, c), (a, c, d)]
            else:
                tris += [(a, b, d), (b, c, d)]
    return TriMesh(
        pts.reshape(-1, 2),
        np.array(tris, dtype=np.int64),
        h,
        geometry=geometry,
        min_angle=min_angle,
    )


def build_cell_mesh(geometry, h, min_angle=10.0):
    """Mesh the fluid part of the unit cell at target resolution h.

    The returned mesh has mirror-matched boundary traces (periodic vertex
    pairing exists along both axes) and a polygonal obstacle boundary with
    segment length <= h.

    Raises GeometryInvalid for obstacles that touch the cell boundary or
    disconnect the fluid, MeshingFailed for quality failures.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    geometry.validate()
    if geometry.kind == "full":
        n = max(2, int(math.ceil(1.0 / h)))
        xs = _grid_lines(0.0, 1.0, n)
        verts, tris = _structured(xs, xs, diag=_center_sign_diag)
        return TriMesh(verts, tris, h, geometry=geometry, min_angle=min_angle)
    if geometry.kind == "disk":
        return _disk_cell(geometry, h, min_angle)
    if geometry.kind == "two_rects":
        n = max(2, int(math.ceil(1.0 / h)))
        xs = _grid_lines(0.0, 1.0, n, inserts=[v for r in geometry.rects for v in r[:2]])
        ys = _grid_lines(0.0, 1.0, n, inserts=[v for r in geometry.rects for v in r[2:]])

        def keep(box):
            mx, my = 0.5 * (box[0] + box[1]), 0.5 * (box[2] + box[3])
            return not any(
                x0 < mx < x1 and y0 < my < y1 for x0, x1, y0, y1 in geometry.rects
            )

        verts, tris = _structured(xs, ys, keep=keep, diag=_center_sign_diag)
        return TriMesh(verts, tris, h, geometry=geometry, min_angle=min_angle)
    if geometry.kind == "custom":
        return read_mesh(geometry.mesh_file, geometry=geometry)
    raise GeometryInvalid(f"unknown geometry kind {geometry.kind!r}")


def build_macro_mesh(domain, n1, n2):
    """Structured crossed-diagonal mesh of a rectangle with n1 x n2 grid nodes.

    domain is (x0, x1, y0, y1).  Outer edges carry side tags; there are no
    periodic pairs and no obstacle.
    """
    if n1 < 2 or n2 < 2:
        raise ValueError("need at least 2 grid nodes per direction")
    x0, x1, y0, y1 = domain
    if not (x0 < x1 and y0 < y1):
        raise ValueError("domain rectangle is degenerate")
    xs = np.linspace(x0, x1, n1)
    ys = np.linspace(y0, y1, n2)

    # alternate the diagonal per cell parity (union-jack pattern)
    dx = (x1 - x0) / (n1 - 1)
    dy = (y1 - y0) / (n2 - 1)

    def diag(cx, cy):
        i = int(round((cx - x0) / dx - 0.5))
        j = int(round((cy - y0) / dy - 0.5))
        return 1 if (i + j) % 2 == 0 else -1

    verts, tris = _structured(xs, ys, diag=diag)
    h = max(dx, dy)
    return TriMesh(verts, tris, h, domain=domain, periodic=False)


# -- plain-text mesh exchange ----------------------------------------------------


def write_mesh(mesh, path):
    """Write the three-section plain-text format (vertices/triangles/tagged edges)."""
    tagged = np.flatnonzero(mesh.edge_tags != INTERIOR)
    with open(path, "w") as f:
        f.write(f"vertices {mesh.num_vertices}\n")
        for i, (x, y) in enumerate(mesh.vertices):
            f.write(f"{i} {x!r} {y!r}\n")
        f.write(f"triangles {mesh.num_triangles}\n")
        for a, b, c in mesh.triangles:
            f.write(f"{a} {b} {c}\n")
        f.write(f"edges {len(tagged)}\n")
        for e in tagged:
            a, b = mesh.edges[e]
            f.write(f"{a} {b} {TAG_NAMES[mesh.edge_tags[e]]}\n")


def read_mesh(path, geometry=None, periodic=True, min_angle=10.0):
    """Read the plain-text mesh format written by `write_mesh`.

    Edge tags are recomputed from vertex positions (they are derivable for
    unit-cell meshes); the stored tag section is validated against them.
    """
    with open(path) as f:
        tokens = f.read().split()
    pos = 0

    def take(n):
        nonlocal pos
        chunk = tokens[pos : pos + n]
        pos += n
        return chunk

    head = take(2)
    if head[0] != "vertices":
        raise MeshingFailed("mesh file must start with a vertex section")
    nv = int(head[1])
    verts = np.empty((nv, 2))
    for _ in range(nv):
        i, x, y = take(3)
        verts[int(i)] = (float(x), float(y))
    head = take(2)
    if head[0] != "triangles":
        raise MeshingFailed("expected triangle section")
    nt = int(head[1])
    tris = np.empty((nt, 3), dtype=np.int64)
    for k in range(nt):
        tris[k] = [int(v) for v in take(3)]
    head = take(2)
    if head[0] != "edges":
        raise MeshingFailed("expected edge section")
    ne = int(head[1])
    listed = {}
    for _ in range(ne):
        a, b, name = take(3)
        if name not in TAG_IDS:
            raise MeshingFailed(f"unknown edge tag {name!r}")
        listed[tuple(sorted((int(a), int(b))))] = TAG_IDS[name]

    h = float(np.max(np.linalg.norm(verts[tris[:, 1]] - verts[tris[:, 0]], axis=1)))
    mesh = TriMesh(verts, tris, h, geometry=geometry, periodic=periodic,
                   min_angle=min_angle)
    for key, tag in listed.items():
        hit = np.flatnonzero(
            (mesh.edges[:, 0] == key[0]) & (mesh.edges[:, 1] == key[1])
        )
        if len(hit) != 1 or mesh.edge_tags[hit[0]] != tag:
            raise MeshingFailed(f"edge {key} tag mismatch against geometry")
    return mesh

"""Finite-element infrastructure on triangle meshes.

Scalar P1 and vector P2 Lagrange spaces, degree-4 quadrature assembly of
the bilinear forms used by the cell and macro problems, strong periodic
DOF identification, single-row zero-mean (Lagrange multiplier)
constraints, and residual-checked sparse direct solves.

The drift form is assembled in its skew-symmetrized variant
``p/2 * (B w, grad v) - p/2 * (B v, grad w)`` which coincides with the
plain form for divergence-free B and makes the discrete advection matrix
exactly skew, so the energy identity of the continuous problem carries
over to the Galerkin system verbatim.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from . import mesh as meshmod
from .errors import (
    DimensionMismatch,
    DoubleConstraint,
    MissingPairs,
    ResidualTooLarge,
    SingularMatrix,
)
from .quadrature import triangle_rule

SCALAR_P1 = "scalar_p1"
VECTOR_P2 = "vector_p2"
PRESSURE_P1 = "pressure_p1"  # same basis as SCALAR_P1; kept as a distinct role

SOLVE_TOL = 1e-10


# -- degrees of freedom -----------------------------------------------------------


class DofMap:
    """Entity-to-DOF map with periodic identification and Dirichlet masking.

    P1 entities are vertices; P2 entities are vertices followed by edges.
    After periodic reduction every slave DOF points at exactly one master;
    Dirichlet-constrained DOFs are excluded from the free set.  `R` is the
    (n_dofs x free_dof_count) prolongation: full = R @ reduced (+ lifting).
    """

    def __init__(self, mesh, space, periodic=False, dirichlet_tags=()):
        self.mesh = mesh
        self.space = space
        self.periodic = bool(periodic)
        self.dirichlet_tags = tuple(dirichlet_tags)
        nv = mesh.num_vertices
        if space == VECTOR_P2:
            self.ncomp = 2
            self.n_entities = nv + mesh.num_edges
        elif space in (SCALAR_P1, PRESSURE_P1):
            self.ncomp = 1
            self.n_entities = nv
        else:
            raise ValueError(f"unknown space {space!r}")
        self.n_dofs = self.n_entities * self.ncomp

        parent = np.arange(self.n_entities)

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

        if periodic:
            for pairs in (mesh.pairs_x, mesh.pairs_y):
                for a, b in pairs:
                    union(int(a), int(b))
            if space == VECTOR_P2:
                self._pair_edges(union)

        roots = np.array([find(i) for i in range(self.n_entities)])

        constrained = np.zeros(self.n_entities, dtype=bool)
        for tag in self.dirichlet_tags:
            tid = meshmod.TAG_IDS[tag] if isinstance(tag, str) else int(tag)
            eids = np.flatnonzero(mesh.edge_tags == tid)
            if len(eids):
                constrained[np.unique(mesh.edges[eids])] = True
                if space == VECTOR_P2:
                    constrained[nv + eids] = True
        # a Dirichlet flag anywhere in a periodic class constrains the class
        root_constrained = np.zeros(self.n_entities, dtype=bool)
        np.logical_or.at(root_constrained, roots, constrained)
        self.entity_master = roots
        self.entity_constrained = root_constrained[roots]

        free_roots = np.unique(roots[~self.entity_constrained])
        root_index = -np.ones(self.n_entities, dtype=np.int64)
        root_index[free_roots] = np.arange(len(free_roots))
        self.free_dof_count = len(free_roots) * self.ncomp

        rows, cols = [], []
        for ent in range(self.n_entities):
            if self.entity_constrained[ent]:
                continue
            k = root_index[roots[ent]]
            for c in range(self.ncomp):
                rows.append(ent * self.ncomp + c)
                cols.append(k * self.ncomp + c)
        self.R = sp.csr_matrix(
            (np.ones(len(rows)), (rows, cols)),
            shape=(self.n_dofs, self.free_dof_count),
        )
        self.dirichlet_dofs = np.flatnonzero(
            np.repeat(self.entity_constrained, self.ncomp)
        )

    def _pair_edges(self, union):
        mesh = self.mesh
        nv = mesh.num_vertices
        lookup = {}
        for e, (a, b) in enumerate(mesh.edges):
            lookup[(int(a), int(b))] = e
        for tag, pairs in ((meshmod.LEFT, mesh.pairs_x), (meshmod.BOTTOM, mesh.pairs_y)):
            vmap = {int(a): int(b) for a, b in pairs}
            for e in np.flatnonzero(mesh.edge_tags == tag):
                a, b = (int(v) for v in mesh.edges[e])
                if a not in vmap or b not in vmap:
                    raise MissingPairs(f"boundary edge {e} has unmatched vertices")
                partner = tuple(sorted((vmap[a], vmap[b])))
                if partner not in lookup:
                    raise MissingPairs(f"no partner edge for boundary edge {e}")
                union(nv + e, nv + lookup[partner])

    @property
    def has_pairs(self):
        return len(self.mesh.pairs_x) + len(self.mesh.pairs_y) > 0

    def entities_of_triangles(self):
        """Per-triangle entity indices in local basis order."""
        t = self.mesh.triangles
        if self.space == VECTOR_P2:
            nv = self.mesh.num_vertices
            return np.hstack([t, nv + self.mesh.triangle_edges])
        return t


@dataclass
class FEField:
    """Coefficient vector attached to its DOF map (full, unreduced numbering)."""

    dofmap: DofMap
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.dofmap.n_dofs,):
            raise DimensionMismatch(
                f"field has {self.values.shape} values, space needs {self.dofmap.n_dofs}"
            )


@dataclass
class SparseSystem:
    """Assembled sparse operator with right-hand side and constraint state."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    dofmap: DofMap = None
    reduced: bool = False
    mean_constrained: bool = False
    dirichlet_values: np.ndarray = None

    @property
    def n(self):
        return self.matrix.shape[0]

    def expand(self, x):
        """Map a solution of this (possibly reduced) system back to full DOFs."""
        x = np.asarray(x, dtype=float)
        if self.mean_constrained:
            x = x[:-1]
        if self.reduced and self.dofmap is not None:
            full = self.dofmap.R @ x
            if self.dirichlet_values is not None:
                full = full + self.dirichlet_values
            return full
        return x


# -- quadrature-level evaluation ---------------------------------------------------


def _coefficient_at_qp(mesh, coefficient, degree):
    """Evaluate a 2x2 coefficient at quadrature points -> (nt, nq, 2, 2)."""
    pts, w = mesh.quadrature(degree)
    nt, nq = pts.shape[:2]
    if coefficient is None:
        out = np.zeros((nt, nq, 2, 2))
        out[..., 0, 0] = 1.0
        out[..., 1, 1] = 1.0
        return out
    if callable(coefficient):
        val = np.asarray(coefficient(pts[..., 0], pts[..., 1]), dtype=float)
        if val.shape != (nt, nq, 2, 2):
            raise DimensionMismatch(
                f"coefficient returned {val.shape}, expected {(nt, nq, 2, 2)}"
            )
        return val
    arr = np.asarray(coefficient, dtype=float)
    if arr.shape != (2, 2):
        raise DimensionMismatch("constant coefficient must be a 2x2 matrix")
    return np.broadcast_to(arr, (nt, nq, 2, 2))


def diagonal_coefficient(f11, f22):
    """Build a (nt, nq, 2, 2) evaluator from two scalar functions of (x, y)."""

    def coeff(x, y):
        out = np.zeros(x.shape + (2, 2))
        out[..., 0, 0] = f11(x, y)
        out[..., 1, 1] = f22(x, y)
        return out

    return coeff


def p1_values_at_qp(mesh, values, degree=4):
    bary, _ = triangle_rule(degree)
    return np.einsum("qi,ti->tq", bary, values[mesh.triangles])


def p1_gradients(mesh, values):
    """Piecewise-constant gradient of a P1 field, (nt, 2)."""
    return np.einsum("ti,tid->td", values[mesh.triangles], mesh.grad_lambda)


def p2_basis(bary):
    lam = np.asarray(bary)
    vert = lam * (2 * lam - 1)
    edge = 4 * np.stack(
        [lam[:, 0] * lam[:, 1], lam[:, 1] * lam[:, 2], lam[:, 2] * lam[:, 0]], axis=1
    )
    return np.hstack([vert, edge])


def p2_grad_factors(bary):
    """d(basis)/d(lambda) at quadrature points, (nq, 6, 3)."""
    lam = np.asarray(bary)
    nq = lam.shape[0]
    out = np.zeros((nq, 6, 3))
    for v in range(3):
        out[:, v, v] = 4 * lam[:, v] - 1
    for k, (i, j) in enumerate(((0, 1), (1, 2), (2, 0))):
        out[:, 3 + k, i] = 4 * lam[:, j]
        out[:, 3 + k, j] = 4 * lam[:, i]
    return out


def p2_gradients_at_qp(mesh, degree=4):
    """Physical gradients of the six P2 basis functions, (nt, nq, 6, 2)."""
    bary, _ = triangle_rule(degree)
    return np.einsum("qkm,tmd->tqkd", p2_grad_factors(bary), mesh.grad_lambda)


def p2_vector_at_qp(mesh, dofmap, values, degree=4):
    """Evaluate a vector P2 field at quadrature points, (nt, nq, 2)."""
    bary, _ = triangle_rule(degree)
    basis = p2_basis(bary)
    ents = dofmap.entities_of_triangles()
    coeffs = values.reshape(-1, 2)[ents]  # (nt, 6, 2)
    return np.einsum("qk,tkd->tqd", basis, coeffs)


# -- assembly -----------------------------------------------------------------------


def _scatter(conn, local, n):
    k = conn.shape[1]
    rows = np.broadcast_to(conn[:, :, None], local.shape).ravel()
    cols = np.broadcast_to(conn[:, None, :], local.shape).ravel()
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def assemble_stiffness(mesh, diffusion=None, degree=4):
    """Sparse P1 matrix of the form (D grad u, grad v)."""
    _, w = mesh.quadrature(degree)
    g = mesh.grad_lambda
    D = _coefficient_at_qp(mesh, diffusion, degree)
    Dg = np.einsum("tqde,tje->tqjd", D, g)
    local = np.einsum("q,tid,tqjd->tij", w, g, Dg) * mesh.areas[:, None, None]
    return _scatter(mesh.triangles, local, mesh.num_vertices)


def assemble_mass(mesh, degree=4):
    """Sparse P1 mass matrix (u, v)."""
    bary, w = triangle_rule(degree)
    ref = np.einsum("q,qi,qj->ij", w, bary, bary)
    local = mesh.areas[:, None, None] * ref[None]
    return _scatter(mesh.triangles, local, mesh.num_vertices)


def assemble_drift(mesh, velocity_at_qp, drift=1.0, degree=4):
    """Skew-symmetric P1 advection matrix for the drift field `drift * B`.

    velocity_at_qp has shape (nt, nq, 2), typically sampled from a P2
    Stokes velocity.  Returns the matrix of the skew-symmetrized form; it
    vanishes identically when drift == 0 or B == 0.
    """
    bary, w = triangle_rule(degree)
    B = np.asarray(velocity_at_qp, dtype=float)
    nt = mesh.num_triangles
    if B.shape != (nt, len(w), 2):
        raise DimensionMismatch(
            f"velocity sample has shape {B.shape}, expected {(nt, len(w), 2)}"
        )
    Bg = np.einsum("tqd,tid->tqi", B, mesh.grad_lambda)
    local = np.einsum("q,tqi,qj->tij", w, Bg, bary) * mesh.areas[:, None, None]
    C = _scatter(mesh.triangles, local, mesh.num_vertices)
    return (0.5 * float(drift)) * (C.T - C)


def assemble_bilinear(mesh, form, dofmap=None, **params):
    """Dispatch to the named bilinear form ("stiffness" | "mass" | "drift")."""
    if dofmap is not None and dofmap.space not in (SCALAR_P1, PRESSURE_P1):
        raise DimensionMismatch("scalar P1 forms need a scalar dofmap")
    if form == "stiffness":
        return assemble_stiffness(mesh, params.get("diffusion"), params.get("degree", 4))
    if form == "mass":
        return assemble_mass(mesh, params.get("degree", 4))
    if form == "drift":
        return assemble_drift(
            mesh,
            params["velocity_at_qp"],
            params.get("drift", 1.0),
            params.get("degree", 4),
        )
    raise ValueError(f"unknown form {form!r}")


def assemble_load(mesh, f, degree=4):
    """Load vector (f, v); f is a callable of (x, y) or per-qp array (nt, nq)."""
    pts, _ = mesh.quadrature(degree)
    bary, w = triangle_rule(degree)
    fq = f(pts[..., 0], pts[..., 1]) if callable(f) else np.asarray(f, dtype=float)
    fq = np.broadcast_to(fq, pts.shape[:2])
    local = np.einsum("q,tq,qi->ti", w, fq, bary) * mesh.areas[:, None]
    out = np.zeros(mesh.num_vertices)
    np.add.at(out, mesh.triangles, local)
    return out


def assemble_gradient_load(mesh, vec_at_qp, degree=4):
    """Load vector (V, grad v) for a per-quadrature-point vector V (nt, nq, 2)."""
    bary, w = triangle_rule(degree)
    V = np.asarray(vec_at_qp, dtype=float)
    local = np.einsum("q,tqd,tid->ti", w, V, mesh.grad_lambda) * mesh.areas[:, None]
    out = np.zeros(mesh.num_vertices)
    np.add.at(out, mesh.triangles, local)
    return out


def integral_vector(mesh, degree=4):
    """Vector of basis integrals (1, v); the zero-mean constraint row."""
    return assemble_load(mesh, lambda x, y: np.ones_like(x), degree)


# -- constraint handling -------------------------------------------------------------


def apply_periodic(system, dofmap=None):
    """Fold periodic slave rows/columns into their masters.

    Idempotent: a reduced system (or one whose mesh has no periodic pairs)
    is returned unchanged.
    """
    dm = dofmap or system.dofmap
    if system.reduced:
        return system
    if dm is None or not dm.has_pairs:
        return system
    if not dm.periodic:
        raise MissingPairs("dofmap was built without periodic identification")
    return SparseSystem(
        matrix=(dm.R.T @ system.matrix @ dm.R).tocsr(),
        rhs=dm.R.T @ system.rhs,
        dofmap=dm,
        reduced=True,
    )


def apply_dirichlet(system, dofmap=None, values=None):
    """Eliminate Dirichlet DOFs symmetrically (with optional lifting values)."""
    dm = dofmap or system.dofmap
    if system.reduced:
        return system
    lift = None
    rhs = system.rhs
    if values is not None:
        lift = np.zeros(dm.n_dofs)
        lift[dm.dirichlet_dofs] = np.asarray(values)[dm.dirichlet_dofs]
        rhs = rhs - system.matrix @ lift
    return SparseSystem(
        matrix=(dm.R.T @ system.matrix @ dm.R).tocsr(),
        rhs=dm.R.T @ rhs,
        dofmap=dm,
        reduced=True,
        dirichlet_values=lift,
    )


def attach_zero_mean(system, mesh, degree=4):
    """Append the single Lagrange-multiplier row enforcing zero discrete mean."""
    if system.mean_constrained:
        raise DoubleConstraint("zero-mean row already attached")
    m = integral_vector(mesh, degree)
    if system.reduced and system.dofmap is not None:
        m = system.dofmap.R.T @ m
    col = sp.csr_matrix(m[:, None])
    row = sp.csr_matrix(m[None, :])
    matrix = sp.bmat([[system.matrix, col], [row, None]], format="csr")
    rhs = np.append(system.rhs, 0.0)
    return SparseSystem(
        matrix=matrix,
        rhs=rhs,
        dofmap=system.dofmap,
        reduced=system.reduced,
        mean_constrained=True,
        dirichlet_values=system.dirichlet_values,
    )


def solve(system, tol=SOLVE_TOL):
    """Direct sparse solve with an asserted relative residual.

    Handles the symmetric-indefinite saddle structures produced by the
    mean constraint and the mixed Stokes blocks.
    """
    A = system.matrix.tocsc()
    b = np.asarray(system.rhs, dtype=float)
    if A.shape[0] != A.shape[1] or A.shape[0] != len(b):
        raise DimensionMismatch("system is not square or rhs has wrong length")
    try:
        lu = splu(A)
        x = lu.solve(b)
    except RuntimeError as exc:
        raise SingularMatrix(str(exc)) from exc
    if not np.all(np.isfinite(x)):
        raise SingularMatrix("factorization produced non-finite values")
    nb = np.linalg.norm(b)
    denom = nb if nb > 0 else 1.0
    res = np.linalg.norm(A @ x - b)
    if res > tol * denom:
        raise ResidualTooLarge(f"relative residual {res / denom:.3e}")
    return x


def factorized(matrix):
    """LU factorization handle for repeated right-hand sides."""
    try:
        return splu(matrix.tocsc())
    except RuntimeError as exc:
        raise SingularMatrix(str(exc)) from exc


def export_matrix(matrix, path):
    """Coordinate text dump (row col value per line) for debugging."""
    coo = matrix.tocoo()
    with open(path, "w") as f:
        for r, c, v in zip(coo.row, coo.col, coo.data):
            f.write(f"{r} {c} {v!r}\n")

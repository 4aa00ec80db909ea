"""Periodic Stokes flow on the perforated cell with Taylor-Hood elements.

P2 velocity / P1 pressure, strong periodic identification on both fields,
exact no-slip on obstacle boundaries, and a single Lagrange-multiplier row
removing the pressure constant.  On an obstacle-free cell the two rigid
velocity translations are removed the same way (zero mean per component).
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import fem
from .errors import NoObstacleWarning
from .mesh import OBSTACLE
from .quadrature import triangle_rule

DEFAULT_VISCOSITY = 0.01


def sinusoidal_forcing(amplitude=10.0):
    """Swirling body force (a*sin(2 pi x) sin(2 pi y), a*sin(2 pi x) cos(2 pi y))."""

    def forcing(x, y):
        out = np.zeros(x.shape + (2,))
        sx = np.sin(2 * np.pi * x)
        out[..., 0] = amplitude * sx * np.sin(2 * np.pi * y)
        out[..., 1] = amplitude * sx * np.cos(2 * np.pi * y)
        return out

    return forcing


@dataclass
class StokesSolution:
    """Discrete velocity/pressure pair with solver diagnostics."""

    mesh: object
    dofmap: fem.DofMap
    velocity: np.ndarray  # full vector-P2 coefficients
    pressure: np.ndarray  # P1 vertex values, zero mean
    mu: float
    diagnostics: dict = field(default_factory=dict)

    def velocity_at_qp(self, degree=4):
        return fem.p2_vector_at_qp(self.mesh, self.dofmap, self.velocity, degree)

    @property
    def max_speed(self):
        return float(np.max(np.linalg.norm(self.velocity.reshape(-1, 2), axis=1)))


def _vector_p2_load(mesh, dofmap, forcing, degree):
    pts, _ = mesh.quadrature(degree)
    bary, w = triangle_rule(degree)
    basis = fem.p2_basis(bary)
    Fq = forcing(pts[..., 0], pts[..., 1])
    local = np.einsum("q,tqc,qk->tkc", w, Fq, basis) * mesh.areas[:, None, None]
    ents = dofmap.entities_of_triangles()
    out = np.zeros(dofmap.n_dofs)
    for c in range(2):
        np.add.at(out, 2 * ents + c, local[:, :, c])
    return out


def _vector_p2_integrals(mesh, dofmap, degree):
    """Componentwise integrals of the P2 basis, as an (n_dofs, 2) sparse matrix."""
    bary, w = triangle_rule(degree)
    basis = fem.p2_basis(bary)
    local = np.einsum("q,qk->k", w, basis)[None, :] * mesh.areas[:, None]
    ents = dofmap.entities_of_triangles()
    vals = np.zeros(dofmap.n_entities)
    np.add.at(vals, ents, local)
    rows, cols, data = [], [], []
    for c in range(2):
        rows.append(2 * np.arange(dofmap.n_entities) + c)
        cols.append(np.full(dofmap.n_entities, c))
        data.append(vals)
    return sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dofmap.n_dofs, 2),
    ).tocsr()


def solve_stokes(mesh, mu=DEFAULT_VISCOSITY, forcing=None, degree=4):
    """Solve the periodic cell Stokes problem for the drift field.

    Parameters
    ----------
    mesh : TriMesh
        Cell mesh; obstacle edges (if present) receive exact no-slip.
    mu : float
        Viscosity, must be positive.
    forcing : callable(x, y) -> (..., 2)
        Body force; defaults to the standard sinusoidal swirl.
    """
    if mu <= 0:
        raise ValueError("viscosity must be positive")
    if forcing is None:
        forcing = sinusoidal_forcing()
    has_obstacle = bool(np.any(mesh.edge_tags == OBSTACLE))
    if not has_obstacle:
        warnings.warn(
            "obstacle-free cell: removing rigid velocity translations by zero mean",
            NoObstacleWarning,
        )
    vel_dm = fem.DofMap(
        mesh,
        fem.VECTOR_P2,
        periodic=True,
        dirichlet_tags=("Obstacle",) if has_obstacle else (),
    )
    pre_dm = fem.DofMap(mesh, fem.PRESSURE_P1, periodic=True)

    bary, w = triangle_rule(degree)
    g2 = fem.p2_gradients_at_qp(mesh, degree)
    ents = vel_dm.entities_of_triangles()

    local_k = np.einsum("q,tqkd,tqld->tkl", w, g2, g2) * mesh.areas[:, None, None]
    K_scalar = fem._scatter(ents, local_k, vel_dm.n_entities)
    A = (mu * sp.kron(K_scalar, sp.eye(2))).tocsr()

    # pressure-divergence coupling b(v, q) = -(q, div v)
    basis1 = bary
    local_g = -np.einsum("q,tqkc,qj->tkcj", w, g2, basis1) * mesh.areas[:, None, None, None]
    rows = (2 * ents[:, :, None, None] + np.arange(2)[None, None, :, None])
    rows = np.broadcast_to(rows, local_g.shape).ravel()
    cols = np.broadcast_to(
        mesh.triangles[:, None, None, :], local_g.shape
    ).ravel()
    G = sp.coo_matrix(
        (local_g.ravel(), (rows, cols)), shape=(vel_dm.n_dofs, mesh.num_vertices)
    ).tocsr()

    f = _vector_p2_load(mesh, vel_dm, forcing, degree)

    Ru, Rp = vel_dm.R, pre_dm.R
    Ar = (Ru.T @ A @ Ru).tocsr()
    Gr = (Ru.T @ G @ Rp).tocsr()
    fr = Ru.T @ f
    mp = Rp.T @ fem.integral_vector(mesh, degree)
    mp_col = sp.csr_matrix(mp[:, None])

    blocks = [
        [Ar, Gr, None],
        [Gr.T, None, mp_col],
        [None, mp_col.T, None],
    ]
    rhs = [fr, np.zeros(Gr.shape[1]), np.zeros(1)]
    if not has_obstacle:
        Vr = (Ru.T @ _vector_p2_integrals(mesh, vel_dm, degree)).tocsr()
        blocks[0].append(Vr)
        blocks[1].append(None)
        blocks[2].append(None)
        blocks.append([Vr.T, None, None, None])
        rhs.append(np.zeros(2))

    system = fem.SparseSystem(
        matrix=sp.bmat(blocks, format="csr"), rhs=np.concatenate(rhs)
    )
    x = fem.solve(system)

    nu, npre = Ar.shape[0], Gr.shape[1]
    u_red, p_red = x[:nu], x[nu : nu + npre]
    velocity = Ru @ u_red
    pressure = Rp @ p_red

    # diagnostics: all computed with the same quadrature as the assembly
    div_res = Gr.T @ u_red
    coeffs = velocity.reshape(-1, 2)[ents]  # (nt, 6, 2)
    grad_u = np.einsum("tqkd,tkc->tqcd", g2, coeffs)  # (nt, nq, 2, 2)
    div_qp = grad_u[..., 0, 0] + grad_u[..., 1, 1]
    wA = w[None, :] * mesh.areas[:, None]
    grad_norm = float(np.sqrt(np.sum(wA * np.einsum("tqcd->tq", grad_u**2))))
    div_l2 = float(np.sqrt(np.sum(wA * div_qp**2)))
    energy_lhs = float(u_red @ (Ar @ u_red))
    energy_rhs = float(u_red @ fr)
    noslip_max = (
        float(np.max(np.abs(velocity[vel_dm.dirichlet_dofs]))) if has_obstacle else 0.0
    )
    diagnostics = {
        "weak_divergence_max": float(np.max(np.abs(div_res))) if len(div_res) else 0.0,
        "div_l2": div_l2,
        "div_l2_relative": div_l2 / grad_norm if grad_norm > 0 else 0.0,
        "grad_norm": grad_norm,
        "energy_lhs": energy_lhs,
        "energy_rhs": energy_rhs,
        "pressure_mean": float(mp @ p_red),
        "noslip_max": noslip_max,
    }
    return StokesSolution(
        mesh=mesh,
        dofmap=vel_dm,
        velocity=velocity,
        pressure=pressure,
        mu=mu,
        diagnostics=diagnostics,
    )


def write_vertex_fields(solution, path):
    """Export velocity and pressure on the vertex grid (index B1 B2 p per line)."""
    mesh = solution.mesh
    vel = solution.velocity.reshape(-1, 2)[: mesh.num_vertices]
    with open(path, "w") as f:
        for i in range(mesh.num_vertices):
            f.write(
                f"{i} {vel[i, 0]!r} {vel[i, 1]!r} {solution.pressure[i]!r}\n"
            )

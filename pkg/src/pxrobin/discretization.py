"""Cached quadrature tables binding problem data to a mesh.

Everything downstream (modulars, energies, solvers) consumes the arrays
prepared here: physical quadrature weights, field values at quadrature
points, P1 shape values and element gradients.  Tables are immutable and
cached per mesh / per spec.
"""

from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import MeshError
from .fields import (
    EDGE_QUAD_DEGREE,
    VOLUME_QUAD_DEGREE,
    exponent_bounds,
    require_valid,
    spec_mesh,
)
from .geometry import (
    edge_quad_points,
    edge_quadrature,
    elem_gradients,
    triangle_quadrature,
    volume_quad_points,
)


class MeshTables:
    """Field-independent quadrature data for one mesh."""

    def __init__(self, mesh):
        self.mesh = mesh
        vol_rule = triangle_quadrature(VOLUME_QUAD_DEGREE)
        edge_rule = edge_quadrature(EDGE_QUAD_DEGREE)

        self.tri = np.ascontiguousarray(mesh.triangles, dtype=np.int64)
        self.grads = np.ascontiguousarray(elem_gradients(mesh))
        areas = mesh.triangle_areas()
        # reference weights sum to 1/2; the Jacobian of the affine map is 2*area
        self.vol_w = np.ascontiguousarray(vol_rule.weights[None, :] * (2.0 * areas)[:, None])
        self.vol_pts = volume_quad_points(mesh, vol_rule)
        self.shape_vol = np.ascontiguousarray(vol_rule.points)  # (Q, 3) barycentric = P1 values

        self.edges = np.ascontiguousarray(mesh.boundary_edges, dtype=np.int64)
        lengths = mesh.edge_lengths()
        self.edge_w = np.ascontiguousarray(edge_rule.weights[None, :] * lengths[:, None])
        self.edge_pts = edge_quad_points(mesh, edge_rule)
        t = edge_rule.points
        self.shape_edge = np.ascontiguousarray(np.column_stack([1.0 - t, t]))  # (Qe, 2)

    def interp_volume(self, values):
        """Nodal vector -> values at volume quadrature points, (T, Q)."""
        return values[self.tri] @ self.shape_vol.T

    def interp_gradient(self, values):
        """Nodal vector -> per-triangle constant gradient, (T, 2)."""
        return np.einsum("ti,tid->td", values[self.tri], self.grads)

    def interp_edge(self, values):
        """Nodal vector -> values at boundary quadrature points, (E, Qe)."""
        return values[self.edges] @ self.shape_edge.T


@lru_cache(maxsize=64)
def mesh_tables(mesh):
    return MeshTables(mesh)


def eval_on_volume(tables, f):
    """Field values at all volume quadrature points, C-contiguous (T, Q)."""
    pts = tables.vol_pts
    return np.ascontiguousarray(f(pts[..., 0], pts[..., 1]))


def eval_on_edges(tables, f):
    """Field values at all boundary quadrature points, (E, Qe)."""
    pts = tables.edge_pts
    return np.ascontiguousarray(f(pts[..., 0], pts[..., 1]))


class Discretization:
    """Quadrature tables of one problem spec on its canonical mesh."""

    def __init__(self, spec):
        self.spec = spec
        self.regime = require_valid(spec)
        self.mesh = spec_mesh(spec)
        self.tables = mesh_tables(self.mesh)
        t = self.tables

        self.a_q = eval_on_volume(t, spec.a)
        self.b_q = eval_on_volume(t, spec.b)
        self.p_q = eval_on_volume(t, spec.p)
        self.q_q = eval_on_volume(t, spec.q)
        self.beta_e = eval_on_edges(t, spec.beta)
        self.p_e = eval_on_edges(t, spec.p)

        self.wa = np.ascontiguousarray(t.vol_w * self.a_q)
        self.wb = np.ascontiguousarray(t.vol_w * self.b_q)
        self.wa_over_p = np.ascontiguousarray(self.wa / self.p_q)
        self.wb_over_q = np.ascontiguousarray(self.wb / self.q_q)
        self.wbeta = np.ascontiguousarray(t.edge_w * self.beta_e)
        self.wbeta_over_p = np.ascontiguousarray(self.wbeta / self.p_e)

        self.p_minus, self.p_plus = exponent_bounds(spec.p, self.mesh)
        self.q_minus, self.q_plus = exponent_bounds(spec.q, self.mesh)

        eps = spec.grad_eps
        if eps is None:
            eps = 0.0 if self.p_minus >= 2.0 else 1e-10
        self.grad_eps = float(eps)

        nv = self.mesh.num_vertices
        lumped = np.bincount(
            t.tri.ravel(), weights=(self.wb @ t.shape_vol).ravel(), minlength=nv
        )
        lumped += np.bincount(
            t.edges.ravel(), weights=(self.wbeta @ t.shape_edge).ravel(), minlength=nv
        )
        self.lumped_mass = lumped

        self._surrogate = None

    @property
    def num_vertices(self):
        return self.mesh.num_vertices

    def check_function(self, u):
        """Accept nodal data living on this discretization's mesh."""
        values = np.asarray(u.values if hasattr(u, "values") else u, dtype=float)
        if values.shape != (self.num_vertices,):
            raise MeshError(
                f"nodal vector of length {values.shape} does not match mesh "
                f"with {self.num_vertices} vertices"
            )
        m = getattr(u, "mesh", None)
        if m is not None and m is not self.mesh:
            same = (
                m.num_vertices == self.mesh.num_vertices
                and m.num_triangles == self.mesh.num_triangles
                and np.array_equal(m.vertices, self.mesh.vertices)
                and np.array_equal(m.triangles, self.mesh.triangles)
            )
            if not same:
                raise MeshError("function mesh does not match the spec mesh")
        return values

    def surrogate_solver(self):
        """Factorized linear operator a-stiffness + beta-boundary + b-mass.

        Used as a fixed descent preconditioner; built once per spec.
        """
        if self._surrogate is None:
            K = stiffness_matrix(self.tables, self.wa)
            M = mass_matrix(self.tables, self.wb)
            B = boundary_mass_matrix(self.tables, self.wbeta)
            self._surrogate = splu((K + M + B).tocsc())
        return self._surrogate


@lru_cache(maxsize=32)
def discretize(spec):
    return Discretization(spec)


# ---------------------------------------------------------------------------
# sparse P1 matrices (used by the linear oracle and the preconditioner)

def stiffness_matrix(tables, coeff_w):
    """sum_q w*c per triangle times grad_i . grad_j, assembled sparse."""
    ct = np.sum(coeff_w, axis=1)
    local = np.einsum("t,tid,tjd->tij", ct, tables.grads, tables.grads)
    return _scatter_triangle(tables, local)


def mass_matrix(tables, coeff_w):
    """Volume mass matrix with a per-quadrature-point coefficient."""
    n = tables.shape_vol
    local = np.einsum("tq,qi,qj->tij", coeff_w, n, n)
    return _scatter_triangle(tables, local)


def boundary_mass_matrix(tables, coeff_w):
    """Boundary mass matrix over the closed edge loop."""
    n = tables.shape_edge
    local = np.einsum("eq,qi,qj->eij", coeff_w, n, n)
    nv = tables.mesh.num_vertices
    rows = np.broadcast_to(tables.edges[:, :, None], local.shape).ravel()
    cols = np.broadcast_to(tables.edges[:, None, :], local.shape).ravel()
    mat = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(nv, nv))
    return mat.tocsr()


def _scatter_triangle(tables, local):
    nv = tables.mesh.num_vertices
    rows = np.broadcast_to(tables.tri[:, :, None], local.shape).ravel()
    cols = np.broadcast_to(tables.tri[:, None, :], local.shape).ravel()
    mat = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(nv, nv))
    return mat.tocsr()

"""Energy functional, derivative assembly and residual for the Robin problem.

The energy of a nodal function u is

    E(u) = int a/p (|grad u|^2 + eps^2)^(p/2) dx
         + int_bdry beta/p |u|^p ds  -  lambda int b/q |u|^q dx,

with eps the gradient regularization from the spec (0 unless inf p < 2).
Gradient assembly differentiates exactly the same quadrature sums, so the
nodal gradient is the exact derivative of the discrete energy.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .discretization import discretize
from .errors import PxRobinError


@dataclass(frozen=True)
class EnergyBreakdown:
    """The three quadrature terms of the energy and their signed sum."""

    grad_term: float
    boundary_term: float
    source_term: float
    lam: float

    @property
    def J(self):
        return self.grad_term + self.boundary_term - self.lam * self.source_term


@dataclass(frozen=True, eq=False)
class GradientVector:
    """Nodal dual vector of the energy derivative.

    ``pairing(v)`` evaluates the directional derivative against nodal test
    data v.  ``principal`` collects the gradient and boundary parts (the
    derivative of the principal operator); the source part enters with the
    factor -lambda.  ``lumped_mass`` is the boundary-aware diagonal used by
    the residual norm.
    """

    principal: np.ndarray
    source: np.ndarray
    lam: float
    lumped_mass: np.ndarray

    @property
    def g(self):
        return self.principal - self.lam * self.source

    def pairing(self, v):
        v = np.asarray(v.values if hasattr(v, "values") else v, dtype=float)
        return float(self.g @ v)

    def residual(self):
        g = self.g
        return float(np.sqrt(np.sum(g * g / self.lumped_mass)))


def _gradient_squared(disc, vals):
    gu = disc.tables.interp_gradient(vals)
    g2 = gu[:, 0] ** 2 + gu[:, 1] ** 2 + disc.grad_eps ** 2
    return gu, g2


def energy(u, spec):
    """Evaluate the energy breakdown at u."""
    disc = discretize(spec)
    vals = disc.check_function(u)
    t = disc.tables
    _, g2 = _gradient_squared(disc, vals)
    grad_term = float(np.sum(kernels.row_power_sum(disc.wa_over_p, g2, 0.5 * disc.p_q)))
    ue = t.interp_edge(vals)
    boundary_term = kernels.power_sum(
        disc.wbeta_over_p.ravel(), ue.ravel(), disc.p_e.ravel()
    )
    uq = t.interp_volume(vals)
    source_term = kernels.power_sum(
        disc.wb_over_q.ravel(), np.ascontiguousarray(uq).ravel(), disc.q_q.ravel()
    )
    return EnergyBreakdown(grad_term, boundary_term, source_term, spec.lam)


def energy_value(u, spec):
    return energy(u, spec).J


def energy_gradient(u, spec):
    """Exact nodal derivative of the discrete energy at u."""
    disc = discretize(spec)
    vals = disc.check_function(u)
    if disc.grad_eps == 0.0 and disc.p_minus < 2.0:
        raise PxRobinError(
            "gradient assembly requires grad_eps > 0 when inf p < 2"
        )
    t = disc.tables
    nv = disc.num_vertices
    gu, g2 = _gradient_squared(disc, vals)
    crow = kernels.row_power_sum(disc.wa, g2, 0.5 * (disc.p_q - 2.0))
    g_grad = kernels.assemble_gradient(t.tri, crow, np.ascontiguousarray(gu), t.grads, nv)
    ue = np.ascontiguousarray(t.interp_edge(vals))
    g_bdry = kernels.assemble_edge(
        t.edges, disc.wbeta, ue, disc.p_e - 1.0, t.shape_edge, nv
    )
    uq = np.ascontiguousarray(t.interp_volume(vals))
    g_src = kernels.assemble_volume(
        t.tri, disc.wb, uq, disc.q_q - 1.0, t.shape_vol, nv
    )
    return GradientVector(g_grad + g_bdry, g_src, spec.lam, disc.lumped_mass)


def weak_residual(u, spec):
    """Lumped-mass dual norm of the energy derivative.

    Zero exactly at discrete weak solutions.  This preconditioned Euclidean
    norm stands in for the true dual-space norm, which would require an
    auxiliary optimization per evaluation; on a fixed mesh the two are
    equivalent and vanish together.
    """
    return energy_gradient(u, spec).residual()


# ---------------------------------------------------------------------------
# principal operator and modular/norm wrappers

def robin_modular(u, spec):
    """int a |grad u|^p dx + int_bdry beta |u|^p ds (no eps, no 1/p)."""
    disc = discretize(spec)
    vals = disc.check_function(u)
    t = disc.tables
    gu = t.interp_gradient(vals)
    g2 = gu[:, 0] ** 2 + gu[:, 1] ** 2
    grad = float(np.sum(kernels.row_power_sum(disc.wa, g2, 0.5 * disc.p_q)))
    ue = t.interp_edge(vals)
    bdry = kernels.power_sum(disc.wbeta.ravel(), ue.ravel(), disc.p_e.ravel())
    return grad + bdry


def _robin_closure_arrays(disc, vals):
    t = disc.tables
    gu = t.interp_gradient(vals)
    gnorm = np.hypot(gu[:, 0], gu[:, 1])
    nq = t.vol_w.shape[1]
    samples = np.repeat(gnorm[:, None], nq, axis=1).ravel()
    ue = t.interp_edge(vals)
    weights = np.concatenate([disc.wa.ravel(), disc.wbeta.ravel()])
    samp = np.concatenate([samples, np.ascontiguousarray(ue).ravel()])
    expo = np.concatenate([disc.p_q.ravel(), disc.p_e.ravel()])
    return weights, samp, expo


def robin_norm(u, spec):
    """Luxemburg norm of the combined gradient + boundary modular."""
    from .modular import luxemburg_norm, sample_closure

    disc = discretize(spec)
    vals = disc.check_function(u)
    closure = sample_closure(*_robin_closure_arrays(disc, vals))
    return 0.0 if closure.is_zero() else luxemburg_norm(closure)


def source_norm(u, spec):
    """Luxemburg norm of u against weight b and exponent q."""
    from .modular import luxemburg_norm, sample_closure

    disc = discretize(spec)
    vals = disc.check_function(u)
    uq = np.ascontiguousarray(disc.tables.interp_volume(vals))
    closure = sample_closure(disc.wb.ravel(), uq.ravel(), disc.q_q.ravel())
    return 0.0 if closure.is_zero() else luxemburg_norm(closure)


def sobolev_norm(u, spec):
    """Gradient Luxemburg norm (weight a) plus volume Luxemburg norm (weight b)."""
    from .modular import luxemburg_norm, sample_closure

    disc = discretize(spec)
    vals = disc.check_function(u)
    t = disc.tables
    gu = t.interp_gradient(vals)
    gnorm = np.hypot(gu[:, 0], gu[:, 1])
    nq = t.vol_w.shape[1]
    gsamp = np.repeat(gnorm[:, None], nq, axis=1).ravel()
    gclos = sample_closure(disc.wa.ravel(), gsamp, disc.p_q.ravel())
    gn = 0.0 if gclos.is_zero() else luxemburg_norm(gclos)
    uq = np.ascontiguousarray(t.interp_volume(vals)).ravel()
    vclos = sample_closure(disc.wb.ravel(), uq, disc.p_q.ravel())
    vn = 0.0 if vclos.is_zero() else luxemburg_norm(vclos)
    return gn + vn


def principal_part(u, spec):
    """int a/p |grad u|^p dx + int_bdry beta/p |u|^p ds (regularized as E)."""
    e = energy(u, spec)
    return e.grad_term + e.boundary_term


def principal_pairing(u, v, spec):
    """Derivative of the principal part at u, paired with v."""
    gv = energy_gradient(u, spec)
    v = np.asarray(v.values if hasattr(v, "values") else v, dtype=float)
    return float(gv.principal @ v)


def source_pairing(u, v, spec):
    """int b |u|^{q-2} u v dx at u, paired with v (no lambda factor)."""
    gv = energy_gradient(u, spec)
    v = np.asarray(v.values if hasattr(v, "values") else v, dtype=float)
    return float(gv.source @ v)


def monotonicity_gap(u, v, spec):
    """<principal'(u) - principal'(v), u - v>; nonnegative, 0 only at u = v."""
    disc = discretize(spec)
    if disc.p_minus < 2.0 and disc.grad_eps == 0.0:
        raise PxRobinError("monotonicity gap requires inf p >= 2 or grad_eps > 0")
    gu = energy_gradient(u, spec)
    gv = energy_gradient(v, spec)
    du = disc.check_function(u) - disc.check_function(v)
    return float((gu.principal - gv.principal) @ du)


# ---------------------------------------------------------------------------
# Luxemburg norm gradients (implicit differentiation of rho(u/tau) = 1)

def source_norm_and_gradient(disc, vals):
    """(norm, nodal gradient) of the b-weighted q-exponent Luxemburg norm."""
    from .modular import luxemburg_norm, sample_closure

    t = disc.tables
    uq = np.ascontiguousarray(t.interp_volume(vals))
    closure = sample_closure(disc.wb.ravel(), uq.ravel(), disc.q_q.ravel())
    if closure.is_zero():
        raise ValueError("norm gradient undefined at the zero function")
    tau = luxemburg_norm(closure)
    su = np.ascontiguousarray(uq / tau)
    wbq = np.ascontiguousarray(disc.wb * disc.q_q)
    num = kernels.assemble_volume(
        t.tri, wbq, su, disc.q_q - 1.0, t.shape_vol, disc.num_vertices
    )
    den = kernels.power_sum(wbq.ravel(), su.ravel(), disc.q_q.ravel())
    return tau, num / den


def robin_norm_and_gradient(disc, vals):
    """(norm, nodal gradient) of the gradient+boundary Luxemburg norm."""
    from .modular import luxemburg_norm, sample_closure

    closure = sample_closure(*_robin_closure_arrays(disc, vals))
    if closure.is_zero():
        raise ValueError("norm gradient undefined at the zero function")
    tau = luxemburg_norm(closure)
    t = disc.tables
    nv = disc.num_vertices
    gu = t.interp_gradient(vals) / tau
    g2 = gu[:, 0] ** 2 + gu[:, 1] ** 2 + (disc.grad_eps / tau) ** 2
    wap = np.ascontiguousarray(disc.wa * disc.p_q)
    crow = kernels.row_power_sum(wap, g2, 0.5 * (disc.p_q - 2.0))
    num = kernels.assemble_gradient(t.tri, crow, np.ascontiguousarray(gu), t.grads, nv)
    den = float(np.sum(kernels.row_power_sum(wap, g2, 0.5 * disc.p_q)))
    se = np.ascontiguousarray(t.interp_edge(vals) / tau)
    wbp = np.ascontiguousarray(disc.wbeta * disc.p_e)
    num += kernels.assemble_edge(t.edges, wbp, se, disc.p_e - 1.0, t.shape_edge, nv)
    den += kernels.power_sum(wbp.ravel(), se.ravel(), disc.p_e.ravel())
    return tau, num / den

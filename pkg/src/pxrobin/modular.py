"""Variable-exponent modulars and Luxemburg norms of P1 functions.

A modular here is a positively weighted sum of powers over quadrature
samples, rho(u) = sum_i w_i * |s_i|^{e_i} with all e_i > 1, taken over the
volume, the boundary, or the per-triangle gradient magnitudes.  The
Luxemburg norm is the unique tau with rho(u/tau) = 1, located by doubling
then bisection: tau -> rho(u/tau) is strictly monotone, so bisection is
unconditionally safe, while the derivative of rho(u/tau) blows up as
tau -> 0 and rules out Newton.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .discretization import eval_on_edges, eval_on_volume, mesh_tables
from .errors import NumericalError
from .fields import exponent_bounds

LUX_RTOL = 1e-12
LUX_MODULAR_BAND = 1e-10


@dataclass(frozen=True, eq=False)
class DiscreteFunction:
    """Nodal coefficients of a piecewise-linear function on a mesh."""

    mesh: object
    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=float)
        if vals.shape != (self.mesh.num_vertices,):
            raise ValueError(
                f"expected {self.mesh.num_vertices} nodal values, got {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("nodal values must be finite")
        object.__setattr__(self, "values", vals)

    def scaled(self, t):
        return DiscreteFunction(self.mesh, t * self.values)


class ModularClosure:
    """Evaluable map tau -> rho(u/tau) over fixed quadrature samples.

    Closures of the same function on the same mesh may be added, which
    concatenates their samples (the modular of a sum of integrals).
    """

    def __init__(self, weights, samples, exponents):
        self.weights = np.ascontiguousarray(weights, dtype=float).ravel()
        self.samples = np.ascontiguousarray(samples, dtype=float).ravel()
        self.exponents = np.ascontiguousarray(exponents, dtype=float).ravel()

    def __call__(self, tau):
        if tau <= 0:
            raise ValueError("modular closure is defined for tau > 0")
        return kernels.power_sum_scaled(self.weights, self.samples, self.exponents, tau)

    def modular(self):
        """rho(u) itself (tau = 1)."""
        return kernels.power_sum(self.weights, self.samples, self.exponents)

    def is_zero(self):
        return not np.any(self.samples != 0.0)

    def __add__(self, other):
        return ModularClosure(
            np.concatenate([self.weights, other.weights]),
            np.concatenate([self.samples, other.samples]),
            np.concatenate([self.exponents, other.exponents]),
        )


def sample_closure(weights, samples, exponents):
    """Closure over raw quadrature samples (no nodal function involved)."""
    return ModularClosure(weights, samples, exponents)


def volume_closure(u, exponent, weight):
    """Closure of the weighted Lebesgue modular over the domain."""
    t = mesh_tables(u.mesh)
    wq = t.vol_w * eval_on_volume(t, weight)
    return ModularClosure(wq, t.interp_volume(u.values), eval_on_volume(t, exponent))


def boundary_closure(u, exponent, weight):
    """Closure of the weighted modular over the boundary loop."""
    t = mesh_tables(u.mesh)
    wq = t.edge_w * eval_on_edges(t, weight)
    return ModularClosure(wq, t.interp_edge(u.values), eval_on_edges(t, exponent))


def gradient_closure(u, exponent, weight):
    """Closure of the weighted modular of |grad u| over the domain."""
    t = mesh_tables(u.mesh)
    wq = t.vol_w * eval_on_volume(t, weight)
    gnorm = np.linalg.norm(t.interp_gradient(u.values), axis=1)
    nq = t.vol_w.shape[1]
    samples = np.repeat(gnorm[:, None], nq, axis=1)
    return ModularClosure(wq, samples, eval_on_volume(t, exponent))


def volume_modular(u, exponent, weight):
    """Quadrature value of the weighted modular of u over the domain."""
    return volume_closure(u, exponent, weight).modular()


def boundary_modular(u, exponent, weight):
    """Quadrature value of the weighted modular of u over the boundary."""
    return boundary_closure(u, exponent, weight).modular()


def gradient_modular(u, exponent, weight):
    """Quadrature value of the weighted modular of |grad u| over the domain."""
    return gradient_closure(u, exponent, weight).modular()


def luxemburg_norm(closure, rtol=LUX_RTOL, max_bisect=200):
    """The unique tau > 0 with rho(u/tau) = 1; 0 for the zero function.

    Brackets tau in [2^-k, 2^k] by doubling until the sign of
    rho(u/tau) - 1 flips, then bisects to relative tolerance ``rtol``.
    Guarantees rho(u/tau) within 1e-10 of 1 on return.
    """
    if closure.is_zero():
        return 0.0

    def excess(tau):
        return closure(tau) - 1.0

    f1 = excess(1.0)
    if f1 == 0.0:
        return 1.0
    lo = hi = 1.0
    if f1 > 0.0:
        for _ in range(4400):
            lo, hi = hi, 2.0 * hi
            if excess(hi) <= 0.0:
                break
        else:
            raise NumericalError("Luxemburg bracketing failed to the right")
    else:
        for _ in range(4400):
            hi, lo = lo, 0.5 * lo
            if excess(lo) >= 0.0:
                break
        else:
            raise NumericalError("Luxemburg bracketing failed to the left")

    for _ in range(max_bisect):
        mid = 0.5 * (lo + hi)
        fm = excess(mid)
        if fm == 0.0:
            lo = hi = mid
            break
        if fm > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * hi:
            break
    else:
        raise NumericalError("Luxemburg bisection did not converge in "
                             f"{max_bisect} steps")

    tau = 0.5 * (lo + hi)
    check = closure(tau)
    if not (1.0 - LUX_MODULAR_BAND <= check <= 1.0 + LUX_MODULAR_BAND):
        raise NumericalError(
            f"Luxemburg root verification failed: rho(u/tau) = {check!r}"
        )
    return tau


def volume_norm(u, exponent, weight):
    """Luxemburg norm of u in the weighted variable-exponent Lebesgue space."""
    c = volume_closure(u, exponent, weight)
    return 0.0 if c.is_zero() else luxemburg_norm(c)


def boundary_norm(u, exponent, weight):
    c = boundary_closure(u, exponent, weight)
    return 0.0 if c.is_zero() else luxemburg_norm(c)


def gradient_norm(u, exponent, weight):
    c = gradient_closure(u, exponent, weight)
    return 0.0 if c.is_zero() else luxemburg_norm(c)


# ---------------------------------------------------------------------------
# norm/modular relation checks

@dataclass(frozen=True)
class RelationVerdict:
    name: str
    holds: bool
    applicable: bool
    detail: str


def _le(a, b, slack):
    return a <= b + slack * (1.0 + abs(a) + abs(b))


def modular_norm_relations(u, exponent, weight, slack=1e-9):
    """Pass/fail verdicts for the norm-versus-modular sandwich relations.

    Checks, with the stated slack: (i) trichotomy of norm and modular about
    1, (ii) norm^{e-} <= rho <= norm^{e+} when norm > 1, (iii) the reversed
    sandwich when norm < 1, (iv) the min/max sandwich, (v) the rho^{1/e}
    sandwich on the norm.  Relations whose branch condition is not met are
    reported as applicable=False and count as holding.
    """
    emin, emax = exponent_bounds(exponent, u.mesh)
    closure = volume_closure(u, exponent, weight)
    rho = closure.modular()
    norm = 0.0 if closure.is_zero() else luxemburg_norm(closure)
    verdicts = []

    if norm > 1.0 + slack:
        tri_ok = rho >= 1.0 - slack
    elif norm < 1.0 - slack:
        tri_ok = rho <= 1.0 + slack
    else:
        tri_ok = abs(rho - 1.0) <= max(slack * 10.0 * max(emax, 1.0), 1e-8)
    verdicts.append(RelationVerdict(
        "trichotomy", bool(tri_ok), True, f"norm={norm!r} rho={rho!r}"))

    big = norm > 1.0
    ok = (not big) or (_le(norm ** emin, rho, slack) and _le(rho, norm ** emax, slack))
    verdicts.append(RelationVerdict(
        "norm>1 sandwich", bool(ok), big, f"norm={norm!r} rho={rho!r}"))

    small = 0.0 < norm < 1.0
    ok = (not small) or (_le(norm ** emax, rho, slack) and _le(rho, norm ** emin, slack))
    verdicts.append(RelationVerdict(
        "norm<1 sandwich", bool(ok), small, f"norm={norm!r} rho={rho!r}"))

    lo = min(norm ** emin, norm ** emax)
    hi = max(norm ** emin, norm ** emax)
    ok = _le(lo, rho, slack) and _le(rho, hi, slack)
    verdicts.append(RelationVerdict(
        "min/max sandwich", bool(ok), True, f"[{lo!r}, {hi!r}] rho={rho!r}"))

    lo = min(rho ** (1.0 / emin), rho ** (1.0 / emax))
    hi = max(rho ** (1.0 / emin), rho ** (1.0 / emax))
    ok = _le(lo, norm, slack) and _le(norm, hi, slack)
    verdicts.append(RelationVerdict(
        "root sandwich", bool(ok), True, f"[{lo!r}, {hi!r}] norm={norm!r}"))
    return verdicts


def holder_pairing_bound(u, v, exponent, weight):
    """Both sides of the duality-pairing bound for the source term.

    Returns (lhs, rhs) where lhs = |integral of w |u|^{q-2} u v| and
    rhs = 2 |||u|^{q-1} w^{1/r}||_{r(.)} * ||v w^{1/q}||_{q(.)} with
    1/q + 1/r = 1 pointwise; the weight is split as w^{1/q + 1/r} and the
    two Luxemburg norms are taken against plain Lebesgue measure.  The
    bound lhs <= rhs holds for every pair of discrete functions.
    """
    if u.mesh is not v.mesh and not np.array_equal(u.mesh.vertices, v.mesh.vertices):
        raise ValueError("functions live on different meshes")
    t = mesh_tables(u.mesh)
    qq = eval_on_volume(t, exponent)
    if np.min(qq) <= 1.0:
        raise ValueError("the pairing bound requires inf q > 1")
    wq = eval_on_volume(t, weight)
    uq = t.interp_volume(u.values)
    vq = t.interp_volume(v.values)

    au = np.abs(uq)
    pos = au > 0.0
    upow = np.zeros_like(uq)
    upow[pos] = np.sign(uq[pos]) * np.exp((qq[pos] - 1.0) * np.log(au[pos]))
    lhs = abs(float(np.sum(t.vol_w * wq * upow * vq)))

    rr = qq / (qq - 1.0)
    a_sample = np.abs(upow) * wq ** (1.0 / rr)
    b_sample = np.abs(vq) * wq ** (1.0 / qq)
    norm_a = luxemburg_norm(sample_closure(t.vol_w, a_sample, rr)) \
        if np.any(a_sample != 0.0) else 0.0
    norm_b = luxemburg_norm(sample_closure(t.vol_w, b_sample, qq)) \
        if np.any(b_sample != 0.0) else 0.0
    return lhs, 2.0 * norm_a * norm_b

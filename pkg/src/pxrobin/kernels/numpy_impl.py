"""Pure-numpy implementations of the quadrature-level kernels.

Semantics shared with the numba backend: powers are evaluated as
exp(e * log|s|), a zero base contributes 0 for e != 0 and 1 for e == 0.
Sums may overflow to +inf while a Luxemburg bracket probes tiny scales;
callers rely on the sign of (sum - 1), which stays correct.
"""

import numpy as np


def power_sum(wc, s, e):
    """sum(wc * |s|^e)."""
    s = np.abs(s)
    pos = s > 0.0
    with np.errstate(over="ignore"):
        total = float(np.sum(wc[pos] * np.exp(e[pos] * np.log(s[pos]))))
    ze = ~pos & (e == 0.0)
    if np.any(ze):
        total += float(np.sum(wc[ze]))
    return total


def power_sum_scaled(wc, s, e, tau):
    """sum(wc * |s/tau|^e)."""
    s = np.abs(s)
    pos = s > 0.0
    lt = np.log(tau)
    with np.errstate(over="ignore"):
        total = float(np.sum(wc[pos] * np.exp(e[pos] * (np.log(s[pos]) - lt))))
    ze = ~pos & (e == 0.0)
    if np.any(ze):
        total += float(np.sum(wc[ze]))
    return total


def row_power_sum(wc, base, e):
    """Per-row sum(wc[t, :] * base[t]^e[t, :]) for a (T,) vector of bases."""
    out = np.zeros(base.shape[0])
    pos = base > 0.0
    if np.any(pos):
        with np.errstate(over="ignore"):
            out[pos] = np.sum(
                wc[pos] * np.exp(e[pos] * np.log(base[pos])[:, None]), axis=1
            )
    z = ~pos
    if np.any(z):
        out[z] = np.sum(wc[z] * (e[z] == 0.0), axis=1)
    return out


def assemble_volume(tri, coeff, u, e, shp, nverts):
    """Scatter sum_q coeff*sign(u)|u|^e * shp[q, i] into nodal slot tri[t, i]."""
    s = np.abs(u)
    pos = s > 0.0
    vals = np.zeros_like(u)
    vals[pos] = coeff[pos] * np.sign(u[pos]) * np.exp(e[pos] * np.log(s[pos]))
    contrib = vals @ shp
    return np.bincount(tri.ravel(), weights=contrib.ravel(), minlength=nverts)


def assemble_gradient(tri, crow, gu, grads, nverts):
    """Scatter crow[t] * (gu[t] . grad_i[t]) into nodal slot tri[t, i]."""
    dots = np.einsum("td,tid->ti", gu, grads)
    contrib = crow[:, None] * dots
    return np.bincount(tri.ravel(), weights=contrib.ravel(), minlength=nverts)


def assemble_edge(edges, coeff, u, e, shp, nverts):
    """Edge-rule counterpart of assemble_volume over the boundary loop."""
    s = np.abs(u)
    pos = s > 0.0
    vals = np.zeros_like(u)
    vals[pos] = coeff[pos] * np.sign(u[pos]) * np.exp(e[pos] * np.log(s[pos]))
    contrib = vals @ shp
    return np.bincount(edges.ravel(), weights=contrib.ravel(), minlength=nverts)

"""Numba-compiled quadrature kernels; same contracts as numpy_impl.

Loops are serial so that summation order (and hence the emitted bits) is
fixed for a given backend choice.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def power_sum(wc, s, e):
    total = 0.0
    for i in range(wc.shape[0]):
        v = abs(s[i])
        if v > 0.0:
            total += wc[i] * np.exp(e[i] * np.log(v))
        elif e[i] == 0.0:
            total += wc[i]
    return total


@njit(cache=True)
def power_sum_scaled(wc, s, e, tau):
    lt = np.log(tau)
    total = 0.0
    for i in range(wc.shape[0]):
        v = abs(s[i])
        if v > 0.0:
            total += wc[i] * np.exp(e[i] * (np.log(v) - lt))
        elif e[i] == 0.0:
            total += wc[i]
    return total


@njit(cache=True)
def row_power_sum(wc, base, e):
    nt, nq = wc.shape
    out = np.zeros(nt)
    for t in range(nt):
        bt = base[t]
        acc = 0.0
        if bt > 0.0:
            lb = np.log(bt)
            for q in range(nq):
                acc += wc[t, q] * np.exp(e[t, q] * lb)
        else:
            for q in range(nq):
                if e[t, q] == 0.0:
                    acc += wc[t, q]
        out[t] = acc
    return out


@njit(cache=True)
def assemble_volume(tri, coeff, u, e, shp, nverts):
    nt, nq = u.shape
    g = np.zeros(nverts)
    for t in range(nt):
        c0 = 0.0
        c1 = 0.0
        c2 = 0.0
        for q in range(nq):
            v = u[t, q]
            av = abs(v)
            if av > 0.0:
                s = coeff[t, q] * np.exp(e[t, q] * np.log(av))
                if v < 0.0:
                    s = -s
                c0 += s * shp[q, 0]
                c1 += s * shp[q, 1]
                c2 += s * shp[q, 2]
        g[tri[t, 0]] += c0
        g[tri[t, 1]] += c1
        g[tri[t, 2]] += c2
    return g


@njit(cache=True)
def assemble_gradient(tri, crow, gu, grads, nverts):
    nt = tri.shape[0]
    g = np.zeros(nverts)
    for t in range(nt):
        gx = gu[t, 0]
        gy = gu[t, 1]
        c = crow[t]
        for i in range(3):
            g[tri[t, i]] += c * (gx * grads[t, i, 0] + gy * grads[t, i, 1])
    return g


@njit(cache=True)
def assemble_edge(edges, coeff, u, e, shp, nverts):
    ne, nq = u.shape
    g = np.zeros(nverts)
    for k in range(ne):
        c0 = 0.0
        c1 = 0.0
        for q in range(nq):
            v = u[k, q]
            av = abs(v)
            if av > 0.0:
                s = coeff[k, q] * np.exp(e[k, q] * np.log(av))
                if v < 0.0:
                    s = -s
                c0 += s * shp[q, 0]
                c1 += s * shp[q, 1]
        g[edges[k, 0]] += c0
        g[edges[k, 1]] += c1
    return g

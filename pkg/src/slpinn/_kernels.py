"""Fused numba loops for the (points x hidden units) reductions.

Both kernels take the hidden pre-activations in ``A`` (or, for tanh, the
already evaluated ``tanh(Z)``) and rebuild one row of activation derivatives
at a time, so no (n, N) derivative array is ever materialised.

``act`` codes: 0 = tanh (``A`` holds s = tanh(z)), 1 = relu (``A`` holds z).
``chain`` is the (5, 6) table of tanh derivative polynomials in s.
"""

import numba
import numpy as np

TANH = 0
RELU = 1


@numba.njit(fastmath=True, cache=True, inline="always")
def _fill_row(a_row, act, chain, max_order, D):
    N = a_row.shape[0]
    if act == TANH:
        for m in range(max_order + 1):
            c0 = chain[m, 0]
            c1 = chain[m, 1]
            c2 = chain[m, 2]
            c3 = chain[m, 3]
            c4 = chain[m, 4]
            c5 = chain[m, 5]
            for i in range(N):
                s = a_row[i]
                D[m, i] = c0 + s * (c1 + s * (c2 + s * (c3 + s * (c4 + s * c5))))
    else:
        for i in range(N):
            z = a_row[i]
            if z > 0.0:
                D[0, i] = z
                if max_order >= 1:
                    D[1, i] = 1.0
            else:
                D[0, i] = 0.0
                if max_order >= 1:
                    D[1, i] = 0.0
        for m in range(2, max_order + 1):
            for i in range(N):
                D[m, i] = 0.0


@numba.njit(fastmath=True, cache=True)
def forward_sums(A, act, chain, U, orders):
    """E[p, e] = sum_i sigma^(orders[e])(z_pi) * U[e, i]."""
    n, N = A.shape
    ne = U.shape[0]
    max_order = 0
    for e in range(ne):
        if orders[e] > max_order:
            max_order = orders[e]
    D = np.empty((max_order + 1, N))
    E = np.zeros((n, ne))
    for p in range(n):
        _fill_row(A[p], act, chain, max_order, D)
        for e in range(ne):
            m = orders[e]
            acc = 0.0
            for i in range(N):
                acc += D[m, i] * U[e, i]
            E[p, e] = acc
    return E


@numba.njit(fastmath=True, cache=True)
def backward_sums(A, act, chain, C, orders):
    """G[c, i] = sum_p sigma^(orders[c])(z_pi) * C[p, c].

    Points are consumed four at a time so each row of G is loaded and
    stored once per block rather than once per point.
    """
    n, N = A.shape
    nc = C.shape[1]
    max_order = 0
    for c in range(nc):
        if orders[c] > max_order:
            max_order = orders[c]
    D0 = np.empty((max_order + 1, N))
    D1 = np.empty((max_order + 1, N))
    D2 = np.empty((max_order + 1, N))
    D3 = np.empty((max_order + 1, N))
    G = np.zeros((nc, N))
    p = 0
    while p + 4 <= n:
        _fill_row(A[p], act, chain, max_order, D0)
        _fill_row(A[p + 1], act, chain, max_order, D1)
        _fill_row(A[p + 2], act, chain, max_order, D2)
        _fill_row(A[p + 3], act, chain, max_order, D3)
        for c in range(nc):
            m = orders[c]
            w0 = C[p, c]
            w1 = C[p + 1, c]
            w2 = C[p + 2, c]
            w3 = C[p + 3, c]
            for i in range(N):
                G[c, i] += D0[m, i] * w0 + D1[m, i] * w1 + D2[m, i] * w2 + D3[m, i] * w3
        p += 4
    while p < n:
        _fill_row(A[p], act, chain, max_order, D0)
        for c in range(nc):
            m = orders[c]
            w0 = C[p, c]
            for i in range(N):
                G[c, i] += D0[m, i] * w0
        p += 1
    return G


@numba.njit(fastmath=True, cache=True)
def preactivation(X, WT, b):
    """Z = X @ WT + b for a tiny input dimension (BLAS is slow at d <= 2)."""
    n, d = X.shape
    N = WT.shape[1]
    Z = np.empty((n, N))
    for p in range(n):
        for i in range(N):
            Z[p, i] = b[i]
        for l in range(d):
            x = X[p, l]
            for i in range(N):
                Z[p, i] += x * WT[l, i]
    return Z

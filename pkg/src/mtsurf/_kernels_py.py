"""Pure numpy implementation of the truncated bivariate series kernels.

Coefficients of a jet of order ``n`` live in a flat complex array ordered by
total degree: index(p, q) = d(d+1)/2 + q with d = p + q.  Every prefix of
length (m+1)(m+2)/2 is therefore the truncation to order m.
"""
from functools import lru_cache

import numpy as np


def size(n):
    return (n + 1) * (n + 2) // 2


def index(p, q):
    d = p + q
    return d * (d + 1) // 2 + q


@lru_cache(maxsize=None)
def exponents(n):
    """(p, q) for every flat slot of an order-n jet."""
    out = np.empty((size(n), 2), dtype=np.intp)
    for d in range(n + 1):
        for q in range(d + 1):
            out[index(d - q, q)] = (d - q, q)
    return out


@lru_cache(maxsize=None)
def _product_matrix(n):
    # S[k, i*T + j] = 1 when slot i times slot j lands in slot k
    t = size(n)
    pq = exponents(n)
    s = np.zeros((t, t * t))
    for i in range(t):
        for j in range(t):
            p = pq[i, 0] + pq[j, 0]
            q = pq[i, 1] + pq[j, 1]
            if p + q <= n:
                s[index(p, q), i * t + j] = 1.0
    return s


def mul(a, b, n):
    return _product_matrix(n) @ np.outer(a, b).ravel()


def compose(d, coeffs, n):
    """Evaluate sum_k coeffs[k] * d**k for a jet ``d`` with zero value slot."""
    s = _product_matrix(n)
    out = np.zeros(size(n), dtype=complex)
    out[0] = coeffs[-1]
    for c in coeffs[-2::-1]:
        out = s @ np.outer(out, d).ravel()
        out[0] += c
    return out

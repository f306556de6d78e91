# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled polynomial kernels (convolution over C int64).

Accumulators are never reduced inside the inner loop; the Python wrapper
guarantees pmod * pmod * len < 2**62 so they cannot overflow.
"""

from libc.stdlib cimport calloc, free


def eisenstein_mul(a, b, Py_ssize_t e, long long p, long long pmod):
    cdef Py_ssize_t i, j, k
    cdef long long ai
    cdef long long *ca
    cdef long long *cb
    cdef long long *conv
    if e == 1:
        return [a[0] * b[0] % pmod]
    ca = <long long *> calloc(e, sizeof(long long))
    cb = <long long *> calloc(e, sizeof(long long))
    conv = <long long *> calloc(2 * e, sizeof(long long))
    if ca == NULL or cb == NULL or conv == NULL:
        free(ca); free(cb); free(conv)
        raise MemoryError()
    try:
        for i in range(e):
            ca[i] = a[i]
            cb[i] = b[i]
        for i in range(e):
            ai = ca[i]
            if ai == 0:
                continue
            for j in range(e):
                conv[i + j] += ai * cb[j]
        out = [0] * e
        for k in range(e, 2 * e - 1):
            conv[k - e] += p * (conv[k] % pmod)
        for k in range(e):
            out[k] = conv[k] % pmod
        return out
    finally:
        free(ca); free(cb); free(conv)


def window_mul(a, b, Py_ssize_t window, long long p):
    cdef Py_ssize_t la = len(a), lb = len(b), n, i, j, top
    cdef long long ai
    cdef long long *ca
    cdef long long *cb
    cdef long long *conv
    if la == 0 or lb == 0 or window <= 0:
        return []
    n = la + lb - 1
    if n > window:
        n = window
    ca = <long long *> calloc(la, sizeof(long long))
    cb = <long long *> calloc(lb, sizeof(long long))
    conv = <long long *> calloc(n, sizeof(long long))
    if ca == NULL or cb == NULL or conv == NULL:
        free(ca); free(cb); free(conv)
        raise MemoryError()
    try:
        for i in range(la):
            ca[i] = a[i]
        for j in range(lb):
            cb[j] = b[j]
        for i in range(la):
            ai = ca[i]
            if ai == 0 or i >= n:
                continue
            top = lb
            if i + top > n:
                top = n - i
            for j in range(top):
                conv[i + j] += ai * cb[j]
        return [conv[i] % p for i in range(n)]
    finally:
        free(ca); free(cb); free(conv)

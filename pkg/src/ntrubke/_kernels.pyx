# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: cyclic convolution and inversion in Z_p[x]/(x^n - 1).

Both functions mirror :mod:`ntrubke._pykernels` exactly; callers go through
:mod:`ntrubke._backend` and never import this module directly.
"""

import numpy as np

from libc.stdint cimport int64_t


def cyclic_convolve(const int64_t[::1] a, const int64_t[::1] b, int64_t modulus):
    """c[k] = sum_{i+j = k mod n} a[i] b[j], centered into (-modulus/2, modulus/2].

    ``modulus == 0`` skips the reduction. Zero coefficients of ``a`` are
    skipped, so pass the sparser operand first.
    """
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j, split
    cdef int64_t ai, half = modulus // 2
    if b.shape[0] != n:
        raise ValueError("length mismatch")
    out = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] c = out
    for i in range(n):
        ai = a[i]
        if ai == 0:
            continue
        split = n - i
        if ai == 1:
            for j in range(split):
                c[i + j] += b[j]
            for j in range(split, n):
                c[j - split] += b[j]
        elif ai == -1:
            for j in range(split):
                c[i + j] -= b[j]
            for j in range(split, n):
                c[j - split] -= b[j]
        else:
            for j in range(split):
                c[i + j] += ai * b[j]
            for j in range(split, n):
                c[j - split] += ai * b[j]
    if modulus != 0:
        for i in range(n):
            c[i] = c[i] % modulus
            if c[i] < 0:
                c[i] += modulus
            if c[i] > half:
                c[i] -= modulus
    return out


cdef inline int64_t _inv_mod(int64_t a, int64_t p):
    # p prime, so a^(p-2) works; p is small in every caller
    cdef int64_t result = 1, base = a % p, e = p - 2
    while e > 0:
        if e & 1:
            result = result * base % p
        base = base * base % p
        e >>= 1
    return result


cdef inline Py_ssize_t _degree(int64_t[::1] poly, Py_ssize_t start):
    cdef Py_ssize_t d = start
    while d >= 0 and poly[d] == 0:
        d -= 1
    return d


def inverse_mod_prime(const int64_t[::1] f, int64_t p):
    """Inverse of f in Z_p[x]/(x^n - 1) by extended Euclid, or None."""
    cdef Py_ssize_t n = f.shape[0]
    cdef Py_ssize_t i, shift, d0, d1, tmp_d
    cdef int64_t lead_inv, c, negc

    r0_arr = np.zeros(n + 1, dtype=np.int64)
    r1_arr = np.zeros(n + 1, dtype=np.int64)
    s0_arr = np.zeros(n + 1, dtype=np.int64)
    s1_arr = np.zeros(n + 1, dtype=np.int64)
    cdef int64_t[::1] r0 = r0_arr
    cdef int64_t[::1] r1 = r1_arr
    cdef int64_t[::1] s0 = s0_arr
    cdef int64_t[::1] s1 = s1_arr
    cdef int64_t[::1] swap

    # invariant: s_k * f == r_k  (mod x^n - 1, mod p)
    r0[0] = p - 1
    r0[n] = 1
    for i in range(n):
        r1[i] = f[i] % p
        if r1[i] < 0:
            r1[i] += p
    s1[0] = 1
    d0 = n
    d1 = _degree(r1, n - 1)

    while d1 > 0:
        lead_inv = _inv_mod(r1[d1], p)
        while d0 >= d1:
            shift = d0 - d1
            c = r0[d0] * lead_inv % p
            negc = p - c
            for i in range(d1 + 1):
                r0[shift + i] = (r0[shift + i] + negc * r1[i]) % p
            for i in range(n + 1 - shift):
                if s1[i] != 0:
                    s0[shift + i] = (s0[shift + i] + negc * s1[i]) % p
            d0 = _degree(r0, d0 - 1)
        swap = r0; r0 = r1; r1 = swap
        swap = s0; s0 = s1; s1 = swap
        tmp_d = d0; d0 = d1; d1 = tmp_d

    if d1 < 0:
        return None
    c = _inv_mod(r1[0], p)
    out = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] res = out
    for i in range(n):
        res[i] = s1[i] * c % p
    # deg s_k < n is guaranteed, but fold s1[n] defensively
    if s1[n] != 0:
        res[0] = (res[0] + s1[n] * c) % p
    return out

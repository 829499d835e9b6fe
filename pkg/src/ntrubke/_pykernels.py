"""Numpy fallback for the compiled kernels in ``_kernels.pyx``.

Same signatures, same outputs. Used when the extension is not built or when
``NTRUBKE_BACKEND=python`` is set.
"""

import numpy as np

# below this many nonzeros in ``a``, shifted adds beat np.convolve
_SPARSE_CUTOFF = 48


def cyclic_convolve(a, b, modulus):
    n = a.shape[0]
    if b.shape[0] != n:
        raise ValueError("length mismatch")
    nz = np.flatnonzero(a)
    if len(nz) <= _SPARSE_CUTOFF:
        out = np.zeros(n, dtype=np.int64)
        for i in nz.tolist():
            ai = int(a[i])
            out[i:] += ai * b[: n - i]
            out[:i] += ai * b[n - i :]
    else:
        full = np.convolve(a, b)
        out = full[:n].copy()
        out[: n - 1] += full[n:]
    if modulus:
        out %= modulus
        out[out > modulus // 2] -= modulus
    return out


def _degree(poly, start):
    d = start
    while d >= 0 and poly[d] == 0:
        d -= 1
    return d


def inverse_mod_prime(f, p):
    """Inverse of f in Z_p[x]/(x^n - 1) by extended Euclid, or None."""
    n = f.shape[0]
    p = int(p)
    r0 = np.zeros(n + 1, dtype=np.int64)
    r0[0], r0[n] = p - 1, 1
    r1 = np.zeros(n + 1, dtype=np.int64)
    r1[:n] = f % p
    s0 = np.zeros(n + 1, dtype=np.int64)
    s1 = np.zeros(n + 1, dtype=np.int64)
    s1[0] = 1
    d0, d1 = n, _degree(r1, n - 1)

    while d1 > 0:
        lead_inv = pow(int(r1[d1]), p - 2, p)
        while d0 >= d1:
            shift = d0 - d1
            negc = p - int(r0[d0]) * lead_inv % p
            r0[shift : d0 + 1] = (r0[shift : d0 + 1] + negc * r1[: d1 + 1]) % p
            s0[shift:] = (s0[shift:] + negc * s1[: n + 1 - shift]) % p
            d0 = _degree(r0, d0 - 1)
        r0, r1 = r1, r0
        s0, s1 = s1, s0
        d0, d1 = d1, d0

    if d1 < 0:
        return None
    c = pow(int(r1[0]), p - 2, p)
    out = s1[:n] * c % p
    out[0] = (out[0] + s1[n] * c) % p
    return out

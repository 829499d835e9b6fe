"""Independent reference computations for the tests.

Plain Python lists and ints only; nothing here imports ntrubke, so a bug in
the library cannot leak into the expected values.
"""

from itertools import product


def centered(x, m):
    r = x % m
    return r - m if r > m // 2 else r


def schoolbook(a, b, m=None):
    """Full linear product, then fold index k >= N back onto k - N."""
    n = len(a)
    full = [0] * (2 * n - 1)
    for i in range(n):
        for j in range(n):
            full[i + j] += a[i] * b[j]
    folded = [full[k] + (full[k + n] if k + n < len(full) else 0) for k in range(n)]
    return folded if m is None else [centered(c, m) for c in folded]


def circulant(f):
    """Matrix M with (M @ g)[k] = (f*g)[k] in Z[x]/(x^N - 1)."""
    n = len(f)
    return [[f[(k - j) % n] for j in range(n)] for k in range(n)]


def solve_inverse(f, m):
    """f^-1 in Z_m[x]/(x^N - 1) via Gauss-Jordan on the circulant system, or None.

    Pivots must be units mod m, which suffices for prime and prime-power m.
    """
    n = len(f)
    rows = [row[:] + [1 if k == 0 else 0] for k, row in enumerate(circulant(f))]
    rows = [[x % m for x in row] for row in rows]
    for col in range(n):
        pivot = next(
            (r for r in range(col, n) if _unit(rows[r][col], m)), None
        )
        if pivot is None:
            return None
        rows[col], rows[pivot] = rows[pivot], rows[col]
        inv = pow(rows[col][col], -1, m)
        rows[col] = [x * inv % m for x in rows[col]]
        for r in range(n):
            if r != col and rows[r][col]:
                factor = rows[r][col]
                rows[r] = [(x - factor * y) % m for x, y in zip(rows[r], rows[col])]
    return [centered(rows[k][n], m) for k in range(n)]


def _unit(x, m):
    from math import gcd

    return x % m != 0 and gcd(x, m) == 1


def exhaustive_ternary_inverse(f, p):
    """Every ternary g with f*g = 1 mod p (tiny N only)."""
    n = len(f)
    one = [1] + [0] * (n - 1)
    return [
        list(g)
        for g in product((-1, 0, 1), repeat=n)
        if schoolbook(f, list(g), p) == one
    ]


def keygen_equations(f, g, p, q):
    """F_p, F_q and h = F_q*g recomputed from scratch."""
    f_p = solve_inverse(f, p)
    f_q = solve_inverse(f, q)
    h = schoolbook(f_q, g, q)
    return f_p, f_q, h


def encrypt_equation(h, m, b, p, q):
    hb = schoolbook(h, b)
    return [centered(p * x + y, q) for x, y in zip(hb, m)]


def decrypt_equations(c, f, f_p, p, q):
    product_q = schoolbook(c, f, q)  # already centered, which is the lift
    tau = [centered(x, p) for x in product_q]
    message = schoolbook(tau, f_p, p)
    return product_q, tau, message


def frame_trits(data):
    """len || data || crc32 as base-3 digits, six per byte, digit 2 written as -1."""
    import zlib

    frame = len(data).to_bytes(4, "little") + bytes(data) + zlib.crc32(data).to_bytes(4, "little")
    out = []
    for byte in frame:
        digits = []
        for _ in range(6):
            byte, d = divmod(byte, 3)
            digits.append(-1 if d == 2 else d)
        out.extend(reversed(digits))
    return out

"""Arithmetic in Z[x]/(x^N - 1) and its reductions mod p and mod q.

Ring elements are immutable coefficient vectors (index i holds the
coefficient of x^i) tagged with the modulus they are reduced by, or ``None``
for plain integer polynomials. Reduced coefficients always use the centered
range (-m/2, m/2].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend

# N * (m/2)^2 must stay inside int64 for the convolution accumulator
_ACCUMULATOR_LIMIT = 2**62


class NotInvertible(ArithmeticError):
    """The element shares a factor with x^N - 1 over the requested modulus."""


class ResampleExhausted(RuntimeError):
    """Sampling an invertible element failed more often than the attempt cap."""


@dataclass(frozen=True)
class NtruParams:
    """Ring dimension, moduli and sampling weights.

    ``weight_fg``, ``weight_b`` and ``weight_expander`` count nonzero
    coefficients *per sign* (f additionally gets one extra +1 so that
    f(1) != 0 and it can be invertible at all).
    """

    N: int
    p: int
    q: int
    weight_fg: int
    weight_b: int
    weight_expander: int
    name: str = "custom"
    params_id: int = 0
    security_level: int = 0

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be at least 2")
        if self.p < 2 or self.q < 2:
            raise ValueError("moduli must be at least 2")
        if math.gcd(self.p, self.q) != 1:
            raise ValueError(f"gcd(p, q) must be 1, got p={self.p}, q={self.q}")
        for label in ("weight_fg", "weight_b", "weight_expander"):
            w = getattr(self, label)
            if w <= 0 or 2 * w > self.N:
                raise ValueError(f"{label}={w} out of range for N={self.N}")
        if 2 * self.weight_fg + 1 > self.N:
            raise ValueError("weight_fg leaves no room for the extra +1 in f")

    @property
    def label(self):
        return f"({self.N}, {self.q})"


# Expander weights are tuned per preset against the depth-2 (butterfly)
# decryption-failure budget; q = 2048 only tolerates very sparse expanders.
PRESETS: dict[str, NtruParams] = {
    "ntru509": NtruParams(509, 3, 2048, 169, 169, 2, "ntru509", 1, 1),
    "ntru677": NtruParams(677, 3, 2048, 225, 225, 2, "ntru677", 2, 3),
    "ntru821": NtruParams(821, 3, 4096, 273, 273, 3, "ntru821", 3, 5),
    "toy17": NtruParams(17, 3, 1024, 3, 3, 1, "toy17", 17, 0),
}
PAPER_PRESETS = ("ntru509", "ntru677", "ntru821")


def preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(
            f"unknown preset {name!r}; choose from {', '.join(PRESETS)}"
        ) from None


def preset_by_id(params_id):
    for params in PRESETS.values():
        if params.params_id == params_id:
            return params
    raise ValueError(f"unknown params_id {params_id}")


def _centered(values, modulus):
    half = (modulus - 1) // 2
    r = np.add(values, half, dtype=np.int64)
    np.mod(r, modulus, out=r)
    r -= half
    return r


@dataclass(frozen=True, eq=False)
class RingElement:
    """Coefficient vector of length N, reduced by ``modulus`` unless it is None."""

    coeffs: np.ndarray
    modulus: int | None = None

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=np.int64)
        if arr.ndim != 1:
            raise ValueError("coefficients must be one-dimensional")
        if self.modulus is not None:
            if self.modulus < 2:
                raise ValueError("modulus must be at least 2")
            arr = _centered(arr, self.modulus)
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @classmethod
    def _wrap(cls, arr, modulus, bound=None):
        # arr must already be int64, 1-D and centered for ``modulus``;
        # ``bound`` (max |coefficient|) lets ring_mul skip its overflow scan
        obj = object.__new__(cls)
        arr.setflags(write=False)
        object.__setattr__(obj, "coeffs", arr)
        object.__setattr__(obj, "modulus", modulus)
        if bound is not None:
            object.__setattr__(obj, "_bound", bound)
        return obj

    @classmethod
    def zero(cls, n, modulus=None):
        return cls(np.zeros(n, dtype=np.int64), modulus)

    @classmethod
    def one(cls, n, modulus=None):
        c = np.zeros(n, dtype=np.int64)
        c[0] = 1
        return cls(c, modulus)

    @classmethod
    def monomial(cls, n, k, modulus=None):
        c = np.zeros(n, dtype=np.int64)
        c[k % n] = 1
        return cls(c, modulus)

    @property
    def n(self):
        return self.coeffs.shape[0]

    def residues(self):
        """Coefficients as non-negative residues (needs a modulus)."""
        if self.modulus is None:
            raise ValueError("unreduced element has no residues")
        return np.mod(self.coeffs, self.modulus)

    def reduce(self, modulus):
        return RingElement(self.coeffs, modulus)

    def __eq__(self, other):
        if not isinstance(other, RingElement):
            return NotImplemented
        return self.modulus == other.modulus and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash((self.modulus, self.coeffs.tobytes()))

    def __len__(self):
        return self.n

    def __repr__(self):
        head = ", ".join(str(int(c)) for c in self.coeffs[:8])
        more = ", ..." if self.n > 8 else ""
        return f"RingElement([{head}{more}], N={self.n}, modulus={self.modulus})"


def _check_lengths(a, b, n=None):
    if a.n != b.n:
        raise ValueError(f"length mismatch: {a.n} vs {b.n}")
    if n is not None and a.n != n:
        raise ValueError(f"expected length {n}, got {a.n}")


def _operand(a, modulus):
    """Coefficients safe to feed the int64 kernel for a product mod ``modulus``."""
    if a.modulus is not None and a.modulus <= modulus:
        return a.coeffs
    if a.modulus is None:
        bound = getattr(a, "_bound", None)
        if bound is None:
            bound = int(np.abs(a.coeffs).max(initial=0))
        if bound <= modulus // 2:
            return a.coeffs
    return _centered(a.coeffs, modulus)


def ring_mul(a, b, params, modulus):
    """Cyclic convolution a*b mod (x^N - 1), centered-reduced mod ``modulus``.

    ``modulus=None`` returns the exact integer product in Z[x]/(x^N - 1).
    """
    _check_lengths(a, b, params.N)
    if modulus is None:
        x, y = a.coeffs, b.coeffs
        bound = int(np.abs(x).max(initial=0)) * int(np.abs(y).max(initial=0)) * a.n
        if bound >= _ACCUMULATOR_LIMIT:
            raise OverflowError("unreduced product exceeds int64 range")
        m = 0
    else:
        if modulus < 2:
            raise ValueError("modulus must be at least 2")
        if a.n * (modulus // 2 + 1) ** 2 >= _ACCUMULATOR_LIMIT:
            raise OverflowError(f"modulus {modulus} too large for N={a.n}")
        x, y = _operand(a, modulus), _operand(b, modulus)
        m = modulus
    # the kernel skips zero entries of its first operand
    if np.count_nonzero(y) < np.count_nonzero(x):
        x, y = y, x
    out = _backend.cyclic_convolve(x, y, m)
    return RingElement._wrap(out, modulus)


def ring_add(a, b, modulus):
    _check_lengths(a, b)
    return RingElement(a.coeffs + b.coeffs, modulus)


def ring_sub(a, b, modulus):
    _check_lengths(a, b)
    return RingElement(a.coeffs - b.coeffs, modulus)


def ring_scale(a, k, modulus):
    return RingElement(a.coeffs * k, modulus)


def center_lift(a, modulus):
    """Signed representatives in (-modulus/2, modulus/2], returned unreduced."""
    return RingElement(_centered(a.coeffs, modulus), None)


def _prime_power(m):
    """(prime, exponent) with prime**exponent == m, or None."""
    for d in range(2, math.isqrt(m) + 1):
        if m % d == 0:
            k = 0
            while m % d == 0:
                m //= d
                k += 1
            return (d, k) if m == 1 else None
    return (m, 1)


def _is_prime(m):
    pp = _prime_power(m)
    return pp is not None and pp[1] == 1


def _invert_prime(f, n, p):
    inv = _backend.inverse_mod_prime(np.ascontiguousarray(f.coeffs, dtype=np.int64), p)
    if inv is None:
        raise NotInvertible(f"element is not invertible in Z_{p}[x]/(x^{n} - 1)")
    return RingElement(inv, p)


def invert_mod_prime(f, params, modulus=None):
    """F with f*F = 1 in Z_p[x]/(x^N - 1), via extended Euclid over Z_p[x].

    ``modulus`` defaults to ``params.p`` and must be prime.
    Raises :class:`NotInvertible` when gcd(f, x^N - 1) is not constant.
    """
    p = params.p if modulus is None else modulus
    if f.n != params.N:
        raise ValueError(f"expected length {params.N}, got {f.n}")
    if not _is_prime(p):
        raise ValueError(f"modulus {p} is not prime")
    return _invert_prime(f, params.N, p)


def invert_mod_prime_power(f, params, modulus=None):
    """F with f*F = 1 in Z_q[x]/(x^N - 1) for q a prime power (default ``params.q``).

    Inverts mod the prime by Euclid, then Newton/Hensel lifts
    F <- F*(2 - f*F), doubling the exponent each round.
    """
    q = params.q if modulus is None else modulus
    if f.n != params.N:
        raise ValueError(f"expected length {params.N}, got {f.n}")
    pp = _prime_power(q)
    if pp is None:
        raise ValueError(f"modulus {q} is not a prime power")
    prime, k = pp
    inv = _invert_prime(f, params.N, prime)
    two = RingElement.one(params.N).coeffs * 2
    j = 1
    while j < k:
        j = min(2 * j, k)
        m = prime**j
        fF = ring_mul(f, inv, params, m)
        inv = ring_mul(inv, RingElement(two - fF.coeffs, m), params, m)
    return inv.reduce(q)


def sample_ternary(weight_plus, weight_minus, params, rng):
    """Ternary element with exactly the given numbers of +1 and -1 entries.

    Positions are drawn uniformly without replacement from ``rng``
    (a :class:`numpy.random.Generator`).
    """
    if weight_plus < 0 or weight_minus < 0:
        raise ValueError("weights must be non-negative")
    if weight_plus + weight_minus > params.N:
        raise ValueError(
            f"weights {weight_plus}+{weight_minus} exceed N={params.N}"
        )
    k = weight_plus + weight_minus
    c = np.zeros(params.N, dtype=np.int64)
    if k * k < params.N:
        # distinct i.i.d. draws are a uniform ordered k-subset; cheap when sparse
        # floor(U * N) instead of rng.integers, which carries ~8 us of call overhead
        while True:
            positions = (rng.random(k) * params.N).astype(np.int64)
            if len(set(positions.tolist())) == k:
                break
    else:
        positions = rng.choice(params.N, k, replace=False)
    c[positions[:weight_plus]] = 1
    c[positions[weight_plus:]] = -1
    return RingElement._wrap(c, None, bound=1)


def sample_message(params, rng):
    """Uniform ternary message in R_p (each coefficient in {-1, 0, 1})."""
    return RingElement(rng.integers(-1, 2, params.N), params.p)

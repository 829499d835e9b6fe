"""NTRU key generation, encryption and decryption over Z[x]/(x^N - 1)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .poly_ring import (
    NotInvertible,
    NtruParams,
    ResampleExhausted,
    RingElement,
    center_lift,
    invert_mod_prime,
    invert_mod_prime_power,
    ring_add,
    ring_mul,
    sample_message,
    sample_ternary,
)

DEFAULT_MAX_ATTEMPTS = 100


@dataclass(frozen=True)
class PrivateKey:
    """{f, F_p}. F_q and g are deliberately not kept."""

    f: RingElement
    f_p: RingElement
    params: NtruParams


@dataclass(frozen=True)
class PublicKey:
    h: RingElement
    params: NtruParams

    @property
    def key(self):
        return self.h

    @property
    def depth(self):
        return 0


@dataclass(frozen=True)
class CiphertextBlock:
    c: RingElement


class KeygenTrace(NamedTuple):
    f: RingElement
    g: RingElement
    f_p: RingElement
    f_q: RingElement
    h: RingElement
    attempts: int


class DecryptTrace(NamedTuple):
    product: RingElement  # C*f mod q
    lifted: RingElement  # centered lift of the product
    tau: RingElement  # lifted mod p
    message: RingElement  # tau*F_p mod p


def _keygen_trace(params, rng, max_attempts=DEFAULT_MAX_ATTEMPTS):
    d = params.weight_fg
    for attempt in range(1, max_attempts + 1):
        f = sample_ternary(d + 1, d, params, rng)
        try:
            f_p = invert_mod_prime(f, params)
            f_q = invert_mod_prime_power(f, params)
        except NotInvertible:
            continue
        g = sample_ternary(d, d, params, rng)
        h = ring_mul(f_q, g, params, params.q)
        return KeygenTrace(f, g, f_p, f_q, h, attempt)
    raise ResampleExhausted(
        f"no invertible f found in {max_attempts} attempts for {params.name}"
    )


def keygen(params, rng, max_attempts=DEFAULT_MAX_ATTEMPTS):
    """Sample f, g; compute F_p = f^-1 mod p, F_q = f^-1 mod q and h = F_q*g mod q."""
    t = _keygen_trace(params, rng, max_attempts)
    return PrivateKey(t.f, t.f_p, params), PublicKey(t.h, params)


def _encrypt_with_blinding(key, message, blinding, params):
    """C = p*key*b + M mod q with caller-chosen b. Test hook; use :func:`encrypt`."""
    q = params.q
    masked = ring_mul(key, blinding, params, q)
    scaled = RingElement(masked.coeffs * params.p, q)
    return CiphertextBlock(ring_add(scaled, message, q))


def _public_element(pk):
    return pk if isinstance(pk, RingElement) else pk.key


def _check_message(message, params):
    if message.n != params.N:
        raise ValueError(f"message length {message.n} != N={params.N}")
    if np.abs(message.coeffs).max(initial=0) > 1:
        raise ValueError("message coefficients must lie in {-1, 0, 1}")


def encrypt(pk, message, rng, params=None):
    """Encrypt a ternary message under a public or expanded key.

    A fresh blinding polynomial b is drawn from ``rng`` on every call.
    """
    params = params or pk.params
    _check_message(message, params)
    b = sample_ternary(params.weight_b, params.weight_b, params, rng)
    return _encrypt_with_blinding(_public_element(pk), message, b, params)


def _decrypt_trace(sk, ct, params):
    product = ring_mul(ct.c, sk.f, params, params.q)
    lifted = center_lift(product, params.q)
    tau = lifted.reduce(params.p)
    message = ring_mul(tau, sk.f_p, params, params.p)
    return DecryptTrace(product, lifted, tau, message)


def decrypt(sk, ct, params=None):
    """Recover M = (center_lift(C*f mod q) mod p) * F_p mod p.

    A coefficient wrap-around during the lift produces a wrong message, not
    an exception; framing checksums upstream catch that.
    """
    return _decrypt_trace(sk, ct, params or sk.params).message


KEY_DEPTHS = ("plain", "expanded", "butterfly")


def estimate_failure_rate(params, key_depth, trials, rng, messages_per_key=100):
    """Monte Carlo fraction of roundtrips that do not recover the message.

    ``key_depth`` selects the key encrypted under: ``plain`` (h),
    ``expanded`` (h*r) or ``butterfly`` (h*d*r). Expanders are fresh per trial;
    a new key pair is generated every ``messages_per_key`` trials.
    """
    from .key_expansion import ExpanderRole, expand_key, sample_expander

    if trials < 1:
        raise ValueError("trials must be at least 1")
    if key_depth not in KEY_DEPTHS:
        raise ValueError(f"key_depth must be one of {KEY_DEPTHS}")
    levels = KEY_DEPTHS.index(key_depth)
    roles = (ExpanderRole.RA_COCOON, ExpanderRole.CA_BUTTERFLY)
    if levels == 1:
        roles = (ExpanderRole.DIRECT,)
    failures = 0
    sk = pk = None
    for i in range(trials):
        if i % messages_per_key == 0:
            sk, pk = keygen(params, rng)
        key = pk
        for role in roles[:levels]:
            key = expand_key(key, sample_expander(params, role, rng), params)
        m = sample_message(params, rng)
        if decrypt(sk, encrypt(key, m, rng, params), params) != m:
            failures += 1
    return failures / trials

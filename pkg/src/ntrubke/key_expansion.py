"""Public-key expansion: multiply a public key by a fresh sparse ternary element.

An expanded key w = h*r still decrypts under the original {f, F_p}, because
f*h*r = g*r and the extra factor only widens the noise term. Applying the
expansion twice (cocoon d, then butterfly r) gives v = h*d*r.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .poly_ring import (
    NotInvertible,
    NtruParams,
    RingElement,
    invert_mod_prime_power,
    ring_mul,
    sample_ternary,
)

MAX_DEPTH = 2


class ExpanderRole(str, enum.Enum):
    RA_COCOON = "ra_cocoon"
    CA_BUTTERFLY = "ca_butterfly"
    DIRECT = "direct"


@dataclass(frozen=True)
class ExpanderSecret:
    e: RingElement
    role: ExpanderRole


@dataclass(frozen=True)
class ExpandedPublicKey:
    key: RingElement
    depth: int
    params: NtruParams


def _key_and_depth(pk):
    if isinstance(pk, RingElement):
        return pk, 0
    return pk.key, pk.depth


def expand_key(pk, secret, params):
    """key * e mod q, one level deeper than ``pk``.

    ``pk`` may be a :class:`~ntrubke.ntru_core.PublicKey`, an
    :class:`ExpandedPublicKey`, or a bare ring element (depth 0).
    """
    key, depth = _key_and_depth(pk)
    if depth + 1 > MAX_DEPTH:
        raise ValueError(f"cannot expand beyond depth {MAX_DEPTH}")
    if key.n != params.N or secret.e.n != params.N:
        raise ValueError("key and expander must both have length N")
    return ExpandedPublicKey(ring_mul(key, secret.e, params, params.q), depth + 1, params)


def sample_expander(params, role, rng, *, strict=False, max_attempts=100):
    """Sparse ternary expander with ``params.weight_expander`` entries per sign.

    In strict mode the expander must be invertible mod q; it then carries one
    extra +1 (a balanced ternary element vanishes at x = 1 and never is).
    """
    w = params.weight_expander
    role = ExpanderRole(role)
    for _ in range(max_attempts):
        if not strict:
            return ExpanderSecret(sample_ternary(w, w, params, rng), role)
        e = sample_ternary(w + 1, w, params, rng)
        try:
            invert_mod_prime_power(e, params)
        except NotInvertible:
            continue
        return ExpanderSecret(e, role)
    raise NotInvertible(f"no invertible expander in {max_attempts} attempts")


def verify_expansion(pk, secret, expanded, params):
    """True iff ``expanded`` is exactly ``pk`` expanded by ``secret``."""
    try:
        recomputed = expand_key(pk, secret, params)
    except ValueError:
        return False
    return recomputed.key == expanded.key and recomputed.depth == expanded.depth

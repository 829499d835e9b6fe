"""Binary key and ciphertext files.

Key file::

    "NTRK" | version u8 | params_id u8 | kind u8 | payload | crc32 u32 LE

``kind`` 0 private (f mod q, F_p mod p), 1 public (h mod q),
2 expanded (depth u8, key mod q), 3 expander secret (role u8, e mod q).
Every polynomial is N little-endian u16 non-negative residues. The CRC covers
all preceding bytes and is checked before anything else is parsed.

Ciphertext file::

    "NTRE" | version u8 | params_id u8 | block_count u32 LE | blocks | crc32 u32 LE
"""

from __future__ import annotations

import enum
import struct
import zlib

from .cert_scheme import pack_key, unpack_key
from .key_expansion import ExpandedPublicKey, ExpanderRole, ExpanderSecret
from .ntru_core import CiphertextBlock, PrivateKey, PublicKey
from .poly_ring import RingElement, preset_by_id

KEY_MAGIC = b"NTRK"
CIPHERTEXT_MAGIC = b"NTRE"
FORMAT_VERSION = 1

_ROLE_CODES = {ExpanderRole.DIRECT: 0, ExpanderRole.RA_COCOON: 1, ExpanderRole.CA_BUTTERFLY: 2}


class KeyKind(enum.IntEnum):
    PRIVATE = 0
    PUBLIC = 1
    EXPANDED = 2
    EXPANDER = 3


class KeyFileError(ValueError):
    """Bad magic, CRC, version, preset or layout."""


def _seal(body):
    return body + struct.pack("<I", zlib.crc32(body))


def _unseal(raw, magic):
    if len(raw) < 11 or raw[:4] != magic:
        raise KeyFileError("bad magic")
    body, (crc,) = raw[:-4], struct.unpack("<I", raw[-4:])
    if zlib.crc32(body) != crc:
        raise KeyFileError("CRC mismatch")
    if body[4] != FORMAT_VERSION:
        raise KeyFileError(f"unsupported version {body[4]}")
    try:
        params = preset_by_id(body[5])
    except ValueError as exc:
        raise KeyFileError(str(exc)) from None
    return body, params


def file_fingerprint(raw):
    """The trailing CRC-32, as printed by the CLI."""
    return raw[-4:][::-1].hex()


def dump_key(key):
    """Serialize a PrivateKey, PublicKey or ExpandedPublicKey."""
    if isinstance(key, PrivateKey):
        params = key.params
        kind, payload = KeyKind.PRIVATE, pack_key(key.f, params.q) + pack_key(key.f_p, params.p)
    elif isinstance(key, PublicKey):
        params = key.params
        kind, payload = KeyKind.PUBLIC, pack_key(key.h, params.q)
    elif isinstance(key, ExpandedPublicKey):
        params = key.params
        kind, payload = KeyKind.EXPANDED, bytes([key.depth]) + pack_key(key.key, params.q)
    else:
        raise TypeError(f"cannot serialize {type(key).__name__}")
    return _seal(KEY_MAGIC + bytes([FORMAT_VERSION, params.params_id, kind]) + payload)


def dump_expander(secret, params):
    payload = bytes([_ROLE_CODES[secret.role]]) + pack_key(secret.e, params.q)
    return _seal(KEY_MAGIC + bytes([FORMAT_VERSION, params.params_id, KeyKind.EXPANDER]) + payload)


def load_key(raw):
    body, params = _unseal(raw, KEY_MAGIC)
    try:
        kind = KeyKind(body[6])
    except ValueError:
        raise KeyFileError(f"unknown key kind {body[6]}") from None
    payload = body[7:]
    n2 = 2 * params.N
    try:
        if kind is KeyKind.PRIVATE:
            if len(payload) != 2 * n2:
                raise ValueError("wrong payload length")
            f = unpack_key(payload[:n2], params.N, params.q)
            f_p = unpack_key(payload[n2:], params.N, params.p)
            # f is stored mod q; its centered lift is the original ternary element
            return PrivateKey(RingElement(f.coeffs), f_p, params)
        if kind is KeyKind.PUBLIC:
            return PublicKey(unpack_key(payload, params.N, params.q), params)
        if kind is KeyKind.EXPANDED:
            if not payload or payload[0] not in (1, 2):
                raise ValueError("bad depth")
            return ExpandedPublicKey(unpack_key(payload[1:], params.N, params.q), payload[0], params)
        roles = {v: k for k, v in _ROLE_CODES.items()}
        if not payload or payload[0] not in roles:
            raise ValueError("bad expander role")
        e = unpack_key(payload[1:], params.N, params.q)
        return ExpanderSecret(RingElement(e.coeffs), roles[payload[0]])
    except ValueError as exc:
        raise KeyFileError(f"malformed {kind.name.lower()} key: {exc}") from None


def dump_ciphertext(blocks, params):
    body = CIPHERTEXT_MAGIC + bytes([FORMAT_VERSION, params.params_id])
    body += struct.pack("<I", len(blocks))
    body += b"".join(pack_key(b.c, params.q) for b in blocks)
    return _seal(body)


def load_ciphertext(raw):
    body, params = _unseal(raw, CIPHERTEXT_MAGIC)
    if len(body) < 10:
        raise KeyFileError("truncated header")
    (count,) = struct.unpack_from("<I", body, 6)
    n2 = 2 * params.N
    data = body[10:]
    if len(data) != count * n2:
        raise KeyFileError("block count disagrees with file length")
    blocks = [
        CiphertextBlock(unpack_key(data[i * n2 : (i + 1) * n2], params.N, params.q))
        for i in range(count)
    ]
    return blocks, params

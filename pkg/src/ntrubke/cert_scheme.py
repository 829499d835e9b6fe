"""Pseudonym certificates, byte<->trit framing and multi-block encryption.

Framing: ``len (u32 LE) || data || crc32(data) (u32 LE)``. Each frame byte
becomes six base-3 digits, most significant first, mapped 0, 1, 2 -> 0, 1, -1,
and the digit stream is cut into blocks of N coefficients (last block
zero-padded). The checksum is what turns an NTRU decryption failure into a
detectable :class:`IntegrityFailure`.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .key_expansion import ExpandedPublicKey
from .ntru_core import CiphertextBlock, decrypt, encrypt
from .poly_ring import RingElement

TRITS_PER_BYTE = 6
_FRAME_OVERHEAD = 8
_MAX_DATA = 2**32 - 1
_POW3 = 3 ** np.arange(TRITS_PER_BYTE - 1, -1, -1, dtype=np.int64)
# digit -> coefficient and back
_DIGIT_TO_TRIT = np.array([0, 1, -1], dtype=np.int64)

CERT_MAGIC = b"NTRC"
_CERT_HEAD = struct.Struct("<4sBB16sQQH")


class IntegrityFailure(ValueError):
    """Decoded data failed its length, padding, checksum or parse checks."""


@dataclass(frozen=True)
class EncodedMessage:
    blocks: tuple[RingElement, ...]
    total_byte_length: int
    checksum: int


def frame_trit_count(data_length):
    return (data_length + _FRAME_OVERHEAD) * TRITS_PER_BYTE


def block_count(data_length, params):
    return -(-frame_trit_count(data_length) // params.N)


def _bytes_to_trits(frame):
    values = np.frombuffer(frame, dtype=np.uint8).astype(np.int64)
    digits = (values[:, None] // _POW3) % 3
    return _DIGIT_TO_TRIT[digits.ravel()]


def encode_bytes(data, params):
    data = bytes(data)
    if len(data) > _MAX_DATA:
        raise ValueError("data too long for a 32-bit length prefix")
    checksum = zlib.crc32(data)
    frame = struct.pack("<I", len(data)) + data + struct.pack("<I", checksum)
    trits = _bytes_to_trits(frame)
    n = params.N
    padded = np.zeros(-(-len(trits) // n) * n, dtype=np.int64)
    padded[: len(trits)] = trits
    blocks = tuple(RingElement(chunk, params.p) for chunk in padded.reshape(-1, n))
    return EncodedMessage(blocks, len(data), checksum)


def _trits_to_bytes(trits):
    # coefficient -> digit: 0->0, 1->1, -1->2
    digits = np.mod(trits, 3).reshape(-1, TRITS_PER_BYTE)
    values = digits @ _POW3
    if (values > 255).any():
        raise IntegrityFailure("digit group outside byte range")
    return values.astype(np.uint8).tobytes()


def decode_bytes(msg, params):
    """Inverse of :func:`encode_bytes`; accepts an EncodedMessage or raw blocks."""
    blocks = msg.blocks if isinstance(msg, EncodedMessage) else tuple(msg)
    if not blocks:
        raise IntegrityFailure("no blocks")
    for block in blocks:
        if block.n != params.N:
            raise IntegrityFailure("block length differs from N")
    trits = np.concatenate([np.asarray(b.coeffs) for b in blocks])
    if np.abs(trits).max() > 1:
        raise IntegrityFailure("coefficient outside {-1, 0, 1}")
    head = 4 * TRITS_PER_BYTE
    if len(trits) < head:
        raise IntegrityFailure("truncated length prefix")
    (length,) = struct.unpack("<I", _trits_to_bytes(trits[:head]))
    used = frame_trit_count(length)
    if used > len(trits) or -(-used // params.N) != len(blocks):
        raise IntegrityFailure("length prefix disagrees with block count")
    if trits[used:].any():
        raise IntegrityFailure("nonzero padding")
    frame = _trits_to_bytes(trits[:used])
    data = frame[4:-4]
    (checksum,) = struct.unpack("<I", frame[-4:])
    if zlib.crc32(data) != checksum:
        raise IntegrityFailure("checksum mismatch")
    if isinstance(msg, EncodedMessage) and (
        msg.total_byte_length != length or msg.checksum != checksum
    ):
        raise IntegrityFailure("envelope fields disagree with the decoded frame")
    return data


def encrypt_bytes(data, target_key, params, rng):
    """Frame ``data`` and encrypt every block with its own fresh blinding."""
    encoded = encode_bytes(data, params)
    return [encrypt(target_key, block, rng, params) for block in encoded.blocks]


def decrypt_bytes(blocks, sk, params):
    return decode_bytes([decrypt(sk, ct, params) for ct in blocks], params)


# -- certificates -----------------------------------------------------------


@dataclass(frozen=True)
class PseudonymCertificate:
    version: int
    pseudonym_id: bytes
    public_key: ExpandedPublicKey
    permissions: bytes
    validity_start: int
    validity_end: int
    params_id: int

    def __post_init__(self):
        if len(self.pseudonym_id) != 16:
            raise ValueError("pseudonym_id must be 16 bytes")
        if self.validity_start >= self.validity_end:
            raise ValueError("validity_start must precede validity_end")
        if self.public_key.key.n != self.public_key.params.N:
            raise ValueError("public key length must equal N")
        if len(self.permissions) > 0xFFFF:
            raise ValueError("permissions longer than 65535 bytes")

    def to_bytes(self):
        return serialize_certificate(self)


def pack_key(key, q):
    """N x u16 little-endian residues mod q."""
    if q > 0x10000:
        raise ValueError("q does not fit the u16 coefficient encoding")
    return np.mod(key.coeffs, q).astype("<u2").tobytes()


def unpack_key(raw, n, q):
    if len(raw) != 2 * n:
        raise ValueError("wrong key length")
    values = np.frombuffer(raw, dtype="<u2").astype(np.int64)
    if (values >= q).any():
        raise ValueError("coefficient residue out of range")
    return RingElement(values, q)


def serialize_certificate(cert):
    params = cert.public_key.params
    head = _CERT_HEAD.pack(
        CERT_MAGIC,
        cert.version,
        cert.params_id,
        bytes(cert.pseudonym_id),
        cert.validity_start,
        cert.validity_end,
        len(cert.permissions),
    )
    return (
        head
        + bytes(cert.permissions)
        + bytes([cert.public_key.depth])
        + pack_key(cert.public_key.key, params.q)
    )


def parse_certificate(raw, params):
    """Strict inverse of :func:`serialize_certificate`; IntegrityFailure on any defect."""
    try:
        magic, version, params_id, pid, start, end, plen = _CERT_HEAD.unpack_from(raw)
        if magic != CERT_MAGIC:
            raise ValueError("bad magic")
        if params_id != params.params_id:
            raise ValueError(f"params_id {params_id} does not match {params.name}")
        offset = _CERT_HEAD.size
        permissions = raw[offset : offset + plen]
        offset += plen
        if len(raw) != offset + 1 + 2 * params.N:
            raise ValueError("certificate length mismatch")
        depth = raw[offset]
        if depth not in (1, 2):
            raise ValueError(f"invalid public key depth {depth}")
        key = unpack_key(raw[offset + 1 :], params.N, params.q)
        return PseudonymCertificate(
            version=version,
            pseudonym_id=pid,
            public_key=ExpandedPublicKey(key, depth, params),
            permissions=bytes(permissions),
            validity_start=start,
            validity_end=end,
            params_id=params_id,
        )
    except (struct.error, ValueError) as exc:
        raise IntegrityFailure(f"certificate parse failed: {exc}") from exc


def encrypt_certificate(cert, target_key, params, rng):
    return encrypt_bytes(serialize_certificate(cert), target_key, params, rng)


def decrypt_certificate(blocks, sk, params):
    return parse_certificate(decrypt_bytes(blocks, sk, params), params)


__all__ = [
    "CiphertextBlock",
    "EncodedMessage",
    "IntegrityFailure",
    "PseudonymCertificate",
    "block_count",
    "decode_bytes",
    "decrypt_bytes",
    "decrypt_certificate",
    "encode_bytes",
    "encrypt_bytes",
    "encrypt_certificate",
    "parse_certificate",
    "serialize_certificate",
]

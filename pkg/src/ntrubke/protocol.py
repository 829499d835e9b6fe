"""In-process actor model of the two certificate issuance flows.

``direct``: EE -> CA (CA_REQ), CA expands h to w = h*r and returns the
certificate encrypted under w (CA_RESP).

``butterfly``: EE -> RA (C1) with the caterpillar key h; RA expands to the
cocoon key u = h*d and sends it to the CA (C2); CA expands to the butterfly
key v = u*r and returns the certificate encrypted under v (C3), which the RA
forwards untouched. The EE decrypts every response with the key pair it
generated up front.

Transport is a synchronous FIFO with no loss; messages are delivered by
direct function calls.
"""

from __future__ import annotations

import enum
import hashlib
import json
import struct
import time
import zlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cert_scheme import (
    IntegrityFailure,
    PseudonymCertificate,
    decrypt_bytes,
    decrypt_certificate,
    encrypt_bytes,
    encrypt_certificate,
    pack_key,
    unpack_key,
)
from .key_expansion import ExpandedPublicKey, ExpanderRole, expand_key, sample_expander
from .ntru_core import PrivateKey, PublicKey, keygen
from .poly_ring import NtruParams, RingElement, ring_mul

CERT_VERSION = 1
VALIDITY_SECONDS = 7 * 24 * 3600
# fixed issuance time for reproducible demo transcripts
DEMO_EPOCH = 1_767_225_600


class Role(str, enum.Enum):
    EE = "EE"
    RA = "RA"
    CA = "CA"


class MessageKind(str, enum.Enum):
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    CA_REQ = "CA_REQ"
    CA_RESP = "CA_RESP"


class ProtocolError(RuntimeError):
    pass


class DuplicateRequest(ProtocolError):
    pass


class FlowError(ProtocolError):
    def __init__(self, step, cause):
        super().__init__(f"step {step} failed: {cause}")
        self.step = step
        self.cause = cause


@dataclass
class Actor:
    """One protocol participant and everything it has stored or observed.

    ``state`` holds only this actor's own material: the EE its issued
    certificates, the RA its cocoon expanders, the CA its butterfly
    expanders and issued certificates. ``views`` records every plaintext the
    actor saw, per request, for the separation checks.
    """

    role: Role
    params: NtruParams
    private_key: PrivateKey
    public_key: PublicKey
    state: dict = field(default_factory=dict)
    views: dict = field(default_factory=dict)
    expander_sampler: Callable = sample_expander

    def observe(self, request_id, **values):
        self.views.setdefault(request_id, {}).update(values)


@dataclass(frozen=True)
class ProtocolMessage:
    kind: MessageKind
    request_id: bytes
    payload: tuple


def new_actor(role, params, rng, expander_sampler=sample_expander):
    sk, pk = keygen(params, rng)
    return Actor(Role(role), params, sk, pk, expander_sampler=expander_sampler)


def _pack_request(key, depth, permissions, params):
    if len(permissions) > 0xFFFF:
        raise ValueError("permissions longer than 65535 bytes")
    return (
        bytes([depth])
        + pack_key(key, params.q)
        + struct.pack("<H", len(permissions))
        + bytes(permissions)
    )


def _unpack_request(raw, params):
    try:
        depth = raw[0]
        end = 1 + 2 * params.N
        key = unpack_key(raw[1:end], params.N, params.q)
        (plen,) = struct.unpack_from("<H", raw, end)
        permissions = raw[end + 2 :]
        if len(permissions) != plen:
            raise ValueError("permissions length mismatch")
    except (IndexError, struct.error, ValueError) as exc:
        raise IntegrityFailure(f"malformed request payload: {exc}") from exc
    return key, depth, bytes(permissions)


def _claim(actor, slot, request_id):
    seen = actor.state.setdefault(slot, {})
    if request_id in seen:
        raise DuplicateRequest(f"{actor.role.value} already processed {request_id.hex()}")
    return seen


def ee_create_request(ee, recipient_pubkey, permissions, rng, kind=MessageKind.C1):
    """Encrypt (h || permissions) for the RA (C1) or, in the direct flow, the CA."""
    kind = MessageKind(kind)
    if kind not in (MessageKind.C1, MessageKind.CA_REQ):
        raise ValueError(f"an EE cannot originate {kind.value}")
    params = ee.params
    request_id = rng.bytes(16)
    payload = _pack_request(ee.public_key.h, 0, permissions, params)
    blocks = encrypt_bytes(payload, recipient_pubkey, params, rng)
    ee.state.setdefault("pending", {})[request_id] = bytes(permissions)
    ee.observe(request_id, h=ee.public_key.h, permissions=bytes(permissions))
    return ProtocolMessage(kind, request_id, tuple(blocks))


def ra_process(ra, msg, ca_pubkey, rng):
    """C1 -> C2: recover h, derive the cocoon key u = h*d, re-encrypt for the CA."""
    if msg.kind is not MessageKind.C1:
        raise ProtocolError(f"RA expects C1, got {msg.kind.value}")
    params = ra.params
    secrets = _claim(ra, "cocoon_secrets", msg.request_id)
    h, depth, permissions = _unpack_request(decrypt_bytes(msg.payload, ra.private_key, params), params)
    if depth != 0:
        raise IntegrityFailure("caterpillar key must have depth 0")
    d = ra.expander_sampler(params, ExpanderRole.RA_COCOON, rng)
    u = expand_key(h, d, params)
    secrets[msg.request_id] = d
    ra.observe(msg.request_id, h=h, permissions=permissions, d=d.e, u=u.key)
    blocks = encrypt_bytes(_pack_request(u.key, u.depth, permissions, params), ca_pubkey, params, rng)
    return ProtocolMessage(MessageKind.C2, msg.request_id, tuple(blocks))


def ca_process(ca, msg, rng, issued_at=None):
    """C2 -> C3 (butterfly) or CA_REQ -> CA_RESP (direct).

    Expands the received key once more, issues a certificate carrying the
    expanded key and encrypts the certificate under that same key.
    """
    params = ca.params
    if msg.kind is MessageKind.C2:
        expected_depth, role, reply = 1, ExpanderRole.CA_BUTTERFLY, MessageKind.C3
    elif msg.kind is MessageKind.CA_REQ:
        expected_depth, role, reply = 0, ExpanderRole.DIRECT, MessageKind.CA_RESP
    else:
        raise ProtocolError(f"CA expects C2 or CA_REQ, got {msg.kind.value}")
    secrets = _claim(ca, "expander_secrets", msg.request_id)
    key, depth, permissions = _unpack_request(decrypt_bytes(msg.payload, ca.private_key, params), params)
    if depth != expected_depth:
        raise IntegrityFailure(f"received key depth {depth}, expected {expected_depth}")
    r = ca.expander_sampler(params, role, rng)
    source = key if depth == 0 else ExpandedPublicKey(key, depth, params)
    expanded = expand_key(source, r, params)
    start = int(time.time()) if issued_at is None else int(issued_at)
    cert = PseudonymCertificate(
        version=CERT_VERSION,
        pseudonym_id=rng.bytes(16),
        public_key=expanded,
        permissions=permissions,
        validity_start=start,
        validity_end=start + VALIDITY_SECONDS,
        params_id=params.params_id,
    )
    secrets[msg.request_id] = r
    ca.state.setdefault("issued", {})[msg.request_id] = cert
    received = "u" if depth == 1 else "h"
    issued = "v" if depth == 1 else "w"
    ca.observe(
        msg.request_id,
        **{received: key, "permissions": permissions, "r": r.e, issued: expanded.key},
        certificate=cert,
    )
    blocks = encrypt_certificate(cert, expanded, params, rng)
    return ProtocolMessage(reply, msg.request_id, tuple(blocks))


def ra_forward(ra, msg):
    """Relay C3 to the EE unchanged; the RA cannot read it."""
    if msg.kind is not MessageKind.C3:
        raise ProtocolError(f"RA only forwards C3, got {msg.kind.value}")
    if msg.request_id not in ra.state.get("cocoon_secrets", {}):
        raise ProtocolError("C3 for a request this RA never handled")
    return msg


def ee_receive(ee, msg, params=None):
    """Decrypt the certificate with the EE's original {f, F_p}."""
    params = params or ee.params
    if msg.kind not in (MessageKind.C3, MessageKind.CA_RESP):
        raise ProtocolError(f"EE expects C3 or CA_RESP, got {msg.kind.value}")
    pending = ee.state.get("pending", {})
    if msg.request_id not in pending:
        raise ProtocolError("response to an unknown request")
    cert = decrypt_certificate(msg.payload, ee.private_key, params)
    if cert.permissions != pending[msg.request_id]:
        raise IntegrityFailure("certificate permissions differ from the request")
    del pending[msg.request_id]
    ee.state.setdefault("certificates", {})[msg.request_id] = cert
    ee.observe(msg.request_id, certificate=cert)
    return cert


# -- flows -------------------------------------------------------------------


@dataclass(frozen=True)
class TranscriptEntry:
    step: str
    sender: Role
    recipient: Role
    message: ProtocolMessage
    via: Role | None = None


@dataclass
class FlowTranscript:
    flow: str
    params: NtruParams
    actors: dict
    entries: list
    request_id: bytes
    certificate: PseudonymCertificate
    retries: int = 0
    invariants: dict = field(default_factory=dict)

    @property
    def messages(self):
        return [e.message for e in self.entries]

    def view(self, role):
        return self.actors[Role(role)].views.get(self.request_id, {})

    @property
    def ok(self):
        return all(self.invariants.values())

    def to_lines(self):
        """Line-delimited JSON log; public values are fingerprinted, secrets never appear."""
        lines = [
            {"event": "flow", "flow": self.flow, "preset": self.params.name, "retries": self.retries}
        ]
        for e in self.entries:
            line = {
                "event": "message",
                "step": e.step,
                "kind": e.message.kind.value,
                "from": e.sender.value,
                "to": e.recipient.value,
                "request_id": e.message.request_id.hex(),
                "blocks": len(e.message.payload),
                "digest": payload_digest(e.message),
            }
            if e.via is not None:
                line["via"] = e.via.value
            lines.append(line)
        for role, actor in self.actors.items():
            seen = actor.views.get(self.request_id, {})
            lines.append({"event": "view", "actor": role.value, "labels": sorted(seen)})
        cert = self.certificate
        lines.append(
            {
                "event": "certificate",
                "pseudonym_id": cert.pseudonym_id.hex(),
                "depth": cert.public_key.depth,
                "public_key": fingerprint(cert.public_key.key),
                "permissions": cert.permissions.hex(),
                "validity": [cert.validity_start, cert.validity_end],
            }
        )
        for name, ok in self.invariants.items():
            lines.append({"event": "assert", "name": name, "ok": bool(ok)})
        return [json.dumps(line, sort_keys=True) for line in lines]

    def to_text(self):
        return "\n".join(self.to_lines()) + "\n"


def fingerprint(element):
    return f"{zlib.crc32(element.coeffs.astype('<i8').tobytes()):08x}"


def payload_digest(msg):
    h = hashlib.sha256()
    for block in msg.payload:
        h.update(block.c.coeffs.astype("<i8").tobytes())
    return h.hexdigest()[:32]


def _contains(values, target):
    return any(isinstance(v, RingElement) and v.coeffs.shape == target.coeffs.shape
               and np.array_equal(v.coeffs, target.coeffs) for v in values)


def check_view_separation(transcript):
    """Structural anonymity checks; returns a list of violations (empty when clean)."""
    problems = []
    rid = transcript.request_id
    actors = transcript.actors
    ee = actors[Role.EE]
    h = ee.public_key.h
    f = ee.private_key.f
    ca = actors[Role.CA]
    r = ca.state["expander_secrets"][rid].e
    if transcript.flow == "butterfly":
        ra = actors[Role.RA]
        d = ra.state["cocoon_secrets"][rid].e
        ra_view, ca_view = ra.views.get(rid, {}), ca.views.get(rid, {})
        if "r" in ra_view or _contains(ra_view.values(), r):
            problems.append("RA observed the butterfly expander r")
        if "v" in ra_view:
            problems.append("RA observed the butterfly key v")
        if "h" in ca_view or _contains(ca_view.values(), h):
            problems.append("CA observed the caterpillar key h")
        if "d" in ca_view or _contains(ca_view.values(), d):
            problems.append("CA observed the cocoon expander d")
        if _contains(_stored(ra), r) or _contains(_stored(ra), f):
            problems.append("RA state holds another actor's secret")
        if _contains(_stored(ca), d) or _contains(_stored(ca), f):
            problems.append("CA state holds another actor's secret")
    if _contains(_stored(ee), r):
        problems.append("EE state holds the CA expander")
    return problems


def _stored(actor):
    out = []
    for slot in actor.state.values():
        if isinstance(slot, dict):
            for value in slot.values():
                out.append(getattr(value, "e", value))
    return out


def _end_to_end_key(transcript):
    """Recompute the certificate key from every actor's secrets (full-knowledge check)."""
    rid, params = transcript.request_id, transcript.params
    h = transcript.actors[Role.EE].public_key.h
    combined = transcript.actors[Role.CA].state["expander_secrets"][rid].e
    if transcript.flow == "butterfly":
        d = transcript.actors[Role.RA].state["cocoon_secrets"][rid].e
        return ring_mul(ring_mul(h, d, params, params.q), combined, params, params.q)
    return ring_mul(h, combined, params, params.q)


def _step(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except IntegrityFailure:
        raise
    except Exception as exc:  # noqa: BLE001
        raise FlowError(name, exc) from exc


def _attempt(flow, actors, params, rng, permissions, issued_at):
    ee, ca = actors[Role.EE], actors[Role.CA]
    if flow == "direct":
        c_a = _step("c_a", ee_create_request, ee, ca.public_key, permissions, rng, MessageKind.CA_REQ)
        c_b = _step("c_b", ca_process, ca, c_a, rng, issued_at)
        entries = [
            TranscriptEntry("c_a", Role.EE, Role.CA, c_a),
            TranscriptEntry("c_b", Role.CA, Role.EE, c_b),
        ]
        final = c_b
    else:
        ra = actors[Role.RA]
        c1 = _step("c1", ee_create_request, ee, ra.public_key, permissions, rng, MessageKind.C1)
        c2 = _step("c2", ra_process, ra, c1, ca.public_key, rng)
        c3 = _step("c3", ca_process, ca, c2, rng, issued_at)
        final = _step("c3-forward", ra_forward, ra, c3)
        entries = [
            TranscriptEntry("c1", Role.EE, Role.RA, c1),
            TranscriptEntry("c2", Role.RA, Role.CA, c2),
            TranscriptEntry("c3", Role.CA, Role.EE, c3, via=Role.RA),
        ]
    return entries, final


def run_flow(flow, params, rng, permissions=b"\x01", issued_at=DEMO_EPOCH, actors=None):
    """Run one full issuance flow and return its transcript.

    ``rng`` is a Generator or an integer seed. Actors get independent child
    streams. A decryption failure at the EE (IntegrityFailure) triggers one
    end-to-end retry with fresh randomness; a second failure is raised as
    :class:`FlowError`.
    """
    if flow not in ("direct", "butterfly"):
        raise ValueError("flow must be 'direct' or 'butterfly'")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    ee_rng, ra_rng, ca_rng, flow_rng = rng.spawn(4)
    if actors is None:
        actors = {Role.EE: _step("keygen-EE", new_actor, Role.EE, params, ee_rng)}
        if flow == "butterfly":
            actors[Role.RA] = _step("keygen-RA", new_actor, Role.RA, params, ra_rng)
        actors[Role.CA] = _step("keygen-CA", new_actor, Role.CA, params, ca_rng)

    retries = 0
    while True:
        try:
            entries, final = _attempt(flow, actors, params, flow_rng, permissions, issued_at)
        except IntegrityFailure as exc:
            # decryption failure on an intermediate hop
            if retries:
                raise FlowError("relay", exc) from exc
            retries += 1
            continue
        try:
            cert = ee_receive(actors[Role.EE], final, params)
            break
        except IntegrityFailure as exc:
            if retries:
                raise FlowError("ee-receive", exc) from exc
            actors[Role.EE].state["pending"].pop(final.request_id, None)
            retries += 1

    transcript = FlowTranscript(flow, params, actors, entries, final.request_id, cert, retries)
    h = actors[Role.EE].public_key.h
    transcript.invariants = {
        "message_count": len(entries) == (3 if flow == "butterfly" else 2),
        "view_separation": not check_view_separation(transcript),
        "certificate_key_algebra": cert.public_key.key == _end_to_end_key(transcript),
        "certificate_key_depth": cert.public_key.depth == (2 if flow == "butterfly" else 1),
        "pseudonym_unlinked": cert.public_key.key != h,
    }
    return transcript

import json

import numpy as np
import pytest

from ntrubke.cert_scheme import IntegrityFailure
from ntrubke.key_expansion import ExpanderSecret
from ntrubke.poly_ring import PRESETS, RingElement, ring_mul
from ntrubke.protocol import (
    DuplicateRequest,
    FlowError,
    MessageKind,
    ProtocolError,
    ProtocolMessage,
    Role,
    ca_process,
    check_view_separation,
    ee_create_request,
    ee_receive,
    new_actor,
    ra_forward,
    ra_process,
    run_flow,
)

TOY17 = PRESETS["toy17"]
NTRU509 = PRESETS["ntru509"]


def identity_sampler(params, role, rng, **kwargs):
    return ExpanderSecret(RingElement.one(params.N), role)


def butterfly_actors(params, rng, sampler=None):
    kw = {} if sampler is None else {"expander_sampler": sampler}
    return {role: new_actor(role, params, rng, **kw) for role in (Role.EE, Role.RA, Role.CA)}


@pytest.mark.parametrize("flow,count", [("butterfly", 3), ("direct", 2)])
def test_flow_message_count(flow, count):
    t = run_flow(flow, NTRU509, 7)
    assert len(t.messages) == count
    assert t.ok and t.retries == 0
    assert t.certificate.public_key.depth == (2 if flow == "butterfly" else 1)


def test_butterfly_message_sequence():
    t = run_flow("butterfly", NTRU509, 8)
    kinds = [m.kind for m in t.messages]
    assert kinds == [MessageKind.C1, MessageKind.C2, MessageKind.C3]
    assert [(e.sender, e.recipient) for e in t.entries] == [
        (Role.EE, Role.RA), (Role.RA, Role.CA), (Role.CA, Role.EE)
    ]
    assert t.entries[2].via is Role.RA
    assert len({m.request_id for m in t.messages}) == 1


def test_certificate_key_is_triple_product():
    t = run_flow("butterfly", NTRU509, 9)
    rid = t.request_id
    h = t.actors[Role.EE].public_key.h
    d = t.actors[Role.RA].state["cocoon_secrets"][rid].e
    r = t.actors[Role.CA].state["expander_secrets"][rid].e
    expected = ring_mul(ring_mul(h, d, NTRU509, NTRU509.q), r, NTRU509, NTRU509.q)
    assert t.certificate.public_key.key == expected
    assert t.certificate.public_key.key != h


def test_identity_expanders_give_original_key(rng):
    actors = butterfly_actors(TOY17, rng, identity_sampler)
    t = run_flow("butterfly", TOY17, rng, actors=actors)
    assert t.certificate.public_key.key == actors[Role.EE].public_key.h
    assert not t.invariants["pseudonym_unlinked"]


def test_same_seed_same_transcript():
    a = run_flow("butterfly", NTRU509, 1234).to_text()
    b = run_flow("butterfly", NTRU509, 1234).to_text()
    c = run_flow("butterfly", NTRU509, 1235).to_text()
    assert a == b and a != c


def test_transcript_is_json_lines_without_secrets():
    t = run_flow("butterfly", NTRU509, 5)
    events = [json.loads(line) for line in t.to_lines()]
    assert events[0]["event"] == "flow"
    assert sum(e["event"] == "message" for e in events) == 3
    assert all(e["ok"] for e in events if e["event"] == "assert")
    views = {e["actor"]: e["labels"] for e in events if e["event"] == "view"}
    assert "r" not in views["RA"] and "h" not in views["CA"]
    assert "r" in views["CA"] and "d" in views["RA"]
    text = t.to_text()
    # no raw coefficient arrays leak into the log
    assert max(len(line) for line in text.splitlines()) < 400


def test_view_separation_holds():
    t = run_flow("butterfly", NTRU509, 11)
    assert check_view_separation(t) == []
    assert "u" in t.view(Role.CA) and "h" not in t.view(Role.CA)
    assert "r" not in t.view(Role.RA) and "v" not in t.view(Role.RA)


def test_view_separation_catches_leak():
    t = run_flow("butterfly", NTRU509, 12)
    t.actors[Role.CA].observe(t.request_id, leaked=t.actors[Role.EE].public_key.h)
    assert "CA observed the caterpillar key h" in check_view_separation(t)
    t.actors[Role.RA].observe(t.request_id, r=RingElement.zero(NTRU509.N))
    assert any("RA observed" in p for p in check_view_separation(t))


def test_replay_rejected(rng):
    actors = butterfly_actors(TOY17, rng)
    ee, ra, ca = actors[Role.EE], actors[Role.RA], actors[Role.CA]
    c1 = ee_create_request(ee, ra.public_key, b"\x01", rng)
    c2 = ra_process(ra, c1, ca.public_key, rng)
    with pytest.raises(DuplicateRequest):
        ra_process(ra, c1, ca.public_key, rng)
    c3 = ca_process(ca, c2, rng, issued_at=0)
    with pytest.raises(DuplicateRequest):
        ca_process(ca, c2, rng, issued_at=0)
    cert = ee_receive(ee, ra_forward(ra, c3))
    assert cert.permissions == b"\x01"
    with pytest.raises(ProtocolError):
        ee_receive(ee, c3)


def test_wrong_message_kinds(rng):
    actors = butterfly_actors(TOY17, rng)
    ee, ra, ca = actors[Role.EE], actors[Role.RA], actors[Role.CA]
    c1 = ee_create_request(ee, ra.public_key, b"", rng)
    with pytest.raises(ProtocolError):
        ca_process(ca, c1, rng)
    with pytest.raises(ProtocolError):
        ra_forward(ra, c1)
    with pytest.raises(ProtocolError):
        ee_receive(ee, c1)
    with pytest.raises(ValueError):
        ee_create_request(ee, ra.public_key, b"", rng, kind=MessageKind.C2)
    stray = ProtocolMessage(MessageKind.C3, b"\x00" * 16, ())
    with pytest.raises(ProtocolError):
        ra_forward(ra, stray)


def test_tampered_payload_detected(rng):
    actors = butterfly_actors(NTRU509, rng)
    ee, ra, ca = actors[Role.EE], actors[Role.RA], actors[Role.CA]
    c1 = ee_create_request(ee, ra.public_key, b"\x01", rng)
    c2 = ra_process(ra, c1, ca.public_key, rng)
    c3 = ca_process(ca, c2, rng, issued_at=0)
    block = c3.payload[0]
    coeffs = block.c.coeffs.copy()
    coeffs[3] += 5
    bad = ProtocolMessage(c3.kind, c3.request_id, (type(block)(RingElement(coeffs, NTRU509.q)),) + c3.payload[1:])
    with pytest.raises(IntegrityFailure):
        ee_receive(ee, bad)


def test_wrong_ee_cannot_decrypt(rng):
    actors = butterfly_actors(NTRU509, rng)
    ee, ra, ca = actors[Role.EE], actors[Role.RA], actors[Role.CA]
    intruder = new_actor(Role.EE, NTRU509, rng)
    c1 = ee_create_request(ee, ra.public_key, b"\x01", rng)
    c3 = ca_process(ca, ra_process(ra, c1, ca.public_key, rng), rng, issued_at=0)
    intruder.state["pending"] = {c3.request_id: b"\x01"}
    with pytest.raises(IntegrityFailure):
        ee_receive(intruder, c3)


def test_permissions_propagate():
    t = run_flow("butterfly", NTRU509, 3, permissions=b"\x10\x20\x30")
    assert t.certificate.permissions == b"\x10\x20\x30"
    assert t.view(Role.CA)["permissions"] == b"\x10\x20\x30"


def test_validity_window():
    t = run_flow("direct", TOY17, 4, issued_at=1000)
    assert t.certificate.validity_start == 1000
    assert t.certificate.validity_end - 1000 == 7 * 24 * 3600


def test_single_retry_then_error(rng):
    calls = []

    def flaky_sampler(params, role, rng_, **kwargs):
        # a dense expander with large coefficients makes the noise wrap mod q
        calls.append(role)
        return ExpanderSecret(RingElement(np.arange(params.N) * 97 % 401 - 200), role)

    actors = {role: new_actor(role, TOY17, rng) for role in (Role.EE, Role.CA)}
    actors[Role.CA].expander_sampler = flaky_sampler
    with pytest.raises(FlowError):
        run_flow("direct", TOY17, rng, actors=actors)
    assert len(calls) == 2


def test_bad_flow_name():
    with pytest.raises(ValueError):
        run_flow("sideways", TOY17, 0)


def test_retry_recovers_from_one_failure(rng):
    from ntrubke.key_expansion import sample_expander

    calls = []

    def once_bad(params, role, rng_, **kwargs):
        calls.append(role)
        if len(calls) == 1:
            return ExpanderSecret(RingElement(np.arange(params.N) * 97 % 401 - 200), role)
        return sample_expander(params, role, rng_)

    actors = {role: new_actor(role, TOY17, rng) for role in (Role.EE, Role.CA)}
    actors[Role.CA].expander_sampler = once_bad
    t = run_flow("direct", TOY17, rng, actors=actors)
    assert t.retries == 1 and t.ok and len(calls) == 2

import json

import pytest
from fastapi.testclient import TestClient

from covote.ballots import encode_choice
from covote.gateway import LogicalClock, WallClock, create_app
from covote.group import DeterministicRandomness, keygen, scalar_to_bytes
from covote.identifiers import eligibility_digests
from covote.ledger import Ledger
from covote.timed_release import encrypt_ballot

from conftest import Election


@pytest.fixture
def harness(tmp_path):
    election = Election(voters=4, path=tmp_path / "session.log", seed="gw")
    clock = LogicalClock(start=10)
    app = create_app(election.ledger, clock)
    return election, clock, TestClient(app, raise_server_exceptions=False)


def register_via_api(election, client, voter, seed=None):
    pair = keygen(DeterministicRandomness(seed or f"gw-api-kp-{voter}"))
    once = eligibility_digests(election.identifier(voter), election.suite).once
    response = client.post("/v1/register", json={"once_digest": once.hex(), "pk": pair.pk.hex()})
    return response, pair


def drive_to_voting(election, clock, client, voters=(0, 1, 2)):
    pairs = {}
    for voter in voters:
        response, pair = register_via_api(election, client, voter)
        assert response.status_code == 200
        pairs[voter] = (response.json()["holder_index"], pair)
    clock.advance_to(20)
    election.ledger.freeze_holder_set(20)
    return pairs


def test_session_view_and_chain_head(harness):
    election, clock, client = harness
    body = client.get("/v1/session").json()
    assert body["session_id"] == "test-session"
    assert body["phase"] == "registration"
    assert body["counts"] == {"holders": 0, "ballots": 0, "valid_releases": 0}
    assert body["chain_head"] == election.ledger.head.hex()
    assert body["result"] is None


def test_register_and_holders_listing(harness):
    election, clock, client = harness
    response, pair = register_via_api(election, client, 0)
    assert response.status_code == 200
    body = response.json()
    assert body["holder_index"] == 1
    assert body["chain_head"] == election.ledger.head.hex()

    listing = client.get("/v1/holders").json()
    assert len(listing["holders"]) == 1
    assert listing["holders"][0]["pk"] == pair.pk.hex()

    # ineligible digest is a ledger rejection passed through verbatim
    bad = client.post(
        "/v1/register", json={"once_digest": "ab" * 32, "pk": pair.pk.hex()}
    )
    assert bad.status_code == 403
    assert bad.json()["error"]["code"] == "NotEligible"


def test_ballot_outside_window_is_409_phase_error(harness):
    election, clock, client = harness
    pairs = drive_to_voting(election, clock, client)
    clock.advance_to(30)  # voting closed
    ballot = election.encrypted_ballot(0, "A")
    response = client.post("/v1/ballot", json=ballot.to_wire())
    assert response.status_code == 409
    assert response.json()["error"]["code"] == "PhaseError"


def test_full_flow_over_http(harness):
    election, clock, client = harness
    pairs = drive_to_voting(election, clock, client)
    clock.advance_to(21)

    ballot = election.encrypted_ballot(0, "A")
    response = client.post("/v1/ballot", json=ballot.to_wire())
    assert response.status_code == 200
    assert response.json()["seq"] == 1

    # releases refused during voting
    index, pair = pairs[0]
    early = client.post(
        "/v1/release",
        json={"holder_index": index, "sk": scalar_to_bytes(pair.sk).hex()},
    )
    assert early.status_code == 409

    # result refused below threshold
    clock.advance_to(30)
    assert client.get("/v1/result").status_code == 409
    ok = client.post(
        "/v1/release",
        json={"holder_index": index, "sk": scalar_to_bytes(pair.sk).hex()},
    )
    assert ok.status_code == 200 and ok.json()["valid"] is True

    index2, pair2 = pairs[1]
    client.post(
        "/v1/release",
        json={"holder_index": index2, "sk": scalar_to_bytes(pair2.sk).hex()},
    )
    result = client.get("/v1/result")
    assert result.status_code == 200
    transcript = result.json()["transcript"]
    assert transcript["result"]["winners"] == ["A"]

    session = client.get("/v1/session").json()
    assert session["result"] == "/v1/result"


def test_log_pagination(harness):
    election, clock, client = harness
    drive_to_voting(election, clock, client)
    page = client.get("/v1/log", params={"offset": 0, "limit": 2}).json()
    assert page["total"] == 5  # create + 3 registrations + freeze
    assert len(page["events"]) == 2
    assert page["events"][0]["type"] == "create_session"
    rest = client.get("/v1/log", params={"offset": 2, "limit": 100}).json()
    assert len(rest["events"]) == 3
    assert rest["events"][-1]["type"] == "freeze_holders"
    assert rest["chain_head"] == election.ledger.head.hex()


def test_acknowledged_writes_survive_restart(tmp_path, harness):
    election, clock, client = harness
    drive_to_voting(election, clock, client)
    reopened = Ledger.open(election.ledger.log.path)
    assert reopened.serialize_state() == election.ledger.serialize_state()


def test_gateway_cannot_forge_proxy_equivalence(tmp_path):
    # the same wire payload through HTTP and applied directly to a twin
    # ledger yields byte-identical event records
    election_a = Election(voters=3, seed="twin")
    election_b = Election(voters=3, seed="twin")
    clock = LogicalClock(start=10)
    client = TestClient(create_app(election_a.ledger, clock))

    pair = keygen(DeterministicRandomness("twin-kp"))
    once = eligibility_digests(election_a.identifier(0), election_a.suite).once
    response = client.post(
        "/v1/register", json={"once_digest": once.hex(), "pk": pair.pk.hex()}
    )
    assert response.status_code == 200
    election_b.ledger.register_holder(once, pair.pk, 10)

    record_a = election_a.ledger.log.records[-1]
    record_b = election_b.ledger.log.records[-1]
    assert record_a.encode() == record_b.encode()


def test_no_secret_bytes_before_tally(harness):
    election, clock, client = harness
    pairs = drive_to_voting(election, clock, client)
    clock.advance_to(21)
    plaintext_marker = encode_choice(election.config.ballot_format, "A")
    ballot = election.encrypted_ballot(0, "A")
    client.post("/v1/ballot", json=ballot.to_wire())

    secrets = [plaintext_marker.hex(), plaintext_marker.decode()]
    secrets += [election.identifier(v).hex() for v in range(4)]
    secrets += [scalar_to_bytes(pair.sk).hex() for _, pair in pairs.values()]

    for path in ("/v1/session", "/v1/holders", "/v1/log"):
        text = client.get(path).text.lower()
        for secret in secrets:
            assert secret.lower() not in text

    assert client.get("/v1/result").status_code == 409


def test_wallclock_maps_to_ticks():
    import time as time_module

    clock = WallClock(epoch_unix=time_module.time() - 25, seconds_per_tick=1.0)
    assert 24 <= clock.now() <= 26
    scaled = WallClock(epoch_unix=time_module.time() - 100, seconds_per_tick=10)
    assert 9 <= scaled.now() <= 11


def test_malformed_bodies_rejected(harness):
    election, clock, client = harness
    assert client.post("/v1/register", json={"once_digest": "zz", "pk": "00"}).status_code == 422
    # syntactically valid hex but not a curve point
    bad_point = client.post(
        "/v1/register", json={"once_digest": "00" * 32, "pk": "02" + "ff" * 32}
    )
    assert bad_point.status_code == 400
    bad_sk = client.post("/v1/release", json={"holder_index": 1, "sk": "ff" * 32})
    assert bad_sk.status_code == 400

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covote.encoding import canonical_json
from covote.errors import (
    AlreadyRegistered,
    AlreadyReleased,
    ConfigError,
    DuplicateKey,
    MalformedBallot,
    NotEligible,
    NotFound,
    PhaseError,
    SessionAborted,
    TamperDetected,
)
from covote.eventlog import EventRecord, decode_records
from covote.group import DeterministicRandomness, keygen
from covote.identifiers import eligibility_digests, issue_identifiers
from covote.ledger import Ledger, SessionConfig, ThresholdPolicy, replay
from covote.timed_release import EncryptedBallot, PublicParams

from conftest import Election, make_config


def test_create_session_happy_path(suite):
    config = make_config()
    batch = issue_identifiers(3, DeterministicRandomness("create"), suite)
    ledger = Ledger.create(config, batch.eligibility)
    assert ledger.state.phase == "pre_registration"  # clock 0, window opens at 10
    assert len(ledger.log.records) == 1


def test_window_ordering_enforced():
    with pytest.raises(ConfigError):
        make_config(registration=(10, 25), voting=(20, 30))
    with pytest.raises(ConfigError):
        make_config(voting=(20, 20))
    with pytest.raises(ConfigError):
        make_config(deadline=29)
    with pytest.raises(ConfigError):
        make_config(registration=(15, 10))


def test_40_voter_session_shape(suite):
    batch = issue_identifiers(40, DeterministicRandomness("forty"), suite)
    ledger = Ledger.create(make_config(), batch.eligibility)
    assert len(ledger.state.eligibility) == 40


def test_empty_eligibility_rejected(suite):
    with pytest.raises(ConfigError):
        Ledger.create(make_config(), frozenset())


def test_registration_rules(suite):
    election = Election(voters=4)
    assert election.register(0, now=10) == 1
    assert election.register(1, now=15) == 2

    # duplicate identifier digest
    once = eligibility_digests(election.identifier(0), suite).once
    pair = keygen(DeterministicRandomness("fresh"))
    with pytest.raises(AlreadyRegistered):
        election.ledger.register_holder(once, pair.pk, 16)

    # duplicate public key
    once2 = eligibility_digests(election.identifier(2), suite).once
    reused_pk = election.keypairs[1][1].pk
    with pytest.raises(DuplicateKey):
        election.ledger.register_holder(once2, reused_pk, 16)

    # digest not in S
    with pytest.raises(NotEligible):
        election.ledger.register_holder(b"\x07" * 32, pair.pk, 16)

    # outside the registration window
    with pytest.raises(PhaseError):
        election.ledger.register_holder(once2, pair.pk, 9)
    with pytest.raises(PhaseError):
        election.ledger.register_holder(once2, pair.pk, 20)


def test_clock_is_monotone(suite):
    election = Election(voters=4)
    election.register(0, now=15)
    with pytest.raises(PhaseError):
        election.register(1, now=12)


def test_freeze_policies(suite):
    election = Election(voters=4)
    election.register(0)
    election.register(1)
    election.register(2)
    assert election.freeze(now=20) == (3, 2)

    fraction = Election(config=make_config(policy=ThresholdPolicy(fraction=0.5)), voters=4)
    for v in range(3):
        fraction.register(v)
    assert fraction.freeze(now=20) == (3, 2)  # ceil(0.5 * 3)

    with pytest.raises(PhaseError):
        fraction.freeze(now=25)  # already frozen


def test_freeze_before_close_rejected():
    election = Election(voters=2)
    election.register(0)
    with pytest.raises(PhaseError):
        election.freeze(now=19)


def test_freeze_with_no_holders_aborts():
    election = Election(voters=2)
    with pytest.raises(SessionAborted):
        election.freeze(now=20)
    assert election.ledger.state.phase == "aborted"
    # post-abort operations are refused
    with pytest.raises(SessionAborted):
        election.register(0, now=21)


def test_freeze_infeasible_fixed_threshold_aborts():
    election = Election(config=make_config(policy=ThresholdPolicy(fixed=5)), voters=4)
    election.register(0)
    with pytest.raises(SessionAborted):
        election.freeze(now=20)
    assert election.ledger.state.aborted


def test_fraction_ceil_is_exact():
    # 0.07 of 100 must resolve to 7, not 8 (no float drift)
    policy = ThresholdPolicy(fraction=0.07)
    assert policy.resolve(100) == 7
    assert ThresholdPolicy(fraction=0.5).resolve(30) == 15
    assert ThresholdPolicy(fraction=1.0).resolve(7) == 7


def test_ballot_submission_and_structure(suite):
    election = Election(voters=4)
    for v in range(3):
        election.register(v)
    election.freeze(now=20)
    assert election.vote(0, "A", now=20) == 1
    assert election.vote(1, "B", now=25) == 2

    # outside window
    ballot = election.encrypted_ballot(2, "C")
    with pytest.raises(PhaseError):
        election.ledger.submit_ballot(ballot, 30)

    # wrong alpha count (claims 3-of-3)
    params = ballot.params
    bad = EncryptedBallot(
        params=PublicParams(
            ephemeral=params.ephemeral,
            alphas=params.alphas[:1],
            n=3,
            t=3,
            ctx=params.ctx,
            nonce=params.nonce,
        ),
        ciphertext=ballot.ciphertext,
    )
    with pytest.raises(MalformedBallot):
        election.ledger.submit_ballot(bad, 26)

    # oversized ciphertext
    inflated = EncryptedBallot(params=params, ciphertext=ballot.ciphertext + bytes(6000))
    with pytest.raises(MalformedBallot):
        election.ledger.submit_ballot(inflated, 26)

    # ballots before freeze are rejected
    fresh = Election(voters=3, seed="nofreeze")
    fresh.register(0)
    early = election.encrypted_ballot(0, "A")
    with pytest.raises(PhaseError):
        fresh.ledger.submit_ballot(early, 25)


def test_duplicate_identifier_ballots_both_stored():
    election = Election(voters=4)
    for v in range(2):
        election.register(v)
    election.freeze(now=20)
    election.vote(0, "A", now=21)
    election.vote(0, "B", now=22)
    assert len(election.ledger.state.ballots) == 2


def test_release_rules():
    election = Election(voters=4)
    for v in range(3):
        election.register(v)
    election.freeze(now=20)
    election.vote(0, "A", now=25)

    # too early
    with pytest.raises(PhaseError):
        election.release(0, now=29)

    release = election.release(0, now=30)
    assert release.valid

    # wrong key recorded as invalid attempt, retry allowed
    index, pair = election.keypairs[1]
    bad = election.ledger.release_key(index, pair.sk + 1, 31)
    assert not bad.valid
    assert election.ledger.state.holders[index - 1].invalid_attempts == [31]
    good = election.ledger.release_key(index, pair.sk, 32)
    assert good.valid

    # duplicate accepted release
    with pytest.raises(AlreadyReleased):
        election.release(0, now=33)

    # unknown holder
    with pytest.raises(NotFound):
        election.ledger.release_key(99, pair.sk, 33)

    # after the deadline
    with pytest.raises(PhaseError):
        election.ledger.release_key(3, election.keypairs[2][1].sk, 41)


def test_settlement_and_token_conservation():
    election = Election(voters=4)
    for v in range(3):
        election.register(v)
    election.freeze(now=20)
    election.release(0, now=30)
    election.release(1, now=31)

    with pytest.raises(PhaseError):
        election.ledger.settle_incentives(40)  # deadline not yet passed

    payouts = election.ledger.settle_incentives(41)
    settlement = election.ledger.state.settlement
    assert payouts == {1: 15, 2: 15, 3: 0}
    assert settlement.forfeits == {3: 10}
    assert sum(payouts.values()) + sum(settlement.forfeits.values()) == 3 * 10 + 2 * 5

    with pytest.raises(PhaseError):
        election.ledger.settle_incentives(42)  # already settled


def test_settlement_zero_incentives():
    election = Election(
        config=make_config(deposit=0, reward=0, policy=ThresholdPolicy(fixed=1)), voters=3
    )
    election.register(0)
    election.freeze(now=20)
    payouts = election.ledger.settle_incentives(41)
    assert payouts == {1: 0}
    assert election.ledger.state.settlement.forfeits == {1: 0}


def test_aborted_session_refunds_deposits():
    election = Election(config=make_config(policy=ThresholdPolicy(fixed=5)), voters=3)
    election.register(0)
    election.register(1)
    with pytest.raises(SessionAborted):
        election.freeze(now=20)
    payouts = election.ledger.settle_incentives(41)
    assert payouts == {1: 10, 2: 10}
    assert election.ledger.state.settlement.aborted_refund


def run_full_session(tmp_path=None, path=None):
    election = Election(voters=4, path=path)
    for v in range(3):
        election.register(v)
    election.freeze(now=20)
    election.vote(0, "A", now=21)
    election.vote(1, "B", now=22)
    election.release_all(now=30)
    election.ledger.settle_incentives(41)
    return election


def test_replay_reproduces_state_bit_exactly():
    election = run_full_session()
    records = election.ledger.log.records
    replayed = replay(records)
    assert replayed.serialize_state() == election.ledger.serialize_state()


def test_replay_from_file(tmp_path):
    path = tmp_path / "session.log"
    election = run_full_session(path=path)
    reopened = Ledger.open(path)
    assert reopened.serialize_state() == election.ledger.serialize_state()


def test_single_bit_mutation_detected(tmp_path):
    path = tmp_path / "session.log"
    election = run_full_session(path=path)
    data = path.read_bytes()
    for offset in [0, 3, len(data) // 2, len(data) - 1]:
        mutated = bytearray(data)
        mutated[offset] ^= 0x01
        with pytest.raises(TamperDetected):
            replay(decode_records(bytes(mutated)))


def test_mutated_payload_detected():
    election = run_full_session()
    records = list(election.ledger.log.records)
    target = records[2]
    tampered_payload = target.payload.replace(b'"now":', b'"nOw":', 1)
    records[2] = EventRecord(tag=target.tag, payload=tampered_payload, chain=target.chain)
    with pytest.raises(TamperDetected):
        replay(records)


def test_reordered_events_detected():
    election = run_full_session()
    records = list(election.ledger.log.records)
    records[1], records[2] = records[2], records[1]
    with pytest.raises(TamperDetected):
        replay(records)


def test_empty_log_folds_to_pre_session_state():
    assert replay([]) is None
    # but a Ledger (which needs a session) cannot be built from nothing
    with pytest.raises(TamperDetected):
        Ledger.from_records([])


def test_json_export_shape():
    election = run_full_session()
    doc = election.ledger.log.to_json()
    assert doc["head"] == election.ledger.head.hex()
    assert [e["type"] for e in doc["events"][:2]] == ["create_session", "register_holder"]
    assert all(len(e["chain"]) == 64 for e in doc["events"])


@settings(max_examples=40, deadline=None)
@given(now=st.integers(min_value=0, max_value=50))
def test_phase_windows_respected_for_registration(now):
    election = Election(voters=2, seed=f"phase-{now}")
    once = eligibility_digests(election.identifier(0), election.suite).once
    pair = keygen(DeterministicRandomness(f"phase-kp-{now}"))
    if 10 <= now < 20:
        assert election.ledger.register_holder(once, pair.pk, now) == 1
    else:
        with pytest.raises(PhaseError):
            election.ledger.register_holder(once, pair.pk, now)


def test_serialized_state_is_canonical():
    election = run_full_session()
    doc = election.ledger.serialize_state()
    import json

    assert canonical_json(json.loads(doc)) == doc

import pytest

from covote.ballots import BallotFormat, encode_choice
from covote.group import DeterministicRandomness, keygen
from covote.hashing import DEFAULT_SUITE
from covote.identifiers import eligibility_digests, issue_identifiers
from covote.ledger import Ledger, SessionConfig, ThresholdPolicy
from covote.timed_release import encrypt_ballot


@pytest.fixture
def suite():
    return DEFAULT_SUITE


@pytest.fixture
def rng():
    return DeterministicRandomness("conftest-default")


def make_config(
    session_id="test-session",
    registration=(10, 20),
    voting=(20, 30),
    deadline=40,
    policy=ThresholdPolicy(fixed=2),
    fmt=None,
    deposit=10,
    reward=5,
):
    return SessionConfig(
        session_id=session_id,
        registration_window=registration,
        voting_window=voting,
        release_deadline=deadline,
        threshold_policy=policy,
        ballot_format=fmt or BallotFormat(kind="single_choice", options=("A", "B", "C")),
        deposit=deposit,
        reward=reward,
    )


class Election:
    """Test-side driver that walks a session through its whole life."""

    def __init__(self, config=None, voters=8, seed="election", path=None):
        self.seed = seed
        self.config = config or make_config()
        self.suite = self.config.suite
        self.batch = issue_identifiers(voters, DeterministicRandomness(f"{seed}-ids"), self.suite)
        self.ledger = Ledger.create(self.config, self.batch.eligibility, path=path)
        self.keypairs = {}  # voter position -> KeyPair
        self._ballot_counter = 0

    def identifier(self, voter):
        return self.batch.identifiers[voter]

    def register(self, voter, now=10, rng=None):
        pair = keygen(rng or DeterministicRandomness(f"{self.seed}-kp-{voter}"))
        once = eligibility_digests(self.identifier(voter), self.suite).once
        index = self.ledger.register_holder(once, pair.pk, now)
        self.keypairs[voter] = (index, pair)
        return index

    def freeze(self, now=20):
        return self.ledger.freeze_holder_set(now)

    def encrypted_ballot(self, voter, choice, rng=None):
        n, t = self.ledger.state.frozen
        payload = encode_choice(self.config.ballot_format, choice)
        self._ballot_counter += 1
        return encrypt_ballot(
            payload,
            self.identifier(voter),
            self.ledger.state.holder_pks(),
            t,
            self.config.session_id,
            rng or DeterministicRandomness(f"{self.seed}-ballot-{self._ballot_counter}"),
            self.suite,
        )

    def vote(self, voter, choice, now=25, rng=None):
        return self.ledger.submit_ballot(self.encrypted_ballot(voter, choice, rng), now)

    def release(self, voter, now=30, sk=None):
        index, pair = self.keypairs[voter]
        return self.ledger.release_key(index, sk if sk is not None else pair.sk, now)

    def release_all(self, now=30):
        for voter in sorted(self.keypairs):
            self.release(voter, now=now)


@pytest.fixture
def election_factory():
    return Election

"""Collectively secure voting: threshold timed-release ballots on a
tamper-evident bulletin board, with verifiable tallying."""

__version__ = "0.1.0"

from .ballots import BallotFormat
from .errors import CovoteError
from .group import (
    DeterministicRandomness,
    GroupElement,
    KeyPair,
    SystemRandomness,
    keygen,
    verify_key_release,
)
from .hashing import DEFAULT_SUITE, HashSuite
from .identifiers import eligibility_digests, issue_identifiers
from .ledger import Ledger, SessionConfig, ThresholdPolicy
from .tally import apply_rule, tally_ledger, verify_transcript
from .timed_release import (
    EncryptedBallot,
    PublicParams,
    decrypt_ballot,
    derive_share,
    encrypt_ballot,
    reconstruct_secret,
)

__all__ = [
    "BallotFormat",
    "CovoteError",
    "DEFAULT_SUITE",
    "DeterministicRandomness",
    "EncryptedBallot",
    "GroupElement",
    "HashSuite",
    "KeyPair",
    "Ledger",
    "PublicParams",
    "SessionConfig",
    "SystemRandomness",
    "ThresholdPolicy",
    "apply_rule",
    "decrypt_ballot",
    "derive_share",
    "eligibility_digests",
    "encrypt_ballot",
    "issue_identifiers",
    "keygen",
    "reconstruct_secret",
    "tally_ledger",
    "verify_transcript",
]

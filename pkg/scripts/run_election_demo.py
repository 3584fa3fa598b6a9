#!/usr/bin/env python3
"""End-to-end demo: 40 eligible voters, 30 secret holders, t = 15.

Walks the whole lifecycle in-process and prints each stage, finishing
with the verified tally transcript summary.
"""

import json
import random

from covote.ballots import BallotFormat, encode_choice
from covote.group import DeterministicRandomness, keygen
from covote.hashing import HashSuite
from covote.identifiers import eligibility_digests, issue_identifiers
from covote.ledger import Ledger, SessionConfig, ThresholdPolicy
from covote.tally import tally_ledger, verify_transcript
from covote.timed_release import encrypt_ballot

SEED = "demo-2026"


def stage(name, doc):
    print(f"\n== {name} ==")
    print(json.dumps(doc, indent=2)[:800])


def main():
    suite = HashSuite()
    fmt = BallotFormat(kind="single_choice", options=("North", "South", "East"))
    config = SessionConfig(
        session_id="demo-session",
        registration_window=(10, 20),
        voting_window=(20, 30),
        release_deadline=40,
        threshold_policy=ThresholdPolicy(fraction=0.5),
        ballot_format=fmt,
        deposit=10,
        reward=5,
    )
    batch = issue_identifiers(40, DeterministicRandomness(f"{SEED}-ids"), suite)
    ledger = Ledger.create(config, batch.eligibility)
    stage("session created", {"eligible": len(batch.eligibility), "head": ledger.head.hex()})

    keypairs = {}
    for voter in range(30):
        pair = keygen(DeterministicRandomness(f"{SEED}-kp-{voter}"))
        once = eligibility_digests(batch.identifiers[voter], suite).once
        keypairs[voter] = (ledger.register_holder(once, pair.pk, 10), pair)
    n, t = ledger.freeze_holder_set(20)
    stage("holders frozen", {"n": n, "t": t})

    rng = random.Random(SEED)
    holder_pks = ledger.state.holder_pks()
    for voter in range(40):
        choice = rng.choice(fmt.options)
        ballot = encrypt_ballot(
            encode_choice(fmt, choice),
            batch.identifiers[voter],
            holder_pks,
            t,
            config.session_id,
            DeterministicRandomness(f"{SEED}-ballot-{voter}"),
            suite,
        )
        ledger.submit_ballot(ballot, 21)
    stage("ballots cast", {"ballots": len(ledger.state.ballots)})

    for voter, (index, pair) in keypairs.items():
        ledger.release_key(index, pair.sk, 30)
    stage("keys released", {"valid_releases": len(ledger.state.valid_releases())})

    transcript = tally_ledger(ledger)
    verification = verify_transcript(transcript, ledger.log.records)
    stage(
        "tally",
        {
            "winners": transcript["result"]["winners"],
            "scores": transcript["result"]["aggregates"]["scores"],
            "validity_counts": transcript["result"]["validity_counts"],
            "turnout": transcript["turnout"],
            "transcript_verified": verification.ok,
        },
    )

    payouts = ledger.settle_incentives(41)
    stage("settlement", {"paid": sum(payouts.values()), "holders": len(payouts)})


if __name__ == "__main__":
    main()

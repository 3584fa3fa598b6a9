#!/usr/bin/env python3
"""Generate the cross-language test-vector file.

The browser client re-implements the scalar/point/digest encodings and
the ballot encryption pipeline; this file pins them bit-exactly so both
stacks are checked against the same bytes.  Regenerating must be a
no-op unless the wire format deliberately changed.
"""

import json
from pathlib import Path

from covote.encoding import canonical_json
from covote.eventlog import GENESIS_HEAD
from covote.group import DeterministicRandomness, keygen, public_key, scalar_to_bytes
from covote.hashing import TAG_AEAD_NONCE, TAG_BALLOT_KEY, TAG_SHARE, HashSuite
from covote.identifiers import eligibility_digests
from covote.timed_release import _ballot_key, _encrypt_ballot_traced, derive_share

OUT = Path(__file__).resolve().parent.parent / "vectors" / "test_vectors.json"


def build():
    suite = HashSuite()

    keypairs = []
    for seed in ("vec-kp-1", "vec-kp-2", "vec-kp-3"):
        pair = keygen(DeterministicRandomness(seed))
        keypairs.append(
            {"sk_le_hex": scalar_to_bytes(pair.sk).hex(), "pk_hex": pair.pk.hex()}
        )
    # small exponents pin the scalar<->point mapping itself
    small = [{"sk_dec": str(v), "pk_hex": public_key(v).hex()} for v in (1, 2, 3, 65537)]

    identifiers = [bytes(32), bytes(range(32)), DeterministicRandomness("vec-id").token_bytes(32)]
    digests = []
    for ident in identifiers:
        d = eligibility_digests(ident, suite)
        digests.append(
            {"identifier_hex": ident.hex(), "once_hex": d.once.hex(), "twice_hex": d.twice.hex()}
        )

    # a share derivation fixture with every input pinned
    holder = keygen(DeterministicRandomness("vec-share-holder"))
    ephemeral_pair = keygen(DeterministicRandomness("vec-share-ephemeral"))
    ctx = "vector-session"
    nonce = bytes.fromhex("000102030405060708090a0b0c0d0e0f")
    share = derive_share(ephemeral_pair.pk, holder.sk, 2, ctx, nonce, suite)
    share_fixture = {
        "ephemeral_hex": ephemeral_pair.pk.hex(),
        "holder_sk_le_hex": scalar_to_bytes(holder.sk).hex(),
        "index": 2,
        "ctx": ctx,
        "nonce_hex": nonce.hex(),
        "share_le_hex": scalar_to_bytes(share).hex(),
    }

    # full deterministic ballot: the rng draws r, k, nonce in that order
    rng = DeterministicRandomness("vec-ballot")
    r = rng.scalar_nonzero()
    k = rng.scalar_uniform()
    ballot_nonce = rng.token_bytes(16)
    holders = [keygen(DeterministicRandomness(f"vec-ballot-holder-{i}")) for i in range(3)]
    payload = b'{"choice":"East"}'
    identifier = bytes(range(32))
    ballot, trace = _encrypt_ballot_traced(
        payload,
        identifier,
        [h.pk for h in holders],
        2,
        ctx,
        DeterministicRandomness("vec-ballot"),
        suite,
    )
    assert trace.k == k and ballot.params.nonce == ballot_nonce
    key, aead_nonce = _ballot_key(suite, k, ctx, ballot_nonce)
    ballot_fixture = {
        "ctx": ctx,
        "t": 2,
        "holders": [
            {"sk_le_hex": scalar_to_bytes(h.sk).hex(), "pk_hex": h.pk.hex()} for h in holders
        ],
        "r_le_hex": scalar_to_bytes(r).hex(),
        "k_le_hex": scalar_to_bytes(k).hex(),
        "payload_hex": payload.hex(),
        "identifier_hex": identifier.hex(),
        "shares_le_hex": [scalar_to_bytes(s).hex() for s in trace.shares],
        "aead_key_hex": key.hex(),
        "aead_nonce_hex": aead_nonce.hex(),
        "wire": ballot.to_wire(),
    }

    # hash-chain fixture for client-side log auditing
    chain_payloads = [b'{"type":"create_session","x":1}', b'{"type":"settle","now":41}']
    head = GENESIS_HEAD
    chain = []
    for payload_bytes in chain_payloads:
        head = suite.digest(head + payload_bytes)
        chain.append({"payload": payload_bytes.decode(), "chain_hex": head.hex()})

    return {
        "suite": {"hash_algorithm": "sha-256", "aead_scheme": "aes-256-gcm"},
        "domain_tags": {
            "share": TAG_SHARE.decode(),
            "ballot_key": TAG_BALLOT_KEY.decode(),
            "aead_nonce": TAG_AEAD_NONCE.decode(),
        },
        "keypairs": keypairs,
        "small_exponents": small,
        "eligibility_digests": digests,
        "share": share_fixture,
        "ballot": ballot_fixture,
        "event_chain": chain,
    }


def main():
    OUT.parent.mkdir(parents=True, exist_ok=True)
    doc = build()
    OUT.write_bytes(canonical_json(doc) + b"\n")
    print(f"wrote {OUT} ({OUT.stat().st_size} bytes)")
    print(json.dumps({k: type(v).__name__ for k, v in doc.items()}, indent=2))


if __name__ == "__main__":
    main()

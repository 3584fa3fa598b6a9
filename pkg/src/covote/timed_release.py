"""Threshold reveal-verifiable timed-release ballot encryption.

Encryption hides a fresh secret k behind the registered holder set: a
degree-n polynomial f is fixed by (0, k) and one derived share per
holder, and the n-t+1 evaluations f(n+1)..f(n+(n-t+1)) are published as
alphas.  Any t holders who later reveal their one-time secret keys let
anyone re-derive t shares, which together with the alphas give n+1
points — enough to interpolate k and decrypt.  Fewer than t reveals
leave f underdetermined.

Shares are domain-separated per (session ctx, ballot nonce, holder
index), so a share never transfers between ballots or indices.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InconsistentShares, InvalidCiphertext, ThresholdNotMet
from .group import (
    GroupElement,
    RandomnessSource,
    Scalar,
    diffie_hellman,
    public_key,
    scalar_to_bytes,
    verify_key_release,
)
from .hashing import (
    AEAD_NONCE_BYTES,
    TAG_AEAD_NONCE,
    TAG_BALLOT_KEY,
    TAG_SHARE,
    HashSuite,
)
from .poly import SharePoint, interpolate

BALLOT_NONCE_BYTES = 16
IDENTIFIER_BYTES = 32


@dataclass(frozen=True)
class PublicParams:
    """Published per-ballot values enabling share derivation and checking."""

    ephemeral: GroupElement  # g^r
    alphas: tuple[Scalar, ...]  # f(n+1) .. f(n+(n-t+1))
    n: int
    t: int
    ctx: str  # session domain-separation string
    nonce: bytes  # unique per ballot, domain-separates shares and the key

    def __post_init__(self):
        if not 1 <= self.t <= self.n:
            raise ValueError("threshold must satisfy 1 <= t <= n")
        if len(self.alphas) != self.n - self.t + 1:
            raise ValueError("alphas must contain exactly n-t+1 evaluations")
        if len(self.nonce) != BALLOT_NONCE_BYTES:
            raise ValueError("ballot nonce must be 16 bytes")


@dataclass(frozen=True)
class EncryptedBallot:
    params: PublicParams
    ciphertext: bytes  # AEAD over payload || identifier

    @property
    def nonce(self) -> bytes:
        return self.params.nonce

    def to_wire(self) -> dict:
        """The four hex fields a client submits; n, t and ctx are implied
        by the frozen session."""
        return {
            "ephemeral": self.params.ephemeral.hex(),
            "alphas": [scalar_to_bytes(a).hex() for a in self.params.alphas],
            "nonce": self.params.nonce.hex(),
            "ciphertext": self.ciphertext.hex(),
        }


@dataclass(frozen=True)
class EncryptionTrace:
    """Transient encryptor secrets, surfaced only by the traced entry
    point below so oracles can check reconstruction against ground truth."""

    k: Scalar
    shares: tuple[Scalar, ...]


def _share_from_dh(suite: HashSuite, dh_x: bytes, ctx: str, nonce: bytes, index: int) -> Scalar:
    return suite.hash_to_scalar(
        TAG_SHARE, dh_x, ctx.encode(), nonce, index.to_bytes(4, "big")
    )


def _ballot_key(suite: HashSuite, k: Scalar, ctx: str, nonce: bytes) -> tuple[bytes, bytes]:
    key = suite.kdf(TAG_BALLOT_KEY, scalar_to_bytes(k), ctx.encode(), nonce)
    aead_nonce = suite.kdf(TAG_AEAD_NONCE, ctx.encode(), nonce)[:AEAD_NONCE_BYTES]
    return key, aead_nonce


def derive_share(
    ephemeral: GroupElement,
    sk: Scalar,
    index: int,
    ctx: str,
    nonce: bytes,
    suite: HashSuite,
) -> Scalar:
    """Holder-side share: hash of ephemeral^sk with full domain separation.

    Equals the encryptor's share for the same index because
    ephemeral^sk = (g^r)^sk = pk^r.
    """
    if index < 1:
        raise ValueError("holder index is 1-based")
    return _share_from_dh(suite, diffie_hellman(sk, ephemeral), ctx, nonce, index)


def _encrypt_ballot_traced(
    payload: bytes,
    identifier: bytes,
    holder_pks: list[GroupElement],
    t: int,
    ctx: str,
    rng: RandomnessSource,
    suite: HashSuite,
) -> tuple[EncryptedBallot, EncryptionTrace]:
    """Test-only variant of :func:`encrypt_ballot` that keeps the
    transient secrets; production callers must use encrypt_ballot."""
    n = len(holder_pks)
    if n < 1:
        raise ValueError("holder set must not be empty")
    if not 1 <= t <= n:
        raise ValueError("threshold must satisfy 1 <= t <= n")
    if len(identifier) != IDENTIFIER_BYTES:
        raise ValueError("identifier must be exactly 32 bytes")

    r = rng.scalar_nonzero()
    k = rng.scalar_uniform()
    nonce = rng.token_bytes(BALLOT_NONCE_BYTES)
    ephemeral = public_key(r)

    shares = tuple(
        _share_from_dh(suite, diffie_hellman(r, pk), ctx, nonce, i)
        for i, pk in enumerate(holder_pks, start=1)
    )
    points = [SharePoint(0, k)] + [SharePoint(i, s) for i, s in enumerate(shares, start=1)]
    alphas = tuple(interpolate(points, n + 1 + j) for j in range(n - t + 1))

    key, aead_nonce = _ballot_key(suite, k, ctx, nonce)
    ciphertext = suite.seal(key, aead_nonce, payload + identifier)

    params = PublicParams(
        ephemeral=ephemeral, alphas=alphas, n=n, t=t, ctx=ctx, nonce=nonce
    )
    return EncryptedBallot(params=params, ciphertext=ciphertext), EncryptionTrace(
        k=k, shares=shares
    )


def encrypt_ballot(
    payload: bytes,
    identifier: bytes,
    holder_pks: list[GroupElement],
    t: int,
    ctx: str,
    rng: RandomnessSource,
    suite: HashSuite,
) -> EncryptedBallot:
    """Seal payload || identifier against the holder set; r, k and the
    shares are discarded before returning."""
    ballot, _ = _encrypt_ballot_traced(payload, identifier, holder_pks, t, ctx, rng, suite)
    return ballot


def reconstruct_secret(
    params: PublicParams,
    releases: list[tuple[int, Scalar]],
    holder_pks: list[GroupElement],
    suite: HashSuite,
) -> Scalar:
    """Recover k from at least t verified key releases plus the alphas.

    Releases failing pk = g^sk are excluded and never contribute a
    share.  The lowest-indexed t valid releases are interpolated with
    the alphas; every surplus valid release is then checked against the
    interpolated polynomial, so a corrupted release or malformed alphas
    cannot pass silently.
    """
    if len(holder_pks) != params.n:
        raise ValueError("holder key count does not match params")

    valid: dict[int, Scalar] = {}
    for index, sk in releases:
        if not 1 <= index <= params.n or index in valid:
            continue
        if verify_key_release(holder_pks[index - 1], sk):
            valid[index] = sk

    if len(valid) < params.t:
        raise ThresholdNotMet(f"{len(valid)} valid releases, threshold is {params.t}")

    shares = {
        index: derive_share(params.ephemeral, sk, index, params.ctx, params.nonce, suite)
        for index, sk in valid.items()
    }
    chosen = sorted(shares)[: params.t]
    points = [SharePoint(i, shares[i]) for i in chosen]
    points += [SharePoint(params.n + 1 + j, alpha) for j, alpha in enumerate(params.alphas)]
    k = interpolate(points, 0)

    for index in sorted(shares)[params.t :]:
        if interpolate(points, index) != shares[index]:
            raise InconsistentShares(
                f"share from holder {index} is off the reconstruction polynomial"
            )
    return k


def decrypt_ballot(ballot: EncryptedBallot, k: Scalar, suite: HashSuite) -> tuple[bytes, bytes]:
    """Authenticated decryption; returns (payload, identifier)."""
    key, aead_nonce = _ballot_key(suite, k, ballot.params.ctx, ballot.params.nonce)
    plaintext = suite.open(key, aead_nonce, ballot.ciphertext)
    if len(plaintext) < IDENTIFIER_BYTES:
        raise InvalidCiphertext("plaintext shorter than an identifier")
    return plaintext[:-IDENTIFIER_BYTES], plaintext[-IDENTIFIER_BYTES:]

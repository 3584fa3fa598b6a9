"""Prime-order group layer: scalars, group elements, key pairs, DH.

The group is NIST P-256 (cofactor 1, order ``ORDER``), accessed through
the ``cryptography`` package so all point arithmetic runs in vetted
native code.  Scalars are plain ints reduced mod ``ORDER``.

Canonical encodings (bit-exact, used as hash preimages and on the wire):
  * scalar   -> 32 bytes little-endian
  * element  -> 33-byte SEC1 compressed point
  * DH output-> 32-byte big-endian x-coordinate of the shared point
"""

from __future__ import annotations

import hashlib
import secrets
from dataclasses import dataclass

from cryptography.hazmat.primitives.asymmetric import ec
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

CURVE = ec.SECP256R1()
ORDER = 0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551

SCALAR_BYTES = 32
ELEMENT_BYTES = 33

Scalar = int


def scalar_to_bytes(value: Scalar) -> bytes:
    if not 0 <= value < ORDER:
        raise ValueError("scalar out of range")
    return value.to_bytes(SCALAR_BYTES, "little")


def scalar_from_bytes(data: bytes) -> Scalar:
    if len(data) != SCALAR_BYTES:
        raise ValueError("scalar must be exactly 32 bytes")
    value = int.from_bytes(data, "little")
    if value >= ORDER:
        raise ValueError("scalar not in reduced form")
    return value


@dataclass(frozen=True)
class GroupElement:
    """A validated point, stored in compressed SEC1 form.

    Construction goes through :meth:`from_bytes`, which rejects anything
    that is not a curve point (the identity has no SEC1 compressed
    encoding, so it is rejected for free).
    """

    data: bytes

    @classmethod
    def from_bytes(cls, data: bytes) -> "GroupElement":
        if len(data) != ELEMENT_BYTES or data[0] not in (0x02, 0x03):
            raise ValueError("group element must be a 33-byte compressed point")
        # raises ValueError if the coordinates are not on the curve
        ec.EllipticCurvePublicKey.from_encoded_point(CURVE, data)
        return cls(bytes(data))

    @classmethod
    def from_hex(cls, text: str) -> "GroupElement":
        return cls.from_bytes(bytes.fromhex(text))

    def to_public_key(self) -> ec.EllipticCurvePublicKey:
        return ec.EllipticCurvePublicKey.from_encoded_point(CURVE, self.data)

    def hex(self) -> str:
        return self.data.hex()

    def __repr__(self) -> str:  # pragma: no cover
        return f"GroupElement({self.data.hex()})"


@dataclass(frozen=True)
class KeyPair:
    sk: Scalar
    pk: GroupElement


def public_key(sk: Scalar) -> GroupElement:
    """g^sk as a validated group element."""
    if not 1 <= sk < ORDER:
        raise ValueError("secret key must be in [1, order-1]")
    point = ec.derive_private_key(sk, CURVE).public_key()
    return GroupElement(point.public_bytes(Encoding.X962, PublicFormat.CompressedPoint))


GENERATOR = public_key(1)


def keygen(rng: "RandomnessSource") -> KeyPair:
    """Fresh key pair with sk uniform in [1, order-1]."""
    sk = rng.scalar_nonzero()
    return KeyPair(sk=sk, pk=public_key(sk))


def verify_key_release(pk: GroupElement, sk: Scalar) -> bool:
    """True iff pk = g^sk.  This equality is the reveal-verification rule."""
    if not isinstance(sk, int) or not 1 <= sk < ORDER:
        return False
    return public_key(sk) == pk


def diffie_hellman(sk: Scalar, element: GroupElement) -> bytes:
    """element^sk, encoded as the 32-byte big-endian x-coordinate."""
    if not 1 <= sk < ORDER:
        raise ValueError("secret key must be in [1, order-1]")
    priv = ec.derive_private_key(sk, CURVE)
    return priv.exchange(ec.ECDH(), element.to_public_key())


class RandomnessSource:
    """Interface for randomness injection; see the two implementations."""

    def token_bytes(self, n: int) -> bytes:
        raise NotImplementedError

    def scalar_uniform(self) -> Scalar:
        """Uniform in [0, order-1] by rejection sampling."""
        while True:
            candidate = int.from_bytes(self.token_bytes(SCALAR_BYTES), "big")
            if candidate < ORDER:
                return candidate

    def scalar_nonzero(self) -> Scalar:
        while True:
            value = self.scalar_uniform()
            if value != 0:
                return value


class SystemRandomness(RandomnessSource):
    """OS entropy; the only source suitable for real elections."""

    def token_bytes(self, n: int) -> bytes:
        return secrets.token_bytes(n)


class DeterministicRandomness(RandomnessSource):
    """SHA-256 counter stream seeded from arbitrary data.

    Test and simulation use only: identical seeds yield identical byte
    streams on every platform.
    """

    def __init__(self, seed: int | str | bytes):
        if isinstance(seed, int):
            seed = seed.to_bytes((seed.bit_length() + 7) // 8 or 1, "big", signed=False)
        elif isinstance(seed, str):
            seed = seed.encode()
        self._key = hashlib.sha256(b"covote/drbg/v1" + seed).digest()
        self._counter = 0
        self._buffer = b""

    def token_bytes(self, n: int) -> bytes:
        while len(self._buffer) < n:
            block = hashlib.sha256(
                self._key + self._counter.to_bytes(8, "big")
            ).digest()
            self._counter += 1
            self._buffer += block
        out, self._buffer = self._buffer[:n], self._buffer[n:]
        return out

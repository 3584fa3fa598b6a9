"""One declared hash, used three ways: plain digest, hash-to-scalar, KDF.

``HashSuite`` bundles the session's hash and AEAD identifiers (they are
part of the public session config, explicit on the wire).  Multi-part
inputs are framed with a 4-byte big-endian length per part, so variable
length fields can never collide.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .errors import ConfigError, InvalidCiphertext
from .group import ORDER, Scalar

DIGEST_BYTES = 32
AEAD_NONCE_BYTES = 12
AEAD_KEY_BYTES = 32

TAG_SHARE = b"covote/share/v1"
TAG_BALLOT_KEY = b"covote/ballot-key/v1"
TAG_AEAD_NONCE = b"covote/aead-nonce/v1"

SUPPORTED_HASHES = ("sha-256",)
SUPPORTED_AEADS = ("aes-256-gcm",)


def _frame(parts: tuple[bytes, ...]) -> bytes:
    out = bytearray()
    for part in parts:
        out += len(part).to_bytes(4, "big")
        out += part
    return bytes(out)


@dataclass(frozen=True)
class HashSuite:
    hash_algorithm: str = "sha-256"
    aead_scheme: str = "aes-256-gcm"

    def __post_init__(self):
        if self.hash_algorithm not in SUPPORTED_HASHES:
            raise ConfigError(f"unsupported hash algorithm {self.hash_algorithm!r}")
        if self.aead_scheme not in SUPPORTED_AEADS:
            raise ConfigError(f"unsupported AEAD scheme {self.aead_scheme!r}")

    def digest(self, data: bytes) -> bytes:
        """h(data): the plain 256-bit hash, no domain tag."""
        return hashlib.sha256(data).digest()

    def _tagged(self, tag: bytes, counter: int, payload: bytes) -> bytes:
        return hashlib.sha256(tag + bytes([counter]) + payload).digest()

    def hash_to_scalar(self, tag: bytes, *parts: bytes) -> Scalar:
        """Uniform scalar from tagged input.

        Two counter-separated blocks give 512 bits before reduction mod
        the group order, leaving negligible bias.
        """
        payload = _frame(parts)
        wide = self._tagged(tag, 0, payload) + self._tagged(tag, 1, payload)
        return int.from_bytes(wide, "big") % ORDER

    def kdf(self, tag: bytes, *parts: bytes) -> bytes:
        """32-byte key material from tagged input."""
        return self._tagged(tag, 0, _frame(parts))

    def seal(self, key: bytes, nonce: bytes, plaintext: bytes) -> bytes:
        return AESGCM(key).encrypt(nonce, plaintext, None)

    def open(self, key: bytes, nonce: bytes, ciphertext: bytes) -> bytes:
        try:
            return AESGCM(key).decrypt(nonce, ciphertext, None)
        except Exception as exc:
            raise InvalidCiphertext("authenticated decryption failed") from exc


DEFAULT_SUITE = HashSuite()

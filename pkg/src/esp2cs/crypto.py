"""Hashing, account keys, signatures, and sealed direct messages.

SHA-256 is the canonical digest everywhere. Accounts carry two keys derived
from one 32-byte seed: an Ed25519 signing key and an X25519 key used for
sealing message payloads to the account. Addresses are the trailing 20 bytes
of the SHA-256 of the signing public key.

Sealing is ephemeral-static ECDH: a fresh X25519 keypair per message, a key
from HKDF-SHA256 bound to both public keys, AES-256-GCM with a zero nonce
(the key is unique per message). The same construction is implemented by the
web console, so blobs cross the wire unchanged.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field
from random import Random

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.hashes import SHA256
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

DIGEST_SIZE = 32
ADDRESS_SIZE = 20
PUBLIC_KEY_SIZE = 32
SIGNATURE_SIZE = 64
SEED_SIZE = 32

_SEAL_INFO = b"esp2cs-seal-v1"
_ENC_KEY_INFO = b"esp2cs-enc-key-v1"
_GCM_NONCE = bytes(12)
SEAL_OVERHEAD = 32 + 16  # ephemeral public key + GCM tag


class UnsealError(ValueError):
    """Sealed blob malformed or not addressed to this key."""


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


EMPTY_DIGEST = sha256(b"")


def address_of(sign_public: bytes) -> bytes:
    """20-byte account address for a signing public key."""
    if len(sign_public) != PUBLIC_KEY_SIZE:
        raise ValueError(f"public key must be {PUBLIC_KEY_SIZE} bytes")
    return sha256(sign_public)[12:]


def _enc_seed(seed: bytes) -> bytes:
    return HKDF(algorithm=SHA256(), length=32, salt=b"", info=_ENC_KEY_INFO).derive(seed)


def verify(sign_public: bytes, message: bytes, signature: bytes) -> bool:
    if len(sign_public) != PUBLIC_KEY_SIZE or len(signature) != SIGNATURE_SIZE:
        return False
    try:
        Ed25519PublicKey.from_public_bytes(sign_public).verify(signature, message)
        return True
    except (InvalidSignature, ValueError):
        return False


@dataclass(frozen=True)
class KeyPair:
    """Account identity: one seed, a signing key, and a sealing key."""

    seed: bytes
    sign_public: bytes = field(init=False)
    enc_public: bytes = field(init=False)

    def __post_init__(self):
        if len(self.seed) != SEED_SIZE:
            raise ValueError(f"seed must be {SEED_SIZE} bytes")
        signer = Ed25519PrivateKey.from_private_bytes(self.seed)
        enc = X25519PrivateKey.from_private_bytes(_enc_seed(self.seed))
        object.__setattr__(self, "sign_public", signer.public_key().public_bytes_raw())
        object.__setattr__(self, "enc_public", enc.public_key().public_bytes_raw())

    @classmethod
    def generate(cls, rng: Random | None = None) -> "KeyPair":
        if rng is None:
            return cls(os.urandom(SEED_SIZE))
        return cls(rng.randbytes(SEED_SIZE))

    @property
    def address(self) -> bytes:
        return address_of(self.sign_public)

    def sign(self, message: bytes) -> bytes:
        return Ed25519PrivateKey.from_private_bytes(self.seed).sign(message)

    def unseal(self, blob: bytes) -> bytes:
        if len(blob) < SEAL_OVERHEAD:
            raise UnsealError("sealed blob too short")
        eph_public = blob[:32]
        my_private = X25519PrivateKey.from_private_bytes(_enc_seed(self.seed))
        shared = my_private.exchange(X25519PublicKey.from_public_bytes(eph_public))
        key = HKDF(
            algorithm=SHA256(),
            length=32,
            salt=b"",
            info=_SEAL_INFO + eph_public + self.enc_public,
        ).derive(shared)
        try:
            return AESGCM(key).decrypt(_GCM_NONCE, blob[32:], b"")
        except InvalidTag as exc:
            raise UnsealError("blob not sealed to this key") from exc


def seal(recipient_enc_public: bytes, plaintext: bytes, rng: Random | None = None) -> bytes:
    """Seal plaintext so only the holder of the recipient key can read it."""
    eph_seed = os.urandom(32) if rng is None else rng.randbytes(32)
    eph_private = X25519PrivateKey.from_private_bytes(eph_seed)
    eph_public = eph_private.public_key().public_bytes_raw()
    shared = eph_private.exchange(X25519PublicKey.from_public_bytes(recipient_enc_public))
    key = HKDF(
        algorithm=SHA256(),
        length=32,
        salt=b"",
        info=_SEAL_INFO + eph_public + recipient_enc_public,
    ).derive(shared)
    return eph_public + AESGCM(key).encrypt(_GCM_NONCE, plaintext, b"")

"""Signatures, addresses, and sealed payloads."""

import hashlib
from random import Random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from esp2cs.crypto import KeyPair, UnsealError, address_of, seal, sha256, verify


def test_sha256_matches_hashlib():
    assert sha256(b"abc") == hashlib.sha256(b"abc").digest()
    assert len(sha256(b"")) == 32


def test_sign_verify_round_trip():
    kp = KeyPair.generate(Random(1))
    msg = b"vehicle says hello"
    assert verify(kp.sign_public, msg, kp.sign(msg))


def test_signatures_are_deterministic():
    kp = KeyPair.generate(Random(2))
    assert kp.sign(b"x") == kp.sign(b"x")


@given(st.binary(min_size=1, max_size=128), st.integers(0, 1000))
@settings(max_examples=50, deadline=None)
def test_any_altered_byte_fails_verification(msg, flip_seed):
    kp = KeyPair.generate(Random(3))
    sig = kp.sign(msg)
    rng = Random(flip_seed)
    i = rng.randrange(len(msg))
    mutated = bytearray(msg)
    mutated[i] ^= 1 + rng.randrange(255)
    assert not verify(kp.sign_public, bytes(mutated), sig)


def test_address_is_20_bytes_of_key_hash():
    kp = KeyPair.generate(Random(4))
    assert kp.address == sha256(kp.sign_public)[12:]
    assert len(kp.address) == 20
    with pytest.raises(ValueError):
        address_of(b"short")


def test_seal_round_trip():
    rng = Random(5)
    alice, bob = KeyPair.generate(rng), KeyPair.generate(rng)
    blob = seal(bob.enc_public, b"meet at lot 3", rng=rng)
    assert bob.unseal(blob) == b"meet at lot 3"
    assert blob != b"meet at lot 3"


@given(st.integers(0, 500))
@settings(max_examples=60, deadline=None)
def test_only_recipient_can_unseal(seed):
    rng = Random(seed)
    sender_rng = Random(seed + 10_000)
    recipient = KeyPair.generate(rng)
    outsider = KeyPair.generate(rng)
    blob = seal(recipient.enc_public, b"confidential", rng=sender_rng)
    assert recipient.unseal(blob) == b"confidential"
    with pytest.raises(UnsealError):
        outsider.unseal(blob)


def test_tampered_blob_fails():
    rng = Random(6)
    kp = KeyPair.generate(rng)
    blob = bytearray(seal(kp.enc_public, b"payload", rng=rng))
    blob[-1] ^= 0x01
    with pytest.raises(UnsealError):
        kp.unseal(bytes(blob))


def test_keypair_reproducible_from_seed():
    seed = bytes(range(32))
    assert KeyPair(seed).sign_public == KeyPair(seed).sign_public
    assert KeyPair(seed).enc_public == KeyPair(seed).enc_public

"""Hash-chained, authority-signed blocks and whole-chain validation.

A header commits to its parent hash, the Merkle root of its transaction
encodings, and the state root after execution; the scheduled authority signs
the whole prefix. Chains persist as an append-only file of length-prefixed
block encodings.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

from . import codec
from .crypto import DIGEST_SIZE, PUBLIC_KEY_SIZE, SIGNATURE_SIZE, sha256, verify
from .merkle import merkle_root
from .transactions import Transaction

GENESIS_PARENT = bytes(DIGEST_SIZE)


class ChainError(ValueError):
    """A block or chain violates a consensus rule."""

    def __init__(self, height: int, rule: str):
        super().__init__(f"height {height}: {rule}")
        self.height = height
        self.rule = rule


@dataclass(frozen=True)
class BlockHeader:
    height: int
    parent_hash: bytes
    timestamp: int
    proposer: bytes
    tx_root: bytes
    state_root: bytes
    signature: bytes

    def signing_payload(self) -> bytes:
        return b"".join(
            (
                codec.encode_u64(self.height),
                self.parent_hash,
                codec.encode_u64(self.timestamp),
                self.proposer,
                self.tx_root,
                self.state_root,
            )
        )

    def encode(self) -> bytes:
        return self.signing_payload() + self.signature

    @property
    def block_hash(self) -> bytes:
        return sha256(self.encode())

    @classmethod
    def read_from(cls, reader: codec.Reader) -> "BlockHeader":
        return cls(
            height=reader.u64(),
            parent_hash=reader.fixed(DIGEST_SIZE),
            timestamp=reader.u64(),
            proposer=reader.fixed(PUBLIC_KEY_SIZE),
            tx_root=reader.fixed(DIGEST_SIZE),
            state_root=reader.fixed(DIGEST_SIZE),
            signature=reader.fixed(SIGNATURE_SIZE),
        )


@dataclass(frozen=True)
class Block:
    header: BlockHeader
    transactions: tuple[Transaction, ...]

    def tx_leaves(self) -> list[bytes]:
        return [tx.encode() for tx in self.transactions]

    def encode(self) -> bytes:
        parts = [self.header.encode(), codec.encode_u64(len(self.transactions))]
        parts.extend(codec.encode_bytes(leaf) for leaf in self.tx_leaves())
        return b"".join(parts)

    @property
    def block_hash(self) -> bytes:
        return self.header.block_hash

    @classmethod
    def decode(cls, data: bytes) -> "Block":
        reader = codec.Reader(data)
        header = BlockHeader.read_from(reader)
        count = reader.u64()
        txs = []
        for _ in range(count):
            txs.append(Transaction.decode(reader.bytes_()))
        reader.expect_end()
        return cls(header=header, transactions=tuple(txs))


def validate_chain(blocks: list[Block], authorities: list[bytes], genesis: Block) -> None:
    """Check links, heights, timestamps, proposer schedule, signatures, and
    transaction roots from genesis to tip. Raises ChainError at the first
    violated rule; the genesis block itself must match byte for byte.
    """
    if not blocks:
        raise ChainError(0, "empty chain")
    if blocks[0].encode() != genesis.encode():
        raise ChainError(0, "genesis mismatch")
    if blocks[0].header.tx_root != merkle_root(blocks[0].tx_leaves()):
        raise ChainError(0, "tx_root mismatch")
    for prev, block in zip(blocks, blocks[1:]):
        validate_block(block, prev.header, authorities)


def validate_block(block: Block, parent: BlockHeader, authorities: list[bytes]) -> None:
    """Structural checks for one block against its parent header."""
    header = block.header
    if header.height != parent.height + 1:
        raise ChainError(header.height, "height does not increment")
    if header.parent_hash != parent.block_hash:
        raise ChainError(header.height, "broken parent link")
    if header.timestamp <= parent.timestamp:
        raise ChainError(header.height, "timestamp not increasing")
    scheduled = authorities[header.height % len(authorities)]
    if header.proposer != scheduled:
        raise ChainError(header.height, "wrong proposer")
    if not verify(header.proposer, header.signing_payload(), header.signature):
        raise ChainError(header.height, "bad header signature")
    if header.tx_root != merkle_root(block.tx_leaves()):
        raise ChainError(header.height, "tx_root mismatch")


class BlockLog:
    """Append-only chain persistence: length-prefixed block encodings."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def append(self, block: Block) -> None:
        with open(self.path, "ab") as fh:
            fh.write(codec.encode_bytes(block.encode()))

    def read_all(self) -> list[Block]:
        if not self.path.exists():
            return []
        blocks = []
        with open(self.path, "rb") as fh:
            data = fh.read()
        stream = io.BytesIO(data)
        while True:
            prefix = stream.read(8)
            if not prefix:
                break
            if len(prefix) != 8:
                raise codec.DecodeError("truncated block log")
            length = int.from_bytes(prefix, "little")
            payload = stream.read(length)
            if len(payload) != length:
                raise codec.DecodeError("truncated block record")
            blocks.append(Block.decode(payload))
        return blocks

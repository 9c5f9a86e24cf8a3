"""Light vehicle client: header sync, inclusion proofs, transaction relay.

The client never executes blocks. It keeps a header chain from genesis (or a
configured trusted checkpoint), accepts only headers that link, sit on the
authority schedule, and carry a valid signature, and checks transaction
inclusion against a header's tx_root with a Merkle proof. Keys stay on the
client; the gateway only relays signed transactions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

from .chain import BlockHeader
from .crypto import verify
from .merkle import MerkleProof, merkle_verify
from .transactions import Receipt, Transaction


class SyncError(ValueError):
    def __init__(self, height: int, rule: str):
        super().__init__(f"header {height}: {rule}")
        self.height = height
        self.rule = rule


class GatewayTransport(Protocol):
    """Minimal surface a light client needs from a gateway."""

    def get_headers(self, from_height: int) -> list[BlockHeader]: ...

    def post_transaction(self, tx: Transaction) -> bytes: ...

    def get_receipt(self, tx_hash: bytes) -> Receipt | None: ...

    def get_proof(self, tx_hash: bytes) -> tuple[int, MerkleProof] | None: ...


@dataclass
class LightClient:
    """Synchronizes headers from a gateway and verifies inclusion locally."""

    gateway: GatewayTransport
    authorities: list[bytes]
    checkpoint: BlockHeader  # genesis header unless a later trusted point is set
    sync_interval_blocks: int = 2
    headers: list[BlockHeader] = field(default_factory=list)

    def __post_init__(self):
        self.authorities = sorted(self.authorities)
        if not self.headers:
            self.headers = [self.checkpoint]

    @property
    def head(self) -> BlockHeader:
        return self.headers[-1]

    def validate_header(self, header: BlockHeader, parent: BlockHeader) -> None:
        if header.height != parent.height + 1:
            raise SyncError(header.height, "height does not increment")
        if header.parent_hash != parent.block_hash:
            raise SyncError(header.height, "broken link")
        if header.timestamp <= parent.timestamp:
            raise SyncError(header.height, "timestamp not increasing")
        scheduled = self.authorities[header.height % len(self.authorities)]
        if header.proposer != scheduled:
            raise SyncError(header.height, "wrong proposer")
        if not verify(header.proposer, header.signing_payload(), header.signature):
            raise SyncError(header.height, "bad signature")

    def sync_headers(self) -> list[BlockHeader]:
        """Fetch and append new headers; returns what was appended.

        If the gateway's chain diverges from ours (a reorg on the full
        node), rewind to the fork point and follow the longer valid chain.
        """
        from_height = self.head.height + 1
        fetched = self.gateway.get_headers(from_height)
        if not fetched:
            return []
        if fetched[0].parent_hash != self.head.block_hash:
            self._rewind_to_fork()
            fetched = self.gateway.get_headers(self.head.height + 1)
            if not fetched:
                return []
        appended = []
        for header in fetched:
            self.validate_header(header, self.head)
            self.headers.append(header)
            appended.append(header)
        return appended

    def _rewind_to_fork(self) -> None:
        """Drop local headers the gateway no longer serves, down to the
        checkpoint at worst."""
        while len(self.headers) > 1:
            probe = self.gateway.get_headers(self.head.height)
            if probe and probe[0].block_hash == self.head.block_hash:
                return
            self.headers.pop()

    def header_at(self, height: int) -> BlockHeader | None:
        base = self.headers[0].height
        index = height - base
        if 0 <= index < len(self.headers):
            return self.headers[index]
        return None

    def verify_tx_inclusion(self, header: BlockHeader, tx: Transaction, proof: MerkleProof) -> bool:
        """True iff tx is committed by this locally validated header."""
        local = self.header_at(header.height)
        if local is None or local.block_hash != header.block_hash:
            return False
        return merkle_verify(header.tx_root, tx.encode(), proof.leaf_index, proof)

    def relay_transaction(self, tx: Transaction) -> bytes:
        """Submit a client-signed transaction through the gateway.

        Gateway rejections (bad nonce, bad signature) surface unchanged as
        exceptions from the transport.
        """
        return self.gateway.post_transaction(tx)

    def confirm_inclusion(self, tx: Transaction) -> bool:
        """Sync, fetch the proof for an included tx, and verify it."""
        self.sync_headers()
        located = self.gateway.get_proof(tx.tx_hash)
        if located is None:
            return False
        height, proof = located
        header = self.header_at(height)
        if header is None:
            return False
        return self.verify_tx_inclusion(header, tx, proof)

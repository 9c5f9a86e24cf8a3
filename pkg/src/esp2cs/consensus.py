"""Proof-of-authority block production and longest-chain fork choice.

Authorities take turns by height: the proposer for height h is the h-th
entry of the sorted authority list, modulo its size. A node accepts any
block that links, sits on schedule, verifies, and re-executes to the
committed state root; the head is always the highest valid block, ties
broken by smallest hash. Contract state is kept per block hash, so a reorg
is a pointer move and the replayed history stays available for audit.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from .chain import Block, BlockHeader, ChainError, validate_block, validate_chain
from .contracts import BlockContext
from .crypto import KeyPair
from .genesis import GenesisConfig
from .merkle import MerkleProof, merkle_prove, merkle_root
from .runtime import Executor, TxExcluded
from .state import LedgerState
from .transactions import Receipt, Transaction


def proposer_for(height: int, authorities: list[bytes]) -> bytes:
    """Round-robin schedule over the sorted authority keys."""
    if height < 1:
        raise ValueError("height must be at least 1")
    return authorities[height % len(authorities)]


def choose_head(candidates: list[BlockHeader]) -> BlockHeader:
    """Longest chain wins; equal heights break toward the smaller hash."""
    if not candidates:
        raise ValueError("no candidate heads")
    return min(candidates, key=lambda h: (-h.height, h.block_hash))


class NotScheduled(Exception):
    pass


def build_block(
    proposer: KeyPair,
    mempool: list[Transaction],
    parent: BlockHeader,
    timestamp: int,
    parent_state: LedgerState,
    executor: Executor,
    authorities: list[bytes],
) -> tuple[Block, LedgerState, list[Receipt]]:
    """Assemble, execute, and sign the next block.

    Mempool transactions are drawn in (sender, nonce) order; any that fail
    admission against the evolving state are skipped, not included.
    """
    height = parent.height + 1
    if proposer.sign_public != proposer_for(height, authorities):
        raise NotScheduled(f"not the scheduled proposer for height {height}")
    if timestamp <= parent.timestamp:
        raise ValueError("block timestamp must exceed parent timestamp")

    ctx = BlockContext(timestamp=timestamp, proposer=proposer.sign_public, height=height)
    state = parent_state
    included: list[Transaction] = []
    receipts: list[Receipt] = []
    for tx in sorted(mempool, key=lambda t: (t.sender, t.nonce)):
        try:
            state, receipt = executor.execute_transaction(
                state,
                tx,
                BlockContext(
                    timestamp=timestamp,
                    proposer=proposer.sign_public,
                    height=height,
                    tx_index=len(included),
                ),
            )
        except TxExcluded:
            continue
        included.append(tx)
        receipts.append(receipt)

    unsigned = BlockHeader(
        height=height,
        parent_hash=parent.block_hash,
        timestamp=timestamp,
        proposer=proposer.sign_public,
        tx_root=merkle_root([tx.encode() for tx in included]),
        state_root=state.state_root(),
        signature=bytes(64),
    )
    header = dataclasses.replace(unsigned, signature=proposer.sign(unsigned.signing_payload()))
    return Block(header=header, transactions=tuple(included)), state, receipts


def replay_chain(genesis: GenesisConfig, blocks: list[Block]) -> LedgerState:
    """Re-derive state by executing a validated chain from scratch.

    Raises ChainError if any block's committed state root disagrees with
    the re-execution, making this the audit oracle for reorg handling.
    """
    validate_chain(blocks, genesis.authorities, genesis.build_genesis_block())
    executor = Executor(genesis.gas_schedule)
    state = genesis.build_state()
    for block in blocks[1:]:
        state, _ = executor.execute_block_txs(
            state,
            list(block.transactions),
            BlockContext(
                timestamp=block.header.timestamp,
                proposer=block.header.proposer,
                height=block.header.height,
            ),
        )
        if state.state_root() != block.header.state_root:
            raise ChainError(block.header.height, "state_root mismatch on replay")
    return state


@dataclass
class TxLocation:
    block_hash: bytes
    height: int
    index: int


@dataclass
class Node:
    """One authority or observer: block store, fork choice, mempool."""

    genesis: GenesisConfig
    keypair: KeyPair | None = None
    name: str = "node"

    blocks: dict[bytes, Block] = field(default_factory=dict)
    states: dict[bytes, LedgerState] = field(default_factory=dict)
    receipts: dict[bytes, list[Receipt]] = field(default_factory=dict)
    mempool: dict[tuple[bytes, int], Transaction] = field(default_factory=dict)
    head_hash: bytes = b""
    drop_log: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.executor = Executor(self.genesis.gas_schedule)
        genesis_block = self.genesis.build_genesis_block()
        self.genesis_block = genesis_block
        ghash = genesis_block.block_hash
        self.blocks[ghash] = genesis_block
        self.states[ghash] = self.genesis.build_state()
        self.receipts[ghash] = []
        self.head_hash = ghash
        self._last_proposed_height = 0

    # -- chain views ----------------------------------------------------------

    @property
    def head(self) -> BlockHeader:
        return self.blocks[self.head_hash].header

    @property
    def state(self) -> LedgerState:
        return self.states[self.head_hash]

    def canonical_chain(self) -> list[Block]:
        chain = []
        cursor = self.head_hash
        while True:
            block = self.blocks[cursor]
            chain.append(block)
            if block.header.height == 0:
                break
            cursor = block.header.parent_hash
        return list(reversed(chain))

    def header_at(self, height: int) -> BlockHeader | None:
        chain = self.canonical_chain()
        if 0 <= height < len(chain):
            return chain[height].header
        return None

    def locate_tx(self, tx_hash: bytes) -> TxLocation | None:
        for block in self.canonical_chain():
            for index, tx in enumerate(block.transactions):
                if tx.tx_hash == tx_hash:
                    return TxLocation(block.block_hash, block.header.height, index)
        return None

    def receipt_for(self, tx_hash: bytes) -> Receipt | None:
        loc = self.locate_tx(tx_hash)
        if loc is None:
            return None
        return self.receipts[loc.block_hash][loc.index]

    def proof_for(self, tx_hash: bytes) -> tuple[BlockHeader, MerkleProof] | None:
        loc = self.locate_tx(tx_hash)
        if loc is None:
            return None
        block = self.blocks[loc.block_hash]
        return block.header, merkle_prove(block.tx_leaves(), loc.index)

    # -- mempool ----------------------------------------------------------------

    def submit_transaction(self, tx: Transaction) -> bytes:
        """Admit to mempool; raises TxExcluded with the gateway-visible reason."""
        if not tx.signature_valid():
            raise TxExcluded("BadSignature")
        acct = self.state.account(tx.sender)
        if acct is None:
            raise TxExcluded("UnknownSender")
        if tx.nonce < acct.nonce:
            raise TxExcluded("BadNonce")
        self.mempool[(tx.sender, tx.nonce)] = tx
        return tx.tx_hash

    def _prune_mempool(self) -> None:
        state = self.state
        for key in list(self.mempool):
            sender, nonce = key
            acct = state.account(sender)
            if acct is None or nonce < acct.nonce:
                del self.mempool[key]

    # -- block production ---------------------------------------------------------

    def maybe_propose(self, timestamp: int) -> Block | None:
        """Produce the next block if this node is scheduled and time moved on."""
        if self.keypair is None:
            return None
        height = self.head.height + 1
        if proposer_for(height, self.genesis.authorities) != self.keypair.sign_public:
            return None
        if timestamp <= self.head.timestamp:
            return None
        if self._last_proposed_height >= height:
            return None
        block, state, receipts = build_block(
            self.keypair,
            list(self.mempool.values()),
            self.head,
            timestamp,
            self.state,
            self.executor,
            self.genesis.authorities,
        )
        self._last_proposed_height = height
        self._store(block, state, receipts)
        self._update_head()
        return block

    # -- block reception -----------------------------------------------------------

    def receive_block(self, block: Block) -> bool:
        """Validate and store a block; returns True when newly accepted."""
        bhash = block.block_hash
        if bhash in self.blocks:
            return False
        parent = self.blocks.get(block.header.parent_hash)
        if parent is None:
            self.drop_log.append(f"orphan block at height {block.header.height}")
            return False
        try:
            validate_block(block, parent.header, self.genesis.authorities)
        except ChainError as exc:
            self.drop_log.append(str(exc))
            return False
        parent_state = self.states[parent.block_hash]
        try:
            state, receipts = self.executor.execute_block_txs(
                parent_state,
                list(block.transactions),
                BlockContext(
                    timestamp=block.header.timestamp,
                    proposer=block.header.proposer,
                    height=block.header.height,
                ),
            )
        except TxExcluded as exc:
            self.drop_log.append(f"height {block.header.height}: inadmissible tx ({exc.reason})")
            return False
        if state.state_root() != block.header.state_root:
            self.drop_log.append(f"height {block.header.height}: state_root mismatch")
            return False
        self._store(block, state, receipts)
        self._update_head()
        return True

    def _store(self, block: Block, state: LedgerState, receipts: list[Receipt]) -> None:
        bhash = block.block_hash
        self.blocks[bhash] = block
        self.states[bhash] = state
        self.receipts[bhash] = receipts

    def _update_head(self) -> None:
        heads = [b.header for h, b in self.blocks.items() if not self._has_child(h)]
        new_head = choose_head(heads)
        if new_head.block_hash != self.head_hash:
            self.head_hash = new_head.block_hash
            self._prune_mempool()

    def _has_child(self, block_hash: bytes) -> bool:
        return any(b.header.parent_hash == block_hash for b in self.blocks.values())

"""Binary SHA-256 Merkle tree with inclusion proofs.

Leaves are hashed before pairing; parents hash the concatenation of their
children. A level with an odd node count promotes its last digest unchanged
to the next level (no duplication, so no duplicate-leaf second preimages).
Promotion means a proof carries one sibling per level at which the leaf's
path actually has a neighbour: exactly ceil(log2(n)) siblings for leaf 0 and
for every leaf when n is a power of two, possibly fewer for trailing leaves.
Because the verifier must know where promotions happened, proofs carry the
leaf count of the tree they were taken from.
"""

from __future__ import annotations

from dataclasses import dataclass

from .crypto import EMPTY_DIGEST, sha256


@dataclass(frozen=True)
class MerkleProof:
    """Sibling path for one leaf, bottom-up."""

    leaf_index: int
    leaf_count: int
    siblings: tuple[bytes, ...]

    def __post_init__(self):
        if not 0 <= self.leaf_index < max(self.leaf_count, 1):
            raise ValueError(f"leaf index {self.leaf_index} out of range")


def _levels(leaves: list[bytes]) -> list[list[bytes]]:
    levels = [leaves]
    while len(levels[-1]) > 1:
        prev = levels[-1]
        nxt = [sha256(prev[i] + prev[i + 1]) for i in range(0, len(prev) - 1, 2)]
        if len(prev) % 2 == 1:
            nxt.append(prev[-1])
        levels.append(nxt)
    return levels


def merkle_root(leaves: list[bytes]) -> bytes:
    """Root digest; hash of the empty string for an empty tree."""
    if not leaves:
        return EMPTY_DIGEST
    return _levels([sha256(leaf) for leaf in leaves])[-1][0]


def merkle_prove(leaves: list[bytes], index: int) -> MerkleProof:
    if not leaves:
        raise IndexError("cannot prove against an empty tree")
    if not 0 <= index < len(leaves):
        raise IndexError(f"leaf index {index} out of range for {len(leaves)} leaves")
    siblings: list[bytes] = []
    position = index
    for level in _levels([sha256(leaf) for leaf in leaves])[:-1]:
        sibling = position ^ 1
        if sibling < len(level):
            siblings.append(level[sibling])
        position //= 2
    return MerkleProof(leaf_index=index, leaf_count=len(leaves), siblings=tuple(siblings))


def merkle_verify(root: bytes, leaf: bytes, index: int, proof: MerkleProof) -> bool:
    """True iff recomputing the path from leaf reproduces root."""
    if index != proof.leaf_index or not 0 <= index < max(proof.leaf_count, 1):
        return False
    digest = sha256(leaf)
    position = index
    size = proof.leaf_count
    cursor = 0
    while size > 1:
        sibling_pos = position ^ 1
        if sibling_pos < size:
            if cursor >= len(proof.siblings):
                return False
            sibling = proof.siblings[cursor]
            cursor += 1
            if position % 2 == 0:
                digest = sha256(digest + sibling)
            else:
                digest = sha256(sibling + digest)
        position //= 2
        size = (size + 1) // 2
    return cursor == len(proof.siblings) and digest == root

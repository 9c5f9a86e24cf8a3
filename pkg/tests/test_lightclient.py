"""Light client: header sync, forgery rejection, inclusion round trips."""

import dataclasses
from random import Random

import pytest

from esp2cs import codec
from esp2cs.consensus import Node
from esp2cs.gateway import InProcessGateway
from esp2cs.lightclient import LightClient, SyncError
from esp2cs.runtime import TxExcluded
from esp2cs.transactions import Contract, sign_transaction

from conftest import make_genesis


def _node_with_blocks(keys, n_blocks=4, n_auth=2):
    genesis = make_genesis(keys, n_auth)
    proposers = {kp.sign_public: kp for kp in keys.values()}
    node = Node(genesis=genesis, keypair=None)
    nonce = 0
    for i in range(n_blocks):
        height = node.head.height + 1
        proposer = proposers[genesis.authorities[height % n_auth]]
        signer = Node(genesis=genesis, keypair=proposer)
        # feed current chain into the signer node so it builds on our head
        for block in node.canonical_chain()[1:]:
            signer.receive_block(block)
        tx = sign_transaction(keys["user"], nonce, Contract.VEHICULAR_COMMUNICATION,
                              "publishMessage", codec.encode_bytes(bytes([i + 1]) * 16))
        signer.submit_transaction(tx)
        nonce += 1
        block = signer.maybe_propose((i + 1) * 5)
        assert block is not None
        assert node.receive_block(block)
    return genesis, node


def _client(genesis, node) -> LightClient:
    return LightClient(
        gateway=InProcessGateway(node),
        authorities=genesis.authorities,
        checkpoint=genesis.build_genesis_block().header,
    )


def test_sync_from_genesis(keys):
    genesis, node = _node_with_blocks(keys)
    client = _client(genesis, node)
    appended = client.sync_headers()
    assert len(appended) == 4
    assert client.head.block_hash == node.head_hash
    assert client.sync_headers() == []  # no new blocks: no-op


def test_forged_signature_rejected(keys):
    genesis, node = _node_with_blocks(keys, n_blocks=2)
    client = _client(genesis, node)
    client.sync_headers()
    rng = Random(1)
    real = node.canonical_chain()[2].header
    forged = dataclasses.replace(real, signature=rng.randbytes(64))
    with pytest.raises(SyncError, match="bad signature"):
        client.validate_header(forged, node.canonical_chain()[1].header)


def test_out_of_schedule_proposer_rejected(keys):
    genesis, node = _node_with_blocks(keys, n_blocks=2)
    client = _client(genesis, node)
    chain = node.canonical_chain()
    real = chain[2].header
    imposter = keys["auth0"] if real.proposer != keys["auth0"].sign_public else keys["auth1"]
    unsigned = dataclasses.replace(real, proposer=imposter.sign_public, signature=bytes(64))
    forged = dataclasses.replace(unsigned, signature=imposter.sign(unsigned.signing_payload()))
    with pytest.raises(SyncError, match="wrong proposer"):
        client.validate_header(forged, chain[1].header)


def test_relay_and_verify_inclusion_end_to_end(keys):
    genesis = make_genesis(keys, 1)
    node = Node(genesis=genesis, keypair=keys["auth0"])
    client = _client(genesis, node)
    tx = sign_transaction(keys["user"], 0, Contract.PAYMENT_MANAGEMENT, "makePayment", value=42)
    tx_hash = client.relay_transaction(tx)
    assert tx_hash == tx.tx_hash
    assert node.maybe_propose(5) is not None
    receipt = client.gateway.get_receipt(tx_hash)
    assert receipt is not None and receipt.success
    assert client.confirm_inclusion(tx)


def test_stale_nonce_rejection_surfaces(keys):
    genesis = make_genesis(keys, 1)
    node = Node(genesis=genesis, keypair=keys["auth0"])
    client = _client(genesis, node)
    tx = sign_transaction(keys["user"], 0, Contract.PAYMENT_MANAGEMENT, "makePayment", value=1)
    client.relay_transaction(tx)
    node.maybe_propose(5)
    with pytest.raises(TxExcluded, match="BadNonce"):
        client.relay_transaction(tx)


def test_proof_against_wrong_header_fails(keys):
    genesis, node = _node_with_blocks(keys, n_blocks=3)
    client = _client(genesis, node)
    client.sync_headers()
    chain = node.canonical_chain()
    target_tx = chain[2].transactions[0]
    _, proof = node.proof_for(target_tx.tx_hash)
    right = client.header_at(2)
    wrong = client.header_at(3)
    assert client.verify_tx_inclusion(right, target_tx, proof)
    assert not client.verify_tx_inclusion(wrong, target_tx, proof)


def test_mutated_tx_fails_inclusion(keys):
    genesis, node = _node_with_blocks(keys, n_blocks=2)
    client = _client(genesis, node)
    client.sync_headers()
    chain = node.canonical_chain()
    tx = chain[1].transactions[0]
    _, proof = node.proof_for(tx.tx_hash)
    header = client.header_at(1)
    assert client.verify_tx_inclusion(header, tx, proof)
    tampered = dataclasses.replace(tx, value=tx.value + 1)
    assert not client.verify_tx_inclusion(header, tampered, proof)


def test_client_follows_server_reorg(keys):
    rng = Random(5)
    genesis = make_genesis(keys, 2)
    node = Node(genesis=genesis, keypair=None)
    from test_consensus import _extend

    base, _ = _extend(node, genesis, keys, node.head, node.state, 2, 0, rng)
    for block in base:
        node.receive_block(block)
    client = _client(genesis, node)
    client.sync_headers()
    assert client.head.height == 2

    branch, _ = _extend(node, genesis, keys, node.genesis_block.header,
                        genesis.build_state(), 3, 1, rng, tx_sender="peer")
    for block in branch:
        node.receive_block(block)
    assert node.head.height == 3
    client.sync_headers()
    assert client.head.block_hash == node.head_hash


def test_light_client_head_matches_full_node_when_quiescent(keys):
    genesis, node = _node_with_blocks(keys, n_blocks=6)
    client = _client(genesis, node)
    client.sync_headers()
    assert client.head.block_hash == node.head_hash
    assert client.head.state_root == node.head.state_root


def test_http_transport_end_to_end(keys):
    from fastapi.testclient import TestClient

    from esp2cs.gateway import HttpGateway, create_app

    genesis = make_genesis(keys, 1)
    node = Node(genesis=genesis, keypair=keys["auth0"])
    transport = HttpGateway("http://testserver", client=TestClient(create_app(node)))
    client = LightClient(
        gateway=transport,
        authorities=genesis.authorities,
        checkpoint=genesis.build_genesis_block().header,
    )
    tx = sign_transaction(keys["user"], 0, Contract.PAYMENT_MANAGEMENT, "makePayment", value=9)
    assert client.relay_transaction(tx) == tx.tx_hash
    node.maybe_propose(5)
    assert client.confirm_inclusion(tx)
    receipt = transport.get_receipt(tx.tx_hash)
    assert receipt is not None and receipt.success
    with pytest.raises(TxExcluded, match="BadNonce"):
        client.relay_transaction(tx)

"""Shared fixtures: deterministic keys, genesis configs, a chain harness."""

from __future__ import annotations

import pytest

from esp2cs import codec
from esp2cs.chain import BlockHeader
from esp2cs.consensus import build_block
from esp2cs.crypto import KeyPair, sha256
from esp2cs.genesis import GenesisAccount, GenesisConfig
from esp2cs.runtime import Executor
from esp2cs.transactions import Contract, Receipt, sign_transaction

BALANCE = 10**18


def named_keypair(name: str) -> KeyPair:
    return KeyPair(sha256(f"esp2cs-test:{name}".encode()))


@pytest.fixture(scope="session")
def keys() -> dict[str, KeyPair]:
    names = ["auth0", "auth1", "auth2", "auth3", "owner", "user", "vehicle", "peer"]
    return {name: named_keypair(name) for name in names}


def make_genesis(keys: dict[str, KeyPair], n_authorities: int = 1, **overrides) -> GenesisConfig:
    authorities = [keys[f"auth{i}"].sign_public for i in range(n_authorities)]
    accounts = [
        GenesisAccount(kp.sign_public, kp.enc_public, BALANCE) for kp in keys.values()
    ]
    params = dict(
        authorities=authorities,
        accounts=accounts,
        payment_owner=keys["owner"].address,
    )
    params.update(overrides)
    return GenesisConfig(**params)


@pytest.fixture
def genesis(keys) -> GenesisConfig:
    return make_genesis(keys, 1)


@pytest.fixture
def genesis4(keys) -> GenesisConfig:
    return make_genesis(keys, 4)


class ChainHarness:
    """Drives a real chain block by block for contract-level tests."""

    def __init__(self, genesis: GenesisConfig, keys: dict[str, KeyPair]):
        self.genesis = genesis
        self.keys = keys
        self.executor = Executor(genesis.gas_schedule)
        self.blocks = [genesis.build_genesis_block()]
        self.state = genesis.build_state()
        self.nonces: dict[bytes, int] = {}
        self.receipts: list[Receipt] = []

    @property
    def head(self) -> BlockHeader:
        return self.blocks[-1].header

    def tx(self, who: str, contract: Contract, function: str, args: bytes = b"", value: int = 0):
        kp = self.keys[who]
        nonce = self.nonces.get(kp.address, 0)
        self.nonces[kp.address] = nonce + 1
        return sign_transaction(kp, nonce, contract, function, args, value=value,
                                gas_price_gwei=self.genesis.gas_price_gwei)

    def apply(self, who: str, contract: Contract, function: str, args: bytes = b"",
              value: int = 0, at: int | None = None) -> Receipt:
        receipts = self.apply_block([self.tx(who, contract, function, args, value)], at=at)
        assert len(receipts) == 1, f"{function} was excluded from the block"
        return receipts[0]

    def apply_block(self, txs, at: int | None = None) -> list[Receipt]:
        timestamp = at if at is not None else self.head.timestamp + self.genesis.block_interval
        proposer_key = next(
            kp for kp in self.keys.values()
            if kp.sign_public == self.genesis.authorities[(self.head.height + 1) % len(self.genesis.authorities)]
        )
        block, state, receipts = build_block(
            proposer_key, txs, self.head, timestamp, self.state, self.executor,
            self.genesis.authorities,
        )
        self.blocks.append(block)
        self.state = state
        self.receipts.extend(receipts)
        return receipts

    def view(self, contract: Contract, function: str, args: bytes = b"") -> bytes:
        return self.executor.call_view(self.state, contract, function, args)

    def balance(self, who: str) -> int:
        return self.state.accounts[self.keys[who].address].balance


@pytest.fixture
def harness(genesis, keys) -> ChainHarness:
    return ChainHarness(genesis, keys)


def encode_u64(x: int) -> bytes:
    return codec.encode_u64(x)

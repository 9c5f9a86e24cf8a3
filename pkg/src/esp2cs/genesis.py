"""Genesis configuration: authorities, funded accounts, chain parameters.

The config is the single source of truth a node, light client, or simulator
boots from. Authorities are kept sorted by key bytes so every party derives
the same round-robin schedule. The genesis block commits to the initial
state root and uses zeroed proposer and signature fields.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .chain import GENESIS_PARENT, Block, BlockHeader
from .contracts import genesis_cells
from .crypto import SIGNATURE_SIZE, address_of
from .gas import GasSchedule
from .merkle import merkle_root
from .state import CONTRACT_ADDRESSES, Account, LedgerState
from .transactions import Contract


@dataclass(frozen=True)
class GenesisAccount:
    sign_public: bytes
    enc_public: bytes
    balance: int


@dataclass
class GenesisConfig:
    authorities: list[bytes]
    accounts: list[GenesisAccount]
    payment_owner: bytes
    block_interval: int = 5
    gas_price_gwei: int = 1
    usd_per_eth: Fraction = Fraction(181857, 100)
    gas_schedule: GasSchedule = field(default_factory=GasSchedule)

    def __post_init__(self):
        if not self.authorities:
            raise ValueError("authority set must not be empty")
        self.authorities = sorted(self.authorities)
        known = {address_of(a.sign_public) for a in self.accounts}
        for auth in self.authorities:
            if address_of(auth) not in known:
                raise ValueError("every authority needs a genesis account")

    def build_state(self) -> LedgerState:
        state = LedgerState()
        for entry in self.accounts:
            state.accounts[address_of(entry.sign_public)] = Account(
                sign_public=entry.sign_public,
                enc_public=entry.enc_public,
                balance=entry.balance,
            )
        for contract in Contract:
            state.accounts[CONTRACT_ADDRESSES[contract]] = Account(
                sign_public=bytes(32), enc_public=bytes(32), balance=0
            )
        for contract, cells in genesis_cells(self.payment_owner).items():
            state.storage[contract].update(cells)
        return state

    def build_genesis_block(self) -> Block:
        header = BlockHeader(
            height=0,
            parent_hash=GENESIS_PARENT,
            timestamp=0,
            proposer=bytes(32),
            tx_root=merkle_root([]),
            state_root=self.build_state().state_root(),
            signature=bytes(SIGNATURE_SIZE),
        )
        return Block(header=header, transactions=())

    def genesis_supply(self) -> int:
        return sum(entry.balance for entry in self.accounts)

    # -- file form ------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "block_interval": self.block_interval,
            "gas_price_gwei": self.gas_price_gwei,
            "usd_per_eth": f"{self.usd_per_eth.numerator}/{self.usd_per_eth.denominator}",
            "gas_schedule": self.gas_schedule.to_dict(),
            "authorities": [a.hex() for a in self.authorities],
            "payment_owner": self.payment_owner.hex(),
            "accounts": [
                {
                    "sign_public": a.sign_public.hex(),
                    "enc_public": a.enc_public.hex(),
                    "balance": a.balance,
                }
                for a in self.accounts
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GenesisConfig":
        usd_raw = str(data.get("usd_per_eth", "1818.57"))
        if "/" in usd_raw:
            num, den = usd_raw.split("/")
            usd = Fraction(int(num), int(den))
        else:
            usd = Fraction(usd_raw)
        return cls(
            authorities=[bytes.fromhex(a) for a in data["authorities"]],
            accounts=[
                GenesisAccount(
                    sign_public=bytes.fromhex(a["sign_public"]),
                    enc_public=bytes.fromhex(a["enc_public"]),
                    balance=int(a["balance"]),
                )
                for a in data["accounts"]
            ],
            payment_owner=bytes.fromhex(data["payment_owner"]),
            block_interval=int(data.get("block_interval", 5)),
            gas_price_gwei=int(data.get("gas_price_gwei", 1)),
            usd_per_eth=usd,
            gas_schedule=GasSchedule.from_dict(data.get("gas_schedule", GasSchedule().to_dict())),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "GenesisConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

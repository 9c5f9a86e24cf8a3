"""Account model and the full ledger state committed by state roots.

State is a plain value: accounts plus one key-value cell map per contract.
Cell keys are short strings, values canonical byte encodings. The state root
is the SHA-256 of the canonical encoding of everything, sorted, so equal
states always hash equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import codec
from .crypto import sha256
from .transactions import Contract


@dataclass
class Account:
    sign_public: bytes
    enc_public: bytes
    balance: int
    nonce: int = 0

    def copy(self) -> "Account":
        return Account(self.sign_public, self.enc_public, self.balance, self.nonce)


def contract_address(contract: Contract) -> bytes:
    """Escrow account address owned by a contract itself."""
    return sha256(b"esp2cs-contract:" + contract.label.encode())[12:]


CONTRACT_ADDRESSES = {c: contract_address(c) for c in Contract}


@dataclass
class LedgerState:
    accounts: dict[bytes, Account] = field(default_factory=dict)
    storage: dict[Contract, dict[str, bytes]] = field(
        default_factory=lambda: {c: {} for c in Contract}
    )

    def copy(self) -> "LedgerState":
        return LedgerState(
            accounts={addr: acct.copy() for addr, acct in self.accounts.items()},
            storage={c: dict(cells) for c, cells in self.storage.items()},
        )

    def account(self, address: bytes) -> Account | None:
        return self.accounts.get(address)

    def total_supply(self) -> int:
        return sum(acct.balance for acct in self.accounts.values())

    def encode(self) -> bytes:
        parts = [codec.encode_u64(len(self.accounts))]
        for addr in sorted(self.accounts):
            acct = self.accounts[addr]
            parts.append(addr)
            parts.append(acct.sign_public)
            parts.append(acct.enc_public)
            parts.append(codec.encode_u64(acct.balance))
            parts.append(codec.encode_u64(acct.nonce))
        for contract in Contract:
            cells = self.storage[contract]
            parts.append(codec.encode_u64(len(cells)))
            for key in sorted(cells):
                parts.append(codec.encode_str(key))
                parts.append(codec.encode_bytes(cells[key]))
        return b"".join(parts)

    def state_root(self) -> bytes:
        return sha256(self.encode())

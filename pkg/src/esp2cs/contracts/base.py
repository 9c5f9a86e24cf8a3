"""Execution environment contracts run inside.

A CallEnv wraps a working copy of the ledger state and meters every storage
cell touch, balance write, and event against the gas schedule. View calls get
a read-only env with no meter. Contract code signals failure by raising
ContractRevert; the executor rolls the working state back and keeps the gas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .. import codec
from ..gas import GasMeter
from ..state import CONTRACT_ADDRESSES, LedgerState
from ..transactions import Contract, LogRecord

CELL_BYTES = 32


class ContractRevert(Exception):
    """In-contract failure; state rolls back, gas stays charged."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class BlockContext:
    timestamp: int
    proposer: bytes  # proposer signing public key (zero for view calls)
    height: int = 0
    tx_index: int = 0


class CallEnv:
    """One contract call's view of the world."""

    def __init__(
        self,
        state: LedgerState,
        contract: Contract,
        ctx: BlockContext,
        caller: bytes,
        value: int = 0,
        meter: GasMeter | None = None,
        args: bytes = b"",
    ):
        self.state = state
        self.contract = contract
        self.ctx = ctx
        self.caller = caller
        self.value = value
        self.meter = meter
        self.args = codec.Reader(args)
        self.logs: list[LogRecord] = []
        self._cells = state.storage[contract]

    @property
    def view_only(self) -> bool:
        return self.meter is None

    # -- storage cells ------------------------------------------------------

    def sload(self, key: str) -> bytes | None:
        if self.meter is not None:
            self.meter.charge_sload()
        return self._cells.get(key)

    def sstore(self, key: str, value: bytes) -> None:
        if self.meter is None:
            raise RuntimeError("view call attempted a storage write")
        if key in self._cells:
            self.meter.charge_sstore_update()
        else:
            self.meter.charge_sstore_new()
        self._cells[key] = value

    def sdelete(self, key: str) -> None:
        """Remove a cell; a later write to the same key counts as new."""
        if self.meter is None:
            raise RuntimeError("view call attempted a storage delete")
        if key in self._cells:
            self.meter.charge_sstore_update()
            del self._cells[key]

    # -- blobs: variable-length values chunked across 32-byte cells ---------

    def store_blob(self, prefix: str, payload: bytes) -> None:
        encoded = codec.encode_bytes(payload)
        for j in range(math.ceil(len(encoded) / CELL_BYTES)):
            self.sstore(f"{prefix}:{j}", encoded[j * CELL_BYTES : (j + 1) * CELL_BYTES])

    def load_blob(self, prefix: str, metered: bool = True) -> bytes | None:
        first = self.sload(f"{prefix}:0") if metered else self._cells.get(f"{prefix}:0")
        if first is None:
            return None
        length = int.from_bytes(first[:8], "little")
        chunks = [first]
        for j in range(1, math.ceil((8 + length) / CELL_BYTES)):
            nxt = self.sload(f"{prefix}:{j}") if metered else self._cells.get(f"{prefix}:{j}")
            chunks.append(nxt or b"")
        reader = codec.Reader(b"".join(chunks))
        return reader.bytes_()

    # -- accounts and value movement ----------------------------------------

    def account_lookup(self, address: bytes):
        """Registry lookup, metered like a storage read."""
        if self.meter is not None:
            self.meter.charge_sload()
        return self.state.accounts.get(address)

    def balance_of(self, address: bytes) -> int:
        acct = self.state.accounts.get(address)
        return acct.balance if acct else 0

    @property
    def contract_account(self) -> bytes:
        return CONTRACT_ADDRESSES[self.contract]

    def pay_out(self, to: bytes, amount: int) -> None:
        """Move funds held by this contract to an account."""
        if self.meter is None:
            raise RuntimeError("view call attempted a transfer")
        pool = self.state.accounts[self.contract_account]
        if amount < 0 or pool.balance < amount:
            raise ContractRevert("ContractPoolUnderflow")
        target = self.state.accounts.get(to)
        if target is None:
            raise ContractRevert("UnknownAccount")
        self.meter.charge_sstore_update()
        pool.balance -= amount
        target.balance += amount

    def transfer(self, src: bytes, dst: bytes, amount: int) -> None:
        """Move funds directly between two accounts (two balance writes)."""
        if self.meter is None:
            raise RuntimeError("view call attempted a transfer")
        src_acct = self.state.accounts.get(src)
        dst_acct = self.state.accounts.get(dst)
        if src_acct is None or dst_acct is None:
            raise ContractRevert("UnknownAccount")
        if amount < 0 or src_acct.balance < amount:
            raise ContractRevert("InsufficientFunds")
        self.meter.charge_sstore_update()
        self.meter.charge_sstore_update()
        src_acct.balance -= amount
        dst_acct.balance += amount

    # -- events ---------------------------------------------------------------

    def log(self, name: str, topics: tuple[bytes, ...] = (), data: bytes = b"") -> None:
        if self.meter is not None:
            self.meter.charge_log(len(topics), len(data))
        self.logs.append(LogRecord(name=name, topics=topics, data=data))


# -- cell value helpers -------------------------------------------------------


def cell_u64(value: int) -> bytes:
    return codec.encode_u64(value)


def read_u64(cell: bytes | None, default: int = 0) -> int:
    if cell is None:
        return default
    return int.from_bytes(cell[:8], "little")


def cell_addr(address: bytes) -> bytes:
    return address


def cell_option_addr(address: bytes | None) -> bytes:
    return codec.encode_option(address)


def read_option_addr(cell: bytes | None) -> bytes | None:
    if cell is None:
        return None
    reader = codec.Reader(cell)
    return reader.option(20)


def cell_addr_list(addresses: list[bytes]) -> bytes:
    return codec.encode_u64(len(addresses)) + b"".join(addresses)


def read_addr_list(cell: bytes | None) -> list[bytes]:
    if cell is None:
        return []
    reader = codec.Reader(cell)
    count = reader.u64()
    return [reader.fixed(20) for _ in range(count)]

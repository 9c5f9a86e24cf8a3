"""Signed contract calls and their execution receipts."""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field

from . import codec
from .crypto import PUBLIC_KEY_SIZE, SIGNATURE_SIZE, sha256, verify


class Contract(enum.IntEnum):
    """The four on-chain contracts, by wire id."""

    VEHICULAR_COMMUNICATION = 0
    PAYMENT_MANAGEMENT = 1
    PARKING_SPACE_MANAGEMENT = 2
    AUTOMATED_PARKING_PAYMENTS = 3

    @property
    def label(self) -> str:
        return _CONTRACT_LABELS[self]


_CONTRACT_LABELS = {
    Contract.VEHICULAR_COMMUNICATION: "VehicularCommunication",
    Contract.PAYMENT_MANAGEMENT: "PaymentManagement",
    Contract.PARKING_SPACE_MANAGEMENT: "ParkingSpaceManagement",
    Contract.AUTOMATED_PARKING_PAYMENTS: "AutomatedParkingPayments",
}


@dataclass(frozen=True)
class Transaction:
    """A signed call into one contract function.

    The signature covers every other field; sender_public must hash to an
    address the ledger knows. Values and fees are integer wei.
    """

    sender_public: bytes
    nonce: int
    contract: Contract
    function: str
    args: bytes
    value: int
    gas_price_gwei: int
    signature: bytes

    @property
    def sender(self) -> bytes:
        return sha256(self.sender_public)[12:]

    def signing_payload(self) -> bytes:
        return b"".join(
            (
                self.sender_public,
                codec.encode_u64(self.nonce),
                codec.encode_u64(int(self.contract)),
                codec.encode_str(self.function),
                codec.encode_bytes(self.args),
                codec.encode_u64(self.value),
                codec.encode_u64(self.gas_price_gwei),
            )
        )

    def encode(self) -> bytes:
        return self.signing_payload() + self.signature

    @property
    def tx_hash(self) -> bytes:
        return sha256(self.encode())

    def signature_valid(self) -> bool:
        return verify(self.sender_public, self.signing_payload(), self.signature)

    @classmethod
    def decode(cls, data: bytes) -> "Transaction":
        reader = codec.Reader(data)
        tx = cls.read_from(reader)
        reader.expect_end()
        return tx

    @classmethod
    def read_from(cls, reader: codec.Reader) -> "Transaction":
        sender_public = reader.fixed(PUBLIC_KEY_SIZE)
        nonce = reader.u64()
        contract_id = reader.u64()
        try:
            contract = Contract(contract_id)
        except ValueError as exc:
            raise codec.DecodeError(f"unknown contract id {contract_id}") from exc
        function = reader.str_()
        args = reader.bytes_()
        value = reader.u64()
        gas_price = reader.u64()
        signature = reader.fixed(SIGNATURE_SIZE)
        return cls(sender_public, nonce, contract, function, args, value, gas_price, signature)


def sign_transaction(
    keypair,
    nonce: int,
    contract: Contract,
    function: str,
    args: bytes = b"",
    value: int = 0,
    gas_price_gwei: int = 1,
) -> Transaction:
    unsigned = Transaction(
        sender_public=keypair.sign_public,
        nonce=nonce,
        contract=contract,
        function=function,
        args=args,
        value=value,
        gas_price_gwei=gas_price_gwei,
        signature=bytes(SIGNATURE_SIZE),
    )
    return dataclasses.replace(unsigned, signature=keypair.sign(unsigned.signing_payload()))


@dataclass(frozen=True)
class LogRecord:
    """Event emitted by a contract; metered by topic count and data size."""

    name: str
    topics: tuple[bytes, ...]
    data: bytes


@dataclass(frozen=True)
class Receipt:
    """Outcome of one included transaction (or a free view call)."""

    tx_hash: bytes
    status: str  # "success" or "reverted"
    revert_reason: str
    gas_used: int
    return_value: bytes
    logs: tuple[LogRecord, ...]
    gas_breakdown: dict = field(default_factory=dict, compare=False)

    @property
    def success(self) -> bool:
        return self.status == "success"

    @property
    def execution_gas(self) -> int:
        """Gas spent inside the contract (storage + logs), net of the
        intrinsic base and calldata charge."""
        return self.gas_breakdown.get("execution", 0)

    def to_record(self) -> dict:
        return {
            "tx_hash": self.tx_hash.hex(),
            "status": self.status,
            "revert_reason": self.revert_reason,
            "gas_used": self.gas_used,
            "return_value": self.return_value.hex(),
            "logs": [
                {"name": log.name, "topics": [t.hex() for t in log.topics], "data": log.data.hex()}
                for log in self.logs
            ],
        }

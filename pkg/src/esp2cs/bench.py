"""Cost bench: run all 19 contract functions with pinned inputs and compare
against the reference gas/USD table.

The reference figures are execution costs (storage plus logs); two of them
sit below the 21000 intrinsic transaction base, so comparing receipt-level
totals would be meaningless. Each row therefore reports the model's
execution gas next to the reference value, with a deviation percentage and
an out-of-tolerance flag. View functions must cost exactly zero. The
processRefund row is a known anomaly in the reference data (it mutates
state yet is listed at zero gas) and is flagged instead of matched.

Every bench call runs on a fresh single-authority chain built from a pinned
manifest: 64-byte message content, a 1000 wei deposit with a 400 wei refund,
one hourly space with one availability window, and a 600-second metered
session at 5 wei/s.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from . import codec
from .chain import Block, BlockHeader
from .consensus import build_block
from .crypto import KeyPair, sha256
from .gas import compute_cost, compute_cost_usd
from .genesis import GenesisAccount, GenesisConfig
from .runtime import Executor
from .transactions import Contract, Receipt, sign_transaction

BENCH_GAS_PRICE_GWEI = 7
BENCH_USD_PER_ETH = Fraction("1818.57")
TOLERANCE = Fraction(30, 100)

CONTENT_64 = bytes(range(64))
DEPOSIT = 1000
REFUND = 400
SLOT_RATE_PER_HOUR = 18_000
SLOT_WINDOWS = [(0, 360_000)]
BOOKING_WINDOW = (3600, 7200)
METERED_RATE = 5
PARKING_SECONDS = 600

# Reference table: (contract, function, gas, usd). Gas figures are execution
# costs measured on a deployed instance; USD at 7 gwei and 1818.57 USD/ETH.
REFERENCE_TABLE: list[tuple[Contract, str, int, str]] = [
    (Contract.PAYMENT_MANAGEMENT, "makePayment", 43_608, "0.555"),
    (Contract.PAYMENT_MANAGEMENT, "requestRefund", 93_433, "1.190"),
    (Contract.PAYMENT_MANAGEMENT, "processRefund", 0, "0"),
    (Contract.PAYMENT_MANAGEMENT, "withdrawFunds", 34_812, "0.443"),
    (Contract.PARKING_SPACE_MANAGEMENT, "registerParkingSpace", 88_361, "1.125"),
    (Contract.PARKING_SPACE_MANAGEMENT, "bookParkingSpace", 93_903, "1.196"),
    (Contract.PARKING_SPACE_MANAGEMENT, "isAvailable", 0, "0"),
    (Contract.PARKING_SPACE_MANAGEMENT, "releaseParkingSpace", 14_675, "0.187"),
    (Contract.PARKING_SPACE_MANAGEMENT, "withdraw", 28_771, "0.366"),
    (Contract.VEHICULAR_COMMUNICATION, "sendMessage", 168_989, "2.151"),
    (Contract.VEHICULAR_COMMUNICATION, "getUnreadMessages", 0, "0"),
    (Contract.VEHICULAR_COMMUNICATION, "markAllAsRead", 22_986, "0.293"),
    (Contract.VEHICULAR_COMMUNICATION, "publishMessage", 169_617, "2.159"),
    (Contract.VEHICULAR_COMMUNICATION, "readMessage", 0, "0"),
    (Contract.AUTOMATED_PARKING_PAYMENTS, "registerParkingSpace", 105_078, "1.338"),
    (Contract.AUTOMATED_PARKING_PAYMENTS, "startParking", 75_940, "0.967"),
    (Contract.AUTOMATED_PARKING_PAYMENTS, "endParking", 42_594, "0.542"),
    (Contract.AUTOMATED_PARKING_PAYMENTS, "calculateParkingFee", 25_468, "0.324"),
    (Contract.AUTOMATED_PARKING_PAYMENTS, "checkAmountDue", 16_835, "0.214"),
]

VIEW_FUNCTIONS = {"isAvailable", "getUnreadMessages", "readMessage"}
ANOMALY_FUNCTIONS = {"processRefund"}


@dataclass
class BenchRow:
    contract: str
    function: str
    model_gas: int | None  # None means view (reported as 0)
    table_gas: int
    table_usd: Fraction
    deviation_pct: float | None
    flag: str

    @property
    def gas(self) -> int:
        return 0 if self.model_gas is None else self.model_gas

    def to_json(self) -> dict:
        eth = compute_cost(self.gas, BENCH_GAS_PRICE_GWEI)
        usd = compute_cost_usd(self.gas, BENCH_GAS_PRICE_GWEI, BENCH_USD_PER_ETH)
        return {
            "contract": self.contract,
            "function": self.function,
            "model_gas": self.gas,
            "table_gas": self.table_gas,
            "deviation_pct": self.deviation_pct,
            "model_eth": f"{float(eth):.9f}",
            "model_usd": f"{float(usd):.3f}",
            "table_usd": f"{float(self.table_usd):.3f}",
            "flag": self.flag,
        }


class BenchChain:
    """A fresh single-authority chain the bench drives block by block."""

    def __init__(self):
        self.authority = KeyPair(sha256(b"esp2cs-bench-authority"))
        self.owner = KeyPair(sha256(b"esp2cs-bench-owner"))
        self.user = KeyPair(sha256(b"esp2cs-bench-user"))
        self.vehicle = KeyPair(sha256(b"esp2cs-bench-vehicle"))
        self.peer = KeyPair(sha256(b"esp2cs-bench-peer"))
        keys = [self.authority, self.owner, self.user, self.vehicle, self.peer]
        self.genesis = GenesisConfig(
            authorities=[self.authority.sign_public],
            accounts=[GenesisAccount(k.sign_public, k.enc_public, 10**18) for k in keys],
            payment_owner=self.owner.address,
            gas_price_gwei=BENCH_GAS_PRICE_GWEI,
        )
        self.executor = Executor(self.genesis.gas_schedule)
        self.head: BlockHeader = self.genesis.build_genesis_block().header
        self.state = self.genesis.build_state()
        self.nonces: dict[bytes, int] = {}

    def _next_nonce(self, keypair: KeyPair) -> int:
        nonce = self.nonces.get(keypair.address, 0)
        self.nonces[keypair.address] = nonce + 1
        return nonce

    def apply(
        self,
        keypair: KeyPair,
        contract: Contract,
        function: str,
        args: bytes = b"",
        value: int = 0,
        at: int | None = None,
    ) -> Receipt:
        tx = sign_transaction(
            keypair,
            self._next_nonce(keypair),
            contract,
            function,
            args,
            value=value,
            gas_price_gwei=BENCH_GAS_PRICE_GWEI,
        )
        timestamp = at if at is not None else self.head.timestamp + self.genesis.block_interval
        block, state, receipts = build_block(
            self.authority,
            [tx],
            self.head,
            timestamp,
            self.state,
            self.executor,
            self.genesis.authorities,
        )
        if len(receipts) != 1:
            raise RuntimeError(f"bench transaction for {function} was excluded")
        self.head = block.header
        self.state = state
        return receipts[0]

    def view(self, contract: Contract, function: str, args: bytes) -> bytes:
        return self.executor.call_view(self.state, contract, function, args)


def _measure(contract: Contract, function: str) -> int | None:
    """Execution gas of one function on its pinned setup; None for views."""
    chain = BenchChain()
    vc, pm, psm, app = (
        Contract.VEHICULAR_COMMUNICATION,
        Contract.PAYMENT_MANAGEMENT,
        Contract.PARKING_SPACE_MANAGEMENT,
        Contract.AUTOMATED_PARKING_PAYMENTS,
    )
    content = codec.encode_bytes(CONTENT_64)
    psm_register_args = (
        codec.encode_str("lot-a")
        + codec.encode_u64(SLOT_RATE_PER_HOUR)
        + codec.encode_pairs(SLOT_WINDOWS)
    )
    book_args = (
        codec.encode_u64(0)
        + codec.encode_u64(BOOKING_WINDOW[0])
        + codec.encode_u64(BOOKING_WINDOW[1])
    )
    booking_value = SLOT_RATE_PER_HOUR * (BOOKING_WINDOW[1] - BOOKING_WINDOW[0]) // 3600

    if contract is vc:
        if function == "publishMessage":
            return chain.apply(chain.user, vc, "publishMessage", content).execution_gas
        if function == "sendMessage":
            args = chain.peer.address + content
            return chain.apply(chain.user, vc, "sendMessage", args).execution_gas
        if function == "markAllAsRead":
            chain.apply(chain.peer, vc, "sendMessage", chain.user.address + content)
            return chain.apply(chain.user, vc, "markAllAsRead").execution_gas
        if function == "readMessage":
            chain.apply(chain.user, vc, "publishMessage", content)
            chain.view(vc, "readMessage", codec.encode_u64(0))
            return None
        if function == "getUnreadMessages":
            chain.apply(chain.peer, vc, "sendMessage", chain.user.address + content)
            chain.view(vc, "getUnreadMessages", chain.user.address)
            return None
    if contract is pm:
        if function == "makePayment":
            return chain.apply(chain.user, pm, "makePayment", value=DEPOSIT).execution_gas
        if function == "requestRefund":
            chain.apply(chain.user, pm, "makePayment", value=DEPOSIT)
            return chain.apply(chain.user, pm, "requestRefund", codec.encode_u64(REFUND)).execution_gas
        if function == "processRefund":
            chain.apply(chain.user, pm, "makePayment", value=DEPOSIT)
            chain.apply(chain.user, pm, "requestRefund", codec.encode_u64(REFUND))
            return chain.apply(chain.owner, pm, "processRefund", chain.user.address).execution_gas
        if function == "withdrawFunds":
            chain.apply(chain.user, pm, "makePayment", value=DEPOSIT)
            chain.apply(chain.user, pm, "requestRefund", codec.encode_u64(REFUND))
            return chain.apply(chain.owner, pm, "withdrawFunds").execution_gas
    if contract is psm:
        if function == "registerParkingSpace":
            return chain.apply(chain.owner, psm, "registerParkingSpace", psm_register_args).execution_gas
        if function == "bookParkingSpace":
            chain.apply(chain.owner, psm, "registerParkingSpace", psm_register_args)
            return chain.apply(chain.user, psm, "bookParkingSpace", book_args, value=booking_value).execution_gas
        if function == "isAvailable":
            chain.apply(chain.owner, psm, "registerParkingSpace", psm_register_args)
            chain.view(psm, "isAvailable", book_args)
            return None
        if function == "releaseParkingSpace":
            chain.apply(chain.owner, psm, "registerParkingSpace", psm_register_args)
            chain.apply(chain.user, psm, "bookParkingSpace", book_args, value=booking_value)
            return chain.apply(chain.user, psm, "releaseParkingSpace", codec.encode_u64(0)).execution_gas
        if function == "withdraw":
            chain.apply(chain.owner, psm, "registerParkingSpace", psm_register_args)
            chain.apply(chain.user, psm, "bookParkingSpace", book_args, value=booking_value)
            return chain.apply(chain.owner, psm, "withdraw", codec.encode_u64(0)).execution_gas
    if contract is app:
        register = codec.encode_u64(METERED_RATE)
        if function == "registerParkingSpace":
            return chain.apply(chain.owner, app, "registerParkingSpace", register).execution_gas
        if function == "startParking":
            chain.apply(chain.owner, app, "registerParkingSpace", register)
            return chain.apply(chain.vehicle, app, "startParking", codec.encode_u64(0)).execution_gas
        if function in ("endParking", "calculateParkingFee", "checkAmountDue"):
            chain.apply(chain.owner, app, "registerParkingSpace", register)
            start_receipt_at = chain.head.timestamp + chain.genesis.block_interval
            chain.apply(chain.vehicle, app, "startParking", codec.encode_u64(0), at=start_receipt_at)
            settle_at = start_receipt_at + PARKING_SECONDS
            if function == "endParking":
                return chain.apply(chain.vehicle, app, "endParking", at=settle_at).execution_gas
            if function == "calculateParkingFee":
                return chain.apply(chain.vehicle, app, "calculateParkingFee", at=settle_at).execution_gas
            chain.apply(chain.vehicle, app, "calculateParkingFee", at=settle_at)
            return chain.apply(chain.vehicle, app, "checkAmountDue", at=settle_at + 5).execution_gas
    raise ValueError(f"no bench recipe for {contract.label}.{function}")


def run_bench() -> list[BenchRow]:
    rows = []
    for contract, function, table_gas, table_usd in REFERENCE_TABLE:
        model_gas = _measure(contract, function)
        usd = Fraction(table_usd)
        if function in VIEW_FUNCTIONS:
            flag = "VIEW" if (model_gas or 0) == 0 else "OUT_OF_BAND"
            deviation = None
        elif function in ANOMALY_FUNCTIONS:
            flag = "PAPER_ANOMALY"  # reference lists 0 gas for a state-changing call
            deviation = None
        else:
            deviation = (model_gas - table_gas) / table_gas * 100.0
            within = abs(Fraction(model_gas - table_gas, table_gas)) <= TOLERANCE
            flag = "OK" if within else "OUT_OF_BAND"
        rows.append(
            BenchRow(
                contract=contract.label,
                function=function,
                model_gas=model_gas,
                table_gas=table_gas,
                table_usd=usd,
                deviation_pct=None if deviation is None else round(deviation, 2),
                flag=flag,
            )
        )
    return rows


def verify_reference_usd() -> list[tuple[str, Fraction]]:
    """Absolute error of k * table_gas against each published USD figure."""
    errors = []
    for _, function, gas, usd in REFERENCE_TABLE:
        predicted = compute_cost_usd(gas, BENCH_GAS_PRICE_GWEI, BENCH_USD_PER_ETH)
        errors.append((function, abs(predicted - Fraction(usd))))
    return errors


def render_text(rows: list[BenchRow]) -> str:
    header = (
        f"{'contract':<26} {'function':<22} {'model gas':>10} {'ref gas':>9} "
        f"{'dev %':>8} {'eth':>12} {'usd':>8} {'ref usd':>8}  flag"
    )
    lines = [header, "-" * len(header)]
    for row in rows:
        as_json = row.to_json()
        dev = "" if row.deviation_pct is None else f"{row.deviation_pct:+.1f}"
        lines.append(
            f"{row.contract:<26} {row.function:<22} {row.gas:>10} {row.table_gas:>9} "
            f"{dev:>8} {as_json['model_eth']:>12} {as_json['model_usd']:>8} "
            f"{as_json['table_usd']:>8}  {row.flag}"
        )
    top_two = sorted((r for r in rows if r.model_gas), key=lambda r: -r.gas)[:2]
    lines.append("")
    lines.append("most expensive: " + ", ".join(f"{r.function} ({r.gas})" for r in top_two))
    max_err = max(err for _, err in verify_reference_usd())
    lines.append(f"reference USD check: max |k*gas - usd| = {float(max_err):.6f} (tolerance 0.001)")
    lines.append("")
    return "\n".join(lines)


def render_json(rows: list[BenchRow]) -> str:
    payload = {
        "gas_price_gwei": BENCH_GAS_PRICE_GWEI,
        "usd_per_eth": str(BENCH_USD_PER_ETH),
        "rows": [row.to_json() for row in rows],
        "usd_check_max_error": float(max(err for _, err in verify_reference_usd())),
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"

"""Gas schedule, metering, and fiat cost conversion.

Costs in ETH are exact rationals: gas times price-in-gwei times 1e-9. The
wei-denominated fee charged on chain is gas * price * 1e9, which is already
an integer, so fee settlement never rounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

WEI_PER_GWEI = 10**9
GWEI_PER_ETH = 10**9


@dataclass(frozen=True)
class GasSchedule:
    """Per-operation gas prices, fixed at genesis."""

    tx_base: int = 21_000
    calldata_per_byte: int = 16
    sstore_new: int = 20_000
    sstore_update: int = 5_000
    sload: int = 800
    log_base: int = 375
    log_per_topic: int = 375
    log_per_byte: int = 8

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if value <= 0:
                raise ValueError(f"gas schedule field {name} must be positive")

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, data: dict) -> "GasSchedule":
        return cls(**data)


@dataclass
class GasMeter:
    """Accumulates execution gas for one call."""

    schedule: GasSchedule
    used: int = 0
    counts: dict = field(default_factory=dict)

    def _add(self, op: str, amount: int) -> None:
        self.used += amount
        self.counts[op] = self.counts.get(op, 0) + 1

    def charge_sload(self) -> None:
        self._add("sload", self.schedule.sload)

    def charge_sstore_new(self, cells: int = 1) -> None:
        for _ in range(cells):
            self._add("sstore_new", self.schedule.sstore_new)

    def charge_sstore_update(self, cells: int = 1) -> None:
        for _ in range(cells):
            self._add("sstore_update", self.schedule.sstore_update)

    def charge_log(self, topics: int, data_len: int) -> None:
        self._add(
            "log",
            self.schedule.log_base
            + self.schedule.log_per_topic * topics
            + self.schedule.log_per_byte * data_len,
        )


def compute_cost(gas: int, gas_price_gwei: int) -> Fraction:
    """Transaction cost in ETH: gas times price, scaled from gwei."""
    if gas < 0 or gas_price_gwei < 0:
        raise ValueError("gas and price must be non-negative")
    return Fraction(gas * gas_price_gwei, GWEI_PER_ETH)


def compute_cost_usd(gas: int, gas_price_gwei: int, usd_per_eth: Fraction) -> Fraction:
    return compute_cost(gas, gas_price_gwei) * Fraction(usd_per_eth)


def fee_wei(gas: int, gas_price_gwei: int) -> int:
    return gas * gas_price_gwei * WEI_PER_GWEI


@dataclass(frozen=True)
class CostQuote:
    """One row of the cost report."""

    gas: int
    gas_price_gwei: int
    cost_eth: Fraction
    cost_usd: Fraction

    @classmethod
    def quote(cls, gas: int, gas_price_gwei: int, usd_per_eth: Fraction) -> "CostQuote":
        eth = compute_cost(gas, gas_price_gwei)
        return cls(gas=gas, gas_price_gwei=gas_price_gwei, cost_eth=eth, cost_usd=eth * Fraction(usd_per_eth))

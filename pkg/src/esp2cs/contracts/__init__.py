"""Dispatch tables for the four on-chain contracts.

Function names are the wire identifiers carried in Transaction.function.
Both parking contracts expose a registerParkingSpace, disambiguated by the
contract id; prefixed aliases (psm_*/app_*) are accepted for convenience.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..transactions import Contract
from . import metered, parking, payments, vehicular
from .base import BlockContext, CallEnv, ContractRevert


@dataclass(frozen=True)
class FunctionSpec:
    handler: Callable[[CallEnv], bytes]
    view: bool = False


REGISTRY: dict[Contract, dict[str, FunctionSpec]] = {
    Contract.VEHICULAR_COMMUNICATION: {
        "publishMessage": FunctionSpec(vehicular.publish_message),
        "readMessage": FunctionSpec(vehicular.read_message, view=True),
        "sendMessage": FunctionSpec(vehicular.send_message),
        "getUnreadMessages": FunctionSpec(vehicular.get_unread_messages, view=True),
        "markAllAsRead": FunctionSpec(vehicular.mark_all_as_read),
    },
    Contract.PAYMENT_MANAGEMENT: {
        "makePayment": FunctionSpec(payments.make_payment),
        "requestRefund": FunctionSpec(payments.request_refund),
        "processRefund": FunctionSpec(payments.process_refund),
        "withdrawFunds": FunctionSpec(payments.withdraw_funds),
    },
    Contract.PARKING_SPACE_MANAGEMENT: {
        "registerParkingSpace": FunctionSpec(parking.register_parking_space),
        "bookParkingSpace": FunctionSpec(parking.book_parking_space),
        "isAvailable": FunctionSpec(parking.is_available, view=True),
        "releaseParkingSpace": FunctionSpec(parking.release_parking_space),
        "withdraw": FunctionSpec(parking.withdraw),
    },
    Contract.AUTOMATED_PARKING_PAYMENTS: {
        "registerParkingSpace": FunctionSpec(metered.register_parking_space),
        "startParking": FunctionSpec(metered.start_parking),
        "endParking": FunctionSpec(metered.end_parking),
        "calculateParkingFee": FunctionSpec(metered.calculate_parking_fee),
        "checkAmountDue": FunctionSpec(metered.check_amount_due),
    },
}

_ALIASES = {
    (Contract.PARKING_SPACE_MANAGEMENT, "psm_registerParkingSpace"): "registerParkingSpace",
    (Contract.PARKING_SPACE_MANAGEMENT, "psm_bookParkingSpace"): "bookParkingSpace",
    (Contract.PARKING_SPACE_MANAGEMENT, "psm_isAvailable"): "isAvailable",
    (Contract.PARKING_SPACE_MANAGEMENT, "psm_releaseParkingSpace"): "releaseParkingSpace",
    (Contract.PARKING_SPACE_MANAGEMENT, "psm_withdraw"): "withdraw",
    (Contract.AUTOMATED_PARKING_PAYMENTS, "app_registerParkingSpace"): "registerParkingSpace",
}


def resolve(contract: Contract, function: str) -> FunctionSpec | None:
    canonical = _ALIASES.get((contract, function), function)
    return REGISTRY[contract].get(canonical)


def genesis_cells(payment_owner: bytes) -> dict[Contract, dict[str, bytes]]:
    """Counter and registry cells present from block zero."""
    from .base import cell_addr_list, cell_u64

    return {
        Contract.VEHICULAR_COMMUNICATION: {"count": cell_u64(0)},
        Contract.PAYMENT_MANAGEMENT: {
            "owner": payment_owner,
            "depositors": cell_addr_list([]),
            "total_deposits": cell_u64(0),
            "total_pending": cell_u64(0),
            "refund_queue_len": cell_u64(0),
        },
        Contract.PARKING_SPACE_MANAGEMENT: {"count": cell_u64(0)},
        Contract.AUTOMATED_PARKING_PAYMENTS: {"count": cell_u64(0)},
    }


__all__ = [
    "BlockContext",
    "CallEnv",
    "ContractRevert",
    "FunctionSpec",
    "REGISTRY",
    "resolve",
    "genesis_cells",
]

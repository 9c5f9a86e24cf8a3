"""AutomatedParkingPayments: per-second metered sessions settled on exit.

A metered space has one occupant at a time; a vehicle has one session at a
time. The exit fee is rate_per_second times the elapsed block time, debited
from the vehicle and credited to the space owner in the same transaction.
If the vehicle cannot pay, the session stays open and keeps accruing.
"""

from __future__ import annotations

from .. import codec
from .base import CallEnv, ContractRevert, cell_option_addr, cell_u64, read_option_addr, read_u64


def register_parking_space(env: CallEnv) -> bytes:
    rate = env.args.u64()
    env.args.expect_end()
    if rate <= 0:
        raise ContractRevert("BadRate")
    space_id = read_u64(env.sload("count"))
    env.sstore(f"space:{space_id}:owner", env.caller)
    env.sstore(f"space:{space_id}:rate", cell_u64(rate))
    env.sstore(f"space:{space_id}:occupant", cell_option_addr(None))
    env.sstore(f"space:{space_id}:sessions", cell_u64(0))
    env.sstore(f"space:{space_id}:revenue", cell_u64(0))
    env.sstore("count", cell_u64(space_id + 1))
    env.log("MeteredSpaceRegistered", topics=(env.caller, cell_u64(space_id)), data=codec.encode_u64(rate))
    return cell_u64(space_id)


def start_parking(env: CallEnv) -> bytes:
    space_id = env.args.u64()
    env.args.expect_end()
    vehicle = env.caller.hex()
    if env.sload(f"session:{vehicle}:active") is not None:
        raise ContractRevert("SessionExists")
    if env.sload(f"space:{space_id}:owner") is None:
        raise ContractRevert("UnknownSpace")
    occupant = read_option_addr(env.sload(f"space:{space_id}:occupant"))
    if occupant is not None:
        raise ContractRevert("SpaceOccupied")
    env.sstore(f"session:{vehicle}:space", cell_u64(space_id))
    env.sstore(f"session:{vehicle}:start", cell_u64(env.ctx.timestamp))
    env.sstore(f"session:{vehicle}:active", cell_u64(1))
    env.sstore(f"session:{vehicle}:last_checked", cell_u64(env.ctx.timestamp))
    env.sstore(f"space:{space_id}:occupant", cell_option_addr(env.caller))
    env.log("ParkingStarted", topics=(env.caller, cell_u64(space_id)), data=codec.encode_u64(env.ctx.timestamp))
    return b""


def _session_fee(env: CallEnv, vehicle: str) -> tuple[int, int, int]:
    """Returns (space_id, elapsed seconds, fee) for the active session."""
    if env.sload(f"session:{vehicle}:active") is None:
        raise ContractRevert("NoSession")
    space_id = read_u64(env.sload(f"session:{vehicle}:space"))
    rate = read_u64(env.sload(f"space:{space_id}:rate"))
    start = read_u64(env.sload(f"session:{vehicle}:start"))
    elapsed = max(env.ctx.timestamp - start, 0)
    return space_id, elapsed, rate * elapsed


def end_parking(env: CallEnv) -> bytes:
    env.args.expect_end()
    vehicle = env.caller.hex()
    space_id, elapsed, fee = _session_fee(env, vehicle)
    owner = env.sload(f"space:{space_id}:owner")
    if env.balance_of(env.caller) < fee:
        raise ContractRevert("InsufficientFunds")
    revenue = read_u64(env.sload(f"space:{space_id}:revenue"))
    sessions = read_u64(env.sload(f"space:{space_id}:sessions"))
    env.sdelete(f"session:{vehicle}:space")
    env.sdelete(f"session:{vehicle}:start")
    env.sdelete(f"session:{vehicle}:active")
    env.sdelete(f"session:{vehicle}:last_checked")
    env.sdelete(f"session:{vehicle}:cached_fee")
    env.sstore(f"space:{space_id}:occupant", cell_option_addr(None))
    env.sstore(f"space:{space_id}:revenue", cell_u64(revenue + fee))
    env.sstore(f"space:{space_id}:sessions", cell_u64(sessions + 1))
    env.transfer(env.caller, owner, fee)
    env.log(
        "ParkingEnded",
        topics=(env.caller, cell_u64(space_id)),
        data=codec.encode_u64(fee) + codec.encode_u64(elapsed),
    )
    return codec.encode_u64(fee)


def calculate_parking_fee(env: CallEnv) -> bytes:
    env.args.expect_end()
    vehicle = env.caller.hex()
    space_id, _, fee = _session_fee(env, vehicle)
    env.sstore(f"session:{vehicle}:cached_fee", cell_u64(fee))
    env.log("FeeCalculated", topics=(env.caller, cell_u64(space_id)), data=codec.encode_u64(fee))
    return codec.encode_u64(fee)


def check_amount_due(env: CallEnv) -> bytes:
    env.args.expect_end()
    vehicle = env.caller.hex()
    space_id, _, fee = _session_fee(env, vehicle)
    last_checked = read_u64(env.sload(f"session:{vehicle}:last_checked"))
    env.sstore(f"session:{vehicle}:cached_fee", cell_u64(fee))
    env.sstore(f"session:{vehicle}:last_checked", cell_u64(env.ctx.timestamp))
    env.log(
        "AmountDueChecked",
        topics=(env.caller, cell_u64(space_id)),
        data=codec.encode_u64(fee) + codec.encode_u64(max(env.ctx.timestamp - last_checked, 0)),
    )
    return codec.encode_u64(fee)

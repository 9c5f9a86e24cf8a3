"""ParkingSpaceManagement: slot-windowed spaces rented by the hour.

Owners register a space with availability windows and an hourly rate. A
space holds at most one live booking; booking requires the window to sit
inside an availability slot and the payment to cover the ceiling-rounded
hours. Earnings pool in the contract until the owner withdraws.
"""

from __future__ import annotations

from .. import codec
from .base import CallEnv, ContractRevert, cell_u64, read_u64

SECONDS_PER_HOUR = 3600


def _encode_slots(slots: list[tuple[int, int]]) -> bytes:
    return codec.encode_pairs(slots)


def _decode_slots(blob: bytes) -> list[tuple[int, int]]:
    reader = codec.Reader(blob)
    slots = reader.pairs()
    reader.expect_end()
    return slots


def booking_fee(rate_per_hour: int, start: int, end: int) -> int:
    hours = -((start - end) // SECONDS_PER_HOUR)  # ceil division
    return rate_per_hour * hours


def register_parking_space(env: CallEnv) -> bytes:
    location = env.args.str_()
    rate = env.args.u64()
    slots = env.args.pairs()
    env.args.expect_end()
    if rate <= 0:
        raise ContractRevert("BadRate")
    ordered = sorted(slots)
    for start, end in ordered:
        if start >= end:
            raise ContractRevert("BadSlots")
    for (_, prev_end), (next_start, _) in zip(ordered, ordered[1:]):
        if next_start < prev_end:
            raise ContractRevert("BadSlots")
    space_id = read_u64(env.sload("count"))
    env.sstore(f"space:{space_id}:owner", env.caller)
    env.store_blob(f"space:{space_id}:location", location.encode("utf-8"))
    env.sstore(f"space:{space_id}:rate", cell_u64(rate))
    env.store_blob(f"space:{space_id}:slots", _encode_slots(ordered))
    env.sstore("count", cell_u64(space_id + 1))
    env.log("SpaceRegistered", topics=(env.caller, cell_u64(space_id)))
    return cell_u64(space_id)


def _window_in_slots(slots: list[tuple[int, int]], start: int, end: int) -> bool:
    return any(s <= start and end <= e for s, e in slots)


def book_parking_space(env: CallEnv) -> bytes:
    space_id = env.args.u64()
    start = env.args.u64()
    end = env.args.u64()
    env.args.expect_end()
    if env.sload(f"space:{space_id}:owner") is None:
        raise ContractRevert("UnknownSpace")
    if start >= end:
        raise ContractRevert("Unavailable")
    booked_by = env.sload(f"space:{space_id}:booked_by")
    if booked_by is not None:
        booked_until = read_u64(env.sload(f"space:{space_id}:booked_until"))
        if booked_until > env.ctx.timestamp:
            raise ContractRevert("Unavailable")
    slots = _decode_slots(env.load_blob(f"space:{space_id}:slots") or b"")
    if not _window_in_slots(slots, start, end):
        raise ContractRevert("Unavailable")
    rate = read_u64(env.sload(f"space:{space_id}:rate"))
    if env.value < booking_fee(rate, start, end):
        raise ContractRevert("Underpayment")
    earnings = read_u64(env.sload(f"space:{space_id}:earnings"))
    env.sstore(f"space:{space_id}:booked_by", env.caller)
    env.sstore(f"space:{space_id}:booked_from", cell_u64(start))
    env.sstore(f"space:{space_id}:booked_until", cell_u64(end))
    env.sstore(f"space:{space_id}:earnings", cell_u64(earnings + env.value))
    env.log("SpaceBooked", topics=(env.caller, cell_u64(space_id)), data=codec.encode_u64(env.value))
    return b""


def is_available(env: CallEnv) -> bytes:
    space_id = env.args.u64()
    start = env.args.u64()
    end = env.args.u64()
    env.args.expect_end()
    if env.sload(f"space:{space_id}:owner") is None:
        raise ContractRevert("UnknownSpace")
    if start >= end:
        return codec.encode_bool(False)
    slots = _decode_slots(env.load_blob(f"space:{space_id}:slots") or b"")
    if not _window_in_slots(slots, start, end):
        return codec.encode_bool(False)
    if env.sload(f"space:{space_id}:booked_by") is not None:
        booked_from = read_u64(env.sload(f"space:{space_id}:booked_from"))
        booked_until = read_u64(env.sload(f"space:{space_id}:booked_until"))
        if start < booked_until and booked_from < end:
            return codec.encode_bool(False)
    return codec.encode_bool(True)


def release_parking_space(env: CallEnv) -> bytes:
    space_id = env.args.u64()
    env.args.expect_end()
    booked_by = env.sload(f"space:{space_id}:booked_by")
    if booked_by is None:
        raise ContractRevert("NotBooker")
    if booked_by != env.caller:
        booked_until = read_u64(env.sload(f"space:{space_id}:booked_until"))
        if env.ctx.timestamp < booked_until:
            raise ContractRevert("NotBooker")
    env.sdelete(f"space:{space_id}:booked_by")
    env.sdelete(f"space:{space_id}:booked_from")
    env.sdelete(f"space:{space_id}:booked_until")
    env.log("SpaceReleased", topics=(cell_u64(space_id),), data=codec.encode_u64(env.ctx.timestamp))
    return b""


def withdraw(env: CallEnv) -> bytes:
    space_id = env.args.u64()
    env.args.expect_end()
    owner = env.sload(f"space:{space_id}:owner")
    if owner is None:
        raise ContractRevert("UnknownSpace")
    if owner != env.caller:
        raise ContractRevert("NotOwner")
    earnings = read_u64(env.sload(f"space:{space_id}:earnings"))
    if earnings == 0:
        raise ContractRevert("NothingToWithdraw")
    env.sdelete(f"space:{space_id}:earnings")
    env.sstore(f"space:{space_id}:withdrawal:{env.ctx.timestamp}", cell_u64(earnings))
    env.pay_out(owner, earnings)
    env.log("EarningsWithdrawn", topics=(env.caller, cell_u64(space_id)), data=codec.encode_u64(earnings))
    return codec.encode_u64(earnings)

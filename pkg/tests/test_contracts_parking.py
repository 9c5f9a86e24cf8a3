"""Parking contracts: hourly slot bookings and per-second metered sessions."""

import pytest

from esp2cs import codec
from esp2cs.runtime import ViewError
from esp2cs.transactions import Contract

PSM = Contract.PARKING_SPACE_MANAGEMENT
APP = Contract.AUTOMATED_PARKING_PAYMENTS

RATE_HOUR = 18_000


def _register(harness, who="owner", location="lot-a", rate=RATE_HOUR, slots=((0, 360_000),)):
    args = codec.encode_str(location) + codec.encode_u64(rate) + codec.encode_pairs(list(slots))
    return harness.apply(who, PSM, "registerParkingSpace", args)


def _book(harness, who="user", space=0, start=3600, end=7200, value=None):
    if value is None:
        value = RATE_HOUR * -((start - end) // 3600)
    args = codec.encode_u64(space) + codec.encode_u64(start) + codec.encode_u64(end)
    return harness.apply(who, PSM, "bookParkingSpace", args, value=value)


def _available(harness, space=0, start=3600, end=7200) -> bool:
    raw = harness.view(
        PSM, "isAvailable",
        codec.encode_u64(space) + codec.encode_u64(start) + codec.encode_u64(end),
    )
    return bool(int.from_bytes(raw, "little"))


# -- slot rental ---------------------------------------------------------------


def test_first_registration_gets_id_zero(harness):
    receipt = _register(harness)
    assert receipt.success
    assert int.from_bytes(receipt.return_value, "little") == 0
    assert int.from_bytes(_register(harness).return_value, "little") == 1


def test_overlapping_slots_rejected(harness):
    receipt = _register(harness, slots=((0, 100), (50, 200)))
    assert receipt.status == "reverted"
    assert receipt.revert_reason == "BadSlots"


def test_degenerate_slot_rejected(harness):
    receipt = _register(harness, slots=((100, 100),))
    assert receipt.status == "reverted"


def test_zero_rate_rejected(harness):
    receipt = _register(harness, rate=0)
    assert receipt.status == "reverted"
    assert receipt.revert_reason == "BadRate"


def test_book_free_space_with_exact_fee(harness):
    _register(harness)
    receipt = _book(harness)
    assert receipt.success
    assert not _available(harness)


def test_double_booking_unavailable(harness):
    _register(harness)
    assert _book(harness).success
    second = _book(harness, who="peer", start=10_000, end=12_000)
    assert second.status == "reverted"
    assert second.revert_reason == "Unavailable"


def test_underpayment_rejected(harness):
    _register(harness)
    receipt = _book(harness, value=RATE_HOUR - 1)
    assert receipt.status == "reverted"
    assert receipt.revert_reason == "Underpayment"


def test_fee_rounds_up_to_whole_hours(harness):
    _register(harness)
    receipt = _book(harness, start=0, end=3601, value=2 * RATE_HOUR)
    assert receipt.success
    short = _book(harness, who="peer", start=50_000, end=53_601, value=2 * RATE_HOUR - 1)
    assert short.status == "reverted"  # second live booking also fails first; check reason
    assert short.revert_reason in ("Underpayment", "Unavailable")


def test_availability_rules(harness):
    _register(harness, slots=((1000, 5000),))
    assert _available(harness, start=1000, end=5000)
    assert _available(harness, start=2000, end=3000)
    assert not _available(harness, start=500, end=1500)     # outside slot
    assert not _available(harness, start=6000, end=7000)    # outside any slot
    assert not _available(harness, start=3000, end=2000)    # degenerate window
    with pytest.raises(ViewError, match="UnknownSpace"):
        _available(harness, space=9)


def test_booked_overlap_unavailable_but_disjoint_window_reported_free(harness):
    _register(harness)
    _book(harness, start=3600, end=7200)
    assert not _available(harness, start=3600, end=7200)
    assert not _available(harness, start=7000, end=7300)
    assert _available(harness, start=10_000, end=11_000)  # no intersect with booking


def test_booker_releases_early(harness):
    _register(harness)
    _book(harness)
    receipt = harness.apply("user", PSM, "releaseParkingSpace", codec.encode_u64(0))
    assert receipt.success
    assert _available(harness)


def test_stranger_cannot_release_live_booking(harness):
    _register(harness)
    _book(harness, start=3600, end=1_000_000)
    receipt = harness.apply("peer", PSM, "releaseParkingSpace", codec.encode_u64(0))
    assert receipt.status == "reverted"
    assert receipt.revert_reason == "NotBooker"


def test_anyone_releases_expired_booking(harness):
    _register(harness)
    _book(harness, start=3600, end=7200)
    receipt = harness.apply("peer", PSM, "releaseParkingSpace", codec.encode_u64(0),
                            at=8000)
    assert receipt.success


def test_owner_withdraws_booking_value(harness):
    _register(harness)
    _book(harness)  # value 18000
    owner_before = harness.balance("owner")
    receipt = harness.apply("owner", PSM, "withdraw", codec.encode_u64(0))
    assert receipt.success
    assert int.from_bytes(receipt.return_value, "little") == RATE_HOUR
    fee = receipt.gas_used * 10**9
    assert harness.balance("owner") == owner_before + RATE_HOUR - fee
    second = harness.apply("owner", PSM, "withdraw", codec.encode_u64(0))
    assert second.status == "reverted"
    assert second.revert_reason == "NothingToWithdraw"


def test_withdraw_not_owner(harness):
    _register(harness)
    _book(harness)
    receipt = harness.apply("user", PSM, "withdraw", codec.encode_u64(0))
    assert receipt.status == "reverted"
    assert receipt.revert_reason == "NotOwner"


# -- metered sessions ---------------------------------------------------------------


def _register_metered(harness, who="owner", rate=5):
    return harness.apply(who, APP, "registerParkingSpace", codec.encode_u64(rate))


def _start(harness, who="vehicle", space=0, at=None):
    return harness.apply(who, APP, "startParking", codec.encode_u64(space), at=at)


def test_metered_registration(harness):
    receipt = _register_metered(harness)
    assert receipt.success
    assert int.from_bytes(receipt.return_value, "little") == 0
    bad = _register_metered(harness, rate=0)
    assert bad.status == "reverted"
    assert bad.revert_reason == "BadRate"


def test_start_creates_active_session(harness):
    _register_metered(harness)
    receipt = _start(harness)
    assert receipt.success
    cells = harness.state.storage[APP]
    vehicle = harness.keys["vehicle"].address.hex()
    assert cells[f"session:{vehicle}:active"] is not None


def test_second_start_same_vehicle_rejected(harness):
    _register_metered(harness)
    _register_metered(harness)
    _start(harness)
    receipt = _start(harness, space=1)
    assert receipt.status == "reverted"
    assert receipt.revert_reason == "SessionExists"


def test_second_vehicle_same_space_rejected(harness):
    _register_metered(harness)
    _start(harness)
    receipt = _start(harness, who="peer")
    assert receipt.status == "reverted"
    assert receipt.revert_reason == "SpaceOccupied"


def test_end_parking_fee_is_rate_times_duration(harness):
    _register_metered(harness)  # rate 5/s
    start_receipt = _start(harness, at=100)
    assert start_receipt.success
    vehicle_before = harness.balance("vehicle")
    owner_before = harness.balance("owner")
    receipt = harness.apply("vehicle", APP, "endParking", at=700)
    assert receipt.success
    fee = int.from_bytes(receipt.return_value, "little")
    assert fee == 5 * 600
    gas_fee = receipt.gas_used * 10**9
    assert harness.balance("vehicle") == vehicle_before - fee - gas_fee
    assert harness.balance("owner") == owner_before + fee


def test_zero_duration_session_closes_for_free(harness):
    _register_metered(harness)
    _start(harness, at=100)
    receipt = harness.apply("vehicle", APP, "endParking", at=101)
    assert receipt.success
    assert int.from_bytes(receipt.return_value, "little") == 5
    again = harness.apply("vehicle", APP, "endParking", at=102)
    assert again.status == "reverted"
    assert again.revert_reason == "NoSession"


def test_fee_linearity(harness):
    _register_metered(harness, rate=7)
    for duration in (1, 60, 3600):
        _start(harness, at=harness.head.timestamp + 5)
        started = harness.head.timestamp
        receipt = harness.apply("vehicle", APP, "endParking", at=started + duration)
        assert int.from_bytes(receipt.return_value, "little") == 7 * duration


def test_insufficient_funds_keeps_session_active(harness, keys):
    from esp2cs.genesis import GenesisAccount, GenesisConfig
    from conftest import ChainHarness, make_genesis

    # vehicle can cover gas but not the parking fee
    genesis = make_genesis(keys, 1)
    broke = GenesisAccount(keys["vehicle"].sign_public, keys["vehicle"].enc_public,
                           10**15)  # covers ~2e14 of gas at 1 gwei, not the 1e16 fee
    accounts = [a for a in genesis.accounts if a.sign_public != keys["vehicle"].sign_public]
    genesis = GenesisConfig(
        authorities=genesis.authorities,
        accounts=accounts + [broke],
        payment_owner=genesis.payment_owner,
    )
    h = ChainHarness(genesis, keys)
    h.apply("owner", APP, "registerParkingSpace", codec.encode_u64(10**13))
    h.apply("vehicle", APP, "startParking", codec.encode_u64(0), at=100)
    receipt = h.apply("vehicle", APP, "endParking", at=1100)  # fee 10^16 > balance
    assert receipt.status == "reverted"
    assert receipt.revert_reason == "InsufficientFunds"
    cells = h.state.storage[APP]
    assert cells.get(f"session:{keys['vehicle'].address.hex()}:active") is not None


def test_calculate_fee_and_check_due(harness):
    _register_metered(harness)  # 5/s
    _start(harness, at=100)
    calc = harness.apply("vehicle", APP, "calculateParkingFee", at=200)
    assert int.from_bytes(calc.return_value, "little") == 500
    due = harness.apply("vehicle", APP, "checkAmountDue", at=200 + 5)
    assert int.from_bytes(due.return_value, "little") == 5 * 105
    cells = harness.state.storage[APP]
    vehicle = harness.keys["vehicle"].address.hex()
    assert int.from_bytes(cells[f"session:{vehicle}:cached_fee"][:8], "little") == 525
    assert int.from_bytes(cells[f"session:{vehicle}:last_checked"][:8], "little") == 205


def test_fee_calc_right_after_start_is_zero(harness):
    _register_metered(harness)
    _start(harness, at=100)
    calc = harness.apply("vehicle", APP, "calculateParkingFee", at=101)
    assert int.from_bytes(calc.return_value, "little") == 5


def test_fee_queries_require_session(harness):
    _register_metered(harness)
    for fn in ("calculateParkingFee", "checkAmountDue", "endParking"):
        receipt = harness.apply("vehicle", APP, fn)
        assert receipt.status == "reverted"
        assert receipt.revert_reason == "NoSession"

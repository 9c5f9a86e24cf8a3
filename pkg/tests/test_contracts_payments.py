"""PaymentManagement behavior: escrow safety, refunds, owner withdrawal."""

from esp2cs import codec
from esp2cs.state import CONTRACT_ADDRESSES
from esp2cs.transactions import Contract

PM = Contract.PAYMENT_MANAGEMENT


def _deposit(harness, who="user", value=1000):
    return harness.apply(who, PM, "makePayment", value=value)


def _cells(harness):
    return harness.state.storage[PM]


def _u64(cell):
    return int.from_bytes(cell[:8], "little") if cell else 0


def test_deposit_records_escrow(harness, keys):
    receipt = _deposit(harness)
    assert receipt.success
    assert _u64(_cells(harness)[f"deposit:{keys['user'].address.hex()}"]) == 1000
    assert harness.state.accounts[CONTRACT_ADDRESSES[PM]].balance == 1000


def test_two_deposits_sum(harness, keys):
    _deposit(harness, value=1000)
    _deposit(harness, value=250)
    assert _u64(_cells(harness)[f"deposit:{keys['user'].address.hex()}"]) == 1250


def test_zero_value_reverts(harness):
    receipt = harness.apply("user", PM, "makePayment", value=0)
    assert receipt.status == "reverted"
    assert receipt.revert_reason == "ZeroValue"


def test_request_refund_tracks_pending(harness, keys):
    _deposit(harness)
    receipt = harness.apply("user", PM, "requestRefund", codec.encode_u64(400))
    assert receipt.success
    assert _u64(_cells(harness)[f"pending:{keys['user'].address.hex()}"]) == 400


def test_excessive_refund_reverts_and_rolls_back(harness, keys):
    _deposit(harness)
    before = dict(_cells(harness))
    receipt = harness.apply("user", PM, "requestRefund", codec.encode_u64(1001))
    assert receipt.status == "reverted"
    assert receipt.revert_reason == "ExcessiveRefund"
    assert _cells(harness) == before


def test_pending_never_exceeds_deposit(harness, keys):
    _deposit(harness)
    harness.apply("user", PM, "requestRefund", codec.encode_u64(600))
    second = harness.apply("user", PM, "requestRefund", codec.encode_u64(600))
    assert second.status == "reverted"
    assert _u64(_cells(harness)[f"pending:{keys['user'].address.hex()}"]) == 600


def test_process_refund_pays_user(harness, keys):
    _deposit(harness)
    harness.apply("user", PM, "requestRefund", codec.encode_u64(400))
    user_before = harness.balance("user")
    receipt = harness.apply("owner", PM, "processRefund", keys["user"].address)
    assert receipt.success
    assert int.from_bytes(receipt.return_value, "little") == 400
    assert harness.balance("user") == user_before + 400
    assert _u64(_cells(harness).get(f"pending:{keys['user'].address.hex()}")) == 0
    assert _u64(_cells(harness)[f"deposit:{keys['user'].address.hex()}"]) == 600


def test_process_refund_not_owner(harness, keys):
    _deposit(harness)
    harness.apply("user", PM, "requestRefund", codec.encode_u64(400))
    receipt = harness.apply("peer", PM, "processRefund", keys["user"].address)
    assert receipt.status == "reverted"
    assert receipt.revert_reason == "NotOwner"


def test_process_refund_nothing_pending(harness, keys):
    _deposit(harness)
    receipt = harness.apply("owner", PM, "processRefund", keys["user"].address)
    assert receipt.status == "reverted"
    assert receipt.revert_reason == "NothingPending"


def test_conservation_across_refund_cycle(harness, keys):
    supply = harness.state.total_supply()
    _deposit(harness)
    harness.apply("user", PM, "requestRefund", codec.encode_u64(400))
    harness.apply("owner", PM, "processRefund", keys["user"].address)
    assert harness.state.total_supply() == supply


def test_withdraw_funds_leaves_pending_intact(harness, keys):
    _deposit(harness)
    harness.apply("user", PM, "requestRefund", codec.encode_u64(400))
    owner_before = harness.balance("owner")
    receipt = harness.apply("owner", PM, "withdrawFunds")
    assert receipt.success
    assert int.from_bytes(receipt.return_value, "little") == 600
    fee = receipt.gas_used * harness.genesis.gas_price_gwei * 10**9
    assert harness.balance("owner") == owner_before + 600 - fee
    # pending refund still honoured afterwards
    refund = harness.apply("owner", PM, "processRefund", keys["user"].address)
    assert refund.success
    assert harness.state.accounts[CONTRACT_ADDRESSES[PM]].balance == 0


def test_withdraw_twice_fails_second_time(harness):
    _deposit(harness)
    harness.apply("user", PM, "requestRefund", codec.encode_u64(400))
    assert harness.apply("owner", PM, "withdrawFunds").success
    second = harness.apply("owner", PM, "withdrawFunds")
    assert second.status == "reverted"
    assert second.revert_reason == "NothingToWithdraw"


def test_withdraw_not_owner(harness):
    _deposit(harness)
    receipt = harness.apply("user", PM, "withdrawFunds")
    assert receipt.status == "reverted"
    assert receipt.revert_reason == "NotOwner"


def test_withdraw_drains_multiple_depositors_proportionally(harness, keys):
    _deposit(harness, who="user", value=1000)
    _deposit(harness, who="peer", value=500)
    harness.apply("user", PM, "requestRefund", codec.encode_u64(300))
    receipt = harness.apply("owner", PM, "withdrawFunds")
    assert int.from_bytes(receipt.return_value, "little") == 1200
    cells = _cells(harness)
    assert _u64(cells[f"deposit:{keys['user'].address.hex()}"]) == 300
    assert _u64(cells[f"deposit:{keys['peer'].address.hex()}"]) == 0

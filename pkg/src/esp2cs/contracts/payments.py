"""PaymentManagement: escrow deposits, validated refunds, owner withdrawal.

Users pay value into the contract pool; refund requests are validated against
the depositor's balance and queued for the owner, who settles them or drains
the non-pending remainder. Aggregate cells (totals, depositor registry) keep
withdrawal independent of queue history.
"""

from __future__ import annotations

from .. import codec
from .base import (
    CallEnv,
    ContractRevert,
    cell_addr_list,
    cell_u64,
    read_addr_list,
    read_u64,
)


def _require_owner(env: CallEnv) -> bytes:
    owner = env.sload("owner")
    if owner != env.caller:
        raise ContractRevert("NotOwner")
    return owner


def make_payment(env: CallEnv) -> bytes:
    env.args.expect_end()
    if env.value <= 0:
        raise ContractRevert("ZeroValue")
    key = f"deposit:{env.caller.hex()}"
    deposited = read_u64(env.sload(key))
    depositors = read_addr_list(env.sload("depositors"))
    total = read_u64(env.sload("total_deposits"))
    env.sstore(key, cell_u64(deposited + env.value))
    if env.caller not in depositors:
        env.sstore("depositors", cell_addr_list(depositors + [env.caller]))
    env.sstore("total_deposits", cell_u64(total + env.value))
    env.log("Payment", topics=(env.caller, b"deposit"), data=codec.encode_u64(env.value))
    return b""


def request_refund(env: CallEnv) -> bytes:
    amount = env.args.u64()
    env.args.expect_end()
    if amount <= 0:
        raise ContractRevert("ZeroAmount")
    deposited = read_u64(env.sload(f"deposit:{env.caller.hex()}"))
    pending = read_u64(env.sload(f"pending:{env.caller.hex()}"))
    queue_len = read_u64(env.sload("refund_queue_len"))
    total_pending = read_u64(env.sload("total_pending"))
    if pending + amount > deposited:
        raise ContractRevert("ExcessiveRefund")
    env.sstore(f"pending:{env.caller.hex()}", cell_u64(pending + amount))
    env.sstore(f"refund:{queue_len}:user", env.caller)
    env.sstore(f"refund:{queue_len}:amount", cell_u64(amount))
    env.sstore(f"refund:{queue_len}:time", cell_u64(env.ctx.timestamp))
    env.sstore("refund_queue_len", cell_u64(queue_len + 1))
    env.sstore("total_pending", cell_u64(total_pending + amount))
    env.log("RefundRequested", topics=(env.caller, b"refund"), data=codec.encode_u64(amount))
    return b""


def process_refund(env: CallEnv) -> bytes:
    user = env.args.fixed(20)
    env.args.expect_end()
    _require_owner(env)
    pending = read_u64(env.sload(f"pending:{user.hex()}"))
    if pending == 0:
        raise ContractRevert("NothingPending")
    deposited = read_u64(env.sload(f"deposit:{user.hex()}"))
    total_deposits = read_u64(env.sload("total_deposits"))
    total_pending = read_u64(env.sload("total_pending"))
    env.sdelete(f"pending:{user.hex()}")
    env.sstore(f"deposit:{user.hex()}", cell_u64(deposited - pending))
    env.sstore("total_deposits", cell_u64(total_deposits - pending))
    env.sstore("total_pending", cell_u64(total_pending - pending))
    env.pay_out(user, pending)
    env.log("RefundProcessed", topics=(env.caller, user), data=codec.encode_u64(pending))
    return codec.encode_u64(pending)


def withdraw_funds(env: CallEnv) -> bytes:
    env.args.expect_end()
    owner = _require_owner(env)
    total_deposits = read_u64(env.sload("total_deposits"))
    total_pending = read_u64(env.sload("total_pending"))
    available = total_deposits - total_pending
    if available <= 0:
        raise ContractRevert("NothingToWithdraw")
    # Drain every depositor down to their pending amount so refund
    # requests can always be honoured afterwards.
    for depositor in read_addr_list(env.sload("depositors")):
        deposited = read_u64(env.sload(f"deposit:{depositor.hex()}"))
        pending = read_u64(env.sload(f"pending:{depositor.hex()}"))
        if deposited > pending:
            env.sstore(f"deposit:{depositor.hex()}", cell_u64(pending))
    env.sstore("total_deposits", cell_u64(total_pending))
    env.sstore(f"withdrawal:{env.ctx.timestamp}", cell_u64(available))
    env.pay_out(owner, available)
    env.log("FundsWithdrawn", topics=(env.caller, b"withdraw"), data=codec.encode_u64(available))
    return codec.encode_u64(available)

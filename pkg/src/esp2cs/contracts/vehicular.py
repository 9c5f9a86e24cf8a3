"""VehicularCommunication: broadcast and directed V2X messages.

Messages get dense sequential ids. Broadcast content is stored in the clear;
directed content arrives sealed to the recipient key and is stored opaquely,
so only the recipient can read it off the public ledger. Direct messages
join the recipient's unread set until markAllAsRead stamps them.
"""

from __future__ import annotations

from .. import codec
from .base import (
    CallEnv,
    ContractRevert,
    cell_option_addr,
    cell_u64,
    read_option_addr,
    read_u64,
)

MAX_CONTENT_BYTES = 1024


def _store_message(env: CallEnv, recipient: bytes | None, content: bytes) -> bytes:
    if len(content) == 0:
        raise ContractRevert("EmptyContent")
    if len(content) > MAX_CONTENT_BYTES:
        raise ContractRevert("ContentTooLarge")
    msg_id = read_u64(env.sload("count"))
    env.sstore(f"msg:{msg_id}:sender", env.caller)
    env.sstore(f"msg:{msg_id}:recipient", cell_option_addr(recipient))
    env.sstore(f"msg:{msg_id}:timestamp", cell_u64(env.ctx.timestamp))
    env.sstore(f"msg:{msg_id}:read", cell_u64(0))
    env.store_blob(f"msg:{msg_id}:content", content)
    env.sstore("count", cell_u64(msg_id + 1))
    return cell_u64(msg_id)


def publish_message(env: CallEnv) -> bytes:
    content = env.args.bytes_()
    env.args.expect_end()
    result = _store_message(env, recipient=None, content=content)
    env.log("MessagePublished", topics=(env.caller, result), data=content)
    return result


def send_message(env: CallEnv) -> bytes:
    recipient = env.args.fixed(20)
    content = env.args.bytes_()
    env.args.expect_end()
    if env.account_lookup(recipient) is None:
        raise ContractRevert("UnknownRecipient")
    result = _store_message(env, recipient=recipient, content=content)
    env.log("MessageSent", topics=(env.caller, recipient), data=content)
    return result


def _load_message(env: CallEnv, msg_id: int) -> bytes:
    """Canonical encoding of one stored message record."""
    sender = env.sload(f"msg:{msg_id}:sender")
    if sender is None:
        raise ContractRevert("UnknownId")
    recipient_cell = env.sload(f"msg:{msg_id}:recipient")
    content = env.load_blob(f"msg:{msg_id}:content")
    timestamp = read_u64(env.sload(f"msg:{msg_id}:timestamp"))
    read_flag = read_u64(env.sload(f"msg:{msg_id}:read"))
    return b"".join(
        (
            codec.encode_u64(msg_id),
            sender,
            recipient_cell or codec.encode_option(None),
            codec.encode_bytes(content or b""),
            codec.encode_u64(timestamp),
            codec.encode_bool(read_flag == 1),
        )
    )


def read_message(env: CallEnv) -> bytes:
    msg_id = env.args.u64()
    env.args.expect_end()
    return _load_message(env, msg_id)


def get_unread_messages(env: CallEnv) -> bytes:
    account = env.args.fixed(20)
    env.args.expect_end()
    count = read_u64(env.sload("count"))
    records = []
    for msg_id in range(count):
        recipient = read_option_addr(env.sload(f"msg:{msg_id}:recipient"))
        if recipient != account:
            continue
        if read_u64(env.sload(f"msg:{msg_id}:read")) == 1:
            continue
        records.append(_load_message(env, msg_id))
    return codec.encode_u64(len(records)) + b"".join(
        codec.encode_bytes(r) for r in records
    )


def mark_all_as_read(env: CallEnv) -> bytes:
    env.args.expect_end()
    count = read_u64(env.sload("count"))
    marked = 0
    for msg_id in range(count):
        recipient = read_option_addr(env.sload(f"msg:{msg_id}:recipient"))
        if recipient != env.caller:
            continue
        if read_u64(env.sload(f"msg:{msg_id}:read")) == 1:
            continue
        env.sstore(f"msg:{msg_id}:read", cell_u64(1))
        env.sstore(f"msg:{msg_id}:read_at", cell_u64(env.ctx.timestamp))
        marked += 1
    env.log("AllRead", topics=(env.caller,), data=codec.encode_u64(marked))
    return codec.encode_u64(marked)

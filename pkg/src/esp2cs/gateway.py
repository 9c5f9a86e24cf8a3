"""Cloud-server gateway: JSON-over-HTTP API in front of one node.

All responses derive from the node's current head snapshot. The gateway
relays client-signed transactions into the mempool, serves headers,
receipts and inclusion proofs to light clients, answers view calls, and
computes parking occupancy analytics by folding the canonical chain.
It holds no keys and never signs anything.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel

from . import codec
from .chain import BlockHeader
from .consensus import Node
from .crypto import address_of
from .merkle import MerkleProof
from .runtime import TxExcluded, ViewError
from .transactions import Contract, Receipt, Transaction


# -- view result decoding -------------------------------------------------------


def decode_message_record(data: bytes) -> dict:
    reader = codec.Reader(data)
    msg_id = reader.u64()
    sender = reader.fixed(20)
    recipient = reader.option(20)
    content = reader.bytes_()
    timestamp = reader.u64()
    read_flag = reader.bool_()
    reader.expect_end()
    return {
        "id": msg_id,
        "sender": sender.hex(),
        "recipient": recipient.hex() if recipient else None,
        "content": content.hex(),
        "timestamp": timestamp,
        "read": read_flag,
    }


def decode_message_list(data: bytes) -> list[dict]:
    reader = codec.Reader(data)
    count = reader.u64()
    records = [decode_message_record(reader.bytes_()) for _ in range(count)]
    reader.expect_end()
    return records


def header_to_json(header: BlockHeader) -> dict:
    return {
        "height": header.height,
        "parent_hash": header.parent_hash.hex(),
        "timestamp": header.timestamp,
        "proposer": header.proposer.hex(),
        "tx_root": header.tx_root.hex(),
        "state_root": header.state_root.hex(),
        "signature": header.signature.hex(),
        "block_hash": header.block_hash.hex(),
    }


def header_from_json(data: dict) -> BlockHeader:
    return BlockHeader(
        height=int(data["height"]),
        parent_hash=bytes.fromhex(data["parent_hash"]),
        timestamp=int(data["timestamp"]),
        proposer=bytes.fromhex(data["proposer"]),
        tx_root=bytes.fromhex(data["tx_root"]),
        state_root=bytes.fromhex(data["state_root"]),
        signature=bytes.fromhex(data["signature"]),
    )


# -- analytics --------------------------------------------------------------------


@dataclass(frozen=True)
class OccupancyRecord:
    space_id: int
    window_start: int
    window_end: int
    occupied_seconds: int
    sessions_count: int
    revenue: int

    def to_json(self) -> dict:
        return {
            "space_id": self.space_id,
            "window_start": self.window_start,
            "window_end": self.window_end,
            "occupied_seconds": self.occupied_seconds,
            "sessions_count": self.sessions_count,
            "revenue": self.revenue,
        }


def occupancy_report(node: Node, space_id: int, window_start: int, window_end: int) -> OccupancyRecord:
    """Fold metered-session starts and ends from the chain into one window."""
    if window_start >= window_end:
        raise ValueError("BadWindow")
    cells = node.state.storage[Contract.AUTOMATED_PARKING_PAYMENTS]
    if f"space:{space_id}:owner" not in cells:
        raise KeyError("UnknownSpace")

    open_sessions: dict[bytes, tuple[int, int]] = {}  # vehicle -> (space, start_ts)
    sessions: list[tuple[int, int, int]] = []  # (start, end, fee); end == -1 when open
    head_time = node.head.timestamp
    for block in node.canonical_chain():
        receipts = node.receipts[block.block_hash]
        for tx, receipt in zip(block.transactions, receipts):
            if tx.contract is not Contract.AUTOMATED_PARKING_PAYMENTS or not receipt.success:
                continue
            if tx.function == "startParking":
                args = codec.Reader(tx.args)
                target = args.u64()
                if target == space_id:
                    open_sessions[tx.sender] = (target, block.header.timestamp)
                else:
                    open_sessions.pop(tx.sender, None)
            elif tx.function == "endParking" and tx.sender in open_sessions:
                _, started = open_sessions.pop(tx.sender)
                fee = int.from_bytes(receipt.return_value[:8], "little")
                sessions.append((started, block.header.timestamp, fee))
    for _, started in open_sessions.values():
        sessions.append((started, -1, 0))

    occupied = 0
    count = 0
    revenue = 0
    for started, ended, fee in sessions:
        effective_end = head_time if ended == -1 else ended
        overlap = min(effective_end, window_end) - max(started, window_start)
        if overlap > 0 or (window_start <= started < window_end):
            count += 1
        occupied += max(overlap, 0)
        if ended != -1 and window_start <= ended < window_end:
            revenue += fee
    occupied = min(occupied, window_end - window_start)
    return OccupancyRecord(
        space_id=space_id,
        window_start=window_start,
        window_end=window_end,
        occupied_seconds=occupied,
        sessions_count=count,
        revenue=revenue,
    )


def admin_status(node: Node, peer_liveness: dict[str, bool] | None = None) -> dict:
    head = node.head
    authorities = []
    for key in node.genesis.authorities:
        hexkey = key.hex()
        if node.keypair is not None and key == node.keypair.sign_public:
            live = True
        elif peer_liveness is not None:
            live = peer_liveness.get(hexkey, False)
        else:
            live = None  # unknown: no peer tracking in this deployment
        authorities.append({"public_key": hexkey, "address": address_of(key).hex(), "live": live})
    return {
        "head_height": head.height,
        "head_hash": head.block_hash.hex(),
        "state_root": head.state_root.hex(),
        "mempool_size": len(node.mempool),
        "last_block_time": head.timestamp,
        "authorities": authorities,
    }


# -- HTTP app ------------------------------------------------------------------------


class TxSubmission(BaseModel):
    tx: str  # hex canonical encoding


def create_app(
    node: Node,
    peer_liveness_fn: Callable[[], dict[str, bool]] | None = None,
    node_alive_fn: Callable[[], bool] | None = None,
) -> FastAPI:
    app = FastAPI(title="esp2cs gateway", version="1.0")

    def require_node() -> Node:
        if node_alive_fn is not None and not node_alive_fn():
            raise HTTPException(status_code=503, detail="node unreachable")
        return node

    @app.post("/v1/transactions", status_code=202)
    def post_transaction(body: TxSubmission):
        n = require_node()
        try:
            tx = Transaction.decode(bytes.fromhex(body.tx))
        except (ValueError, codec.DecodeError) as exc:
            raise HTTPException(status_code=400, detail=f"malformed transaction: {exc}")
        try:
            tx_hash = n.submit_transaction(tx)
        except TxExcluded as exc:
            raise HTTPException(status_code=400, detail=exc.reason)
        return {"tx_hash": tx_hash.hex()}

    @app.get("/v1/receipts/{tx_hash}")
    def get_receipt(tx_hash: str):
        n = require_node()
        receipt = n.receipt_for(bytes.fromhex(tx_hash))
        if receipt is None:
            raise HTTPException(status_code=404, detail="receipt not found")
        loc = n.locate_tx(bytes.fromhex(tx_hash))
        record = receipt.to_record()
        record["block_height"] = loc.height
        record["tx_index"] = loc.index
        return record

    @app.get("/v1/accounts/{address}")
    def get_account(address: str):
        n = require_node()
        acct = n.state.account(bytes.fromhex(address))
        if acct is None:
            raise HTTPException(status_code=404, detail="unknown account")
        return {"address": address, "balance": acct.balance, "nonce": acct.nonce}

    @app.get("/v1/chain/headers")
    def get_headers(
        from_height: int = Query(0, alias="from"),
        limit: int = 1000,
    ):
        n = require_node()
        chain = n.canonical_chain()
        headers = [
            header_to_json(b.header)
            for b in chain
            if b.header.height >= from_height
        ][:limit]
        return {"headers": headers}

    @app.get("/v1/proofs/{tx_hash}")
    def get_proof(tx_hash: str):
        n = require_node()
        located = n.proof_for(bytes.fromhex(tx_hash))
        if located is None:
            raise HTTPException(status_code=404, detail="transaction not in canonical chain")
        header, proof = located
        return {
            "header_height": header.height,
            "leaf_index": proof.leaf_index,
            "leaf_count": proof.leaf_count,
            "siblings": [s.hex() for s in proof.siblings],
        }

    @app.get("/v1/messages/unread")
    def get_unread(account: str):
        n = require_node()
        try:
            raw = n.executor.call_view(
                n.state,
                Contract.VEHICULAR_COMMUNICATION,
                "getUnreadMessages",
                bytes.fromhex(account),
            )
        except ViewError as exc:
            raise HTTPException(status_code=400, detail=exc.reason)
        return {"messages": decode_message_list(raw)}

    @app.get("/v1/parking/spaces")
    def get_spaces(available_from: int | None = None, until: int | None = None):
        n = require_node()
        state = n.state
        spaces = []
        psm = state.storage[Contract.PARKING_SPACE_MANAGEMENT]
        psm_count = int.from_bytes(psm.get("count", bytes(8))[:8], "little")
        for sid in range(psm_count):
            entry = {
                "kind": "slot",
                "id": sid,
                "owner": psm[f"space:{sid}:owner"].hex(),
                "rate_per_hour": int.from_bytes(psm[f"space:{sid}:rate"][:8], "little"),
                "location": _read_blob_text(psm, f"space:{sid}:location"),
                "slots": _read_slots(psm, f"space:{sid}:slots"),
                "booked_by": (psm.get(f"space:{sid}:booked_by") or b"").hex() or None,
                "booked_until": int.from_bytes(
                    psm.get(f"space:{sid}:booked_until", bytes(8))[:8], "little"
                ),
                "earnings": int.from_bytes(psm.get(f"space:{sid}:earnings", bytes(8))[:8], "little"),
            }
            if available_from is not None and until is not None:
                raw = n.executor.call_view(
                    state,
                    Contract.PARKING_SPACE_MANAGEMENT,
                    "isAvailable",
                    codec.encode_u64(sid) + codec.encode_u64(available_from) + codec.encode_u64(until),
                )
                entry["available"] = bool(int.from_bytes(raw[:8], "little"))
            spaces.append(entry)
        app_cells = state.storage[Contract.AUTOMATED_PARKING_PAYMENTS]
        app_count = int.from_bytes(app_cells.get("count", bytes(8))[:8], "little")
        for sid in range(app_count):
            occupant_cell = app_cells.get(f"space:{sid}:occupant")
            occupant = None
            if occupant_cell:
                opt = codec.Reader(occupant_cell).option(20)
                occupant = opt.hex() if opt else None
            spaces.append(
                {
                    "kind": "metered",
                    "id": sid,
                    "owner": app_cells[f"space:{sid}:owner"].hex(),
                    "rate_per_second": int.from_bytes(app_cells[f"space:{sid}:rate"][:8], "little"),
                    "occupant": occupant,
                    "sessions": int.from_bytes(app_cells.get(f"space:{sid}:sessions", bytes(8))[:8], "little"),
                    "revenue": int.from_bytes(app_cells.get(f"space:{sid}:revenue", bytes(8))[:8], "little"),
                }
            )
        return {"spaces": spaces, "head_time": n.head.timestamp}

    @app.get("/v1/parking/sessions")
    def get_session(vehicle: str):
        n = require_node()
        cells = n.state.storage[Contract.AUTOMATED_PARKING_PAYMENTS]
        active = cells.get(f"session:{vehicle}:active")
        if active is None:
            return {"active": False}
        space_id = int.from_bytes(cells[f"session:{vehicle}:space"][:8], "little")
        start = int.from_bytes(cells[f"session:{vehicle}:start"][:8], "little")
        rate = int.from_bytes(cells[f"space:{space_id}:rate"][:8], "little")
        head_time = n.head.timestamp
        elapsed = max(head_time - start, 0)
        return {
            "active": True,
            "space_id": space_id,
            "start_time": start,
            "head_time": head_time,
            "elapsed": elapsed,
            "rate_per_second": rate,
            "amount_due": rate * elapsed,
        }

    @app.get("/v1/analytics/occupancy")
    def get_occupancy(
        space_id: int,
        window_start: int = Query(alias="from"),
        window_end: int = Query(alias="to"),
    ):
        n = require_node()
        try:
            record = occupancy_report(n, space_id, window_start, window_end)
        except KeyError:
            raise HTTPException(status_code=404, detail="UnknownSpace")
        except ValueError:
            raise HTTPException(status_code=400, detail="BadWindow")
        return record.to_json()

    @app.get("/v1/admin/status")
    def get_status():
        n = require_node()
        liveness = peer_liveness_fn() if peer_liveness_fn is not None else None
        return admin_status(n, liveness)

    return app


def _read_blob_text(cells: dict[str, bytes], prefix: str) -> str:
    first = cells.get(f"{prefix}:0")
    if first is None:
        return ""
    length = int.from_bytes(first[:8], "little")
    total = 8 + length
    chunks = [first]
    j = 1
    while sum(len(c) for c in chunks) < total:
        chunks.append(cells.get(f"{prefix}:{j}", b""))
        j += 1
    reader = codec.Reader(b"".join(chunks))
    return reader.bytes_().decode("utf-8", errors="replace")


def _read_slots(cells: dict[str, bytes], prefix: str) -> list[list[int]]:
    first = cells.get(f"{prefix}:0")
    if first is None:
        return []
    length = int.from_bytes(first[:8], "little")
    total = 8 + length
    chunks = [first]
    j = 1
    while sum(len(c) for c in chunks) < total:
        chunks.append(cells.get(f"{prefix}:{j}", b""))
        j += 1
    reader = codec.Reader(b"".join(chunks))
    payload = reader.bytes_()
    inner = codec.Reader(payload)
    return [[a, b] for a, b in inner.pairs()]


# -- light-client transports ------------------------------------------------------------


class InProcessGateway:
    """GatewayTransport backed directly by a node (simulation/tests)."""

    def __init__(self, node: Node):
        self.node = node

    def get_headers(self, from_height: int) -> list[BlockHeader]:
        return [
            b.header
            for b in self.node.canonical_chain()
            if b.header.height >= from_height
        ]

    def post_transaction(self, tx: Transaction) -> bytes:
        return self.node.submit_transaction(tx)

    def get_receipt(self, tx_hash: bytes) -> Receipt | None:
        return self.node.receipt_for(tx_hash)

    def get_proof(self, tx_hash: bytes) -> tuple[int, MerkleProof] | None:
        located = self.node.proof_for(tx_hash)
        if located is None:
            return None
        header, proof = located
        return header.height, proof


class HttpGateway:
    """GatewayTransport over the /v1 HTTP API."""

    def __init__(self, base_url: str, client=None):
        import httpx

        self.base_url = base_url.rstrip("/")
        self.client = client or httpx.Client()

    def get_headers(self, from_height: int) -> list[BlockHeader]:
        resp = self.client.get(
            f"{self.base_url}/v1/chain/headers", params={"from": from_height}
        )
        resp.raise_for_status()
        return [header_from_json(h) for h in resp.json()["headers"]]

    def post_transaction(self, tx: Transaction) -> bytes:
        resp = self.client.post(
            f"{self.base_url}/v1/transactions", json={"tx": tx.encode().hex()}
        )
        if resp.status_code == 400:
            raise TxExcluded(resp.json().get("detail", "rejected"))
        resp.raise_for_status()
        return bytes.fromhex(resp.json()["tx_hash"])

    def get_receipt(self, tx_hash: bytes) -> Receipt | None:
        resp = self.client.get(f"{self.base_url}/v1/receipts/{tx_hash.hex()}")
        if resp.status_code == 404:
            return None
        resp.raise_for_status()
        data = resp.json()
        return Receipt(
            tx_hash=tx_hash,
            status=data["status"],
            revert_reason=data.get("revert_reason", ""),
            gas_used=int(data["gas_used"]),
            return_value=bytes.fromhex(data.get("return_value", "")),
            logs=(),
        )

    def get_proof(self, tx_hash: bytes) -> tuple[int, MerkleProof] | None:
        resp = self.client.get(f"{self.base_url}/v1/proofs/{tx_hash.hex()}")
        if resp.status_code == 404:
            return None
        resp.raise_for_status()
        data = resp.json()
        proof = MerkleProof(
            leaf_index=int(data["leaf_index"]),
            leaf_count=int(data["leaf_count"]),
            siblings=tuple(bytes.fromhex(s) for s in data["siblings"]),
        )
        return int(data["header_height"]), proof

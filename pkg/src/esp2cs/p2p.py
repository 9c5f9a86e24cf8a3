"""Live TCP peering for nodes outside the simulator.

Wire messages mirror the simulator payloads: blocks, transactions, head
announcements, and catch-up requests, framed as length-prefixed JSON with
hex-encoded canonical bytes. Every inbound message funnels into one
processing thread, so node state stays single-writer; the HTTP gateway
reads through a lock-guarded proxy.
"""

from __future__ import annotations

import json
import socket
import struct
import threading
import time

from .chain import Block
from .consensus import Node
from .crypto import KeyPair
from .genesis import GenesisConfig
from .runtime import TxExcluded
from .transactions import Transaction


def encode_frame(message: dict) -> bytes:
    payload = json.dumps(message, sort_keys=True).encode()
    return struct.pack("<I", len(payload)) + payload


def read_frame(sock: socket.socket) -> dict | None:
    header = _read_exact(sock, 4)
    if header is None:
        return None
    (length,) = struct.unpack("<I", header)
    if length > 64 * 1024 * 1024:
        return None
    payload = _read_exact(sock, length)
    if payload is None:
        return None
    return json.loads(payload.decode())


def _read_exact(sock: socket.socket, n: int) -> bytes | None:
    buf = b""
    while len(buf) < n:
        try:
            chunk = sock.recv(n - len(buf))
        except OSError:
            return None
        if not chunk:
            return None
        buf += chunk
    return buf


class LockedNode:
    """Proxy that serializes every node access behind one lock."""

    def __init__(self, node: Node, lock: threading.RLock):
        self._node = node
        self._lock = lock

    def __getattr__(self, name):
        with self._lock:
            attr = getattr(self._node, name)
        if callable(attr):
            def locked(*args, **kwargs):
                with self._lock:
                    return attr(*args, **kwargs)

            return locked
        return attr


class NodeServer:
    """One live node: peering, block production, optional chain log."""

    def __init__(
        self,
        genesis: GenesisConfig,
        keypair: KeyPair | None,
        listen: tuple[str, int],
        peers: list[tuple[str, int]],
        block_log_path=None,
        name: str = "node",
    ):
        self.node = Node(genesis=genesis, keypair=keypair, name=name)
        self.listen = listen
        self.peers = peers
        self.name = name
        self.lock = threading.RLock()
        self.last_seen: dict[str, float] = {}
        self._stop = threading.Event()
        self._server_sock: socket.socket | None = None
        self._threads: list[threading.Thread] = []
        self._block_log = None
        if block_log_path is not None:
            from .chain import BlockLog

            self._block_log = BlockLog(block_log_path)
            for block in self._block_log.read_all():
                if block.header.height > 0:
                    self.node.receive_block(block)

    # -- lifecycle -------------------------------------------------------------

    def start(self) -> None:
        server = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        server.bind(self.listen)
        server.listen(16)
        server.settimeout(0.2)
        self._server_sock = server
        self._spawn(self._accept_loop)
        self._spawn(self._tick_loop)

    def stop(self) -> None:
        self._stop.set()
        if self._server_sock is not None:
            self._server_sock.close()
        for thread in self._threads:
            thread.join(timeout=2)

    def _spawn(self, target) -> None:
        thread = threading.Thread(target=target, daemon=True)
        thread.start()
        self._threads.append(thread)

    # -- inbound ----------------------------------------------------------------

    def _accept_loop(self) -> None:
        while not self._stop.is_set():
            try:
                conn, _ = self._server_sock.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            self._spawn(lambda c=conn: self._conn_loop(c))

    def _conn_loop(self, conn: socket.socket) -> None:
        with conn:
            while not self._stop.is_set():
                message = read_frame(conn)
                if message is None:
                    return
                reply = self._handle(message)
                if reply is not None:
                    try:
                        conn.sendall(encode_frame(reply))
                    except OSError:
                        return

    def _handle(self, message: dict) -> dict | None:
        kind = message.get("type")
        sender = message.get("from", "")
        if sender:
            self.last_seen[sender] = time.time()
        if kind == "block":
            block = Block.decode(bytes.fromhex(message["data"]))
            with self.lock:
                accepted = self.node.receive_block(block)
            if accepted:
                self._broadcast({"type": "block", "data": message["data"]})
            elif block.header.parent_hash not in self.node.blocks:
                return {"type": "request", "from_height": 1, "from": self._ident()}
            return None
        if kind == "tx":
            tx = Transaction.decode(bytes.fromhex(message["data"]))
            try:
                with self.lock:
                    self.node.submit_transaction(tx)
            except TxExcluded:
                return None
            self._broadcast({"type": "tx", "data": message["data"]})
            return None
        if kind == "announce":
            head_hash = bytes.fromhex(message["head"])
            if head_hash not in self.node.blocks:
                with self.lock:
                    from_height = self.node.head.height + 1
                return {"type": "request", "from_height": from_height, "from": self._ident()}
            return None
        if kind == "request":
            with self.lock:
                chain = self.node.canonical_chain()
            blocks = [
                b.encode().hex() for b in chain if b.header.height >= int(message["from_height"])
            ]
            return {"type": "blocks", "data": blocks, "from": self._ident()}
        if kind == "blocks":
            with self.lock:
                for raw in message["data"]:
                    self.node.receive_block(Block.decode(bytes.fromhex(raw)))
            return None
        return None

    # -- outbound -----------------------------------------------------------------

    def _ident(self) -> str:
        if self.node.keypair is not None:
            return self.node.keypair.sign_public.hex()
        return self.name

    def _broadcast(self, message: dict) -> None:
        message = dict(message)
        message.setdefault("from", self._ident())
        frame = encode_frame(message)
        for host, port in self.peers:
            try:
                with socket.create_connection((host, port), timeout=1) as sock:
                    sock.sendall(frame)
                    sock.settimeout(0.5)
                    # bounded request/response exchange so a lagging peer can
                    # ask for catch-up blocks on the same connection
                    for _ in range(4):
                        reply = read_frame(sock)
                        if reply is None:
                            break
                        response = self._handle(reply)
                        if response is None:
                            break
                        sock.sendall(encode_frame(response))
            except OSError:
                continue

    def _tick_loop(self) -> None:
        interval = self.node.genesis.block_interval
        while not self._stop.is_set():
            now = int(time.time())
            with self.lock:
                block = self.node.maybe_propose(now)
            if block is not None:
                if self._block_log is not None:
                    self._block_log.append(block)
                self._broadcast({"type": "block", "data": block.encode().hex()})
            with self.lock:
                head = self.node.head
            self._broadcast(
                {"type": "announce", "height": head.height, "head": head.block_hash.hex()}
            )
            self._stop.wait(interval)

    # -- status ---------------------------------------------------------------------

    def peer_liveness(self) -> dict[str, bool]:
        horizon = time.time() - 3 * self.node.genesis.block_interval
        return {key: seen >= horizon for key, seen in self.last_seen.items()}

    def locked_node(self) -> LockedNode:
        return LockedNode(self.node, self.lock)

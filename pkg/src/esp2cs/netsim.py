"""Deterministic discrete-event simulation of the whole network.

One seeded RNG drives every random draw (link jitter, message sealing), and
events execute in (time, insertion order), so a scenario replays to the
byte. Authorities run real Node instances wired through simulated links;
vehicles, renters, and IoT parking gateways are scripted actors that sign
transactions client-side and relay them to a home authority. Partitions
drop cross-group traffic for their window; healing is detected by the
per-tick head announcements and block catch-up requests.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from pathlib import Path
from random import Random

import yaml

from . import codec
from .chain import Block
from .consensus import Node
from .crypto import KeyPair, seal, sha256
from .genesis import GenesisAccount, GenesisConfig
from .runtime import TxExcluded
from .transactions import Contract, Transaction, sign_transaction

DEFAULT_BALANCE = 10**18


class ScenarioError(ValueError):
    """Scenario file failed validation before execution."""


# -- scenario schema -----------------------------------------------------------


@dataclass(frozen=True)
class ActorSpec:
    name: str
    role: str  # authority | vehicle | renter | gateway
    balance: int = DEFAULT_BALANCE
    authorized: tuple[str, ...] = ()
    home: str | None = None  # authority this actor relays through


@dataclass(frozen=True)
class PartitionSpec:
    start: int  # seconds
    end: int
    groups: tuple[tuple[str, ...], ...]


@dataclass(frozen=True)
class ActionSpec:
    time: int  # seconds
    actor: str
    action: str
    params: dict


@dataclass(frozen=True)
class NetworkParams:
    base_latency_ms: int = 50
    jitter_ms: int = 30


@dataclass
class Scenario:
    name: str
    seed: int
    duration: int  # seconds
    actors: list[ActorSpec]
    actions: list[ActionSpec]
    partitions: list[PartitionSpec] = field(default_factory=list)
    network: NetworkParams = field(default_factory=NetworkParams)
    block_interval: int = 5
    gas_price_gwei: int = 1
    payment_owner: str | None = None

    @property
    def authority_names(self) -> list[str]:
        return [a.name for a in self.actors if a.role == "authority"]


_ROLES = {"authority", "vehicle", "renter", "gateway"}

_ACTION_FIELDS: dict[str, set[str]] = {
    "publish_message": {"content"},
    "send_message": {"to", "content"},
    "mark_all_read": set(),
    "make_payment": {"value"},
    "request_refund": {"amount"},
    "process_refund": {"user"},
    "withdraw_funds": set(),
    "register_space": {"location", "rate_per_hour", "slots"},
    "book_space": {"space", "from", "until", "value"},
    "release_space": {"space"},
    "withdraw_space": {"space"},
    "register_metered_space": {"rate_per_second"},
    "enter": {"gateway", "space"},
    "leave": {"gateway"},
    "calculate_fee": set(),
    "check_due": set(),
}

_OPTIONAL_FIELDS = {"book_space": {"value"}}


def parse_scenario(data: dict, name: str = "scenario") -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario root must be a mapping")
    for required in ("seed", "duration", "actors", "actions"):
        if required not in data:
            raise ScenarioError(f"missing required key '{required}'")

    actors = []
    names = set()
    for i, raw in enumerate(data["actors"]):
        if "name" not in raw or "role" not in raw:
            raise ScenarioError(f"actors[{i}]: needs 'name' and 'role'")
        if raw["role"] not in _ROLES:
            raise ScenarioError(f"actors[{i}]: unknown role '{raw['role']}'")
        if raw["name"] in names:
            raise ScenarioError(f"actors[{i}]: duplicate name '{raw['name']}'")
        names.add(raw["name"])
        actors.append(
            ActorSpec(
                name=raw["name"],
                role=raw["role"],
                balance=int(raw.get("balance", data.get("initial_balance", DEFAULT_BALANCE))),
                authorized=tuple(raw.get("authorized", ())),
                home=raw.get("home"),
            )
        )
    authority_names = [a.name for a in actors if a.role == "authority"]
    if not authority_names:
        raise ScenarioError("at least one authority actor is required")
    for i, actor in enumerate(actors):
        if actor.home is not None and actor.home not in authority_names:
            raise ScenarioError(f"actors[{i}]: home '{actor.home}' is not an authority")
        for grantee in actor.authorized:
            if grantee not in names:
                raise ScenarioError(f"actors[{i}]: authorized actor '{grantee}' not declared")

    actions = []
    last_time = 0
    for i, raw in enumerate(data["actions"]):
        for key in ("time", "actor", "action"):
            if key not in raw:
                raise ScenarioError(f"actions[{i}]: needs '{key}'")
        if raw["actor"] not in names:
            raise ScenarioError(f"actions[{i}]: actor '{raw['actor']}' not declared")
        kind = raw["action"]
        if kind not in _ACTION_FIELDS:
            raise ScenarioError(f"actions[{i}]: unknown action '{kind}'")
        params = {k: v for k, v in raw.items() if k not in ("time", "actor", "action")}
        required = _ACTION_FIELDS[kind] - _OPTIONAL_FIELDS.get(kind, set())
        missing = required - params.keys()
        if missing:
            raise ScenarioError(f"actions[{i}]: missing fields {sorted(missing)}")
        unknown = params.keys() - _ACTION_FIELDS[kind]
        if unknown:
            raise ScenarioError(f"actions[{i}]: unknown fields {sorted(unknown)}")
        when = int(raw["time"])
        if when < last_time:
            raise ScenarioError(f"actions[{i}]: actions must be sorted by time")
        last_time = when
        actions.append(ActionSpec(time=when, actor=raw["actor"], action=kind, params=params))

    partitions = []
    for i, raw in enumerate(data.get("partitions", [])):
        for key in ("start", "end", "groups"):
            if key not in raw:
                raise ScenarioError(f"partitions[{i}]: needs '{key}'")
        start, end = int(raw["start"]), int(raw["end"])
        if start >= end:
            raise ScenarioError(f"partitions[{i}]: empty window")
        groups = tuple(tuple(g) for g in raw["groups"])
        seen: set[str] = set()
        for group in groups:
            for member in group:
                if member not in names:
                    raise ScenarioError(f"partitions[{i}]: unknown actor '{member}'")
                if member in seen:
                    raise ScenarioError(f"partitions[{i}]: '{member}' in two groups")
                seen.add(member)
        partitions.append(PartitionSpec(start=start, end=end, groups=groups))
    for i, first in enumerate(partitions):
        for second in partitions[i + 1 :]:
            if first.start < second.end and second.start < first.end:
                raise ScenarioError("overlapping partition windows")

    network_raw = data.get("network", {})
    network = NetworkParams(
        base_latency_ms=int(network_raw.get("base_latency_ms", 50)),
        jitter_ms=int(network_raw.get("jitter_ms", 30)),
    )

    owner = data.get("payment_owner")
    if owner is not None and owner not in names:
        raise ScenarioError(f"payment_owner '{owner}' not declared")

    return Scenario(
        name=str(data.get("name", name)),
        seed=int(data["seed"]),
        duration=int(data["duration"]),
        actors=actors,
        actions=actions,
        partitions=partitions,
        network=network,
        block_interval=int(data.get("block_interval", 5)),
        gas_price_gwei=int(data.get("gas_price_gwei", 1)),
        payment_owner=owner,
    )


def load_scenario(path: str | Path) -> Scenario:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = f" at line {mark.line + 1}" if mark else ""
        raise ScenarioError(f"invalid scenario file{line}: {exc}") from exc
    return parse_scenario(data, name=Path(path).stem)


# -- wire payloads ----------------------------------------------------------------


@dataclass(frozen=True)
class TxMsg:
    tx: Transaction


@dataclass(frozen=True)
class BlockMsg:
    block: Block


@dataclass(frozen=True)
class HeadAnnounce:
    height: int
    head_hash: bytes


@dataclass(frozen=True)
class BlockRequest:
    from_height: int


@dataclass(frozen=True)
class BlockResponse:
    blocks: tuple[Block, ...]


# -- the simulation ------------------------------------------------------------------


@dataclass
class SimActor:
    spec: ActorSpec
    keypair: KeyPair
    next_nonce: int = 0


def actor_keypair(seed: int, name: str) -> KeyPair:
    return KeyPair(sha256(f"esp2cs-actor:{seed}:{name}".encode()))


class Simulation:
    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.rng = Random(scenario.seed)
        self.now_ms = 0
        self._seq = 0
        self._queue: list[tuple[int, int, tuple]] = []
        self.warnings: list[str] = []
        self.head_history: list[tuple[int, str, int, bytes]] = []
        self.submitted: dict[bytes, dict] = {}
        self._converged: list[tuple[int, bytes]] = []
        self._forwarded: dict[str, set[bytes]] = {}
        self._current_heads: dict[str, bytes] = {}

        self.actors = {
            spec.name: SimActor(spec=spec, keypair=actor_keypair(scenario.seed, spec.name))
            for spec in scenario.actors
        }
        owner_name = scenario.payment_owner or next(
            (a.name for a in scenario.actors if a.role == "renter"), scenario.actors[0].name
        )
        self.genesis = GenesisConfig(
            authorities=[self.actors[n].keypair.sign_public for n in scenario.authority_names],
            accounts=[
                GenesisAccount(
                    sign_public=actor.keypair.sign_public,
                    enc_public=actor.keypair.enc_public,
                    balance=actor.spec.balance,
                )
                for actor in self.actors.values()
            ],
            payment_owner=self.actors[owner_name].keypair.address,
            block_interval=scenario.block_interval,
            gas_price_gwei=scenario.gas_price_gwei,
        )
        self.nodes: dict[str, Node] = {
            name: Node(genesis=self.genesis, keypair=self.actors[name].keypair, name=name)
            for name in scenario.authority_names
        }
        self._forwarded = {name: set() for name in self.nodes}
        self.partitions: list[PartitionSpec] = []
        for part in scenario.partitions:
            self.inject_partition([list(g) for g in part.groups], part.start, part.end)

    # -- partitions ------------------------------------------------------------

    def inject_partition(self, groups: list[list[str]], start: int, end: int) -> None:
        if start >= end:
            raise ScenarioError("empty partition window")
        for existing in self.partitions:
            if existing.start < end and start < existing.end:
                raise ScenarioError("overlapping partition windows")
        seen: set[str] = set()
        for group in groups:
            for member in group:
                if member not in self.actors:
                    raise ScenarioError(f"unknown actor '{member}' in partition")
                if member in seen:
                    raise ScenarioError(f"actor '{member}' in two partition groups")
                seen.add(member)
        self.partitions.append(
            PartitionSpec(start=start, end=end, groups=tuple(tuple(g) for g in groups))
        )

    def _group_of(self, name: str, part: PartitionSpec) -> int:
        for i, group in enumerate(part.groups):
            if name in group:
                return i
        return len(part.groups)  # implicit remainder group

    def _cut(self, src: str, dst: str, at_ms: int) -> bool:
        seconds = at_ms / 1000
        for part in self.partitions:
            if part.start <= seconds < part.end:
                return self._group_of(src, part) != self._group_of(dst, part)
        return False

    # -- event plumbing -----------------------------------------------------------

    def _push(self, at_ms: int, event: tuple) -> None:
        heapq.heappush(self._queue, (at_ms, self._seq, event))
        self._seq += 1

    def _latency(self) -> int:
        base = self.scenario.network.base_latency_ms
        jitter = self.scenario.network.jitter_ms
        return max(base + self.rng.randint(-jitter, jitter), 1)

    def _send(self, src: str, dst: str, payload) -> None:
        if self._cut(src, dst, self.now_ms):
            return
        self._push(self.now_ms + self._latency(), ("deliver", src, dst, payload))

    def _broadcast(self, src: str, payload) -> None:
        for name in self.nodes:
            if name != src:
                self._send(src, name, payload)

    # -- run -----------------------------------------------------------------------

    def run(self) -> "SimulationReport":
        interval_ms = self.scenario.block_interval * 1000
        for t_ms in range(interval_ms, self.scenario.duration * 1000 + 1, interval_ms):
            for name in sorted(self.nodes):
                self._push(t_ms, ("tick", name))
        for action in self.scenario.actions:
            self._push(action.time * 1000, ("action", action))

        self._record_heads()
        # Ticks and actions end at the scripted duration; in-flight messages
        # drain afterwards so a quiescent network settles on one head.
        while self._queue:
            at_ms, _, event = heapq.heappop(self._queue)
            self.now_ms = at_ms
            kind = event[0]
            if kind == "tick":
                self._on_tick(event[1])
            elif kind == "action":
                self._on_action(event[1])
            elif kind == "deliver":
                self._on_deliver(event[1], event[2], event[3])
            self._record_heads()
        return build_report(self)

    # -- handlers ----------------------------------------------------------------------

    def _on_tick(self, name: str) -> None:
        node = self.nodes[name]
        block = node.maybe_propose(self.now_ms // 1000)
        if block is not None:
            self._broadcast(name, BlockMsg(block))
        self._broadcast(name, HeadAnnounce(node.head.height, node.head_hash))

    def _on_deliver(self, src: str, dst: str, payload) -> None:
        node = self.nodes.get(dst)
        if node is None:
            return
        if isinstance(payload, TxMsg):
            try:
                node.submit_transaction(payload.tx)
            except TxExcluded as exc:
                self.warnings.append(f"{dst} rejected tx from {src}: {exc.reason}")
                return
            if payload.tx.tx_hash not in self._forwarded[dst]:
                self._forwarded[dst].add(payload.tx.tx_hash)
                self._broadcast(dst, payload)
        elif isinstance(payload, BlockMsg):
            accepted = node.receive_block(payload.block)
            if accepted:
                self._broadcast(dst, payload)
            elif payload.block.header.parent_hash not in node.blocks:
                self._send(dst, src, BlockRequest(from_height=1))
        elif isinstance(payload, HeadAnnounce):
            if payload.head_hash not in node.blocks:
                self._send(dst, src, BlockRequest(from_height=node.head.height + 1))
        elif isinstance(payload, BlockRequest):
            chain = self.nodes[dst].canonical_chain()
            slice_ = tuple(b for b in chain if b.header.height >= payload.from_height)
            if slice_:
                self._send(dst, src, BlockResponse(blocks=slice_))
        elif isinstance(payload, BlockResponse):
            retry_full = False
            for block in payload.blocks:
                if block.header.parent_hash not in node.blocks and block.block_hash not in node.blocks:
                    retry_full = True
                node.receive_block(block)
            if retry_full and payload.blocks and payload.blocks[0].header.height > 1:
                self._send(dst, src, BlockRequest(from_height=1))

    def _home_of(self, actor: SimActor) -> str:
        return actor.spec.home or self.scenario.authority_names[0]

    def _submit(self, actor: SimActor, contract: Contract, function: str, args: bytes = b"", value: int = 0) -> None:
        tx = sign_transaction(
            actor.keypair,
            actor.next_nonce,
            contract,
            function,
            args,
            value=value,
            gas_price_gwei=self.scenario.gas_price_gwei,
        )
        actor.next_nonce += 1
        self.submitted[tx.tx_hash] = {
            "actor": actor.spec.name,
            "contract": contract.label,
            "function": function,
        }
        self._send(actor.spec.name, self._home_of(actor), TxMsg(tx))

    def _on_action(self, action: ActionSpec) -> None:
        actor = self.actors[action.actor]
        params = action.params
        kind = action.action
        if kind == "publish_message":
            self._submit(
                actor,
                Contract.VEHICULAR_COMMUNICATION,
                "publishMessage",
                codec.encode_bytes(str(params["content"]).encode()),
            )
        elif kind == "send_message":
            recipient = self.actors[params["to"]]
            sealed = seal(recipient.keypair.enc_public, str(params["content"]).encode(), rng=self.rng)
            self._submit(
                actor,
                Contract.VEHICULAR_COMMUNICATION,
                "sendMessage",
                recipient.keypair.address + codec.encode_bytes(sealed),
            )
        elif kind == "mark_all_read":
            self._submit(actor, Contract.VEHICULAR_COMMUNICATION, "markAllAsRead")
        elif kind == "make_payment":
            self._submit(actor, Contract.PAYMENT_MANAGEMENT, "makePayment", value=int(params["value"]))
        elif kind == "request_refund":
            self._submit(
                actor, Contract.PAYMENT_MANAGEMENT, "requestRefund", codec.encode_u64(int(params["amount"]))
            )
        elif kind == "process_refund":
            user = self.actors[params["user"]]
            self._submit(actor, Contract.PAYMENT_MANAGEMENT, "processRefund", user.keypair.address)
        elif kind == "withdraw_funds":
            self._submit(actor, Contract.PAYMENT_MANAGEMENT, "withdrawFunds")
        elif kind == "register_space":
            slots = [(int(s), int(e)) for s, e in params["slots"]]
            args = (
                codec.encode_str(str(params["location"]))
                + codec.encode_u64(int(params["rate_per_hour"]))
                + codec.encode_pairs(slots)
            )
            self._submit(actor, Contract.PARKING_SPACE_MANAGEMENT, "registerParkingSpace", args)
        elif kind == "book_space":
            from .contracts.parking import booking_fee

            start, until = int(params["from"]), int(params["until"])
            value = params.get("value")
            if value is None:
                rate = self._space_rate(int(params["space"]))
                value = booking_fee(rate, start, until)
            args = codec.encode_u64(int(params["space"])) + codec.encode_u64(start) + codec.encode_u64(until)
            self._submit(actor, Contract.PARKING_SPACE_MANAGEMENT, "bookParkingSpace", args, value=int(value))
        elif kind == "release_space":
            self._submit(
                actor, Contract.PARKING_SPACE_MANAGEMENT, "releaseParkingSpace", codec.encode_u64(int(params["space"]))
            )
        elif kind == "withdraw_space":
            self._submit(actor, Contract.PARKING_SPACE_MANAGEMENT, "withdraw", codec.encode_u64(int(params["space"])))
        elif kind == "register_metered_space":
            self._submit(
                actor,
                Contract.AUTOMATED_PARKING_PAYMENTS,
                "registerParkingSpace",
                codec.encode_u64(int(params["rate_per_second"])),
            )
        elif kind == "enter":
            self._proximity(actor, params["gateway"], start=True, space=int(params["space"]))
        elif kind == "leave":
            self._proximity(actor, params["gateway"], start=False)
        elif kind == "calculate_fee":
            self._submit(actor, Contract.AUTOMATED_PARKING_PAYMENTS, "calculateParkingFee")
        elif kind == "check_due":
            self._submit(actor, Contract.AUTOMATED_PARKING_PAYMENTS, "checkAmountDue")

    def _proximity(self, vehicle: SimActor, gateway_name: str, start: bool, space: int = 0) -> None:
        """IoT gateway notices the vehicle and relays a vehicle-signed
        startParking/endParking, but only with scripted pre-authorization."""
        gateway = self.actors[gateway_name]
        if vehicle.spec.name not in gateway.spec.authorized:
            self.warnings.append(
                f"gateway {gateway_name}: no authorization from {vehicle.spec.name}, no transaction emitted"
            )
            return
        tx = sign_transaction(
            vehicle.keypair,
            vehicle.next_nonce,
            Contract.AUTOMATED_PARKING_PAYMENTS,
            "startParking" if start else "endParking",
            codec.encode_u64(space) if start else b"",
            gas_price_gwei=self.scenario.gas_price_gwei,
        )
        vehicle.next_nonce += 1
        self.submitted[tx.tx_hash] = {
            "actor": vehicle.spec.name,
            "contract": Contract.AUTOMATED_PARKING_PAYMENTS.label,
            "function": tx.function,
            "via_gateway": gateway_name,
        }
        self._send(gateway_name, self._home_of(gateway), TxMsg(tx))

    def _space_rate(self, space_id: int) -> int:
        node = self.nodes[self.scenario.authority_names[0]]
        cells = node.state.storage[Contract.PARKING_SPACE_MANAGEMENT]
        cell = cells.get(f"space:{space_id}:rate")
        return int.from_bytes(cell[:8], "little") if cell else 0

    # -- bookkeeping ---------------------------------------------------------------

    def _record_heads(self) -> None:
        changed = False
        for name in sorted(self.nodes):
            node = self.nodes[name]
            if self._current_heads.get(name) != node.head_hash:
                self._current_heads[name] = node.head_hash
                self.head_history.append((self.now_ms, name, node.head.height, node.head_hash))
                changed = True
        if changed:
            heads = set(self._current_heads.values())
            if len(heads) == 1 and len(self._current_heads) == len(self.nodes):
                head = next(iter(heads))
                if not self._converged or self._converged[-1][1] != head:
                    self._converged.append((self.now_ms, head))


# -- report ---------------------------------------------------------------------------


@dataclass
class SimulationReport:
    scenario_name: str
    seed: int
    nodes: dict
    accounts: dict
    receipts: list
    gas_total: int
    convergence: dict
    conservation: dict
    warnings: list
    head_history: list

    def to_json(self) -> str:
        payload = {
            "scenario": self.scenario_name,
            "seed": self.seed,
            "nodes": self.nodes,
            "accounts": self.accounts,
            "receipts": self.receipts,
            "gas_total": self.gas_total,
            "convergence": self.convergence,
            "conservation": self.conservation,
            "warnings": self.warnings,
            "head_history": self.head_history,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = [f"scenario {self.scenario_name} (seed {self.seed})", ""]
        lines.append("node heads:")
        for name in sorted(self.nodes):
            info = self.nodes[name]
            lines.append(
                f"  {name}: height {info['height']} head {info['head_hash'][:16]} state {info['state_root'][:16]}"
            )
        lines.append("")
        lines.append("balances (wei):")
        for name in sorted(self.accounts):
            acct = self.accounts[name]
            lines.append(f"  {name}: {acct['balance']} (nonce {acct['nonce']})")
        lines.append("")
        lines.append(f"receipts ({len(self.receipts)}):")
        for r in self.receipts:
            lines.append(
                f"  h{r['height']}#{r['index']} {r['contract']}.{r['function']} by {r['actor']}: "
                f"{r['status']} gas={r['gas_used']}"
            )
        lines.append("")
        conv = self.convergence
        lines.append(
            f"convergence: all-equal={conv['final_heads_equal']} first={conv['first_converged_ms']}ms"
        )
        for entry in conv["post_partition"]:
            lines.append(
                f"  partition healed at {entry['healed_at_s']}s -> converged at {entry['converged_ms']}ms"
            )
        cons = self.conservation
        lines.append(
            f"conservation: supply {cons['supply']} ok={cons['ok']} heights={cons['heights_checked']}"
        )
        if self.warnings:
            lines.append("warnings:")
            lines.extend(f"  {w}" for w in self.warnings)
        lines.append("")
        return "\n".join(lines)


def build_report(sim: Simulation) -> SimulationReport:
    scenario = sim.scenario
    nodes_info = {}
    for name in sorted(sim.nodes):
        node = sim.nodes[name]
        nodes_info[name] = {
            "height": node.head.height,
            "head_hash": node.head_hash.hex(),
            "state_root": node.head.state_root.hex(),
        }

    reference = sim.nodes[scenario.authority_names[0]]
    state = reference.state
    accounts = {}
    for name in sorted(sim.actors):
        actor = sim.actors[name]
        acct = state.account(actor.keypair.address)
        accounts[name] = {
            "address": actor.keypair.address.hex(),
            "balance": acct.balance if acct else 0,
            "nonce": acct.nonce if acct else 0,
        }
    from .state import CONTRACT_ADDRESSES

    for contract in Contract:
        acct = state.account(CONTRACT_ADDRESSES[contract])
        accounts[f"contract:{contract.label}"] = {
            "address": CONTRACT_ADDRESSES[contract].hex(),
            "balance": acct.balance if acct else 0,
            "nonce": 0,
        }

    receipts = []
    gas_total = 0
    for block in reference.canonical_chain():
        block_receipts = reference.receipts[block.block_hash]
        for index, (tx, receipt) in enumerate(zip(block.transactions, block_receipts)):
            meta = sim.submitted.get(tx.tx_hash, {})
            gas_total += receipt.gas_used
            receipts.append(
                {
                    "height": block.header.height,
                    "index": index,
                    "tx_hash": tx.tx_hash.hex(),
                    "actor": meta.get("actor", "unknown"),
                    "contract": tx.contract.label,
                    "function": tx.function,
                    "status": receipt.status,
                    "revert_reason": receipt.revert_reason,
                    "gas_used": receipt.gas_used,
                    "execution_gas": receipt.execution_gas,
                    "return_value": receipt.return_value.hex(),
                }
            )

    heads = {n.head_hash for n in sim.nodes.values()}
    post_partition = []
    for part in sim.partitions:
        healed_ms = part.end * 1000
        converged = next((t for t, _ in sim._converged if t >= healed_ms), None)
        post_partition.append(
            {
                "start_s": part.start,
                "healed_at_s": part.end,
                "converged_ms": converged,
            }
        )
    convergence = {
        "final_heads_equal": len(heads) == 1,
        "first_converged_ms": sim._converged[0][0] if sim._converged else None,
        "all_converged_ms": [t for t, _ in sim._converged],
        "post_partition": post_partition,
    }

    supply = sim.genesis.genesis_supply()
    heights_checked = 0
    ok = True
    for block in reference.canonical_chain():
        total = reference.states[block.block_hash].total_supply()
        heights_checked += 1
        if total != supply:
            ok = False
    conservation = {"supply": supply, "ok": ok, "heights_checked": heights_checked}

    head_history = [
        {"at_ms": at_ms, "node": name, "height": height, "head": head.hex()}
        for at_ms, name, height, head in sim.head_history
    ]

    return SimulationReport(
        scenario_name=scenario.name,
        seed=scenario.seed,
        nodes=nodes_info,
        accounts=accounts,
        receipts=receipts,
        gas_total=gas_total,
        convergence=convergence,
        conservation=conservation,
        warnings=sim.warnings,
        head_history=head_history,
    )


def run_scenario(scenario: Scenario) -> SimulationReport:
    return Simulation(scenario).run()


def run_scenario_file(path: str | Path) -> SimulationReport:
    return run_scenario(load_scenario(path))

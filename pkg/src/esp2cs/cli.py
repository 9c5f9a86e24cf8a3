"""Operator command line: keygen, genesis, node, sim, bench-gas."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from random import Random

from .crypto import KeyPair
from .genesis import GenesisAccount, GenesisConfig

DEFAULT_BALANCE = 10**18


class KeyFileError(ValueError):
    pass


def write_key_file(path: Path, keypair: KeyPair) -> None:
    payload = {
        "seed": keypair.seed.hex(),
        "sign_public": keypair.sign_public.hex(),
        "enc_public": keypair.enc_public.hex(),
        "address": keypair.address.hex(),
    }
    path.write_text(json.dumps(payload, indent=2) + "\n")


def load_key_file(path: Path) -> KeyPair:
    try:
        data = json.loads(path.read_text())
        keypair = KeyPair(bytes.fromhex(data["seed"]))
    except (OSError, ValueError, KeyError) as exc:
        raise KeyFileError(f"cannot load key file {path}: {exc}") from exc
    for field in ("sign_public", "enc_public", "address"):
        if field in data and bytes.fromhex(data[field]) != getattr(keypair, field):
            raise KeyFileError(f"key file {path}: {field} does not match seed")
    return keypair


def cmd_keygen(args) -> int:
    rng = Random(args.seed) if args.seed is not None else None
    keypair = KeyPair.generate(rng)
    out = Path(args.out)
    write_key_file(out, keypair)
    print(f"address {keypair.address.hex()}")
    print(f"written {out}")
    return 0


def cmd_genesis(args) -> int:
    authority_keys = [load_key_file(Path(p)) for p in args.key]
    account_keys = [load_key_file(Path(p)) for p in args.account]
    seen = set()
    accounts = []
    for keypair in authority_keys + account_keys:
        if keypair.address in seen:
            continue
        seen.add(keypair.address)
        accounts.append(
            GenesisAccount(keypair.sign_public, keypair.enc_public, args.balance)
        )
    config = GenesisConfig(
        authorities=[k.sign_public for k in authority_keys],
        accounts=accounts,
        payment_owner=authority_keys[0].address
        if not account_keys
        else account_keys[0].address,
        block_interval=args.interval,
        gas_price_gwei=args.gas_price,
    )
    config.save(args.out)
    print(f"written {args.out} ({len(config.authorities)} authorities, supply {config.genesis_supply()})")
    return 0


def cmd_node(args) -> int:
    import uvicorn

    from .gateway import create_app
    from .p2p import NodeServer

    genesis = GenesisConfig.load(Path(args.genesis))
    keypair = load_key_file(Path(args.key)) if args.key else None
    if keypair is not None and keypair.sign_public not in genesis.authorities:
        print("note: key is not an authority; running as a non-proposing full node", file=sys.stderr)
    host, port = _parse_hostport(args.listen)
    peers = [_parse_hostport(p) for p in args.peers.split(",")] if args.peers else []
    server = NodeServer(
        genesis=genesis,
        keypair=keypair,
        listen=(host, port),
        peers=peers,
        block_log_path=args.data,
    )
    server.start()
    api_host, api_port = _parse_hostport(args.api)
    app = create_app(server.locked_node(), peer_liveness_fn=server.peer_liveness)
    print(f"node listening on {host}:{port}, gateway on {api_host}:{api_port}")
    try:
        uvicorn.run(app, host=api_host, port=api_port, log_level="warning")
    finally:
        server.stop()
    return 0


def cmd_sim(args) -> int:
    from .netsim import ScenarioError, load_scenario, run_scenario

    try:
        scenario = load_scenario(Path(args.scenario))
        if args.seed is not None:
            import dataclasses

            scenario = dataclasses.replace(scenario, seed=args.seed)
        report = run_scenario(scenario)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2
    rendered = report.to_json() if args.format == "json" else report.to_text()
    if args.report:
        Path(args.report).write_text(rendered)
        print(f"report written to {args.report}")
    else:
        print(rendered, end="")
    return 0


def cmd_bench_gas(args) -> int:
    from .bench import render_json, render_text, run_bench

    rows = run_bench()
    rendered = render_json(rows) if args.format == "json" else render_text(rows)
    if args.report:
        Path(args.report).write_text(rendered)
        print(f"report written to {args.report}")
    else:
        print(rendered, end="")
    out_of_band = [r for r in rows if r.flag == "OUT_OF_BAND"]
    return 1 if out_of_band else 0


def _parse_hostport(value: str) -> tuple[str, int]:
    host, _, port = value.rpartition(":")
    return host or "127.0.0.1", int(port)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="esp2cs", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="generate an account key file")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None, help="deterministic seed (tests only)")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("genesis", help="write a genesis config from key files")
    p.add_argument("--key", action="append", required=True, help="authority key file (repeatable)")
    p.add_argument("--account", action="append", default=[], help="extra funded account key file")
    p.add_argument("--balance", type=int, default=DEFAULT_BALANCE)
    p.add_argument("--interval", type=int, default=5)
    p.add_argument("--gas-price", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_genesis)

    p = sub.add_parser("node", help="run a live node with its gateway")
    p.add_argument("--genesis", required=True)
    p.add_argument("--key", default=None)
    p.add_argument("--listen", default="127.0.0.1:7701")
    p.add_argument("--peers", default="")
    p.add_argument("--api", default="127.0.0.1:8701")
    p.add_argument("--data", default=None, help="append-only block log path")
    p.set_defaults(func=cmd_node)

    p = sub.add_parser("sim", help="run a scenario deterministically")
    p.add_argument("--scenario", required=True)
    p.add_argument("--report", default=None)
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("bench-gas", help="run the contract cost bench")
    p.add_argument("--report", default=None)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_bench_gas)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KeyFileError as exc:
        print(str(exc), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

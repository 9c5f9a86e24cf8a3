"""CLI commands: keygen, genesis, sim, bench-gas, plus the live node."""

import json
import socket
import time
from pathlib import Path

import pytest

from esp2cs.cli import load_key_file, main

SCENARIOS = Path(__file__).resolve().parents[1] / "src" / "esp2cs" / "scenarios"


def test_keygen_distinct_addresses(tmp_path, capsys):
    assert main(["keygen", "--out", str(tmp_path / "a.json")]) == 0
    assert main(["keygen", "--out", str(tmp_path / "b.json")]) == 0
    a = json.loads((tmp_path / "a.json").read_text())
    b = json.loads((tmp_path / "b.json").read_text())
    assert a["address"] != b["address"]


def test_keygen_seed_reproducible(tmp_path):
    main(["keygen", "--out", str(tmp_path / "a.json"), "--seed", "9"])
    main(["keygen", "--out", str(tmp_path / "b.json"), "--seed", "9"])
    assert (tmp_path / "a.json").read_text() == (tmp_path / "b.json").read_text()


def test_key_file_round_trip(tmp_path):
    main(["keygen", "--out", str(tmp_path / "k.json"), "--seed", "3"])
    kp = load_key_file(tmp_path / "k.json")
    stored = json.loads((tmp_path / "k.json").read_text())
    assert kp.address.hex() == stored["address"]


def test_corrupt_key_file_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["keygen", "--out", str(tmp_path / "k.json"), "--seed", "3"]) == 0
    data = json.loads((tmp_path / "k.json").read_text())
    data["address"] = "00" * 20
    (tmp_path / "tampered.json").write_text(json.dumps(data))
    assert main(["genesis", "--key", str(path), "--out", str(tmp_path / "g.json")]) == 2
    assert main(["genesis", "--key", str(tmp_path / "tampered.json"),
                 "--out", str(tmp_path / "g.json")]) == 2


def test_sim_command_writes_report(tmp_path, capsys):
    report = tmp_path / "report.json"
    code = main(["sim", "--scenario", str(SCENARIOS / "lifecycle.yaml"),
                 "--report", str(report), "--format", "json"])
    assert code == 0
    payload = json.loads(report.read_text())
    assert payload["conservation"]["ok"] is True


def test_sim_rejects_malformed_scenario(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("seed: 1\nduration: [unterminated\n")
    assert main(["sim", "--scenario", str(bad)]) == 2
    assert "scenario error" in capsys.readouterr().err


def test_sim_deterministic_reports(tmp_path):
    out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
    for out in (out1, out2):
        main(["sim", "--scenario", str(SCENARIOS / "partition.yaml"),
              "--report", str(out), "--format", "json"])
    assert out1.read_bytes() == out2.read_bytes()


def test_bench_gas_command(tmp_path, capsys):
    report = tmp_path / "bench.txt"
    assert main(["bench-gas", "--report", str(report)]) == 0
    text = report.read_text()
    assert "publishMessage" in text
    assert "PAPER_ANOMALY" in text


def _free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@pytest.mark.slow
def test_live_node_produces_blocks(tmp_path, keys):
    """Single live authority over real sockets, polled via its own peering
    port by a second non-proposing node."""
    from esp2cs.p2p import NodeServer
    from conftest import make_genesis

    genesis = make_genesis(keys, 1, block_interval=1)
    p1, p2 = _free_port(), _free_port()
    auth = NodeServer(genesis, keys["auth0"], ("127.0.0.1", p1), [("127.0.0.1", p2)],
                      block_log_path=tmp_path / "auth.log", name="auth")
    observer = NodeServer(genesis, None, ("127.0.0.1", p2), [("127.0.0.1", p1)],
                          name="observer")
    auth.start()
    observer.start()
    try:
        deadline = time.time() + 15
        while time.time() < deadline:
            if observer.node.head.height >= 2:
                break
            time.sleep(0.2)
        assert auth.node.head.height >= 2, "authority never produced blocks"
        assert observer.node.head.height >= 2, "observer never synced"
        assert observer.node.head_hash in auth.node.blocks
    finally:
        auth.stop()
        observer.stop()
    # the block log replays into a fresh node
    replayed = NodeServer(genesis, None, ("127.0.0.1", _free_port()), [],
                          block_log_path=tmp_path / "auth.log", name="replay")
    assert replayed.node.head.height >= 2

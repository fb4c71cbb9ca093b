"""The ride-sharing scenario: a seeded transaction script and a runner for it."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

from ..datalog.database import Database, Delta
from ..datalog.io import delta_from_json, jsonable
from ..putback.strategy import bundled_path
from .network import ABORTED, COMMITTED, PeerNetwork, TxnResult, load_network, local_update

TOPOLOGY = "bundled:rideshare/topology.json"
SCRIPT = "bundled:rideshare/script.json"
FREE = "none"


@dataclass(frozen=True)
class ScriptTxn:
    txn_id: str
    peer: str
    kind: str
    delta: Delta
    expect: str

    def to_dict(self) -> dict:
        return {"txn_id": self.txn_id, "peer": self.peer, "kind": self.kind,
                "expect": self.expect, "delta": jsonable(self.delta)}

    @classmethod
    def from_dict(cls, d: dict) -> "ScriptTxn":
        return cls(d["txn_id"], d["peer"], d.get("kind", "update"),
                   delta_from_json(d.get("delta") or {}), d.get("expect", COMMITTED))


def load_script(path: str | Path) -> list[ScriptTxn]:
    text = str(path)
    p = bundled_path(text[len("bundled:"):]) if text.startswith("bundled:") else Path(path)
    data = json.loads(p.read_text(encoding="utf-8"))
    return [ScriptTxn.from_dict(t) for t in data.get("transactions", [])]


def dumps_script(txns: Iterable[ScriptTxn], seed: int | None = None) -> str:
    """One transaction per line, so diffs of generated scripts stay readable."""
    head = "{\n" + (f'  "seed": {seed},\n' if seed is not None else "")
    lines = ",\n".join("    " + json.dumps(t.to_dict(), sort_keys=True) for t in txns)
    return head + '  "transactions": [\n' + lines + ("\n" if lines else "") + "  ]\n}\n"


def _update(rel: str, old: tuple, new: tuple) -> Delta:
    return Delta({rel: [new]}, {rel: [old]})


class _Gen:
    def __init__(self, net: PeerNetwork, rng: random.Random) -> None:
        self.net = net
        self.rng = rng
        self.requests = 0
        self.vehicles = 0
        self.queries = 2

    def rows(self, peer: str, rel: str) -> list[tuple]:
        return self.net.peers[peer].base.sorted_rows(rel)

    def pick(self, rows: list) -> tuple | None:
        return self.rng.choice(rows) if rows else None

    def fresh_request(self) -> str:
        self.requests += 1
        return f"r{self.requests}"

    def linked(self) -> list[tuple]:
        return [r for r in self.rows("mediator", "all_vehicles") if r[0] in (1, 2)]

    def book(self):
        row = self.pick([r for r in self.linked() if r[3] == FREE])
        if row:
            return "mediator", "book", _update("all_vehicles", row, row[:3] + (self.fresh_request(),))

    def release(self):
        row = self.pick([r for r in self.linked() if r[3] != FREE])
        if row:
            return "mediator", "release", _update("all_vehicles", row, row[:3] + (FREE,))

    def provider_rid(self):
        peer = self.rng.choice(["provider1", "provider2"])
        row = self.pick(self.rows(peer, "vehicles"))
        if row:
            rid = self.fresh_request() if row[2] == FREE else FREE
            return peer, "rid_change", _update("vehicles", row, row[:2] + (rid,))

    def move(self):
        peer = self.rng.choice(["provider1", "provider2"])
        row = self.pick(self.rows(peer, "vehicles"))
        locs = [l for l, _ in self.rows(peer, "area_map") if not row or l != row[1]]
        if row and locs:
            return peer, "move", _update("vehicles", row, (row[0], self.rng.choice(locs), row[2]))

    def new_vehicle(self):
        peer = self.rng.choice(["provider1", "provider2"])
        self.vehicles += 1
        loc = self.rng.choice(self.rows(peer, "area_map"))[0]
        vid = f"{'x' if peer == 'provider1' else 'y'}{self.vehicles}"
        return peer, "new_vehicle", Delta({"vehicles": [(vid, loc, FREE)]})

    def new_request(self):
        area = self.rng.choice(["north", "centre", "south"])
        self.queries += 1
        return "mediator", "new_request", Delta({"requests": [(f"q{self.queries}", area)]})

    def rebook(self):
        row = self.pick([r for r in self.linked() if r[0] == 1 and r[3] != FREE])
        if row:
            return "mediator", "rebook", _update("all_vehicles", row, row[:3] + (self.fresh_request(),))


_KINDS: tuple[tuple[str, int], ...] = (
    ("book", 6), ("release", 3), ("provider_rid", 3), ("move", 3),
    ("new_vehicle", 1), ("new_request", 1),
)


def generate_script(network: PeerNetwork, n: int = 50, seed: int = 42,
                    reject_from: int = 25) -> list[ScriptTxn]:
    """``n`` transactions against ``network`` (left untouched).

    Mostly bookings, releases, rid changes and vehicle moves. Exactly one
    transaction, the first opportunity at or after position ``reject_from``,
    rebooks an already booked provider-1 vehicle, which provider 1 rejects.
    Every transaction is run on a copy while generating, and its recorded
    expectation is the outcome observed there.
    """
    net = network.clone()
    rng = random.Random(seed)
    gen = _Gen(net, rng)
    kinds = [k for k, _ in _KINDS]
    weights = [w for _, w in _KINDS]
    out: list[ScriptTxn] = []
    rejected = False
    while len(out) < n:
        op = None
        if not rejected and len(out) >= reject_from:
            op = gen.rebook()
            rejected = op is not None
        while op is None:
            op = getattr(gen, rng.choices(kinds, weights)[0])()
        peer, kind, delta = op
        tid = f"t{len(out) + 1:04d}"
        res = local_update(net, peer, delta, txn_id=tid)
        out.append(ScriptTxn(tid, peer, kind, delta, res.status))
    return out


@dataclass(frozen=True)
class StepRecord:
    txn: ScriptTxn
    result: TxnResult
    before: dict[str, Database]
    after: dict[str, Database]
    consistent: bool


def run_script(network: PeerNetwork, txns: Iterable[ScriptTxn],
               on_step: Callable[[StepRecord], None] | None = None) -> list[StepRecord]:
    """Run transactions in order, checking link consistency after each."""
    records = []
    for t in txns:
        before = network.state()
        res = local_update(network, t.peer, t.delta, txn_id=t.txn_id)
        rec = StepRecord(t, res, before, network.state(), network.consistent())
        records.append(rec)
        if on_step is not None:
            on_step(rec)
    return records


def rideshare_network() -> PeerNetwork:
    return load_network(TOPOLOGY)


__all__ = [
    "ABORTED",
    "COMMITTED",
    "SCRIPT",
    "TOPOLOGY",
    "ScriptTxn",
    "StepRecord",
    "dumps_script",
    "generate_script",
    "load_script",
    "rideshare_network",
    "run_script",
]

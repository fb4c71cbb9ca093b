"""Peers, Dejima links and transactional update propagation.

Each peer owns base tables. A link between two peers is a shared Dejima
table; each side holds a put strategy from its base to the table and the
derived get. Tables are never stored: ``get(B)`` is recomputed on demand.
A local update is propagated breadth-first. Each receiver translates the
table delta into a base delta through its put, and the whole transaction is
rolled back if any receiver cannot reproduce the table (PutGet fails).
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Mapping

from ..datalog.ast import Schema
from ..datalog.database import Database, Delta, apply_delta, diff
from ..datalog.io import jsonable, read_database
from ..errors import BxError, NetworkError, SchemaMismatchError
from ..incremental import inc_get, inc_put
from ..putback.derive import BxPair, derive_get
from ..putback.strategy import PutStrategy, load_strategy, resolve_path

COMMITTED = "committed"
ABORTED = "aborted"


@dataclass(frozen=True)
class DejimaLink:
    """Peer-local end of a link: the shared table, its schema and the BX to the base."""

    table: str
    schema: Schema
    bx: BxPair
    peer: str


@dataclass
class Peer:
    id: str
    base: Database
    links: dict[str, DejimaLink] = field(default_factory=dict)


@dataclass(frozen=True)
class SyncMessage:
    txn_id: str
    origin: str
    hop_path: tuple[str, ...]
    target: str
    table: str
    payload: Delta
    round: int

    def to_dict(self) -> dict:
        return {"txn_id": self.txn_id, "origin": self.origin, "path": list(self.hop_path),
                "to": self.target, "table": self.table, "round": self.round,
                "delta": jsonable(self.payload)}


class UndoLog:
    """Inverse base deltas per transaction, replayed newest first on abort."""

    def __init__(self) -> None:
        self._entries: dict[str, list[tuple[str, Delta]]] = {}

    def record(self, txn_id: str, peer: str, applied: Delta) -> None:
        self._entries.setdefault(txn_id, []).append((peer, applied.inverse()))

    def entries(self, txn_id: str) -> list[tuple[str, Delta]]:
        return list(self._entries.get(txn_id, ()))

    def undo(self, txn_id: str, network: "PeerNetwork") -> None:
        for peer, inverse in reversed(self._entries.pop(txn_id, [])):
            p = network.peers[peer]
            p.base = apply_delta(p.base, inverse, strict=True)

    def forget(self, txn_id: str) -> None:
        self._entries.pop(txn_id, None)


@dataclass(frozen=True)
class TxnResult:
    txn_id: str
    origin: str
    status: str
    deltas: tuple[tuple[str, Delta], ...]
    messages: tuple[SyncMessage, ...]
    rounds: int
    rejected_by: str | None = None
    reason: str = ""

    @property
    def committed(self) -> bool:
        return self.status == COMMITTED

    def to_dict(self) -> dict:
        out = {
            "txn_id": self.txn_id,
            "origin": self.origin,
            "outcome": self.status,
            "deltas": {p: jsonable(d) for p, d in self.deltas},
            "messages": len(self.messages),
            "rounds": self.rounds,
        }
        if self.rejected_by is not None:
            out["rejected_by"] = self.rejected_by
            out["reason"] = self.reason
        return out


class _Abort(Exception):
    def __init__(self, peer: str, reason: str) -> None:
        super().__init__(reason)
        self.peer = peer
        self.reason = reason


class PeerNetwork:
    """A set of peers and links, driven one transaction at a time."""

    def __init__(self, peers: Iterable[Peer] = ()) -> None:
        self.peers: dict[str, Peer] = {p.id: p for p in peers}
        self.undo_log = UndoLog()
        self.log: list[dict] = []
        self._next_txn = 1

    def clone(self) -> "PeerNetwork":
        """Independent copy sharing the immutable bases and links."""
        net = PeerNetwork(Peer(p.id, p.base, dict(p.links)) for p in self.peers.values())
        net._next_txn = self._next_txn
        return net

    def state(self) -> dict[str, Database]:
        return {pid: p.base for pid, p in sorted(self.peers.items())}

    def link(self, peer: str, neighbor: str) -> DejimaLink:
        try:
            return self.peers[peer].links[neighbor]
        except KeyError:
            raise NetworkError(f"no link from {peer} to {neighbor}") from None

    def links(self) -> list[tuple[str, str]]:
        """Every link once, as a sorted pair."""
        return sorted({tuple(sorted((a, b))) for a, p in self.peers.items() for b in p.links})

    def consistent(self) -> bool:
        return all(dejima_table(self, a, b) == dejima_table(self, b, a) for a, b in self.links())

    def new_txn_id(self) -> str:
        tid = f"t{self._next_txn:04d}"
        self._next_txn += 1
        return tid

    def dump_state(self) -> str:
        """Deterministic JSON of every peer's base tables."""
        return json.dumps({pid: jsonable(db) for pid, db in self.state().items()},
                          indent=2, sort_keys=True) + "\n"

    def log_text(self) -> str:
        return "".join(json.dumps(entry, sort_keys=True) + "\n" for entry in self.log)


def add_link(network: PeerNetwork, a: str, b: str, put_a: PutStrategy, put_b: PutStrategy,
             bx_a: BxPair | None = None, bx_b: BxPair | None = None) -> None:
    """Connect ``a`` and ``b`` through the view both strategies share."""
    if a == b:
        raise NetworkError(f"a peer cannot link to itself: {a}")
    for pid in (a, b):
        if pid not in network.peers:
            raise NetworkError(f"unknown peer {pid}")
    if b in network.peers[a].links:
        raise NetworkError(f"peers {a} and {b} are already linked")
    sa, sb = put_a.schema(put_a.view), put_b.schema(put_b.view)
    if put_a.view != put_b.view or sa.arity != sb.arity or sa.attrs != sb.attrs:
        raise SchemaMismatchError(f"link {a}-{b}: Dejima schemas differ: {sa} vs {sb}")
    for pid, put in ((a, put_a), (b, put_b)):
        peer = network.peers[pid]
        tables = {l.table for l in peer.links.values()}
        if put.view in peer.base or put.view in put.base:
            raise NetworkError(f"Dejima table {put.view} clashes with a base table of {pid}")
        if put.view in tables:
            raise NetworkError(f"peer {pid} already shares a table named {put.view}")
        for name in put.base:
            if name not in peer.base:
                peer.base = peer.base.with_relations({name: ()})
    bx_a = bx_a or _derived(put_a)
    bx_b = bx_b or _derived(put_b)
    network.peers[a].links[b] = DejimaLink(put_a.view, sa, bx_a, b)
    network.peers[b].links[a] = DejimaLink(put_b.view, sb, bx_b, a)


@lru_cache(maxsize=64)
def _derived(put: PutStrategy) -> BxPair:
    # derivation is pure, and topologies often reuse the same strategies
    return derive_get(put)


def dejima_table(network: PeerNetwork, peer: str, neighbor: str) -> Database:
    """``get(B_peer)`` for the table shared with ``neighbor``."""
    link = network.link(peer, neighbor)
    return link.bx.view_of(network.peers[peer].base)


def _propagate(network: PeerNetwork, txn: str, origin: str, first: list[SyncMessage],
               applied: dict[str, Delta], visited: set[str], sent: list[SyncMessage]) -> int:
    queue = deque(first)
    sent.extend(first)
    rounds = max((m.round for m in first), default=0)
    while queue:
        msg = queue.popleft()
        rounds = max(rounds, msg.round)
        j = msg.target
        if j in visited:
            path = " -> ".join((*msg.hop_path, j))
            raise _Abort(j, f"propagation loop: {path}")
        visited.add(j)
        sender = msg.hop_path[-1]
        link = network.link(j, sender)
        peer = network.peers[j]
        before = peer.base
        try:
            view = link.bx.view_of(before)
            target = apply_delta(view, msg.payload, strict=True)
            change = inc_put(link.bx, before, view, msg.payload)
            after = apply_delta(before, change, strict=True)
        except BxError as exc:
            raise _Abort(j, f"cannot apply {msg.table} update: {exc}") from None
        back = link.bx.view_of(after)
        if back != target:
            want, got = target.relation(msg.table), back.relation(msg.table)
            raise _Abort(j, f"update of {msg.table} rejected: missing "
                            f"{sorted(map(tuple, want - got))}, unexpected {sorted(map(tuple, got - want))}")
        if not change:
            continue
        peer.base = after
        network.undo_log.record(txn, j, change)
        applied[j] = change
        for k, out in sorted(peer.links.items()):
            if k in msg.hop_path:
                continue
            d = inc_get(out.bx, before, change)
            if d:
                m = SyncMessage(txn, origin, (*msg.hop_path, j), k, out.table, d, msg.round + 1)
                queue.append(m)
                sent.append(m)
    return rounds


def _outgoing(network: PeerNetwork, txn: str, origin: str, before: Database, change: Delta,
              path: tuple[str, ...], skip: Iterable[str] = ()) -> list[SyncMessage]:
    out = []
    skip = set(skip)
    for k, link in sorted(network.peers[origin].links.items()):
        if k in skip:
            continue
        d = inc_get(link.bx, before, change)
        if d:
            out.append(SyncMessage(txn, origin, (*path, origin), k, link.table, d, 1))
    return out


def _finish(network: PeerNetwork, txn: str, origin: str, applied: dict[str, Delta],
            run) -> TxnResult:
    snapshot = network.state()
    messages: list[SyncMessage] = []
    try:
        rounds = run(messages)
    except _Abort as abort:
        attempted = tuple(sorted(applied.items()))
        network.undo_log.undo(txn, network)
        if network.state() != snapshot:
            raise AssertionError("undo did not restore the pre-transaction state")
        result = TxnResult(txn, origin, ABORTED, attempted, tuple(messages), 0,
                           abort.peer, abort.reason)
    else:
        network.undo_log.forget(txn)
        result = TxnResult(txn, origin, COMMITTED, tuple(sorted(applied.items())),
                           tuple(messages), rounds)
    network.log.append(result.to_dict())
    return result


def local_update(network: PeerNetwork, peer: str, delta: Delta, txn_id: str | None = None) -> TxnResult:
    """Apply ``delta`` to ``peer``'s base and propagate it to every reachable peer.

    Returns a committed result, or an aborted one naming the rejecting peer,
    in which case every base is back to its pre-call value.
    """
    if peer not in network.peers:
        raise NetworkError(f"unknown peer {peer}")
    txn = txn_id or network.new_txn_id()
    p = network.peers[peer]
    before = p.base
    after = apply_delta(before, delta, strict=True)
    applied: dict[str, Delta] = {}

    def run(sent):
        p.base = after
        network.undo_log.record(txn, peer, delta)
        applied[peer] = delta
        first = _outgoing(network, txn, peer, before, delta, ())
        return _propagate(network, txn, peer, first, applied, {peer}, sent)

    return _finish(network, txn, peer, applied, run)


def initial_sync(network: PeerNetwork, initiator: str, neighbor: str,
                 txn_id: str | None = None) -> TxnResult:
    """Make the initiator's copy of the shared table equal to the neighbor's.

    The initiator's base changes through its put; the change then flows on to
    the initiator's other neighbors like any local update.
    """
    link = network.link(initiator, neighbor)
    txn = txn_id or network.new_txn_id()
    p = network.peers[initiator]
    before = p.base
    applied: dict[str, Delta] = {}

    def run(sent):
        current = link.bx.view_of(before)
        target = dejima_table(network, neighbor, initiator)
        if current == target:
            return 0
        try:
            change = inc_put(link.bx, before, current, diff(target, current))
            after = apply_delta(before, change, strict=True)
        except BxError as exc:
            raise _Abort(initiator, f"initial synchronization failed: {exc}") from None
        back = link.bx.view_of(after)
        if back != target:
            want, got = target.relation(link.table), back.relation(link.table)
            raise _Abort(initiator, f"initial synchronization of {link.table} rejected: missing "
                                    f"{sorted(map(tuple, want - got))}")
        p.base = after
        network.undo_log.record(txn, initiator, change)
        applied[initiator] = change
        first = _outgoing(network, txn, initiator, before, change, (neighbor,), skip=[neighbor])
        return _propagate(network, txn, initiator, first, applied, {initiator, neighbor}, sent)

    return _finish(network, txn, initiator, applied, run)


def build_network(topology: Mapping, root: str | Path = ".", sync: bool = True) -> PeerNetwork:
    """Build a network from a topology description.

    ``topology`` has ``peers`` (id -> {"base": CSV directory or JSON file, or
    "data": inline relations}) and ``links`` (each with ``table``,
    ``strategies``: peer id -> strategy path, and optional ``initiator``).
    Relative paths resolve against ``root``; ``bundled:<name>`` names a
    shipped strategy. Inconsistent links are synchronized from their
    initiator, or rejected when there is none.
    """
    root = Path(root)
    peers = []
    for pid, conf in sorted((topology.get("peers") or {}).items()):
        conf = conf or {}
        if "base" in conf:
            base = read_database(_resolve(conf["base"], root))
        else:
            base = Database({n: [tuple(r) for r in rows] for n, rows in (conf.get("data") or {}).items()})
        peers.append(Peer(pid, base))
    net = PeerNetwork(peers)
    derived: dict[Path, BxPair] = {}
    for i, link in enumerate(topology.get("links") or []):
        strategies = link.get("strategies") or {}
        if len(strategies) != 2:
            raise NetworkError(f"link {i} must name exactly two peers")
        (a, pa), (b, pb) = sorted(strategies.items())
        puts = []
        for path in (pa, pb):
            resolved = _resolve(path, root)
            if resolved not in derived:
                derived[resolved] = _derived(load_strategy(resolved))
            puts.append(derived[resolved])
        table = link.get("table")
        for bx in puts:
            if table is not None and bx.view != table:
                raise SchemaMismatchError(f"link {a}-{b}: strategy view {bx.view} is not {table}")
        add_link(net, a, b, puts[0].put, puts[1].put, puts[0], puts[1])
    if sync:
        for link in topology.get("links") or []:
            a, b = sorted(link["strategies"])
            if dejima_table(net, a, b) == dejima_table(net, b, a):
                continue
            initiator = link.get("initiator")
            if initiator is None:
                raise NetworkError(f"link {a}-{b} is inconsistent and names no initiator")
            other = b if initiator == a else a
            res = initial_sync(net, initiator, other)
            if not res.committed:
                raise NetworkError(f"initial synchronization of {a}-{b} failed: {res.reason}")
    net.log.clear()
    net._next_txn = 1
    return net


def _resolve(path: str, root: Path) -> Path:
    p = resolve_path(path)
    if str(path).startswith("bundled:") or p.is_absolute():
        return p
    return root / p


def load_network(path: str | Path, sync: bool = True) -> PeerNetwork:
    path = resolve_path(path)
    topology = json.loads(Path(path).read_text(encoding="utf-8"))
    return build_network(topology, Path(path).parent, sync=sync)

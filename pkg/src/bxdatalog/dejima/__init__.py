"""Peer-to-peer data sharing through updatable Dejima tables."""

from .network import (
    ABORTED,
    COMMITTED,
    DejimaLink,
    Peer,
    PeerNetwork,
    SyncMessage,
    TxnResult,
    UndoLog,
    add_link,
    build_network,
    dejima_table,
    initial_sync,
    load_network,
    local_update,
)

__all__ = [
    "ABORTED",
    "COMMITTED",
    "DejimaLink",
    "Peer",
    "PeerNetwork",
    "SyncMessage",
    "TxnResult",
    "UndoLog",
    "add_link",
    "build_network",
    "dejima_table",
    "initial_sync",
    "load_network",
    "local_update",
]

"""Registration handshake accounting for cluster-boundary crossings.

When a sensor migrates into a cluster, the cluster head asks its zonal
gateway to identify the node. A node arriving from a cluster of the same
zone takes the fast path (the gateway already holds every cluster head's
information); a node whose home prefix points at another zone requires the
gateway to query that zone's gateway, doubling the wire messages and using
the full authentication path. Outcomes record the exact messages, hop count,
latency and bytes so runs can charge and compare signaling costs.

Nothing here moves packets for real: entities are ids, links are latency
constants, and authentication is a counted delay.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import AdmissionDeferred, DomainError, RegistrationRefused
from .world import (Cluster, Position, SensorNode, Zone, home_prefix,
                    split_prefix, zone_of_cluster)


class MessageKind(Enum):
    ID_REQ = "ID_REQ"
    REQ_ACK = "REQ_ACK"
    REGISTER = "REGISTER"
    CACHE_UPDATE = "CACHE_UPDATE"


@dataclass(frozen=True)
class ProtocolMessage:
    kind: MessageKind
    sender: str
    receiver: str
    payload_bytes: int
    includes_position: bool = False

    def __post_init__(self):
        if self.kind is MessageKind.REQ_ACK and not self.includes_position:
            raise DomainError("REQ_ACK must carry the node information")

    @property
    def is_transmission(self) -> bool:
        """Local commits are recorded with sender == receiver."""
        return self.sender != self.receiver


@dataclass
class CacheEntry:
    node_id: int
    home_prefix: str
    position: Position
    owning_ch: str
    timestamp: int


@dataclass
class RegistrationOutcome:
    path: str                       # "intra_zone" | "inter_zone"
    auth: str                       # "fast" | "full"
    messages: list[ProtocolMessage]
    node_signal: ProtocolMessage
    cache_commits: list[ProtocolMessage] = field(default_factory=list)
    latency_ms: float = 0.0

    @property
    def hops(self) -> int:
        return sum(1 for m in self.messages if m.is_transmission)

    @property
    def total_bytes(self) -> int:
        wire = sum(m.payload_bytes for m in self.messages if m.is_transmission)
        return wire + self.node_signal.payload_bytes

    def log_line(self, step: int, node_id: int) -> str:
        return (f"step={step} node={node_id} path={self.path} "
                f"hops={self.hops} latency_ms={self.latency_ms:g} "
                f"bytes={self.total_bytes}")


@dataclass(frozen=True)
class ProtocolParams:
    link_latency_ms: float = 2.0
    auth_fast_ms: float = 1.0
    auth_full_ms: float = 4.0

    def validate(self) -> None:
        for name in ("link_latency_ms", "auth_fast_ms", "auth_full_ms"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be non-negative")


class NetworkCaches:
    """Cluster-head and gateway caches, keyed by cluster and zone ids."""

    def __init__(self, zones: list[Zone], clusters: list[Cluster]):
        self.ch: dict[int, dict[int, CacheEntry]] = {c.id: {} for c in clusters}
        self.gz: dict[int, dict[int, CacheEntry]] = {z.id: {} for z in zones}


def lookup_cache(cache: dict[int, CacheEntry],
                 node_id: int) -> CacheEntry | None:
    """Most recent entry for the node, or None on a miss."""
    return cache.get(node_id)


def registration_latency(outcome: RegistrationOutcome, link_latency_ms: float,
                         auth_fast_ms: float, auth_full_ms: float) -> float:
    """Per-hop link latency plus the authentication processing time."""
    if min(link_latency_ms, auth_fast_ms, auth_full_ms) < 0:
        raise DomainError("latency constants must be non-negative")
    auth = auth_fast_ms if outcome.auth == "fast" else auth_full_ms
    return outcome.hops * link_latency_ms + auth


def register_node(node: SensorNode, new_cluster: Cluster, zones: list[Zone],
                  caches: NetworkCaches, packet_size: int,
                  params: ProtocolParams | None = None,
                  timestamp: int = 0) -> RegistrationOutcome:
    """Run the arrival handshake for a node joining ``new_cluster``.

    Same-zone origins take the two-message fast path through the local
    gateway; cross-zone origins add the neighbour-gateway identity exchange
    (four messages, full authentication). On success the node's home prefix
    is rewritten to the new cluster and the destination cluster head and
    gateway caches are updated in one transaction.

    Raises RegistrationRefused when no gateway knows the node's home prefix
    and AdmissionDeferred when the destination cluster is at its maximum.
    """
    if params is None:
        params = ProtocolParams()
    params.validate()
    if not node.alive:
        raise DomainError(f"node {node.id} is dead and cannot register")

    origin_zone_id, origin_cluster_id = split_prefix(node.home_prefix)
    zone_ids = {z.id for z in zones}
    if origin_zone_id not in zone_ids:
        raise RegistrationRefused(
            f"home prefix {node.home_prefix!r} names no reachable gateway")
    origin_zone = next(z for z in zones if z.id == origin_zone_id)
    if origin_cluster_id not in origin_zone.clusters:
        raise RegistrationRefused(
            f"home prefix {node.home_prefix!r} unknown at every gateway")

    if new_cluster.size() >= new_cluster.max_threshold:
        raise AdmissionDeferred(
            f"cluster {new_cluster.id} is at its maximum threshold")

    dest_zone = zone_of_cluster(zones, new_cluster.id)
    ch = f"ch{new_cluster.id}"
    gz = f"gz{dest_zone.id}"
    node_entity = f"sn{node.id}"

    if origin_zone_id == dest_zone.id:
        path, auth = "intra_zone", "fast"
        messages = [
            ProtocolMessage(MessageKind.ID_REQ, ch, gz, packet_size),
            ProtocolMessage(MessageKind.REQ_ACK, gz, ch, packet_size,
                            includes_position=True),
        ]
    else:
        path, auth = "inter_zone", "full"
        neighbor = f"gz{origin_zone_id}"
        messages = [
            ProtocolMessage(MessageKind.ID_REQ, ch, gz, packet_size),
            ProtocolMessage(MessageKind.ID_REQ, gz, neighbor, packet_size),
            ProtocolMessage(MessageKind.REQ_ACK, neighbor, gz, packet_size,
                            includes_position=True),
            ProtocolMessage(MessageKind.REQ_ACK, gz, ch, packet_size,
                            includes_position=True),
        ]

    node_signal = ProtocolMessage(MessageKind.REGISTER, node_entity, ch,
                                  packet_size, includes_position=True)
    commits = [
        ProtocolMessage(MessageKind.CACHE_UPDATE, ch, ch, 0),
        ProtocolMessage(MessageKind.CACHE_UPDATE, gz, gz, 0),
    ]

    outcome = RegistrationOutcome(path=path, auth=auth, messages=messages,
                                  node_signal=node_signal,
                                  cache_commits=commits)
    outcome.latency_ms = registration_latency(
        outcome, params.link_latency_ms, params.auth_fast_ms,
        params.auth_full_ms)

    # commit: prefix rewrite plus both caches in the same transaction
    node.home_prefix = home_prefix(dest_zone.id, new_cluster.id)
    node.registered = True
    entry = CacheEntry(node_id=node.id, home_prefix=node.home_prefix,
                       position=node.position, owning_ch=ch,
                       timestamp=timestamp)
    caches.ch[new_cluster.id][node.id] = entry
    caches.gz[dest_zone.id][node.id] = entry
    return outcome

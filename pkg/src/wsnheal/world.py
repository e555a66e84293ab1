"""Domain model of the sensor field.

Positions are continuous meters over a rectangular field. The field is split
into a grid of rectangular zones, each owning a gateway and a fixed set of
clusters; cluster heads are infrastructure anchor points, not sensors. Grid
indices for the coverage map are always derived from positions, never stored
on nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigError, DomainError


@dataclass(frozen=True)
class Position:
    x: float
    y: float

    def distance_to(self, other: "Position") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Velocity:
    vx: float
    vy: float

    @property
    def magnitude(self) -> float:
        return math.hypot(self.vx, self.vy)


@dataclass
class SensorNode:
    """A mobile sensing unit.

    A dead node (alive=False) contributes no coverage and never moves.
    ``home_prefix`` names the zone/cluster the node is registered to, e.g.
    ``"z0.c2"``; ``registered`` mirrors the proxy-registration flag bit.
    """

    id: int
    position: Position
    velocity: Velocity = Velocity(0.0, 0.0)
    energy: float = 0.0
    home_prefix: str = ""
    alive: bool = True
    registered: bool = False


def home_prefix(zone_id: int, cluster_id: int) -> str:
    return f"z{zone_id}.c{cluster_id}"


def split_prefix(prefix: str) -> tuple[int, int]:
    """Parse a home prefix back into (zone_id, cluster_id)."""
    try:
        zone_part, cluster_part = prefix.split(".")
        return int(zone_part[1:]), int(cluster_part[1:])
    except (ValueError, IndexError) as exc:
        raise DomainError(f"malformed home prefix: {prefix!r}") from exc


@dataclass
class Cluster:
    """Administrative membership container anchored at a head position.

    Membership order matters: balancing policies move "the first member".
    Thresholds bound the member count the balancer aims for.
    """

    id: int
    head_position: Position
    members: list[int] = field(default_factory=list)
    min_threshold: int = 1
    max_threshold: int = 2

    def size(self) -> int:
        return len(self.members)


@dataclass
class Zone:
    id: int
    gateway_id: str
    clusters: list[int] = field(default_factory=list)


@dataclass(frozen=True)
class FieldConfig:
    """Geometry and radio constants of the monitored field."""

    field_width: float = 220.0
    field_height: float = 220.0
    sensing_radius: float = 5.0
    transmission_range: float = 5.0
    grid_cell_size: float = 2.0
    packet_size: int = 2048
    initial_energy: float = 6.0
    tx_power: float = 1.18e-3
    rng_seed: int = 0

    def validate(self) -> None:
        for name in ("field_width", "field_height", "sensing_radius",
                     "transmission_range", "grid_cell_size"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be strictly positive")
        if self.packet_size <= 0:
            raise ConfigError("packet_size must be strictly positive")
        if self.initial_energy <= 0:
            raise ConfigError("initial_energy must be strictly positive")
        if self.tx_power <= 0:
            raise ConfigError("tx_power must be strictly positive")
        for dim, name in ((self.field_width, "field_width"),
                          (self.field_height, "field_height")):
            cells = dim / self.grid_cell_size
            if abs(cells - round(cells)) > 1e-9:
                raise ConfigError(
                    f"grid_cell_size {self.grid_cell_size} does not divide "
                    f"{name} {dim} evenly")

    @property
    def width_cells(self) -> int:
        return round(self.field_width / self.grid_cell_size)

    @property
    def height_cells(self) -> int:
        return round(self.field_height / self.grid_cell_size)

    def in_bounds(self, p: Position) -> bool:
        return 0.0 <= p.x <= self.field_width and 0.0 <= p.y <= self.field_height


def nearest_cluster_head(p: Position, heads: list[Position]) -> int:
    """Index of the head closest to ``p``; ties break to the lowest index."""
    if not heads:
        raise DomainError("nearest_cluster_head: empty head list")
    best = 0
    best_d = p.distance_to(heads[0])
    for i, h in enumerate(heads[1:], start=1):
        d = p.distance_to(h)
        if d < best_d:
            best, best_d = i, d
    return best


def build_layout(config: FieldConfig, zones_x: int, zones_y: int,
                 clusters_per_zone: int, min_threshold: int,
                 max_threshold: int) -> tuple[list[Zone], list[Cluster]]:
    """Partition the field into zone rectangles with interior cluster anchors.

    Cluster anchors are placed on an evenly spaced interior grid of each zone
    rectangle (row-major, first ``clusters_per_zone`` points of the smallest
    square grid that fits them). Cluster ids are global and consecutive.
    """
    if zones_x < 1 or zones_y < 1 or clusters_per_zone < 1:
        raise ConfigError("zone and cluster counts must be at least 1")
    if min_threshold >= max_threshold:
        raise ConfigError("min_threshold must be below max_threshold")

    side = math.ceil(math.sqrt(clusters_per_zone))
    zone_w = config.field_width / zones_x
    zone_h = config.field_height / zones_y

    zones: list[Zone] = []
    clusters: list[Cluster] = []
    for zy in range(zones_y):
        for zx in range(zones_x):
            zone_id = zy * zones_x + zx
            zone = Zone(id=zone_id, gateway_id=f"gz{zone_id}")
            x0, y0 = zx * zone_w, zy * zone_h
            for k in range(clusters_per_zone):
                row, col = divmod(k, side)
                # interior points: offsets (i + 1/2) / side across the zone
                hx = x0 + (col + 0.5) * zone_w / side
                hy = y0 + (row + 0.5) * zone_h / side
                cluster = Cluster(id=len(clusters),
                                  head_position=Position(hx, hy),
                                  min_threshold=min_threshold,
                                  max_threshold=max_threshold)
                zone.clusters.append(cluster.id)
                clusters.append(cluster)
            zones.append(zone)
    return zones, clusters


def zone_of_cluster(zones: list[Zone], cluster_id: int) -> Zone:
    for zone in zones:
        if cluster_id in zone.clusters:
            return zone
    raise DomainError(f"cluster {cluster_id} belongs to no zone")


def validate_field(nodes: list[SensorNode], clusters: list[Cluster],
                   zones: list[Zone], config: FieldConfig,
                   max_step: float | None = None) -> list[str]:
    """Check every structural invariant; return all violations found.

    Violations are data, not exceptions: an empty list means the field is
    consistent.
    """
    violations: list[str] = []

    seen_ids: set[int] = set()
    for node in nodes:
        if node.id in seen_ids:
            violations.append(f"duplicate node id {node.id}")
        seen_ids.add(node.id)
        if not config.in_bounds(node.position):
            violations.append(
                f"node {node.id} out of bounds at "
                f"({node.position.x:g}, {node.position.y:g})")
        if node.energy < 0:
            violations.append(f"node {node.id} has negative energy")
        if node.energy == 0 and node.alive:
            violations.append(f"node {node.id} has zero energy but is alive")
        if max_step is not None and node.velocity.magnitude > max_step + 1e-9:
            violations.append(
                f"node {node.id} velocity exceeds max step {max_step:g}")

    membership: dict[int, int] = {}
    for cluster in clusters:
        if cluster.min_threshold >= cluster.max_threshold:
            violations.append(
                f"cluster {cluster.id} thresholds not ordered "
                f"({cluster.min_threshold} >= {cluster.max_threshold})")
        for member in cluster.members:
            if member in membership:
                violations.append(
                    f"node {member} listed in clusters "
                    f"{membership[member]} and {cluster.id}")
            else:
                membership[member] = cluster.id
            if member not in seen_ids:
                violations.append(
                    f"cluster {cluster.id} lists unknown node {member}")

    owners: dict[int, int] = {}
    for zone in zones:
        for cid in zone.clusters:
            if cid in owners:
                violations.append(
                    f"cluster {cid} owned by zones {owners[cid]} and {zone.id}")
            else:
                owners[cid] = zone.id
    for cluster in clusters:
        if cluster.id not in owners:
            violations.append(f"cluster {cluster.id} belongs to no zone")

    return violations

"""Threshold-driven cluster load balancing.

Planning is pure: ``manage_cluster_load`` inspects a snapshot and returns a
``MigrationPlan``; callers decide when to apply it. One balancing pass emits
at most one move per violating cluster, tracking sizes against the growing
plan so later decisions see earlier moves. Donors are "suitable" only if they
stay at or above the minimum threshold after giving a sensor away.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DomainError
from .world import Cluster


@dataclass(frozen=True)
class Move:
    sensor_id: int
    source_cluster: int
    target_cluster: int


@dataclass
class MigrationPlan:
    moves: list[Move] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.moves)

    def is_empty(self) -> bool:
        return not self.moves


def add_sensor(cluster: Cluster, sensor_id: int,
               all_clusters: list[Cluster] | None = None) -> None:
    """Append a sensor to the member list; membership must be unique."""
    scope = all_clusters if all_clusters is not None else [cluster]
    for c in scope:
        if sensor_id in c.members:
            raise DomainError(
                f"sensor {sensor_id} already a member of cluster {c.id}")
    cluster.members.append(sensor_id)


def remove_sensor(cluster: Cluster, index: int) -> int:
    """Remove and return the member at ``index``; later members shift down."""
    if not 0 <= index < len(cluster.members):
        raise DomainError(
            f"index {index} out of range for cluster {cluster.id} "
            f"of size {len(cluster.members)}")
    return cluster.members.pop(index)


def move_sensor(source: Cluster, target: Cluster, index: int) -> int:
    """Remove from source at ``index`` and append to target; returns the id."""
    sensor_id = remove_sensor(source, index)
    target.members.append(sensor_id)
    return sensor_id


def find_target_cluster(clusters: list[Cluster]) -> int:
    """Index of the cluster with the fewest sensors (lowest index on ties)."""
    if not clusters:
        raise DomainError("find_target_cluster: empty cluster list")
    sizes = [c.size() for c in clusters]
    return sizes.index(min(sizes))


def find_source_cluster(clusters: list[Cluster]) -> int:
    """Index of the cluster with the most sensors (lowest index on ties)."""
    if not clusters:
        raise DomainError("find_source_cluster: empty cluster list")
    sizes = [c.size() for c in clusters]
    return sizes.index(max(sizes))


def manage_cluster_load(clusters: list[Cluster], min_threshold: int,
                        max_threshold: int) -> MigrationPlan:
    """One balancing pass over the clusters in index order.

    Over-max clusters push their first member to the currently smallest
    cluster; under-min clusters pull the first member of the currently
    largest cluster when that donor stays >= min_threshold. Infeasible pulls
    are skipped, never errors.
    """
    if min_threshold >= max_threshold:
        raise DomainError("min_threshold must be below max_threshold")

    sizes = [c.size() for c in clusters]
    # how many of each cluster's original members the plan already takes
    taken = [0] * len(clusters)
    plan = MigrationPlan()

    def first_member(idx: int) -> int | None:
        c = clusters[idx]
        if taken[idx] < len(c.members):
            sensor = c.members[taken[idx]]
            taken[idx] += 1
            return sensor
        return None

    def argmin_size(exclude: int) -> int | None:
        best, best_size = None, None
        for i, sz in enumerate(sizes):
            if i == exclude:
                continue
            if best_size is None or sz < best_size:
                best, best_size = i, sz
        return best

    def argmax_size(exclude: int) -> int | None:
        best, best_size = None, None
        for i, sz in enumerate(sizes):
            if i == exclude:
                continue
            if best_size is None or sz > best_size:
                best, best_size = i, sz
        return best

    for i in range(len(clusters)):
        if sizes[i] > max_threshold:
            target = argmin_size(exclude=i)
            # receiver must not be pushed past the maximum itself
            if target is None or sizes[target] + 1 > max_threshold:
                continue
            sensor = first_member(i)
            if sensor is None:
                continue
            plan.moves.append(Move(sensor, clusters[i].id, clusters[target].id))
            sizes[i] -= 1
            sizes[target] += 1
        elif sizes[i] < min_threshold:
            source = argmax_size(exclude=i)
            if source is None or sizes[source] - 1 < min_threshold:
                continue
            sensor = first_member(source)
            if sensor is None:
                continue
            plan.moves.append(Move(sensor, clusters[source].id, clusters[i].id))
            sizes[source] -= 1
            sizes[i] += 1
    return plan


def apply_plan(clusters: list[Cluster], plan: MigrationPlan) -> None:
    """Execute a plan's membership moves in order."""
    by_id = {c.id: c for c in clusters}
    for move in plan.moves:
        source = by_id[move.source_cluster]
        target = by_id[move.target_cluster]
        if move.sensor_id not in source.members:
            raise DomainError(
                f"plan names sensor {move.sensor_id} absent from cluster "
                f"{move.source_cluster}")
        move_sensor(source, target, source.members.index(move.sensor_id))


def run_to_stability(clusters: list[Cluster], min_threshold: int,
                     max_threshold: int, max_rounds: int) -> int:
    """Plan and apply passes until a pass plans nothing; returns rounds used."""
    if max_rounds < 1:
        raise DomainError("max_rounds must be at least 1")
    for round_no in range(1, max_rounds + 1):
        plan = manage_cluster_load(clusters, min_threshold, max_threshold)
        if plan.is_empty():
            return round_no
        apply_plan(clusters, plan)
    return max_rounds

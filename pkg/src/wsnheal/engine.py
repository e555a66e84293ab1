"""Deterministic discrete-step scenario runner.

A run builds the field, kills the requested number of nodes in one test
cluster, then drives detection, cluster-load management, registration,
migration walking and hole recovery until the test cluster's catchment
shows zero uncovered cells (or the step budget runs out).

Time is unitless: the step counter advances by one for every simultaneous
movement iteration (recovery steps and migration walking) and by the
step-converted latency of each registration, so the reported recovery time
grows with both travel distance and signaling delay. Identical scenario and
seed give bit-identical metrics.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import clustering
from .coverage import CoverageState, coverage_fraction, nearest_head_cells
from .energy import (CostCoefficients, EnergyLedger, computational_cost,
                     transmission_energy)
from .errors import (AdmissionDeferred, ConfigError, DomainError,
                     InvariantViolation)
from .protocol import NetworkCaches, ProtocolParams, register_node
from .relocation import (ForceParams, RecoveryParams, _bordering,
                         _hole_components, apply_velocity_step, initial_deploy,
                         recover_holes_hybrid, step_toward)
from .ssoa import SsoaParams, ssoa_recover
from .world import (Cluster, FieldConfig, Position, SensorNode, Zone,
                    build_layout, home_prefix, nearest_cluster_head,
                    validate_field, zone_of_cluster)

PROTOCOLS = ("hybrid", "ssoa")
PLACEMENTS = ("uniform_in_test_cluster", "concentrated")
CSV_HEADER = ("protocol,axis_value,seed,T_r,coverage,mean_dist_m,"
              "energy_frac,comp_cost,reg_intra,reg_inter")


@dataclass
class SimParams:
    """Every tunable constant of the simulator, in one bundle."""

    force: ForceParams = field(default_factory=ForceParams)
    recovery: RecoveryParams = field(default_factory=RecoveryParams)
    protocol: ProtocolParams = field(default_factory=ProtocolParams)
    coeff: CostCoefficients = field(default_factory=CostCoefficients)
    proc_rate: float = 1e6          # ops/sec in the cost formula
    bandwidth: float = 31250.0      # bytes/sec in the cost formula
    bitrate: float = 250_000.0      # radio bits/sec for tx energy
    e_move: float = 0.01            # joules per meter moved
    sensing_energy_per_step: float = 1e-4
    cost_to_joule: float = 1e-5
    neighbor_entry_bytes: int = 32
    ms_per_step: float = 1.0        # converts latency into stalled steps
    migrate_nearest: bool = True    # pick the donor member nearest the target
    coverage_model: str = "disk"


@dataclass
class Scenario:
    field: FieldConfig = dataclasses.field(default_factory=FieldConfig)
    zones_x: int = 1
    zones_y: int = 1
    clusters_per_zone: int = 5
    nodes_per_zone: int = 674
    min_threshold: int = 124
    max_threshold: int = 135
    protocol: str = "hybrid"
    holes_to_inject: int = 0
    hole_placement: str = "uniform_in_test_cluster"
    rng_seed: int = 1
    max_steps: int = 20000
    test_cluster: int = 0
    params: SimParams = dataclasses.field(default_factory=SimParams)

    def validate(self) -> None:
        self.field.validate()
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"unknown protocol {self.protocol!r}")
        if self.hole_placement not in PLACEMENTS:
            raise ConfigError(f"unknown hole placement {self.hole_placement!r}")
        if self.min_threshold >= self.max_threshold:
            raise ConfigError("min_threshold must be below max_threshold")
        if self.min_threshold < 0:
            raise ConfigError("min_threshold must be non-negative")
        if self.nodes_per_zone < 1:
            raise ConfigError("nodes_per_zone must be at least 1")
        if self.zones_x < 1 or self.zones_y < 1 or self.clusters_per_zone < 1:
            raise ConfigError("zone and cluster counts must be at least 1")
        if self.holes_to_inject < 0:
            raise ConfigError("holes_to_inject must be non-negative")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be at least 1")
        n_clusters = self.zones_x * self.zones_y * self.clusters_per_zone
        if not 0 <= self.test_cluster < n_clusters:
            raise ConfigError("test_cluster index out of range")

    def fingerprint(self) -> str:
        """Identity of the run ignoring the protocol under test."""
        p = self.params
        ident = (
            self.field, self.zones_x, self.zones_y, self.clusters_per_zone,
            self.nodes_per_zone, self.min_threshold, self.max_threshold,
            self.holes_to_inject, self.hole_placement, self.rng_seed,
            self.max_steps, self.test_cluster,
            p.force, p.recovery, p.protocol, p.coeff, p.proc_rate,
            p.bandwidth, p.bitrate, p.e_move, p.sensing_energy_per_step,
            p.cost_to_joule, p.neighbor_entry_bytes, p.ms_per_step,
            p.migrate_nearest, p.coverage_model,
        )
        return hashlib.sha1(repr(ident).encode()).hexdigest()


@dataclass
class ScenarioMetrics:
    recovery_time_steps: int
    final_coverage_fraction: float
    mean_distance_moved: float
    mean_node_energy_spent_fraction: float
    total_computational_cost: float       # node-attributed cost units
    registrations_intra: int
    registrations_inter: int
    network_computational_cost: float = 0.0
    total_latency_ms: float = 0.0
    protocol_bytes: int = 0
    recovered: bool = False
    fingerprint: str = ""
    seed: int = 0
    axis_value: float = 0.0
    protocol: str = ""


class _World:
    """Mutable state of one run."""

    def __init__(self, scenario: Scenario):
        s = scenario
        self.scenario = s
        self.zones, self.clusters = build_layout(
            s.field, s.zones_x, s.zones_y, s.clusters_per_zone,
            s.min_threshold, s.max_threshold)
        self.heads = [c.head_position for c in self.clusters]

        count = s.nodes_per_zone * s.zones_x * s.zones_y
        pos = initial_deploy(count, s.field, s.rng_seed, s.params.force)
        self.nodes = [SensorNode(id=i, position=Position(float(x), float(y)),
                                 energy=s.field.initial_energy)
                      for i, (x, y) in enumerate(pos)]
        self.by_id = {n.id: n for n in self.nodes}
        self._assign_clusters()

        self.caches = NetworkCaches(self.zones, self.clusters)
        self.catchment = nearest_head_cells(s.field, self.heads)
        self.region = self.catchment == s.test_cluster

    def _assign_clusters(self) -> None:
        """Nearest head with spare capacity, in node id order."""
        s = self.scenario
        for node in self.nodes:
            order = sorted(range(len(self.heads)),
                           key=lambda k: (node.position.distance_to(
                               self.heads[k]), k))
            chosen = None
            for k in order:
                if self.clusters[k].size() < s.max_threshold:
                    chosen = k
                    break
            if chosen is None:
                chosen = order[0]     # every cluster full: nearest anyway
            self.clusters[chosen].members.append(node.id)
            zone = zone_of_cluster(self.zones, chosen)
            node.home_prefix = home_prefix(zone.id, chosen)
            node.registered = True

    def live_members(self, cluster: Cluster) -> list[SensorNode]:
        return [self.by_id[i] for i in cluster.members if self.by_id[i].alive]

    def prune_dead(self) -> None:
        for cluster in self.clusters:
            cluster.members = [i for i in cluster.members
                               if self.by_id[i].alive]

    def live_nodes(self) -> list[SensorNode]:
        return [n for n in self.nodes if n.alive]


def inject_holes(world: _World, n: int, placement: str, seed: int) -> list[int]:
    """Kill ``n`` nodes of the test cluster; returns the ids killed."""
    s = world.scenario
    cluster = world.clusters[s.test_cluster]
    members = world.live_members(cluster)
    if n > len(members):
        raise DomainError(
            f"cannot inject {n} holes into a cluster of {len(members)} "
            "live nodes")
    if n == 0:
        return []
    rng = np.random.default_rng(np.random.SeedSequence((seed, 1)))
    if placement == "uniform_in_test_cluster":
        picks = rng.choice(len(members), size=n, replace=False)
        victims = [members[int(i)] for i in picks]
    elif placement == "concentrated":
        cx = rng.uniform(0.0, s.field.field_width)
        cy = rng.uniform(0.0, s.field.field_height)
        members.sort(key=lambda m: (m.position.distance_to(Position(cx, cy)),
                                    m.id))
        victims = members[:n]
    else:
        raise DomainError(f"unknown hole placement {placement!r}")
    for node in victims:
        node.alive = False
    world.prune_dead()
    return sorted(v.id for v in victims)


def _member_for_move(world: _World, move: clustering.Move) -> SensorNode:
    """The donor member that physically migrates for a planned move."""
    source = next(c for c in world.clusters if c.id == move.source_cluster)
    if not world.scenario.params.migrate_nearest:
        return world.by_id[move.sensor_id]
    dest_head = world.clusters[move.target_cluster].head_position
    members = world.live_members(source)
    return min(members, key=lambda m: (m.position.distance_to(dest_head), m.id))


def _plan_migrations(world: _World) -> list[clustering.Move]:
    """Per-zone balancing first, then pulls from neighbouring zones."""
    s = world.scenario
    moves: list[clustering.Move] = []
    for zone in world.zones:
        zone_clusters = [world.clusters[c] for c in zone.clusters]
        plan = clustering.manage_cluster_load(
            zone_clusters, s.min_threshold, s.max_threshold)
        moves.extend(plan.moves)

    if s.zones_x * s.zones_y > 1:
        planned_sources = {m.source_cluster for m in moves}
        planned_targets = {m.target_cluster for m in moves}
        for zone in world.zones:
            zr, zc = divmod(zone.id, s.zones_x)
            neighbor_clusters: list[Cluster] = []
            for other in world.zones:
                orow, ocol = divmod(other.id, s.zones_x)
                if abs(orow - zr) + abs(ocol - zc) == 1:
                    neighbor_clusters.extend(
                        world.clusters[c] for c in other.clusters)
            for cid in zone.clusters:
                cluster = world.clusters[cid]
                if (cluster.size() >= s.min_threshold
                        or cid in planned_targets):
                    continue
                donors = [c for c in neighbor_clusters
                          if c.size() - 1 >= s.min_threshold
                          and c.id not in planned_sources and c.members]
                if not donors:
                    continue
                donor = max(donors, key=lambda c: (c.size(), -c.id))
                moves.append(clustering.Move(donor.members[0], donor.id, cid))
                planned_sources.add(donor.id)
                planned_targets.add(cid)
    return moves


class _Run:
    """Execution state and accounting for one scenario run."""

    def __init__(self, scenario: Scenario, trace_sink=None):
        scenario.validate()
        self.s = scenario
        self.p = scenario.params
        self.world = _World(scenario)
        self.ledger = EnergyLedger()
        for node in self.world.nodes:
            self.ledger.track(node)
        self.steps = 0
        self.node_cost = 0.0
        self.network_cost = 0.0
        self.latency_ms = 0.0
        self.bytes_total = 0
        self.reg_intra = 0
        self.reg_inter = 0
        self.distance: dict[int, float] = {}
        self.migrants: list[tuple[SensorNode, int]] = []  # node, dest cluster
        self.trace_sink = trace_sink

    # -- bookkeeping ------------------------------------------------------

    def _advance(self, steps: int) -> None:
        """Advance the clock and charge per-step sensing energy."""
        if steps <= 0:
            return
        self.steps += steps
        joules = steps * self.p.sensing_energy_per_step
        for node in self.world.nodes:
            if node.alive:
                self.ledger.charge(node, joules, "sensing")

    def _add_distance(self, per_node: dict[int, float]) -> None:
        for node_id, d in per_node.items():
            self.distance[node_id] = self.distance.get(node_id, 0.0) + d

    def _node_cost(self, data_bytes: float, overhead: float = 1.0) -> float:
        return computational_cost(self.p.coeff, data_bytes, self.p.proc_rate,
                                  self.p.bandwidth, overhead)

    def _trace(self, iteration: int, moves, holes_left: int) -> None:
        if self.trace_sink is None:
            return
        base = self.steps
        for node_id, x, y in moves:
            self.trace_sink(
                f"{base + iteration},{node_id},{x:.10g},{y:.10g},{holes_left}")

    # -- hybrid protocol --------------------------------------------------

    def _register_and_walk(self, state: CoverageState) -> bool:
        """Execute one round of planned migrations; True if any happened."""
        s, p = self.s, self.p
        moves = _plan_migrations(self.world)
        executed = False
        for move in moves:
            node = _member_for_move(self.world, move)
            dest = self.world.clusters[move.target_cluster]
            try:
                outcome = register_node(node, dest, self.world.zones,
                                        self.world.caches, s.field.packet_size,
                                        p.protocol, timestamp=self.steps)
            except AdmissionDeferred:
                continue
            source = self.world.clusters[move.source_cluster]
            clustering.move_sensor(source, dest,
                                   source.members.index(node.id))
            executed = True

            if outcome.path == "intra_zone":
                self.reg_intra += 1
            else:
                self.reg_inter += 1
            self.latency_ms += outcome.latency_ms
            self.bytes_total += outcome.total_bytes
            self._advance(math.ceil(outcome.latency_ms / p.ms_per_step))

            signal_bytes = outcome.node_signal.payload_bytes
            self.ledger.charge(
                node, transmission_energy(signal_bytes, s.field.tx_power,
                                          p.bitrate), "transmission")
            self.node_cost += self._node_cost(signal_bytes)
            wire = sum(m.payload_bytes for m in outcome.messages)
            self.network_cost += self._node_cost(wire, overhead=outcome.hops)

            entry = self.world.caches.ch[dest.id].get(node.id)
            zone = zone_of_cluster(self.world.zones, dest.id)
            gz_entry = self.world.caches.gz[zone.id].get(node.id)
            if entry is None or gz_entry is None or entry != gz_entry:
                raise InvariantViolation(
                    f"cache mismatch after registering node {node.id}")
            self.migrants.append((node, dest.id))
        if self.migrants:
            self._walk_migrants(state)
        return executed

    def _walk_migrants(self, state: CoverageState) -> None:
        """Advance en-route migrants with guarded steps toward the holes.

        All migrants step together; each parallel sweep costs one step.
        A migrant arrives when it borders a hole of its destination
        catchment (or there is nothing left to border).
        """
        s, p = self.s, self.p
        while self.migrants and self.steps < s.max_steps:
            comps = _hole_components(state, self.world.region)
            if not comps:
                self.migrants.clear()
                return
            largest = max(comps, key=lambda c: int(c[0].sum()))
            mask, centroid = largest

            still_walking: list[tuple[SensorNode, int]] = []
            moved_any = False
            for node, dest in sorted(self.migrants, key=lambda m: m[0].id):
                if not node.alive:
                    continue
                if any(_bordering([node], m, state) for m, _ in comps):
                    continue
                v = step_toward(node.position, centroid, p.recovery.move_step)
                if v.vx == 0.0 and v.vy == 0.0:
                    continue
                new = apply_velocity_step(node.position, v, 1.0,
                                          bounds=s.field)
                if state.move_opens_hole(node.position, new):
                    still_walking.append((node, dest))
                    continue
                dist = node.position.distance_to(new)
                state.apply_move(node.position, new)
                node.position = new
                self._add_distance({node.id: dist})
                self.ledger.charge(node, dist * p.e_move, "movement")
                if not node.alive:
                    state.remove_disk(new.x, new.y)
                    continue
                moved_any = True
                still_walking.append((node, dest))
            self.migrants = still_walking
            if not self.migrants:
                return
            if not moved_any:
                return           # all blocked; retry next round
            self._advance(1)

    def _run_hybrid(self) -> None:
        s, p = self.s, self.p
        state = CoverageState(s.field)
        for node in self.world.live_nodes():
            state.add_disk(node.position.x, node.position.y)

        while self.steps < s.max_steps:
            holes_before = state.hole_cell_count(self.world.region)
            if holes_before == 0:
                break
            self.world.prune_dead()
            dist_before = sum(self.distance.values())
            migrated = self._register_and_walk(state)

            budget = min(p.recovery.max_iterations,
                         s.max_steps - self.steps)
            if budget < 1:
                break
            movers = self.world.live_members(
                self.world.clusters[s.test_cluster])
            params = replace(p.recovery, max_iterations=budget,
                             e_move=p.e_move)
            result = recover_holes_hybrid(
                movers, self.world.live_nodes(), s.field, params,
                self.ledger, self.world.region, state=state,
                on_iteration=self._trace)
            self._advance(result.iterations_used)
            self._add_distance(result.per_node_distance)
            self.network_cost += result.iterations_used * self._node_cost(
                len(movers) * p.neighbor_entry_bytes)

            holes_after = state.hole_cell_count(self.world.region)
            if holes_after > holes_before and not result.deaths:
                raise InvariantViolation(
                    "hole count grew without a node death "
                    f"({holes_before} -> {holes_after})")
            if result.recovered:
                break
            if not migrated and sum(self.distance.values()) == dist_before:
                break            # stalemate: nothing can change any more

        # network side also ran the detection passes on the grid
        self.network_cost += self._node_cost(
            self.s.field.width_cells * self.s.field.height_cells)

    # -- baseline protocol ------------------------------------------------

    def _run_ssoa(self) -> None:
        s, p = self.s, self.p
        ssoa_params = SsoaParams(
            force=p.force, coeff=p.coeff, proc_rate=p.proc_rate,
            bandwidth=p.bandwidth, e_move=p.e_move,
            cost_to_joule=p.cost_to_joule,
            neighbor_entry_bytes=p.neighbor_entry_bytes)
        rng = np.random.default_rng(np.random.SeedSequence((s.rng_seed, 2)))
        while self.steps < s.max_steps:
            result = ssoa_recover(self.world.nodes, s.field, ssoa_params,
                                  self.ledger, self.world.region, rng)
            self._advance(result.iterations_used)
            self._add_distance(result.per_node_distance)
            self.node_cost += result.node_cost_units
            if result.recovered:
                break
            if result.total_distance_moved == 0.0:
                break

    # -- entry point ------------------------------------------------------

    def execute(self) -> ScenarioMetrics:
        s = self.s
        violations = validate_field(self.world.nodes, self.world.clusters,
                                    self.world.zones, s.field)
        if violations:
            raise InvariantViolation("; ".join(violations))

        inject_holes(self.world, s.holes_to_inject, s.hole_placement,
                     s.rng_seed)
        alive_at_start = [n.id for n in self.world.live_nodes()]

        state = CoverageState(s.field)
        for node in self.world.live_nodes():
            state.add_disk(node.position.x, node.position.y)
        if state.hole_cell_count(self.world.region) > 0:
            if s.protocol == "hybrid":
                self._run_hybrid()
            else:
                self._run_ssoa()

        live = self.world.live_nodes()
        final = CoverageState(s.field)
        for node in live:
            final.add_disk(node.position.x, node.position.y)
        coverage = coverage_fraction(final.covered_map(), self.world.region)
        recovered = final.hole_cell_count(self.world.region) == 0

        movers = [d for d in self.distance.values() if d > 0]
        fractions = [self.ledger.spent_fraction(i) for i in alive_at_start]
        return ScenarioMetrics(
            recovery_time_steps=min(self.steps, s.max_steps),
            final_coverage_fraction=coverage,
            mean_distance_moved=(sum(movers) / len(movers)) if movers else 0.0,
            mean_node_energy_spent_fraction=(
                sum(fractions) / len(fractions)) if fractions else 0.0,
            total_computational_cost=self.node_cost,
            registrations_intra=self.reg_intra,
            registrations_inter=self.reg_inter,
            network_computational_cost=self.network_cost,
            total_latency_ms=self.latency_ms,
            protocol_bytes=self.bytes_total,
            recovered=recovered,
            fingerprint=s.fingerprint(),
            seed=s.rng_seed,
            axis_value=float(s.holes_to_inject),
            protocol=s.protocol,
        )


def run_scenario(scenario: Scenario, trace_sink=None) -> ScenarioMetrics:
    """Run one scenario to completion; deterministic in (scenario, seed)."""
    return _Run(scenario, trace_sink).execute()


def sweep(base: Scenario, axis: str, values: list[float],
          protocols: list[str] | None = None) -> list[ScenarioMetrics]:
    """One run per (value, protocol); run seeds derive as seed + value index.

    ``axis`` is either ``holes`` (holes_to_inject) or ``density``
    (nodes_per_zone). Matched protocols at the same value share a seed so
    their runs are directly comparable.
    """
    if axis not in ("holes", "density"):
        raise ConfigError(f"unknown sweep axis {axis!r}")
    if not values:
        raise ConfigError("sweep needs at least one value")
    if protocols is None:
        protocols = list(PROTOCOLS)
    for proto in protocols:
        if proto not in PROTOCOLS:
            raise ConfigError(f"unknown protocol {proto!r}")

    rows: list[ScenarioMetrics] = []
    for index, value in enumerate(values):
        for proto in protocols:
            if axis == "holes":
                scenario = replace(base, holes_to_inject=int(value),
                                   protocol=proto,
                                   rng_seed=base.rng_seed + index)
            else:
                scenario = replace(base, nodes_per_zone=int(value),
                                   protocol=proto,
                                   rng_seed=base.rng_seed + index)
            metrics = run_scenario(scenario)
            metrics.axis_value = float(value)
            rows.append(metrics)
    return rows


def _fmt(value: float) -> str:
    return f"{value:.10g}"


def results_to_csv(rows: list[ScenarioMetrics]) -> str:
    """Fixed-column CSV for sweep results; column order is stable."""
    lines = [CSV_HEADER]
    for m in rows:
        lines.append(",".join([
            m.protocol,
            _fmt(m.axis_value),
            str(m.seed),
            str(m.recovery_time_steps),
            _fmt(m.final_coverage_fraction),
            _fmt(m.mean_distance_moved),
            _fmt(m.mean_node_energy_spent_fraction),
            _fmt(m.total_computational_cost),
            str(m.registrations_intra),
            str(m.registrations_inter),
        ]))
    return "\n".join(lines) + "\n"

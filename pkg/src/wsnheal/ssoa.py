"""Node-side self-organising baseline used for comparison runs.

The baseline repairs holes in two tiers. First every node bordering a hole
makes exactly one move of at most one sensing radius toward the hole
centroid. If holes remain, the whole node population is redeployed with the
virtual-force relaxation, which reconstructs the entire layout. All hole
detection, target computation and force arithmetic is performed by the
nodes themselves, so unlike the network-controlled scheme the corresponding
processing energy and computational cost land on the node ledgers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .coverage import CoverageState, coverage_counts
from .energy import (CostCoefficients, EnergyLedger, computational_cost,
                     movement_energy)
from .errors import ComparisonInvalid
from .relocation import (ForceParams, apply_velocity_step, force_relaxation,
                         step_toward, _bordering, _hole_components)
from .world import FieldConfig, Position, SensorNode


@dataclass
class SsoaParams:
    """Baseline constants; the force law is shared with deployment."""

    force: ForceParams = field(default_factory=ForceParams)
    coeff: CostCoefficients = field(default_factory=CostCoefficients)
    proc_rate: float = 1e6
    bandwidth: float = 31250.0
    e_move: float = 0.01
    cost_to_joule: float = 1e-5
    neighbor_entry_bytes: int = 32


@dataclass
class SsoaResult:
    iterations_used: int = 0
    recovered: bool = False
    total_distance_moved: float = 0.0
    per_node_distance: dict[int, float] = field(default_factory=dict)
    residual_holes: int = 0
    tiers_used: str = "single_tier"        # or "global_redeploy"
    node_processing_charges: float = 0.0   # joules
    node_cost_units: float = 0.0           # computational-cost units


def _neighbor_bytes(nodes: list[SensorNode], config: FieldConfig,
                    entry_bytes: int) -> dict[int, int]:
    """Per-node neighbour-table size within transmission range."""
    live = [n for n in nodes if n.alive]
    if not live:
        return {}
    pos = np.array([[n.position.x, n.position.y] for n in live])
    tree = cKDTree(pos)
    counts = tree.query_ball_point(pos, r=config.transmission_range,
                                   return_length=True)
    return {n.id: int(c - 1) * entry_bytes for n, c in zip(live, counts)}


def ssoa_recover(nodes: list[SensorNode], config: FieldConfig,
                 params: SsoaParams | None = None,
                 ledger: EnergyLedger | None = None,
                 region: np.ndarray | None = None,
                 rng: np.random.Generator | None = None) -> SsoaResult:
    """One detection/repair cycle of the node-side baseline.

    Phase 1 charges every live node for its own hole detection and moves
    each hole-bordering node once. Phase 2, entered only when holes remain,
    redeploys every live node by force relaxation, charging movement and
    per-round force computation to the nodes.
    """
    if params is None:
        params = SsoaParams()
    if ledger is None:
        ledger = EnergyLedger()
    if rng is None:
        rng = np.random.default_rng(0)

    result = SsoaResult()
    state = CoverageState(config)
    live = [n for n in nodes if n.alive]
    for n in live:
        state.add_disk(n.position.x, n.position.y)

    if state.hole_cell_count(region) == 0:
        result.recovered = True
        return result

    def charge_processing(node: SensorNode, data_bytes: float,
                          rounds: float = 1.0) -> None:
        units = rounds * computational_cost(params.coeff, data_bytes,
                                            params.proc_rate,
                                            params.bandwidth, overhead=1.0)
        result.node_cost_units += units
        joules = units * params.cost_to_joule
        result.node_processing_charges += min(joules, node.energy)
        ledger.charge(node, joules, "processing")

    # every node runs its own detection pass
    table_bytes = _neighbor_bytes(live, config, params.neighbor_entry_bytes)
    for node in live:
        charge_processing(node, table_bytes.get(node.id, 0))

    # phase 1: one bounded move per bordering node, no second chances
    comps = _hole_components(state, region)
    scheduled: list[tuple[SensorNode, object]] = []
    seen: set[int] = set()
    for mask, centroid in comps:
        for node in _bordering(live, mask, state):
            if node.id not in seen:
                seen.add(node.id)
                scheduled.append((node, centroid))
    scheduled.sort(key=lambda pair: pair[0].id)

    for node, centroid in scheduled:
        charge_processing(node, table_bytes.get(node.id, 0))
        if not node.alive:
            continue
        v = step_toward(node.position, centroid, config.sensing_radius)
        if v.vx == 0.0 and v.vy == 0.0:
            continue
        new = apply_velocity_step(node.position, v, 1.0, bounds=config)
        dist = node.position.distance_to(new)
        state.apply_move(node.position, new)
        node.position = new
        result.per_node_distance[node.id] = dist
        result.total_distance_moved += dist
        ledger.charge(node, movement_energy(dist, params.e_move), "movement")
        if not node.alive:
            state.remove_disk(new.x, new.y)
    result.iterations_used += 1

    if state.hole_cell_count(region) == 0:
        result.recovered = True
        result.residual_holes = 0
        return result

    # phase 2: full redeployment, everyone moves and everyone computes
    result.tiers_used = "global_redeploy"
    movers = [n for n in live if n.alive]
    pos = np.array([[n.position.x, n.position.y] for n in movers])

    def covered(positions: np.ndarray, _round: int) -> bool:
        counts = coverage_counts(positions, config)
        holes = counts == 0
        if region is not None:
            holes = holes & region
        return not holes.any()

    new_pos, travelled, rounds = force_relaxation(
        pos, config, params.force, rng, stop_when=covered)
    for node, (x, y), dist in zip(movers, new_pos, travelled):
        node.position = Position(float(x), float(y))
        if dist > 0:
            result.per_node_distance[node.id] = \
                result.per_node_distance.get(node.id, 0.0) + float(dist)
            result.total_distance_moved += float(dist)
            ledger.charge(node, movement_energy(float(dist), params.e_move),
                          "movement")
        charge_processing(node, table_bytes.get(node.id, 0), rounds=rounds)
    result.iterations_used += rounds

    final = coverage_counts(
        np.array([[n.position.x, n.position.y] for n in nodes if n.alive]),
        config)
    holes = final == 0
    if region is not None:
        holes = holes & region
    result.residual_holes = int(holes.sum())
    result.recovered = result.residual_holes == 0
    return result


@dataclass
class ComparisonRow:
    """Paired metrics of a matched hybrid/baseline run with ratios."""

    axis_value: float
    seed: int
    hybrid_recovery_steps: float
    ssoa_recovery_steps: float
    hybrid_coverage: float
    ssoa_coverage: float
    hybrid_energy_fraction: float
    ssoa_energy_fraction: float
    hybrid_cost: float
    ssoa_cost: float
    recovery_ratio: float | None = None
    coverage_ratio: float | None = None
    energy_ratio: float | None = None
    cost_ratio: float | None = None


def _ratio(a: float, b: float) -> float | None:
    if b == 0:
        return None
    return a / b


def compare_runs(hybrid, ssoa) -> ComparisonRow:
    """Pair two runs of the same scenario; refuse mismatched fingerprints."""
    if hybrid.fingerprint != ssoa.fingerprint:
        raise ComparisonInvalid(
            "runs come from different scenarios "
            f"({hybrid.fingerprint[:12]} vs {ssoa.fingerprint[:12]})")
    row = ComparisonRow(
        axis_value=getattr(hybrid, "axis_value", 0.0),
        seed=hybrid.seed,
        hybrid_recovery_steps=hybrid.recovery_time_steps,
        ssoa_recovery_steps=ssoa.recovery_time_steps,
        hybrid_coverage=hybrid.final_coverage_fraction,
        ssoa_coverage=ssoa.final_coverage_fraction,
        hybrid_energy_fraction=hybrid.mean_node_energy_spent_fraction,
        ssoa_energy_fraction=ssoa.mean_node_energy_spent_fraction,
        hybrid_cost=hybrid.total_computational_cost,
        ssoa_cost=ssoa.total_computational_cost,
    )
    row.recovery_ratio = _ratio(row.hybrid_recovery_steps,
                                row.ssoa_recovery_steps)
    row.coverage_ratio = _ratio(row.hybrid_coverage, row.ssoa_coverage)
    row.energy_ratio = _ratio(row.hybrid_energy_fraction,
                              row.ssoa_energy_fraction)
    row.cost_ratio = _ratio(row.hybrid_cost, row.ssoa_cost)
    return row

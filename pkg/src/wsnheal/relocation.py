"""Physical node movement: virtual-force deployment and hole recovery.

Deployment treats nodes as charged particles: pairs repel below a spacing
threshold and attract above it, while field edges push inward within a
margin. Hole recovery is the iterative scheme run from the network side:
every node bordering a hole component steps a small fixed distance toward
the component centroid, re-evaluating coverage each iteration, until the
hole is gone or the iteration budget runs out.

A move is allowed only if it does not drop any currently covered cell to
zero disks. This guard is what makes the hole-cell count non-increasing
while rescuers close in; a blocked node simply waits for its neighbours to
take up the slack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .coverage import FOUR_CONNECTED, CoverageState
from .energy import EnergyLedger, movement_energy
from .errors import DomainError
from .world import FieldConfig, Position, SensorNode, Velocity


@dataclass(frozen=True)
class ForceVector:
    fx: float
    fy: float

    def __add__(self, other: "ForceVector") -> "ForceVector":
        return ForceVector(self.fx + other.fx, self.fy + other.fy)

    @property
    def magnitude(self) -> float:
        return math.hypot(self.fx, self.fy)


@dataclass
class ForceParams:
    """Constants of the virtual-force law and its relaxation loop.

    ``spacing`` is the zero-force pair distance; None resolves to
    sqrt(3) * sensing_radius, the disk-packing spacing for 1-coverage.
    ``interaction_cutoff`` limits which pairs interact during relaxation,
    the way only neighbouring charged particles matter. None resolves to
    the spacing itself, i.e. only sub-spacing neighbours push each other
    apart; that is the one setting stable at every density (any wider
    attraction band lets the accumulated pull of outer shells outweigh
    single-shell repulsion once a swarm is compressed, and the layout
    collapses instead of spreading). A non-positive value disables the
    cutoff so the full attract/repel law acts across any distance, which
    is the right mode for few-body equilibrium studies. ``jitter`` is the
    initial scale of the annealed random nudge that shakes the relaxation
    out of saddle points; it decays to zero halfway through the round
    budget so equilibria still settle.
    """

    spacing: float | None = None
    attract_gain: float = 1.0
    repel_gain: float = 1.0
    boundary_gain: float = 2.0
    boundary_margin: float | None = None
    gain: float = 0.2
    step_cap: float = 1.0
    epsilon: float = 1e-3
    max_rounds: int = 500
    interaction_cutoff: float | None = None
    jitter: float = 0.1

    def resolved_cutoff(self, config: FieldConfig) -> float | None:
        if self.interaction_cutoff is None:
            return 1.5 * self.resolved_spacing(config)
        if self.interaction_cutoff <= 0:
            return None                      # explicit global interactions
        return self.interaction_cutoff

    def resolved_spacing(self, config: FieldConfig) -> float:
        return self.spacing if self.spacing is not None \
            else math.sqrt(3.0) * config.sensing_radius

    def resolved_margin(self, config: FieldConfig) -> float:
        return self.boundary_margin if self.boundary_margin is not None \
            else config.sensing_radius


@dataclass
class RecoveryParams:
    move_step: float = 0.5
    max_iterations: int = 500
    e_move: float = 0.01


@dataclass
class RecoveryResult:
    iterations_used: int
    recovered: bool
    total_distance_moved: float
    per_node_distance: dict[int, float] = field(default_factory=dict)
    residual_holes: int = 0
    deaths: list[int] = field(default_factory=list)


def pairwise_virtual_force(a: Position, b: Position, d_threshold: float,
                           k_att: float = 1.0,
                           k_rep: float = 1.0) -> ForceVector:
    """Force exerted on ``a`` by ``b`` along the pair line.

    Repulsive (away from b) below the threshold distance, attractive (toward
    b) above it, zero exactly at it. Coincident pairs are outside the
    contract; the relaxation loop resolves them with a seeded direction.
    """
    d = a.distance_to(b)
    if d == 0.0:
        raise DomainError("pairwise_virtual_force: coincident positions")
    ux, uy = (b.x - a.x) / d, (b.y - a.y) / d
    if d < d_threshold:
        mag = -k_rep * (d_threshold - d)      # push a away from b
    elif d > d_threshold:
        mag = k_att * (d - d_threshold)       # pull a toward b
    else:
        return ForceVector(0.0, 0.0)
    return ForceVector(mag * ux, mag * uy)


def boundary_force(p: Position, config: FieldConfig, margin: float,
                   k_b: float = 2.0) -> ForceVector:
    """Inward push from every field edge closer than ``margin``; edges add."""
    fx = fy = 0.0
    if p.x < margin:
        fx += k_b * (margin - p.x)
    if config.field_width - p.x < margin:
        fx -= k_b * (margin - (config.field_width - p.x))
    if p.y < margin:
        fy += k_b * (margin - p.y)
    if config.field_height - p.y < margin:
        fy -= k_b * (margin - (config.field_height - p.y))
    return ForceVector(fx, fy)


def apply_velocity_step(p: Position, v: Velocity, dt: float,
                        bounds: FieldConfig | None = None) -> Position:
    """Kinematic update p + v * dt, clamped to the field when bounds given."""
    x = p.x + v.vx * dt
    y = p.y + v.vy * dt
    if bounds is not None:
        x = min(max(x, 0.0), bounds.field_width)
        y = min(max(y, 0.0), bounds.field_height)
    return Position(x, y)


def step_toward(p: Position, target: Position, step: float) -> Velocity:
    """Velocity that advances min(step, remaining distance) toward target."""
    if step <= 0:
        raise DomainError("step must be positive")
    d = p.distance_to(target)
    if d == 0.0:
        return Velocity(0.0, 0.0)
    scale = min(step, d) / d
    return Velocity((target.x - p.x) * scale, (target.y - p.y) * scale)


def _sum_forces(pos: np.ndarray, config: FieldConfig, params: ForceParams,
                rng: np.random.Generator) -> np.ndarray:
    """Vectorised pair + boundary force sum for every node."""
    n = len(pos)
    spacing = params.resolved_spacing(config)
    margin = params.resolved_margin(config)
    forces = np.zeros((n, 2))

    if n > 1:
        diff = pos[:, None, :] - pos[None, :, :]       # j -> i direction
        d = np.sqrt((diff ** 2).sum(axis=2))
        np.fill_diagonal(d, np.inf)
        coincident = d < 1e-9
        safe_d = np.where(d < 1e-9, 1.0, d)
        # positive magnitude = repulsion (along diff), negative = attraction
        mag = np.where(d < spacing,
                       params.repel_gain * (spacing - d),
                       -params.attract_gain * (d - spacing))
        cutoff = params.resolved_cutoff(config)
        if cutoff is not None:
            mag = np.where(d > cutoff, 0.0, mag)
        mag = np.where(np.isfinite(d), mag, 0.0)
        mag = np.where(coincident, 0.0, mag)
        forces += ((mag / safe_d)[:, :, None] * diff).sum(axis=1)

        # coincident pairs: fixed-magnitude repulsion in a seeded direction
        ci, cj = np.nonzero(np.triu(coincident, k=1))
        for i, j in zip(ci, cj):
            theta = rng.uniform(0.0, 2.0 * math.pi)
            push = params.repel_gain * spacing
            forces[i] += [push * math.cos(theta), push * math.sin(theta)]
            forces[j] -= [push * math.cos(theta), push * math.sin(theta)]

    forces[:, 0] += np.where(pos[:, 0] < margin,
                             params.boundary_gain * (margin - pos[:, 0]), 0.0)
    forces[:, 0] -= np.where(config.field_width - pos[:, 0] < margin,
                             params.boundary_gain
                             * (margin - (config.field_width - pos[:, 0])), 0.0)
    forces[:, 1] += np.where(pos[:, 1] < margin,
                             params.boundary_gain * (margin - pos[:, 1]), 0.0)
    forces[:, 1] -= np.where(config.field_height - pos[:, 1] < margin,
                             params.boundary_gain
                             * (margin - (config.field_height - pos[:, 1])), 0.0)
    return forces


def force_relaxation(pos: np.ndarray, config: FieldConfig,
                     params: ForceParams, rng: np.random.Generator,
                     stop_when=None):
    """Iterate capped force steps until quiescent, capped, or stopped.

    Returns (positions, per-node cumulative distance, rounds used). The
    optional ``stop_when(positions, round_no)`` callback ends the loop early,
    which lets callers stop as soon as e.g. coverage is restored.
    """
    pos = np.array(pos, dtype=float)
    travelled = np.zeros(len(pos))
    rounds = 0
    anneal_until = max(1, params.max_rounds // 2)
    for rounds in range(1, params.max_rounds + 1):
        forces = _sum_forces(pos, config, params, rng)
        disp = forces * params.gain
        scale = params.jitter * max(0.0, 1.0 - rounds / anneal_until)
        if scale > 0.0:
            disp += rng.normal(0.0, scale, size=disp.shape)
        norms = np.sqrt((disp ** 2).sum(axis=1))
        over = norms > params.step_cap
        if over.any():
            disp[over] *= (params.step_cap / norms[over])[:, None]
            norms[over] = params.step_cap
        new = np.clip(pos + disp,
                      [0.0, 0.0],
                      [config.field_width, config.field_height])
        travelled += np.sqrt(((new - pos) ** 2).sum(axis=1))
        pos = new
        if norms.max(initial=0.0) < params.epsilon:
            break
        if stop_when is not None and stop_when(pos, rounds):
            break
    return pos, travelled, rounds


def initial_deploy(count: int, config: FieldConfig, rng_seed: int,
                   params: ForceParams | None = None) -> np.ndarray:
    """Seeded random scatter relaxed by virtual forces; deterministic."""
    if count < 1:
        raise DomainError("count must be at least 1")
    if params is None:
        params = ForceParams()
    rng = np.random.default_rng(np.random.SeedSequence((rng_seed, 0)))
    pos = rng.uniform([0.0, 0.0],
                      [config.field_width, config.field_height],
                      size=(count, 2))
    pos, _, _ = force_relaxation(pos, config, params, rng)
    return pos


def _hole_components(state: CoverageState, region: np.ndarray | None):
    """Label uncovered cells; keep components touching the region."""
    uncovered = state.counts == 0
    labels, n = ndimage.label(uncovered, structure=FOUR_CONNECTED)
    if n == 0:
        return []
    keep = range(1, n + 1)
    if region is not None:
        present = np.unique(labels[region & uncovered])
        keep = [int(k) for k in present if k != 0]
    comps = []
    for k in keep:
        mask = labels == k
        ij = np.argwhere(mask)
        centroid = Position(float((ij[:, 0] + 0.5).mean() * state.cell_size),
                            float((ij[:, 1] + 0.5).mean() * state.cell_size))
        comps.append((mask, centroid))
    return comps


def _bordering(nodes: list[SensorNode], mask: np.ndarray,
               state: CoverageState) -> list[SensorNode]:
    """Live nodes whose disk reaches a covered cell 4-adjacent to the hole."""
    ring = ndimage.binary_dilation(mask, structure=FOUR_CONNECTED) & ~mask
    ring &= state.counts > 0
    ij = np.argwhere(ring)
    if len(ij) == 0:
        return []
    centers = (ij + 0.5) * state.cell_size
    out = []
    r2 = state.radius * state.radius + 1e-12
    for node in nodes:
        if not node.alive:
            continue
        d2 = ((centers[:, 0] - node.position.x) ** 2
              + (centers[:, 1] - node.position.y) ** 2)
        if (d2 <= r2).any():
            out.append(node)
    return out


def recover_holes_hybrid(movers: list[SensorNode],
                         field_nodes: list[SensorNode],
                         config: FieldConfig,
                         params: RecoveryParams | None = None,
                         ledger: EnergyLedger | None = None,
                         region: np.ndarray | None = None,
                         state: CoverageState | None = None,
                         on_iteration=None) -> RecoveryResult:
    """Iteratively walk hole-bordering movers onto the hole centroids.

    ``movers`` is the candidate rescuer pool (typically one cluster's
    members); coverage is evaluated over all of ``field_nodes``. ``region``
    optionally restricts which holes count, e.g. to one cluster's catchment.
    Stops at zero holes, at the iteration budget, or as soon as an iteration
    produces no movement (nothing can change after that).
    """
    if params is None:
        params = RecoveryParams()
    if params.max_iterations < 1:
        raise DomainError("max_iterations must be at least 1")
    if ledger is None:
        ledger = EnergyLedger()

    if state is None:
        state = CoverageState(config)
        for n in field_nodes:
            if n.alive:
                state.add_disk(n.position.x, n.position.y)

    per_node: dict[int, float] = {}
    deaths: list[int] = []
    result = RecoveryResult(iterations_used=0, recovered=False,
                            total_distance_moved=0.0,
                            per_node_distance=per_node)

    if state.hole_cell_count(region) == 0:
        result.recovered = True
        return result

    for _ in range(params.max_iterations):
        comps = _hole_components(state, region)
        if not comps:
            result.recovered = True
            break

        scheduled: list[tuple[SensorNode, Position]] = []
        seen: set[int] = set()
        for mask, centroid in comps:
            for node in _bordering(movers, mask, state):
                if node.id not in seen:
                    seen.add(node.id)
                    scheduled.append((node, centroid))
        scheduled.sort(key=lambda pair: pair[0].id)

        moved_any = False
        for node, target in scheduled:
            v = step_toward(node.position, target, params.move_step)
            if v.vx == 0.0 and v.vy == 0.0:
                continue
            new = apply_velocity_step(node.position, v, 1.0, bounds=config)
            if state.move_opens_hole(node.position, new):
                continue
            dist = node.position.distance_to(new)
            state.apply_move(node.position, new)
            node.position = new
            per_node[node.id] = per_node.get(node.id, 0.0) + dist
            result.total_distance_moved += dist
            ledger.charge(node, movement_energy(dist, params.e_move),
                          "movement")
            if not node.alive:
                state.remove_disk(new.x, new.y)
                deaths.append(node.id)
            moved_any = True

        result.iterations_used += 1
        if on_iteration is not None:
            on_iteration(result.iterations_used,
                         [(n.id, n.position.x, n.position.y)
                          for n, _ in scheduled],
                         state.hole_cell_count(region))
        if state.hole_cell_count(region) == 0:
            result.recovered = True
            break
        if not moved_any:
            break

    result.residual_holes = state.hole_cell_count(region)
    result.deaths = deaths
    if result.recovered:
        result.residual_holes = 0
    return result

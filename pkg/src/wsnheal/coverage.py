"""Grid coverage map and sensing-hole identification.

The field is discretised into square cells; a cell counts as covered when at
least one live node's sensing disk reaches the cell center. Holes are the
uncovered cells, grouped into 4-connected components so the relocation layer
has a movement target (the component centroid).

Two marking models exist: ``disk`` (default, distance test against cell
centers) and ``node_cell`` (mark only the single cell containing each node,
kept for fidelity testing against the coarser bookkeeping variant).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ConfigError, DomainError
from .world import FieldConfig, Position, SensorNode

FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=int)


@dataclass
class CoverageMap:
    """Boolean occupancy grid; ``cells[i, j]`` is column i (x), row j (y)."""

    width_cells: int
    height_cells: int
    cell_size: float
    cells: np.ndarray

    def cell_center(self, i: int, j: int) -> Position:
        return Position((i + 0.5) * self.cell_size, (j + 0.5) * self.cell_size)

    def copy(self) -> "CoverageMap":
        return CoverageMap(self.width_cells, self.height_cells,
                           self.cell_size, self.cells.copy())


@dataclass
class HoleComponent:
    cells: list[tuple[int, int]]
    centroid: Position


@dataclass
class HoleSet:
    """All uncovered cells, partitioned into 4-connected components."""

    cells: list[tuple[int, int]]
    components: list[HoleComponent]

    @property
    def count(self) -> int:
        return len(self.cells)


def initialize_grid(config: FieldConfig) -> CoverageMap:
    """All-false map sized by the field dimensions and cell size."""
    config.validate()
    w, h = config.width_cells, config.height_cells
    return CoverageMap(w, h, config.grid_cell_size,
                       np.zeros((w, h), dtype=bool))


def _window_offsets(radius: float, cell_size: float) -> np.ndarray:
    """Relative (di, dj) candidates that can fall inside a sensing disk."""
    reach = int(np.ceil(radius / cell_size)) + 1
    rng = np.arange(-reach, reach + 1)
    di, dj = np.meshgrid(rng, rng, indexing="ij")
    return np.stack([di.ravel(), dj.ravel()], axis=1)


def coverage_counts(positions: np.ndarray, config: FieldConfig,
                    radius: float | None = None) -> np.ndarray:
    """Per-cell count of live sensing disks reaching the cell center.

    ``positions`` is an (N, 2) array of live node coordinates. Counting (not
    just a boolean) lets callers reason about redundancy when moving nodes.
    """
    if radius is None:
        radius = config.sensing_radius
    s = config.grid_cell_size
    w, h = config.width_cells, config.height_cells
    counts = np.zeros((w, h), dtype=np.int32)
    if len(positions) == 0:
        return counts

    pos = np.asarray(positions, dtype=float)
    offsets = _window_offsets(radius, s)
    base = np.floor(pos / s).astype(np.int64)             # (N, 2)
    cand = base[:, None, :] + offsets[None, :, :]          # (N, K, 2)
    centers = (cand + 0.5) * s
    d2 = ((centers - pos[:, None, :]) ** 2).sum(axis=2)
    inside = d2 <= radius * radius + 1e-12
    inside &= (cand[:, :, 0] >= 0) & (cand[:, :, 0] < w)
    inside &= (cand[:, :, 1] >= 0) & (cand[:, :, 1] < h)
    ii = cand[:, :, 0][inside]
    jj = cand[:, :, 1][inside]
    np.add.at(counts, (ii, jj), 1)
    return counts


def mark_covered(cmap: CoverageMap, nodes: list[SensorNode],
                 sensing_radius: float, config: FieldConfig | None = None,
                 model: str = "disk") -> CoverageMap:
    """New map with cells reached by any live node marked true.

    Dead nodes are ignored. Marking never unmarks: the result is the OR of
    the input map and the nodes' footprint, so repeated calls are idempotent
    and adding nodes is monotone.
    """
    if config is None:
        config = FieldConfig(field_width=cmap.width_cells * cmap.cell_size,
                             field_height=cmap.height_cells * cmap.cell_size,
                             sensing_radius=sensing_radius,
                             grid_cell_size=cmap.cell_size)
    live = [n for n in nodes if n.alive]
    for n in live:
        if not config.in_bounds(n.position):
            raise DomainError(
                f"node {n.id} outside field at "
                f"({n.position.x:g}, {n.position.y:g})")

    out = cmap.copy()
    if not live:
        return out
    pos = np.array([[n.position.x, n.position.y] for n in live])
    if model == "disk":
        counts = coverage_counts(pos, config, radius=sensing_radius)
        out.cells |= counts > 0
    elif model == "node_cell":
        idx = np.floor(pos / cmap.cell_size).astype(np.int64)
        idx[:, 0] = np.clip(idx[:, 0], 0, cmap.width_cells - 1)
        idx[:, 1] = np.clip(idx[:, 1], 0, cmap.height_cells - 1)
        out.cells[idx[:, 0], idx[:, 1]] = True
    else:
        raise ConfigError(f"unknown coverage model {model!r}")
    return out


def find_coverage_holes(cmap: CoverageMap,
                        region: np.ndarray | None = None) -> HoleSet:
    """Uncovered cells grouped into 4-connected components with centroids.

    ``region`` optionally restricts the search to a boolean cell mask (the
    component partition is still computed on the full uncovered set, so a
    hole straddling the region boundary keeps one centroid).
    """
    uncovered = ~cmap.cells
    labels, n = ndimage.label(uncovered, structure=FOUR_CONNECTED)
    keep = range(1, n + 1)
    if region is not None:
        present = np.unique(labels[region & uncovered])
        keep = [int(k) for k in present if k != 0]

    components = []
    all_cells: list[tuple[int, int]] = []
    s = cmap.cell_size
    for k in keep:
        ij = np.argwhere(labels == k)
        cells = [(int(i), int(j)) for i, j in ij]
        centers = (ij + 0.5) * s
        centroid = Position(float(centers[:, 0].mean()),
                            float(centers[:, 1].mean()))
        components.append(HoleComponent(cells=cells, centroid=centroid))
        if region is None:
            all_cells.extend(cells)
        else:
            all_cells.extend((i, j) for i, j in cells if region[i, j])
    return HoleSet(cells=all_cells, components=components)


def coverage_fraction(cmap: CoverageMap,
                      region: np.ndarray | None = None) -> float:
    """Covered share of all cells (or of the masked region)."""
    if region is None:
        return float(cmap.cells.mean())
    total = int(region.sum())
    if total == 0:
        return 1.0
    return float(cmap.cells[region].sum() / total)


def nearest_head_cells(config: FieldConfig,
                       heads: list[Position]) -> np.ndarray:
    """Index of the nearest cluster head for every cell center.

    Ties break to the lowest head index, matching node-to-cluster grouping.
    """
    if not heads:
        raise DomainError("nearest_head_cells: empty head list")
    s = config.grid_cell_size
    w, h = config.width_cells, config.height_cells
    ci = (np.arange(w) + 0.5) * s
    cj = (np.arange(h) + 0.5) * s
    cx, cy = np.meshgrid(ci, cj, indexing="ij")
    best = np.zeros((w, h), dtype=np.int64)
    best_d = np.full((w, h), np.inf)
    for k, head in enumerate(heads):
        d = (cx - head.x) ** 2 + (cy - head.y) ** 2
        better = d < best_d - 1e-12
        best[better] = k
        best_d[better] = d[better]
    return best


def to_text_grid(cmap: CoverageMap) -> str:
    """Debug rendering: '#' covered, '.' hole; top row is the largest y."""
    lines = []
    for j in range(cmap.height_cells - 1, -1, -1):
        lines.append("".join("#" if cmap.cells[i, j] else "."
                             for i in range(cmap.width_cells)))
    return "\n".join(lines) + "\n"


def to_csv(cmap: CoverageMap) -> str:
    """Cell dump as ``i,j,covered`` rows with a header line."""
    lines = ["i,j,covered"]
    for i in range(cmap.width_cells):
        for j in range(cmap.height_cells):
            lines.append(f"{i},{j},{int(cmap.cells[i, j])}")
    return "\n".join(lines) + "\n"


class CoverageState:
    """Incrementally maintained disk-count grid for guarded node movement.

    The guard refuses any single-node move that would drop a currently
    covered cell to zero disks, which is what keeps the hole-cell count
    non-increasing while rescuers converge on a hole.
    """

    def __init__(self, config: FieldConfig, radius: float | None = None):
        config.validate()
        self.config = config
        self.radius = config.sensing_radius if radius is None else radius
        self.cell_size = config.grid_cell_size
        self.width = config.width_cells
        self.height = config.height_cells
        self.counts = np.zeros((self.width, self.height), dtype=np.int32)
        self._offsets = _window_offsets(self.radius, self.cell_size)

    def _disk_cells(self, x: float, y: float) -> tuple[np.ndarray, np.ndarray]:
        s = self.cell_size
        base = np.array([np.floor(x / s), np.floor(y / s)], dtype=np.int64)
        cand = base[None, :] + self._offsets
        centers = (cand + 0.5) * s
        d2 = (centers[:, 0] - x) ** 2 + (centers[:, 1] - y) ** 2
        ok = d2 <= self.radius * self.radius + 1e-12
        ok &= (cand[:, 0] >= 0) & (cand[:, 0] < self.width)
        ok &= (cand[:, 1] >= 0) & (cand[:, 1] < self.height)
        return cand[ok, 0], cand[ok, 1]

    def add_disk(self, x: float, y: float) -> None:
        ii, jj = self._disk_cells(x, y)
        self.counts[ii, jj] += 1

    def remove_disk(self, x: float, y: float) -> None:
        ii, jj = self._disk_cells(x, y)
        self.counts[ii, jj] -= 1

    def move_opens_hole(self, old: Position, new: Position) -> bool:
        """Would moving one disk from old to new uncover any cell?"""
        ii, jj = self._disk_cells(old.x, old.y)
        if len(ii) == 0:
            return False
        sole = self.counts[ii, jj] == 1
        if not sole.any():
            return False
        s = self.cell_size
        cx = (ii[sole] + 0.5) * s
        cy = (jj[sole] + 0.5) * s
        d2 = (cx - new.x) ** 2 + (cy - new.y) ** 2
        return bool((d2 > self.radius * self.radius + 1e-12).any())

    def apply_move(self, old: Position, new: Position) -> None:
        self.remove_disk(old.x, old.y)
        self.add_disk(new.x, new.y)

    def covered_map(self) -> CoverageMap:
        return CoverageMap(self.width, self.height, self.cell_size,
                           self.counts > 0)

    def hole_cell_count(self, region: np.ndarray | None = None) -> int:
        holes = self.counts == 0
        if region is not None:
            holes = holes & region
        return int(holes.sum())

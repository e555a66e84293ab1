"""Energy bookkeeping and the abstract computational-cost model.

Every joule a node spends is recorded in one of four ledger categories
(sensing, transmission, movement, processing) so that initial minus current
energy always equals the ledger sum exactly. Draining a node to zero kills
it, which is a modeled outcome, not an error: a dead rescuer is the next
potential sensing hole.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError
from .world import SensorNode

CATEGORIES = ("sensing", "transmission", "movement", "processing")


@dataclass(frozen=True)
class CostCoefficients:
    """Unit costs: data size, per-op processing, bandwidth use, overhead."""

    data_cost: float = 1.0
    processing_cost: float = 1.0
    bandwidth_cost: float = 1.0
    overhead_cost: float = 1.0

    def validate(self) -> None:
        for name in ("data_cost", "processing_cost", "bandwidth_cost",
                     "overhead_cost"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be non-negative")


def computational_cost(coeff: CostCoefficients, data_bytes: float,
                       proc_rate: float, bandwidth: float,
                       overhead: float) -> float:
    """Cost of handling ``data_bytes`` at a given processing rate/bandwidth.

    Linear in the data size and the overhead separately; the processing and
    bandwidth terms scale the data size by the respective rates.
    """
    if proc_rate <= 0:
        raise DomainError("proc_rate must be positive")
    if bandwidth <= 0:
        raise DomainError("bandwidth must be positive")
    return (coeff.data_cost * data_bytes
            + coeff.processing_cost * data_bytes / proc_rate
            + coeff.bandwidth_cost * data_bytes / bandwidth
            + coeff.overhead_cost * overhead)


def transmission_energy(n_bytes: float, tx_power: float,
                        bitrate: float) -> float:
    """Joules to radiate ``n_bytes`` at ``tx_power`` watts over ``bitrate`` bps."""
    if bitrate <= 0:
        raise DomainError("bitrate must be positive")
    return tx_power * (8.0 * n_bytes / bitrate)


def movement_energy(distance: float, e_move: float) -> float:
    """Joules to travel ``distance`` meters at ``e_move`` joules per meter."""
    if distance < 0:
        raise DomainError("distance must be non-negative")
    return e_move * distance


class EnergyLedger:
    """Per-node spend accounting, split by category.

    Nodes must be enrolled (``track``) before they can be charged so the
    conservation check knows each node's starting energy.
    """

    def __init__(self):
        self.initial: dict[int, float] = {}
        self.spent: dict[int, dict[str, float]] = {}

    def track(self, node: SensorNode) -> None:
        if node.id not in self.initial:
            self.initial[node.id] = node.energy
            self.spent[node.id] = {cat: 0.0 for cat in CATEGORIES}

    def charge(self, node: SensorNode, joules: float, category: str) -> None:
        """Deduct from the node's battery; at zero the node dies."""
        if joules < 0:
            raise DomainError("cannot charge negative energy")
        if category not in CATEGORIES:
            raise DomainError(f"unknown ledger category {category!r}")
        self.track(node)
        actual = min(joules, node.energy)
        node.energy -= actual
        self.spent[node.id][category] += actual
        if node.energy <= 0:
            node.energy = 0.0
            node.alive = False

    def total_spent(self, node_id: int) -> float:
        return sum(self.spent[node_id].values())

    def spent_fraction(self, node_id: int) -> float:
        initial = self.initial[node_id]
        if initial <= 0:
            return 0.0
        return self.total_spent(node_id) / initial

    def category_total(self, category: str) -> float:
        return sum(per_node[category] for per_node in self.spent.values())

    def to_csv(self, nodes: list[SensorNode]) -> str:
        """Dump as node_id,sensing_J,tx_J,move_J,proc_J,remaining_J rows."""
        lines = ["node_id,sensing_J,tx_J,move_J,proc_J,remaining_J"]
        by_id = {n.id: n for n in nodes}
        for node_id in sorted(self.spent):
            s = self.spent[node_id]
            remaining = by_id[node_id].energy if node_id in by_id else 0.0
            lines.append(
                f"{node_id},{s['sensing']:.9g},{s['transmission']:.9g},"
                f"{s['movement']:.9g},{s['processing']:.9g},{remaining:.9g}")
        return "\n".join(lines) + "\n"


def charge(node: SensorNode, joules: float, category: str,
           ledger: EnergyLedger) -> None:
    """Module-level convenience wrapper around ``EnergyLedger.charge``."""
    ledger.charge(node, joules, category)

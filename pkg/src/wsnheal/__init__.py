"""Clustered wireless sensor field simulator with sensing-hole recovery.

The library models a seeded sensor field split into zones and clusters,
detects sensing holes on a grid coverage map, and recovers them either with
the network-controlled scheme (threshold-driven cluster management plus
iterative velocity-vector relocation with registration accounting) or with
the node-side self-organising baseline it is compared against.
"""

from .coverage import (CoverageMap, HoleSet, coverage_fraction,
                       find_coverage_holes, initialize_grid, mark_covered)
from .energy import (CostCoefficients, EnergyLedger, computational_cost,
                     movement_energy, transmission_energy)
from .engine import (Scenario, ScenarioMetrics, SimParams, run_scenario,
                     sweep)
from .relocation import (ForceParams, RecoveryParams, RecoveryResult,
                         apply_velocity_step, boundary_force, initial_deploy,
                         pairwise_virtual_force, recover_holes_hybrid,
                         step_toward)
from .protocol import (ProtocolParams, RegistrationOutcome, register_node,
                       registration_latency)
from .ssoa import SsoaParams, SsoaResult, compare_runs, ssoa_recover
from .world import (Cluster, FieldConfig, Position, SensorNode, Velocity,
                    Zone, build_layout, nearest_cluster_head, validate_field)

__version__ = "0.1.0"

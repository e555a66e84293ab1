"""Scenario configuration files.

Plain INI text with one section per constant group. Every key has a
documented default; unknown sections or keys are rejected by name so typos
cannot silently fall back to defaults. ``auto``/``none`` are accepted for
the optional force constants that derive from the sensing radius.
"""

from __future__ import annotations

import configparser
import io

from .energy import CostCoefficients
from .engine import Scenario, SimParams
from .errors import ConfigError
from .protocol import ProtocolParams
from .relocation import ForceParams, RecoveryParams
from .world import FieldConfig

# (section, key) -> (type tag, default). Type tags: int, float, str, bool,
# ofloat (optional float accepting auto/none).
SCHEMA: dict[str, dict[str, tuple[str, object]]] = {
    "field": {
        "width": ("float", 220.0),
        "height": ("float", 220.0),
        "sensing_radius": ("float", 5.0),
        "transmission_range": ("float", 5.0),
        "grid_cell_size": ("float", 2.0),
        "packet_size": ("int", 2048),
        "initial_energy": ("float", 6.0),
        "tx_power": ("float", 1.18e-3),
    },
    "scenario": {
        "zones_x": ("int", 1),
        "zones_y": ("int", 1),
        "clusters_per_zone": ("int", 5),
        "nodes_per_zone": ("int", 674),
        "min_threshold": ("int", 124),
        "max_threshold": ("int", 135),
        "protocol": ("str", "hybrid"),
        "holes_to_inject": ("int", 0),
        "hole_placement": ("str", "uniform_in_test_cluster"),
        "seed": ("int", 1),
        "max_steps": ("int", 20000),
        "test_cluster": ("int", 0),
    },
    "forces": {
        "spacing": ("ofloat", None),
        "attract_gain": ("float", 1.0),
        "repel_gain": ("float", 1.0),
        "boundary_gain": ("float", 2.0),
        "boundary_margin": ("ofloat", None),
        "gain": ("float", 0.2),
        "step_cap": ("float", 1.0),
        "epsilon": ("float", 1e-3),
        "max_rounds": ("int", 500),
        "interaction_cutoff": ("ofloat", None),
    },
    "recovery": {
        "move_step": ("float", 0.5),
        "max_iterations": ("int", 500),
    },
    "protocol": {
        "link_latency_ms": ("float", 2.0),
        "auth_fast_ms": ("float", 1.0),
        "auth_full_ms": ("float", 4.0),
        "ms_per_step": ("float", 1.0),
    },
    "energy": {
        "e_move": ("float", 0.01),
        "bitrate": ("float", 250000.0),
        "sensing_per_step": ("float", 1e-4),
        "cost_to_joule": ("float", 1e-5),
    },
    "cost": {
        "data_cost": ("float", 1.0),
        "processing_cost": ("float", 1.0),
        "bandwidth_cost": ("float", 1.0),
        "overhead_cost": ("float", 1.0),
        "proc_rate": ("float", 1e6),
        "bandwidth": ("float", 31250.0),
        "neighbor_entry_bytes": ("int", 32),
    },
    "run": {
        "migrate_nearest": ("bool", True),
        "coverage_model": ("str", "disk"),
        "trace": ("bool", False),
    },
}


def _parse_value(tag: str, raw: str, where: str):
    raw = raw.strip()
    try:
        if tag == "int":
            return int(raw)
        if tag == "float":
            return float(raw)
        if tag == "bool":
            if raw.lower() in ("true", "yes", "1", "on"):
                return True
            if raw.lower() in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if tag == "ofloat":
            if raw.lower() in ("auto", "none", ""):
                return None
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {where}: {raw!r}") from exc


def parse_config(text: str) -> dict[str, dict[str, object]]:
    """Parse INI text against the schema; reject unknown names."""
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    values = {section: {key: default for key, (_, default) in keys.items()}
              for section, keys in SCHEMA.items()}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown config key {section}.{key}")
            tag = SCHEMA[section][key][0]
            values[section][key] = _parse_value(tag, raw, f"{section}.{key}")
    return values


def load_config(path: str) -> dict[str, dict[str, object]]:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def build_scenario(values: dict[str, dict[str, object]]) -> Scenario:
    """Assemble a validated Scenario from parsed config values."""
    f = values["field"]
    field = FieldConfig(
        field_width=f["width"], field_height=f["height"],
        sensing_radius=f["sensing_radius"],
        transmission_range=f["transmission_range"],
        grid_cell_size=f["grid_cell_size"], packet_size=f["packet_size"],
        initial_energy=f["initial_energy"], tx_power=f["tx_power"],
        rng_seed=values["scenario"]["seed"])

    fo = values["forces"]
    force = ForceParams(
        spacing=fo["spacing"], attract_gain=fo["attract_gain"],
        repel_gain=fo["repel_gain"], boundary_gain=fo["boundary_gain"],
        boundary_margin=fo["boundary_margin"], gain=fo["gain"],
        step_cap=fo["step_cap"], epsilon=fo["epsilon"],
        max_rounds=fo["max_rounds"],
        interaction_cutoff=fo["interaction_cutoff"])

    re = values["recovery"]
    en = values["energy"]
    recovery = RecoveryParams(move_step=re["move_step"],
                              max_iterations=re["max_iterations"],
                              e_move=en["e_move"])

    pr = values["protocol"]
    proto = ProtocolParams(link_latency_ms=pr["link_latency_ms"],
                           auth_fast_ms=pr["auth_fast_ms"],
                           auth_full_ms=pr["auth_full_ms"])

    co = values["cost"]
    coeff = CostCoefficients(data_cost=co["data_cost"],
                             processing_cost=co["processing_cost"],
                             bandwidth_cost=co["bandwidth_cost"],
                             overhead_cost=co["overhead_cost"])

    ru = values["run"]
    params = SimParams(
        force=force, recovery=recovery, protocol=proto, coeff=coeff,
        proc_rate=co["proc_rate"], bandwidth=co["bandwidth"],
        bitrate=en["bitrate"], e_move=en["e_move"],
        sensing_energy_per_step=en["sensing_per_step"],
        cost_to_joule=en["cost_to_joule"],
        neighbor_entry_bytes=co["neighbor_entry_bytes"],
        ms_per_step=pr["ms_per_step"],
        migrate_nearest=ru["migrate_nearest"],
        coverage_model=ru["coverage_model"])

    sc = values["scenario"]
    scenario = Scenario(
        field=field, zones_x=sc["zones_x"], zones_y=sc["zones_y"],
        clusters_per_zone=sc["clusters_per_zone"],
        nodes_per_zone=sc["nodes_per_zone"],
        min_threshold=sc["min_threshold"],
        max_threshold=sc["max_threshold"], protocol=sc["protocol"],
        holes_to_inject=sc["holes_to_inject"],
        hole_placement=sc["hole_placement"], rng_seed=sc["seed"],
        max_steps=sc["max_steps"], test_cluster=sc["test_cluster"],
        params=params)
    scenario.validate()
    return scenario


def render_effective(values: dict[str, dict[str, object]]) -> str:
    """Canonical INI echo of the fully resolved configuration."""
    out = io.StringIO()
    for section in SCHEMA:
        out.write(f"[{section}]\n")
        for key in SCHEMA[section]:
            value = values[section][key]
            if value is None:
                value = "auto"
            elif isinstance(value, bool):
                value = "true" if value else "false"
            elif isinstance(value, float):
                value = f"{value:.10g}"
            out.write(f"{key} = {value}\n")
        out.write("\n")
    return out.getvalue()


def default_values() -> dict[str, dict[str, object]]:
    return {section: {key: default for key, (_, default) in keys.items()}
            for section, keys in SCHEMA.items()}

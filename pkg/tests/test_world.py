import math

import pytest

from wsnheal.errors import ConfigError, DomainError
from wsnheal.world import (Cluster, FieldConfig, Position, SensorNode,
                           Velocity, Zone, build_layout, home_prefix,
                           nearest_cluster_head, split_prefix, validate_field,
                           zone_of_cluster)


class TestNearestClusterHead:
    def test_zero_distance_wins(self):
        heads = [Position(0, 0), Position(10, 10)]
        assert nearest_cluster_head(Position(0, 0), heads) == 0

    def test_equidistant_breaks_to_lowest_index(self):
        heads = [Position(0, 0), Position(10, 10)]
        assert nearest_cluster_head(Position(5, 5), heads) == 0

    def test_clearly_closer_head(self):
        # dist to (0,0) is sqrt(162), to (10,10) is sqrt(2)
        heads = [Position(0, 0), Position(10, 10)]
        assert math.hypot(9, 9) > math.hypot(1, 1)
        assert nearest_cluster_head(Position(9, 9), heads) == 1

    def test_empty_heads_rejected(self):
        with pytest.raises(DomainError):
            nearest_cluster_head(Position(0, 0), [])


class TestFieldConfig:
    def test_defaults_validate(self):
        FieldConfig().validate()

    def test_nonpositive_lengths_rejected(self):
        with pytest.raises(ConfigError):
            FieldConfig(sensing_radius=0).validate()
        with pytest.raises(ConfigError):
            FieldConfig(initial_energy=-1).validate()

    def test_divisibility_enforced(self):
        with pytest.raises(ConfigError):
            FieldConfig(field_width=221).validate()


class TestPrefixes:
    def test_round_trip(self):
        assert split_prefix(home_prefix(3, 14)) == (3, 14)

    def test_malformed_prefix(self):
        with pytest.raises(DomainError):
            split_prefix("nonsense")


class TestBuildLayout:
    def test_single_zone_counts(self):
        zones, clusters = build_layout(FieldConfig(), 1, 1, 5, 124, 135)
        assert len(zones) == 1 and len(clusters) == 5
        assert zones[0].clusters == [0, 1, 2, 3, 4]
        for c in clusters:
            assert 0 < c.head_position.x < 220
            assert 0 < c.head_position.y < 220

    def test_zone_grid_owns_disjoint_clusters(self):
        zones, clusters = build_layout(FieldConfig(), 2, 2, 3, 10, 20)
        assert len(zones) == 4 and len(clusters) == 12
        owned = [cid for z in zones for cid in z.clusters]
        assert sorted(owned) == list(range(12))
        assert zone_of_cluster(zones, 7).id == 2

    def test_bad_thresholds_rejected(self):
        with pytest.raises(ConfigError):
            build_layout(FieldConfig(), 1, 1, 5, 135, 135)


class TestValidateField:
    def _world(self):
        config = FieldConfig()
        zones, clusters = build_layout(config, 1, 1, 2, 1, 5)
        nodes = [SensorNode(id=k, position=Position(10 * k + 5, 50),
                            energy=6.0) for k in range(4)]
        clusters[0].members = [0, 1]
        clusters[1].members = [2, 3]
        return nodes, clusters, zones, config

    def test_empty_field_is_ok(self):
        config = FieldConfig()
        assert validate_field([], [], [], config) == []

    def test_consistent_world_is_ok(self):
        assert validate_field(*self._world()) == []

    def test_out_of_bounds_node_reported(self):
        nodes, clusters, zones, config = self._world()
        nodes[1].position = Position(300, 10)
        violations = validate_field(nodes, clusters, zones, config)
        assert len(violations) == 1
        assert "out of bounds" in violations[0]

    def test_double_membership_reported(self):
        nodes, clusters, zones, config = self._world()
        clusters[1].members.append(0)
        violations = validate_field(nodes, clusters, zones, config)
        assert len(violations) == 1
        assert "listed in clusters" in violations[0]

    def test_all_violations_returned_not_just_first(self):
        nodes, clusters, zones, config = self._world()
        nodes[0].position = Position(-1, 0)
        nodes[2].energy = 0.0
        clusters[0].members.append(99)
        violations = validate_field(nodes, clusters, zones, config)
        assert len(violations) == 3

    def test_dead_node_with_zero_energy_is_fine(self):
        nodes, clusters, zones, config = self._world()
        nodes[0].energy = 0.0
        nodes[0].alive = False
        assert validate_field(nodes, clusters, zones, config) == []

    def test_velocity_cap_checked_when_given(self):
        nodes, clusters, zones, config = self._world()
        nodes[3].velocity = Velocity(3.0, 4.0)
        assert validate_field(nodes, clusters, zones, config) == []
        violations = validate_field(nodes, clusters, zones, config,
                                    max_step=1.0)
        assert len(violations) == 1 and "velocity" in violations[0]

    def test_orphan_cluster_reported(self):
        nodes, clusters, zones, config = self._world()
        clusters.append(Cluster(id=9, head_position=Position(1, 1),
                                min_threshold=1, max_threshold=2))
        violations = validate_field(nodes, clusters, zones, config)
        assert any("belongs to no zone" in v for v in violations)

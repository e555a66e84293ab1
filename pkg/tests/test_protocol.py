import pytest

from wsnheal.errors import AdmissionDeferred, DomainError, RegistrationRefused
from wsnheal.protocol import (MessageKind, NetworkCaches, ProtocolMessage,
                              ProtocolParams, RegistrationOutcome,
                              lookup_cache, register_node,
                              registration_latency)
from wsnheal.world import (FieldConfig, Position, SensorNode, build_layout,
                           home_prefix)


def make_network(zones_x=2, zones_y=1, clusters_per_zone=2, min_t=1, max_t=4):
    config = FieldConfig()
    zones, clusters = build_layout(config, zones_x, zones_y,
                                   clusters_per_zone, min_t, max_t)
    return zones, clusters, NetworkCaches(zones, clusters)


def make_node(node_id, zone_id, cluster_id):
    return SensorNode(id=node_id, position=Position(10.0 * node_id + 5, 30.0),
                      energy=6.0, home_prefix=home_prefix(zone_id, cluster_id),
                      registered=True)


class TestRegisterNode:
    def test_intra_zone_fast_path(self):
        zones, clusters, caches = make_network()
        node = make_node(1, zone_id=0, cluster_id=0)
        outcome = register_node(node, clusters[1], zones, caches, 2048)
        assert outcome.path == "intra_zone"
        assert outcome.auth == "fast"
        kinds = [m.kind for m in outcome.messages]
        assert kinds == [MessageKind.ID_REQ, MessageKind.REQ_ACK]
        assert outcome.hops == 2
        assert all(m.is_transmission for m in outcome.messages)
        assert node.home_prefix == home_prefix(0, 1)

    def test_inter_zone_full_path(self):
        zones, clusters, caches = make_network()
        node = make_node(2, zone_id=1, cluster_id=2)
        outcome = register_node(node, clusters[0], zones, caches, 2048)
        assert outcome.path == "inter_zone"
        assert outcome.auth == "full"
        kinds = [m.kind for m in outcome.messages]
        assert kinds == [MessageKind.ID_REQ, MessageKind.ID_REQ,
                         MessageKind.REQ_ACK, MessageKind.REQ_ACK]
        assert outcome.hops == 4
        # the neighbour gateway is the origin zone's
        assert outcome.messages[1].receiver == "gz1"

    def test_inter_zone_strictly_more_messages(self):
        zones, clusters, caches = make_network()
        intra = register_node(make_node(3, 0, 0), clusters[1], zones,
                              caches, 2048)
        inter = register_node(make_node(4, 1, 2), clusters[1], zones,
                              caches, 2048)
        assert inter.hops > intra.hops
        assert inter.latency_ms > intra.latency_ms

    def test_unknown_prefix_refused(self):
        zones, clusters, caches = make_network()
        node = make_node(5, zone_id=9, cluster_id=0)
        with pytest.raises(RegistrationRefused):
            register_node(node, clusters[0], zones, caches, 2048)
        node = make_node(6, zone_id=0, cluster_id=3)  # cluster of zone 1
        with pytest.raises(RegistrationRefused):
            register_node(node, clusters[0], zones, caches, 2048)

    def test_full_cluster_defers_admission(self):
        zones, clusters, caches = make_network(max_t=2)
        clusters[1].members = [90, 91]
        node = make_node(7, 0, 0)
        with pytest.raises(AdmissionDeferred):
            register_node(node, clusters[1], zones, caches, 2048)

    def test_dead_node_rejected(self):
        zones, clusters, caches = make_network()
        node = make_node(8, 0, 0)
        node.alive = False
        with pytest.raises(DomainError):
            register_node(node, clusters[1], zones, caches, 2048)

    def test_node_signal_charged_separately(self):
        zones, clusters, caches = make_network()
        node = make_node(9, 0, 0)
        outcome = register_node(node, clusters[1], zones, caches, 2048)
        assert outcome.node_signal.kind is MessageKind.REGISTER
        assert outcome.node_signal.sender == "sn9"
        assert outcome.total_bytes == 3 * 2048
        commits = [c.kind for c in outcome.cache_commits]
        assert commits == [MessageKind.CACHE_UPDATE, MessageKind.CACHE_UPDATE]
        assert all(not c.is_transmission for c in outcome.cache_commits)

    def test_caches_updated_in_same_transaction(self):
        zones, clusters, caches = make_network()
        node = make_node(10, 0, 0)
        register_node(node, clusters[1], zones, caches, 2048, timestamp=42)
        ch_entry = lookup_cache(caches.ch[1], 10)
        gz_entry = lookup_cache(caches.gz[0], 10)
        assert ch_entry is not None and gz_entry is not None
        assert ch_entry == gz_entry
        assert ch_entry.position == node.position
        assert ch_entry.timestamp == 42

    def test_reregistration_idempotent_except_timestamp(self):
        zones, clusters, caches = make_network()
        node = make_node(11, 0, 0)
        register_node(node, clusters[1], zones, caches, 2048, timestamp=1)
        first = lookup_cache(caches.ch[1], 11)
        register_node(node, clusters[1], zones, caches, 2048, timestamp=2)
        second = lookup_cache(caches.ch[1], 11)
        assert second.timestamp == 2
        assert (second.node_id, second.home_prefix, second.position,
                second.owning_ch) == (first.node_id, first.home_prefix,
                                      first.position, first.owning_ch)


class TestCacheLookup:
    def test_miss_on_unknown_node(self):
        _, _, caches = make_network()
        assert lookup_cache(caches.gz[0], 404) is None

    def test_lookup_after_register_hits_new_position(self):
        zones, clusters, caches = make_network()
        node = make_node(12, 0, 0)
        register_node(node, clusters[1], zones, caches, 2048)
        entry = lookup_cache(caches.gz[0], 12)
        assert entry.position == node.position

    def test_last_write_wins(self):
        zones, clusters, caches = make_network()
        node = make_node(13, 0, 0)
        register_node(node, clusters[1], zones, caches, 2048, timestamp=5)
        node.position = Position(50, 60)
        register_node(node, clusters[0], zones, caches, 2048, timestamp=6)
        entry = lookup_cache(caches.gz[0], 13)
        assert entry.owning_ch == "ch0"
        assert entry.position == Position(50, 60)
        assert entry.timestamp == 6


class TestLatency:
    def _outcome(self, path, auth, hops):
        messages = []
        for k in range(hops):
            kind = MessageKind.ID_REQ if k < hops // 2 else MessageKind.REQ_ACK
            messages.append(ProtocolMessage(kind, f"a{k}", f"b{k}", 100,
                                            includes_position=True))
        signal = ProtocolMessage(MessageKind.REGISTER, "sn0", "ch0", 100)
        return RegistrationOutcome(path=path, auth=auth, messages=messages,
                                   node_signal=signal)

    def test_intra_zone_reference(self):
        outcome = self._outcome("intra_zone", "fast", 2)
        assert registration_latency(outcome, 2.0, 1.0, 4.0) == 5.0

    def test_inter_zone_reference(self):
        outcome = self._outcome("inter_zone", "full", 4)
        assert registration_latency(outcome, 2.0, 1.0, 4.0) == 12.0

    def test_zero_constants(self):
        outcome = self._outcome("intra_zone", "fast", 2)
        assert registration_latency(outcome, 0.0, 0.0, 0.0) == 0.0

    def test_fast_below_full_for_any_positive_constants(self):
        import numpy as np
        rng = np.random.default_rng(2)
        for _ in range(100):
            link = float(rng.uniform(0.01, 10))
            fast = float(rng.uniform(0.01, 10))
            full = fast + float(rng.uniform(0.01, 10))
            intra = self._outcome("intra_zone", "fast", 2)
            inter = self._outcome("inter_zone", "full", 4)
            assert (registration_latency(intra, link, fast, full)
                    < registration_latency(inter, link, fast, full))

    def test_negative_constants_rejected(self):
        outcome = self._outcome("intra_zone", "fast", 2)
        with pytest.raises(DomainError):
            registration_latency(outcome, -1.0, 0.0, 0.0)


class TestMessageInvariants:
    def test_req_ack_requires_node_information(self):
        with pytest.raises(DomainError):
            ProtocolMessage(MessageKind.REQ_ACK, "gz0", "ch0", 100)

    def test_params_validated(self):
        with pytest.raises(DomainError):
            ProtocolParams(link_latency_ms=-2.0).validate()

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wsnheal.coverage import coverage_counts
from wsnheal.energy import EnergyLedger
from wsnheal.errors import DomainError
from wsnheal.relocation import (ForceParams, RecoveryParams, _sum_forces,
                                apply_velocity_step, boundary_force,
                                force_relaxation, initial_deploy,
                                pairwise_virtual_force, recover_holes_hybrid,
                                step_toward)
from wsnheal.world import FieldConfig, Position, SensorNode, Velocity


class TestPairwiseForce:
    def test_equilibrium_at_threshold(self):
        f = pairwise_virtual_force(Position(0, 0), Position(2, 0), 2.0)
        assert (f.fx, f.fy) == (0.0, 0.0)

    def test_repulsion_inside_threshold(self):
        # d=1 < 2: magnitude 1 pointing away from b
        f = pairwise_virtual_force(Position(0, 0), Position(1, 0), 2.0,
                                   k_att=1.0, k_rep=1.0)
        assert f.fx == pytest.approx(-1.0)
        assert f.fy == pytest.approx(0.0)

    def test_attraction_outside_threshold(self):
        # d=3 > 2: magnitude 1 pointing toward b
        f = pairwise_virtual_force(Position(0, 0), Position(3, 0), 2.0)
        assert f.fx == pytest.approx(1.0)
        assert f.fy == pytest.approx(0.0)

    def test_coincident_rejected(self):
        with pytest.raises(DomainError):
            pairwise_virtual_force(Position(1, 1), Position(1, 1), 2.0)

    def test_symmetry_action_reaction(self):
        a, b = Position(3, 7), Position(9, 2)
        fa = pairwise_virtual_force(a, b, 4.0, 1.3, 0.7)
        fb = pairwise_virtual_force(b, a, 4.0, 1.3, 0.7)
        assert fa.fx == pytest.approx(-fb.fx)
        assert fa.fy == pytest.approx(-fb.fy)


class TestBoundaryForce:
    CFG = FieldConfig(field_width=100, field_height=100, grid_cell_size=2)

    def test_center_feels_nothing(self):
        f = boundary_force(Position(50, 50), self.CFG, margin=5, k_b=1.0)
        assert (f.fx, f.fy) == (0.0, 0.0)

    def test_left_edge_pushed_inward(self):
        f = boundary_force(Position(0, 50), self.CFG, margin=5, k_b=1.0)
        assert f.fx == pytest.approx(5.0)
        assert f.fy == 0.0

    def test_corner_pushed_on_both_axes(self):
        f = boundary_force(Position(1, 99), self.CFG, margin=5, k_b=1.0)
        assert f.fx > 0 and f.fy < 0

    def test_matches_vectorised_sum(self):
        rng = np.random.default_rng(12)
        # cutoff disabled so the scalar pair law applies at any distance
        params = ForceParams(spacing=6.0, boundary_margin=4.0,
                             interaction_cutoff=0.0)
        pos = rng.uniform(0, 100, size=(2, 2))
        forces = _sum_forces(pos, self.CFG, params, rng)
        for i, j in ((0, 1), (1, 0)):
            pair = pairwise_virtual_force(Position(*pos[i]), Position(*pos[j]),
                                          6.0)
            edge = boundary_force(Position(*pos[i]), self.CFG, 4.0, 2.0)
            assert forces[i][0] == pytest.approx(pair.fx + edge.fx)
            assert forces[i][1] == pytest.approx(pair.fy + edge.fy)


class TestVelocityStep:
    def test_half_step(self):
        p = apply_velocity_step(Position(0, 0), Velocity(1, 2), 0.5)
        assert (p.x, p.y) == (0.5, 1.0)

    def test_zero_dt_identity(self):
        p = apply_velocity_step(Position(4.2, 7.7), Velocity(5, -3), 0.0)
        assert (p.x, p.y) == (4.2, 7.7)

    def test_reverse_motion(self):
        p = apply_velocity_step(Position(2, 3), Velocity(-1, 0), 2.0)
        assert (p.x, p.y) == (0.0, 3.0)

    def test_clamped_to_bounds(self):
        cfg = FieldConfig(field_width=10, field_height=10, grid_cell_size=2)
        p = apply_velocity_step(Position(9, 9), Velocity(5, 5), 1.0, cfg)
        assert (p.x, p.y) == (10.0, 10.0)

    @given(st.floats(-50, 50), st.floats(-50, 50), st.floats(-5, 5),
           st.floats(-5, 5), st.floats(0, 10))
    def test_exact_against_substitution(self, x, y, vx, vy, dt):
        p = apply_velocity_step(Position(x, y), Velocity(vx, vy), dt)
        assert abs(p.x - (x + vx * dt)) <= 1e-9
        assert abs(p.y - (y + vy * dt)) <= 1e-9


class TestStepToward:
    def test_at_target_stays(self):
        v = step_toward(Position(3, 3), Position(3, 3), 1.0)
        assert (v.vx, v.vy) == (0.0, 0.0)

    def test_axis_aligned_unit(self):
        v = step_toward(Position(0, 0), Position(10, 0), 1.0)
        assert (v.vx, v.vy) == (1.0, 0.0)

    def test_no_overshoot(self):
        v = step_toward(Position(0, 0), Position(0.5, 0), 1.0)
        assert (v.vx, v.vy) == (0.5, 0.0)

    def test_bad_step_rejected(self):
        with pytest.raises(DomainError):
            step_toward(Position(0, 0), Position(1, 0), 0.0)

    @given(st.floats(-20, 20), st.floats(-20, 20), st.floats(-20, 20),
           st.floats(-20, 20), st.floats(0.01, 5))
    def test_moves_exactly_min_of_step_and_distance(self, px, py, tx, ty,
                                                    step):
        p, t = Position(px, py), Position(tx, ty)
        v = step_toward(p, t, step)
        moved = apply_velocity_step(p, v, 1.0)
        assert p.distance_to(moved) == pytest.approx(
            min(step, p.distance_to(t)), abs=1e-9)


def two_node_hole_field():
    """All cells but one covered; node 1 sits exactly 2.5 m from the hole."""
    cfg = FieldConfig(field_width=4, field_height=4, grid_cell_size=2,
                      sensing_radius=2)
    nodes = [SensorNode(0, Position(1.0, 1.0), energy=5.0),
             SensorNode(1, Position(3.0, 0.5), energy=5.0)]
    return cfg, nodes


class TestRecoverHolesHybrid:
    def test_no_holes_zero_iterations(self):
        cfg = FieldConfig(field_width=4, field_height=4, grid_cell_size=2,
                          sensing_radius=5)
        nodes = [SensorNode(0, Position(2, 2), energy=5.0)]
        res = recover_holes_hybrid(nodes, nodes, cfg)
        assert res.recovered and res.iterations_used == 0
        assert res.total_distance_moved == 0.0

    def test_single_hole_recovered_in_one_step(self):
        cfg, nodes = two_node_hole_field()
        before = coverage_counts(np.array([[1, 1], [3, 0.5]]), cfg)
        assert int((before == 0).sum()) == 1   # exactly the far corner cell
        res = recover_holes_hybrid(nodes, nodes, cfg,
                                   RecoveryParams(move_step=0.5,
                                                  max_iterations=10))
        assert res.recovered
        assert res.iterations_used == 1
        assert res.per_node_distance[1] == pytest.approx(0.5)
        assert res.residual_holes == 0

    def test_dead_cluster_cannot_recover(self):
        cfg, nodes = two_node_hole_field()
        for n in nodes:
            n.alive = False
        live_elsewhere = [SensorNode(9, Position(1, 1), energy=5.0)]
        res = recover_holes_hybrid(nodes, live_elsewhere, cfg,
                                   RecoveryParams(move_step=0.5,
                                                  max_iterations=5))
        assert not res.recovered
        assert res.total_distance_moved == 0.0
        assert res.residual_holes > 0

    def test_hole_count_never_increases(self):
        rng = np.random.default_rng(21)
        for trial in range(25):
            cfg = FieldConfig(field_width=20, field_height=20,
                              grid_cell_size=2, sensing_radius=4)
            nodes = [SensorNode(k, Position(float(rng.uniform(0, 20)),
                                            float(rng.uniform(0, 20))),
                                energy=50.0)
                     for k in range(int(rng.integers(4, 16)))]
            counts = []
            res = recover_holes_hybrid(
                nodes, nodes, cfg, RecoveryParams(move_step=0.5,
                                                  max_iterations=60),
                on_iteration=lambda it, moves, holes: counts.append(holes))
            assert counts == sorted(counts, reverse=True)
            assert res.residual_holes >= 0

    def test_per_iteration_displacement_capped(self):
        cfg = FieldConfig(field_width=20, field_height=20, grid_cell_size=2,
                          sensing_radius=4)
        rng = np.random.default_rng(8)
        nodes = [SensorNode(k, Position(float(rng.uniform(0, 20)),
                                        float(rng.uniform(0, 20))),
                            energy=50.0) for k in range(10)]
        last = {n.id: n.position for n in nodes}

        def check(iteration, moves, holes):
            for node_id, x, y in moves:
                d = last[node_id].distance_to(Position(x, y))
                assert d <= 0.5 + 1e-9
                last[node_id] = Position(x, y)

        recover_holes_hybrid(nodes, nodes, cfg,
                             RecoveryParams(move_step=0.5, max_iterations=40),
                             on_iteration=check)
        for n in nodes:
            assert cfg.in_bounds(n.position)

    def test_movement_energy_charged(self):
        cfg, nodes = two_node_hole_field()
        ledger = EnergyLedger()
        res = recover_holes_hybrid(nodes, nodes, cfg,
                                   RecoveryParams(move_step=0.5,
                                                  max_iterations=10,
                                                  e_move=0.01),
                                   ledger=ledger)
        spent = sum(ledger.total_spent(n.id) for n in nodes)
        assert spent == pytest.approx(0.01 * res.total_distance_moved)


class TestInitialDeploy:
    def test_lone_node_settles_off_the_walls(self):
        cfg = FieldConfig(field_width=50, field_height=50, grid_cell_size=2,
                          sensing_radius=5)
        pos = initial_deploy(1, cfg, rng_seed=3)
        x, y = pos[0]
        margin = cfg.sensing_radius
        assert min(x, y, 50 - x, 50 - y) >= margin - 0.01

    def test_two_body_equilibrium_separation(self):
        # pair inside interaction range: the force law's only two-body
        # equilibrium is separation == spacing
        cfg = FieldConfig(field_width=200, field_height=200, grid_cell_size=2,
                          sensing_radius=5)
        params = ForceParams(epsilon=1e-4, max_rounds=2000)
        spacing = params.resolved_spacing(cfg)
        rng = np.random.default_rng(0)
        pos = np.array([[90.0, 100.0], [105.0, 100.0]])
        out, _, _ = force_relaxation(pos, cfg, params, rng)
        assert math.dist(out[0], out[1]) == pytest.approx(spacing, abs=1e-3)

    def test_two_node_deploy_reaches_equilibrium(self):
        # field small enough that a random pair interacts
        cfg = FieldConfig(field_width=40, field_height=40, grid_cell_size=2,
                          sensing_radius=5)
        params = ForceParams(epsilon=1e-4, max_rounds=2000)
        spacing = params.resolved_spacing(cfg)
        pos = initial_deploy(2, cfg, rng_seed=4, params=params)
        assert math.dist(pos[0], pos[1]) == pytest.approx(spacing, abs=1e-3)

    def test_same_seed_identical_layout(self):
        cfg = FieldConfig(field_width=60, field_height=60, grid_cell_size=2,
                          sensing_radius=5)
        a = initial_deploy(20, cfg, rng_seed=11)
        b = initial_deploy(20, cfg, rng_seed=11)
        assert (a == b).all()

    def test_packing_spreads_nodes(self):
        # the linear pair law admits rare stable squeezed-pair defects, so
        # packing sanity is checked across seeds, not per seed
        cfg = FieldConfig(field_width=200, field_height=200, grid_cell_size=2,
                          sensing_radius=5)
        params = ForceParams(max_rounds=600)
        spacing = params.resolved_spacing(cfg)
        passed = 0
        for seed in range(1, 7):
            pos = initial_deploy(50, cfg, rng_seed=seed, params=params)
            assert (pos >= 0).all() and (pos <= 200).all()
            d = np.sqrt(((pos[:, None, :] - pos[None, :, :]) ** 2).sum(axis=2))
            np.fill_diagonal(d, np.inf)
            if d.min() >= spacing / 2:
                passed += 1
        assert passed >= 5

    def test_coincident_start_resolved(self):
        cfg = FieldConfig(field_width=40, field_height=40, grid_cell_size=2,
                          sensing_radius=5)
        rng = np.random.default_rng(1)
        pos = np.array([[20.0, 20.0], [20.0, 20.0]])
        out, travelled, rounds = force_relaxation(pos, cfg, ForceParams(),
                                                  rng)
        assert math.dist(out[0], out[1]) > 1.0

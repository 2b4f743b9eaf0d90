import math

import pytest

import fcaloha as fc


def test_closed_forms():
    assert fc.slot_access_probability(3.12, 100) == pytest.approx(0.0312)
    assert fc.singleton_capture_prob(1.0, 10.0) == pytest.approx(math.exp(-0.1))
    assert fc.c1_closed_form(2, 1.0, 10.0) == pytest.approx(0.226209, abs=1e-6)
    pmfs = fc.poisson_degree_pmfs(3.0, 0.0)
    assert pmfs["node_slot"][0] == pytest.approx(math.exp(-3.0))
    assert sum(pmfs["edge_slot"]) == pytest.approx(1.0)


def test_oracle_and_errors():
    assert fc.intra_slot_sic_oracle([10.0, 3.0], 1, 1.0)
    assert not fc.intra_slot_sic_oracle([10.0, 0.5], 1, 1.0)
    with pytest.raises(ValueError):
        fc.slot_access_probability(101.0, 100)


def test_collision_only_fixed_point():
    res = fc.fixed_point(3.12, 1.07, fc.collision_only_table(39))
    assert res.converged
    assert res.throughput == pytest.approx(0.87, abs=0.02)
    assert res.p_r == pytest.approx(0.93, abs=0.02)


def test_capture_table_and_optimum():
    ch = fc.ChannelParams.from_ratio(1.0, 0.1)
    table = fc.build_capture_table(ch, 39, samples=20000, seed=1)
    assert table.t_max == 39
    assert table.pi[0] == pytest.approx(math.exp(-0.1))
    assert all(a >= b for a, b in zip(table.pi, table.pi[1:]))
    best = fc.optimize_beta(0.36, table, [6.8, 7.0, 7.2, 7.4])
    assert best.throughput == pytest.approx(2.37, abs=0.05)


def test_simulation_and_point_evaluation():
    p = fc.SystemParams()
    p.n_users = 100
    p.beta = 6.14
    p.capture_ratio = 1.0
    p.mean_snr = 10.0
    p.threshold_v = 0.7
    p.threshold_s = 2.02
    run = fc.run_contention(p, fc.ChannelParams(1.0, 10.0), seed=3)
    assert run.throughput == pytest.approx(run.resolved_count / (run.slots_used + 1))

    runs = fc.run_batch(p, fc.ChannelParams(1.0, 10.0), 200)
    assert [r.seed for r in runs[:3]] == [1, 2, 3]
    summary = fc.summarize(runs, 100)
    assert summary["throughput"][0] == pytest.approx(1.92, abs=0.1)

    cfg = fc.SweepConfig()
    cfg.params = p
    cfg.runs_per_point = 200
    agg = fc.evaluate_point(fc.SweepPoint(6.14, 0.7, 2.02), cfg)
    assert agg["throughput"][0] == pytest.approx(summary["throughput"][0])


def test_small_grid_search():
    cfg = fc.SweepConfig()
    cfg.beta = fc.GridSpec(2.0, 3.0, 0.5)
    cfg.threshold_v = fc.GridSpec(0.8, 0.9, 0.1)
    cfg.threshold_s = fc.GridSpec(0.7, 0.8, 0.1)
    cfg.runs_per_point = 20
    cfg.reception = fc.Reception.CollisionOnly
    best = fc.grid_search(cfg)
    assert best["points_evaluated"] == 12
    assert 2.0 <= best["beta"] <= 3.0

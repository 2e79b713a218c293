from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spotbatch import catalog as cat
from spotbatch import perfmodel as pm
from spotbatch.errors import MissingRecordError, ParseError, ValidationError


# -- performance-to-price ----------------------------------------------------


def test_pp_ratio_reference_values():
    # Expected values frozen from ns_per_day / (24 * price) on the raw columns.
    assert pm.pp_ratio(105.3735, 4.08) == pytest.approx(1.076, abs=1e-3)
    assert pm.pp_ratio(24.0, 1.0) == pytest.approx(1.0)
    assert pm.pp_ratio(4.0275, 0.752) == pytest.approx(0.2232, abs=5e-4)


def test_pp_ratio_rejects_nonpositive():
    with pytest.raises(ValueError):
        pm.pp_ratio(0.0, 1.0)
    with pytest.raises(ValueError):
        pm.pp_ratio(10.0, -2.0)


@given(
    perf=st.floats(0.001, 1e4),
    price=st.floats(0.001, 1e3),
    k=st.floats(0.01, 100.0),
)
def test_pp_ratio_homogeneous(perf, price, k):
    assert pm.pp_ratio(k * perf, k * price) == pytest.approx(pm.pp_ratio(perf, price), rel=1e-9)


# -- scaling -----------------------------------------------------------------


def _series(points, system="rib", instance="c5n.18xl"):
    return pm.ScalingSeries(system=system, instance=instance, points=tuple(points))


def test_parallel_efficiency_reference(c5n_scaling):
    eff = dict(pm.parallel_efficiency(c5n_scaling["rib"]))
    assert eff[1] == 1.0
    assert eff[8] == pytest.approx(0.879, abs=1e-3)


def test_parallel_efficiency_two_instances(c5n_scaling):
    # 105.52 / (2 * 89.388) = 0.5902...
    eff = dict(pm.parallel_efficiency(c5n_scaling["mem"]))
    assert eff[2] == pytest.approx(105.52 / (2 * 89.388), rel=1e-12)
    assert eff[2] == pytest.approx(0.590, abs=1e-3)


def test_parallel_efficiency_baseline_is_exactly_one():
    series = _series([(1, 3.7), (4, 11.0)])
    assert pm.parallel_efficiency(series)[0] == (1, 1.0)


def test_superlinear_efficiency_not_clamped():
    series = _series([(1, 1.0), (2, 2.4)])
    assert dict(pm.parallel_efficiency(series))[2] == pytest.approx(1.2)


def test_series_requires_baseline():
    with pytest.raises(ValidationError):
        _series([(2, 10.0), (4, 20.0)])


def test_speedup_reference(c5n_scaling):
    assert pm.speedup(c5n_scaling["rib"], 32) == pytest.approx(14.02, abs=0.02)
    assert pm.speedup(c5n_scaling["rib"], 1) == 1.0


def test_speedup_g4dn16xl():
    # 28.3745 / 7.481 = 3.7929...
    series = {s.system: s for s in pm.load_scaling(__import__("spotbatch").data_path("scaling_g4dn16xl.csv"))}
    assert pm.speedup(series["rib"], 16) == pytest.approx(28.3745 / 7.481, rel=1e-12)
    assert pm.speedup(series["rib"], 16) == pytest.approx(3.793, abs=1e-3)


def test_speedup_missing_point():
    with pytest.raises(MissingRecordError):
        pm.speedup(_series([(1, 1.0), (2, 1.5)]), 7)


# -- best configuration ------------------------------------------------------


def test_best_config_picks_fastest(plain_records):
    best = pm.best_config(plain_records, "mem", "c5.24xl")
    assert (best.ranks, best.threads, best.pme_ranks) == (48, 2, 0)
    assert best.ns_per_day == pytest.approx(105.3735)


def test_best_config_single_candidate():
    rec = pm.BenchmarkRecord("s", "i", 1, 8, 0, "plain", 10.0)
    assert pm.best_config([rec], "s", "i") is rec


def test_best_config_tie_breaks_on_fewer_ranks():
    a = pm.BenchmarkRecord("s", "i", 96, 1, 0, "plain", 10.0)
    b = pm.BenchmarkRecord("s", "i", 48, 2, 0, "plain", 10.0)
    assert pm.best_config([a, b], "s", "i") is b
    c = pm.BenchmarkRecord("s", "i", 48, 2, 8, "plain", 10.0)
    assert pm.best_config([a, b, c], "s", "i") is b


def test_best_config_no_match():
    with pytest.raises(MissingRecordError):
        pm.best_config([], "s", "i")


# -- pareto frontier ---------------------------------------------------------


def brute_force_frontier(points):
    keep = []
    for p in points:
        dominated = any(
            q is not p
            and q.ns_per_day >= p.ns_per_day
            and q.price_per_hour <= p.price_per_hour
            and (q.ns_per_day > p.ns_per_day or q.price_per_hour < p.price_per_hour)
            for q in points
        )
        if not dominated:
            keep.append(p)
    return sorted(keep, key=lambda p: (p.price_per_hour, -p.ns_per_day, p.label))


def test_pareto_drops_dominated_gpu_point():
    g3s = pm.PerfPoint("g3s.xl", 0.75, 2.089)
    g4dn = pm.PerfPoint("g4dn.xl", 0.526, 3.173)
    assert pm.pareto_frontier({g3s, g4dn}) == [g4dn]


def test_pareto_single_point():
    p = pm.PerfPoint("only", 1.0, 1.0)
    assert pm.pareto_frontier([p]) == [p]


def test_pareto_keeps_mutually_nondominating():
    cheap = pm.PerfPoint("cheap", 0.5, 1.0)
    fast = pm.PerfPoint("fast", 2.0, 9.0)
    assert pm.pareto_frontier([fast, cheap]) == [cheap, fast]


def test_pareto_empty_raises():
    with pytest.raises(ValueError):
        pm.pareto_frontier([])


@settings(max_examples=200)
@given(
    st.lists(
        st.tuples(st.floats(0.01, 100.0), st.floats(0.01, 100.0)),
        min_size=1,
        max_size=20,
    )
)
def test_pareto_matches_brute_force_and_is_idempotent(raw):
    points = [pm.PerfPoint(f"p{i}", price, perf) for i, (price, perf) in enumerate(raw)]
    frontier = pm.pareto_frontier(points)
    assert frontier == brute_force_frontier(points)
    assert pm.pareto_frontier(frontier) == frontier
    # Every dropped point is dominated by something on the frontier.
    for p in points:
        if p in frontier:
            continue
        assert any(
            q.ns_per_day >= p.ns_per_day
            and q.price_per_hour <= p.price_per_hour
            and (q.ns_per_day > p.ns_per_day or q.price_per_hour < p.price_per_hour)
            for q in frontier
        )


# -- runtime prediction ------------------------------------------------------


def test_predict_runtime_cmet_complex(fe_records):
    # 10 ns / 61.866 ns/day * 24 h/day = 3.879 h
    hours = pm.predict_runtime_hours("cmet_complex", 6.0, 4.0, "g4dn.4xl", fe_records)
    assert hours == pytest.approx(10.0 / 61.866 * 24.0, rel=1e-12)
    assert hours == pytest.approx(3.879, abs=1e-3)


def test_predict_runtime_cmet_ligand(fe_records):
    hours = pm.predict_runtime_hours("cmet_ligand", 6.0, 4.0, "c5.2xl", fe_records)
    assert hours == pytest.approx(10.0 / 52.371 * 24.0, rel=1e-12)
    assert hours == pytest.approx(4.582, abs=1e-3)


def test_predict_runtime_zero_transition(fe_records):
    hours = pm.predict_runtime_hours("cmet_complex", 6.0, 0.0, "g4dn.4xl", fe_records)
    assert hours == pytest.approx(6.0 / 61.866 * 24.0, rel=1e-12)


def test_predict_runtime_uses_transition_record_when_present():
    records = [
        pm.BenchmarkRecord("s", "i", 1, 8, 0, "equilibration", 48.0),
        pm.BenchmarkRecord("s", "i", 1, 8, 0, "transition", 24.0),
    ]
    hours = pm.predict_runtime_hours("s", 6.0, 4.0, "i", records)
    assert hours == pytest.approx(6.0 / 48.0 * 24 + 4.0 / 24.0 * 24)


def test_predict_runtime_slowdown_fallback():
    records = [pm.BenchmarkRecord("s", "i", 1, 8, 0, "equilibration", 48.0)]
    hours = pm.predict_runtime_hours("s", 6.0, 4.0, "i", records, transition_slowdown=0.5)
    assert hours == pytest.approx(6.0 / 48.0 * 24 + 4.0 / 24.0 * 24)


def test_predict_runtime_missing_equilibration():
    with pytest.raises(MissingRecordError):
        pm.predict_runtime_hours("s", 6.0, 4.0, "i", [])


@given(rate=st.floats(1.0, 500.0))
def test_predict_runtime_inverse_in_rate(rate):
    slow = [pm.BenchmarkRecord("s", "i", 1, 1, 0, "equilibration", rate)]
    fast = [pm.BenchmarkRecord("s", "i", 1, 1, 0, "equilibration", 2 * rate)]
    t_slow = pm.predict_runtime_hours("s", 6.0, 4.0, "i", slow)
    t_fast = pm.predict_runtime_hours("s", 6.0, 4.0, "i", fast)
    assert t_fast == pytest.approx(t_slow / 2.0, rel=1e-9)


# -- recommendation ----------------------------------------------------------


def test_recommend_gpu_family_beats_cpu_under_deadline(fe_records, aws_catalog):
    ranked = pm.recommend(
        fe_records, aws_catalog, "cmet_complex", max_runtime_h=9.0, objective="min_cost", payment=cat.SPOT
    )
    assert ranked, "expected feasible instances"
    names = [r.instance for r in ranked]
    g4dn_positions = {n: names.index(n) for n in ("g4dn.2xl", "g4dn.4xl", "g4dn.8xl")}
    c5_positions = [i for i, n in enumerate(names) if n.startswith("c5.")]
    assert c5_positions, "c5 instances should be feasible too"
    assert max(g4dn_positions.values()) < min(c5_positions)
    # Constraint respected, and min_cost ordering is nondecreasing in cost.
    assert all(r.runtime_h <= 9.0 for r in ranked)
    costs = [r.cost for r in ranked]
    assert costs == sorted(costs)


def test_recommend_infeasible_deadline_returns_empty(fe_records, aws_catalog):
    assert pm.recommend(fe_records, aws_catalog, "cmet_complex", max_runtime_h=0.001) == []


def test_recommend_single_feasible(aws_catalog):
    records = [pm.BenchmarkRecord("solo", "c5.2xl", 1, 8, 0, "equilibration", 50.0)]
    ranked = pm.recommend(records, aws_catalog, "solo", max_runtime_h=10.0)
    assert [r.instance for r in ranked] == ["c5.2xl"]


def test_recommend_min_time_sorted_by_runtime(fe_records, aws_catalog):
    ranked = pm.recommend(fe_records, aws_catalog, "cmet_complex", objective="min_time")
    runtimes = [r.runtime_h for r in ranked]
    assert runtimes == sorted(runtimes)


# -- CSV ingestion -----------------------------------------------------------


def test_bench_csv_round_trip(tmp_path):
    path = tmp_path / "b.csv"
    path.write_text(
        "system,instance,ranks,threads,pme_ranks,phase,ns_per_day\n"
        "mem,c5.2xl,1,8,0,plain,12.5\n"
    )
    (rec,) = pm.load_benchmarks(path)
    assert rec.system == "mem" and rec.ns_per_day == 12.5


def test_bench_csv_bad_header(tmp_path):
    path = tmp_path / "b.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ParseError):
        pm.load_benchmarks(path)


def test_scaling_csv_groups_series(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text(
        "system,instance,n_instances,ns_per_day\n"
        "rib,c5n.18xl,1,5.0\n"
        "rib,c5n.18xl,2,9.0\n"
        "mem,c5n.18xl,1,89.0\n"
    )
    series = {s.system: s for s in pm.load_scaling(path)}
    assert series["rib"].points == ((1, 5.0), (2, 9.0))
    assert series["mem"].points == ((1, 89.0),)


def test_bundled_systems_table():
    systems = {s.name: s for s in pm.load_systems(__import__("spotbatch").data_path("systems.csv"))}
    assert systems["cmet_complex"].atoms == 67291
    assert systems["rib"].timestep_fs == 4.0
    assert systems["cmet_ligand"].perturbed_atoms == 61

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import spotbatch
from spotbatch import workload as wl
from spotbatch.errors import ValidationError


def small_spec(**kwargs):
    defaults = dict(
        targets=(wl.TargetSpec("t1", 50000, 6000, 2), wl.TargetSpec("t2", 80000, 5000, 3)),
        replicas=2,
        directions=2,
        forcefields=1,
        equil_ns=1.0,
        n_transitions=4,
        transition_ps=50.0,
        timestep_fs=2.0,
        chunk_steps=500_000,
    )
    defaults.update(kwargs)
    return wl.EnsembleSpec(**defaults)


# -- phase plans ---------------------------------------------------------------


def test_standard_phase_plan():
    plan = wl.make_phase_plan(6.0, 2.0, 500_000, 80, 50.0)
    assert plan.total_equil_steps == 3_000_000
    assert plan.equil_chunks == 6
    assert plan.chunk_steps == 500_000
    assert plan.n_transitions == 80
    assert plan.transition_steps == 25_000
    assert plan.max_chunk_iterations == 8


def test_single_chunk_degenerate_plan():
    plan = wl.make_phase_plan(1.0, 2.0, 500_000, 0, 50.0)
    assert plan.equil_chunks == 1
    assert plan.n_transitions == 0


def test_plan_with_larger_timestep():
    plan = wl.make_phase_plan(6.0, 4.0, 500_000, 80, 50.0)
    assert plan.total_equil_steps == 1_500_000
    assert plan.equil_chunks == 3
    assert plan.transition_steps == 12_500


def test_plan_rejects_more_chunks_than_restart_budget():
    with pytest.raises(ValidationError):
        wl.make_phase_plan(60.0, 2.0, 500_000, 80, 50.0)


def test_plan_rejects_nonpositive_inputs():
    with pytest.raises(ValueError):
        wl.make_phase_plan(0.0, 2.0)


def test_chunk_length_remainder():
    plan = wl.PhasePlan(3, 400, 1000, 0, 0)
    assert [plan.chunk_length(i) for i in range(3)] == [400, 400, 200]


def test_trajectory_ns_standard():
    plan = wl.make_phase_plan(6.0, 2.0, 500_000, 80, 50.0)
    assert wl.trajectory_ns(plan, 2.0) == pytest.approx(10.0)


def test_trajectory_ns_equilibration_only():
    plan = wl.PhasePlan(6, 500_000, 3_000_000, 0, 0)
    assert wl.trajectory_ns(plan, 2.0) == pytest.approx(6.0)


# -- expansion -----------------------------------------------------------------


def test_expand_counts_small():
    jobs = wl.expand_ensemble(small_spec())
    # 2 kinds x (2+3 edges) x 2 replicas x 2 directions x 1 forcefield
    assert len(jobs) == 2 * 5 * 2 * 2 * 1
    complexes = [j for j in jobs if j.kind == "complex"]
    assert len(complexes) == len(jobs) // 2


def test_expand_deterministic_ids():
    a = [j.id for j in wl.expand_ensemble(small_spec())]
    b = [j.id for j in wl.expand_ensemble(small_spec())]
    assert a == b
    assert len(set(a)) == len(a)


def test_expand_id_encoding():
    job = wl.expand_ensemble(small_spec())[0]
    assert job.id == "t1/edge_0000/ff0/r0/stateA/complex"
    assert job.input_ref == f"in/{job.id}"
    assert job.output_ref == f"out/{job.id}"


def test_default_policy_demands():
    jobs = wl.expand_ensemble(small_spec())
    for job in jobs:
        if job.kind == "complex":
            assert (job.vcpu_demand, job.gpu_demand) == (16, 1)
        else:
            assert (job.vcpu_demand, job.gpu_demand) == (8, 0)


def test_proxy_mapping_nearest_by_atoms():
    policy = {
        "complex": wl.KindPolicy(
            vcpus=16,
            gpus=1,
            proxy_systems=(("small_c", 35_000), ("mid_c", 67_000), ("big_c", 107_000)),
        ),
        "ligand": wl.KindPolicy(vcpus=8, gpus=0, proxy_systems=(("lig", 6_400),)),
    }
    jobs = wl.expand_ensemble(small_spec(), policy)
    by_target = {(j.target, j.kind): j.system for j in jobs}
    assert by_target[("t1", "complex")] == "small_c"  # 50k: 15k from 35k, 17k from 67k
    assert by_target[("t2", "complex")] == "mid_c"  # 80k: 13k from 67k, 27k from 107k
    assert by_target[("t1", "ligand")] == "lig"


def test_default_system_names():
    jobs = wl.expand_ensemble(small_spec())
    assert {j.system for j in jobs if j.target == "t1"} == {"t1_complex", "t1_ligand"}


@settings(max_examples=60)
@given(
    edges=st.lists(st.integers(0, 5), min_size=1, max_size=4),
    replicas=st.integers(1, 3),
    directions=st.integers(1, 2),
    forcefields=st.integers(1, 3),
)
def test_job_count_identity(edges, replicas, directions, forcefields):
    targets = tuple(
        wl.TargetSpec(f"t{i}", 10_000 + i, 5_000, e) for i, e in enumerate(edges)
    )
    spec = small_spec(
        targets=targets, replicas=replicas, directions=directions, forcefields=forcefields
    )
    jobs = wl.expand_ensemble(spec)
    assert len(jobs) == 2 * replicas * directions * forcefields * sum(edges)
    # Direct enumeration of distinct labels.
    assert len({j.fe_label for j in jobs}) == (sum(edges) * forcefields if sum(edges) else 0)
    assert wl.n_fe_differences(spec) == sum(edges) * forcefields


# -- bundled study workloads ----------------------------------------------------


def test_study1_workload_counts():
    w = wl.load_workload(spotbatch.data_path("workload_study1.json"))
    jobs = w.expand()
    assert len(jobs) == 19_872
    assert sum(1 for j in jobs if j.kind == "complex") == 9_936
    assert wl.n_fe_differences(w.spec) == 1_656
    cdk8_complex = [j for j in jobs if j.target == "cdk8" and j.kind == "complex"]
    assert len(cdk8_complex) == 972


def test_study2_workload_counts():
    w = wl.load_workload(spotbatch.data_path("workload_study2.json"))
    jobs = w.expand()
    assert len(jobs) == 6_984
    assert wl.n_fe_differences(w.spec) == 582


def test_study1_total_trajectory():
    w = wl.load_workload(spotbatch.data_path("workload_study1.json"))
    jobs = w.expand()
    total_us = sum(j.trajectory_ns for j in jobs) / 1000.0
    assert total_us == pytest.approx(198.72, abs=1e-9)


# -- progress -------------------------------------------------------------------


def test_progress_validation():
    plan = wl.make_phase_plan(6.0, 2.0, 500_000, 80, 50.0)
    wl.JobProgress(6, 37, False).validate(plan)
    with pytest.raises(ValidationError):
        wl.JobProgress(5, 1, False).validate(plan)  # transitions before chunks done
    with pytest.raises(ValidationError):
        wl.JobProgress(7, 0, False).validate(plan)  # more chunks than the plan has
    with pytest.raises(ValidationError):
        wl.JobProgress(6, 79, True).validate(plan)  # integrated too early


def test_progress_tuple_ordering():
    assert wl.JobProgress(1, 0, False).as_tuple() < wl.JobProgress(2, 0, False).as_tuple()
    assert wl.JobProgress(6, 3, False).as_tuple() < wl.JobProgress(6, 4, False).as_tuple()
    assert wl.JobProgress(6, 80, False).as_tuple() < wl.JobProgress(6, 80, True).as_tuple()

"""Scenario files: one JSON document describing a complete simulation run.

A scenario references a catalog, a workload, and the benchmark CSVs that
provide per-phase throughput, and sets the run knobs: routing policy,
allowed instance types per job kind, payment model, preemption hazards,
idle grace period, seed, metrics cadence, optional submission waves, pool
overrides, and scripted preemptions.  Relative paths are resolved against
the scenario file's directory.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .. import catalog as cat
from .. import perfmodel
from ..errors import ParseError
from ..workload import load_workload, n_fe_differences
from .engine import Engine, EngineConfig, MetricsSample, SummaryReport
from .preemption import PreemptionModel
from .routing import RoutingPolicy


@dataclass
class Scenario:
    catalog_path: Path
    workload_path: Path
    benchmark_paths: List[Path]
    routing: RoutingPolicy
    allowed_types: Dict[str, List[str]]
    payment: str = cat.SPOT
    hazards: Dict[str, float] = field(default_factory=dict)
    grace_period_s: Optional[float] = 120.0
    seed: int = 0
    metrics_interval_s: float = 60.0
    transition_slowdown: float = 1.0
    acquisition_latency_s: float = 0.0
    acquisitions_per_region_minute: Optional[float] = None
    scripted_preemptions: Dict[str, float] = field(default_factory=dict)
    waves: List[Tuple[float, Tuple[str, ...]]] = field(default_factory=list)
    pool_overrides: Dict[str, Dict[str, int]] = field(default_factory=dict)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    base = path.parent
    for key in ("catalog", "workload", "benchmarks", "routing", "allowed_types"):
        if key not in data:
            raise ParseError(f"{path}: scenario is missing the {key!r} key")
    routing_raw = data["routing"]
    routing = RoutingPolicy(
        weights={str(k): float(v) for k, v in routing_raw["weights"].items()},
        mode=routing_raw.get("mode", "weighted_random"),
    )
    waves = [
        (float(w["time_s"]), tuple(w["kinds"])) for w in data.get("waves", [])
    ]
    grace = data.get("grace_period_s", 120.0)
    return Scenario(
        catalog_path=base / data["catalog"],
        workload_path=base / data["workload"],
        benchmark_paths=[base / p for p in data["benchmarks"]],
        routing=routing,
        allowed_types={k: list(v) for k, v in data["allowed_types"].items()},
        payment=data.get("payment", cat.SPOT),
        hazards={str(k): float(v) for k, v in data.get("preemption_hazards", {}).items()},
        grace_period_s=None if grace is None else float(grace),
        seed=int(data.get("seed", 0)),
        metrics_interval_s=float(data.get("metrics_interval_s", 60.0)),
        transition_slowdown=float(data.get("transition_slowdown", 1.0)),
        acquisition_latency_s=float(data.get("acquisition_latency_s", 0.0)),
        acquisitions_per_region_minute=data.get("acquisitions_per_region_minute"),
        scripted_preemptions={
            str(p["instance_id"]): float(p["time_s"]) for p in data.get("scripted_preemptions", [])
        },
        waves=waves,
        pool_overrides={
            str(r): {str(f): int(c) for f, c in fams.items()}
            for r, fams in data.get("pool_overrides", {}).items()
        },
    )


def build_engine(
    scenario: Scenario,
    seed: Optional[int] = None,
    record_events: bool = False,
    strict_checks: bool = False,
) -> Engine:
    """Wire catalog, workload, and benchmarks into a ready-to-run engine."""
    catalog = cat.load_catalog(scenario.catalog_path)
    workload = load_workload(scenario.workload_path)
    jobs = workload.expand()
    records = perfmodel.load_many_benchmarks(scenario.benchmark_paths)
    config = EngineConfig(
        routing=scenario.routing,
        allowed_types=scenario.allowed_types,
        payment=scenario.payment,
        preemption=PreemptionModel(scenario.hazards),
        grace_period_s=scenario.grace_period_s,
        seed=scenario.seed if seed is None else seed,
        metrics_interval_s=scenario.metrics_interval_s,
        transition_slowdown=scenario.transition_slowdown,
        acquisition_latency_s=scenario.acquisition_latency_s,
        acquisitions_per_region_minute=scenario.acquisitions_per_region_minute,
        scripted_preemptions=scenario.scripted_preemptions,
        waves=scenario.waves,
        pool_overrides=scenario.pool_overrides,
        n_fe_differences=n_fe_differences(workload.spec),
        record_events=record_events,
        strict_checks=strict_checks,
    )
    return Engine(catalog, jobs, records, config)


def run_scenario(
    scenario: Scenario,
    seed: Optional[int] = None,
    record_events: bool = False,
    strict_checks: bool = False,
) -> Tuple[Engine, SummaryReport]:
    engine = build_engine(scenario, seed=seed, record_events=record_events, strict_checks=strict_checks)
    report = engine.run()
    return engine, report


METRICS_HEADER = ["time_s", "region", "instance_type", "active_instances", "vcpus_in_use", "gpus_in_use"]


def write_metrics_csv(samples: List[MetricsSample], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_HEADER)
        for s in samples:
            writer.writerow(
                [f"{s.time_s:g}", s.region, s.instance_type, s.active_instances, s.vcpus_in_use, s.gpus_in_use]
            )


def write_event_log(rows, path) -> None:
    with open(path, "w") as fh:
        fh.write("time_s,seq,kind,job_id,instance_id\n")
        for time_s, seq, kind, job_id, instance_id in rows:
            fh.write(f"{time_s:g},{seq},{kind},{job_id},{instance_id}\n")


def write_summary_json(report: SummaryReport, path) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")

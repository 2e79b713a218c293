"""Benchmark ingestion and performance/price analytics.

Works on measured simulation throughput (ns of trajectory per day) for
(system, instance) pairs.  Provides performance-to-price ratios, strong
scaling efficiency, Pareto frontiers over (price, performance) points,
job runtime prediction from per-phase throughput, and constrained
instance recommendation.

All operations are pure functions over immutable records.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

from . import catalog as cat
from .errors import MissingRecordError, ParseError, ValidationError

HOURS_PER_DAY = 24.0

PHASE_PLAIN = "plain"
PHASE_EQUILIBRATION = "equilibration"
PHASE_TRANSITION = "transition"
PHASES = (PHASE_PLAIN, PHASE_EQUILIBRATION, PHASE_TRANSITION)

BENCH_CSV_HEADER = ["system", "instance", "ranks", "threads", "pme_ranks", "phase", "ns_per_day"]
SCALING_CSV_HEADER = ["system", "instance", "n_instances", "ns_per_day"]
SYSTEMS_CSV_HEADER = ["name", "atoms", "timestep_fs", "cutoff_nm", "grid_spacing_nm", "perturbed_atoms"]


@dataclass(frozen=True)
class BenchSystem:
    """One benchmark input system (size, integration step, PME settings)."""

    name: str
    atoms: int
    timestep_fs: float
    cutoff_nm: float = 1.0
    grid_spacing_nm: float = 0.12
    perturbed_atoms: int = 0

    def __post_init__(self):
        if self.atoms <= 0:
            raise ValidationError(f"system {self.name}: atoms must be > 0")
        if self.timestep_fs <= 0:
            raise ValidationError(f"system {self.name}: timestep_fs must be > 0")


@dataclass(frozen=True)
class BenchmarkRecord:
    """A single measured throughput for (system, instance, run configuration)."""

    system: str
    instance: str
    ranks: int
    threads: int
    pme_ranks: int
    phase: str
    ns_per_day: float

    def __post_init__(self):
        where = f"benchmark ({self.system}, {self.instance}, {self.ranks}x{self.threads})"
        if self.ns_per_day <= 0:
            raise ValidationError(f"{where}: ns_per_day must be > 0")
        if self.ranks < 1 or self.threads < 1:
            raise ValidationError(f"{where}: ranks and threads must be >= 1")
        if self.pme_ranks < 0:
            raise ValidationError(f"{where}: pme_ranks must be >= 0")
        if self.phase not in PHASES:
            raise ValidationError(f"{where}: unknown phase {self.phase!r}")


@dataclass(frozen=True)
class ScalingSeries:
    """Throughput of one system on 1..n instances of the same type.

    Points are (instance count, ns/day), strictly increasing in count,
    and the first point must be the single-instance baseline.
    """

    system: str
    instance: str
    points: Tuple[Tuple[int, float], ...]

    def __post_init__(self):
        where = f"scaling series ({self.system}, {self.instance})"
        if not self.points:
            raise ValidationError(f"{where}: empty")
        if self.points[0][0] != 1:
            raise ValidationError(f"{where}: first point must have n = 1")
        last_n = 0
        for n, perf in self.points:
            if n <= last_n:
                raise ValidationError(f"{where}: instance counts must be strictly increasing")
            if perf <= 0:
                raise ValidationError(f"{where}: performance at n={n} must be > 0")
            last_n = n

    def performance_at(self, n: int) -> float:
        for count, perf in self.points:
            if count == n:
                return perf
        raise MissingRecordError(f"scaling series ({self.system}, {self.instance}) has no point at n={n}")


@dataclass(frozen=True)
class PerfPoint:
    """A labeled (hourly price, throughput) point for frontier analysis."""

    label: str
    price_per_hour: float
    ns_per_day: float

    def __post_init__(self):
        if self.price_per_hour <= 0 or self.ns_per_day <= 0:
            raise ValidationError(f"perf point {self.label}: price and performance must be > 0")


@dataclass(frozen=True)
class Recommendation:
    """One ranked entry produced by recommend()."""

    instance: str
    ranks: int
    threads: int
    runtime_h: float
    cost: float


def pp_ratio(ns_per_day: float, price_per_hour: float) -> float:
    """Performance-to-price ratio: ns of trajectory per currency unit.

    Uses a 24 h/day conversion so the value matches spreadsheet-style
    ``ns_per_day / (24 * hourly_price)`` columns.
    """
    if ns_per_day <= 0:
        raise ValueError("ns_per_day must be > 0")
    if price_per_hour <= 0:
        raise ValueError("price_per_hour must be > 0")
    return ns_per_day / (HOURS_PER_DAY * price_per_hour)


def parallel_efficiency(series: ScalingSeries) -> List[Tuple[int, float]]:
    """Efficiency at each point of a scaling series: perf(n) / (n * perf(1)).

    The single-instance point yields exactly 1.0.  Values above 1 (superlinear
    scaling) are returned as measured, never clamped.
    """
    if series.points[0][0] != 1:
        raise ValidationError("scaling series lacks the n = 1 baseline")
    base = series.points[0][1]
    out = []
    for n, perf in series.points:
        out.append((n, 1.0 if n == 1 else perf / (n * base)))
    return out


def speedup(series: ScalingSeries, n: int) -> float:
    """Throughput gain at n instances relative to one instance."""
    return series.performance_at(n) / series.points[0][1]


def best_config(
    records: Iterable[BenchmarkRecord],
    system: str,
    instance: str,
    phase: Optional[str] = None,
) -> BenchmarkRecord:
    """Pick the fastest measured run configuration for (system, instance).

    Ties on throughput are broken toward fewer ranks, then fewer PME ranks,
    so repeated calls are deterministic.
    """
    candidates = [
        r
        for r in records
        if r.system == system and r.instance == instance and (phase is None or r.phase == phase)
    ]
    if not candidates:
        raise MissingRecordError(f"no benchmark record for ({system}, {instance}, phase={phase})")
    return min(candidates, key=lambda r: (-r.ns_per_day, r.ranks, r.pme_ranks))


def pareto_frontier(points: Iterable[PerfPoint]) -> List[PerfPoint]:
    """Return the non-dominated subset, ordered by ascending price.

    A point is dominated when some other point is at least as fast and at
    most as expensive, with at least one of the two strictly better.
    """
    pts = list(points)
    if not pts:
        raise ValueError("pareto_frontier requires a nonempty set of points")
    frontier = []
    for p in pts:
        dominated = False
        for q in pts:
            if q is p:
                continue
            if (
                q.ns_per_day >= p.ns_per_day
                and q.price_per_hour <= p.price_per_hour
                and (q.ns_per_day > p.ns_per_day or q.price_per_hour < p.price_per_hour)
            ):
                dominated = True
                break
        if not dominated:
            frontier.append(p)
    frontier.sort(key=lambda p: (p.price_per_hour, -p.ns_per_day, p.label))
    return frontier


def predict_runtime_hours(
    system: str,
    equil_ns: float,
    transition_ns: float,
    instance: str,
    records: Iterable[BenchmarkRecord],
    transition_slowdown: float = 1.0,
) -> float:
    """Predict wall-clock hours for a two-phase job on one instance.

    The equilibration phase uses the best measured equilibration throughput
    for (system, instance).  The transition phase uses a measured transition
    record when one exists; otherwise the equilibration rate scaled by
    ``transition_slowdown`` is used.
    """
    records = list(records)
    equil = best_config(records, system, instance, phase=PHASE_EQUILIBRATION)
    equil_rate = equil.ns_per_day
    hours = equil_ns / equil_rate * HOURS_PER_DAY
    if transition_ns > 0:
        try:
            trans_rate = best_config(records, system, instance, phase=PHASE_TRANSITION).ns_per_day
        except MissingRecordError:
            trans_rate = equil_rate * transition_slowdown
        hours += transition_ns / trans_rate * HOURS_PER_DAY
    return hours


def predict_job_runtime(job, instance: str, records, transition_slowdown: float = 1.0) -> float:
    """Predict wall-clock hours for a job (anything exposing system/equil_ns/transition_ns)."""
    return predict_runtime_hours(
        job.system, job.equil_ns, job.transition_ns, instance, records, transition_slowdown
    )


def recommend(
    records: Iterable[BenchmarkRecord],
    catalog: cat.Catalog,
    system: str,
    max_runtime_h: Optional[float] = None,
    objective: str = "min_cost",
    payment: str = cat.SPOT,
    region: Optional[str] = None,
    equil_ns: float = 6.0,
    transition_ns: float = 4.0,
    transition_slowdown: float = 1.0,
) -> List[Recommendation]:
    """Rank priced, benchmarked instance types for a system under constraints.

    Candidates are all catalog instances with an equilibration benchmark for
    the system and a price in the chosen region (default: the catalog's
    first region).  Instances whose predicted runtime exceeds
    ``max_runtime_h`` are dropped.  An empty list means no instance
    satisfies the constraints; that is a result, not an error.
    """
    if objective not in ("min_cost", "min_time"):
        raise ValueError(f"unknown objective {objective!r}")
    records = list(records)
    if region is None:
        region = next(iter(catalog.regions))
    out = []
    for name in catalog.instances:
        if not catalog.has_price(name, region):
            continue
        try:
            config = best_config(records, system, name, phase=PHASE_EQUILIBRATION)
        except MissingRecordError:
            continue
        runtime = predict_runtime_hours(
            system, equil_ns, transition_ns, name, records, transition_slowdown
        )
        if max_runtime_h is not None and runtime > max_runtime_h:
            continue
        rate = cat.lookup_rate(catalog, name, region, payment)
        out.append(Recommendation(name, config.ranks, config.threads, runtime, runtime * rate))
    if not out:
        return []
    if objective == "min_cost":
        out.sort(key=lambda r: (r.cost, r.instance))
    else:
        out.sort(key=lambda r: (r.runtime_h, r.instance))
    return out


def _read_csv(path, expected_header: List[str]):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != expected_header:
            raise ParseError(
                f"{path}: expected header {','.join(expected_header)!r}, got {reader.fieldnames}"
            )
        return list(reader)


def load_benchmarks(path) -> List[BenchmarkRecord]:
    """Load benchmark records from CSV (header: system,instance,ranks,threads,pme_ranks,phase,ns_per_day)."""
    rows = _read_csv(path, BENCH_CSV_HEADER)
    records = []
    for i, row in enumerate(rows, start=2):
        try:
            records.append(
                BenchmarkRecord(
                    system=row["system"].strip(),
                    instance=row["instance"].strip(),
                    ranks=int(row["ranks"]),
                    threads=int(row["threads"]),
                    pme_ranks=int(row["pme_ranks"]),
                    phase=row["phase"].strip(),
                    ns_per_day=float(row["ns_per_day"]),
                )
            )
        except (KeyError, TypeError) as exc:
            raise ParseError(f"{path}:{i}: malformed row: {exc}") from exc
    return records


def load_many_benchmarks(paths) -> List[BenchmarkRecord]:
    records = []
    for p in paths:
        records.extend(load_benchmarks(p))
    return records


def load_scaling(path) -> List[ScalingSeries]:
    """Load scaling series from CSV (header: system,instance,n_instances,ns_per_day)."""
    rows = _read_csv(path, SCALING_CSV_HEADER)
    grouped = {}
    for row in rows:
        key = (row["system"].strip(), row["instance"].strip())
        grouped.setdefault(key, []).append((int(row["n_instances"]), float(row["ns_per_day"])))
    series = []
    for (system, instance), points in grouped.items():
        points.sort(key=lambda p: p[0])
        series.append(ScalingSeries(system=system, instance=instance, points=tuple(points)))
    return series


def load_systems(path) -> List[BenchSystem]:
    rows = _read_csv(path, SYSTEMS_CSV_HEADER)
    return [
        BenchSystem(
            name=row["name"].strip(),
            atoms=int(row["atoms"]),
            timestep_fs=float(row["timestep_fs"]),
            cutoff_nm=float(row["cutoff_nm"]),
            grid_spacing_nm=float(row["grid_spacing_nm"]),
            perturbed_atoms=int(row["perturbed_atoms"]),
        )
        for row in rows
    ]

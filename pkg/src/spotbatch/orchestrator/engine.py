"""Deterministic discrete-event engine for a global batch run.

Models the full lifecycle of an ensemble run on preemptible cloud
capacity: jobs are routed to regions by weight, packed first-fit onto
already-acquired instances or trigger a new acquisition from the region's
finite per-family pool, then execute their phase plan chunk by chunk.
Completed chunks and transitions are persisted; when an instance is
reclaimed, its resident jobs lose only the work since the last persisted
boundary and re-enter routing as fresh submissions.  Instances accrue
cost per second from activation to termination and idle instances
terminate after a grace period.

Determinism: a single seeded RNG drives routing draws and preemption
draws; events are processed in (time, seq) order with seq assigned at
scheduling time.  Planned preemptions are only materialized into events
once no earlier-or-equal-time event remains, so a completion and a
preemption falling on the same timestamp always resolve in the job's
favor.  Equal inputs and seed reproduce the event log bit for bit.

The engine is strictly single-threaded; independent engines may run
concurrently but must never share state.
"""

from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .. import catalog as cat
from .. import perfmodel
from ..errors import MissingRecordError, SimulationError, ValidationError
from ..workload import JobProgress, JobSpec, PhasePlan
from .preemption import PreemptionModel
from .routing import Router, RoutingPolicy

EV_JOB_SUBMITTED = "job_submitted"
EV_INSTANCE_ACQUIRED = "instance_acquired"
EV_CHUNK_DONE = "chunk_done"
EV_TRANSITION_DONE = "transition_done"
EV_INTEGRATE_DONE = "integrate_done"
EV_PREEMPTION = "preemption"
EV_IDLE_TIMEOUT = "instance_idle_timeout"
EV_JOB_COMPLETED = "job_completed"

_WORK_EVENTS = (EV_CHUNK_DONE, EV_TRANSITION_DONE, EV_INTEGRATE_DONE, EV_JOB_COMPLETED)

SECONDS_PER_DAY = 86400.0

ST_PENDING = "pending"
ST_QUEUED = "queued"
ST_RUNNING = "running"
ST_DONE = "done"
ST_FAILED = "failed"


@dataclass
class SimEvent:
    """One scheduled event; processed in (time, seq) order."""

    time: float
    seq: int
    kind: str
    job_id: Optional[str] = None
    instance_id: Optional[str] = None
    epoch: int = 0

    def log_row(self) -> Tuple[float, int, str, str, str]:
        return (self.time, self.seq, self.kind, self.job_id or "", self.instance_id or "")


@dataclass(frozen=True)
class WorkItem:
    """The next thing a job has to run: a chunk, a transition, integration, or nothing."""

    kind: str  # "chunk" | "transition" | "integrate" | "done"
    index: int = 0


def resume_point(plan: PhasePlan, progress: JobProgress) -> WorkItem:
    """Where a job continues from its persisted progress.

    Chunks run first; once all chunks are persisted, transitions follow one
    by one; after the last transition the work values are integrated; then
    the job is done.
    """
    progress.validate(plan)
    if progress.chunks_done < plan.equil_chunks:
        return WorkItem("chunk", progress.chunks_done)
    if progress.transitions_done < plan.n_transitions:
        return WorkItem("transition", progress.transitions_done)
    if not progress.integrated:
        return WorkItem("integrate")
    return WorkItem("done")


@dataclass
class InstanceState:
    """One acquired (or requested) instance and its current occupancy."""

    id: str
    type_name: str
    region: str
    vcpus: int
    gpus: int
    rate: float
    acquired_at: float
    family: str
    active: bool = False
    terminated_at: Optional[float] = None
    resident_jobs: List[str] = field(default_factory=list)
    free_vcpus: int = 0
    free_gpus: int = 0
    idle_epoch: int = 0
    planned_preemption: Optional[float] = None
    created_seq: int = 0

    @property
    def terminated(self) -> bool:
        return self.terminated_at is not None


@dataclass
class LedgerEntry:
    instance_id: str
    duration_seconds: float
    rate_per_hour: float
    cost: float


@dataclass
class BillingLedger:
    """Per-instance billing plus the productive/wasted compute split.

    Core-seconds are counted in vCPU-seconds (the rentable unit).
    Productive time is work that reached a persisted boundary; wasted time
    is work discarded by a preemption.  Idle capacity is neither and shows
    up only in the billed totals.
    """

    entries: List[LedgerEntry] = field(default_factory=list)
    total_cost: float = 0.0
    productive_core_seconds: float = 0.0
    wasted_core_seconds: float = 0.0
    billed_core_seconds: float = 0.0

    def bill(self, instance: InstanceState, until: float) -> LedgerEntry:
        duration = until - instance.acquired_at
        entry = LedgerEntry(instance.id, duration, instance.rate, duration / 3600.0 * instance.rate)
        self.entries.append(entry)
        self.total_cost += entry.cost
        self.billed_core_seconds += duration * instance.vcpus
        return entry


@dataclass
class MetricsSample:
    time_s: float
    region: str
    instance_type: str
    active_instances: int
    vcpus_in_use: int
    gpus_in_use: int


@dataclass
class EngineConfig:
    """Everything that shapes one simulation besides catalog and jobs."""

    routing: RoutingPolicy
    allowed_types: Dict[str, List[str]]
    payment: str = cat.SPOT
    preemption: PreemptionModel = field(default_factory=PreemptionModel)
    grace_period_s: Optional[float] = 120.0
    seed: int = 0
    metrics_interval_s: float = 60.0
    transition_slowdown: float = 1.0
    acquisition_latency_s: float = 0.0
    acquisitions_per_region_minute: Optional[float] = None
    scripted_preemptions: Dict[str, float] = field(default_factory=dict)
    waves: List[Tuple[float, Tuple[str, ...]]] = field(default_factory=list)
    pool_overrides: Dict[str, Dict[str, int]] = field(default_factory=dict)
    n_fe_differences: Optional[int] = None
    record_events: bool = False
    strict_checks: bool = False


@dataclass
class SummaryReport:
    seed: int
    makespan_s: float
    final_time_s: float
    total_cost: float
    cost_per_fe: Optional[float]
    n_fe_differences: int
    n_jobs: int
    n_completed: int
    n_failed: int
    n_submissions: int
    n_instances: int
    n_preemptions: int
    n_events: int
    productive_core_hours: float
    wasted_core_hours: float
    billed_core_hours: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class _Job:
    spec: JobSpec
    progress: JobProgress = field(default_factory=JobProgress)
    status: str = ST_PENDING
    epoch: int = 0
    instance_id: Optional[str] = None
    region: Optional[str] = None
    work_started_at: float = 0.0
    current_item: Optional[WorkItem] = None
    submissions: int = 0
    completed_at: Optional[float] = None


class Engine:
    """Single-run simulation state plus the event loop."""

    def __init__(
        self,
        catalog: cat.Catalog,
        jobs: Sequence[JobSpec],
        records: Iterable[perfmodel.BenchmarkRecord],
        config: EngineConfig,
    ):
        self.catalog = catalog
        self.config = config
        self.records = list(records)
        self.rng = random.Random(config.seed)
        self.router = Router(config.routing, self.rng)
        self.clock = 0.0
        self.ledger = BillingLedger()
        self.samples: List[MetricsSample] = []
        self.event_log: List[Tuple[float, int, str, str, str]] = []
        self.preemption_waste: List[Tuple[str, str, float, str, float]] = []
        self.n_preemptions = 0
        self.n_submissions = 0
        self.n_events = 0

        self._heap: List[Tuple[float, int, SimEvent]] = []
        self._preheap: List[Tuple[float, int, str]] = []  # planned reclaims, lazily invalidated
        self._last_progress: Dict[str, Tuple[int, int, bool]] = {}
        self._seq = 0
        self._instance_counter = 0
        self._next_sample = 0.0
        self._last_completion = 0.0
        self._region_next_slot: Dict[str, float] = {}
        self._rate_cache: Dict[Tuple[str, str, str], float] = {}

        for region in config.routing.weights:
            if region not in catalog.regions:
                raise ValidationError(f"routing weight references unknown region {region!r}")
        routed = [r for r, w in config.routing.weights.items() if w > 0]
        for kind, names in config.allowed_types.items():
            for name in names:
                catalog.instance(name)  # raises on unknown types
                for region in routed:
                    # Fail now rather than mid-run at the first acquisition.
                    cat.lookup_rate(catalog, name, region, config.payment)

        self.jobs: Dict[str, _Job] = {}
        for spec in jobs:
            if spec.id in self.jobs:
                raise ValidationError(f"duplicate job id {spec.id}")
            self.jobs[spec.id] = _Job(spec=spec)

        self.instances: Dict[str, InstanceState] = {}
        self._region_instances: Dict[str, List[str]] = {r: [] for r in catalog.regions}
        self._region_free: Dict[str, set] = {r: set() for r in catalog.regions}
        self._region_queue: Dict[str, List[str]] = {r: [] for r in catalog.regions}
        self._pool: Dict[Tuple[str, str], int] = {}

        self._submitted = False

    # -- scheduling primitives -------------------------------------------

    def _schedule(self, time: float, kind: str, job_id=None, instance_id=None, epoch=0) -> SimEvent:
        ev = SimEvent(time=time, seq=self._seq, kind=kind, job_id=job_id, instance_id=instance_id, epoch=epoch)
        self._seq += 1
        heapq.heappush(self._heap, (ev.time, ev.seq, ev))
        return ev

    def _pool_remaining(self, region: str, family: str) -> int:
        key = (region, family)
        if key not in self._pool:
            override = self.config.pool_overrides.get(region, {})
            if family in override:
                cap = override[family]
            elif "*" in override:
                cap = override["*"]
            else:
                cap = self.catalog.region(region).pool_capacity(family)
            self._pool[key] = cap
        return self._pool[key]

    def _rate_ns_per_day(self, system: str, type_name: str, phase: str) -> float:
        key = (system, type_name, phase)
        if key not in self._rate_cache:
            equil = perfmodel.best_config(
                self.records, system, type_name, phase=perfmodel.PHASE_EQUILIBRATION
            ).ns_per_day
            if phase == perfmodel.PHASE_TRANSITION:
                try:
                    rate = perfmodel.best_config(
                        self.records, system, type_name, phase=perfmodel.PHASE_TRANSITION
                    ).ns_per_day
                except MissingRecordError:
                    rate = equil * self.config.transition_slowdown
            else:
                rate = equil
            self._rate_cache[key] = rate
        return self._rate_cache[key]

    def _item_duration(self, job: _Job, item: WorkItem, type_name: str) -> float:
        spec = job.spec
        plan = spec.phase_plan
        if item.kind == "chunk":
            steps = plan.chunk_length(item.index)
            phase = perfmodel.PHASE_EQUILIBRATION
        elif item.kind == "transition":
            steps = plan.transition_steps
            phase = perfmodel.PHASE_TRANSITION
        else:
            return 0.0
        ns = steps * spec.timestep_fs * 1e-6
        rate = self._rate_ns_per_day(spec.system, type_name, phase)
        return ns / rate * SECONDS_PER_DAY

    # -- submission -------------------------------------------------------

    def _submission_time(self, spec: JobSpec) -> float:
        for time_s, kinds in self.config.waves:
            if spec.kind in kinds:
                return time_s
        return 0.0

    def submit_all(self) -> None:
        """Schedule the initial submission event of every job (honoring waves)."""
        if self._submitted:
            raise SimulationError("jobs were already submitted")
        self._submitted = True
        for job_id, job in self.jobs.items():
            self._schedule(self._submission_time(job.spec), EV_JOB_SUBMITTED, job_id=job_id)

    # -- placement --------------------------------------------------------

    def _board(self, job: _Job, inst: InstanceState, now: float) -> None:
        inst.free_vcpus -= job.spec.vcpu_demand
        inst.free_gpus -= job.spec.gpu_demand
        inst.resident_jobs.append(job.spec.id)
        inst.idle_epoch += 1  # cancels any pending idle timeout
        if inst.free_vcpus < 1:
            self._region_free[inst.region].discard(inst.id)
        job.instance_id = inst.id
        job.status = ST_RUNNING
        if inst.active:
            self._start_next_item(job, now)

    def _acquire(self, job: _Job, type_name: str, region: str, now: float) -> InstanceState:
        spec = self.catalog.instance(type_name)
        rate = cat.lookup_rate(self.catalog, type_name, region, self.config.payment)
        self._pool[(region, spec.family)] = self._pool_remaining(region, spec.family) - 1
        activation = now + self.config.acquisition_latency_s
        per_minute = self.config.acquisitions_per_region_minute
        if per_minute:
            slot = max(self._region_next_slot.get(region, 0.0), now)
            activation = max(activation, slot)
            self._region_next_slot[region] = slot + 60.0 / per_minute
        self._instance_counter += 1
        inst = InstanceState(
            id=f"i{self._instance_counter:04d}",
            type_name=type_name,
            region=region,
            vcpus=spec.vcpus,
            gpus=spec.gpus,
            rate=rate,
            acquired_at=activation,
            family=spec.family,
            free_vcpus=spec.vcpus,
            free_gpus=spec.gpus,
            created_seq=self._instance_counter,
        )
        self.instances[inst.id] = inst
        self._region_instances[region].append(inst.id)
        self._region_free[region].add(inst.id)
        self._schedule(activation, EV_INSTANCE_ACQUIRED, instance_id=inst.id)
        self._board(job, inst, now)
        return inst

    def _place(self, job: _Job, now: float) -> str:
        """First-fit pack, else acquire, else queue; infeasible demands fail.

        Only instances with at least one free vCPU are scanned (full ones
        can never accept a job), in acquisition order.
        """
        region = job.region
        allowed = self.config.allowed_types.get(job.spec.kind, [])
        vd, gd = job.spec.vcpu_demand, job.spec.gpu_demand
        open_instances = sorted(
            (self.instances[i] for i in self._region_free[region]), key=lambda x: x.created_seq
        )
        for inst in open_instances:
            if inst.type_name not in allowed:
                continue
            if inst.free_vcpus >= vd and inst.free_gpus >= gd:
                self._board(job, inst, now)
                return "packed"
        for type_name in allowed:
            spec = self.catalog.instance(type_name)
            if spec.vcpus >= vd and spec.gpus >= gd and self._pool_remaining(region, spec.family) > 0:
                self._acquire(job, type_name, region, now)
                return "acquired"
        if not any(
            self.catalog.instance(t).vcpus >= vd and self.catalog.instance(t).gpus >= gd
            for t in allowed
        ):
            job.status = ST_FAILED
            return "infeasible"
        job.status = ST_QUEUED
        return "queued"

    def _retry_queue(self, region: str, now: float) -> None:
        queue = self._region_queue[region]
        if not queue:
            return
        still_waiting = []
        failed_shapes = set()
        for job_id in queue:
            job = self.jobs[job_id]
            shape = (job.spec.kind, job.spec.vcpu_demand, job.spec.gpu_demand)
            if shape in failed_shapes:
                # Identical demand already failed against unchanged
                # capacity this pass; it would fail again.
                still_waiting.append(job_id)
                continue
            outcome = self._place(job, now)
            if outcome == "queued":
                failed_shapes.add(shape)
                still_waiting.append(job_id)
        self._region_queue[region] = still_waiting

    # -- job execution ----------------------------------------------------

    def _start_next_item(self, job: _Job, now: float) -> None:
        item = resume_point(job.spec.phase_plan, job.progress)
        job.current_item = item
        job.work_started_at = now
        inst = self.instances[job.instance_id]
        if item.kind == "done":
            self._schedule(now, EV_JOB_COMPLETED, job_id=job.spec.id, instance_id=inst.id, epoch=job.epoch)
            return
        duration = self._item_duration(job, item, inst.type_name)
        kind = {
            "chunk": EV_CHUNK_DONE,
            "transition": EV_TRANSITION_DONE,
            "integrate": EV_INTEGRATE_DONE,
        }[item.kind]
        self._schedule(now + duration, kind, job_id=job.spec.id, instance_id=inst.id, epoch=job.epoch)

    def _finish_item(self, job: _Job, now: float) -> None:
        """Credit the finished work item as productive and persist progress."""
        elapsed = now - job.work_started_at
        self.ledger.productive_core_seconds += elapsed * job.spec.vcpu_demand
        item = job.current_item
        if item.kind == "chunk":
            job.progress.chunks_done += 1
        elif item.kind == "transition":
            job.progress.transitions_done += 1
        elif item.kind == "integrate":
            job.progress.integrated = True
        job.progress.validate(job.spec.phase_plan)

    # -- instance teardown --------------------------------------------------

    def _terminate_instance(self, inst: InstanceState, now: float) -> None:
        inst.terminated_at = now
        inst.planned_preemption = None
        self._region_free[inst.region].discard(inst.id)
        self.ledger.bill(inst, now)
        self._pool[(inst.region, inst.family)] = self._pool_remaining(inst.region, inst.family) + 1

    # -- event handlers -----------------------------------------------------

    def _on_job_submitted(self, ev: SimEvent, now: float) -> None:
        job = self.jobs[ev.job_id]
        job.submissions += 1
        self.n_submissions += 1
        job.region = self.router.route(job.spec)
        outcome = self._place(job, now)
        if outcome == "queued":
            self._region_queue[job.region].append(job.spec.id)
        elif outcome == "acquired":
            # Leftover capacity on the fresh instance may fit queued jobs.
            self._retry_queue(job.region, now)

    def _on_instance_acquired(self, ev: SimEvent, now: float) -> None:
        inst = self.instances[ev.instance_id]
        inst.active = True
        draw = self.config.preemption.draw_seconds_until_preemption(self.rng, inst.region, inst.family)
        planned = None if draw is None else now + draw
        scripted = self.config.scripted_preemptions.get(inst.id)
        if scripted is not None:
            scripted = max(scripted, now)
            planned = scripted if planned is None else min(planned, scripted)
        inst.planned_preemption = planned
        if planned is not None:
            heapq.heappush(self._preheap, (planned, inst.created_seq, inst.id))
        for job_id in list(inst.resident_jobs):
            self._start_next_item(self.jobs[job_id], now)

    def _on_work_done(self, ev: SimEvent, now: float) -> None:
        job = self.jobs[ev.job_id]
        self._finish_item(job, now)
        self._start_next_item(job, now)

    def _on_job_completed(self, ev: SimEvent, now: float) -> None:
        job = self.jobs[ev.job_id]
        inst = self.instances[job.instance_id]
        job.status = ST_DONE
        job.completed_at = now
        job.current_item = None
        self._last_completion = max(self._last_completion, now)
        inst.resident_jobs.remove(job.spec.id)
        inst.free_vcpus += job.spec.vcpu_demand
        inst.free_gpus += job.spec.gpu_demand
        if inst.free_vcpus >= 1:
            self._region_free[inst.region].add(inst.id)
        job.instance_id = None
        inst.idle_epoch += 1
        if not inst.resident_jobs and self.config.grace_period_s is not None:
            self._schedule(
                now + self.config.grace_period_s,
                EV_IDLE_TIMEOUT,
                instance_id=inst.id,
                epoch=inst.idle_epoch,
            )
        self._retry_queue(inst.region, now)

    def _on_preemption(self, ev: SimEvent, now: float) -> None:
        inst = self.instances[ev.instance_id]
        if inst.terminated:
            return
        self.n_preemptions += 1
        self._terminate_instance(inst, now)
        for job_id in list(inst.resident_jobs):
            job = self.jobs[job_id]
            wasted = now - job.work_started_at
            self.ledger.wasted_core_seconds += wasted * job.spec.vcpu_demand
            item = job.current_item
            self.preemption_waste.append(
                (
                    inst.id,
                    job_id,
                    wasted,
                    item.kind,
                    self._item_duration(job, item, inst.type_name),
                )
            )
            job.epoch += 1  # invalidates the in-flight completion event
            job.instance_id = None
            job.current_item = None
            job.status = ST_PENDING
            self._schedule(now, EV_JOB_SUBMITTED, job_id=job_id)
        inst.resident_jobs.clear()
        inst.free_vcpus = inst.vcpus
        inst.free_gpus = inst.gpus
        self._retry_queue(inst.region, now)

    def _on_idle_timeout(self, ev: SimEvent, now: float) -> None:
        inst = self.instances[ev.instance_id]
        self._terminate_instance(inst, now)
        self._retry_queue(inst.region, now)

    # -- staleness ----------------------------------------------------------

    def _is_stale(self, ev: SimEvent) -> bool:
        if ev.kind in _WORK_EVENTS:
            return self.jobs[ev.job_id].epoch != ev.epoch
        if ev.kind == EV_IDLE_TIMEOUT:
            inst = self.instances[ev.instance_id]
            return inst.terminated or inst.resident_jobs != [] or inst.idle_epoch != ev.epoch
        if ev.kind == EV_PREEMPTION:
            return self.instances[ev.instance_id].terminated
        return False

    # -- metrics --------------------------------------------------------------

    def _take_sample(self, time_s: float) -> None:
        by_key: Dict[Tuple[str, str], List[int]] = {}
        for inst in self.instances.values():
            if not inst.active or inst.terminated:
                continue
            key = (inst.region, inst.type_name)
            agg = by_key.setdefault(key, [0, 0, 0])
            agg[0] += 1
            agg[1] += inst.vcpus - inst.free_vcpus
            agg[2] += inst.gpus - inst.free_gpus
        for (region, type_name), (count, vcpus, gpus) in sorted(by_key.items()):
            self.samples.append(MetricsSample(time_s, region, type_name, count, vcpus, gpus))

    def _flush_samples(self, before: float) -> None:
        if self.config.metrics_interval_s <= 0:
            return
        while self._next_sample < before:
            self._take_sample(self._next_sample)
            self._next_sample += self.config.metrics_interval_s

    def _flush_samples_through(self, until: float) -> None:
        if self.config.metrics_interval_s <= 0:
            return
        while self._next_sample <= until:
            self._take_sample(self._next_sample)
            self._next_sample += self.config.metrics_interval_s

    # -- main loop -------------------------------------------------------------

    def _earliest_planned_preemption(self) -> Optional[InstanceState]:
        while self._preheap:
            time, _, inst_id = self._preheap[0]
            inst = self.instances[inst_id]
            if inst.terminated or inst.planned_preemption != time:
                heapq.heappop(self._preheap)
                continue
            return inst
        return None

    def advance(self, until: float = math.inf) -> List[MetricsSample]:
        """Process every event with time <= until; return the new metrics samples."""
        if until < self.clock:
            raise SimulationError(f"cannot advance to {until}: clock is already at {self.clock}")
        sample_start = len(self.samples)
        handlers = {
            EV_JOB_SUBMITTED: self._on_job_submitted,
            EV_INSTANCE_ACQUIRED: self._on_instance_acquired,
            EV_CHUNK_DONE: self._on_work_done,
            EV_TRANSITION_DONE: self._on_work_done,
            EV_INTEGRATE_DONE: self._on_work_done,
            EV_JOB_COMPLETED: self._on_job_completed,
            EV_PREEMPTION: self._on_preemption,
            EV_IDLE_TIMEOUT: self._on_idle_timeout,
        }
        while True:
            t_heap = self._heap[0][0] if self._heap else math.inf
            pre_inst = self._earliest_planned_preemption()
            t_pre = pre_inst.planned_preemption if pre_inst is not None else math.inf
            t_next = min(t_heap, t_pre)
            if t_next > until or t_next == math.inf:
                break
            self._flush_samples(t_next)
            if t_pre < t_heap:
                # No earlier-or-equal event is pending, so the reclaim can
                # now be turned into a real event; completions that share
                # its timestamp have already been processed.
                pre_inst.planned_preemption = None
                self._schedule(t_pre, EV_PREEMPTION, instance_id=pre_inst.id)
                continue
            _, _, ev = heapq.heappop(self._heap)
            if self._is_stale(ev):
                continue
            self.clock = ev.time
            self.n_events += 1
            if self.config.record_events:
                self.event_log.append(ev.log_row())
            handlers[ev.kind](ev, ev.time)
            if self.config.strict_checks:
                self._check_invariants()
        if until != math.inf and until > self.clock:
            self.clock = until
        return self.samples[sample_start:]

    def run(self) -> SummaryReport:
        """Submit everything, drain the event queue, and close the books."""
        if not self._submitted:
            self.submit_all()
        self.advance(math.inf)
        unfinished = [j.spec.id for j in self.jobs.values() if j.status not in (ST_DONE, ST_FAILED)]
        if unfinished:
            raise SimulationError(
                f"run stalled with {len(unfinished)} unfinished job(s), e.g. {unfinished[:3]}; "
                "check pool capacities and allowed instance types"
            )
        for inst in self.instances.values():
            if not inst.terminated:
                # Grace period of None keeps instances up forever; close
                # them out at the final clock so billing is complete.
                self._terminate_instance(inst, self.clock)
        self._flush_samples_through(self.clock)
        return self.summary()

    def summary(self) -> SummaryReport:
        n_done = sum(1 for j in self.jobs.values() if j.status == ST_DONE)
        n_failed = sum(1 for j in self.jobs.values() if j.status == ST_FAILED)
        n_fe = self.config.n_fe_differences
        if n_fe is None:
            n_fe = len({j.spec.fe_label for j in self.jobs.values()})
        cost_per_fe = self.ledger.total_cost / n_fe if n_fe else None
        return SummaryReport(
            seed=self.config.seed,
            makespan_s=self._last_completion,
            final_time_s=self.clock,
            total_cost=self.ledger.total_cost,
            cost_per_fe=cost_per_fe,
            n_fe_differences=n_fe,
            n_jobs=len(self.jobs),
            n_completed=n_done,
            n_failed=n_failed,
            n_submissions=self.n_submissions,
            n_instances=len(self.instances),
            n_preemptions=self.n_preemptions,
            n_events=self.n_events,
            productive_core_hours=self.ledger.productive_core_seconds / 3600.0,
            wasted_core_hours=self.ledger.wasted_core_seconds / 3600.0,
            billed_core_hours=self.ledger.billed_core_seconds / 3600.0,
        )

    # -- introspection helpers -------------------------------------------------

    def job_status(self, job_id: str) -> str:
        return self.jobs[job_id].status

    def job_progress(self, job_id: str) -> JobProgress:
        return self.jobs[job_id].progress

    def counts(self) -> Dict[str, int]:
        """Submitted/completed/failed/in-flight partition, for conservation checks."""
        submitted = sum(1 for j in self.jobs.values() if j.submissions > 0)
        done = sum(1 for j in self.jobs.values() if j.status == ST_DONE)
        failed = sum(1 for j in self.jobs.values() if j.status == ST_FAILED)
        return {
            "submitted": submitted,
            "completed": done,
            "failed": failed,
            "in_flight": submitted - done - failed,
        }

    def _check_invariants(self) -> None:
        for inst in self.instances.values():
            if inst.terminated:
                if inst.id in self._region_free[inst.region]:
                    raise SimulationError(f"instance {inst.id}: terminated but indexed as open")
                continue
            used_v = sum(self.jobs[j].spec.vcpu_demand for j in inst.resident_jobs)
            used_g = sum(self.jobs[j].spec.gpu_demand for j in inst.resident_jobs)
            if inst.free_vcpus != inst.vcpus - used_v or inst.free_vcpus < 0:
                raise SimulationError(f"instance {inst.id}: vcpu accounting broken")
            if inst.free_gpus != inst.gpus - used_g or inst.free_gpus < 0:
                raise SimulationError(f"instance {inst.id}: gpu accounting broken")
            if (inst.free_vcpus >= 1) != (inst.id in self._region_free[inst.region]):
                raise SimulationError(f"instance {inst.id}: open-capacity index out of date")
        for job_id, job in self.jobs.items():
            job.progress.validate(job.spec.phase_plan)
            now_tuple = job.progress.as_tuple()
            before = self._last_progress.get(job_id, (0, 0, False))
            if now_tuple < before:
                raise SimulationError(f"job {job_id}: persisted progress went backwards")
            self._last_progress[job_id] = now_tuple

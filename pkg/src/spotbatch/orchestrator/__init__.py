"""Deterministic discrete-event simulation of a global batch run."""

from .engine import (  # noqa: F401
    BillingLedger,
    Engine,
    EngineConfig,
    InstanceState,
    SimEvent,
    SummaryReport,
    WorkItem,
    resume_point,
)
from .preemption import PreemptionModel  # noqa: F401
from .routing import Router, RoutingPolicy, route_job  # noqa: F401
from .scenario import Scenario, load_scenario, run_scenario  # noqa: F401

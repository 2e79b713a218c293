"""spotbatch: simulate and cost checkpointable MD-style job ensembles on Spot fleets.

The package has five functional areas:

- ``catalog``: instance types, regions, and pricing under three payment models
- ``perfmodel``: benchmark ingestion, performance/price and scaling analytics,
  runtime prediction, instance recommendation
- ``costmodel``: cloud-versus-owned-cluster cost arithmetic
- ``workload``: expansion of a screening ensemble into chunked, checkpointable jobs
- ``orchestrator``: the deterministic discrete-event simulator with routing,
  packing, preemption, resume, billing, and metrics

Bundled data (transcribed 2021 AWS/EC2 GROMACS benchmark measurements and
on-demand prices, plus ready-made workloads and scenarios) lives under
``spotbatch.data``; see ``data_path``.
"""

from importlib import resources
from pathlib import Path

__version__ = "0.1.0"


def data_path(name: str = "") -> Path:
    """Path to a bundled data file (or the data directory when called bare)."""
    root = resources.files(__name__) / "data"
    return Path(str(root / name if name else root))

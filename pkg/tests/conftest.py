from __future__ import annotations

import pytest

import spotbatch
from spotbatch import catalog as cat
from spotbatch import perfmodel


@pytest.fixture(scope="session")
def aws_catalog():
    return cat.load_catalog(spotbatch.data_path("catalog_aws.json"))


@pytest.fixture(scope="session")
def fe_records():
    return perfmodel.load_many_benchmarks(
        [spotbatch.data_path("bench_fe_gpu.csv"), spotbatch.data_path("bench_fe_cpu.csv")]
    )


@pytest.fixture(scope="session")
def plain_records():
    return perfmodel.load_many_benchmarks(
        [spotbatch.data_path("bench_plain_cpu.csv"), spotbatch.data_path("bench_plain_gpu.csv")]
    )


@pytest.fixture(scope="session")
def c5n_scaling():
    return {s.system: s for s in perfmodel.load_scaling(spotbatch.data_path("scaling_c5n18xl.csv"))}

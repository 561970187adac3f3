import pytest

from accel_dse.advisor import AdvisorConfig, AdvisorState
from accel_dse.design_space import DeviceProfile, Directives, ParameterPoint, WorkloadSpec
from accel_dse.evaluator import shipped_vecmul_profile, shipped_xc7z020_device
from accel_dse.templates import builtin_vecmul_template


@pytest.fixture
def profile():
    return shipped_vecmul_profile()


@pytest.fixture
def device():
    return shipped_xc7z020_device()


@pytest.fixture
def workload():
    return WorkloadSpec(kernel_kind="vecmul", length_l=1023, data_width=32, name="vecmul-1023")


@pytest.fixture
def directives():
    return Directives(buffer_depth=(1024, 2048), parallelism_p=(1, 2, 4), data_width=(32,))


@pytest.fixture
def template():
    return builtin_vecmul_template()


@pytest.fixture
def table_point():
    return ParameterPoint(buffer_depth=1024, parallelism_p=1, data_width=32)


@pytest.fixture
def advisor_state(workload, device, directives):
    return AdvisorState(workload=workload, device=device, directives=directives)


@pytest.fixture
def advisor_cfg():
    return AdvisorConfig(provider="heuristic", token_budget=2048, seed=7)

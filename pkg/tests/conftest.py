import pytest

from p3sonar.acoustics import WaterConditions, plan_for_range


@pytest.fixture
def pool_conditions() -> WaterConditions:
    """The pool experiment environment: 10 degC freshwater, 0.15 m deep."""
    return WaterConditions(temperature_c=10.0, salinity_psu=0.0, depth_m=0.15)


@pytest.fixture
def pool_plan(pool_conditions):
    """7 m range over 1200 samples, the configuration used in the pool."""
    return plan_for_range(7.0, pool_conditions, 1200)

import math

import pytest

from backhaul_mcp.params import (
    Channel,
    Model,
    MonteCarloCfg,
    Protocol,
    SystemParams,
    ValidationError,
    power_fraction,
)


def test_string_enums_are_coerced():
    q = SystemParams(model="sh", channel="rayleigh", protocol="tdma")
    assert q.model is Model.SOFT_HANDOFF
    assert q.channel is Channel.RAYLEIGH
    assert q.protocol is Protocol.TDMA


@pytest.mark.parametrize("kwargs", [
    {"model": "hexagonal"},
    {"alpha": -0.1},
    {"alpha": 1.5},
    {"p": 0.0},
    {"p": float("nan")},
    {"c_backhaul": -1.0},
    {"c_backhaul": math.inf},
    {"k_users": 0},
    {"k_users": 2.5},
])
def test_invalid_params_raise(kwargs):
    with pytest.raises(ValidationError):
        SystemParams(**kwargs)


def test_validation_error_is_a_value_error():
    with pytest.raises(ValueError):
        SystemParams(alpha=2.0)


def test_k_eff_under_tdma_is_one():
    q = SystemParams(k_users=8, protocol=Protocol.TDMA)
    assert q.k_eff == 1 and not q.large_k
    assert SystemParams(k_users=math.inf).large_k


def test_array_gain():
    assert SystemParams(model=Model.WYNER, alpha=0.5).array_gain == pytest.approx(1.5)
    assert SystemParams(model=Model.SOFT_HANDOFF, alpha=0.5).array_gain == pytest.approx(1.25)


def test_power_fraction():
    assert power_fraction(0.0) == 0.0
    assert power_fraction(1.0) == 0.5
    assert power_fraction(math.inf) == 1.0
    assert power_fraction(100.0) == 1.0
    with pytest.raises(ValidationError):
        power_fraction(-1e-3)


def test_montecarlo_cfg_validation():
    with pytest.raises(ValidationError):
        MonteCarloCfg(n_cells=2)
    with pytest.raises(ValidationError):
        MonteCarloCfg(n_trials=0)

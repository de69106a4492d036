"""
긴 적분 수용 테스트 (기본 실행에서 제외, `pytest -m slow` 로 실행)
"""
import math

import pytest

from core.domain.models import (
    BoundaryCondition,
    ExperimentSpec,
    FlowKind,
    FlowSpec,
    GridSpec,
    Preset,
    ReactionKind,
    SolverSettings,
    WindowPolicy,
)
from core.services.reaction_service import ReactionService
from tests.fakes.fake_storage_adapter import FakeStorageAdapter
from tests.integration.test_experiment_service import _service

pytestmark = pytest.mark.slow


def _spec(preset, flow, amplitudes=(), ny=4, H=0.2, implicit_y=False, t_final=30.0):
    return ExperimentSpec(
        name=preset.value,
        preset=preset,
        grid=GridSpec(nx=320, ny=ny, x_min=0.0, x_length=16.0, H=H, bc_y=BoundaryCondition.NEUMANN),
        reaction=ReactionService().make_model(ReactionKind.KPP_QUADRATIC, v0=1.0, kappa=0.5),
        flow=flow,
        solver=SolverSettings(dt=1e-3, t_final=t_final, window_policy=WindowPolicy.FOLLOW_FRONT,
                              snapshot_every=50, x0=4.0, lam=5.0, implicit_y=implicit_y),
        amplitudes=amplitudes,
        averaging_multiple=20.0,
        average_start=t_final - 10.0,
    )


def test_laminar_front_reaches_laminar_speed():
    """층류 전선의 평균 연소율이 v0 의 10% 이내로 수렴"""
    # Given
    spec = _spec(Preset.LAMINAR, FlowSpec(kind=FlowKind.NONE))

    # When
    result = _service(FakeStorageAdapter()).run(spec)[0]

    # Then
    assert result.ok, result.error
    assert result.measured == pytest.approx(1.0, rel=0.1)
    assert result.checks["upper_bound_ok"] is True
    assert result.checks["product_min"] > 0.0
    assert result.checks["short_window"] is False


def test_shear_enhances_burning_rate():
    """전단 유동은 층류보다 빠르게 태우고 보편 하한을 넘음"""
    # Given
    flow = FlowSpec(kind=FlowKind.SHEAR_SINE, params={"u0": 1.0, "n": 1})
    spec = _spec(Preset.SHEAR_SWEEP, flow, amplitudes=(2.0,), ny=40, H=1.0, implicit_y=True, t_final=20.0)

    # When
    result = _service(FakeStorageAdapter()).run(spec)[0]

    # Then
    assert result.ok, result.error
    universal = next(r for r in result.reports if r.name == "universal_lower")
    assert result.measured > 1.0
    assert result.measured >= universal.core
    assert math.isfinite(result.checks["kernel_average"])
    assert result.checks["product_min"] > 0.0

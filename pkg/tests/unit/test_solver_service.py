import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from core.domain.errors import ConfigError
from core.domain.models import (
    BoundaryCondition,
    FlowKind,
    FlowSpec,
    Grid,
    GridSpec,
    ReactionKind,
    ScalarField,
    SimulationConfig,
    SimulationState,
    WindowPolicy,
)
from core.services.diagnostics_service import DiagnosticsService
from core.services.field_service import FieldService
from core.services.flow_service import FlowService
from core.services.reaction_service import ReactionService
from core.services.solver_service import SolverService
from infra.adapters.checkpoint_file_adapter import CheckpointFileAdapter
from tests.fakes.fake_storage_adapter import FakeStorageAdapter


@pytest.fixture
def reaction_service():
    return ReactionService()


@pytest.fixture
def service(reaction_service):
    field_service = FieldService()
    diagnostics = DiagnosticsService(field_service, reaction_service)
    return SolverService(field_service, FlowService(), reaction_service, diagnostics)


def _config(reaction_service, flow=None, dt=0.005, t_final=0.1, nx=64, ny=4, x_length=3.2, H=0.2,
            window=WindowPolicy.FIXED, implicit_y=False, bc_y=BoundaryCondition.NEUMANN, snapshot_every=1):
    return SimulationConfig(
        grid=GridSpec(nx=nx, ny=ny, x_min=0.0, x_length=x_length, H=H, bc_y=bc_y),
        reaction=reaction_service.make_model(ReactionKind.KPP_QUADRATIC, v0=1.0, kappa=0.1),
        flow=flow or FlowSpec(kind=FlowKind.NONE),
        dt=dt,
        t_final=t_final,
        window_policy=window,
        snapshot_every=snapshot_every,
        x0=1.0,
        lam=5.0,
        implicit_y=implicit_y,
        label="test",
    )


def test_initial_front_is_logistic(service):
    grid = Grid.build(nx=16, ny=4, x_min=-2.0, x_length=4.0, H=1.0)

    field = service.initial_front(x0=0.0, lam=5.0, grid=grid)

    column = field.values[:, 0]
    assert np.all(np.diff(column) < 0)
    np.testing.assert_allclose(column, 1.0 / (1.0 + np.exp(5.0 * grid.x_centers)))
    np.testing.assert_array_equal(field.values[:, 0], field.values[:, -1])


def test_initial_front_requires_positive_slope(service):
    grid = Grid.build(nx=16, ny=4, x_min=-2.0, x_length=4.0, H=1.0)

    with pytest.raises(ConfigError):
        service.initial_front(x0=0.0, lam=0.0, grid=grid)


@pytest.mark.parametrize("dt", [0.5, 0.02, 0.1])
def test_cfl_violations_are_rejected(service, reaction_service, dt):
    """이류, 확산, 반응 시간 제한 중 하나라도 넘으면 ConfigError"""
    # Given
    config = _config(reaction_service, flow=FlowSpec(kind=FlowKind.SHEAR_SINE, params={"u0": 1.0, "n": 1}), dt=dt)
    grid = config.grid.build()
    flow = FlowService().build(config.flow, grid)

    # When & Then
    with pytest.raises(ConfigError):
        service.check_cfl(config, flow)


def test_fixed_window_too_short_is_flagged(service, reaction_service):
    """고정 창이 전선 이동 거리를 담지 못하면 False, follow_front 는 항상 True"""
    # Given
    short = _config(reaction_service, t_final=0.1)
    long = _config(reaction_service, t_final=5.0)
    following = _config(reaction_service, t_final=5.0, window=WindowPolicy.FOLLOW_FRONT)
    flow = FlowService().build(short.flow, short.grid.build())

    # When & Then
    assert service.check_window(service.initial_state(short), short, flow) is True
    assert service.check_window(service.initial_state(long), long, flow) is False
    assert service.check_window(service.initial_state(following), following, flow) is True


def test_implicit_y_relaxes_diffusive_limit(service, reaction_service):
    """y 확산을 음해법으로 풀면 제한은 dx 로만 정해짐"""
    config = _config(reaction_service, dt=0.005, nx=32, x_length=3.2, H=0.1, ny=8, implicit_y=True)
    explicit = _config(reaction_service, dt=0.005, nx=32, x_length=3.2, H=0.1, ny=8)
    flow = FlowService().build(config.flow, config.grid.build())

    service.check_cfl(config, flow)
    with pytest.raises(ConfigError):
        service.check_cfl(explicit, flow)


@settings(max_examples=25, deadline=None)
@given(values=arrays(np.float64, (16, 8), elements=st.floats(min_value=0.0, max_value=1.0)))
def test_step_preserves_maximum_principle(values):
    """전단 유동 + 확산 + 반응 한 스텝 뒤에도 0 <= T <= 1"""
    # Given
    reaction_service = ReactionService()
    field_service = FieldService()
    service = SolverService(field_service, FlowService(), reaction_service,
                            DiagnosticsService(field_service, reaction_service))
    config = _config(reaction_service, flow=FlowSpec(kind=FlowKind.SHEAR_SINE, params={"u0": 2.0, "n": 1}),
                     dt=0.004, nx=16, ny=8, x_length=1.6, H=0.8)
    grid = config.grid.build()
    state = SimulationState(field=ScalarField(grid=grid, values=values), t=0.0)

    # When
    stepped = service.step(state, config)

    # Then
    assert stepped.field.values.min() >= 0.0
    assert stepped.field.values.max() <= 1.0
    assert stepped.step_count == 1


def test_implicit_and_explicit_diffusion_agree(service, reaction_service):
    """작은 dt 에서 두 확산 방식의 결과가 가까움"""
    explicit = _config(reaction_service, dt=0.002, t_final=0.02, ny=8, H=0.4)
    implicit = _config(reaction_service, dt=0.002, t_final=0.02, ny=8, H=0.4, implicit_y=True)

    _, a = service.run(explicit)
    _, b = service.run(implicit)

    np.testing.assert_allclose(a.field.values, b.field.values, atol=1e-6)


def test_laminar_run_records_series(service, reaction_service):
    """층류 실행: 시계열이 t_final 까지 기록되고 V > 0"""
    # Given
    config = _config(reaction_service)

    # When
    series, state = service.run(config)

    # Then
    times = series.array("times")
    assert times[0] == 0.0
    assert times[-1] == pytest.approx(0.1)
    assert len(series) == 21
    assert np.all(series.array("v_reaction") > 0.0)
    assert state.step_count == 20
    assert len(series.to_dataframe()) == 21


def test_snapshot_every_thins_series(service, reaction_service):
    config = _config(reaction_service, snapshot_every=5)

    series, _ = service.run(config)

    assert len(series) == 5


def test_follow_front_shift_keeps_burned_mass(service, reaction_service):
    """창 이동은 빠져나간 열의 질량을 shifted_mass 로 옮기므로 연소 질량이 보존됨"""
    # Given
    config = _config(reaction_service, window=WindowPolicy.FOLLOW_FRONT)
    grid = Grid.build(nx=32, ny=4, x_min=0.0, x_length=32.0, H=1.0)
    values = np.zeros((grid.nx, grid.ny))
    values[:30] = 1.0
    state = SimulationState(field=ScalarField(grid=grid, values=values), t=1.0)
    diagnostics = service.diagnostics_service
    before = diagnostics.burned_mass(state)

    # When
    moved, shift = service._follow_front(state, config)

    # Then
    assert shift == 5
    assert moved.total_shift_cells == 5
    assert moved.field.grid.x_min == pytest.approx(5.0)
    assert moved.shifted_mass == pytest.approx(5.0)
    assert diagnostics.burned_mass(moved) == pytest.approx(before, rel=1e-12)
    assert np.all(moved.field.values[-5:] == 0.0)


def test_follow_front_leaves_distant_front_alone(service, reaction_service):
    config = _config(reaction_service, window=WindowPolicy.FOLLOW_FRONT)
    grid = Grid.build(nx=32, ny=4, x_min=0.0, x_length=32.0, H=1.0)
    values = np.zeros((grid.nx, grid.ny))
    values[:10] = 1.0
    state = SimulationState(field=ScalarField(grid=grid, values=values), t=0.0)

    moved, shift = service._follow_front(state, config)

    assert shift == 0
    assert moved is state


def test_resume_from_checkpoint_is_bit_identical(service, reaction_service):
    """체크포인트로 끊어 달린 결과가 한 번에 달린 결과와 비트 단위로 같음"""
    # Given
    full = _config(reaction_service, flow=FlowSpec(kind=FlowKind.SHEAR_SINE, params={"u0": 1.0, "n": 1}))
    half = _config(reaction_service, flow=FlowSpec(kind=FlowKind.SHEAR_SINE, params={"u0": 1.0, "n": 1}),
                   t_final=0.05)
    checkpoints = CheckpointFileAdapter([FakeStorageAdapter()])

    # When
    _, expected = service.run(full)
    _, middle = service.run(half)
    assert checkpoints.save(middle, "resume")
    restored = checkpoints.load("resume")
    _, resumed = service.run(full, initial_state=restored)

    # Then
    assert resumed.step_count == expected.step_count
    assert resumed.t == expected.t
    np.testing.assert_array_equal(resumed.field.values, expected.field.values)


def _heat_kernel_error(service, reaction_service, nx):
    """반응 없는 x 확산을 가우스 열핵 해와 비교한 최대 오차 (kappa dt / dx^2 = 0.1 고정)."""
    kappa, t_start, duration = 0.1, 1.0, 1.0
    x_length = 8.0
    dx = x_length / nx
    config = SimulationConfig(
        grid=GridSpec(nx=nx, ny=4, x_min=-4.0, x_length=x_length, H=1.0, bc_y=BoundaryCondition.NEUMANN),
        reaction=reaction_service.make_model(ReactionKind.KPP_QUADRATIC, v0=1.0, kappa=kappa),
        flow=FlowSpec(kind=FlowKind.NONE),
        dt=0.1 * dx ** 2 / kappa,
        t_final=duration,
        window_policy=WindowPolicy.FIXED,
        snapshot_every=10,
        x0=0.0,
        lam=1.0,
        reaction_enabled=False,
        x_far_field=(0.0, 0.0),
        label=f"heat_{nx}",
    )
    grid = config.grid.build()

    def exact(s):
        profile = np.sqrt(t_start / s) * np.exp(-grid.x_centers ** 2 / (4.0 * kappa * s))
        return np.repeat(profile[:, None], grid.ny, axis=1)

    initial = SimulationState(field=ScalarField(grid=grid, values=exact(t_start)), t=0.0)
    _, final = service.run(config, initial_state=initial)
    return float(np.max(np.abs(final.field.interior - exact(t_start + duration))))


def test_pure_diffusion_converges_at_second_order(service, reaction_service):
    """격자를 반으로 줄이면 열핵 해와의 오차가 약 1/4 (2차 수렴)"""
    # Given & When
    coarse = _heat_kernel_error(service, reaction_service, nx=80)
    fine = _heat_kernel_error(service, reaction_service, nx=160)

    # Then
    order = np.log2(coarse / fine)
    assert fine < coarse
    assert 1.8 < order < 2.2

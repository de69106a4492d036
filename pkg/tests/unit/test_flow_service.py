import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from core.domain.errors import FlowError, TubeExtractionError
from core.domain.models import BoundaryCondition, FlowKind, FlowSpec, Grid, TimeLawKind, TubeBand
from core.services.flow_service import FlowService


@pytest.fixture
def service():
    return FlowService()


def test_sine_profile_norms(service):
    """u0 sin(2 pi n y / H) 의 노름과 주름 척도"""
    # Given
    profile = service.make_shear_sine(u0=2.0, n=2, H=1.0)

    # When
    sup = service.sup_norm(profile)
    l1 = service.l1_norm(profile)
    slope = service.derivative_sup_norm(profile)

    # Then
    assert sup == 2.0
    assert l1 == pytest.approx(4.0 / math.pi, rel=1e-7)
    assert slope == pytest.approx(8.0 * math.pi)
    assert service.wrinkling_scale(profile) == pytest.approx(l1 / slope)


@pytest.mark.parametrize("n", [0, -1, 1.5])
def test_sine_rejects_bad_wavenumber(service, n):
    with pytest.raises(FlowError):
        service.make_shear_sine(u0=1.0, n=n, H=1.0)


def test_general_profile_is_made_mean_free(service):
    profile = service.make_shear_profile(lambda y: 1.0 + np.cos(2 * np.pi * y), H=1.0, label="offset")

    y = np.linspace(0.0, 1.0, 1001)
    assert trapezoid(profile(y), y) == pytest.approx(0.0, abs=1e-6)
    assert profile.amplitude == pytest.approx(1.0, rel=1e-6)


def test_shear_flow_field_is_divergence_free(service):
    """전단 유동은 x 면 속도만 있고 단면 평균이 0"""
    # Given
    grid = Grid.build(nx=16, ny=32, x_min=0.0, x_length=2.0, H=1.0)
    profile = service.make_shear_sine(u0=1.0, n=1, H=1.0)

    # When
    flow = service.shear_flow_field(profile, grid)

    # Then
    service.check_flow(flow)
    assert np.all(flow.u2_faces == 0.0)
    assert flow.u1_faces.shape == (grid.nx + 1, grid.ny)
    assert np.max(np.abs(service.divergence(flow).values)) == 0.0


def test_cellular_flow_is_divergence_free(service):
    """유선 함수에서 만든 셀 유동의 이산 발산은 반올림 수준"""
    grid = Grid.build(nx=32, ny=16, x_min=0.0, x_length=2.0, H=1.0)
    spec = FlowSpec(kind=FlowKind.CELLULAR, params={"m": 2, "U": 3.0, "Lx": 1.0, "Ly": 1.0})

    flow = service.build(spec, grid)

    assert np.max(np.abs(service.divergence(flow).values)) < 1e-10
    assert np.all(flow.u2_faces[:, 0] == 0.0)
    assert np.all(flow.u2_faces[:, -1] == 0.0)
    service.check_flow(flow)


def test_check_flow_rejects_small_real_divergence(service):
    """반올림 여유는 1e-9 상대 수준: 1e-6 크기의 실제 발산은 거부"""
    # Given
    grid = Grid.build(nx=32, ny=16, x_min=0.0, x_length=2.0, H=1.0)
    flow = service.make_explicit(lambda x, y: 1.0 + 1e-6 * x, lambda x, y: 0.0 * y, grid)

    # When & Then
    with pytest.raises(FlowError, match="발산"):
        service.check_flow(flow)


def test_cellular_velocity_closed_form(service):
    """m = 1 셀 유동: (0, Ly/2) 에서 u1 = -pi U, u2 = 0"""
    u1, u2 = service.cellular_velocity(0.0, 0.5, m=1, U=2.0, Lx=1.0, Ly=1.0)

    assert float(u1) == pytest.approx(-2.0 * math.pi)
    assert float(u2) == pytest.approx(0.0, abs=1e-12)


def test_cellular_requires_whole_cells_between_walls(service):
    grid = Grid.build(nx=16, ny=8, x_min=0.0, x_length=2.0, H=1.0)

    with pytest.raises(FlowError):
        service.make_cellular(m=1, U=1.0, Lx=1.0, Ly=0.75, grid=grid)


def test_perpendicular_shear_requires_periodic_y(service):
    grid = Grid.build(nx=16, ny=8, x_min=0.0, x_length=2.0, H=1.0)

    with pytest.raises(FlowError):
        service.make_perpendicular_shear(w0=1.0, n=1, wavelength=1.0, grid=grid)


def test_perpendicular_shear_profile(service):
    grid = Grid.build(nx=16, ny=8, x_min=0.0, x_length=1.0, H=1.0, bc_y=BoundaryCondition.PERIODIC)

    flow = service.make_perpendicular_shear(w0=2.0, n=1, wavelength=1.0, grid=grid)

    np.testing.assert_allclose(flow.u2_faces[:, 0], 2.0 * np.sin(2 * np.pi * grid.x_centers))
    assert flow.x_dependent
    service.check_flow(flow)


def test_timedep_shear_follows_time_law(service):
    """translating 유동은 rate * t 만큼 이동한 사인 전단"""
    # Given
    grid = Grid.build(nx=8, ny=16, x_min=0.0, x_length=1.0, H=1.0)
    flow = service.make_timedep_shear(TimeLawKind.TRANSLATING, u0=1.0, n=1, H=1.0, rate=0.25, grid=grid)

    # When
    u1, _ = flow.faces_at(1.0)

    # Then
    np.testing.assert_allclose(u1[0], np.sin(2 * np.pi * (grid.y_centers - 0.25)))
    assert flow.speed_sup == 1.0


def test_timedep_shear_rejects_negative_rate(service):
    grid = Grid.build(nx=8, ny=16, x_min=0.0, x_length=1.0, H=1.0)

    with pytest.raises(FlowError):
        service.make_timedep_shear(TimeLawKind.PULSATING, u0=1.0, n=1, H=1.0, rate=-1.0, grid=grid)


def test_wavy_percolating_tubes(service):
    """a = 0 인 wavy 유동에서 Psi = 0 근처 밴드는 반대 방향의 두 관이며 m0 = 1"""
    # Given
    grid = Grid.build(nx=64, ny=64, x_min=0.0, x_length=2.0, H=1.0, bc_y=BoundaryCondition.PERIODIC)
    sf = service.make_percolating_wavy(U=1.0, a=0.0, Lx=1.0, grid=grid)
    bands = [TubeBand(lo=-0.05, hi=0.05, y_seed=0.25), TubeBand(lo=-0.05, hi=0.05, y_seed=0.75)]

    # When
    geometry = service.extract_tubes(sf, bands, l=0.05, period=1.0)

    # Then
    signs = [tube.sign for tube in geometry.tubes]
    assert signs == [1, -1]
    assert geometry.tubes[0].center == pytest.approx(0.25, abs=0.02)
    assert geometry.tubes[1].center == pytest.approx(0.75, abs=0.02)
    assert all(tube.half_width > 0 for tube in geometry.tubes)
    assert geometry.m0 == pytest.approx(1.0, rel=1e-6)


def test_ambiguous_band_needs_seed(service):
    grid = Grid.build(nx=16, ny=32, x_min=0.0, x_length=1.0, H=1.0, bc_y=BoundaryCondition.PERIODIC)
    sf = service.make_percolating_wavy(U=1.0, a=0.0, Lx=1.0, grid=grid)

    with pytest.raises(TubeExtractionError):
        service.extract_tubes(sf, [TubeBand(lo=-0.05, hi=0.05)], l=0.05, period=1.0)


def test_cellular_streamlines_are_closed(service):
    """셀 유동의 유선은 닫혀 있어 창을 가로지르는 관이 없음"""
    grid = Grid.build(nx=32, ny=16, x_min=0.0, x_length=2.0, H=1.0)
    sf = service.make_cellular(m=1, U=1.0, Lx=1.0, Ly=1.0, grid=grid)

    with pytest.raises(TubeExtractionError):
        service.extract_tubes(sf, [TubeBand(lo=0.3, hi=0.6)], l=0.05, period=2.0)


def test_shear_stream_function_matches_velocity(service):
    """Psi = int_0^y u 이므로 유선 함수에서 다시 만든 속도는 셀 평균 u"""
    grid = Grid.build(nx=8, ny=16, x_min=0.0, x_length=1.0, H=1.0)
    profile = service.make_shear_sine(u0=1.0, n=1, H=1.0)

    flow = service.flow_from_stream_function(service.shear_stream_function(profile, grid))

    faces = grid.y_faces
    cell_mean = -(np.cos(2 * np.pi * faces[1:]) - np.cos(2 * np.pi * faces[:-1])) / (2 * np.pi * grid.dy)
    np.testing.assert_allclose(flow.u1_faces[0], cell_mean, atol=1e-10)


def test_flow_dump_layout(service):
    grid = Grid.build(nx=8, ny=4, x_min=0.0, x_length=1.0, H=1.0)
    flow = service.build(FlowSpec(kind=FlowKind.NONE), grid)

    frame = service.to_frame(flow)

    assert list(frame.columns) == ["x", "y", "u1", "u2"]
    assert len(frame) == 32

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from core.domain.errors import BoundError, PartitionError, ReactionError
from core.domain.models import (
    EffectiveTensor,
    Grid,
    Interval,
    Partition,
    ReactionKind,
    TimeLawKind,
    Tube,
    TubeGeometry,
)
from core.services.bounds_service import BoundsService
from core.services.diagnostics_service import DiagnosticsService
from core.services.field_service import FieldService
from core.services.flow_service import FlowService
from core.services.reaction_service import ReactionService

SINE_MIDDLE_HALF = math.sqrt(2.0) / (2.0 * math.pi)


@pytest.fixture
def reaction_service():
    return ReactionService()


@pytest.fixture
def flow_service():
    return FlowService()


@pytest.fixture
def service(reaction_service, flow_service):
    diagnostics = DiagnosticsService(FieldService(), reaction_service)
    return BoundsService(reaction_service, flow_service, diagnostics)


def _model(reaction_service, v0=1.0, kappa=0.1):
    return reaction_service.make_model(ReactionKind.KPP_QUADRATIC, v0=v0, kappa=kappa)


def test_universal_lower_bound(service, reaction_service):
    """이차 KPP 의 보편 하한은 v0 sqrt(1/2)"""
    model = _model(reaction_service, v0=2.0)

    assert service.universal_lower_bound(model) == pytest.approx(2.0 * math.sqrt(0.5))
    assert service.universal_lower_bound(model, t=0.0) == 0.0
    assert 0.0 < service.universal_lower_bound(model, t=0.01) < 2.0 * math.sqrt(0.5)


def test_universal_lower_bound_rejects_non_kpp(service, reaction_service):
    model = reaction_service.make_model(ReactionKind.IGNITION, v0=1.0, kappa=0.1, theta=0.2)

    with pytest.raises(ReactionError):
        service.universal_lower_bound(model)


def test_upper_bound_value(service, reaction_service):
    """C0 = 1, kappa = 0.01, v0 = 1, t = 1, ||u|| = 3 -> 4.04"""
    model = _model(reaction_service, v0=1.0, kappa=0.01)

    assert service.upper_bound(model, C0=1.0, u_inf=3.0, t=1.0) == pytest.approx(4.04)
    assert service.upper_bound(model, C0=1.0, u_inf=3.0, t=math.inf) == pytest.approx(4.0)
    with pytest.raises(BoundError):
        service.upper_bound(model, C0=1.0, u_inf=3.0, t=0.0)


def test_tau0_is_max_of_chemical_and_crossing_time(service, reaction_service):
    assert service.tau0(_model(reaction_service, v0=1.0, kappa=0.1), H=1.0) == pytest.approx(1.0)
    assert service.tau0(_model(reaction_service, v0=1.0, kappa=5.0), H=1.0) == pytest.approx(5.0)


def test_sign_intervals_of_sine(service, flow_service):
    """사인 전단은 [0, H/2] (+), [H/2, H] (-) 두 구간"""
    # Given
    profile = flow_service.make_shear_sine(u0=1.0, n=1, H=1.0)

    # When
    partition = service.partition_sign_intervals(profile, l=0.01)

    # Then
    assert [iv.sign for iv in partition.intervals] == [1, -1]
    assert partition.intervals[0].upper == pytest.approx(0.5, abs=1e-12)
    assert partition.intervals[1].lower == pytest.approx(0.5, abs=1e-12)
    assert partition.intervals[1].upper == pytest.approx(1.0)


def test_sign_intervals_of_zero_flow_is_empty(service, flow_service):
    profile = flow_service.make_shear_sine(u0=0.0, n=1, H=1.0)

    assert service.partition_sign_intervals(profile).is_empty


def test_partition_bound_of_sine(service, flow_service, reaction_service):
    """사인 전단, 부호 분할, l -> 0 이면 core = sqrt(2) / (2 pi)"""
    # Given
    profile = flow_service.make_shear_sine(u0=1.0, n=1, H=1.0)
    partition = service.partition_sign_intervals(profile, l=0.0)

    # When
    report = service.shear_partition_bound(profile, partition, _model(reaction_service))

    # Then
    assert report.name == "shear_partition"
    assert report.core == pytest.approx(SINE_MIDDLE_HALF, rel=1e-10)
    assert report.extra["c_plus"] == pytest.approx(0.5)
    assert report.tau0 == pytest.approx(1.0)
    assert any("C" in caveat for caveat in report.caveats)


def test_percolating_bound_of_shear_tubes_matches_partition_bound(service, flow_service, reaction_service):
    """전단 분할을 유선관으로 옮기면 퍼컬레이팅 core 와 분할 core 가 같음"""
    # Given
    model = _model(reaction_service, kappa=0.05)
    profile = flow_service.make_shear_sine(u0=1.0, n=2, H=1.0)
    partition = service.partition_sign_intervals(profile, l=model.l)

    # When
    tubes = flow_service.tubes_from_partition(profile, partition)
    percolating = service.percolating_bound(tubes, model)
    shear = service.shear_partition_bound(profile, partition, model)

    # Then
    assert len(tubes.tubes) == len(partition.intervals)
    assert percolating.core == pytest.approx(shear.core, rel=1e-10)
    assert percolating.extra["m_plus"] == pytest.approx(shear.extra["c_plus"])


def test_partition_bound_halves_when_l_equals_width(service, flow_service):
    """h = l = 1/4 이면 (1 + l^2/h^2)^-1 = 1/2"""
    profile = flow_service.make_shear_sine(u0=1.0, n=1, H=1.0)
    partition = service.partition_sign_intervals(profile, l=0.25)

    report = service.shear_partition_bound(profile, partition)

    assert report.core == pytest.approx(0.5 * SINE_MIDDLE_HALF, rel=1e-10)


def test_partition_bound_rejects_wrong_signs(service, flow_service):
    profile = flow_service.make_shear_sine(u0=1.0, n=1, H=1.0)
    flipped = Partition(
        intervals=(Interval(center=0.25, half_width=0.25, sign=-1), Interval(center=0.75, half_width=0.25, sign=1)),
        H=1.0, l=0.01,
    )

    with pytest.raises(PartitionError):
        service.shear_partition_bound(profile, flipped)


def test_norm_bound_of_sine(service, flow_service, reaction_service):
    """||u||_1^2 / ||u||_inf (1 + l^2/h_u^2)^-1, h_u = 1/pi^2"""
    # Given
    profile = flow_service.make_shear_sine(u0=1.0, n=1, H=1.0)
    model = _model(reaction_service, v0=1.0, kappa=0.01)
    expected = (4.0 / math.pi ** 2) / (1.0 + (0.01 * math.pi ** 2) ** 2)

    # When
    report = service.shear_norm_bound(profile, model)

    # Then
    assert report.name == "shear_norm"
    assert report.core == pytest.approx(expected, rel=1e-6)
    assert report.core == pytest.approx(0.40137, abs=1e-4)
    assert report.extra["h_u"] == pytest.approx(1.0 / math.pi ** 2, rel=1e-6)


def test_optimized_partition_never_loses(service, flow_service):
    """최적화된 분할의 core 는 부호 구간 분할 core 이상"""
    profile = flow_service.make_shear_sine(u0=1.0, n=2, H=1.0)
    base = service.partition_sign_intervals(profile, l=0.05)

    best = service.optimize_partition(profile, l=0.05, budget=3)

    base_core = service.shear_partition_bound(profile, base).core
    best_core = service.shear_partition_bound(profile, best).core
    assert best_core >= base_core * (1.0 - 1e-12)


def test_optimized_partition_is_a_local_optimum(service, flow_service):
    """한 부호 구간의 등분 수만 바꾼 이웃 분할은 모두 core 가 더 크지 않음"""
    # Given
    profile = flow_service.make_shear_sine(u0=1.0, n=2, H=1.0)
    base = service.partition_sign_intervals(profile, l=0.05)
    budget = 3

    # When
    best = service.optimize_partition(profile, l=0.05, budget=budget)

    # Then
    counts = [sum(1 for piece in best.intervals if iv.lower <= piece.center <= iv.upper) for iv in base.intervals]
    best_core = service._partition_core(profile, best)
    for idx in range(len(counts)):
        for k in range(budget + 1):
            trial = list(counts)
            trial[idx] = k
            neighbour = BoundsService._split(base, trial)
            if neighbour.is_empty:
                continue
            assert service._partition_core(profile, neighbour) <= best_core * (1.0 + 1e-9)


@st.composite
def partitions(draw):
    widths = draw(st.lists(st.floats(min_value=0.01, max_value=1.0), min_size=2, max_size=6))
    l = draw(st.floats(min_value=0.0, max_value=0.5))
    total = sum(widths)
    intervals = []
    cursor = 0.0
    for k, w in enumerate(widths):
        width = w / total
        intervals.append(Interval(center=cursor + 0.5 * width, half_width=0.5 * width, sign=1 if k % 2 == 0 else -1))
        cursor += width
    return Partition(intervals=tuple(intervals), H=1.0, l=l)


@settings(max_examples=50, deadline=None)
@given(partition=partitions())
def test_weight_identities_hold(partition):
    """c+ + c- = 1 과 c/16 <= m/M <= c/4"""
    BoundsService.assert_weight_identities(partition)

    assert partition.c_plus + partition.c_minus == pytest.approx(1.0, abs=1e-12)
    assert partition.g_weight_plus / partition.normalizer <= partition.c_plus / 4.0 + 1e-12


def test_timedep_bound_on_steady_flow(service, flow_service, reaction_service):
    """정상 유동이면 J 는 분할 core 와 같고 경계는 (1 + (tau0/tau)^2)^-1 배"""
    # Given
    model = _model(reaction_service, v0=1.0, kappa=0.01)
    profile = flow_service.make_shear_sine(u0=1.0, n=1, H=1.0)
    partition = service.partition_sign_intervals(profile, l=model.l)
    core = service.shear_partition_bound(profile, partition).core

    # When
    report = service.timedep_bound(profile, partition, t0=0.0, tau=2.0, model=model)

    # Then
    assert report.extra["J_normalized"] == pytest.approx(core, rel=1e-8)
    assert report.core == pytest.approx(core / (1.0 + (1.0 / 2.0) ** 2), rel=1e-8)


def test_timedep_bound_reports_negative_j_as_zero(service, flow_service, reaction_service):
    model = _model(reaction_service, v0=1.0, kappa=0.01)
    profile = flow_service.make_shear_sine(u0=1.0, n=1, H=1.0)
    swapped = Partition(
        intervals=(Interval(center=0.25, half_width=0.25, sign=-1), Interval(center=0.75, half_width=0.25, sign=1)),
        H=1.0, l=model.l,
    )

    report = service.timedep_bound(profile, swapped, t0=0.0, tau=2.0, model=model)

    assert report.core == 0.0
    assert report.extra["J_normalized"] < 0.0
    assert len(report.caveats) == 2


def test_pulsating_closed_form_is_attached(service, flow_service, reaction_service):
    model = _model(reaction_service, v0=1.0, kappa=0.01)
    grid = Grid.build(nx=8, ny=16, x_min=0.0, x_length=1.0, H=1.0)
    flow = flow_service.make_timedep_shear(TimeLawKind.PULSATING, u0=2.0, n=1, H=1.0, rate=0.5, grid=grid)
    partition = Partition(
        intervals=(Interval(center=0.25, half_width=0.25, sign=1), Interval(center=0.75, half_width=0.25, sign=-1)),
        H=1.0, l=model.l,
    )

    report = service.timedep_bound(flow, partition, t0=0.0, tau=1.0, model=model)

    shape = 1.0 / (1.0 + (model.l / 1.0) ** 2)
    assert report.extra["pulsating_core"] == pytest.approx(shape * 2.0 / (1.0 + 4.0 * 0.25))


def test_best_timedep_bound_picks_largest(service, flow_service, reaction_service):
    model = _model(reaction_service, v0=1.0, kappa=0.01)
    profile = flow_service.make_shear_sine(u0=1.0, n=1, H=1.0)
    partition = service.partition_sign_intervals(profile, l=model.l)

    best = service.best_timedep_bound(profile, partition, t0=0.0, model=model, taus=[0.5, 1.0, 4.0])

    assert best.extra["tau"] == 4.0


def _tubes(m0):
    return TubeGeometry(
        tubes=(Tube(sign=1, half_width=0.1, center=0.25, flux=0.4, middle_half_flux=0.2),
               Tube(sign=-1, half_width=0.1, center=0.75, flux=0.4, middle_half_flux=0.2)),
        m0=m0, period=1.0, H=1.0,
    )


@pytest.mark.parametrize("m0", [1.0, math.inf])
def test_percolating_bound(service, reaction_service, m0):
    """반폭 = l 이면 각 관의 기여는 가운데 절반 유량의 절반"""
    model = _model(reaction_service, v0=1.0, kappa=0.1)

    report = service.percolating_bound(_tubes(m0), model)

    assert report.name == "percolating"
    assert report.core == pytest.approx(0.1)
    assert report.tau0 == pytest.approx(2.0)


def test_percolating_bound_requires_m0(service, reaction_service):
    with pytest.raises(BoundError):
        service.percolating_bound(_tubes(None), _model(reaction_service))


def test_cellular_upper_bound(service, reaction_service):
    """m = 3, U/v0 = 16, l/Lx = 0.1 -> 1.1 * 4 + 2.5 = 6.9"""
    model = _model(reaction_service, v0=1.0, kappa=0.1)

    report = service.cellular_upper_bound(m=3, U=16.0, model=model, Lx=1.0)

    assert report.core == pytest.approx(6.9)
    assert report.extra["exponent"] == pytest.approx(0.5)
    assert report.extra["in_regime"]


def test_cellular_upper_bound_flags_weak_flow(service, reaction_service):
    model = _model(reaction_service, v0=1.0, kappa=0.1)

    report = service.cellular_upper_bound(m=1, U=0.5, model=model, Lx=1.0)

    assert not report.extra["in_regime"]
    assert len(report.caveats) == 2


def test_homogenized_lower_bound(service, reaction_service):
    """k* = 4 kappa 이면 core = sqrt(2) v0"""
    model = _model(reaction_service, v0=1.0, kappa=0.1)

    report = service.homogenized_lower_bound(0.4, model)

    assert report.core == pytest.approx(math.sqrt(2.0))
    assert report.extra["v0_star"] == pytest.approx(2.0)


def test_homogenized_lower_bound_along_direction(service, reaction_service):
    model = _model(reaction_service, v0=1.0, kappa=0.1)
    tensor = EffectiveTensor(tensor=np.array([[0.4, 0.0], [0.0, 0.1]]), kappa=0.1, kstar=0.1)

    along_x = service.homogenized_lower_bound(tensor, model, direction=(1.0, 0.0))
    minimal = service.homogenized_lower_bound(tensor, model)

    assert along_x.core == pytest.approx(math.sqrt(2.0))
    assert minimal.core == pytest.approx(math.sqrt(0.5))
    with pytest.raises(BoundError):
        service.homogenized_lower_bound(0.4, model, direction=(1.0, 0.0))

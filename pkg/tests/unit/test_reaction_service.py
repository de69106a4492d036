import numpy as np
import pytest
from numpy.polynomial import Polynomial

from core.domain.errors import ReactionError
from core.domain.models import ReactionKind
from core.services.reaction_service import ReactionService


@pytest.fixture
def service():
    return ReactionService()


def test_quadratic_constants(service):
    """f(T) = T(1-T) 의 (alpha, beta) 는 (1, 2)"""
    model = service.make_model(ReactionKind.KPP_QUADRATIC, v0=1.0, kappa=0.1)

    assert service.reaction_constants(model) == (1.0, 2.0)
    assert model.l == pytest.approx(0.1)
    assert model.tau_c == pytest.approx(0.1)
    assert model.rate == pytest.approx(2.5)


def test_general_polynomial_matches_quadratic(service):
    """다항식 계수로 준 T - T^2 는 이차 KPP 와 같은 상수를 가져야 함"""
    # Given
    f = Polynomial([0.0, 1.0, -1.0])
    model = service.make_model(ReactionKind.KPP_GENERAL, v0=1.0, kappa=0.1,
                               f=f, df=f.deriv(), d2f=f.deriv(2))

    # When
    alpha, beta = service.reaction_constants(model)

    # Then
    assert alpha == pytest.approx(1.0, abs=1e-9)
    assert beta == pytest.approx(2.0, abs=1e-9)
    np.testing.assert_allclose(service.evaluate_f(model, np.array([0.25, 0.5])), [0.1875, 0.25])


def test_sine_reaction_has_no_positive_beta(service):
    """sin(pi T)/pi 는 f''(0) = 0 이라 beta 가 양수가 아니므로 경계 상수 계산에서 거절"""
    model = service.make_model(
        ReactionKind.KPP_GENERAL, v0=1.0, kappa=0.1,
        f=lambda T: np.sin(np.pi * T) / np.pi,
        df=lambda T: np.cos(np.pi * T),
        d2f=lambda T: -np.pi * np.sin(np.pi * T),
    )

    with pytest.raises(ReactionError):
        service.reaction_constants(model)


def test_general_requires_zero_endpoints(service):
    with pytest.raises(ReactionError):
        service.make_model(ReactionKind.KPP_GENERAL, v0=1.0, kappa=0.1, f=Polynomial([0.0, 1.0]))


def test_general_requires_unit_slope(service):
    f = Polynomial([0.0, 2.0, -2.0])
    with pytest.raises(ReactionError):
        service.make_model(ReactionKind.KPP_GENERAL, v0=1.0, kappa=0.1, f=f, df=f.deriv())


@pytest.mark.parametrize("v0, kappa", [(0.0, 0.1), (1.0, 0.0), (-1.0, 0.1)])
def test_nonpositive_parameters_rejected(service, v0, kappa):
    with pytest.raises(ReactionError):
        service.make_model(ReactionKind.KPP_QUADRATIC, v0=v0, kappa=kappa)


def test_ignition_threshold_range(service):
    with pytest.raises(ReactionError):
        service.make_model(ReactionKind.IGNITION, v0=1.0, kappa=0.1, theta=1.2)


def test_non_kpp_models_have_no_constants(service):
    """ignition / Arrhenius 는 시뮬레이션만 가능하고 경계 평가는 거절"""
    ignition = service.make_model(ReactionKind.IGNITION, v0=1.0, kappa=0.1, theta=0.3)
    arrhenius = service.make_model(ReactionKind.ARRHENIUS, v0=1.0, kappa=0.1, activation=2.0)

    for model in (ignition, arrhenius):
        with pytest.raises(ReactionError):
            service.require_kpp(model)


def test_ignition_is_zero_below_threshold(service):
    model = service.make_model(ReactionKind.IGNITION, v0=1.0, kappa=0.1, theta=0.3)

    values = service.evaluate_f(model, np.array([0.0, 0.2, 0.3, 0.65, 1.0]))

    np.testing.assert_allclose(values, [0.0, 0.0, 0.0, 0.35 * 0.35, 0.0])


def test_arrhenius_vanishes_at_zero(service):
    model = service.make_model(ReactionKind.ARRHENIUS, v0=1.0, kappa=0.1, activation=2.0)

    assert service.evaluate_f(model, 0.0) == 0.0
    assert service.evaluate_f(model, 0.5) == pytest.approx(0.5 * np.exp(-4.0))


def test_evaluate_f_clamps_round_off(service):
    """1e-10 이내의 범위 이탈은 잘라내고 그 이상은 오류"""
    model = service.make_model(ReactionKind.KPP_QUADRATIC, v0=1.0, kappa=0.1)

    assert service.evaluate_f(model, 1.0 + 1e-12) == 0.0
    assert service.evaluate_f(model, -1e-12) == 0.0
    with pytest.raises(ReactionError):
        service.evaluate_f(model, 1.1)

"""반응 비선형항 f(T) 와 경계 평가에 쓰이는 상수 alpha, beta."""
import math
from typing import Callable, Optional, Tuple

import numpy as np

from core.domain.errors import ReactionError
from core.domain.models import ReactionKind, ReactionModel
from core.logger import logger

CLAMP_TOLERANCE = 1e-10
SAMPLE_POINTS = 10_000


class ReactionService:
    """반응 모델 생성, f 평가, (alpha, beta) 계산을 담당합니다."""

    # ------------------------------------------------------------------
    # 생성
    # ------------------------------------------------------------------
    def make_model(
        self,
        kind: ReactionKind,
        v0: float,
        kappa: float,
        theta: float = 0.0,
        activation: float = 0.0,
        f: Optional[Callable] = None,
        df: Optional[Callable] = None,
        d2f: Optional[Callable] = None,
    ) -> ReactionModel:
        """파라미터를 검증하고 ReactionModel 을 만듭니다.

        Raises:
            ReactionError: v0, kappa 가 양수가 아니거나 종류별 조건을 어길 때.
        """
        if not (v0 > 0 and kappa > 0):
            raise ReactionError(f"v0, kappa 는 양수여야 합니다 (v0={v0}, kappa={kappa})")
        if kind is ReactionKind.IGNITION and not (0.0 < theta < 1.0):
            raise ReactionError(f"ignition 임계값은 (0, 1) 안이어야 합니다 (theta={theta})")
        if kind is ReactionKind.ARRHENIUS and activation <= 0:
            raise ReactionError(f"Arrhenius 활성화 상수는 양수여야 합니다 (A={activation})")
        model = ReactionModel(kind=kind, v0=v0, kappa=kappa, theta=theta,
                              activation=activation, f=f, df=df, d2f=d2f)
        if kind is ReactionKind.KPP_GENERAL:
            self._validate_general(model)
        return model

    def _validate_general(self, model: ReactionModel) -> None:
        if model.f is None:
            raise ReactionError("kpp_general 모델에는 f 가 필요합니다")
        ends = np.asarray(model.f(np.array([0.0, 1.0])), dtype=float)
        if np.max(np.abs(ends)) > 1e-10:
            raise ReactionError(f"KPP f 는 f(0)=f(1)=0 이어야 합니다 (f(0)={ends[0]}, f(1)={ends[1]})")
        slope0 = float(self.derivative(model, np.array([0.0]))[0])
        if abs(slope0 - 1.0) > 1e-6:
            raise ReactionError(f"KPP f 는 f'(0)=1 로 정규화되어야 합니다 (f'(0)={slope0})")

    # ------------------------------------------------------------------
    # f 평가
    # ------------------------------------------------------------------
    def evaluate_f(self, model: ReactionModel, T):
        """f(T) 를 평가합니다. 스칼라와 배열을 모두 받습니다.

        [0, 1] 밖으로 1e-10 이내인 값은 잘라내고 경고를 남기며, 그보다 크면 오류입니다.
        """
        scalar = np.isscalar(T)
        values = np.atleast_1d(np.asarray(T, dtype=float))
        values = self._clamp(values)
        out = self._raw_f(model, values)
        return float(out[0]) if scalar else out

    def _clamp(self, values: np.ndarray) -> np.ndarray:
        low, high = float(np.min(values)), float(np.max(values))
        if low < -CLAMP_TOLERANCE or high > 1.0 + CLAMP_TOLERANCE or not np.isfinite([low, high]).all():
            raise ReactionError(f"T 가 [0, 1] 범위를 벗어났습니다 (min={low}, max={high})")
        if low < 0.0 or high > 1.0:
            logger.warning(f"[Service:Reaction] T 를 [0, 1] 로 자릅니다 (min={low:.3e}, max={high:.3e})")
            values = np.clip(values, 0.0, 1.0)
        return values

    def _raw_f(self, model: ReactionModel, T: np.ndarray) -> np.ndarray:
        kind = model.kind
        if kind is ReactionKind.KPP_QUADRATIC:
            return T * (1.0 - T)
        if kind is ReactionKind.KPP_GENERAL:
            return np.asarray(model.f(T), dtype=float)
        if kind is ReactionKind.ARRHENIUS:
            safe = np.where(T > 0.0, T, 1.0)
            return np.where(T > 0.0, (1.0 - T) * np.exp(-model.activation / safe), 0.0)
        inside = (T > model.theta) & (T < 1.0)
        return np.where(inside, (T - model.theta) * (1.0 - T), 0.0)

    def source(self, model: ReactionModel, T: np.ndarray) -> np.ndarray:
        """PDE 의 반응 항 (v0^2 / 4 kappa) f(T)."""
        return model.rate * self._raw_f(model, T)

    # ------------------------------------------------------------------
    # 도함수와 상수
    # ------------------------------------------------------------------
    def derivative(self, model: ReactionModel, T: np.ndarray) -> np.ndarray:
        if model.kind is ReactionKind.KPP_QUADRATIC:
            return 1.0 - 2.0 * np.asarray(T, dtype=float)
        if model.df is not None:
            return np.asarray(model.df(np.asarray(T, dtype=float)), dtype=float)
        return self._numeric_derivative(lambda s: self._raw_f(model, s), np.asarray(T, dtype=float))

    def second_derivative(self, model: ReactionModel, T: np.ndarray) -> np.ndarray:
        if model.kind is ReactionKind.KPP_QUADRATIC:
            return np.full_like(np.asarray(T, dtype=float), -2.0)
        if model.d2f is not None:
            return np.asarray(model.d2f(np.asarray(T, dtype=float)), dtype=float)
        return self._numeric_derivative(lambda s: self.derivative(model, s), np.asarray(T, dtype=float))

    @staticmethod
    def _numeric_derivative(fn: Callable[[np.ndarray], np.ndarray], T: np.ndarray) -> np.ndarray:
        step = 1e-5
        lo = np.clip(T - step, 0.0, 1.0)
        hi = np.clip(T + step, 0.0, 1.0)
        return (np.asarray(fn(hi)) - np.asarray(fn(lo))) / (hi - lo)

    def reaction_constants(self, model: ReactionModel) -> Tuple[float, float]:
        """alpha = -inf f', beta = -sup f'' 를 [0, 1] 의 조밀한 표본으로 계산합니다.

        Raises:
            ReactionError: KPP 계열이 아니거나 alpha, beta 가 양수가 아닐 때.
        """
        if not model.kind.is_kpp:
            raise ReactionError(f"KPP 계열 모델만 경계 상수를 가집니다 (kind={model.kind.value})")
        if model.kind is ReactionKind.KPP_QUADRATIC:
            return 1.0, 2.0
        samples = np.linspace(0.0, 1.0, SAMPLE_POINTS + 1)
        alpha = -float(np.min(self.derivative(model, samples)))
        beta = -float(np.max(self.second_derivative(model, samples)))
        if not math.isfinite(alpha) or alpha <= 0:
            raise ReactionError(f"alpha = -inf f' 가 양수가 아닙니다 (alpha={alpha})")
        if not math.isfinite(beta) or beta <= 0:
            raise ReactionError(f"f 가 [0, 1] 에서 엄밀히 오목하지 않습니다 (beta={beta})")
        return alpha, beta

    def require_kpp(self, model: ReactionModel) -> Tuple[float, float]:
        """경계 평가 전 KPP 여부를 확인하고 (alpha, beta) 를 돌려줍니다."""
        return self.reaction_constants(model)

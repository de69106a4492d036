"""실행에서 측정하는 모든 양: V(t), 시간 평균, 커널, 반응-기울기 곱, J 범함수, H~."""
import math
from typing import Callable, Optional, Tuple, Union

import numpy as np
from scipy.integrate import quad, simpson

from core.domain.errors import DiagnosticsError, PartitionError
from core.domain.models import (
    BurningRateSeries,
    FlowField,
    HTilde,
    KernelEvaluation,
    Partition,
    ReactionModel,
    ScalarField,
    ShearProfile,
    SimulationState,
    TimeAverage,
    Weighting,
)
from core.logger import logger
from core.services.field_service import FieldService
from core.services.kernel import kernel_cdf, kernel_values
from core.services.reaction_service import ReactionService

KERNEL_MASS_NORMALIZATION = 32.0
TIME_QUADRATURE_NODES = 2001
J_QUADRATURE_NODES = 401
H_TILDE_NODES = 20001
ACTIVE_THRESHOLD = 1e-6

ShearLike = Union[ShearProfile, FlowField]


class DiagnosticsService:
    """진단량 계산 서비스.

    Attributes:
        field_service (FieldService): 적분 연산.
        reaction_service (ReactionService): f(T) 평가.
    """

    def __init__(self, field_service: FieldService, reaction_service: ReactionService):
        self.field_service = field_service
        self.reaction_service = reaction_service

    # ------------------------------------------------------------------
    # 필드 진단
    # ------------------------------------------------------------------
    def bulk_burning_rate(self, field: ScalarField, model: ReactionModel) -> float:
        """V = (v0^2 / 4 kappa) int int f(T) dx dy / H."""
        self.field_service.check_finite(field)
        f = self.reaction_service.evaluate_f(model, field.interior)
        return model.rate * self.field_service.integrate_values(field.grid, f)

    def burned_mass(self, state: SimulationState) -> float:
        """창 밖으로 밀려난 질량 + 창 안의 int T dx dy / H."""
        return state.shifted_mass + self.field_service.integrate_scalar(state.field)

    def front_position(self, field: ScalarField) -> float:
        """y 평균 T 가 1/2 를 처음 지나는 x (선형 보간)."""
        profile = self.field_service.column_integrals(field)
        grid = field.grid
        below = np.nonzero(profile < 0.5)[0]
        if below.size == 0:
            return grid.x_max
        i = int(below[0])
        if i == 0:
            return grid.x_min
        a, b = profile[i - 1], profile[i]
        x = grid.x_centers
        return float(x[i - 1] + (a - 0.5) / (a - b) * grid.dx)

    def is_front_like(self, field: ScalarField) -> bool:
        profile = self.field_service.column_integrals(field)
        return bool(profile[0] > 0.5 and profile[-1] < 0.5)

    def reaction_gradient_product(self, field: ScalarField, model: ReactionModel, warn: bool = True) -> float:
        """(int f(T) / H) (int |grad T|^2 / H)."""
        if warn and not self.is_front_like(field):
            logger.warning("[Service:Diagnostics] 전선 형태가 아닌 필드입니다 (왼쪽 ~1, 오른쪽 ~0 아님)")
        f = self.reaction_service.evaluate_f(model, field.interior)
        reaction_part = self.field_service.integrate_values(field.grid, f)
        gradient_part = self.field_service.gradient_sq_integral(field)
        return reaction_part * gradient_part

    def record(self, series: BurningRateSeries, state: SimulationState, model: ReactionModel) -> None:
        """현재 상태의 진단량을 시계열에 추가합니다."""
        field = state.field
        series.append(
            t=state.t,
            v_reaction=self.bulk_burning_rate(field, model),
            grad_sq=self.field_service.gradient_sq_integral(field),
            reaction_gradient_product=self.reaction_gradient_product(field, model, warn=False),
            front_x=self.front_position(field),
            burned_mass=self.burned_mass(state),
        )

    def fit_decay_rate(self, field: ScalarField, low: float = 1e-8, high: float = 1e-2) -> float:
        """전선 앞쪽에서 y 평균 T 의 지수 감쇠율을 최소제곱으로 맞춥니다."""
        profile = self.field_service.column_integrals(field)
        x = field.grid.x_centers
        front = self.front_position(field)
        ahead = (x > front) & (profile > low) & (profile < high)
        if np.count_nonzero(ahead) < 3:
            raise DiagnosticsError("감쇠율을 맞출 점이 부족합니다 (창이 너무 좁거나 꼬리가 잘림)")
        slope = np.polyfit(x[ahead], np.log(profile[ahead]), 1)[0]
        return float(-slope)

    @staticmethod
    def decay_constants(model: ReactionModel, u1_sup: float, grad_sup: float, lam: float) -> Tuple[float, float]:
        """초기 자료의 지수 감쇠가 유지될 때의 성장 상수 (c1, c2).

        c1 = ||u1|| + kappa lam + v0^2 / (4 kappa lam)
        c2 = ||u1|| + kappa lam + v0^2 / (2 kappa lam) + 4 ||grad u|| / lam
        """
        if lam <= 0:
            raise DiagnosticsError(f"lambda 는 양수여야 합니다 (lambda={lam})")
        kappa, v0 = model.kappa, model.v0
        c1 = u1_sup + kappa * lam + v0 ** 2 / (4.0 * kappa * lam)
        c2 = u1_sup + kappa * lam + v0 ** 2 / (2.0 * kappa * lam) + 4.0 * grad_sup / lam
        return c1, c2

    def energy_inequality_margin(self, series: BurningRateSeries, model: ReactionModel) -> np.ndarray:
        """dV/dt - [(beta v0^2/4) int|grad T|^2/H - (alpha v0^2/4 kappa) V] (KPP 에서 >= 0)."""
        alpha, beta = self.reaction_service.reaction_constants(model)
        if len(series) < 2:
            raise DiagnosticsError("시계열 길이가 2 미만입니다")
        t = series.array("times")
        v = series.array("v_reaction")
        dv = np.gradient(v, t)
        rhs = beta * model.v0 ** 2 / 4.0 * series.array("grad_sq") - alpha * model.rate * v
        return dv - rhs

    # ------------------------------------------------------------------
    # 커널과 시간 평균
    # ------------------------------------------------------------------
    def kernel_G(self, h: float, xi: float) -> KernelEvaluation:
        """G(h, xi). |xi| > h 이면 0 과 지지 밖 플래그를 돌려줍니다."""
        outside = abs(xi) > h
        if outside:
            logger.debug(f"[Service:Diagnostics] 커널 지지 밖 평가 (h={h}, xi={xi})")
        return KernelEvaluation(float(kernel_values(h, xi)), outside)

    @staticmethod
    def kernel_integral(h: float, xi: float) -> float:
        """int_{-h}^{xi} G(h, s) ds."""
        return float(kernel_cdf(h, xi))

    def _covered(self, series: BurningRateSeries, t0: float, tau: float) -> None:
        if tau <= 0:
            raise DiagnosticsError(f"평균 구간 길이는 양수여야 합니다 (tau={tau})")
        if len(series) < 2:
            raise DiagnosticsError("시계열 길이가 2 미만입니다")
        eps = 1e-9 * max(1.0, abs(t0) + tau)
        if series.times[0] > t0 + eps or series.times[-1] < t0 + tau - eps:
            raise DiagnosticsError(
                f"시계열 [{series.times[0]}, {series.times[-1]}] 이 평균 구간 [{t0}, {t0 + tau}] 을 덮지 않습니다"
            )

    def time_average_V(self, series: BurningRateSeries, t0: float, tau: float,
                       weighting: Weighting = Weighting.FLAT, estimator: str = "v_reaction") -> TimeAverage:
        """[t0, t0 + tau] 에서 V 의 평균.

        flat 은 (1/tau) int V, kernel 은 (1/tau^3) int G(tau/2, t - t0 - tau/2) V dt.
        kernel 의 질량은 tau^3 / 32 이므로 normalized = raw * 32 입니다.
        """
        self._covered(series, t0, tau)
        nodes = np.linspace(t0, t0 + tau, TIME_QUADRATURE_NODES)
        values = np.interp(nodes, series.array("times"), series.array(estimator))
        if weighting is Weighting.FLAT:
            mean = float(simpson(values, x=nodes)) / tau
            return TimeAverage(raw=mean, normalized=mean, weighting=weighting)
        weights = kernel_values(0.5 * tau, nodes - t0 - 0.5 * tau)
        raw = float(simpson(weights * values, x=nodes)) / tau ** 3
        return TimeAverage(raw=raw, normalized=KERNEL_MASS_NORMALIZATION * raw, weighting=weighting)

    def mass_average_V(self, series: BurningRateSeries, t: float) -> float:
        """(M(t) - M(0)) / t, 연소 질량으로 본 <V>_t."""
        if t <= 0:
            raise DiagnosticsError(f"t 는 양수여야 합니다 (t={t})")
        times = series.array("times")
        mass = series.array("burned_mass")
        return float((np.interp(t, times, mass) - mass[0]) / (t - times[0]))

    # ------------------------------------------------------------------
    # J 범함수
    # ------------------------------------------------------------------
    @staticmethod
    def shear_velocity_law(flow: ShearLike) -> Callable[[float, float], float]:
        """(t, y) -> u(t, y) 를 만듭니다."""
        if isinstance(flow, ShearProfile):
            return lambda t, y: float(flow(y))
        if flow.time_law is not None:
            law = flow.time_law
            return lambda t, y: float(law.shear_velocity(y, t))
        grid = flow.grid
        row = flow.u1_faces[0]
        y_nodes = np.concatenate(([0.0], grid.y_centers, [grid.H]))
        wall = 0.5 * (row[0] + row[-1])
        values = np.concatenate(([wall], row, [wall]))
        return lambda t, y: float(np.interp(y, y_nodes, values))

    def j_instantaneous(self, flow: ShearLike, partition: Partition, t: float,
                        l: Optional[float] = None) -> float:
        """J(t, u) = c+ sum_{D+} w_j int_mid u / H - c- sum_{D-} w_j int_mid u / H."""
        part = partition if l is None else partition.with_l(l)
        velocity = self.shear_velocity_law(flow)
        total = 0.0
        for iv in part.intervals:
            a, b = iv.middle_half
            integral = quad(lambda y: velocity(t, y), a, b, limit=100)[0] / part.H
            weight = part.c_plus if iv.sign > 0 else -part.c_minus
            total += weight * iv.shrink_factor(part.l) * integral
        return total

    def j_functional(self, flow: ShearLike, partition: Partition, t0: float, tau: float,
                     l: Optional[float] = None) -> TimeAverage:
        """(1/tau^3) int G(tau/2, t - t0 - tau/2) J(t, u) dt, raw 와 x32 정규화 값."""
        if tau <= 0:
            raise DiagnosticsError(f"tau 는 양수여야 합니다 (tau={tau})")
        self._check_partition(partition)
        nodes = np.linspace(t0, t0 + tau, J_QUADRATURE_NODES)
        values = np.array([self.j_instantaneous(flow, partition, t, l) for t in nodes])
        weights = kernel_values(0.5 * tau, nodes - t0 - 0.5 * tau)
        raw = float(simpson(weights * values, x=nodes)) / tau ** 3
        return TimeAverage(raw=raw, normalized=KERNEL_MASS_NORMALIZATION * raw, weighting=Weighting.KERNEL)

    @staticmethod
    def _check_partition(partition: Partition) -> None:
        for a, b in zip(partition.intervals, partition.intervals[1:]):
            if a.upper > b.lower + 1e-12 * partition.H:
                raise PartitionError(f"구간이 겹칩니다: {a} / {b}")

    # ------------------------------------------------------------------
    # H~
    # ------------------------------------------------------------------
    def compute_H_tilde(self, partition: Partition, nodes: int = H_TILDE_NODES) -> HTilde:
        """g(y) 의 이웃한 근 사이 최대 간격 H~ 를 구합니다.

        nu+- 의 밀도는 m+- chi_{I_j} G(h_j, y - c_j) / (M H (h_j^2 + l^2)) 이고,
        누적값은 커널 원시함수로 정확히 계산합니다.
        """
        H, l = partition.H, partition.l
        y = np.linspace(0.0, H, nodes)
        norm = partition.normalizer
        if partition.is_empty or norm == 0:
            return HTilde(value=0.0, degenerate=True)
        g = np.zeros_like(y)
        for iv in partition.intervals:
            scale = partition.g_weight_plus if iv.sign > 0 else partition.g_weight_minus
            cumulative = kernel_cdf(iv.half_width, y - iv.center)
            g += iv.sign * scale * cumulative / (norm * H * (iv.half_width ** 2 + l ** 2))
        peak = float(np.max(np.abs(g)))
        if peak == 0.0:
            logger.info("[Service:Diagnostics] g(y) 가 항등적으로 0 입니다 (H~ 퇴화)")
            return HTilde(value=0.0, degenerate=True)

        roots = self._roots(y, g, 1e-12 * peak)
        roots = sorted(set([0.0, H] + roots))
        gap = float(np.max(np.diff(roots)))
        return HTilde(value=min(gap, H), degenerate=False, roots=tuple(roots))

    @staticmethod
    def _roots(y: np.ndarray, g: np.ndarray, tol: float) -> list:
        roots = []
        zero = np.abs(g) <= tol
        k = 0
        n = len(y)
        while k < n:
            if zero[k]:
                start = k
                while k + 1 < n and zero[k + 1]:
                    k += 1
                if start == 0:
                    roots.append(float(y[0]))
                elif k == n - 1:
                    roots.append(float(y[-1]))
                else:
                    roots.append(float(0.5 * (y[start] + y[k])))
            elif k + 1 < n and not zero[k + 1] and g[k] * g[k + 1] < 0:
                s = g[k] / (g[k] - g[k + 1])
                roots.append(float(y[k] + s * (y[k + 1] - y[k])))
            k += 1
        return roots

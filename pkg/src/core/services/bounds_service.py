"""해석적 하한/상한의 상수 없는 핵심값(core) 평가기.

모든 보편 상수 C 는 생략되며, 보고서의 caveats 에 그 사실이 기록됩니다.
시뮬레이션 결과와는 비율로만 비교합니다.
"""
import math
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from core.domain.errors import BoundError, PartitionError
from core.domain.models import (
    BoundReport,
    EffectiveTensor,
    FlowField,
    Interval,
    Partition,
    ReactionModel,
    ShearProfile,
    TimeLawKind,
    TubeGeometry,
)
from core.logger import logger
from core.services.diagnostics_service import DiagnosticsService, ShearLike
from core.services.flow_service import FlowService
from core.services.reaction_service import ReactionService

CONSTANT_CAVEAT = "보편 상수 C 생략: 측정값과는 비율로만 비교"
SIGN_SAMPLES = 4096
ZERO_FRACTION = 1e-12
IDENTITY_TOLERANCE = 1e-12
TAU_SWEEP_POINTS = 25


class BoundsService:
    """모든 해석적 경계를 평가하는 서비스.

    Attributes:
        reaction_service (ReactionService): KPP 상수 alpha, beta.
        flow_service (FlowService): 전단 노름과 h_u.
        diagnostics_service (DiagnosticsService): J 범함수와 H~.
    """

    def __init__(
        self,
        reaction_service: ReactionService,
        flow_service: FlowService,
        diagnostics_service: DiagnosticsService,
    ):
        self.reaction_service = reaction_service
        self.flow_service = flow_service
        self.diagnostics_service = diagnostics_service

    # ------------------------------------------------------------------
    # 보편 경계
    # ------------------------------------------------------------------
    def universal_lower_bound(self, model: ReactionModel, t: float = math.inf) -> float:
        """v0 sqrt(beta / 4 alpha) (1 - exp(-alpha v0^2 t / 2 kappa))."""
        alpha, beta = self.reaction_service.require_kpp(model)
        return model.v0 * math.sqrt(beta / (4.0 * alpha)) * self._growth(alpha, model, t)

    @staticmethod
    def _growth(alpha: float, model: ReactionModel, t: float) -> float:
        if t < 0:
            raise BoundError(f"t 는 0 이상이어야 합니다 (t={t})")
        if math.isinf(t):
            return 1.0
        return -math.expm1(-alpha * model.v0 ** 2 * t / (2.0 * model.kappa))

    def upper_bound(self, model: ReactionModel, C0: float, u_inf: float, t: float) -> float:
        """4 C0 kappa / (v0 t) + v0 + ||u1||_inf."""
        if not t > 0:
            raise BoundError(f"상한은 t > 0 에서만 정의됩니다 (t={t})")
        if math.isinf(t):
            return model.v0 + u_inf
        return 4.0 * C0 * model.kappa / (model.v0 * t) + model.v0 + u_inf

    def tau0(self, model: ReactionModel, H: float, partition: Optional[Partition] = None) -> float:
        """max(kappa / v0^2, H / v0). partition 이 주어지면 H 대신 H~ 를 씁니다."""
        length = H
        if partition is not None and not partition.is_empty:
            h_tilde = self.diagnostics_service.compute_H_tilde(partition)
            if not h_tilde.degenerate and h_tilde.value > 0:
                length = h_tilde.value
        return max(model.tau_c, length / model.v0)

    # ------------------------------------------------------------------
    # 분할
    # ------------------------------------------------------------------
    def partition_sign_intervals(self, profile: ShearProfile, l: float = 0.0) -> Partition:
        """u 가 부호를 바꾸지 않는 최대 구간들로 [0, H] 를 나눕니다."""
        H = profile.H
        y = np.linspace(0.0, H, SIGN_SAMPLES * max(1, profile.wavenumber or 1) + 1)
        u = np.asarray(profile(y), dtype=float)
        sup = float(np.max(np.abs(u)))
        if sup == 0.0:
            logger.warning(f"[Service:Bounds] u 가 항등적으로 0 입니다 ({profile.label}); 빈 분할을 돌려줍니다")
            return Partition(intervals=(), H=H, l=l)

        zero_level = ZERO_FRACTION * sup
        signs = np.where(u > zero_level, 1, np.where(u < -zero_level, -1, 0))
        intervals: List[Interval] = []
        k = 0
        n = len(y)
        while k < n:
            if signs[k] == 0:
                k += 1
                continue
            start = k
            while k + 1 < n and signs[k + 1] == signs[start]:
                k += 1
            lo = self._refine_edge(profile, y, start - 1, start) if start > 0 else 0.0
            hi = self._refine_edge(profile, y, k, k + 1) if k + 1 < n else H
            if hi > lo:
                intervals.append(Interval(center=0.5 * (lo + hi), half_width=0.5 * (hi - lo),
                                          sign=int(signs[start])))
            k += 1
        logger.debug(f"[Service:Bounds] 부호 구간 {len(intervals)}개 ({profile.label})")
        return Partition(intervals=tuple(intervals), H=H, l=l)

    @staticmethod
    def _refine_edge(profile: ShearProfile, y: np.ndarray, i: int, j: int) -> float:
        a, b = float(y[i]), float(y[j])
        fa, fb = float(profile(a)), float(profile(b))
        if fa == 0.0:
            return a
        if fb == 0.0:
            return b
        if fa * fb > 0:
            # 0 에 가까운 표본 자체가 경계
            return a if abs(fa) < abs(fb) else b
        return brentq(lambda s: float(profile(s)), a, b, xtol=1e-14)

    def check_partition_signs(self, profile: ShearProfile, partition: Partition) -> None:
        """각 구간에서 u 가 지정된 부호를 유지하는지 표본으로 확인합니다.

        Raises:
            PartitionError: 반대 부호 값이 발견될 때.
        """
        sup = self.flow_service.sup_norm(profile)
        for iv in partition.intervals:
            samples = np.linspace(iv.lower, iv.upper, 129)[1:-1]
            values = iv.sign * np.asarray(profile(samples), dtype=float)
            if np.any(values < -1e-9 * max(sup, 1.0)):
                raise PartitionError(
                    f"구간 [{iv.lower:.6g}, {iv.upper:.6g}] 에서 u 의 부호가 지정된 부호({iv.sign:+d})와 다릅니다"
                )

    @staticmethod
    def assert_weight_identities(partition: Partition) -> None:
        """c+ + c- = 1, m+ + m- = 1 과 c/16 <= m/M <= c/4 를 확인합니다.

        Raises:
            BoundError: 항등식이 깨질 때.
        """
        if partition.s_plus == 0 or partition.s_minus == 0:
            return
        c_plus, c_minus = partition.c_plus, partition.c_minus
        if abs(c_plus + c_minus - 1.0) > IDENTITY_TOLERANCE:
            raise BoundError(f"c+ + c- != 1 ({c_plus + c_minus!r})")
        m0 = partition.m0
        m_plus, m_minus = 1.0 / (1.0 + m0), 1.0 / (1.0 + 1.0 / m0)
        if abs(m_plus + m_minus - 1.0) > IDENTITY_TOLERANCE:
            raise BoundError(f"m+ + m- != 1 ({m_plus + m_minus!r})")
        for c, g in ((c_plus, partition.g_weight_plus), (c_minus, partition.g_weight_minus)):
            ratio = g / partition.normalizer
            if not (c / 16.0 - IDENTITY_TOLERANCE <= ratio <= c / 4.0 + IDENTITY_TOLERANCE):
                raise BoundError(f"가중치 샌드위치 위반: m/M={ratio!r}, c={c!r}")

    # ------------------------------------------------------------------
    # 전단 경계
    # ------------------------------------------------------------------
    def _partition_core(self, profile: ShearProfile, partition: Partition) -> float:
        total = 0.0
        for iv in partition.intervals:
            a, b = iv.middle_half
            integral = abs(quad(lambda y: float(profile(y)), a, b, limit=100)[0]) / partition.H
            weight = partition.c_plus if iv.sign > 0 else partition.c_minus
            total += weight * iv.shrink_factor(partition.l) * integral
        return total

    def shear_partition_bound(self, profile: ShearProfile, partition: Partition,
                              model: Optional[ReactionModel] = None, refine_tau0: bool = False) -> BoundReport:
        """임의 분할에 대한 전단 하한의 core.

        Args:
            profile (ShearProfile): 전단 프로파일.
            partition (Partition): 부호가 맞는 분할.
            model (Optional[ReactionModel]): 주어지면 tau0 를 붙입니다.
            refine_tau0 (bool): True 이면 tau0 에 H 대신 H~ 를 씁니다.

        Returns:
            BoundReport: core 와 c+- 가중치.
        """
        if model is not None:
            self.reaction_service.require_kpp(model)
        self.check_partition_signs(profile, partition)
        self.assert_weight_identities(partition)
        core = self._partition_core(profile, partition)
        tau0 = None
        if model is not None:
            tau0 = self.tau0(model, partition.H, partition if refine_tau0 else None)
        return BoundReport(
            name="shear_partition",
            core=core,
            tau0=tau0,
            inputs={"profile": profile.label, "partition": partition.to_dict(), "l": partition.l},
            caveats=[CONSTANT_CAVEAT],
            extra={"c_plus": partition.c_plus, "c_minus": partition.c_minus,
                   "tau0_uses_H_tilde": bool(refine_tau0)},
        )

    def shear_norm_bound(self, profile: ShearProfile, model: ReactionModel) -> BoundReport:
        """(1 + l^2 / h_u^2)^-1 ||u||_1^2 / ||u||_inf."""
        self.reaction_service.require_kpp(model)
        sup = self.flow_service.sup_norm(profile)
        if sup == 0:
            raise BoundError(f"||u||_inf = 0 이어서 평가할 수 없습니다 ({profile.label})")
        l1 = self.flow_service.l1_norm(profile)
        h_u = self.flow_service.wrinkling_scale(profile)
        core = l1 ** 2 / sup / (1.0 + (model.l / h_u) ** 2)
        return BoundReport(
            name="shear_norm",
            core=core,
            tau0=self.tau0(model, profile.H),
            inputs={"profile": profile.label, "l": model.l},
            caveats=[CONSTANT_CAVEAT],
            extra={"l1_norm": l1, "sup_norm": sup, "h_u": h_u},
        )

    def optimize_partition(self, profile: ShearProfile, l: float, budget: int = 4) -> Partition:
        """각 부호 구간을 k 등분(k=0 은 구간 제외, k <= budget)하는 조합에서 core 를 높입니다.

        좌표 상승법이므로 결과는 국소 최적입니다. 한 구간의 k 만 바꿔서는 core 가 더 커지지 않지만,
        전체 조합 중 최대라는 보장은 없습니다. 시작점이 부호 구간 분할이므로 결과는 항상 그 core 이상입니다.
        """
        base = self.partition_sign_intervals(profile, l)
        if base.is_empty:
            return base
        choices = [1] * len(base.intervals)
        best_core = self._partition_core(profile, base)
        best = base
        improved = True
        while improved:
            improved = False
            for idx in range(len(choices)):
                for k in range(0, budget + 1):
                    if k == choices[idx]:
                        continue
                    trial = list(choices)
                    trial[idx] = k
                    candidate = self._split(base, trial)
                    if candidate.is_empty:
                        continue
                    core = self._partition_core(profile, candidate)
                    if core > best_core * (1.0 + 1e-12):
                        best_core, best, choices = core, candidate, trial
                        improved = True
        logger.debug(f"[Service:Bounds] 최적 분할 {choices} (core={best_core:.6g})")
        return best

    @staticmethod
    def _split(base: Partition, counts: Sequence[int]) -> Partition:
        pieces = []
        for iv, k in zip(base.intervals, counts):
            if k == 0:
                continue
            width = 2.0 * iv.half_width / k
            for i in range(k):
                pieces.append(Interval(center=iv.lower + (i + 0.5) * width, half_width=0.5 * width, sign=iv.sign))
        return Partition(intervals=tuple(pieces), H=base.H, l=base.l)

    # ------------------------------------------------------------------
    # 시간 의존 전단
    # ------------------------------------------------------------------
    def timedep_bound(self, flow: ShearLike, partition: Partition, t0: float, tau: float,
                      model: ReactionModel) -> BoundReport:
        """(1 + (tau0 / tau)^2)^-1 J(t0, tau, u).

        J 는 x32 정규화 값을 씁니다. 흐름이 pulsating/translating 계열이면
        닫힌 형태 core 도 extra 에 붙입니다.
        """
        self.reaction_service.require_kpp(model)
        if tau <= 0:
            raise BoundError(f"tau 는 양수여야 합니다 (tau={tau})")
        tau0 = self.tau0(model, partition.H)
        j = self.diagnostics_service.j_functional(flow, partition, t0, tau, l=model.l)
        caveats = [CONSTANT_CAVEAT]
        j_value = j.normalized
        if j_value < 0:
            caveats.append(f"J < 0 (부호 상쇄, J={j_value:.6g}); core 를 0 으로 보고합니다. D+- 를 바꿔 보세요")
            j_value = 0.0
        extra = {"J_raw": j.raw, "J_normalized": j.normalized, "t0": t0, "tau": tau}
        extra.update(self._closed_forms(flow, model, tau0, tau))
        return BoundReport(
            name="timedep",
            core=j_value / (1.0 + (tau0 / tau) ** 2),
            tau0=tau0,
            inputs={"partition": partition.to_dict(), "t0": t0, "tau": tau, "l": model.l},
            caveats=caveats,
            extra=extra,
        )

    @staticmethod
    def _closed_forms(flow: ShearLike, model: ReactionModel, tau0: float, tau: float) -> dict:
        law = flow.time_law if isinstance(flow, FlowField) else None
        if law is None:
            return {}
        shape = 1.0 / (1.0 + (law.n * model.l / law.H) ** 2)
        if law.kind is TimeLawKind.PULSATING:
            return {"pulsating_core": shape * law.u0 / (1.0 + 4.0 * (tau0 * law.rate) ** 2)}
        return {
            "translating_core": shape * law.u0 / (1.0 + (8.0 * law.rate * law.n * tau0 / law.H) ** 2),
            "translating_any_tau_core": shape * law.u0 / (1.0 + (tau0 / tau) ** 2),
        }

    def best_timedep_bound(self, flow: ShearLike, partition: Partition, t0: float, model: ReactionModel,
                           taus: Optional[Iterable[float]] = None) -> BoundReport:
        """tau 를 로그 격자로 훑어 core 가 최대인 보고서를 돌려줍니다."""
        tau0 = self.tau0(model, partition.H)
        grid = list(taus) if taus is not None else list(np.geomspace(0.25 * tau0, 64.0 * tau0, TAU_SWEEP_POINTS))
        best: Optional[BoundReport] = None
        for tau in grid:
            report = self.timedep_bound(flow, partition, t0, float(tau), model)
            if best is None or report.core > best.core:
                best = report
        if best is None:
            raise BoundError("tau 후보가 비어 있습니다")
        best.caveats.append("tau 는 로그 격자 탐색으로 고른 값입니다")
        return best

    # ------------------------------------------------------------------
    # 퍼컬레이팅 / 셀 유동
    # ------------------------------------------------------------------
    def percolating_bound(self, tubes: TubeGeometry, model: ReactionModel) -> BoundReport:
        """m 가중치와 가운데 절반 유량으로 쓴 퍼컬레이팅 하한."""
        self.reaction_service.require_kpp(model)
        m0 = tubes.m0
        if m0 is None or (isinstance(m0, float) and math.isnan(m0)):
            raise BoundError("m0 가 없어 퍼컬레이팅 하한을 평가할 수 없습니다")
        for tube in tubes.tubes:
            if tube.half_width <= 0:
                raise BoundError(f"관 반폭은 양수여야 합니다: {tube}")
        l = model.l
        forward = 0.0 if math.isinf(m0) else 1.0 / (1.0 + m0)
        backward = 1.0 if math.isinf(m0) else (0.0 if m0 == 0 else 1.0 / (1.0 + 1.0 / m0))

        def term(group) -> float:
            return sum(t.middle_half_flux / tubes.H * t.half_width ** 2 / (t.half_width ** 2 + l ** 2) for t in group)

        core = forward * term(tubes.plus) + backward * term(tubes.minus)
        period = 0.0 if math.isnan(tubes.period) else tubes.period
        caveats = [CONSTANT_CAVEAT]
        if tubes.metric_bound > 1.0:
            caveats.append(f"가운데 절반 유량은 계량 상수 {tubes.metric_bound:.3g} 배 이내의 근사입니다")
        return BoundReport(
            name="percolating",
            core=core,
            tau0=max(model.tau_c, (tubes.H + period) / model.v0),
            inputs={"tubes": tubes.to_dict(), "l": l},
            caveats=caveats,
            extra={"m_plus": forward, "m_minus": backward, "flux_station_spread": tubes.flux_station_spread},
        )

    def cellular_upper_bound(self, m: int, U: float, model: ReactionModel, Lx: float) -> BoundReport:
        """v0 [(1 + l/Lx) (U/v0)^(2/(1+m)) + Lx/(4l)], 상수 C 생략."""
        self.reaction_service.require_kpp(model)
        if m < 1:
            raise BoundError(f"셀 지수 m 은 1 이상이어야 합니다 (m={m})")
        l = model.l
        exponent = 2.0 / (1.0 + m)
        ratio = (1.0 + l / Lx) * (U / model.v0) ** exponent + Lx / (4.0 * l)
        caveats = [CONSTANT_CAVEAT]
        if U < model.v0:
            caveats.append(f"U < v0 (U={U:.6g}, v0={model.v0:.6g}): 적용 범위 밖입니다")
            logger.warning(f"[Service:Bounds] 셀 유동 상한 범위 밖 (U/v0={U / model.v0:.3g})")
        return BoundReport(
            name="cellular_upper",
            core=ratio * model.v0,
            tau0=None,
            inputs={"m": m, "U": U, "Lx": Lx, "l": l},
            caveats=caveats,
            extra={"exponent": exponent, "ratio_to_v0": ratio, "in_regime": U >= model.v0},
        )

    def homogenized_lower_bound(
        self,
        kstar: Union[float, EffectiveTensor],
        model: ReactionModel,
        t: float = math.inf,
        direction: Optional[Sequence[float]] = None,
    ) -> BoundReport:
        """v0 sqrt(beta k* / 4 alpha kappa) (1 - exp(-alpha v0^2 t / 2 kappa)).

        direction 이 주어지면 k* 대신 e^T sym(kappa*) e 를 씁니다.
        """
        alpha, beta = self.reaction_service.require_kpp(model)
        if direction is not None:
            if not isinstance(kstar, EffectiveTensor):
                raise BoundError("방향별 하한에는 EffectiveTensor 가 필요합니다")
            e = np.asarray(direction, dtype=float)
            e = e / np.linalg.norm(e)
            value = float(e @ kstar.symmetric @ e)
        else:
            value = kstar.kstar if isinstance(kstar, EffectiveTensor) else float(kstar)
        if not value > 0:
            raise BoundError(f"k* 는 양수여야 합니다 (k*={value})")
        core = model.v0 * math.sqrt(beta * value / (4.0 * alpha * model.kappa)) * self._growth(alpha, model, t)
        return BoundReport(
            name="homogenized",
            core=core,
            tau0=None,
            inputs={"kstar": value, "t": t, "direction": None if direction is None else list(direction)},
            caveats=[CONSTANT_CAVEAT, "매우 약한 반응 극한에서만 유효합니다"],
            extra={"v0_star": model.v0 * math.sqrt(value / model.kappa)},
        )

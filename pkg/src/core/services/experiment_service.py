import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import replace
from typing import Dict, List, Optional

import numpy as np

from core.domain.errors import BurnfrontError, ConfigError
from core.domain.models import (
    BoundReport,
    BurningRateSeries,
    CellProblem,
    ExperimentSpec,
    FlowKind,
    FlowSpec,
    Interval,
    Partition,
    Preset,
    RunPlan,
    RunResult,
    SimulationConfig,
    SimulationState,
    TimeLawKind,
    TubeBand,
    Weighting,
)
from core.logger import logger
from core.ports.checkpoint_port import CheckpointPort
from core.services.bounds_service import BoundsService
from core.services.diagnostics_service import DiagnosticsService
from core.services.flow_service import FlowService
from core.services.homogenization_service import HomogenizationService
from core.services.solver_service import SolverService
from core.services.sweep_report_service import SweepReportService

RESOLUTION_CELLS = 8
UPPER_BOUND_SLACK = 1.02

AMPLITUDE_KEYS = {
    Preset.SHEAR_SWEEP: "u0",
    Preset.SHEAR_PERPENDICULAR: "w0",
    Preset.PERCOLATING: "U",
    Preset.CELLULAR_SWEEP: "U",
}


class ExperimentService:
    """실험 문서 하나를 실행 계획으로 펼치고, 실행하고, 번들을 조립하는 오케스트레이션 서비스.

    Attributes:
        solver_service (SolverService): PDE 적분.
        flow_service (FlowService): 유동과 유선관.
        diagnostics_service (DiagnosticsService): 시간 평균과 연소 질량.
        bounds_service (BoundsService): 경계 평가.
        homogenization_service (HomogenizationService): 셀 문제.
        sweep_report_service (SweepReportService): 요약표와 기울기.
        checkpoint_port (Optional[CheckpointPort]): 체크포인트 저장소.
        threads (int): 스윕 작업자 수.
        allow_underresolved (bool): 해상도 정책 위반을 경고로 낮출지 여부.
    """

    def __init__(
        self,
        solver_service: SolverService,
        flow_service: FlowService,
        diagnostics_service: DiagnosticsService,
        bounds_service: BoundsService,
        homogenization_service: HomogenizationService,
        sweep_report_service: SweepReportService,
        checkpoint_port: Optional[CheckpointPort] = None,
        threads: int = 1,
        allow_underresolved: bool = False,
    ):
        self.solver_service = solver_service
        self.flow_service = flow_service
        self.diagnostics_service = diagnostics_service
        self.bounds_service = bounds_service
        self.homogenization_service = homogenization_service
        self.sweep_report_service = sweep_report_service
        self.checkpoint_port = checkpoint_port
        self.threads = max(1, int(threads))
        self.allow_underresolved = allow_underresolved

    # ------------------------------------------------------------------
    # 계획
    # ------------------------------------------------------------------
    def plan(self, spec: ExperimentSpec) -> List[RunPlan]:
        """프리셋과 진폭 목록을 실행 계획 목록으로 펼칩니다."""
        amplitudes = spec.amplitudes or (math.nan,)
        if spec.preset is Preset.LAMINAR:
            amplitudes = (0.0,)
        plans = []
        for index, amplitude in enumerate(amplitudes):
            flow = self._flow_for(spec, amplitude)
            label = f"{spec.preset.value}_{index:02d}" if math.isnan(amplitude) else \
                f"{spec.preset.value}_{index:02d}_a{amplitude:g}"
            config = None
            if spec.solver is not None and spec.grid is not None:
                s = spec.solver
                config = SimulationConfig(
                    grid=spec.grid, reaction=spec.reaction, flow=flow, dt=s.dt, t_final=s.t_final,
                    window_policy=s.window_policy, snapshot_every=s.snapshot_every, x0=s.x0, lam=s.lam,
                    implicit_y=s.implicit_y, label=label,
                )
            plans.append(RunPlan(label=label, amplitude=amplitude, config=config))
        return plans

    def _flow_for(self, spec: ExperimentSpec, amplitude: float) -> FlowSpec:
        flow = spec.flow
        if spec.preset is Preset.LAMINAR:
            return FlowSpec(kind=FlowKind.NONE)
        if math.isnan(amplitude):
            return flow
        v0 = spec.reaction.v0
        if spec.preset is Preset.TIMEDEP_SHEAR:
            tau0 = self.bounds_service.tau0(spec.reaction, spec.grid.H)
            return flow.with_params(rate=amplitude / tau0)
        if spec.preset is Preset.HOMOGENIZE:
            key = {FlowKind.SHEAR_SINE: "u0", FlowKind.PERPENDICULAR_SHEAR: "w0",
                   FlowKind.TIMEDEP_SHEAR: "u0"}.get(flow.kind, "U")
            return flow.with_params(**{key: amplitude * v0})
        return flow.with_params(**{AMPLITUDE_KEYS[spec.preset]: amplitude * v0})

    def check_resolution(self, spec: ExperimentSpec, plan: RunPlan) -> bool:
        """dx <= l/8, 전단이면 dy <= min h_j / 8 을 확인합니다.

        Returns:
            bool: 해상도 부족 여부 (allow_underresolved 일 때만 True 가 반환됨).

        Raises:
            ConfigError: 해상도 부족이고 allow_underresolved 가 아닐 때.
        """
        grid = plan.config.grid.build()
        l = spec.reaction.l
        problems = []
        if grid.dx > l / RESOLUTION_CELLS:
            problems.append(f"dx={grid.dx:.4g} > l/{RESOLUTION_CELLS}={l / RESOLUTION_CELLS:.4g}")
        flow = plan.config.flow
        if flow.kind in (FlowKind.SHEAR_SINE, FlowKind.TIMEDEP_SHEAR):
            h_min = grid.H / (4.0 * int(flow.param("n")))
            if grid.dy > h_min / RESOLUTION_CELLS:
                problems.append(f"dy={grid.dy:.4g} > h/{RESOLUTION_CELLS}={h_min / RESOLUTION_CELLS:.4g}")
        if flow.kind is FlowKind.PERPENDICULAR_SHEAR:
            h_min = float(flow.param("wavelength")) / (4.0 * int(flow.param("n")))
            if grid.dx > h_min / RESOLUTION_CELLS:
                problems.append(f"dx={grid.dx:.4g} > h/{RESOLUTION_CELLS}={h_min / RESOLUTION_CELLS:.4g}")
        if not problems:
            return False
        message = f"[Service:Experiment] 해상도 부족 ({plan.label}): " + ", ".join(problems)
        if not self.allow_underresolved:
            raise ConfigError(message + " (--allow-underresolved 로 강행 가능)")
        logger.warning(message)
        return True

    # ------------------------------------------------------------------
    # 실행
    # ------------------------------------------------------------------
    def run(self, spec: ExperimentSpec, resume: bool = False) -> List[RunResult]:
        """모든 실행을 작업자 풀에서 돌리고 번들을 기록합니다.

        Raises:
            ConfigError: 계획 단계의 설정 오류 (실행 전).
        """
        if spec.preset is Preset.HOMOGENIZE:
            return self.run_homogenization(spec)
        plans = self.plan(spec)
        flags = {plan.label: self.check_resolution(spec, plan) for plan in plans}
        logger.info(f"[Service:Experiment] 실험 시작: {spec.name} ({spec.preset.value}, 실행 {len(plans)}개, "
                    f"작업자 {self.threads}개)")

        results: Dict[int, RunResult] = {}
        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            future_to_index = {
                executor.submit(self._execute, spec, plan, resume): index
                for index, plan in enumerate(plans)
            }
            for future in as_completed(future_to_index):
                index = future_to_index[future]
                results[index] = future.result()

        ordered = [results[i] for i in range(len(plans))]
        for result in ordered:
            result.under_resolved = flags[result.plan.label]
        self.sweep_report_service.write_bundle(spec, ordered)
        failed = sum(1 for r in ordered if not r.ok)
        logger.info(f"[Service:Experiment] 실험 완료: {spec.name} (성공 {len(ordered) - failed}, 실패 {failed})")
        return ordered

    def _execute(self, spec: ExperimentSpec, plan: RunPlan, resume: bool) -> RunResult:
        result = RunResult(plan=plan)
        config = plan.config
        try:
            initial: Optional[SimulationState] = None
            if resume and self.checkpoint_port is not None:
                initial = self.checkpoint_port.load(plan.label)
            series, state = self.solver_service.run(config, initial_state=initial, on_step=self._checkpoint_hook(spec, plan))
            result.series, result.final_state = series, state
            if spec.reaction.kind.is_kpp:
                result.reports = self._bounds_for(spec, plan)
            else:
                logger.warning(f"[Service:Experiment] KPP 반응이 아니므로 경계 평가를 건너뜁니다 ({plan.label}, "
                               f"{spec.reaction.kind.value})")
            self._measure(spec, result)
        except BurnfrontError as e:
            logger.error(f"[Service:Experiment] 실행 실패 ({plan.label}): {e}")
            result.error = str(e)
        except Exception as e:
            logger.exception(f"[Service:Experiment] 실행 중 예기치 않은 오류 ({plan.label}): {e}")
            result.error = f"{type(e).__name__}: {e}"
        return result

    def _checkpoint_hook(self, spec: ExperimentSpec, plan: RunPlan):
        every = spec.solver.checkpoint_every if spec.solver else None
        if self.checkpoint_port is None or not every:
            return None
        port = self.checkpoint_port

        def hook(state: SimulationState) -> None:
            if state.step_count % every == 0:
                port.save(state, plan.label)
        return hook

    def _measure(self, spec: ExperimentSpec, result: RunResult) -> None:
        series: BurningRateSeries = result.series
        model = spec.reaction
        primary = result.reports[0] if result.reports else None
        tau0 = primary.tau0 if primary is not None and primary.tau0 is not None else \
            self.bounds_service.tau0(model, spec.grid.H)
        t0 = max(spec.average_start, series.times[0])
        tau = min(spec.averaging_multiple * tau0, series.times[-1] - t0)
        result.tau0, result.tau = tau0, tau
        if tau > 0:
            result.measured = self.diagnostics_service.time_average_V(series, t0, tau, Weighting.FLAT).normalized
            result.checks["kernel_average"] = self.diagnostics_service.time_average_V(
                series, t0, tau, Weighting.KERNEL).normalized
        result.checks["short_window"] = bool(tau < tau0)
        if result.checks["short_window"]:
            logger.warning(f"[Service:Experiment] 평균 창이 tau0 보다 짧습니다 ({result.plan.label}: "
                           f"tau={tau:.4g} < tau0={tau0:.4g})")
        result.checks["product_min"] = float(np.min(series.array("reaction_gradient_product")))
        result.checks.update(self._upper_bound_check(spec, result))

    def _upper_bound_check(self, spec: ExperimentSpec, result: RunResult) -> Dict[str, object]:
        """기록된 모든 t 에서 질량 평균 <V>_t 가 상한의 1.02 배 이하인지 확인합니다."""
        model, config = spec.reaction, result.plan.config
        lam = model.v0 / (2.0 * model.kappa)
        if config.lam < lam:
            return {"upper_bound_ok": None}
        C0 = math.exp(lam * abs(config.x0))
        grid = config.grid.build()
        u_inf = self.flow_service.build(config.flow, grid).u1_sup
        series = result.series
        worst = -math.inf
        for t in series.times[1:]:
            elapsed = t - series.times[0]
            if elapsed <= 0:
                continue
            measured = self.diagnostics_service.mass_average_V(series, t)
            worst = max(worst, measured / self.bounds_service.upper_bound(model, C0, u_inf, elapsed))
        ok = worst <= UPPER_BOUND_SLACK
        if not ok:
            logger.error(f"[Service:Experiment] 상한 위반 ({result.plan.label}, 최대 비율 {worst:.4f})")
        return {"upper_bound_ok": bool(ok), "upper_bound_max_ratio": worst}

    # ------------------------------------------------------------------
    # 경계
    # ------------------------------------------------------------------
    def evaluate_bounds(self, spec: ExperimentSpec) -> List[RunResult]:
        """PDE 없이 경계만 평가하고 번들을 기록합니다."""
        if spec.preset is Preset.HOMOGENIZE:
            return self.run_homogenization(spec)
        results = []
        for plan in self.plan(spec):
            result = RunResult(plan=plan)
            try:
                result.reports = self._bounds_for(spec, plan)
                primary = result.reports[0]
                result.tau0 = primary.tau0 if primary.tau0 is not None else \
                    self.bounds_service.tau0(spec.reaction, spec.grid.H)
            except BurnfrontError as e:
                logger.error(f"[Service:Experiment] 경계 평가 실패 ({plan.label}): {e}")
                result.error = str(e)
            except Exception as e:
                logger.exception(f"[Service:Experiment] 경계 평가 중 예기치 않은 오류 ({plan.label}): {e}")
                result.error = f"{type(e).__name__}: {e}"
            results.append(result)
        self.sweep_report_service.write_bundle(spec, results)
        return results

    def _bounds_for(self, spec: ExperimentSpec, plan: RunPlan) -> List[BoundReport]:
        """프리셋별 경계 리포트. 첫 번째가 요약표의 기준 경계입니다."""
        model = spec.reaction
        config = plan.config
        grid = config.grid.build()
        flow = config.flow
        bounds = self.bounds_service
        universal = BoundReport(name="universal_lower", core=bounds.universal_lower_bound(model, config.t_final),
                                tau0=bounds.tau0(model, grid.H), inputs={"t": config.t_final},
                                caveats=["보편 상수 C 생략"])
        reports: List[BoundReport] = []

        if spec.preset is Preset.SHEAR_SWEEP:
            profile = self.flow_service.make_shear_sine(float(flow.param("u0")), int(flow.param("n")), grid.H)
            partition = bounds.partition_sign_intervals(profile, model.l)
            reports.append(bounds.shear_partition_bound(profile, partition, model))
            reports.append(bounds.shear_norm_bound(profile, model))
            best = bounds.optimize_partition(profile, model.l, spec.partition_budget)
            optimized = bounds.shear_partition_bound(profile, best, model, refine_tau0=True)
            reports.append(replace(optimized, name="shear_partition_optimized"))
        elif spec.preset is Preset.TIMEDEP_SHEAR:
            field = self.flow_service.build(flow, grid)
            shape = self.flow_service.make_shear_sine(float(flow.param("u0")), int(flow.param("n")), grid.H)
            partition = bounds.partition_sign_intervals(shape, model.l)
            tau0 = bounds.tau0(model, grid.H)
            tau = spec.averaging_multiple * tau0
            candidates = [bounds.timedep_bound(field, p, spec.average_start, tau, model)
                          for p in (partition, self._swapped(partition))]
            reports.append(max(candidates, key=lambda r: r.core))
        elif spec.preset is Preset.PERCOLATING:
            sf = self.flow_service.stream_function_for(flow, grid)
            scale = sf.amplitude * sf.length_scale
            bands = [TubeBand(lo=b.lo * scale, hi=b.hi * scale, y_seed=b.y_seed) for b in spec.bands]
            tubes = self.flow_service.extract_tubes(sf, bands, model.l, period=float(flow.param("Lx")))
            report = bounds.percolating_bound(tubes, model)
            report.extra["tubes"] = tubes.to_dict()
            reports.append(report)
        elif spec.preset is Preset.CELLULAR_SWEEP:
            reports.append(bounds.cellular_upper_bound(int(flow.param("m")), float(flow.param("U")), model,
                                                       float(flow.param("Lx"))))
        reports.append(universal)
        return reports

    @staticmethod
    def _swapped(partition: Partition) -> Partition:
        flipped = tuple(Interval(center=iv.center, half_width=iv.half_width, sign=-iv.sign)
                        for iv in partition.intervals)
        return Partition(intervals=flipped, H=partition.H, l=partition.l)

    # ------------------------------------------------------------------
    # 균질화
    # ------------------------------------------------------------------
    def build_cell(self, spec: ExperimentSpec, flow: FlowSpec) -> CellProblem:
        """[cell] 설정과 유동 종류로 셀 문제를 만듭니다."""
        cell = spec.cell
        kappa = spec.reaction.kappa
        service = self.homogenization_service
        if flow.kind is FlowKind.SHEAR_SINE:
            return service.shear_cell(float(flow.param("u0")), int(flow.param("n")), cell.Lx, cell.Ly,
                                      cell.nx, cell.ny, kappa)
        if flow.kind is FlowKind.TIMEDEP_SHEAR:
            if TimeLawKind(flow.param("law")) is not TimeLawKind.PULSATING:
                raise ConfigError("셀 문제는 pulsating 시간 법칙만 지원합니다")
            omega = float(flow.param("rate"))
            if not omega > 0:
                raise ConfigError(f"pulsating 셀 문제에는 양의 rate 가 필요합니다 (rate={omega})")
            return service.shear_cell(float(flow.param("u0")), int(flow.param("n")), cell.Lx, cell.Ly,
                                      cell.nx, cell.ny, kappa,
                                      modulation=lambda t: math.sin(2.0 * math.pi * omega * t), period=1.0 / omega)
        if flow.kind is FlowKind.PERPENDICULAR_SHEAR:
            return service.rotated_shear_cell(float(flow.param("w0")), int(flow.param("n")), cell.Lx, cell.Ly,
                                              cell.nx, cell.ny, kappa)
        if flow.kind is FlowKind.CELLULAR:
            return service.cellular_cell(int(flow.param("m")), float(flow.param("U")), float(flow.param("Lx")),
                                         float(flow.param("Ly")), cell.nx, cell.ny, kappa)
        raise ConfigError(f"'{flow.kind.value}' 유동은 셀 문제를 지원하지 않습니다")

    def run_homogenization(self, spec: ExperimentSpec) -> List[RunResult]:
        """진폭마다 kappa* 와 균질화 하한을 계산하고 텐서 리포트를 기록합니다."""
        if spec.cell is None:
            raise ConfigError("homogenize 프리셋에는 [cell] 섹션이 필요합니다")
        model = spec.reaction
        results = []
        for index, amplitude in enumerate(spec.amplitudes or (math.nan,)):
            flow = self._flow_for(spec, amplitude)
            label = f"homogenize_{index:02d}" if math.isnan(amplitude) else f"homogenize_{index:02d}_a{amplitude:g}"
            result = RunResult(plan=RunPlan(label=label, amplitude=amplitude, config=None))
            try:
                tensor = self.homogenization_service.compute(self.build_cell(spec, flow), v0=model.v0)
                report = self.bounds_service.homogenized_lower_bound(tensor, model)
                along_x = self.bounds_service.homogenized_lower_bound(tensor, model, direction=(1.0, 0.0))
                result.reports = [report, replace(along_x, name="homogenized_x")]
                result.checks["tensor"] = tensor.to_dict()
            except BurnfrontError as e:
                logger.error(f"[Service:Experiment] 셀 문제 실패 ({label}): {e}")
                result.error = str(e)
            except Exception as e:
                logger.exception(f"[Service:Experiment] 셀 문제 중 예기치 않은 오류 ({label}): {e}")
                result.error = f"{type(e).__name__}: {e}"
            results.append(result)
        self.sweep_report_service.write_bundle(spec, results)
        return results

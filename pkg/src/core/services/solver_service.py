"""잘린 띠 위에서 T_t + u.grad T = kappa Lap T + (v0^2/4 kappa) f(T) 를 적분합니다."""
import math
from functools import lru_cache
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu
from scipy.special import expit

from core.domain.errors import ConfigError, SchemeFailureError
from core.domain.models import (
    BoundaryCondition,
    BurningRateSeries,
    FlowField,
    Grid,
    ScalarField,
    SimulationConfig,
    SimulationState,
    WindowPolicy,
)
from core.logger import logger
from core.services.diagnostics_service import ACTIVE_THRESHOLD, DiagnosticsService
from core.services.field_service import FieldService
from core.services.flow_service import FlowService
from core.services.reaction_service import ReactionService

OVERSHOOT_TOLERANCE = 1e-10
ADVECTION_COURANT_LIMIT = 0.5
BURNED_COLUMN_FLOOR = 1.0 - 1e-3

SnapshotHook = Callable[[SimulationState], None]


def _mc_slope(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """monotonized central 제한 기울기."""
    same = left * right > 0.0
    bound = np.minimum(np.minimum(2.0 * np.abs(left), 2.0 * np.abs(right)), 0.5 * np.abs(left + right))
    return np.where(same, np.sign(left) * bound, 0.0)


def _upwind_face_flux(padded: np.ndarray, velocity: np.ndarray, axis: int) -> np.ndarray:
    """양쪽 고스트 2개가 붙은 배열에서 MUSCL 면 유속 u * T_face 를 계산합니다."""
    p = np.moveaxis(padded, axis, 0)
    u = np.moveaxis(velocity, axis, 0)
    jumps = np.diff(p, axis=0)
    slopes = _mc_slope(jumps[:-1], jumps[1:])
    left_state = p[1:-2] + 0.5 * slopes[:-1]
    right_state = p[2:-1] - 0.5 * slopes[1:]
    flux = np.maximum(u, 0.0) * left_state + np.minimum(u, 0.0) * right_state
    return np.moveaxis(flux, 0, axis)


@lru_cache(maxsize=32)
def _implicit_y_factor(ny: int, coefficient: float, periodic: bool):
    """(I - kappa dt D_yy) 의 LU 분해. coefficient = kappa dt / dy^2."""
    main = np.full(ny, 1.0 + 2.0 * coefficient)
    off = np.full(ny - 1, -coefficient)
    matrix = sparse.diags([off, main, off], [-1, 0, 1], format="lil")
    if periodic:
        matrix[0, ny - 1] = -coefficient
        matrix[ny - 1, 0] = -coefficient
    else:
        matrix[0, 0] = 1.0 + coefficient
        matrix[ny - 1, ny - 1] = 1.0 + coefficient
    return splu(matrix.tocsc())


class SolverService:
    """Lie 분할(이류 -> 확산 -> 반응)로 시간 적분하는 서비스.

    Attributes:
        field_service (FieldService): 고스트와 적분.
        flow_service (FlowService): 창 이동 시 유동 재샘플.
        reaction_service (ReactionService): 반응 항.
        diagnostics_service (DiagnosticsService): 스냅샷 진단.
    """

    def __init__(
        self,
        field_service: FieldService,
        flow_service: FlowService,
        reaction_service: ReactionService,
        diagnostics_service: DiagnosticsService,
    ):
        self.field_service = field_service
        self.flow_service = flow_service
        self.reaction_service = reaction_service
        self.diagnostics_service = diagnostics_service

    # ------------------------------------------------------------------
    # 초기 조건과 CFL
    # ------------------------------------------------------------------
    def initial_front(self, x0: float, lam: float, grid: Grid) -> ScalarField:
        """T0(x, y) = 1 / (1 + exp(lam (x - x0))), y 에 무관."""
        if not lam > 0:
            raise ConfigError(f"초기 전선 기울기 lambda 는 양수여야 합니다 (lambda={lam})")
        column = expit(-lam * (grid.x_centers - x0))
        values = np.broadcast_to(column[:, None], (grid.nx, grid.ny)).copy()
        return ScalarField(grid=grid, values=values)

    def check_cfl(self, config: SimulationConfig, flow: FlowField) -> None:
        """시간 간격 제한을 확인합니다.

        Raises:
            ConfigError: dt 가 이류, 확산, 반응 제한 중 하나를 넘을 때.
        """
        grid = flow.grid
        model = config.reaction
        h_min = min(grid.dx, grid.dy)
        dt = config.dt
        if not dt > 0 or config.t_final < 0:
            raise ConfigError(f"dt 는 양수, t_final 은 0 이상이어야 합니다 (dt={dt}, t_final={config.t_final})")
        speed = flow.speed_sup
        if speed > 0 and dt > 0.4 * h_min / speed:
            raise ConfigError(f"CFL 위반: dt={dt} > 0.4 min(dx,dy)/||u|| = {0.4 * h_min / speed:.6g}")
        diffusive = grid.dx if config.implicit_y else h_min
        if dt > 0.25 * diffusive ** 2 / model.kappa:
            raise ConfigError(f"확산 안정 조건 위반: dt={dt} > {0.25 * diffusive ** 2 / model.kappa:.6g}")
        if dt > 0.5 * model.tau_c:
            raise ConfigError(f"반응 시간 조건 위반: dt={dt} > 0.5 tau_c = {0.5 * model.tau_c:.6g}")

    def check_window(self, state: SimulationState, config: SimulationConfig, flow: FlowField) -> bool:
        """고정 창이 예상 전선 이동 거리 (||u1|| + v0) (t_final - t) 를 담는지 확인합니다.

        Returns:
            bool: 창이 충분하면 True. 부족하면 경고만 남기고 False.
        """
        if config.window_policy is not WindowPolicy.FIXED:
            return True
        grid = state.field.grid
        excursion = (flow.u1_sup + config.reaction.v0) * max(0.0, config.t_final - state.t)
        room = grid.x_max - self.diagnostics_service.front_position(state.field)
        if excursion <= room:
            return True
        logger.warning(
            f"[Service:Solver] 고정 창이 짧습니다 ({config.label}): 예상 이동 {excursion:.4g} > 남은 길이 {room:.4g}. "
            f"follow_front 창을 권장합니다"
        )
        return False

    def initial_state(self, config: SimulationConfig) -> SimulationState:
        grid = config.grid.build()
        return SimulationState(field=self.initial_front(config.x0, config.lam, grid), t=0.0)

    # ------------------------------------------------------------------
    # 한 스텝
    # ------------------------------------------------------------------
    def step(self, state: SimulationState, config: SimulationConfig,
             flow: Optional[FlowField] = None, dt: Optional[float] = None) -> SimulationState:
        """한 시간 스텝을 진행합니다 (창 이동 없음)."""
        if flow is None:
            flow = self.flow_service.build(config.flow, state.field.grid)
        dt = config.dt if dt is None else dt
        grid = state.field.grid
        T = state.field.interior.copy()

        u1, u2 = flow.faces_at(state.t)
        T = self._advect(T, u1, u2, grid, config, dt)
        T = self._diffuse(T, grid, config, dt)
        if config.reaction_enabled:
            T = T + dt * self.reaction_service.source(config.reaction, T)
        T = self._enforce_bounds(T, grid)

        return SimulationState(
            field=ScalarField(grid=grid, values=T, name=state.field.name),
            t=state.t + dt,
            step_count=state.step_count + 1,
            shifted_mass=state.shifted_mass,
            total_shift_cells=state.total_shift_cells,
        )

    def _advect(self, T: np.ndarray, u1: np.ndarray, u2: np.ndarray, grid: Grid,
                config: SimulationConfig, dt: float) -> np.ndarray:
        courant = dt * (np.max(np.abs(u1)) / grid.dx + np.max(np.abs(u2)) / grid.dy)
        if courant == 0.0:
            return T
        substeps = max(1, int(math.ceil(courant / ADVECTION_COURANT_LIMIT)))
        if substeps > 1:
            logger.debug(f"[Service:Solver] 이류 부분 스텝 {substeps}회 (Courant={courant:.3f})")
        h = dt / substeps
        for _ in range(substeps):
            stage = T + h * self._advection_rhs(T, u1, u2, grid, config)
            T = 0.5 * T + 0.5 * (stage + h * self._advection_rhs(stage, u1, u2, grid, config))
        return T

    def _advection_rhs(self, T: np.ndarray, u1: np.ndarray, u2: np.ndarray, grid: Grid,
                       config: SimulationConfig) -> np.ndarray:
        left, right = config.x_far_field
        ny = T.shape[1]
        padded_x = np.concatenate((np.full((2, ny), left), T, np.full((2, ny), right)), axis=0)
        flux_x = _upwind_face_flux(padded_x, u1, axis=0)
        padded_y = self.field_service.pad_y(T, grid.bc_y, 2)
        flux_y = _upwind_face_flux(padded_y, u2, axis=1)
        return -(flux_x[1:] - flux_x[:-1]) / grid.dx - (flux_y[:, 1:] - flux_y[:, :-1]) / grid.dy

    def _diffuse(self, T: np.ndarray, grid: Grid, config: SimulationConfig, dt: float) -> np.ndarray:
        kappa = config.reaction.kappa
        left, right = config.x_far_field
        ny = T.shape[1]
        padded_x = np.concatenate((np.full((1, ny), left), T, np.full((1, ny), right)), axis=0)
        lap_x = (padded_x[2:] - 2.0 * T + padded_x[:-2]) / grid.dx ** 2
        if not config.implicit_y:
            padded_y = self.field_service.pad_y(T, grid.bc_y, 1)
            lap_y = (padded_y[:, 2:] - 2.0 * T + padded_y[:, :-2]) / grid.dy ** 2
            return T + dt * kappa * (lap_x + lap_y)
        explicit = T + dt * kappa * lap_x
        factor = _implicit_y_factor(grid.ny, kappa * dt / grid.dy ** 2, grid.bc_y is BoundaryCondition.PERIODIC)
        return factor.solve(np.ascontiguousarray(explicit.T)).T

    def _enforce_bounds(self, T: np.ndarray, grid: Grid) -> np.ndarray:
        if not np.all(np.isfinite(T)):
            i, j = (int(k) for k in np.argwhere(~np.isfinite(T))[0])
            raise SchemeFailureError(f"[Service:Solver] NaN/Inf 발생 (cell=({i}, {j}))", location=(i, j))
        low, high = float(T.min()), float(T.max())
        if low < -OVERSHOOT_TOLERANCE or high > 1.0 + OVERSHOOT_TOLERANCE:
            flat = int(np.argmin(T)) if low < -OVERSHOOT_TOLERANCE else int(np.argmax(T))
            i, j = np.unravel_index(flat, T.shape)
            value = float(T[i, j])
            raise SchemeFailureError(
                f"[Service:Solver] 최대값 원리 위반 (cell=({i}, {j}), x={grid.x_centers[i]:.6g}, value={value:.3e})",
                location=(int(i), int(j)), value=value,
            )
        if low < 0.0 or high > 1.0:
            T = np.clip(T, 0.0, 1.0)
        return T

    # ------------------------------------------------------------------
    # 창 이동
    # ------------------------------------------------------------------
    def _follow_front(self, state: SimulationState, config: SimulationConfig) -> Tuple[SimulationState, int]:
        """오른쪽 활성 열이 창 끝에 가까워지면 창을 셀 단위로 옮깁니다."""
        field = state.field
        grid = field.grid
        T = field.interior
        active = np.nonzero(T.max(axis=1) > ACTIVE_THRESHOLD)[0]
        if active.size == 0:
            return state, 0
        rightmost = int(active[-1])
        margin = max(4, grid.nx // 8)
        if rightmost < grid.nx - margin:
            return state, 0
        shift = max(1, rightmost - (grid.nx - grid.nx // 4))
        dropped = self.field_service.column_integrals(field)[:shift]
        if float(T[:shift].min()) < BURNED_COLUMN_FLOOR:
            logger.warning(
                f"[Service:Solver] 타지 않은 열이 창 밖으로 밀려납니다 (min T={float(T[:shift].min()):.4f}); 창을 넓히세요"
            )
        shifted_mass = state.shifted_mass + float(np.sum(dropped)) * grid.dx
        right = config.x_far_field[1]
        values = np.concatenate((T[shift:], np.full((shift, grid.ny), right)), axis=0)
        new_grid = grid.shifted(shift)
        logger.debug(f"[Service:Solver] 창 이동 {shift}셀 (x_min={new_grid.x_min:.6g}, t={state.t:.6g})")
        moved = SimulationState(
            field=ScalarField(grid=new_grid, values=values, name=field.name),
            t=state.t,
            step_count=state.step_count,
            shifted_mass=shifted_mass,
            total_shift_cells=state.total_shift_cells + shift,
        )
        return moved, shift

    # ------------------------------------------------------------------
    # 실행
    # ------------------------------------------------------------------
    def run(
        self,
        config: SimulationConfig,
        initial_state: Optional[SimulationState] = None,
        on_step: Optional[SnapshotHook] = None,
    ) -> Tuple[BurningRateSeries, SimulationState]:
        """t_final 까지 적분하고 (시계열, 최종 상태) 를 돌려줍니다.

        Args:
            config (SimulationConfig): 실행 설정.
            initial_state (Optional[SimulationState]): 체크포인트에서 읽은 상태. 없으면 로지스틱 초기 전선.
            on_step (Optional[SnapshotHook]): 매 스텝 후 호출 (체크포인트 저장 등).

        Returns:
            Tuple[BurningRateSeries, SimulationState]: 진단 시계열과 최종 상태.
        """
        state = initial_state or self.initial_state(config)
        flow = self.flow_service.build(config.flow, state.field.grid)
        self.flow_service.check_flow(flow)
        self.check_cfl(config, flow)
        if config.snapshot_every < 1:
            raise ConfigError(f"snapshot_every 는 1 이상이어야 합니다 ({config.snapshot_every})")
        self.check_window(state, config, flow)

        logger.info(
            f"[Service:Solver] 실행 시작 ({config.label}, t={state.t:.6g} -> {config.t_final:.6g}, "
            f"dt={config.dt:.3g}, grid={state.field.grid.nx}x{state.field.grid.ny})"
        )
        series = BurningRateSeries()
        if initial_state is None:
            self.diagnostics_service.record(series, state, config.reaction)

        end_tolerance = 1e-12 * max(1.0, config.t_final)
        shifts = 0
        while state.t < config.t_final - end_tolerance:
            remaining = config.t_final - state.t
            dt = config.dt if remaining >= config.dt * (1.0 - 1e-9) else remaining
            state = self.step(state, config, flow=flow, dt=dt)
            if config.window_policy is WindowPolicy.FOLLOW_FRONT:
                state, shift = self._follow_front(state, config)
                if shift:
                    shifts += 1
                    if flow.x_dependent:
                        flow = self.flow_service.build(config.flow, state.field.grid)
            finished = state.t >= config.t_final - end_tolerance
            if state.step_count % config.snapshot_every == 0 or finished:
                self.diagnostics_service.record(series, state, config.reaction)
            if on_step is not None:
                on_step(state)

        series.finalize()
        logger.info(
            f"[Service:Solver] 실행 완료 ({config.label}, steps={state.step_count}, 창 이동 {shifts}회, "
            f"누적 {state.total_shift_cells}셀)"
        )
        return series, state

"""유동 생성기, 유선 함수, 퍼컬레이팅 유선관 추출."""
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import quad

from core.domain.errors import FlowError, TubeExtractionError
from core.domain.models import (
    BoundaryCondition,
    FlowField,
    FlowKind,
    FlowProvenance,
    FlowSpec,
    Grid,
    Partition,
    ScalarField,
    ShearProfile,
    StreamFunction,
    TimeLaw,
    TimeLawKind,
    Tube,
    TubeBand,
    TubeGeometry,
)
from core.logger import logger
from core.services.kernel import kernel_values

STAGNATION_FACTOR = 1e-6
SHEAR_SAMPLES = 1 << 14
# 꼭짓점 유선함수 차분의 반올림 오차는 격자 셀 수에 비례해 자람
DIVERGENCE_ROUNDOFF_FACTOR = 1e3


class FlowService:
    """전단, 셀, 퍼컬레이팅 유동 계열을 격자 위에 만드는 서비스.

    속도는 면 중심(u1: x 면, u2: y 면)에 두고, 유선 함수는 꼭짓점에 샘플합니다.
    """

    # ------------------------------------------------------------------
    # 전단 프로파일
    # ------------------------------------------------------------------
    def make_shear_sine(self, u0: float, n: int, H: float) -> ShearProfile:
        """u(y) = u0 sin(2 pi n y / H)."""
        if n is None or int(n) != n or n <= 0:
            raise FlowError(f"파수 n 은 양의 정수여야 합니다 (n={n})")
        if u0 < 0:
            raise FlowError(f"진폭 u0 는 음수일 수 없습니다 (u0={u0})")
        k = 2.0 * math.pi * int(n) / H
        return ShearProfile(
            velocity=lambda y: u0 * np.sin(k * y),
            H=H,
            label=f"sine(n={int(n)})",
            amplitude=u0,
            wavenumber=int(n),
        )

    def make_shear_profile(self, func: Callable[[np.ndarray], np.ndarray], H: float,
                           label: str = "shear") -> ShearProfile:
        """임의의 u(y) 에서 평균을 빼 평균 0 인 전단 프로파일을 만듭니다."""
        mean = quad(lambda y: float(func(np.asarray(y))), 0.0, H, limit=200)[0] / H
        if abs(mean) > 0:
            logger.debug(f"[Service:Flow] 전단 평균 {mean:.3e} 제거 ({label})")
        samples = np.linspace(0.0, H, 257)
        amplitude = float(np.max(np.abs(np.asarray(func(samples), dtype=float) - mean)))
        return ShearProfile(velocity=lambda y: np.asarray(func(y), dtype=float) - mean,
                            H=H, label=label, amplitude=amplitude)

    def _shear_samples(self, profile: ShearProfile) -> Tuple[np.ndarray, np.ndarray]:
        y = np.linspace(0.0, profile.H, SHEAR_SAMPLES * max(1, profile.wavenumber or 1) + 1)
        return y, profile(y)

    def sup_norm(self, profile: ShearProfile) -> float:
        if profile.wavenumber is not None:
            return abs(profile.amplitude)
        return float(np.max(np.abs(self._shear_samples(profile)[1])))

    def l1_norm(self, profile: ShearProfile) -> float:
        """||u||_1 = int |u| dy / H."""
        breaks = self._sign_breaks(profile)
        total = 0.0
        for a, b in zip(breaks, breaks[1:]):
            total += abs(quad(lambda y: float(profile(y)), a, b, limit=200)[0])
        return total / profile.H

    def derivative_sup_norm(self, profile: ShearProfile) -> float:
        if profile.wavenumber is not None:
            return abs(profile.amplitude) * 2.0 * math.pi * profile.wavenumber / profile.H
        y, u = self._shear_samples(profile)
        return float(np.max(np.abs(np.gradient(u, y))))

    def wrinkling_scale(self, profile: ShearProfile) -> float:
        """h_u = ||u||_1 / ||u'||_inf."""
        slope = self.derivative_sup_norm(profile)
        if slope == 0:
            raise FlowError("u' 가 0 이어서 h_u 를 정의할 수 없습니다")
        return self.l1_norm(profile) / slope

    def _sign_breaks(self, profile: ShearProfile) -> List[float]:
        y, u = self._shear_samples(profile)
        flips = np.nonzero(np.signbit(u[:-1]) != np.signbit(u[1:]))[0]
        return [0.0] + [0.5 * (y[i] + y[i + 1]) for i in flips] + [profile.H]

    # ------------------------------------------------------------------
    # 격자 위 유동장
    # ------------------------------------------------------------------
    def shear_flow_field(self, profile: ShearProfile, grid: Grid) -> FlowField:
        """(u(y), 0) 를 x 면에 샘플합니다. 이산 단면 평균은 0 으로 맞춥니다."""
        row = profile(grid.y_centers)
        row = row - row.mean()
        u1 = np.broadcast_to(row, (grid.nx + 1, grid.ny)).copy()
        u2 = np.zeros((grid.nx, grid.ny + 1))
        return FlowField(grid=grid, u1_faces=u1, u2_faces=u2, provenance=FlowProvenance.SHEAR_PROFILE,
                         label=profile.label, grad_sup=self.derivative_sup_norm(profile))

    def make_timedep_shear(self, kind: TimeLawKind, u0: float, n: int, H: float, rate: float,
                           grid: Grid) -> FlowField:
        """pulsating / translating 전단 유동."""
        if rate < 0:
            raise FlowError(f"rate 는 음수일 수 없습니다 (rate={rate})")
        if int(n) != n or n <= 0:
            raise FlowError(f"파수 n 은 양의 정수여야 합니다 (n={n})")
        if abs(grid.H - H) > 1e-12 * H:
            raise FlowError(f"유동 높이 H={H} 가 격자 높이 {grid.H} 와 다릅니다")
        law = TimeLaw(kind=kind, u0=u0, n=int(n), H=H, rate=rate)
        flow = FlowField(grid=grid, u1_faces=np.zeros((grid.nx + 1, grid.ny)),
                         u2_faces=np.zeros((grid.nx, grid.ny + 1)),
                         provenance=FlowProvenance.SHEAR_PROFILE, time_law=law,
                         label=f"{kind.value}(n={int(n)}, rate={rate})",
                         grad_sup=u0 * 2.0 * math.pi * n / H)
        return flow

    def make_perpendicular_shear(self, w0: float, n: int, wavelength: float, grid: Grid) -> FlowField:
        """u = (0, w0 sin(2 pi n x / wavelength)). y 주기 경계가 필요합니다."""
        if grid.bc_y is not BoundaryCondition.PERIODIC:
            raise FlowError("수직 전단 유동은 y 주기 경계에서만 정의됩니다")
        column = w0 * np.sin(2.0 * math.pi * n * grid.x_centers / wavelength)
        u2 = np.broadcast_to(column[:, None], (grid.nx, grid.ny + 1)).copy()
        u1 = np.zeros((grid.nx + 1, grid.ny))
        return FlowField(grid=grid, u1_faces=u1, u2_faces=u2, provenance=FlowProvenance.EXPLICIT,
                         x_dependent=True, label=f"perpendicular(n={n})",
                         grad_sup=abs(w0) * 2.0 * math.pi * n / wavelength)

    def make_explicit(self, u1_func: Callable, u2_func: Callable, grid: Grid, label: str = "explicit") -> FlowField:
        """u1(x, y), u2(x, y) 를 각 면 중심에서 샘플합니다."""
        xf, yc = np.meshgrid(grid.x_faces, grid.y_centers, indexing="ij")
        xc, yf = np.meshgrid(grid.x_centers, grid.y_faces, indexing="ij")
        u1 = np.asarray(u1_func(xf, yc), dtype=float) * np.ones_like(xf)
        u2 = np.asarray(u2_func(xc, yf), dtype=float) * np.ones_like(xc)
        return FlowField(grid=grid, u1_faces=u1, u2_faces=u2, provenance=FlowProvenance.EXPLICIT,
                         x_dependent=True, label=label)

    # ------------------------------------------------------------------
    # 유선 함수
    # ------------------------------------------------------------------
    @staticmethod
    def cellular_psi(x, y, m: int, Lx: float, Ly: float):
        """Psi_m = cos^m(pi x / Lx) cos^m(pi y / Ly). 셀 경계는 x = +-Lx/2, y = +-Ly/2."""
        return np.cos(np.pi * np.asarray(x) / Lx) ** m * np.cos(np.pi * np.asarray(y) / Ly) ** m

    @staticmethod
    def cellular_velocity(x, y, m: int, U: float, Lx: float, Ly: float) -> Tuple[np.ndarray, np.ndarray]:
        """u = U Ly (dPsi/dy, -dPsi/dx) 의 닫힌 형태 (셀 좌표)."""
        cx = np.cos(np.pi * np.asarray(x, dtype=float) / Lx)
        sx = np.sin(np.pi * np.asarray(x, dtype=float) / Lx)
        cy = np.cos(np.pi * np.asarray(y, dtype=float) / Ly)
        sy = np.sin(np.pi * np.asarray(y, dtype=float) / Ly)
        u1 = -U * m * np.pi * cx ** m * cy ** (m - 1) * sy
        u2 = U * Ly * m * (np.pi / Lx) * cy ** m * cx ** (m - 1) * sx
        return u1, u2

    def make_cellular(self, m: int, U: float, Lx: float, Ly: float, grid: Grid) -> StreamFunction:
        """격자 꼭짓점에서 Psi_m 을 샘플합니다.

        띠 좌표 y 는 셀 좌표 y - Ly/2 로 옮기므로 y = 0, Ly, 2Ly ... 가 셀 경계입니다.
        """
        if int(m) != m or m < 1:
            raise FlowError(f"m 은 1 이상의 정수여야 합니다 (m={m})")
        ratio = grid.H / Ly
        if grid.bc_y is BoundaryCondition.NEUMANN and abs(ratio - round(ratio)) > 1e-9:
            raise FlowError(f"Neumann 벽에서는 H/Ly 가 정수여야 합니다 (H={grid.H}, Ly={Ly})")
        X, Y = np.meshgrid(grid.x_faces, grid.y_faces, indexing="ij")
        psi = self.cellular_psi(X, Y - 0.5 * Ly, int(m), Lx, Ly)
        if grid.bc_y is BoundaryCondition.NEUMANN:
            psi[:, 0] = 0.0
            psi[:, -1] = 0.0
        return StreamFunction(grid=grid, psi=psi, amplitude=U, length_scale=Ly, label=f"cellular(m={int(m)})")

    def make_percolating_wavy(self, U: float, a: float, Lx: float, grid: Grid) -> StreamFunction:
        """Psi = -(1/2pi) cos(2 pi (y - a sin(2 pi x / Lx)) / H), 길이 척도 H.

        유선이 창 전체를 가로지르며 y 방향 주기입니다.
        """
        if grid.bc_y is not BoundaryCondition.PERIODIC:
            raise FlowError("wavy 퍼컬레이팅 유동은 y 주기 경계가 필요합니다")
        H = grid.H
        X, Y = np.meshgrid(grid.x_faces, grid.y_faces, indexing="ij")
        phase = 2.0 * math.pi * (Y - a * np.sin(2.0 * math.pi * X / Lx)) / H
        psi = -np.cos(phase) / (2.0 * math.pi)
        return StreamFunction(grid=grid, psi=psi, amplitude=U, length_scale=H, label=f"wavy(a={a})")

    def shear_stream_function(self, profile: ShearProfile, grid: Grid) -> StreamFunction:
        """Psi(y) = int_0^y u, u1 = dPsi/dy 부호 규약."""
        values = [0.0]
        for a, b in zip(grid.y_faces[:-1], grid.y_faces[1:]):
            values.append(values[-1] + quad(lambda y: float(profile(y)), a, b)[0])
        psi = np.broadcast_to(np.asarray(values), (grid.nx + 1, grid.ny + 1)).copy()
        return StreamFunction(grid=grid, psi=psi, amplitude=1.0, length_scale=1.0, label=profile.label)

    def flow_from_stream_function(self, sf: StreamFunction) -> FlowField:
        """엇갈린 격자 차분으로 속도를 만듭니다. 이산 발산은 정확히 0 입니다."""
        grid = sf.grid
        psi = sf.physical
        u1 = (psi[:, 1:] - psi[:, :-1]) / grid.dy
        u2 = -(psi[1:, :] - psi[:-1, :]) / grid.dx
        if grid.bc_y is BoundaryCondition.NEUMANN:
            u2[:, 0] = 0.0
            u2[:, -1] = 0.0
        gx = np.abs(np.diff(u1, axis=0)).max() / grid.dx if grid.nx > 1 else 0.0
        gy = np.abs(np.diff(u1, axis=1)).max() / grid.dy if grid.ny > 1 else 0.0
        return FlowField(grid=grid, u1_faces=u1, u2_faces=u2, provenance=FlowProvenance.STREAM_FUNCTION,
                         x_dependent=True, label=sf.label, grad_sup=float(max(gx, gy)))

    # ------------------------------------------------------------------
    # 사양 -> 유동장
    # ------------------------------------------------------------------
    def build(self, spec: FlowSpec, grid: Grid) -> FlowField:
        """FlowSpec 을 격자 위 FlowField 로 만듭니다."""
        kind = spec.kind
        if kind is FlowKind.NONE:
            return FlowField(grid=grid, u1_faces=np.zeros((grid.nx + 1, grid.ny)),
                             u2_faces=np.zeros((grid.nx, grid.ny + 1)),
                             provenance=FlowProvenance.EXPLICIT, label="none")
        if kind is FlowKind.SHEAR_SINE:
            profile = self.make_shear_sine(float(spec.param("u0")), int(spec.param("n")), grid.H)
            return self.shear_flow_field(profile, grid)
        if kind is FlowKind.TIMEDEP_SHEAR:
            law = TimeLawKind(spec.param("law"))
            return self.make_timedep_shear(law, float(spec.param("u0")), int(spec.param("n")), grid.H,
                                           float(spec.param("rate")), grid)
        if kind is FlowKind.PERPENDICULAR_SHEAR:
            return self.make_perpendicular_shear(float(spec.param("w0")), int(spec.param("n")),
                                                 float(spec.param("wavelength")), grid)
        if kind is FlowKind.CELLULAR:
            sf = self.make_cellular(int(spec.param("m")), float(spec.param("U")),
                                    float(spec.param("Lx")), float(spec.param("Ly")), grid)
            return self.flow_from_stream_function(sf)
        if kind is FlowKind.PERCOLATING_WAVY:
            sf = self.make_percolating_wavy(float(spec.param("U")), float(spec.param("a")),
                                            float(spec.param("Lx")), grid)
            return self.flow_from_stream_function(sf)
        raise FlowError(f"지원하지 않는 유동 종류입니다: {kind}")

    def stream_function_for(self, spec: FlowSpec, grid: Grid) -> StreamFunction:
        if spec.kind is FlowKind.CELLULAR:
            return self.make_cellular(int(spec.param("m")), float(spec.param("U")),
                                      float(spec.param("Lx")), float(spec.param("Ly")), grid)
        if spec.kind is FlowKind.PERCOLATING_WAVY:
            return self.make_percolating_wavy(float(spec.param("U")), float(spec.param("a")),
                                              float(spec.param("Lx")), grid)
        if spec.kind is FlowKind.SHEAR_SINE:
            profile = self.make_shear_sine(float(spec.param("u0")), int(spec.param("n")), grid.H)
            return self.shear_stream_function(profile, grid)
        raise FlowError(f"'{spec.kind.value}' 유동에는 유선 함수가 없습니다")

    # ------------------------------------------------------------------
    # 진단
    # ------------------------------------------------------------------
    def divergence(self, flow: FlowField, t: float = 0.0) -> ScalarField:
        """셀 중심 이산 발산."""
        u1, u2 = flow.faces_at(t)
        grid = flow.grid
        div = (u1[1:, :] - u1[:-1, :]) / grid.dx + (u2[:, 1:] - u2[:, :-1]) / grid.dy
        return ScalarField(grid=grid, values=div, name="div_u")

    def check_flow(self, flow: FlowField, tolerance: float = 1e-12) -> None:
        """발산과 (전단이면) 단면 평균을 검사합니다.

        발산은 max|u| / min(dx, dy) 에 대한 상대값이 tolerance * DIVERGENCE_ROUNDOFF_FACTOR 이하여야 합니다.
        """
        grid = flow.grid
        scale = max(flow.speed_sup, 1e-300) / min(grid.dx, grid.dy)
        div = float(np.max(np.abs(self.divergence(flow).values)))
        if div > tolerance * scale * DIVERGENCE_ROUNDOFF_FACTOR:
            raise FlowError(f"[Service:Flow] 이산 발산이 허용치를 넘습니다 (max|div|={div:.3e})")
        if flow.provenance is FlowProvenance.SHEAR_PROFILE and flow.time_law is None:
            mean = float(np.max(np.abs(flow.u1_faces.mean(axis=1))))
            if mean > tolerance * max(flow.u1_sup, 1.0):
                raise FlowError(f"[Service:Flow] 전단 단면 평균이 0 이 아닙니다 ({mean:.3e})")

    def to_frame(self, flow: FlowField, t: float = 0.0) -> pd.DataFrame:
        """유동 덤프 표 (x, y, u1, u2), 셀 중심 값."""
        snapshot = flow.at_time(t)
        grid = flow.grid
        X, Y = np.meshgrid(grid.x_centers, grid.y_centers, indexing="xy")
        return pd.DataFrame({
            "x": X.ravel(),
            "y": Y.ravel(),
            "u1": snapshot.u1.T.ravel(),
            "u2": snapshot.u2.T.ravel(),
        })

    # ------------------------------------------------------------------
    # 유선관
    # ------------------------------------------------------------------
    def extract_tubes(
        self,
        sf: StreamFunction,
        bands: Sequence[TubeBand],
        l: float,
        period: Optional[float] = None,
        m0: Optional[float] = None,
    ) -> TubeGeometry:
        """Psi 밴드마다 창 전체를 가로지르는 유선관을 추출합니다.

        Args:
            sf (StreamFunction): 유선 함수.
            bands (Sequence[TubeBand]): 물리 Psi 밴드 목록.
            l (float): 층류 화염 두께 (mu+- 계산용).
            period (Optional[float]): x 주기 L. None 이면 m0 를 직접 줘야 합니다.
            m0 (Optional[float]): 주기가 없는 유동의 m0.

        Returns:
            TubeGeometry: 유선관 집합.

        Raises:
            TubeExtractionError: 정체점, 닫힌 유선, 모호한 밴드.
        """
        grid = sf.grid
        psi = sf.physical
        gx, gy = np.gradient(psi, grid.dx, grid.dy, edge_order=1)
        grad = np.hypot(gx, gy)
        threshold = STAGNATION_FACTOR * abs(sf.amplitude) * sf.length_scale

        tubes: List[Tube] = []
        mu = {1: 0.0, -1: 0.0}
        metric = 1.0
        spread = 0.0
        for band in bands:
            lo, hi = sorted((band.lo, band.hi))
            mask = self._band_mask(psi, lo, hi, band, grid)
            if grad[mask].size == 0:
                raise TubeExtractionError(f"밴드 [{lo}, {hi}] 에 해당하는 셀이 없습니다")
            weak = mask & (grad < threshold)
            if weak.any():
                i, j = (int(k) for k in np.argwhere(weak)[0])
                raise TubeExtractionError(
                    f"밴드 [{lo}, {hi}] 에 정체점이 있습니다 (x={grid.x_faces[i]:.6g}, y={grid.y_faces[j]:.6g})"
                )
            mean_grad = float(np.mean(grad[mask]))
            metric = max(metric, mean_grad / float(np.min(grad[mask])), float(np.max(grad[mask])) / mean_grad)
            sign = 1 if float(np.mean(gy[mask])) > 0 else -1
            half_width = (hi - lo) / (2.0 * mean_grad)
            lower, upper = self._band_edges(psi, mask, lo, hi, grid)
            center = float(np.mean(0.5 * (lower + upper)))
            station = self._station_fluxes(sf, lower, upper)
            flux = hi - lo
            spread = max(spread, float(np.max(np.abs(np.abs(station) - flux))) / flux)

            tubes.append(Tube(sign=sign, half_width=half_width, center=center,
                              flux=flux, middle_half_flux=0.5 * flux))
            if period is not None:
                rho = (psi - 0.5 * (lo + hi)) / mean_grad
                within = mask & (grid.x_faces[:, None] < grid.x_min + period)
                weights = kernel_values(half_width, rho[within]) / (grid.H * (half_width ** 2 + l ** 2))
                mu[sign] += float(np.sum(weights)) * grid.dx * grid.dy

        if spread > 1e-8:
            logger.warning(f"[Service:Flow] 측정 위치별 유량 편차가 큽니다 (spread={spread:.3e})")
        if period is not None and m0 is None:
            if mu[-1] > 0:
                m0 = mu[1] / mu[-1]
            else:
                m0 = math.inf
                logger.warning("[Service:Flow] 역방향 유선관이 없어 m0 = inf 로 둡니다")
        logger.info(f"[Service:Flow] 유선관 {len(tubes)}개 추출 완료 (m0={m0}, 계량 상한={metric:.3f})")
        return TubeGeometry(tubes=tuple(tubes), m0=m0, period=period if period is not None else math.nan,
                            H=grid.H, metric_bound=metric, flux_station_spread=spread)

    def _band_mask(self, psi: np.ndarray, lo: float, hi: float, band: TubeBand, grid: Grid) -> np.ndarray:
        inside = (psi >= lo) & (psi <= hi)
        mask = np.zeros_like(inside)
        for i in range(psi.shape[0]):
            runs = self._runs(inside[i])
            if not runs:
                raise TubeExtractionError(
                    f"밴드 [{lo}, {hi}] 의 유선이 창을 가로지르지 않습니다 (x={grid.x_faces[i]:.6g}, 닫힌 유선)"
                )
            if len(runs) > 1:
                if band.y_seed is None:
                    raise TubeExtractionError(
                        f"밴드 [{lo}, {hi}] 가 x={grid.x_faces[i]:.6g} 에서 여러 관으로 나뉩니다 (y_seed 필요)"
                    )
                y = grid.y_faces
                runs.sort(key=lambda r: min(abs(y[r[0]] - band.y_seed), abs(y[r[1]] - band.y_seed))
                          if not (y[r[0]] <= band.y_seed <= y[r[1]]) else -1.0)
            start, stop = runs[0]
            mask[i, start:stop + 1] = True
        return mask

    @staticmethod
    def _runs(flags: np.ndarray) -> List[Tuple[int, int]]:
        runs = []
        start = None
        for j, flag in enumerate(flags):
            if flag and start is None:
                start = j
            elif not flag and start is not None:
                runs.append((start, j - 1))
                start = None
        if start is not None:
            runs.append((start, len(flags) - 1))
        return runs

    @staticmethod
    def _band_edges(psi: np.ndarray, mask: np.ndarray, lo: float, hi: float,
                    grid: Grid) -> Tuple[np.ndarray, np.ndarray]:
        """열마다 Psi = lo / hi 교차 위치를 선형 보간으로 구합니다."""
        y = grid.y_faces
        lower = np.empty(psi.shape[0])
        upper = np.empty(psi.shape[0])
        for i in range(psi.shape[0]):
            rows = np.nonzero(mask[i])[0]
            a, b = int(rows[0]), int(rows[-1])
            lower[i] = _crossing(psi[i], y, a - 1, a, lo, hi) if a > 0 else y[0]
            upper[i] = _crossing(psi[i], y, b, b + 1, lo, hi) if b < len(y) - 1 else y[-1]
        return lower, upper

    @staticmethod
    def _station_fluxes(sf: StreamFunction, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
        """x 면마다 조각별 상수 u1 을 [lower, upper] 에서 적분합니다."""
        grid = sf.grid
        psi = sf.physical
        u1 = (psi[:, 1:] - psi[:, :-1]) / grid.dy
        y_lo = grid.y_faces[:-1]
        y_hi = grid.y_faces[1:]
        overlap = np.clip(np.minimum(y_hi[None, :], upper[:, None]) - np.maximum(y_lo[None, :], lower[:, None]),
                          0.0, None)
        return np.sum(u1 * overlap, axis=1)

    def tubes_from_partition(self, profile: ShearProfile, partition: Partition) -> TubeGeometry:
        """전단 분할을 rho = y 인 유선관 집합으로 표현합니다 (계량 상수 1)."""
        tubes = []
        for iv in partition.intervals:
            full = abs(quad(lambda y: float(profile(y)), iv.lower, iv.upper)[0])
            a, b = iv.middle_half
            mid = abs(quad(lambda y: float(profile(y)), a, b)[0])
            tubes.append(Tube(sign=iv.sign, half_width=iv.half_width, center=iv.center,
                              flux=full, middle_half_flux=mid))
        return TubeGeometry(tubes=tuple(tubes), m0=partition.m0, period=math.nan, H=partition.H)


def _crossing(column: np.ndarray, y: np.ndarray, outside: int, inside: int, lo: float, hi: float) -> float:
    a, b = column[outside], column[inside]
    level = lo if a < lo else hi
    if a == b:
        return float(y[inside])
    s = (level - a) / (b - a)
    return float(y[outside] + s * (y[inside] - y[outside]))

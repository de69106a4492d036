"""주기 셀 문제와 유효 확산 텐서 kappa*.

u . grad theta_i - kappa Lap theta_i = -u_i 를 주기 셀에서 풀고
kappa*_ij = kappa delta_ij - <u_i theta_j> 를 계산합니다.
"""
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu, spsolve

from core.domain.errors import HomogenizationError
from core.domain.models import CellProblem, CellSolution, EffectiveTensor
from core.logger import logger
from core.services.flow_service import FlowService

RESIDUAL_FACTOR = 1e-8
PSD_TOLERANCE = 1e-10
STEPS_PER_PERIOD = 64
MAX_PERIODS = 500


class HomogenizationService:
    """셀 문제 풀이와 kappa* 계산 서비스."""

    def __init__(self, flow_service: Optional[FlowService] = None, max_workers: int = 2):
        self.flow_service = flow_service or FlowService()
        self.max_workers = max_workers

    # ------------------------------------------------------------------
    # 셀 구성
    # ------------------------------------------------------------------
    def shear_cell(self, u0: float, n: int, Lx: float, Ly: float, nx: int, ny: int, kappa: float,
                   modulation: Optional[Callable[[float], float]] = None,
                   period: Optional[float] = None) -> CellProblem:
        """u = (u0 sin(2 pi n y / Ly), 0)."""
        y = (np.arange(ny) + 0.5) * Ly / ny
        row = u0 * np.sin(2.0 * math.pi * n * y / Ly)
        u1 = np.broadcast_to(row, (nx, ny)).copy()
        return CellProblem(Lx=Lx, Ly=Ly, nx=nx, ny=ny, kappa=kappa, u1_faces=u1, u2_faces=np.zeros((nx, ny)),
                           period=period, modulation=modulation, label=f"shear(u0={u0}, n={n})")

    def rotated_shear_cell(self, u0: float, n: int, Lx: float, Ly: float, nx: int, ny: int,
                           kappa: float) -> CellProblem:
        """u = (0, u0 sin(2 pi n x / Lx))."""
        x = (np.arange(nx) + 0.5) * Lx / nx
        column = u0 * np.sin(2.0 * math.pi * n * x / Lx)
        u2 = np.broadcast_to(column[:, None], (nx, ny)).copy()
        return CellProblem(Lx=Lx, Ly=Ly, nx=nx, ny=ny, kappa=kappa, u1_faces=np.zeros((nx, ny)), u2_faces=u2,
                           label=f"rotated_shear(u0={u0}, n={n})")

    def cellular_cell(self, m: int, U: float, Lx: float, Ly: float, nx: int, ny: int,
                      kappa: float) -> CellProblem:
        """Psi = U Ly Psi_m 의 주기 셀 [0, 2Lx] x [0, 2Ly] (m 이 홀수여도 주기)."""
        cx, cy = 2.0 * Lx, 2.0 * Ly
        xs = np.arange(nx + 1) * cx / nx
        ys = np.arange(ny + 1) * cy / ny
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        psi = U * Ly * self.flow_service.cellular_psi(X, Y, int(m), Lx, Ly)
        dx, dy = cx / nx, cy / ny
        u1 = (psi[:-1, 1:] - psi[:-1, :-1]) / dy
        u2 = -(psi[1:, :-1] - psi[:-1, :-1]) / dx
        return CellProblem(Lx=cx, Ly=cy, nx=nx, ny=ny, kappa=kappa, u1_faces=u1, u2_faces=u2,
                           label=f"cellular(m={int(m)}, U={U})")

    # ------------------------------------------------------------------
    # 이산 연산자
    # ------------------------------------------------------------------
    @staticmethod
    def _operators(cp: CellProblem) -> Tuple[sparse.csr_matrix, sparse.csr_matrix]:
        """(이류 C, 확산 D). 전체 연산자는 a(t) C + D."""
        nx, ny = cp.nx, cp.ny
        dx, dy = cp.dx, cp.dy
        idx = np.arange(nx * ny).reshape(nx, ny)
        east = np.roll(idx, -1, axis=0)
        west = np.roll(idx, 1, axis=0)
        north = np.roll(idx, -1, axis=1)
        south = np.roll(idx, 1, axis=1)
        u1l = cp.u1_faces
        u1r = np.roll(u1l, -1, axis=0)
        u2b = cp.u2_faces
        u2t = np.roll(u2b, -1, axis=1)

        rows = np.concatenate([idx.ravel()] * 5)
        cols = np.concatenate([idx.ravel(), east.ravel(), west.ravel(), north.ravel(), south.ravel()])
        advect = np.concatenate([
            ((u1r - u1l) / (2.0 * dx) + (u2t - u2b) / (2.0 * dy)).ravel(),
            (u1r / (2.0 * dx)).ravel(),
            (-u1l / (2.0 * dx)).ravel(),
            (u2t / (2.0 * dy)).ravel(),
            (-u2b / (2.0 * dy)).ravel(),
        ])
        k = cp.kappa
        size = nx * ny
        diffuse = np.concatenate([
            np.full(size, 2.0 * k / dx ** 2 + 2.0 * k / dy ** 2),
            np.full(size, -k / dx ** 2),
            np.full(size, -k / dx ** 2),
            np.full(size, -k / dy ** 2),
            np.full(size, -k / dy ** 2),
        ])
        shape = (size, size)
        C = sparse.coo_matrix((advect, (rows, cols)), shape=shape).tocsr()
        D = sparse.coo_matrix((diffuse, (rows, cols)), shape=shape).tocsr()
        return C, D

    @staticmethod
    def cell_velocity(cp: CellProblem) -> Tuple[np.ndarray, np.ndarray]:
        """면 평균으로 만든 셀 중심 속도."""
        u1 = 0.5 * (cp.u1_faces + np.roll(cp.u1_faces, -1, axis=0))
        u2 = 0.5 * (cp.u2_faces + np.roll(cp.u2_faces, -1, axis=1))
        return u1, u2

    # ------------------------------------------------------------------
    # 풀이
    # ------------------------------------------------------------------
    def solve_cell_problem(self, cp: CellProblem) -> CellSolution:
        """theta_1, theta_2 를 병렬로 풉니다.

        Raises:
            HomogenizationError: 잔차가 허용치를 넘거나 주기 해가 수렴하지 않을 때.
        """
        logger.info(f"[Service:Homogenization] 셀 문제 풀이 시작 ({cp.label}, {cp.nx}x{cp.ny})")
        C, D = self._operators(cp)
        velocity = self.cell_velocity(cp)
        solver = self._solve_periodic if cp.is_time_periodic else self._solve_steady

        results: Dict[int, Tuple[np.ndarray, float, Optional[np.ndarray], Optional[np.ndarray]]] = {}
        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            future_to_component = {
                executor.submit(solver, cp, C, D, velocity[i]): i
                for i in range(2)
            }
            for future in as_completed(future_to_component):
                component = future_to_component[future]
                results[component] = future.result()

        (theta1, res1, hist1, times), (theta2, res2, hist2, _) = results[0], results[1]
        logger.info(f"[Service:Homogenization] 셀 문제 풀이 완료 (잔차 {res1:.2e}, {res2:.2e})")
        return CellSolution(theta1=theta1, theta2=theta2, residuals=[res1, res2],
                            history1=hist1, history2=hist2, times=times)

    def _solve_steady(self, cp: CellProblem, C, D, source: np.ndarray):
        size = cp.nx * cp.ny
        A = (C + D).tocsr()
        border = sparse.csr_matrix(np.full((1, size), 1.0 / size))
        system = sparse.bmat([[A, border.T], [border, None]], format="csc")
        rhs = np.concatenate((-source.ravel(), [0.0]))
        solution = spsolve(system, rhs)
        theta = solution[:size]
        residual = float(np.max(np.abs(A @ theta + source.ravel()))) if size else 0.0
        scale = float(np.max(np.abs(source))) if source.size else 0.0
        if residual > RESIDUAL_FACTOR * scale:
            raise HomogenizationError(
                f"[Service:Homogenization] 셀 문제 잔차 초과 ({residual:.3e} > {RESIDUAL_FACTOR:.0e}*{scale:.3e})",
                residuals=[residual],
            )
        return theta.reshape(cp.nx, cp.ny), residual, None, None

    def _solve_periodic(self, cp: CellProblem, C, D, source: np.ndarray):
        """역방향 오일러로 주기 해에 도달할 때까지 주기를 반복합니다."""
        if cp.period is None or not cp.period > 0:
            raise HomogenizationError("시간 주기 셀 문제에는 양의 period 가 필요합니다", residuals=[])
        size = cp.nx * cp.ny
        dt = cp.period / STEPS_PER_PERIOD
        times = dt * np.arange(1, STEPS_PER_PERIOD + 1)
        amplitudes = np.array([cp.modulation(t) for t in times])
        identity = sparse.identity(size, format="csr") / dt
        factors = [splu((identity + a * C + D).tocsc()) for a in amplitudes]

        theta = np.zeros(size)
        rhs_source = source.ravel()
        history: List[float] = []
        for period_index in range(MAX_PERIODS):
            start = theta.copy()
            snapshots = np.empty((STEPS_PER_PERIOD, cp.nx, cp.ny))
            for step, (a, factor) in enumerate(zip(amplitudes, factors)):
                theta = factor.solve(theta / dt - a * rhs_source)
                theta -= theta.mean()
                snapshots[step] = theta.reshape(cp.nx, cp.ny)
            mismatch = float(np.max(np.abs(theta - start)))
            history.append(mismatch)
            scale = max(float(np.max(np.abs(theta))), np.finfo(float).tiny)
            if mismatch <= RESIDUAL_FACTOR * scale or not np.any(rhs_source):
                logger.debug(f"[Service:Homogenization] 주기 해 수렴 ({period_index + 1} 주기, 차이 {mismatch:.2e})")
                return snapshots[-1], mismatch, snapshots, times
        raise HomogenizationError(
            f"[Service:Homogenization] {MAX_PERIODS} 주기 안에 주기 해가 수렴하지 않았습니다 (마지막 차이 {history[-1]:.3e})",
            residuals=history,
        )

    # ------------------------------------------------------------------
    # 유효 확산
    # ------------------------------------------------------------------
    def effective_diffusivity(self, cp: CellProblem, solution: CellSolution,
                              v0: Optional[float] = None) -> EffectiveTensor:
        """kappa*_ij = kappa delta_ij - <u_i theta_j> (시간 주기면 시공간 평균).

        Raises:
            HomogenizationError: 대칭부 증가분이 음의 고유값을 가질 때.
        """
        u = self.cell_velocity(cp)
        if cp.is_time_periodic and solution.history1 is not None:
            a = np.array([cp.modulation(t) for t in solution.times])
            thetas = (solution.history1, solution.history2)
            correlation = np.array([
                [float(np.mean(a[:, None, None] * u[i][None] * thetas[j])) for j in range(2)]
                for i in range(2)
            ])
        else:
            thetas = (solution.theta1, solution.theta2)
            correlation = np.array([[float(np.mean(u[i] * thetas[j])) for j in range(2)] for i in range(2)])
        tensor = cp.kappa * np.eye(2) - correlation

        enhancement = 0.5 * (tensor + tensor.T) - cp.kappa * np.eye(2)
        eigen = np.linalg.eigvalsh(enhancement)
        if eigen.min() < -PSD_TOLERANCE * cp.kappa:
            raise HomogenizationError(
                f"[Service:Homogenization] kappa* - kappa I 가 양반정치가 아닙니다 (고유값 {eigen.min():.3e})",
                residuals=list(solution.residuals),
            )
        kstar = float(np.linalg.eigvalsh(0.5 * (tensor + tensor.T)).min())
        v0_star = None if v0 is None else v0 * math.sqrt(kstar / cp.kappa)
        logger.info(
            f"[Service:Homogenization] kappa* = [[{tensor[0, 0]:.6g}, {tensor[0, 1]:.3g}], "
            f"[{tensor[1, 0]:.3g}, {tensor[1, 1]:.6g}]], k*={kstar:.6g}"
        )
        return EffectiveTensor(tensor=tensor, kappa=cp.kappa, kstar=kstar,
                               residuals=list(solution.residuals), v0_star=v0_star)

    def compute(self, cp: CellProblem, v0: Optional[float] = None) -> EffectiveTensor:
        return self.effective_diffusivity(cp, self.solve_cell_problem(cp), v0=v0)

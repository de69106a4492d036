"""스칼라장 적분, 기울기 적분, y 경계 고스트 처리."""
from typing import Optional

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from core.domain.errors import FieldError
from core.domain.models import BoundaryCondition, Grid, ScalarField


class FieldService:
    """띠 영역의 스칼라장 연산 서비스.

    모든 적분은 H 로 나눈 값(단위 높이당)을 돌려줍니다.
    """

    GHOST_ROWS = 2

    def check_finite(self, field: ScalarField) -> None:
        """유한하지 않은 값이 있으면 첫 셀 위치와 함께 FieldError 를 발생시킵니다."""
        values = field.interior
        bad = ~np.isfinite(values)
        if bad.any():
            i, j = (int(k) for k in np.argwhere(bad)[0])
            raise FieldError(
                f"[Service:Field] 유한하지 않은 값 발견 (cell=({i}, {j}), value={values[i, j]})",
                location=(i, j),
            )

    def integrate_scalar(self, field: ScalarField) -> float:
        """int int f dx dy / H.

        x 는 창 양끝 값을 덧댄 사다리꼴, y 는 Neumann 이면 반사 값, 주기면 감싼 값의
        평균을 덧댄 사다리꼴로 계산합니다. 두 경우 모두 셀 합 dx*dy*sum 과 같습니다.
        """
        self.check_finite(field)
        return self.integrate_values(field.grid, field.interior)

    def integrate_values(self, grid: Grid, values: np.ndarray) -> float:
        padded_y = self._pad_for_quadrature_y(values, grid.bc_y)
        y_nodes = np.concatenate(([0.0], grid.y_centers, [grid.H]))
        column = trapezoid(padded_y, y_nodes, axis=1)
        padded_x = np.concatenate(([column[0]], column, [column[-1]]))
        x_nodes = np.concatenate(([grid.x_min], grid.x_centers, [grid.x_max]))
        return float(trapezoid(padded_x, x_nodes)) / grid.H

    def column_integrals(self, field: ScalarField) -> np.ndarray:
        """열별 int f dy / H."""
        grid = field.grid
        padded_y = self._pad_for_quadrature_y(field.interior, grid.bc_y)
        y_nodes = np.concatenate(([0.0], grid.y_centers, [grid.H]))
        return trapezoid(padded_y, y_nodes, axis=1) / grid.H

    def gradient_sq_integral(self, field: ScalarField) -> float:
        """int int |grad f|^2 dx dy / H.

        x: 내부 중심 차분, 창 끝은 1차 단측 차분. y: 고스트 행을 이용한 중심 차분.
        """
        self.check_finite(field)
        grid = field.grid
        values = field.interior
        fx = np.gradient(values, grid.dx, axis=0, edge_order=1)
        ghosted = self.apply_bc_y(field, ghosts=1).values
        fy = (ghosted[:, 2:] - ghosted[:, :-2]) / (2.0 * grid.dy)
        return self.integrate_values(grid, fx ** 2 + fy ** 2)

    def apply_bc_y(self, field: ScalarField, ghosts: Optional[int] = None) -> ScalarField:
        """y 고스트 행을 채운 새 ScalarField 를 돌려줍니다.

        Neumann 은 벽 기준 반사, periodic 은 반대편 행을 감싸 붙입니다.
        기존 고스트는 버리고 내부 값에서 다시 만들기 때문에 여러 번 적용해도 같습니다.
        """
        ghosts = self.GHOST_ROWS if ghosts is None else ghosts
        mode = "symmetric" if field.grid.bc_y is BoundaryCondition.NEUMANN else "wrap"
        padded = np.pad(field.interior, ((0, 0), (ghosts, ghosts)), mode=mode)
        return ScalarField(grid=field.grid, values=padded, ghost_y=ghosts, name=field.name)

    def pad_y(self, values: np.ndarray, bc_y: BoundaryCondition, ghosts: int) -> np.ndarray:
        mode = "symmetric" if bc_y is BoundaryCondition.NEUMANN else "wrap"
        return np.pad(values, ((0, 0), (ghosts, ghosts)), mode=mode)

    def to_frame(self, field: ScalarField) -> pd.DataFrame:
        """필드 스냅샷 표 (x, y, T). y 가 바깥, x 가 안쪽 순서입니다."""
        grid = field.grid
        X, Y = np.meshgrid(grid.x_centers, grid.y_centers, indexing="xy")
        return pd.DataFrame({
            "x": X.ravel(),
            "y": Y.ravel(),
            "T": field.interior.T.ravel(),
        })

    @staticmethod
    def _pad_for_quadrature_y(values: np.ndarray, bc_y: BoundaryCondition) -> np.ndarray:
        if bc_y is BoundaryCondition.NEUMANN:
            return np.pad(values, ((0, 0), (1, 1)), mode="edge")
        wall = 0.5 * (values[:, :1] + values[:, -1:])
        return np.concatenate((wall, values, wall), axis=1)

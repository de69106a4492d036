"""체크포인트 파일 어댑터

파일 형식: 첫 줄은 상태 메타데이터 JSON, 나머지는 T 내부값의 CSV 블록 (행 = x, 열 = y).
값은 '%.17g' 로 기록하므로 explicit 모드에서 이어 달리기가 비트 단위로 재현됩니다.
"""
import io
import json
from typing import List, Optional

import pandas as pd

from core.domain.errors import ConfigError
from core.domain.models import BoundaryCondition, Grid, ScalarField, SimulationState
from core.logger import logger
from core.ports.checkpoint_port import CheckpointPort
from core.ports.storage_port import StoragePort


class CheckpointFileAdapter(CheckpointPort):
    """CheckpointPort 구현체.

    Attributes:
        storages (List[StoragePort]): 저장소 리스트. 읽기는 첫 번째 저장소에서 합니다.
        directory (str): 체크포인트 폴더 (저장소 상대 경로).
    """

    def __init__(self, storages: List[StoragePort], directory: str = "checkpoints"):
        self.storages = storages
        self.directory = directory

    def _path(self, label: str) -> str:
        return f"{self.directory}/{label}.ckpt"

    def save(self, state: SimulationState, label: str) -> bool:
        grid = state.field.grid
        header = {
            "t": state.t,
            "step_count": state.step_count,
            "shifted_mass": state.shifted_mass,
            "total_shift_cells": state.total_shift_cells,
            "name": state.field.name,
            "grid": {"nx": grid.nx, "ny": grid.ny, "dx": grid.dx, "dy": grid.dy,
                     "x_min": grid.x_min, "H": grid.H, "bc_y": grid.bc_y.value},
        }
        buffer = io.StringIO()
        buffer.write(json.dumps(header) + "\n")
        pd.DataFrame(state.field.interior).to_csv(buffer, header=False, index=False, float_format="%.17g")
        data = buffer.getvalue().encode("utf-8")

        saved = False
        for storage in self.storages:
            if storage.put_file(self._path(label), data):
                saved = True
        if saved:
            logger.debug(f"[Adapter:Checkpoint] 저장 완료: {label} (t={state.t:.6g}, step={state.step_count})")
        return saved

    def load(self, label: str) -> Optional[SimulationState]:
        if not self.storages:
            return None
        raw = self.storages[0].get_file(self._path(label))
        if raw is None:
            return None
        text = raw.decode("utf-8")
        first, _, block = text.partition("\n")
        try:
            header = json.loads(first)
            g = header["grid"]
            grid = Grid(nx=int(g["nx"]), ny=int(g["ny"]), dx=float(g["dx"]), dy=float(g["dy"]),
                        x_min=float(g["x_min"]), H=float(g["H"]), bc_y=BoundaryCondition(g["bc_y"]))
            values = pd.read_csv(io.StringIO(block), header=None, dtype=float, float_precision="round_trip").to_numpy()
        except (ValueError, KeyError) as e:
            raise ConfigError(f"체크포인트 형식 오류 ({label}): {e}")
        if values.shape != (grid.nx, grid.ny):
            raise ConfigError(f"체크포인트 크기 불일치 ({label}): {values.shape} != ({grid.nx}, {grid.ny})")
        logger.info(f"[Adapter:Checkpoint] 복원: {label} (t={header['t']:.6g}, step={header['step_count']})")
        return SimulationState(
            field=ScalarField(grid=grid, values=values, name=header.get("name", "T")),
            t=float(header["t"]),
            step_count=int(header["step_count"]),
            shifted_mass=float(header["shifted_mass"]),
            total_shift_cells=int(header["total_shift_cells"]),
        )

"""실험 번들 기록 어댑터"""
from typing import Any, Dict, List

import pandas as pd

from core.domain.models import BoundReport, BurningRateSeries
from core.logger import logger
from core.ports.run_report_port import RunReportPort
from core.ports.storage_port import StoragePort


class RunReportAdapter(RunReportPort):
    """RunReportPort 구현체.

    모든 출력을 등록된 저장소 전부에 기록합니다. 경로 규칙:
    <experiment>/runs/<label>/series.csv, <experiment>/runs/<label>/bounds/<name>.json,
    <experiment>/summary.csv, <experiment>/<name>.json

    Attributes:
        storages (List[StoragePort]): 파일 저장 포트 리스트.
    """

    def __init__(self, storages: List[StoragePort]):
        self.storages = storages
        logger.debug(f"[Adapter:RunReport] 초기화 완료 (저장소 {len(self.storages)}개)")

    def _fan_out(self, action) -> bool:
        saved = False
        for storage in self.storages:
            try:
                if action(storage):
                    saved = True
            except Exception as e:
                logger.error(f"[Adapter:RunReport] 저장소 기록 실패 ({type(storage).__name__}): {e}")
        return saved

    def write_series(self, experiment: str, label: str, series: BurningRateSeries) -> bool:
        frame = series.to_dataframe()
        path = f"{experiment}/runs/{label}/series.csv"
        return self._fan_out(lambda s: s.save_dataframe_csv(frame, path, index=False, float_format="%.17g"))

    def write_bound(self, experiment: str, label: str, report: BoundReport) -> bool:
        path = f"{experiment}/runs/{label}/bounds/{report.name}.json"
        return self._fan_out(lambda s: s.save_json(report.to_dict(), path))

    def write_summary(self, experiment: str, summary: pd.DataFrame) -> bool:
        path = f"{experiment}/summary.csv"
        return self._fan_out(lambda s: s.save_dataframe_csv(summary, path, index=False, float_format="%.17g"))

    def write_document(self, experiment: str, name: str, payload: Dict[str, Any]) -> bool:
        path = f"{experiment}/{name}.json"
        return self._fan_out(lambda s: s.save_json(payload, path))

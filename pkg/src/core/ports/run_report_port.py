"""
실행 결과(시계열, 경계 리포트, 요약) 기록을 위한 포트 인터페이스
"""
from abc import ABC, abstractmethod
from typing import Any, Dict

import pandas as pd

from core.domain.models import BoundReport, BurningRateSeries


class RunReportPort(ABC):
    """실험 번들을 기록하는 포트."""

    @abstractmethod
    def write_series(self, experiment: str, label: str, series: BurningRateSeries) -> bool:
        """runs/<label>/series.csv 를 기록합니다."""
        pass

    @abstractmethod
    def write_bound(self, experiment: str, label: str, report: BoundReport) -> bool:
        """runs/<label>/bounds/<name>.json 을 기록합니다."""
        pass

    @abstractmethod
    def write_summary(self, experiment: str, summary: pd.DataFrame) -> bool:
        """summary.csv 를 기록합니다."""
        pass

    @abstractmethod
    def write_document(self, experiment: str, name: str, payload: Dict[str, Any]) -> bool:
        """텐서 리포트, 유선관 기하 등 기타 JSON 문서를 기록합니다.

        Args:
            experiment (str): 실험 이름.
            name (str): 파일 이름 (확장자 제외).
            payload (Dict[str, Any]): 내용.

        Returns:
            bool: 하나 이상의 저장소에 기록했는지 여부.
        """
        pass

"""
실험 정의 로드를 위한 포트 인터페이스
"""
from abc import ABC, abstractmethod

from core.domain.models import ExperimentSpec


class ExperimentSpecPort(ABC):
    """실험 문서를 ExperimentSpec 으로 읽어오는 포트."""

    @abstractmethod
    def load(self, path: str) -> ExperimentSpec:
        """실험 문서를 읽어 검증된 ExperimentSpec 을 돌려줍니다.

        Args:
            path (str): 실험 문서 경로.

        Returns:
            ExperimentSpec: 실험 정의.

        Raises:
            ConfigError: 파일이 없거나, 필수 키가 빠졌거나, 값이 잘못되었을 때.
        """
        pass

"""
시뮬레이션 체크포인트 저장/복원을 위한 포트 인터페이스
"""
from abc import ABC, abstractmethod
from typing import Optional

from core.domain.models import SimulationState


class CheckpointPort(ABC):
    """SimulationState 를 저장하고 다시 읽는 포트."""

    @abstractmethod
    def save(self, state: SimulationState, label: str) -> bool:
        """상태를 label 이름으로 저장합니다.

        Args:
            state (SimulationState): 저장할 상태.
            label (str): 실행 라벨.

        Returns:
            bool: 저장 성공 여부.
        """
        pass

    @abstractmethod
    def load(self, label: str) -> Optional[SimulationState]:
        """label 의 마지막 체크포인트를 읽습니다.

        Args:
            label (str): 실행 라벨.

        Returns:
            Optional[SimulationState]: 복원된 상태. 없으면 None.
        """
        pass

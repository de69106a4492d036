"""burnfront 도메인 예외 정의.

서비스 계층은 아래 예외를 발생시키고, 오케스트레이션 계층(ExperimentService, commands)이
이를 잡아 실행 번들에 기록하거나 종료 코드로 변환합니다.
"""
from typing import List, Optional, Tuple


class BurnfrontError(Exception):
    """모든 burnfront 예외의 기반 클래스."""


class ConfigError(BurnfrontError):
    """실험 설정(격자, CFL, 누락 키 등)이 잘못된 경우."""


class FieldError(BurnfrontError):
    """스칼라장에 유한하지 않은 값이 있거나 형상이 맞지 않는 경우.

    Attributes:
        location (Optional[Tuple[int, int]]): 처음 발견된 문제 셀 (i, j).
    """

    def __init__(self, message: str, location: Optional[Tuple[int, int]] = None):
        super().__init__(message)
        self.location = location


class FlowError(BurnfrontError):
    """유동 파라미터가 잘못되었거나 이산 발산이 허용치를 넘는 경우."""


class TubeExtractionError(BurnfrontError):
    """유선관(tube) 추출이 불가능한 경우 (정체점, 닫힌 유선, 모호한 밴드)."""


class ReactionError(BurnfrontError):
    """반응 모델이 요구 조건(KPP, 오목성 등)을 만족하지 않는 경우."""


class SchemeFailureError(BurnfrontError):
    """수치 기법이 최대값 원리를 깨뜨렸거나 NaN 을 만든 경우.

    Attributes:
        location (Optional[Tuple[int, int]]): 문제 셀 (i, j).
        value (Optional[float]): 문제 셀의 값.
    """

    def __init__(self, message: str, location: Optional[Tuple[int, int]] = None, value: Optional[float] = None):
        super().__init__(message)
        self.location = location
        self.value = value


class DiagnosticsError(BurnfrontError):
    """진단량 계산 입력이 부족하거나 잘못된 경우 (시계열 구간 부족 등)."""


class PartitionError(BurnfrontError):
    """구간 분할이 겹치거나 영역을 벗어나거나 부호가 맞지 않는 경우."""


class BoundError(BurnfrontError):
    """경계(bound) 평가의 전제 조건이 깨진 경우."""


class HomogenizationError(BurnfrontError):
    """셀 문제 풀이가 수렴하지 않았거나 유효 텐서가 비정상인 경우.

    Attributes:
        residuals (List[float]): 잔차 이력.
    """

    def __init__(self, message: str, residuals: Optional[List[float]] = None):
        super().__init__(message)
        self.residuals = list(residuals or [])

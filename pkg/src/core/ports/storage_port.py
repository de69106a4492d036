"""
데이터 저장을 위한 포트 인터페이스

저장 위치와 무관하게 CSV 표, JSON 보고서, 원시 파일을 저장하고 로드할 수 있도록 추상화합니다.
"""
from abc import ABC, abstractmethod
from typing import Any, Dict, Optional
import pandas as pd


class StoragePort(ABC):
    """데이터 저장을 위한 포트 인터페이스.

    실행 결과(시계열 CSV, 경계 리포트 JSON, 체크포인트)를 저장하는 모든 어댑터가 구현합니다.
    """

    @abstractmethod
    def save_dataframe_csv(self, df: pd.DataFrame, path: str, **kwargs) -> bool:
        """DataFrame을 CSV 파일로 저장합니다.

        Args:
            df (pd.DataFrame): 저장할 DataFrame.
            path (str): 저장 경로 (상대 경로).
            **kwargs: pandas.to_csv()에 전달할 추가 인자.

        Returns:
            bool: 저장 성공 여부.
        """
        pass

    @abstractmethod
    def load_dataframe_csv(self, path: str, **kwargs) -> pd.DataFrame:
        """CSV 파일에서 DataFrame을 로드합니다.

        Args:
            path (str): 파일 경로 (상대 경로).
            **kwargs: pandas.read_csv()에 전달할 추가 인자.

        Returns:
            pd.DataFrame: 로드된 DataFrame. 파일이 없거나 실패하면 빈 DataFrame.
        """
        pass

    @abstractmethod
    def save_json(self, payload: Dict[str, Any], path: str) -> bool:
        """dict 를 JSON 파일로 저장합니다.

        Args:
            payload (Dict[str, Any]): 저장할 내용.
            path (str): 저장 경로 (상대 경로).

        Returns:
            bool: 저장 성공 여부.
        """
        pass

    @abstractmethod
    def load_json(self, path: str) -> Optional[Dict[str, Any]]:
        """JSON 파일을 dict 로 로드합니다.

        Args:
            path (str): 파일 경로 (상대 경로).

        Returns:
            Optional[Dict[str, Any]]: 로드된 내용. 파일이 없으면 None.
        """
        pass

    @abstractmethod
    def path_exists(self, path: str) -> bool:
        """경로가 존재하는지 확인합니다."""
        pass

    @abstractmethod
    def ensure_directory(self, path: str) -> bool:
        """디렉토리가 없으면 생성합니다.

        Args:
            path (str): 디렉토리 경로 (상대 경로).

        Returns:
            bool: 생성 성공 여부 (이미 존재해도 True).
        """
        pass

    @abstractmethod
    def get_file(self, path: str) -> Optional[bytes]:
        """파일의 내용을 바이트로 읽어옵니다.

        Args:
            path (str): 파일 경로 (상대 경로).

        Returns:
            Optional[bytes]: 파일 내용 (bytes). 파일이 없으면 None.
        """
        pass

    @abstractmethod
    def put_file(self, path: str, data: bytes) -> bool:
        """바이트 데이터를 파일로 저장합니다.

        Args:
            path (str): 저장 경로 (상대 경로).
            data (bytes): 저장할 데이터 (bytes).

        Returns:
            bool: 저장 성공 여부.
        """
        pass

    @abstractmethod
    def list_files(self, directory_path: str) -> list[str]:
        """디렉토리 내의 파일 리스트를 반환합니다."""
        pass

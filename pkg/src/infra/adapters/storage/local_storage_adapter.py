"""
로컬 파일 시스템 저장소 구현

StoragePort를 구현하여 로컬 파일 시스템에 실행 결과를 저장합니다.
"""
import json
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from core.ports.storage_port import StoragePort
from core.logger import logger


def _to_builtin(value: Any) -> Any:
    """numpy 값을 JSON 직렬화 가능한 파이썬 값으로 바꿉니다."""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if hasattr(value, "value"):
        return value.value
    raise TypeError(f"JSON 으로 직렬화할 수 없는 값: {type(value).__name__}")


def _strict_json(value: Any) -> Any:
    """payload 를 훑어 inf/nan 을 null 로 바꿉니다 (표준 JSON 에는 해당 토큰이 없음)."""
    if isinstance(value, dict):
        return {str(k): _strict_json(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_strict_json(v) for v in value]
    if isinstance(value, (np.ndarray, np.generic)):
        return _strict_json(value.tolist())
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


class LocalStorageAdapter(StoragePort):
    """로컬 파일 시스템 저장소 Adapter.

    Attributes:
        base_path (Path): 기본 저장 경로.
        dry_run (bool): 실제 파일 저장을 수행하지 않는 모의 실행 모드 여부.
    """

    def __init__(self, base_path: str = "output", dry_run: bool = False):
        """LocalStorageAdapter 초기화.

        Args:
            base_path (str): 기본 저장 경로 (기본값: "output").
            dry_run (bool): 모의 실행 모드 여부.
        """
        self.base_path = Path(base_path)
        self.dry_run = dry_run
        self.ensure_directory("")
        logger.info(f"[LocalStorage] 초기화 완료 (Base: {self.base_path.absolute()}, Dry-run: {self.dry_run})")

    def _prepare(self, path: str) -> Path:
        full_path = self.base_path / path
        full_path.parent.mkdir(parents=True, exist_ok=True)
        return full_path

    def save_dataframe_csv(self, df: pd.DataFrame, path: str, **kwargs) -> bool:
        if self.dry_run:
            logger.info(f"[LocalStorage] [Dry-run] Would save CSV to: {path}")
            return True
        try:
            kwargs.setdefault("index", False)
            df.to_csv(self._prepare(path), **kwargs)
            logger.info(f"[LocalStorage] CSV 저장 성공: {path}")
            return True
        except Exception as e:
            logger.error(f"[LocalStorage] CSV 저장 실패 ({path}): {e}")
            return False

    def load_dataframe_csv(self, path: str, **kwargs) -> pd.DataFrame:
        try:
            full_path = self.base_path / path
            if not full_path.exists():
                return pd.DataFrame()
            return pd.read_csv(full_path, **kwargs)
        except Exception as e:
            logger.error(f"[LocalStorage] CSV 로드 실패 ({path}): {e}")
            return pd.DataFrame()

    def save_json(self, payload: Dict[str, Any], path: str) -> bool:
        if self.dry_run:
            logger.info(f"[LocalStorage] [Dry-run] Would save JSON to: {path}")
            return True
        try:
            text = json.dumps(_strict_json(payload), indent=2, ensure_ascii=False, allow_nan=False,
                              default=_to_builtin)
            self._prepare(path).write_text(text, encoding="utf-8")
            logger.info(f"[LocalStorage] JSON 저장 성공: {path}")
            return True
        except Exception as e:
            logger.error(f"[LocalStorage] JSON 저장 실패 ({path}): {e}")
            return False

    def load_json(self, path: str) -> Optional[Dict[str, Any]]:
        full_path = self.base_path / path
        if not full_path.exists():
            logger.warning(f"[LocalStorage] 파일 없음: {path}")
            return None
        try:
            return json.loads(full_path.read_text(encoding="utf-8"))
        except Exception as e:
            logger.error(f"[LocalStorage] JSON 로드 실패 ({path}): {e}")
            return None

    def path_exists(self, path: str) -> bool:
        return (self.base_path / path).exists()

    def ensure_directory(self, path: str) -> bool:
        try:
            target = self.base_path if path == "" else self.base_path / path
            target.mkdir(parents=True, exist_ok=True)
            return True
        except Exception as e:
            logger.error(f"[LocalStorage] 디렉토리 생성 실패 ({path}): {e}")
            return False

    def get_file(self, path: str) -> Optional[bytes]:
        try:
            full_path = self.base_path / path
            if not full_path.exists():
                return None
            return full_path.read_bytes()
        except Exception as e:
            logger.error(f"[LocalStorage] 파일 읽기 실패 ({path}): {e}")
            return None

    def put_file(self, path: str, data: bytes) -> bool:
        if self.dry_run:
            logger.info(f"[LocalStorage] [Dry-run] Would save file (bytes: {len(data)}) to: {path}")
            return True
        try:
            self._prepare(path).write_bytes(data)
            logger.info(f"[LocalStorage] 파일 저장 성공: {path}")
            return True
        except Exception as e:
            logger.error(f"[LocalStorage] 파일 저장 실패 ({path}): {e}")
            return False

    def list_files(self, directory_path: str) -> list[str]:
        try:
            full_path = self.base_path / directory_path
            if not full_path.exists() or not full_path.is_dir():
                return []
            return sorted(f.name for f in full_path.iterdir() if f.is_file())
        except Exception as e:
            logger.error(f"[LocalStorage] 파일 목록 조회 실패 ({directory_path}): {e}")
            return []

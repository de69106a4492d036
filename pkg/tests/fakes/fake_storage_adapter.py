import copy
from typing import Any, Dict, Optional, List
import pandas as pd
from core.ports.storage_port import StoragePort

class FakeStorageAdapter(StoragePort):
    """테스트용 인메모리 스토리지 어댑터"""

    def __init__(self):
        self.files: Dict[str, bytes] = {}
        self.dataframes: Dict[str, pd.DataFrame] = {}
        self.documents: Dict[str, Dict[str, Any]] = {}
        self.directories: List[str] = []

    def save_dataframe_csv(self, df: pd.DataFrame, path: str, **kwargs) -> bool:
        self.dataframes[path] = df.copy()
        return True

    def load_dataframe_csv(self, path: str, **kwargs) -> pd.DataFrame:
        return self.dataframes.get(path, pd.DataFrame())

    def save_json(self, payload: Dict[str, Any], path: str) -> bool:
        self.documents[path] = copy.deepcopy(payload)
        return True

    def load_json(self, path: str) -> Optional[Dict[str, Any]]:
        return self.documents.get(path)

    def path_exists(self, path: str) -> bool:
        return (path in self.files) or (path in self.dataframes) or (path in self.documents)

    def ensure_directory(self, path: str) -> bool:
        self.directories.append(path)
        return True

    def get_file(self, path: str) -> Optional[bytes]:
        return self.files.get(path)

    def put_file(self, path: str, data: bytes) -> bool:
        self.files[path] = data
        return True

    def list_files(self, directory_path: str) -> list[str]:
        prefix = directory_path.rstrip("/") + "/"
        names = set()
        for key in list(self.files) + list(self.dataframes) + list(self.documents):
            if key.startswith(prefix) and "/" not in key[len(prefix):]:
                names.add(key[len(prefix):])
        return sorted(names)

# 실행 번들과 체크포인트가 쓰는 저장소 어댑터
from .local_storage_adapter import LocalStorageAdapter

__all__ = ["LocalStorageAdapter"]

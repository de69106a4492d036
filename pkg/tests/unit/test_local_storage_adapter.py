import numpy as np
import pandas as pd

from core.domain.models import BoundaryCondition
from infra.adapters.storage.local_storage_adapter import LocalStorageAdapter


def test_local_storage_save_and_load_csv(tmp_path):
    """LocalStorageAdapter가 실제 파일 시스템에 시계열 CSV를 저장하고 로드하는지 검증"""
    # Given
    # tmp_path는 pytest가 제공하는 임시 디렉토리 (테스트 후 자동 삭제됨)
    adapter = LocalStorageAdapter(base_path=str(tmp_path))

    df = pd.DataFrame({'t': [0.0, 0.5], 'V_reaction': [1.0 / 3.0, 0.25]})
    file_path = "exp/runs/a/series.csv"

    # When
    # 1. 저장
    save_result = adapter.save_dataframe_csv(df, file_path, float_format="%.17g")

    # Then
    assert save_result is True

    # 실제 파일이 생성되었는지 확인 (index 는 기본으로 쓰지 않음)
    full_path = tmp_path / "exp" / "runs" / "a" / "series.csv"
    assert full_path.exists()
    assert full_path.read_text(encoding="utf-8").splitlines()[0] == "t,V_reaction"

    # 2. 로드
    loaded_df = adapter.load_dataframe_csv(file_path, float_precision="round_trip")
    assert len(loaded_df) == 2
    assert loaded_df['V_reaction'].iloc[0] == 1.0 / 3.0


def test_local_storage_missing_csv_is_empty(tmp_path):
    adapter = LocalStorageAdapter(base_path=str(tmp_path))

    assert adapter.load_dataframe_csv("nothing.csv").empty


def test_local_storage_json_handles_numpy_values(tmp_path):
    """numpy 스칼라/배열과 Enum 이 섞인 보고서도 JSON 으로 저장되는지 검증"""
    # Given
    adapter = LocalStorageAdapter(base_path=str(tmp_path))
    payload = {
        "core": np.float64(0.25),
        "tensor": np.eye(2),
        "bc_y": BoundaryCondition.PERIODIC,
        "caveats": ["보편 상수 C 생략"],
    }

    # When
    assert adapter.save_json(payload, "exp/runs/a/bounds/shear.json") is True
    loaded = adapter.load_json("exp/runs/a/bounds/shear.json")

    # Then
    assert loaded == {
        "core": 0.25,
        "tensor": [[1.0, 0.0], [0.0, 1.0]],
        "bc_y": "periodic",
        "caveats": ["보편 상수 C 생략"],
    }


def test_local_storage_path_exists(tmp_path):
    """파일 존재 여부 확인 기능 검증"""
    # Given
    adapter = LocalStorageAdapter(base_path=str(tmp_path))
    file_path = "check_exists.txt"
    full_path = tmp_path / file_path

    # 파일 생성
    full_path.write_text("content", encoding="utf-8")

    # When & Then
    assert adapter.path_exists(file_path) is True
    assert adapter.path_exists("non_existent_file.txt") is False


def test_local_storage_put_and_get_file(tmp_path):
    """바이트 데이터 저장 및 로드 검증"""
    # Given
    adapter = LocalStorageAdapter(base_path=str(tmp_path))
    file_path = "checkpoints/run.ckpt"
    data = b"\x00\x01\x02"

    # When
    adapter.put_file(file_path, data)

    # Then
    loaded_data = adapter.get_file(file_path)
    assert loaded_data == data
    assert adapter.list_files("checkpoints") == ["run.ckpt"]


def test_local_storage_dry_run_writes_nothing(tmp_path):
    """dry_run 모드에서는 성공을 돌려주지만 파일을 만들지 않음"""
    adapter = LocalStorageAdapter(base_path=str(tmp_path), dry_run=True)

    assert adapter.save_json({"a": 1}, "exp/summary.json") is True
    assert adapter.put_file("exp/x.bin", b"1") is True
    assert not (tmp_path / "exp").exists()


def test_local_storage_ensure_directory(tmp_path):
    """디렉토리 생성 검증"""
    # Given
    adapter = LocalStorageAdapter(base_path=str(tmp_path))
    dir_path = "deep/nested/dir"

    # When
    adapter.ensure_directory(dir_path)

    # Then
    full_path = tmp_path / "deep" / "nested" / "dir"
    assert full_path.exists()
    assert full_path.is_dir()

"""명령어 공통 의존성 조립"""
import os
from typing import Optional

from core.logger import logger

# Services
from core.services.bounds_service import BoundsService
from core.services.diagnostics_service import DiagnosticsService
from core.services.experiment_service import ExperimentService
from core.services.field_service import FieldService
from core.services.flow_service import FlowService
from core.services.homogenization_service import HomogenizationService
from core.services.reaction_service import ReactionService
from core.services.solver_service import SolverService
from core.services.sweep_report_service import SweepReportService

# Adapters
from infra.adapters.storage import LocalStorageAdapter
from infra.adapters.checkpoint_file_adapter import CheckpointFileAdapter
from infra.adapters.run_report_adapter import RunReportAdapter

DEFAULT_OUTPUT_DIR = "output"


def resolve_output_dir(out: Optional[str]) -> str:
    """--out > BURNFRONT_OUTPUT_DIR > "output"."""
    return out or os.getenv("BURNFRONT_OUTPUT_DIR") or DEFAULT_OUTPUT_DIR


def resolve_threads(threads: Optional[int]) -> int:
    """--threads > BURNFRONT_THREADS > 1."""
    if threads is not None:
        return max(1, threads)
    raw = os.getenv("BURNFRONT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning(f"[CLI] BURNFRONT_THREADS='{raw}' 를 해석할 수 없어 1 을 사용합니다")
        return 1


def build_experiment_service(
    output_dir: str,
    threads: int = 1,
    allow_underresolved: bool = False,
    dry_run: bool = False,
) -> ExperimentService:
    """로컬 저장소 기반 ExperimentService 를 조립합니다."""
    local_storage = LocalStorageAdapter(base_path=output_dir, dry_run=dry_run)
    save_storages = [local_storage]

    field_service = FieldService()
    reaction_service = ReactionService()
    flow_service = FlowService()
    diagnostics_service = DiagnosticsService(field_service, reaction_service)
    solver_service = SolverService(field_service, flow_service, reaction_service, diagnostics_service)
    bounds_service = BoundsService(reaction_service, flow_service, diagnostics_service)
    homogenization_service = HomogenizationService(flow_service)
    sweep_report_service = SweepReportService(RunReportAdapter(storages=save_storages))

    return ExperimentService(
        solver_service=solver_service,
        flow_service=flow_service,
        diagnostics_service=diagnostics_service,
        bounds_service=bounds_service,
        homogenization_service=homogenization_service,
        sweep_report_service=sweep_report_service,
        checkpoint_port=CheckpointFileAdapter(storages=save_storages),
        threads=threads,
        allow_underresolved=allow_underresolved,
    )

import typer
from typing import Optional
from dotenv import load_dotenv

from core.domain.errors import ConfigError
from core.logger import logger
from infra.adapters.toml_spec_adapter import TomlSpecAdapter
from commands.wiring import build_experiment_service, resolve_output_dir


def cell(
    spec: str = typer.Argument(..., help="실험 문서 경로 (TOML, [cell] 섹션 필요)"),
    out: Optional[str] = typer.Option(None, "--out", "-o", help="출력 폴더"),
):
    """주기 셀 문제를 풀어 유효 확산 텐서와 균질화 하한을 기록합니다."""
    load_dotenv()

    try:
        experiment = TomlSpecAdapter().load(spec)
        service = build_experiment_service(resolve_output_dir(out))
        results = service.run_homogenization(experiment)
    except ConfigError as e:
        logger.error(f"[CLI:Cell] 설정 오류: {e}")
        typer.echo(f"[CLI:Cell] 설정 오류: {e}", err=True)
        raise typer.Exit(code=2)

    for result in results:
        if not result.ok:
            typer.echo(f"  {result.plan.label}: 실패 ({result.error})", err=True)
            continue
        tensor = result.checks["tensor"]
        typer.echo(
            f"  {result.plan.label}: kappa*={tensor['kstar_tensor']}, k*={tensor['kstar_min']:.6g}, "
            f"v0*={tensor['v0_star']:.6g}, 하한 core={result.primary_bound:.6g}"
        )
    if any(not r.ok for r in results):
        raise typer.Exit(code=1)

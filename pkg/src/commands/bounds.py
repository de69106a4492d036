import typer
from typing import Optional
from dotenv import load_dotenv

from core.domain.errors import ConfigError
from core.logger import logger
from infra.adapters.toml_spec_adapter import TomlSpecAdapter
from commands.wiring import build_experiment_service, resolve_output_dir


def bounds(
    spec: str = typer.Argument(..., help="실험 문서 경로 (TOML)"),
    out: Optional[str] = typer.Option(None, "--out", "-o", help="출력 폴더"),
):
    """PDE 없이 실험 문서의 해석적 경계만 평가합니다."""
    load_dotenv()

    try:
        experiment = TomlSpecAdapter().load(spec)
        service = build_experiment_service(resolve_output_dir(out))
        results = service.evaluate_bounds(experiment)
    except ConfigError as e:
        logger.error(f"[CLI:Bounds] 설정 오류: {e}")
        typer.echo(f"[CLI:Bounds] 설정 오류: {e}", err=True)
        raise typer.Exit(code=2)

    reporter = service.sweep_report_service
    typer.echo(reporter.render(reporter.build_summary(results)))
    for result in results:
        for report in result.reports:
            typer.echo(f"  {result.plan.label:<28} {report.name:<22} core={report.core:.6g}")
    if any(not r.ok for r in results):
        raise typer.Exit(code=1)

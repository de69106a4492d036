import typer
from typing import Optional
from dotenv import load_dotenv

from core.domain.errors import ConfigError
from core.logger import logger
from infra.adapters.toml_spec_adapter import TomlSpecAdapter
from commands.wiring import build_experiment_service, resolve_output_dir, resolve_threads


def run(
    spec: str = typer.Argument(..., help="실험 문서 경로 (TOML)"),
    out: Optional[str] = typer.Option(None, "--out", "-o", help="출력 폴더 (기본값: BURNFRONT_OUTPUT_DIR 또는 output)"),
    threads: Optional[int] = typer.Option(None, "--threads", "-t", help="스윕 작업자 수 (기본값: BURNFRONT_THREADS 또는 1)"),
    allow_underresolved: bool = typer.Option(False, "--allow-underresolved", help="해상도 정책 위반을 경고로 낮춥니다"),
    resume: bool = typer.Option(False, "--resume", help="체크포인트가 있으면 이어서 실행합니다"),
    dry_run: bool = typer.Option(False, "--dry-run", help="파일을 기록하지 않는 모의 실행"),
):
    """실험 문서의 모든 실행을 적분하고 결과 번들을 기록합니다.

    종료 코드: 0 성공, 1 일부 실행 실패 (부분 번들), 2 설정 오류.
    """
    load_dotenv()

    try:
        experiment = TomlSpecAdapter().load(spec)
        service = build_experiment_service(
            resolve_output_dir(out), resolve_threads(threads), allow_underresolved, dry_run
        )
        results = service.run(experiment, resume=resume)
    except ConfigError as e:
        logger.error(f"[CLI:Run] 설정 오류: {e}")
        typer.echo(f"[CLI:Run] 설정 오류: {e}", err=True)
        raise typer.Exit(code=2)

    typer.echo(service.sweep_report_service.render(service.sweep_report_service.build_summary(results)))
    failed = [r for r in results if not r.ok]
    if failed:
        typer.echo(f"[CLI:Run] 실패한 실행 {len(failed)}개: {', '.join(r.plan.label for r in failed)}", err=True)
        raise typer.Exit(code=1)

import math
from typing import Any, Dict, List, Sequence

import numpy as np
import pandas as pd

from core.domain.models import ExperimentSpec, RunResult
from core.logger import logger
from core.ports.run_report_port import RunReportPort

SUMMARY_COLUMNS = [
    "label", "amplitude", "V_measured", "bound_core", "ratio", "fitted_exponent",
    "tau0", "tau", "short_window", "under_resolved", "upper_bound_ok", "error",
]


class SweepReportService:
    """스윕 결과를 요약표로 만들고 번들을 기록하는 서비스.

    Attributes:
        report_port (RunReportPort): 번들 기록 포트.
    """

    def __init__(self, report_port: RunReportPort):
        self.report_port = report_port

    @staticmethod
    def fit_exponent(amplitudes: Sequence[float], values: Sequence[float]) -> float:
        """진폭 상위 절반에서 log V 대 log 진폭의 최소제곱 기울기.

        양수이고 유한한 점이 2개 미만이면 nan.
        """
        pairs = sorted((a, v) for a, v in zip(amplitudes, values)
                       if a > 0 and v > 0 and math.isfinite(a) and math.isfinite(v))
        if len(pairs) < 2:
            return math.nan
        top = pairs[len(pairs) // 2:] if len(pairs) >= 4 else pairs
        x = np.log([a for a, _ in top])
        y = np.log([v for _, v in top])
        return float(np.polyfit(x, y, 1)[0])

    def build_summary(self, results: List[RunResult]) -> pd.DataFrame:
        """amplitude, V_measured, bound_core, ratio, fitted_exponent 를 포함한 요약표."""
        rows: List[Dict[str, Any]] = []
        for r in results:
            core = r.primary_bound
            ratio = r.measured / core if core and math.isfinite(r.measured) and core > 0 else math.nan
            rows.append({
                "label": r.plan.label,
                "amplitude": r.plan.amplitude,
                "V_measured": r.measured,
                "bound_core": core,
                "ratio": ratio,
                "tau0": r.tau0,
                "tau": r.tau,
                "short_window": bool(r.checks.get("short_window", False)),
                "under_resolved": r.under_resolved,
                "upper_bound_ok": r.checks.get("upper_bound_ok"),
                "error": r.error or "",
            })
        frame = pd.DataFrame(rows)
        valid = [r for r in results if r.ok]
        source = [r.measured for r in valid]
        if all(not math.isfinite(v) for v in source):
            source = [r.primary_bound for r in valid]
        exponent = self.fit_exponent([r.plan.amplitude for r in valid], source)
        frame["fitted_exponent"] = exponent
        return frame.reindex(columns=SUMMARY_COLUMNS)

    def render(self, summary: pd.DataFrame) -> str:
        """콘솔 출력용 마크다운 표."""
        shown = summary.drop(columns=["error"]).copy()
        return shown.to_markdown(index=False, floatfmt=".4g")

    def write_bundle(self, spec: ExperimentSpec, results: List[RunResult]) -> pd.DataFrame:
        """실행별 시계열과 경계 JSON, 요약표, 부가 문서를 기록합니다."""
        for r in results:
            if r.series is not None:
                self.report_port.write_series(spec.name, r.plan.label, r.series)
            for report in r.reports:
                self.report_port.write_bound(spec.name, r.plan.label, report)
            if "tensor" in r.checks:
                self.report_port.write_document(spec.name, f"tensor_{r.plan.label}", r.checks["tensor"])
            for report in r.reports:
                if "tubes" in report.extra:
                    self.report_port.write_document(spec.name, f"tubes_{r.plan.label}", report.extra["tubes"])
        summary = self.build_summary(results)
        self.report_port.write_summary(spec.name, summary)
        failed = [r.plan.label for r in results if not r.ok]
        if failed:
            self.report_port.write_document(spec.name, "partial", {"failed": failed,
                                                                    "errors": {r.plan.label: r.error for r in results if not r.ok}})
            logger.warning(f"[Service:SweepReport] 부분 번들입니다 (실패 {len(failed)}개: {', '.join(failed)})")
        logger.info(f"[Service:SweepReport] 번들 기록 완료: {spec.name} (실행 {len(results)}개)")
        return summary

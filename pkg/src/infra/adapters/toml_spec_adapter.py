"""TOML 실험 문서 로더"""
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from core.domain.errors import ConfigError, ReactionError
from core.domain.models import (
    BoundaryCondition,
    CellSettings,
    ExperimentSpec,
    FlowKind,
    FlowSpec,
    GridSpec,
    Preset,
    ReactionKind,
    ReactionModel,
    SolverSettings,
    TimeLawKind,
    TubeBand,
    WindowPolicy,
)
from core.logger import logger
from core.ports.experiment_spec_port import ExperimentSpecPort
from core.services.reaction_service import ReactionService

FLOW_KEYS = {
    FlowKind.NONE: (),
    FlowKind.SHEAR_SINE: ("u0", "n"),
    FlowKind.TIMEDEP_SHEAR: ("law", "u0", "n", "rate"),
    FlowKind.PERPENDICULAR_SHEAR: ("w0", "n", "wavelength"),
    FlowKind.CELLULAR: ("m", "U", "Lx", "Ly"),
    FlowKind.PERCOLATING_WAVY: ("U", "a", "Lx"),
}
INTEGER_FLOW_KEYS = ("n", "m")


def _require(section: Dict[str, Any], name: str, key: str) -> Any:
    if key not in section:
        raise ConfigError(f"[{name}] 섹션에 '{key}' 값이 없습니다")
    return section[key]


def _enum(enum_cls, value: Any, name: str, key: str):
    try:
        return enum_cls(value)
    except ValueError:
        allowed = ", ".join(e.value for e in enum_cls)
        raise ConfigError(f"[{name}] {key}='{value}' 는 지원하지 않습니다 (가능: {allowed})")


def _integer(value: Any, name: str, key: str) -> int:
    """정수 파라미터. 1.0 같은 정수값 실수는 받고 1.5 나 문자열은 거부합니다."""
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"[{name}] {key}={value!r} 는 정수여야 합니다")
    if isinstance(value, float) and not value.is_integer():
        raise ConfigError(f"[{name}] {key}={value!r} 는 정수여야 합니다")
    return int(value)


class TomlSpecAdapter(ExperimentSpecPort):
    """ExperimentSpecPort 구현체.

    물리 파라미터에는 기본값이 없으며, 빠진 키는 섹션과 키 이름을 담은 ConfigError 가 됩니다.

    Attributes:
        reaction_service (ReactionService): 반응 모델 검증.
    """

    def __init__(self, reaction_service: Optional[ReactionService] = None):
        self.reaction_service = reaction_service or ReactionService()

    def load(self, path: str) -> ExperimentSpec:
        file_path = Path(path)
        if not file_path.is_file():
            raise ConfigError(f"실험 문서를 찾을 수 없습니다: {path}")
        try:
            document = tomllib.loads(file_path.read_text(encoding="utf-8"))
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"TOML 구문 오류 ({path}): {e}")
        spec = self.parse(document)
        logger.info(f"[Adapter:TomlSpec] 실험 문서 로드 완료: {spec.name} ({spec.preset.value})")
        return spec

    def parse(self, document: Dict[str, Any]) -> ExperimentSpec:
        """파싱된 TOML dict 를 ExperimentSpec 으로 바꿉니다."""
        experiment = _require(document, "root", "experiment")
        preset = _enum(Preset, _require(experiment, "experiment", "preset"), "experiment", "preset")
        reaction = self._reaction(_require(document, "root", "reaction"))
        flow = self._flow(_require(document, "root", "flow"))

        needs_pde = preset is not Preset.HOMOGENIZE
        grid = self._grid(document["grid"]) if "grid" in document else None
        solver = self._solver(document["solver"]) if "solver" in document else None
        if needs_pde and grid is None:
            raise ConfigError("[grid] 섹션이 없습니다")
        if needs_pde and solver is None:
            raise ConfigError("[solver] 섹션이 없습니다")

        cell = self._cell(document["cell"]) if "cell" in document else None
        if preset is Preset.HOMOGENIZE and cell is None:
            raise ConfigError("homogenize 프리셋에는 [cell] 섹션이 필요합니다")

        bands = tuple(
            TubeBand(lo=float(_require(b, "bands", "lo")), hi=float(_require(b, "bands", "hi")),
                     y_seed=None if b.get("y_seed") is None else float(b["y_seed"]))
            for b in document.get("bands", [])
        )
        if preset is Preset.PERCOLATING and not bands:
            raise ConfigError("percolating 프리셋에는 [[bands]] 가 하나 이상 필요합니다")

        return ExperimentSpec(
            name=str(_require(experiment, "experiment", "name")),
            preset=preset,
            grid=grid,
            reaction=reaction,
            flow=flow,
            solver=solver,
            amplitudes=tuple(float(a) for a in experiment.get("amplitudes", [])),
            averaging_multiple=float(experiment.get("averaging_multiple", 4.0)),
            average_start=float(experiment.get("average_start", 0.0)),
            bands=bands,
            cell=cell,
            partition_budget=int(experiment.get("partition_budget", 4)),
        )

    def _grid(self, section: Dict[str, Any]) -> GridSpec:
        return GridSpec(
            nx=int(_require(section, "grid", "nx")),
            ny=int(_require(section, "grid", "ny")),
            x_min=float(_require(section, "grid", "x_min")),
            x_length=float(_require(section, "grid", "x_length")),
            H=float(_require(section, "grid", "H")),
            bc_y=_enum(BoundaryCondition, _require(section, "grid", "bc_y"), "grid", "bc_y"),
        )

    def _reaction(self, section: Dict[str, Any]) -> ReactionModel:
        kind = _enum(ReactionKind, _require(section, "reaction", "kind"), "reaction", "kind")
        v0 = float(_require(section, "reaction", "v0"))
        kappa = float(_require(section, "reaction", "kappa"))
        options: Dict[str, Any] = {}
        if kind is ReactionKind.IGNITION:
            options["theta"] = float(_require(section, "reaction", "theta"))
        if kind is ReactionKind.ARRHENIUS:
            options["activation"] = float(_require(section, "reaction", "activation"))
        if kind is ReactionKind.KPP_GENERAL:
            poly = np.polynomial.Polynomial([float(c) for c in _require(section, "reaction", "coefficients")])
            first, second = poly.deriv(1), poly.deriv(2)
            options.update(f=poly, df=first, d2f=second)
        try:
            return self.reaction_service.make_model(kind, v0, kappa, **options)
        except ReactionError as e:
            raise ConfigError(f"[reaction] {e}")

    def _flow(self, section: Dict[str, Any]) -> FlowSpec:
        kind = _enum(FlowKind, _require(section, "flow", "kind"), "flow", "kind")
        params = {key: value for key, value in section.items() if key != "kind"}
        for key in FLOW_KEYS[kind]:
            _require(section, "flow", key)
        if "law" in params:
            params["law"] = _enum(TimeLawKind, params["law"], "flow", "law").value
        for key in INTEGER_FLOW_KEYS:
            if key in params:
                params[key] = _integer(params[key], "flow", key)
        return FlowSpec(kind=kind, params=params)

    def _solver(self, section: Dict[str, Any]) -> SolverSettings:
        checkpoint = section.get("checkpoint_every")
        return SolverSettings(
            dt=float(_require(section, "solver", "dt")),
            t_final=float(_require(section, "solver", "t_final")),
            window_policy=_enum(WindowPolicy, _require(section, "solver", "window"), "solver", "window"),
            snapshot_every=int(_require(section, "solver", "snapshot_every")),
            x0=float(_require(section, "solver", "x0")),
            lam=float(_require(section, "solver", "lambda")),
            implicit_y=bool(section.get("implicit_y", False)),
            checkpoint_every=None if checkpoint is None else int(checkpoint),
        )

    def _cell(self, section: Dict[str, Any]) -> CellSettings:
        return CellSettings(
            nx=int(_require(section, "cell", "nx")),
            ny=int(_require(section, "cell", "ny")),
            Lx=float(_require(section, "cell", "Lx")),
            Ly=float(_require(section, "cell", "Ly")),
        )

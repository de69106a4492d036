"""burnfront 도메인 모델.

격자, 스칼라장, 유동장, 반응 모델, 구간 분할, 경계 리포트, 셀 문제 등
서비스 계층이 주고받는 데이터 구조를 정의합니다.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from core.domain.errors import ConfigError, FieldError, PartitionError

GRID_TOLERANCE = 1e-12


class BoundaryCondition(Enum):
    NEUMANN = "neumann"
    PERIODIC = "periodic"


class FlowProvenance(Enum):
    SHEAR_PROFILE = "shear_profile"
    STREAM_FUNCTION = "stream_function"
    EXPLICIT = "explicit"


class FlowKind(Enum):
    NONE = "none"
    SHEAR_SINE = "shear_sine"
    TIMEDEP_SHEAR = "timedep_shear"
    PERPENDICULAR_SHEAR = "perpendicular_shear"
    CELLULAR = "cellular"
    PERCOLATING_WAVY = "percolating_wavy"


class ReactionKind(Enum):
    KPP_QUADRATIC = "kpp_quadratic"
    KPP_GENERAL = "kpp_general"
    ARRHENIUS = "arrhenius"
    IGNITION = "ignition"

    @property
    def is_kpp(self) -> bool:
        return self in (ReactionKind.KPP_QUADRATIC, ReactionKind.KPP_GENERAL)


class WindowPolicy(Enum):
    FIXED = "fixed"
    FOLLOW_FRONT = "follow_front"


class TimeLawKind(Enum):
    PULSATING = "pulsating"
    TRANSLATING = "translating"


class Weighting(Enum):
    FLAT = "flat"
    KERNEL = "kernel"


class Preset(Enum):
    LAMINAR = "laminar"
    SHEAR_SWEEP = "shear_sweep"
    SHEAR_PERPENDICULAR = "shear_perpendicular"
    TIMEDEP_SHEAR = "timedep_shear"
    PERCOLATING = "percolating"
    CELLULAR_SWEEP = "cellular_sweep"
    HOMOGENIZE = "homogenize"


# ---------------------------------------------------------------------------
# 격자 / 스칼라장
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    """셀 중심 직교 격자.

    셀 (i, j) 의 중심은 x_i = x_min + (i + 1/2) dx, y_j = (j + 1/2) dy 입니다.

    Attributes:
        nx (int): x 방향 셀 수 (>= 8).
        ny (int): y 방향 셀 수 (>= 4).
        dx (float): x 방향 셀 크기.
        dy (float): y 방향 셀 크기.
        x_min (float): 계산 창의 왼쪽 끝.
        H (float): 띠(strip)의 높이. ny * dy == H.
        bc_y (BoundaryCondition): y 방향 경계 조건.
    """
    nx: int
    ny: int
    dx: float
    dy: float
    x_min: float
    H: float
    bc_y: BoundaryCondition = BoundaryCondition.NEUMANN

    def __post_init__(self):
        if self.nx < 8 or self.ny < 4:
            raise ConfigError(f"격자가 너무 작습니다 (nx={self.nx}, ny={self.ny}; 최소 8x4)")
        if not (self.dx > 0 and self.dy > 0 and self.H > 0):
            raise ConfigError(f"격자 간격과 높이는 양수여야 합니다 (dx={self.dx}, dy={self.dy}, H={self.H})")
        if abs(self.ny * self.dy - self.H) > GRID_TOLERANCE * max(self.H, 1.0) * self.ny:
            raise ConfigError(f"ny*dy({self.ny * self.dy}) 가 H({self.H}) 와 다릅니다")

    @classmethod
    def build(cls, nx: int, ny: int, x_min: float, x_length: float, H: float,
              bc_y: BoundaryCondition = BoundaryCondition.NEUMANN) -> "Grid":
        return cls(nx=nx, ny=ny, dx=x_length / nx, dy=H / ny, x_min=x_min, H=H, bc_y=bc_y)

    @property
    def x_length(self) -> float:
        return self.nx * self.dx

    @property
    def x_max(self) -> float:
        return self.x_min + self.x_length

    @property
    def x_centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.nx) + 0.5) * self.dx

    @property
    def y_centers(self) -> np.ndarray:
        return (np.arange(self.ny) + 0.5) * self.dy

    @property
    def x_faces(self) -> np.ndarray:
        return self.x_min + np.arange(self.nx + 1) * self.dx

    @property
    def y_faces(self) -> np.ndarray:
        return np.arange(self.ny + 1) * self.dy

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        """셀 중심 좌표 배열 (X, Y), 형상 (nx, ny)."""
        return np.meshgrid(self.x_centers, self.y_centers, indexing="ij")

    def shifted(self, cells: int) -> "Grid":
        return replace(self, x_min=self.x_min + cells * self.dx)


@dataclass
class ScalarField:
    """격자 위의 스칼라 값 T(x, y).

    Attributes:
        grid (Grid): 소속 격자.
        values (np.ndarray): 형상 (nx, ny + 2*ghost_y) 의 값 배열.
        ghost_y (int): y 방향 고스트 행 수 (양쪽 각각).
        name (str): 필드 이름.
    """
    grid: Grid
    values: np.ndarray
    ghost_y: int = 0
    name: str = "T"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        expected = (self.grid.nx, self.grid.ny + 2 * self.ghost_y)
        if self.values.shape != expected:
            raise FieldError(f"필드 형상 {self.values.shape} 이 격자 형상 {expected} 와 다릅니다")

    @property
    def interior(self) -> np.ndarray:
        if self.ghost_y == 0:
            return self.values
        return self.values[:, self.ghost_y:-self.ghost_y]

    def with_values(self, values: np.ndarray, grid: Optional[Grid] = None) -> "ScalarField":
        return ScalarField(grid=grid or self.grid, values=values, ghost_y=0, name=self.name)

    def copy(self) -> "ScalarField":
        return ScalarField(grid=self.grid, values=self.values.copy(), ghost_y=self.ghost_y, name=self.name)


# ---------------------------------------------------------------------------
# 유동
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TimeLaw:
    """시간 의존 전단 유동의 시간 법칙.

    pulsating:   u(t, y) = u0 sin(2 pi omega t) sin(2 pi n y / H)
    translating: u(t, y) = u0 sin(2 pi n (y - c t) / H)

    Attributes:
        kind (TimeLawKind): 시간 법칙 종류.
        u0 (float): 진폭.
        n (int): y 방향 파수.
        H (float): 띠 높이.
        rate (float): pulsating 이면 omega, translating 이면 c.
    """
    kind: TimeLawKind
    u0: float
    n: int
    H: float
    rate: float

    def shear_velocity(self, y: np.ndarray, t: float) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        k = 2.0 * math.pi * self.n / self.H
        if self.kind is TimeLawKind.PULSATING:
            return self.u0 * math.sin(2.0 * math.pi * self.rate * t) * np.sin(k * y)
        return self.u0 * np.sin(k * (y - self.rate * t))


@dataclass
class FlowField:
    """면(face) 중심에 샘플된 비압축 속도장.

    u1 은 x 면 (nx+1, ny), u2 는 y 면 (nx, ny+1) 에 저장합니다.
    time_law 가 있으면 u1 은 시간에 따라 TimeLaw 로 다시 계산됩니다.

    Attributes:
        grid (Grid): 소속 격자.
        u1_faces (np.ndarray): x 면 속도.
        u2_faces (np.ndarray): y 면 속도.
        provenance (FlowProvenance): 생성 경로.
        time_law (Optional[TimeLaw]): 시간 의존 전단 법칙.
        x_dependent (bool): 창 이동 시 재샘플이 필요한지 여부.
        label (str): 설명용 이름.
        grad_sup (float): ||grad u||_inf 의 추정값.
    """
    grid: Grid
    u1_faces: np.ndarray
    u2_faces: np.ndarray
    provenance: FlowProvenance
    time_law: Optional[TimeLaw] = None
    x_dependent: bool = False
    label: str = ""
    grad_sup: float = 0.0

    def faces_at(self, t: float) -> Tuple[np.ndarray, np.ndarray]:
        if self.time_law is None:
            return self.u1_faces, self.u2_faces
        row = self.time_law.shear_velocity(self.grid.y_centers, t)
        u1 = np.broadcast_to(row, (self.grid.nx + 1, self.grid.ny)).copy()
        return u1, np.zeros((self.grid.nx, self.grid.ny + 1))

    def at_time(self, t: float) -> "FlowField":
        u1, u2 = self.faces_at(t)
        return replace(self, u1_faces=u1, u2_faces=u2, time_law=None)

    @property
    def u1(self) -> np.ndarray:
        return 0.5 * (self.u1_faces[:-1, :] + self.u1_faces[1:, :])

    @property
    def u2(self) -> np.ndarray:
        return 0.5 * (self.u2_faces[:, :-1] + self.u2_faces[:, 1:])

    @property
    def u1_sup(self) -> float:
        if self.time_law is not None:
            return abs(self.time_law.u0)
        return float(np.max(np.abs(self.u1_faces))) if self.u1_faces.size else 0.0

    @property
    def u2_sup(self) -> float:
        return float(np.max(np.abs(self.u2_faces))) if self.u2_faces.size else 0.0

    @property
    def speed_sup(self) -> float:
        if self.time_law is not None:
            return abs(self.time_law.u0)
        return float(np.max(np.hypot(self.u1, self.u2)))


@dataclass(frozen=True)
class ShearProfile:
    """평균 0 인 전단 프로파일 u(y) (u = (u(y), 0)).

    Attributes:
        velocity (Callable): y -> u(y), 벡터화된 함수.
        H (float): 띠 높이 (주기).
        label (str): 이름.
        amplitude (float): 대표 진폭.
        wavenumber (Optional[int]): sine 프로파일이면 n.
    """
    velocity: Callable[[np.ndarray], np.ndarray]
    H: float
    label: str = "shear"
    amplitude: float = 0.0
    wavenumber: Optional[int] = None

    def __call__(self, y) -> np.ndarray:
        return np.asarray(self.velocity(np.asarray(y, dtype=float)), dtype=float)


@dataclass(frozen=True)
class StreamFunction:
    """격자 꼭짓점에서 샘플된 무차원 유선 함수 Psi.

    물리 유선 함수는 amplitude * length_scale * psi 입니다.

    Attributes:
        grid (Grid): 소속 격자.
        psi (np.ndarray): 형상 (nx+1, ny+1) 의 무차원 값.
        amplitude (float): U.
        length_scale (float): L_y.
        label (str): 이름.
    """
    grid: Grid
    psi: np.ndarray
    amplitude: float
    length_scale: float
    label: str = ""

    @property
    def physical(self) -> np.ndarray:
        return self.amplitude * self.length_scale * self.psi


@dataclass(frozen=True)
class TubeBand:
    """유선 함수 값 구간 [lo, hi] 로 정의되는 유선관 요청.

    Attributes:
        lo (float): 물리 Psi 하한.
        hi (float): 물리 Psi 상한.
        y_seed (Optional[float]): 한 열에 밴드가 두 번 나타날 때 고를 관의 y 위치.
    """
    lo: float
    hi: float
    y_seed: Optional[float] = None


@dataclass(frozen=True)
class Tube:
    """추출된 유선관 하나.

    Attributes:
        sign (int): +1 (u1 > 0 방향) 또는 -1.
        half_width (float): 유효 반폭 h_j.
        center (float): 관 중심의 평균 y.
        flux (float): 관을 지나는 유량.
        middle_half_flux (float): 관 가운데 절반을 지나는 유량.
    """
    sign: int
    half_width: float
    center: float
    flux: float
    middle_half_flux: float

    def to_dict(self) -> Dict[str, float]:
        return {
            "sign": self.sign,
            "half_width": self.half_width,
            "center": self.center,
            "flux": self.flux,
            "middle_half_flux": self.middle_half_flux,
        }


@dataclass(frozen=True)
class TubeGeometry:
    """퍼컬레이팅 유동의 유선관 집합과 상대 폭 m0.

    Attributes:
        tubes (Tuple[Tube, ...]): 유선관 목록.
        m0 (Optional[float]): mu_+ / mu_-.
        period (float): x 방향 주기 L.
        H (float): 띠 높이.
        metric_bound (float): 좌표 변환 계량 상수의 상한.
        flux_station_spread (float): 측정 위치별 유량 편차의 최대값.
    """
    tubes: Tuple[Tube, ...]
    m0: Optional[float]
    period: float
    H: float
    metric_bound: float = 1.0
    flux_station_spread: float = 0.0

    @property
    def plus(self) -> List[Tube]:
        return [t for t in self.tubes if t.sign > 0]

    @property
    def minus(self) -> List[Tube]:
        return [t for t in self.tubes if t.sign < 0]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tubes": [t.to_dict() for t in self.tubes],
            "m0": self.m0,
            "period": self.period,
            "H": self.H,
            "metric_bound": self.metric_bound,
            "flux_station_spread": self.flux_station_spread,
        }


# ---------------------------------------------------------------------------
# 반응 / 시뮬레이션
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReactionModel:
    """반응 항 (v0^2 / 4 kappa) f(T) 의 정의.

    Attributes:
        kind (ReactionKind): 반응 종류.
        v0 (float): 층류 전파 속도.
        kappa (float): 확산 계수.
        theta (float): ignition 임계값.
        activation (float): Arrhenius 활성화 상수 A.
        f (Optional[Callable]): kpp_general 의 사용자 f.
        df (Optional[Callable]): f' (선택).
        d2f (Optional[Callable]): f'' (선택).
    """
    kind: ReactionKind
    v0: float
    kappa: float
    theta: float = 0.0
    activation: float = 0.0
    f: Optional[Callable[[np.ndarray], np.ndarray]] = None
    df: Optional[Callable[[np.ndarray], np.ndarray]] = None
    d2f: Optional[Callable[[np.ndarray], np.ndarray]] = None

    @property
    def l(self) -> float:
        """층류 화염 두께 kappa / v0."""
        return self.kappa / self.v0

    @property
    def tau_c(self) -> float:
        """화학 시간 kappa / v0^2."""
        return self.kappa / self.v0 ** 2

    @property
    def rate(self) -> float:
        return self.v0 ** 2 / (4.0 * self.kappa)

    def echo(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "v0": self.v0, "kappa": self.kappa,
                "theta": self.theta, "activation": self.activation}


@dataclass(frozen=True)
class GridSpec:
    nx: int
    ny: int
    x_min: float
    x_length: float
    H: float
    bc_y: BoundaryCondition = BoundaryCondition.NEUMANN

    def build(self) -> Grid:
        return Grid.build(self.nx, self.ny, self.x_min, self.x_length, self.H, self.bc_y)

    def echo(self) -> Dict[str, Any]:
        return {"nx": self.nx, "ny": self.ny, "x_min": self.x_min,
                "x_length": self.x_length, "H": self.H, "bc_y": self.bc_y.value}


@dataclass(frozen=True)
class FlowSpec:
    """유동 생성 요청. 실제 FlowField 는 FlowService.build 가 만듭니다.

    Attributes:
        kind (FlowKind): 유동 종류.
        params (Dict[str, Any]): 종류별 파라미터 (u0, n, law, rate, w0, wavelength, m, U, Lx, Ly, a).
    """
    kind: FlowKind
    params: Dict[str, Any] = field(default_factory=dict)

    def param(self, key: str) -> Any:
        if key not in self.params:
            raise ConfigError(f"[flow] '{self.kind.value}' 유동에 '{key}' 값이 필요합니다")
        return self.params[key]

    def with_params(self, **updates: Any) -> "FlowSpec":
        merged = dict(self.params)
        merged.update(updates)
        return FlowSpec(kind=self.kind, params=merged)

    def echo(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, **self.params}


@dataclass(frozen=True)
class SimulationConfig:
    """단일 PDE 실행 설정.

    Attributes:
        grid (GridSpec): 격자 설정.
        reaction (ReactionModel): 반응 모델.
        flow (FlowSpec): 유동 설정.
        dt (float): 시간 간격.
        t_final (float): 종료 시각.
        window_policy (WindowPolicy): 계산 창 정책.
        snapshot_every (int): 진단 기록 간격 (스텝 수).
        x0 (float): 초기 전선 위치.
        lam (float): 초기 로지스틱 기울기.
        implicit_y (bool): y 확산을 음해법으로 풀지 여부.
        reaction_enabled (bool): 반응 항 사용 여부.
        x_far_field (Tuple[float, float]): 창 왼쪽/오른쪽 원방 값.
        label (str): 실행 이름.
    """
    grid: GridSpec
    reaction: ReactionModel
    flow: FlowSpec
    dt: float
    t_final: float
    window_policy: WindowPolicy
    snapshot_every: int
    x0: float
    lam: float
    implicit_y: bool = False
    reaction_enabled: bool = True
    x_far_field: Tuple[float, float] = (1.0, 0.0)
    label: str = "run"

    def echo(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "grid": self.grid.echo(),
            "reaction": self.reaction.echo(),
            "flow": self.flow.echo(),
            "dt": self.dt,
            "t_final": self.t_final,
            "window_policy": self.window_policy.value,
            "snapshot_every": self.snapshot_every,
            "x0": self.x0,
            "lambda": self.lam,
            "implicit_y": self.implicit_y,
            "reaction_enabled": self.reaction_enabled,
            "x_far_field": list(self.x_far_field),
        }


@dataclass
class SimulationState:
    """시뮬레이션 진행 상태.

    Attributes:
        field (ScalarField): 현재 T.
        t (float): 현재 시각.
        step_count (int): 누적 스텝 수.
        shifted_mass (float): 창 이동으로 빠져나간 열의 적분 (1/H 정규화).
        total_shift_cells (int): 누적 이동 셀 수.
    """
    field: ScalarField
    t: float
    step_count: int = 0
    shifted_mass: float = 0.0
    total_shift_cells: int = 0

    @property
    def window_origin(self) -> float:
        return self.field.grid.x_min


SERIES_COLUMNS = ["t", "V_reaction", "V_mass", "grad_sq", "reaction_gradient_product", "front_x"]


@dataclass
class BurningRateSeries:
    """기록 시각별 진단량 시계열.

    V_mass 는 finalize() 에서 연소 질량의 시간 미분으로 채워집니다.
    """
    times: List[float] = field(default_factory=list)
    v_reaction: List[float] = field(default_factory=list)
    v_mass: List[float] = field(default_factory=list)
    grad_sq: List[float] = field(default_factory=list)
    reaction_gradient_product: List[float] = field(default_factory=list)
    front_x: List[float] = field(default_factory=list)
    burned_mass: List[float] = field(default_factory=list)

    def append(self, t: float, v_reaction: float, grad_sq: float, reaction_gradient_product: float,
               front_x: float, burned_mass: float) -> None:
        self.times.append(float(t))
        self.v_reaction.append(float(v_reaction))
        self.grad_sq.append(float(grad_sq))
        self.reaction_gradient_product.append(float(reaction_gradient_product))
        self.front_x.append(float(front_x))
        self.burned_mass.append(float(burned_mass))

    def finalize(self) -> "BurningRateSeries":
        if len(self.times) >= 2:
            self.v_mass = list(np.gradient(np.asarray(self.burned_mass), np.asarray(self.times)))
        else:
            self.v_mass = [float("nan")] * len(self.times)
        return self

    def __len__(self) -> int:
        return len(self.times)

    def array(self, name: str) -> np.ndarray:
        return np.asarray(getattr(self, name), dtype=float)

    def to_dataframe(self) -> pd.DataFrame:
        if len(self.v_mass) != len(self.times):
            self.finalize()
        return pd.DataFrame({
            "t": self.times,
            "V_reaction": self.v_reaction,
            "V_mass": self.v_mass,
            "grad_sq": self.grad_sq,
            "reaction_gradient_product": self.reaction_gradient_product,
            "front_x": self.front_x,
        }, columns=SERIES_COLUMNS)


# ---------------------------------------------------------------------------
# 커널 / 분할 / 리포트
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelSpec:
    """국소화 커널 G(h, xi) 의 반폭 h."""
    h: float

    @property
    def mass(self) -> float:
        return self.h ** 3 / 4.0


class KernelEvaluation(tuple):
    """(value, out_of_support) 쌍."""

    def __new__(cls, value: float, out_of_support: bool):
        return super().__new__(cls, (value, out_of_support))

    @property
    def value(self) -> float:
        return self[0]

    @property
    def out_of_support(self) -> bool:
        return self[1]


@dataclass(frozen=True)
class TimeAverage:
    """시간 평균 결과. kernel 가중이면 normalized = raw * 32."""
    raw: float
    normalized: float
    weighting: Weighting


@dataclass(frozen=True)
class Interval:
    """중심 center, 반폭 half_width, 부호 sign 인 구간."""
    center: float
    half_width: float
    sign: int

    @property
    def lower(self) -> float:
        return self.center - self.half_width

    @property
    def upper(self) -> float:
        return self.center + self.half_width

    @property
    def middle_half(self) -> Tuple[float, float]:
        return self.center - 0.5 * self.half_width, self.center + 0.5 * self.half_width

    def weight(self, l: float) -> float:
        """h^3 / (h^2 + l^2)."""
        h = self.half_width
        return h ** 3 / (h ** 2 + l ** 2)

    def shrink_factor(self, l: float) -> float:
        """(1 + l^2 / h^2)^-1."""
        h = self.half_width
        return h ** 2 / (h ** 2 + l ** 2)

    def to_dict(self) -> Dict[str, float]:
        return {"center": self.center, "half_width": self.half_width, "sign": self.sign}


@dataclass(frozen=True)
class Partition:
    """[0, H] 의 서로 겹치지 않는 구간들과 부호 (D+ / D-).

    Attributes:
        intervals (Tuple[Interval, ...]): 구간 목록.
        H (float): 띠 높이.
        l (float): 층류 화염 두께.
    """
    intervals: Tuple[Interval, ...]
    H: float
    l: float

    def __post_init__(self):
        tol = GRID_TOLERANCE * max(self.H, 1.0) * 100
        ordered = sorted(self.intervals, key=lambda iv: iv.lower)
        for iv in ordered:
            if iv.half_width <= 0:
                raise PartitionError(f"구간 반폭은 양수여야 합니다: {iv}")
            if iv.sign not in (1, -1):
                raise PartitionError(f"구간 부호는 +1/-1 이어야 합니다: {iv}")
            if iv.lower < -tol or iv.upper > self.H + tol:
                raise PartitionError(f"구간이 [0, H] 를 벗어납니다: [{iv.lower}, {iv.upper}]")
        for a, b in zip(ordered, ordered[1:]):
            if a.upper > b.lower + tol:
                raise PartitionError(f"구간이 겹칩니다: [{a.lower}, {a.upper}] / [{b.lower}, {b.upper}]")
        object.__setattr__(self, "intervals", tuple(ordered))

    @property
    def plus(self) -> List[Interval]:
        return [iv for iv in self.intervals if iv.sign > 0]

    @property
    def minus(self) -> List[Interval]:
        return [iv for iv in self.intervals if iv.sign < 0]

    @property
    def is_empty(self) -> bool:
        return len(self.intervals) == 0

    @property
    def s_plus(self) -> float:
        return sum(iv.weight(self.l) for iv in self.plus)

    @property
    def s_minus(self) -> float:
        return sum(iv.weight(self.l) for iv in self.minus)

    @property
    def s_total(self) -> float:
        return self.s_plus + self.s_minus

    @property
    def c_plus(self) -> float:
        return self.s_minus / self.s_total if self.s_total > 0 else 0.0

    @property
    def c_minus(self) -> float:
        return self.s_plus / self.s_total if self.s_total > 0 else 0.0

    @property
    def g_weight_plus(self) -> float:
        """G 가중 원시 가중치 sum_{D-} int G(h_j) / (h_j^2 + l^2)."""
        return sum(iv.weight(self.l) / 4.0 for iv in self.minus)

    @property
    def g_weight_minus(self) -> float:
        return sum(iv.weight(self.l) / 4.0 for iv in self.plus)

    @property
    def normalizer(self) -> float:
        """가중치 정규화 상수 M = sum_all h^3 / (h^2 + l^2)."""
        return self.s_total

    @property
    def m0(self) -> float:
        if self.s_minus == 0:
            return math.inf if self.s_plus > 0 else math.nan
        return self.s_plus / self.s_minus

    def with_l(self, l: float) -> "Partition":
        return Partition(intervals=self.intervals, H=self.H, l=l)

    def to_dict(self) -> Dict[str, Any]:
        return {"H": self.H, "l": self.l, "intervals": [iv.to_dict() for iv in self.intervals]}


@dataclass
class BoundReport:
    """경계 평가 결과.

    Attributes:
        name (str): 경계 이름.
        core (float): 상수 C 를 제외한 핵심 값.
        units (str): 단위 ("velocity").
        tau0 (Optional[float]): 사용된 tau0.
        inputs (Dict[str, Any]): 입력 요약.
        caveats (List[str]): 주의 사항.
        extra (Dict[str, Any]): 부가 값 (닫힌 형태, 점근값 등).
    """
    name: str
    core: float
    units: str = "velocity"
    tau0: Optional[float] = None
    inputs: Dict[str, Any] = field(default_factory=dict)
    caveats: List[str] = field(default_factory=list)
    extra: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "core": self.core,
            "units": self.units,
            "tau0": self.tau0,
            "inputs": self.inputs,
            "caveats": list(self.caveats),
            "extra": self.extra,
        }


# ---------------------------------------------------------------------------
# 균질화
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CellProblem:
    """주기 셀 [0, Lx] x [0, Ly] 위의 셀 문제.

    u1_faces[i, j] 는 셀 (i, j) 의 왼쪽 면, u2_faces[i, j] 는 아래쪽 면 속도입니다.
    modulation 이 있으면 속도는 modulation(t) * u(x) 이며 주기는 period 입니다.
    """
    Lx: float
    Ly: float
    nx: int
    ny: int
    kappa: float
    u1_faces: np.ndarray
    u2_faces: np.ndarray
    period: Optional[float] = None
    modulation: Optional[Callable[[float], float]] = None
    label: str = "cell"

    @property
    def dx(self) -> float:
        return self.Lx / self.nx

    @property
    def dy(self) -> float:
        return self.Ly / self.ny

    @property
    def is_time_periodic(self) -> bool:
        return self.modulation is not None


@dataclass
class EffectiveTensor:
    """유효 확산 텐서 kappa*.

    Attributes:
        tensor (np.ndarray): 2x2 텐서.
        kappa (float): 분자 확산 계수.
        kstar (float): 대칭부의 최소 고유값.
        residuals (List[float]): 각 셀 문제의 최종 잔차.
        v0_star (Optional[float]): v0 sqrt(k*/kappa).
    """
    tensor: np.ndarray
    kappa: float
    kstar: float
    residuals: List[float] = field(default_factory=list)
    v0_star: Optional[float] = None

    @property
    def symmetric(self) -> np.ndarray:
        return 0.5 * (self.tensor + self.tensor.T)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kappa": self.kappa,
            "kstar_tensor": self.tensor.tolist(),
            "kstar_min": self.kstar,
            "v0_star": self.v0_star,
            "residuals": list(self.residuals),
        }


# ---------------------------------------------------------------------------
# 실험
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SolverSettings:
    dt: float
    t_final: float
    window_policy: WindowPolicy
    snapshot_every: int
    x0: float
    lam: float
    implicit_y: bool = False
    checkpoint_every: Optional[int] = None


@dataclass(frozen=True)
class CellSettings:
    nx: int
    ny: int
    Lx: float
    Ly: float


@dataclass(frozen=True)
class ExperimentSpec:
    """TOML 실험 문서에서 읽은 실험 정의.

    Attributes:
        name (str): 실험 이름 (출력 폴더명).
        preset (Preset): 프리셋.
        grid (GridSpec): 격자 (homogenize 프리셋은 None).
        reaction (ReactionModel): 반응 모델.
        flow (FlowSpec): 기준 유동 (진폭은 sweep 값으로 덮어씀).
        solver (SolverSettings): 시간 적분 설정 (homogenize 프리셋은 None).
        amplitudes (Tuple[float, ...]): 스윕 값 (v0 단위 진폭 또는 tau0*omega).
        averaging_multiple (float): 평균 창 tau = averaging_multiple * tau0.
        average_start (float): 평균 시작 시각.
        bands (Tuple[TubeBand, ...]): 퍼컬레이팅 유선관 밴드.
        cell (Optional[CellSettings]): 균질화 셀 해상도.
        partition_budget (int): optimize_partition 의 분할 예산.
    """
    name: str
    preset: Preset
    grid: Optional[GridSpec]
    reaction: ReactionModel
    flow: FlowSpec
    solver: Optional[SolverSettings]
    amplitudes: Tuple[float, ...] = ()
    averaging_multiple: float = 4.0
    average_start: float = 0.0
    bands: Tuple[TubeBand, ...] = ()
    cell: Optional[CellSettings] = None
    partition_budget: int = 4


@dataclass
class RunPlan:
    """스윕의 한 점."""
    label: str
    amplitude: float
    config: Optional[SimulationConfig]


@dataclass
class RunResult:
    """한 실행의 결과와 경계 리포트.

    Attributes:
        plan (RunPlan): 실행 계획.
        series (Optional[BurningRateSeries]): 진단 시계열 (bounds 전용 모드면 None).
        final_state (Optional[SimulationState]): 최종 상태.
        measured (float): 측정된 평균 연소율.
        tau0 (float): 사용된 tau0.
        tau (float): 평균 창 길이.
        reports (List[BoundReport]): 경계 리포트.
        checks (Dict[str, Any]): 수용 검사 결과.
        error (Optional[str]): 실패 메시지.
        under_resolved (bool): 해상도 정책 위반 여부.
    """
    plan: RunPlan
    series: Optional[BurningRateSeries] = None
    final_state: Optional[SimulationState] = None
    measured: float = math.nan
    tau0: float = math.nan
    tau: float = math.nan
    reports: List[BoundReport] = field(default_factory=list)
    checks: Dict[str, Any] = field(default_factory=dict)
    error: Optional[str] = None
    under_resolved: bool = False

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def primary_bound(self) -> float:
        return self.reports[0].core if self.reports else math.nan


@dataclass(frozen=True)
class HTilde:
    """g(y) = nu+[0, y] - nu-[0, y] 의 이웃한 근 사이 최대 간격.

    Attributes:
        value (float): H~ (g 가 0 이면 0).
        degenerate (bool): g 가 항등적으로 0 인지 여부.
        roots (Tuple[float, ...]): 찾은 근.
    """
    value: float
    degenerate: bool
    roots: Tuple[float, ...] = ()


@dataclass
class CellSolution:
    """셀 문제의 해 theta_1, theta_2.

    시간 주기 문제이면 마지막 주기의 이력과 시각도 함께 담습니다.

    Attributes:
        theta1 (np.ndarray): (nx, ny) 평균 0 인 theta_1.
        theta2 (np.ndarray): (nx, ny) 평균 0 인 theta_2.
        residuals (List[float]): 각 성분의 최종 잔차.
        history1 (Optional[np.ndarray]): (steps, nx, ny) 마지막 주기의 theta_1.
        history2 (Optional[np.ndarray]): (steps, nx, ny) 마지막 주기의 theta_2.
        times (Optional[np.ndarray]): 이력의 시각.
    """
    theta1: np.ndarray
    theta2: np.ndarray
    residuals: List[float] = field(default_factory=list)
    history1: Optional[np.ndarray] = None
    history2: Optional[np.ndarray] = None
    times: Optional[np.ndarray] = None

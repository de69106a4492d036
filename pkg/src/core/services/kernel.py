"""국소화 커널 G(h, xi) 와 그 원시함수.

G(h, xi) = 1/2 (h - |xi|)^2 - (h/2 - |xi|)^2   (|xi| < h/2)
         = 1/2 (h - |xi|)^2                      (h/2 <= |xi| <= h)
         = 0                                     (|xi| > h)
"""
import numpy as np


def kernel_values(h: float, xi) -> np.ndarray:
    """G(h, xi) 를 배열로 평가합니다. 지지 구간 밖은 0."""
    a = np.abs(np.asarray(xi, dtype=float))
    outer = 0.5 * (h - a) ** 2
    inner = outer - (0.5 * h - a) ** 2
    return np.where(a < 0.5 * h, inner, np.where(a <= h, outer, 0.0))


def kernel_cdf(h: float, xi) -> np.ndarray:
    """int_{-h}^{xi} G(h, s) ds 의 닫힌 형태. 전체 질량은 h^3 / 4."""
    s = np.clip(np.asarray(xi, dtype=float), -h, h)
    left = np.minimum(s, 0.0)
    lower = np.where(
        left <= -0.5 * h,
        (h + left) ** 3 / 6.0,
        (h + left) ** 3 / 6.0 - (0.5 * h + left) ** 3 / 3.0,
    )
    right = np.maximum(s, 0.0)
    mirror = -right
    mirrored = np.where(
        mirror <= -0.5 * h,
        (h + mirror) ** 3 / 6.0,
        (h + mirror) ** 3 / 6.0 - (0.5 * h + mirror) ** 3 / 3.0,
    )
    upper_part = h ** 3 / 8.0 - mirrored
    return np.where(s <= 0.0, lower, h ** 3 / 8.0 + upper_part)

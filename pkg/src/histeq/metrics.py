"""Full-reference image quality metrics.

The first argument is always the reference (original) image. ``psnr`` and
``snr`` return ``math.inf`` for error-free pairs rather than raising, since
comparing identical images is legitimate. Metrics that have no defined value
for a pair raise :class:`UndefinedMetricError`; :func:`full_report` records
those as ``None``.

Note that MSE, RMSE and MAE are lower-is-better.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .core import MAX_LEVEL, GrayImage, require_same_shape

PEAK = float(MAX_LEVEL)


class UndefinedMetricError(ArithmeticError):
    """The metric has no value for this pair (zero variance, zero power...)."""


def _pair(a: GrayImage, b: GrayImage) -> tuple[np.ndarray, np.ndarray]:
    require_same_shape(a, b)
    return a.pixels.astype(np.float64).ravel(), b.pixels.astype(np.float64).ravel()


def mse(a: GrayImage, b: GrayImage) -> float:
    x, y = _pair(a, b)
    return float(np.mean((x - y) ** 2))


def rmse(a: GrayImage, b: GrayImage) -> float:
    return math.sqrt(mse(a, b))


def mae(a: GrayImage, b: GrayImage) -> float:
    x, y = _pair(a, b)
    return float(np.mean(np.abs(x - y)))


def psnr(a: GrayImage, b: GrayImage) -> float:
    """Peak signal-to-noise ratio in dB with peak 255; ``inf`` when ``a == b``."""
    err = mse(a, b)
    if err == 0:
        return math.inf
    return 10.0 * math.log10(PEAK**2 / err)


def snr(a: GrayImage, b: GrayImage) -> float:
    """Signal-to-noise ratio in dB: power of ``a`` over power of ``b - a``."""
    x, y = _pair(a, b)
    signal = float(np.sum(x**2))
    noise = float(np.sum((y - x) ** 2))
    if noise == 0:
        if signal == 0:
            raise UndefinedMetricError("undefined SNR")
        return math.inf
    if signal == 0:
        return -math.inf
    return 10.0 * math.log10(signal / noise)


def pcc(a: GrayImage, b: GrayImage) -> float:
    """Pearson correlation of the two pixel sequences."""
    x, y = _pair(a, b)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0 or syy == 0:
        raise UndefinedMetricError("undefined correlation")
    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def _window_sums(px: np.ndarray, window: int) -> np.ndarray:
    integral = np.zeros((px.shape[0] + 1, px.shape[1] + 1), dtype=np.int64)
    integral[1:, 1:] = px.cumsum(0).cumsum(1)
    k = window
    return integral[k:, k:] - integral[:-k, k:] - integral[k:, :-k] + integral[:-k, :-k]


def uiq(a: GrayImage, b: GrayImage, window: int = 8) -> float:
    """Universal image quality index, averaged over all ``window x window``
    positions at stride 1.

    Windows whose index denominator is zero are skipped.
    """
    require_same_shape(a, b)
    if window < 1:
        raise ValueError("window must be >= 1")
    if min(a.width, a.height) < window:
        raise UndefinedMetricError(
            f"UIQ undefined: image {a.width}x{a.height} smaller than {window}x{window} window"
        )
    x = a.pixels.astype(np.int64)
    y = b.pixels.astype(np.int64)
    n = window * window
    # integer window sums are exact; only the final ratio is floating point
    sx = _window_sums(x, window)
    sy = _window_sums(y, window)
    sxx = _window_sums(x * x, window)
    syy = _window_sums(y * y, window)
    sxy = _window_sums(x * y, window)
    cov = (n * sxy - sx * sy).astype(np.float64)
    var_sum = (n * sxx - sx * sx + n * syy - sy * sy).astype(np.float64)
    mean_sq = (sx * sx + sy * sy).astype(np.float64)
    denom = var_sum * mean_sq
    valid = denom != 0
    if not valid.any():
        raise UndefinedMetricError("UIQ undefined: every window is degenerate")
    q = 4.0 * cov[valid] * sx[valid].astype(np.float64) * sy[valid] / denom[valid]
    return float(q.mean())


METRIC_NAMES = ("psnr", "mse", "rmse", "uiq", "pcc", "snr", "mae")
# Header labels in the paper's comparison-table order; "PPC" is its label for PCC.
TABLE_LABELS = ("PSNR", "MSE", "RMSE", "UIQ", "PPC", "SNR", "MAE")


@dataclass(frozen=True)
class MetricReport:
    psnr: Optional[float]
    mse: Optional[float]
    rmse: Optional[float]
    uiq: Optional[float]
    pcc: Optional[float]
    snr: Optional[float]
    mae: Optional[float]

    def as_dict(self) -> dict:
        return asdict(self)

    def values(self) -> tuple:
        return tuple(getattr(self, name) for name in METRIC_NAMES)


def full_report(original: GrayImage, enhanced: GrayImage, uiq_window: int = 8) -> MetricReport:
    """All seven metrics; undefined ones are ``None``, never zero."""
    require_same_shape(original, enhanced)

    def attempt(fn, *args):
        try:
            return fn(original, enhanced, *args)
        except UndefinedMetricError:
            return None

    return MetricReport(
        psnr=attempt(psnr),
        mse=attempt(mse),
        rmse=attempt(rmse),
        uiq=attempt(uiq, uiq_window),
        pcc=attempt(pcc),
        snr=attempt(snr),
        mae=attempt(mae),
    )


def format_value(value: Optional[float], precision: Optional[int] = None) -> str:
    """Render a metric cell: ``inf``/``-inf`` for infinite dB, ``undefined`` for None.

    Without ``precision`` the shortest round-tripping repr is used.
    """
    if value is None:
        return "undefined"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if precision is None:
        return repr(float(value))
    return f"{value:.{precision}f}"

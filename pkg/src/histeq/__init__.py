"""Grayscale contrast enhancement by histogram equalization.

Five variants (CHE, AHE, BHE, RMSHE, MDHE), seven full-reference quality
metrics, PGM/PNG I/O and a small CLI.
"""

from .core import (
    GrayImage,
    Histogram,
    Cdf,
    IntensityMap,
    TileGrid,
    apply_map,
    compute_cdf,
    compute_histogram,
    decompose,
    mean_intensity,
    reassemble,
)
from .equalize import (
    AheConfig,
    MdheConfig,
    ahe,
    bhe,
    che,
    mdhe,
    preserve_brightness,
    range_equalize,
    rmshe,
)
from .metrics import MetricReport, UndefinedMetricError, full_report, mae, mse, pcc, psnr, rmse, snr, uiq
from .imageio import ImageFormat, load_image, save_image

__version__ = "0.1.0"

"""Histogram-equalization variants: CHE, BHE, RMSHE, AHE and MDHE.

All variants share one kernel, :func:`range_equalize`: the population inside
``[lo, hi]`` is remapped so each level goes to the smallest output level whose
uniform target CDF ``(k - lo + 1) / (hi - lo + 1)`` reaches the empirical CDF
at that level. A population that is already uniform over the range maps to
itself, and the map is monotone.

MDHE note: per-tile full-range equalization (CHE inside each tile) is used for
the second step. Running AHE inside an already-local tile adds nothing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    LEVELS,
    MAX_LEVEL,
    GrayImage,
    IntensityMap,
    apply_map,
    compute_histogram,
    decompose,
    mean_intensity,
    reassemble,
    require_same_shape,
    round_half_away,
    tile_grid_from,
    uniform_quantile_map,
)

MAX_RMSHE_DEPTH = 7


@dataclass(frozen=True)
class AheConfig:
    tile_rows: int = 8
    tile_cols: int = 8
    clip_limit: Optional[float] = None

    def __post_init__(self):
        if self.tile_rows < 1 or self.tile_cols < 1:
            raise ValueError("tile grid must be at least 1x1")
        if self.clip_limit is not None and not self.clip_limit > 1.0:
            raise ValueError("clip_limit must be > 1.0")


@dataclass(frozen=True)
class MdheConfig:
    grid_rows: int = 8
    grid_cols: int = 8
    brightness_limit: float = 10.0
    blend_tiles: bool = False

    def __post_init__(self):
        if self.grid_rows < 1 or self.grid_cols < 1:
            raise ValueError("grid must be at least 1x1")
        if not 0.0 <= self.brightness_limit <= 255.0:
            raise ValueError("brightness_limit must lie in [0, 255]")


def _check_depth(depth: int) -> int:
    depth = int(depth)
    if not 0 <= depth <= MAX_RMSHE_DEPTH:
        raise ValueError(f"rmshe depth must lie in [0, {MAX_RMSHE_DEPTH}], got {depth}")
    return depth


def _equalize_into(lut: np.ndarray, counts: np.ndarray, lo: int, hi: int) -> None:
    # empty sub-population: leave lut identity on [lo, hi]
    if counts[lo : hi + 1].sum() == 0:
        return
    masked = np.zeros(LEVELS, dtype=np.int64)
    masked[lo : hi + 1] = counts[lo : hi + 1]
    lut[lo : hi + 1] = uniform_quantile_map(masked, lo, hi)[lo : hi + 1]


def _floor_mean(counts: np.ndarray, lo: int, hi: int) -> int:
    sub = counts[lo : hi + 1]
    return int((np.arange(lo, hi + 1, dtype=np.int64) * sub).sum() // sub.sum())


def _mean_split_map(counts: np.ndarray, depth: int) -> np.ndarray:
    lut = np.arange(LEVELS, dtype=np.int64)

    def recurse(lo: int, hi: int, level: int) -> None:
        if counts[lo : hi + 1].sum() == 0:
            return
        if level == 0:
            _equalize_into(lut, counts, lo, hi)
            return
        m = _floor_mean(counts, lo, hi)
        recurse(lo, m, level - 1)
        if m < hi:
            recurse(m + 1, hi, level - 1)

    recurse(0, MAX_LEVEL, depth)
    return lut


def equalization_map(img: GrayImage, range_low: int = 0, range_high: int = MAX_LEVEL) -> IntensityMap:
    counts = compute_histogram(img).counts
    lut = np.arange(LEVELS, dtype=np.int64)
    _equalize_into(lut, counts, range_low, range_high)
    return IntensityMap(lut)


def range_equalize(img: GrayImage, range_low: int, range_high: int) -> GrayImage:
    """Equalize ``img`` within ``[range_low, range_high]``.

    Every pixel must already lie inside the range.
    """
    if not 0 <= range_low <= range_high <= MAX_LEVEL:
        raise ValueError(f"invalid intensity range [{range_low}, {range_high}]")
    px = img.pixels
    if px.min() < range_low or px.max() > range_high:
        raise ValueError("image has pixels outside the equalization range")
    return apply_map(img, equalization_map(img, range_low, range_high))


def che(img: GrayImage) -> GrayImage:
    """Classical histogram equalization over the full 0..255 range."""
    return range_equalize(img, 0, MAX_LEVEL)


def bhe(img: GrayImage) -> GrayImage:
    """Bi-histogram equalization split at ``m = floor(mean)``.

    Pixels ``<= m`` are equalized over ``[0, m]``, the rest over ``[m+1, 255]``.
    """
    counts = compute_histogram(img).counts
    m = int(img.pixels.sum(dtype=np.int64) // img.size)
    lut = np.arange(LEVELS, dtype=np.int64)
    _equalize_into(lut, counts, 0, m)
    if m < MAX_LEVEL:
        _equalize_into(lut, counts, m + 1, MAX_LEVEL)
    return apply_map(img, IntensityMap(lut))


def rmshe(img: GrayImage, depth: int = 2) -> GrayImage:
    """Recursive mean-separate equalization: ``depth`` rounds of mean splits
    give up to ``2**depth`` sub-ranges, each equalized on its own."""
    depth = _check_depth(depth)
    counts = compute_histogram(img).counts
    return apply_map(img, IntensityMap(_mean_split_map(counts, depth)))


def clip_histogram(counts: np.ndarray, clip_limit: float) -> np.ndarray:
    """Clip bins at ``clip_limit`` times the uniform bin height and hand the
    excess back evenly over all bins (one pass; the sub-256 remainder is dropped)."""
    counts = np.asarray(counts, dtype=np.int64)
    cap = max(1, int(np.floor(clip_limit * counts.sum() / LEVELS)))
    excess = int(np.maximum(counts - cap, 0).sum())
    return np.minimum(counts, cap) + excess // LEVELS


def _tile_map(tile: GrayImage, clip_limit: Optional[float] = None) -> np.ndarray:
    counts = compute_histogram(tile).counts
    if clip_limit is not None:
        counts = clip_histogram(counts, clip_limit)
    return uniform_quantile_map(counts, 0, MAX_LEVEL)


def ahe(img: GrayImage, cfg: AheConfig = AheConfig()) -> GrayImage:
    """Adaptive equalization: every tile of the grid is equalized on its own
    histogram, then tiles are put back in place."""
    grid = decompose(img, cfg.tile_rows, cfg.tile_cols)
    tiles = [
        GrayImage(_tile_map(t, cfg.clip_limit)[t.pixels]) for t in grid.tiles
    ]
    return reassemble(tile_grid_from(tiles, grid))


def _blend_tile_maps(img: GrayImage, grid, luts: np.ndarray) -> GrayImage:
    """Bilinear interpolation of tile maps between the four nearest tile centres."""
    ys, xs = grid.offsets()
    cy = np.asarray(ys, dtype=np.float64) + (np.asarray(grid.tile_heights) - 1) / 2.0
    cx = np.asarray(xs, dtype=np.float64) + (np.asarray(grid.tile_widths) - 1) / 2.0

    def axis_weights(n: int, centres: np.ndarray):
        pos = np.arange(n, dtype=np.float64)
        i0 = np.clip(np.searchsorted(centres, pos, side="right") - 1, 0, len(centres) - 1)
        i1 = np.minimum(i0 + 1, len(centres) - 1)
        gap = centres[i1] - centres[i0]
        w = np.where(gap > 0, (pos - centres[i0]) / np.where(gap > 0, gap, 1.0), 0.0)
        return i0, i1, np.clip(w, 0.0, 1.0)

    r0, r1, wy = axis_weights(img.height, cy)
    c0, c1, wx = axis_weights(img.width, cx)
    v = img.pixels.astype(np.intp)
    R0, R1 = r0[:, None], r1[:, None]
    C0, C1 = c0[None, :], c1[None, :]
    WY, WX = wy[:, None], wx[None, :]
    top = (1 - WX) * luts[R0, C0, v] + WX * luts[R0, C1, v]
    bottom = (1 - WX) * luts[R1, C0, v] + WX * luts[R1, C1, v]
    out = round_half_away((1 - WY) * top + WY * bottom)
    return GrayImage(np.clip(out, 0, MAX_LEVEL).astype(np.uint8))


def brightness_shift(enhanced: GrayImage, original: GrayImage, limit: float) -> int:
    """Integer offset :func:`preserve_brightness` subtracts from ``enhanced``:
    the mean drift in excess of ``limit``, rounded half away from zero."""
    require_same_shape(enhanced, original)
    if not 0.0 <= limit <= 255.0:
        raise ValueError("brightness limit must lie in [0, 255]")
    drift = mean_intensity(enhanced) - mean_intensity(original)
    if abs(drift) <= limit:
        return 0
    return int(round_half_away(np.sign(drift) * (abs(drift) - limit)))


def preserve_brightness(enhanced: GrayImage, original: GrayImage, limit: float) -> GrayImage:
    """Pull the mean of ``enhanced`` back toward that of ``original``.

    If the mean drift exceeds ``limit``, a single integer offset removes the
    excess from every pixel (clamped to 0..255).
    """
    shift = brightness_shift(enhanced, original, limit)
    if shift == 0:
        return enhanced
    out = np.clip(enhanced.pixels.astype(np.int16) - shift, 0, MAX_LEVEL)
    return GrayImage(out.astype(np.uint8))


def mdhe(img: GrayImage, cfg: MdheConfig = MdheConfig()) -> GrayImage:
    """Multi-decomposition equalization.

    Decompose into a tile grid, equalize each tile, reassemble (or blend tile
    maps when ``cfg.blend_tiles``), then limit the global brightness drift.
    """
    grid = decompose(img, cfg.grid_rows, cfg.grid_cols)
    if cfg.blend_tiles:
        luts = np.stack([_tile_map(t) for t in grid.tiles]).reshape(grid.rows, grid.cols, LEVELS)
        joined = _blend_tile_maps(img, grid, luts)
    else:
        tiles = [GrayImage(_tile_map(t)[t.pixels]) for t in grid.tiles]
        joined = reassemble(tile_grid_from(tiles, grid))
    return preserve_brightness(joined, img, cfg.brightness_limit)


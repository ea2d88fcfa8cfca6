"""Image, histogram, CDF, lookup-table and tiling primitives.

Every equalization variant in :mod:`histeq.equalize` is assembled from the
pieces defined here. All value types are immutable once built: the numpy
buffers they hold are flagged read-only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

LEVELS = 256
MAX_LEVEL = LEVELS - 1


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    if arr.flags.writeable:
        arr = arr.copy()
        arr.flags.writeable = False
    return arr


def round_half_away(x):
    """Round to the nearest integer, ties away from zero (scalar or array)."""
    x = np.asarray(x, dtype=np.float64)
    out = np.sign(x) * np.floor(np.abs(x) + 0.5)
    return float(out) if out.ndim == 0 else out


class GrayImage:
    """An 8-bit grayscale image stored as a read-only ``(height, width)`` array."""

    __slots__ = ("_pixels",)

    def __init__(self, pixels):
        arr = np.asarray(pixels)
        if arr.ndim != 2:
            raise ValueError(f"image must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"image dimensions must be >= 1, got {arr.shape}")
        if arr.dtype != np.uint8:
            if arr.dtype.kind not in "iub":
                if not np.all(np.isfinite(arr)) or not np.all(arr == np.floor(arr)):
                    raise ValueError("pixel values must be integers")
            if arr.size and (arr.min() < 0 or arr.max() > MAX_LEVEL):
                raise ValueError("pixel values must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        self._pixels = _frozen(arr)

    @classmethod
    def from_values(cls, width: int, height: int, values: Iterable[int]) -> "GrayImage":
        """Build an image from a row-major sequence of ``width * height`` values."""
        flat = np.asarray(list(values))
        if flat.size != width * height:
            raise ValueError(
                f"expected {width * height} pixel values for {width}x{height}, got {flat.size}"
            )
        return cls(flat.reshape(height, width))

    @property
    def pixels(self) -> np.ndarray:
        return self._pixels

    @property
    def width(self) -> int:
        return self._pixels.shape[1]

    @property
    def height(self) -> int:
        return self._pixels.shape[0]

    @property
    def size(self) -> int:
        return self._pixels.size

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return np.array_equal(self._pixels, other._pixels)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self):
        return f"GrayImage({self.width}x{self.height})"


@dataclass(frozen=True, eq=False)
class Histogram:
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (LEVELS,):
            raise ValueError(f"histogram needs {LEVELS} bins, got shape {counts.shape}")
        if np.any(counts < 0):
            raise ValueError("histogram counts must be non-negative")
        object.__setattr__(self, "counts", _frozen(counts))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def probabilities(self) -> np.ndarray:
        total = self.total
        if total == 0:
            return np.zeros(LEVELS)
        return self.counts / total


@dataclass(frozen=True, eq=False)
class Cdf:
    values: np.ndarray
    range_low: int
    range_high: int


@dataclass(frozen=True, eq=False)
class IntensityMap:
    """256-entry lookup table. Equalization maps are monotone; arbitrary tables
    (e.g. negation) are allowed for :func:`apply_map`."""

    table: np.ndarray

    def __post_init__(self):
        table = np.asarray(self.table)
        if table.shape != (LEVELS,):
            raise ValueError(f"intensity map needs {LEVELS} entries, got shape {table.shape}")
        if table.min() < 0 or table.max() > MAX_LEVEL:
            raise ValueError("intensity map entries must lie in [0, 255]")
        object.__setattr__(self, "table", _frozen(table.astype(np.uint8)))

    @classmethod
    def identity(cls) -> "IntensityMap":
        return cls(np.arange(LEVELS))

    @property
    def is_monotone(self) -> bool:
        return bool(np.all(np.diff(self.table.astype(np.int16)) >= 0))


@dataclass(frozen=True, eq=False)
class TileGrid:
    rows: int
    cols: int
    tiles: tuple
    tile_widths: tuple
    tile_heights: tuple
    source_width: int
    source_height: int

    def tile(self, r: int, c: int) -> GrayImage:
        return self.tiles[r * self.cols + c]

    def offsets(self) -> tuple[list[int], list[int]]:
        """Top-left pixel coordinates of each tile row and column."""
        ys = np.concatenate(([0], np.cumsum(self.tile_heights)[:-1])).tolist()
        xs = np.concatenate(([0], np.cumsum(self.tile_widths)[:-1])).tolist()
        return ys, xs


def compute_histogram(img: GrayImage) -> Histogram:
    return Histogram(np.bincount(img.pixels.ravel(), minlength=LEVELS))


def compute_cdf(h: Histogram, range_low: int = 0, range_high: int = MAX_LEVEL) -> Cdf:
    """Empirical CDF of the counts in ``[range_low, range_high]``.

    Levels below ``range_low`` read 0; levels above ``range_high`` read 1.
    Raises ``ValueError("empty histogram range")`` if no counts fall in range.
    """
    if not 0 <= range_low <= range_high <= MAX_LEVEL:
        raise ValueError(f"invalid intensity range [{range_low}, {range_high}]")
    counts = h.counts
    outside = counts[:range_low].sum() + counts[range_high + 1 :].sum()
    if outside:
        raise ValueError("histogram has counts outside the requested range")
    cum = np.cumsum(counts)
    total = int(cum[-1])
    if total == 0:
        raise ValueError("empty histogram range")
    values = cum / total
    values[range_high:] = 1.0
    return Cdf(_frozen(values), range_low, range_high)


def uniform_quantile_map(counts: np.ndarray, range_low: int, range_high: int) -> np.ndarray:
    """Level map sending each level to the smallest output level whose uniform
    target CDF ``(k - lo + 1) / (hi - lo + 1)`` reaches the empirical CDF.

    ``counts`` may hold mass only inside ``[range_low, range_high]``. Computed in
    exact integer arithmetic. Entries outside the range are the identity;
    empty levels below the first populated one map to ``range_low``.
    Raises ``ValueError`` on an empty population.
    """
    counts = np.asarray(counts, dtype=np.int64)
    lut = np.arange(LEVELS, dtype=np.int64)
    sub = counts[range_low : range_high + 1]
    total = int(sub.sum())
    if total == 0:
        raise ValueError("empty histogram range")
    span = range_high - range_low + 1
    cum = np.cumsum(sub)
    # ceil(span * cum / total) - 1, exact; unpopulated leading levels pin to range_low
    lut[range_low : range_high + 1] = range_low + np.maximum((span * cum + total - 1) // total - 1, 0)
    return lut


def apply_map(img: GrayImage, mapping: IntensityMap) -> GrayImage:
    return GrayImage(mapping.table[img.pixels])


def mean_intensity(img: GrayImage) -> float:
    return float(img.pixels.mean(dtype=np.float64))


def _split_lengths(total: int, parts: int) -> list[int]:
    base = total // parts
    lengths = [base] * parts
    lengths[-1] += total - base * parts
    return lengths


def decompose(img: GrayImage, rows: int, cols: int) -> TileGrid:
    """Split ``img`` into a ``rows x cols`` grid; remainder pixels go to the last
    row/column of tiles."""
    if rows < 1 or cols < 1:
        raise ValueError("grid rows and cols must be >= 1")
    if rows > img.height or cols > img.width:
        raise ValueError("grid exceeds image dimensions")
    heights = _split_lengths(img.height, rows)
    widths = _split_lengths(img.width, cols)
    tiles = []
    y = 0
    for h in heights:
        x = 0
        for w in widths:
            tiles.append(GrayImage(img.pixels[y : y + h, x : x + w]))
            x += w
        y += h
    return TileGrid(rows, cols, tuple(tiles), tuple(widths), tuple(heights), img.width, img.height)


def reassemble(grid: TileGrid) -> GrayImage:
    """Place every tile back at its grid position."""
    _check_grid(grid)
    out = np.empty((grid.source_height, grid.source_width), dtype=np.uint8)
    ys, xs = grid.offsets()
    for r in range(grid.rows):
        for c in range(grid.cols):
            h, w = grid.tile_heights[r], grid.tile_widths[c]
            out[ys[r] : ys[r] + h, xs[c] : xs[c] + w] = grid.tile(r, c).pixels
    return GrayImage(out)


def _check_grid(grid: TileGrid) -> None:
    ok = (
        grid.rows >= 1
        and grid.cols >= 1
        and len(grid.tiles) == grid.rows * grid.cols
        and len(grid.tile_widths) == grid.cols
        and len(grid.tile_heights) == grid.rows
        and sum(grid.tile_widths) == grid.source_width
        and sum(grid.tile_heights) == grid.source_height
    )
    if ok:
        for r in range(grid.rows):
            for c in range(grid.cols):
                t = grid.tile(r, c)
                if (t.width, t.height) != (grid.tile_widths[c], grid.tile_heights[r]):
                    ok = False
                    break
    if not ok:
        raise ValueError("malformed tile grid")


def require_same_shape(a: GrayImage, b: GrayImage) -> None:
    if a.pixels.shape != b.pixels.shape:
        raise ValueError(
            f"image dimension mismatch: {a.width}x{a.height} vs {b.width}x{b.height}"
        )


def tile_grid_from(tiles: Sequence[GrayImage], like: TileGrid) -> TileGrid:
    """A grid with ``like``'s geometry holding replacement ``tiles``."""
    return TileGrid(
        like.rows, like.cols, tuple(tiles), like.tile_widths, like.tile_heights,
        like.source_width, like.source_height,
    )

"""Command-line entry point: ``histeq enhance | hist | compare``.

Exit codes: 0 success, 1 runtime or I/O error, 2 usage error.
Diagnostics go to stderr; stdout carries only requested data.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path

import click

from .core import LEVELS, GrayImage, compute_histogram
from .equalize import AheConfig, MdheConfig, ahe, bhe, che, mdhe, rmshe
from .imageio import ImageReadError, format_for_path, load_image, save_image
from .metrics import METRIC_NAMES, TABLE_LABELS, MetricReport, format_value, full_report

METHODS = ("che", "ahe", "bhe", "rmshe", "mdhe")
# row order of the comparison report
COMPARE_ORDER = ("che", "bhe", "rmshe", "ahe", "mdhe")


class GridType(click.ParamType):
    name = "RxC"

    def convert(self, value, param, ctx):
        if isinstance(value, tuple):
            return value
        try:
            rows, cols = (int(part) for part in str(value).lower().split("x"))
        except ValueError:
            self.fail(f"{value!r} is not of the form RxC (e.g. 8x8)", param, ctx)
        if rows < 1 or cols < 1:
            self.fail(f"grid {value!r} must be at least 1x1", param, ctx)
        return rows, cols


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _load(path: str) -> GrayImage:
    try:
        return load_image(path)
    except ImageReadError as exc:
        _fail(str(exc))


def _save(img: GrayImage, path: Path) -> None:
    try:
        save_image(img, path, format_for_path(path))
    except OSError as exc:
        _fail(f"cannot write {path}: {exc.strerror or exc}")


def _check_grid(img: GrayImage, grid) -> None:
    rows, cols = grid
    if rows > img.height or cols > img.width:
        raise click.UsageError(
            f"grid exceeds image dimensions ({rows}x{cols} grid on {img.width}x{img.height} image)"
        )


def run_method(img: GrayImage, method: str, *, depth: int = 2, grid=(8, 8),
               brightness_limit: float = 10.0, clip_limit=None, blend: bool = False) -> GrayImage:
    rows, cols = grid
    if method in ("ahe", "mdhe"):
        _check_grid(img, grid)
    if method == "che":
        return che(img)
    if method == "bhe":
        return bhe(img)
    if method == "rmshe":
        return rmshe(img, depth)
    if method == "ahe":
        return ahe(img, AheConfig(rows, cols, clip_limit))
    if method == "mdhe":
        return mdhe(img, MdheConfig(rows, cols, brightness_limit, blend))
    raise click.UsageError(f"unknown method {method!r}")


@click.group()
def cli():
    """Histogram-equalization contrast enhancement for grayscale images."""


@cli.command()
@click.argument("input", type=click.Path(dir_okay=False))
@click.argument("output", type=click.Path(dir_okay=False))
@click.option("--method", "-m", type=click.Choice(METHODS), default="mdhe", show_default=True)
@click.option("--depth", type=click.IntRange(0, 7), default=2, show_default=True,
              help="RMSHE recursion depth.")
@click.option("--grid", type=GridType(), default="8x8", show_default=True,
              help="Tile grid for AHE/MDHE.")
@click.option("--brightness-limit", type=click.FloatRange(0, 255), default=10.0, show_default=True,
              help="MDHE allowed mean drift, in intensity levels.")
@click.option("--clip-limit", type=click.FloatRange(1.0, min_open=True), default=None,
              help="AHE clip limit as a multiple of the uniform bin height.")
@click.option("--blend", is_flag=True, help="MDHE: bilinearly blend tile maps.")
def enhance(input, output, method, depth, grid, brightness_limit, clip_limit, blend):
    """Enhance INPUT with one method and write OUTPUT (.png, otherwise PGM)."""
    img = _load(input)
    out = run_method(img, method, depth=depth, grid=grid, brightness_limit=brightness_limit,
                     clip_limit=clip_limit, blend=blend)
    _save(out, Path(output))


def histogram_csv(img: GrayImage) -> str:
    counts = compute_histogram(img).counts
    lines = ["level,count"] + [f"{level},{int(counts[level])}" for level in range(LEVELS)]
    return "\n".join(lines) + "\n"


@cli.command()
@click.argument("input", type=click.Path(dir_okay=False))
@click.argument("output", type=click.Path(dir_okay=False, allow_dash=True), default="-")
def hist(input, output):
    """Write the 256-bin histogram of INPUT as CSV (OUTPUT defaults to stdout)."""
    text = histogram_csv(_load(input))
    if output == "-":
        click.echo(text, nl=False)
        return
    try:
        Path(output).write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        _fail(f"cannot write {output}: {exc.strerror or exc}")


def render_csv(rows: list[tuple[str, MetricReport]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("method",) + METRIC_NAMES)
    for name, report in rows:
        writer.writerow((name,) + tuple(format_value(v) for v in report.values()))
    return buf.getvalue()


def _json_cell(value):
    # JSON has no infinities; share the CSV markers
    if value is None or math.isinf(value):
        return format_value(value)
    return value


def render_json(source: str, rows: list[tuple[str, MetricReport]], outputs: dict) -> str:
    doc = {
        "source": source,
        "columns": list(METRIC_NAMES),
        "methods": [
            {"method": name, "output": outputs[name],
             **{k: _json_cell(v) for k, v in report.as_dict().items()}}
            for name, report in rows
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def render_table(rows: list[tuple[str, MetricReport]]) -> str:
    header = ["Method"] + list(TABLE_LABELS)
    body = [[name] + [format_value(v, 5) for v in report.values()] for name, report in rows]
    widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
    lines = ["  ".join(cell.rjust(w) if i else cell.ljust(w) for i, (cell, w) in enumerate(zip(r, widths)))
             for r in [header] + body]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


@cli.command()
@click.argument("input", type=click.Path(dir_okay=False))
@click.argument("outdir", type=click.Path(file_okay=False))
@click.option("--format", "fmt", type=click.Choice(("table", "csv", "json")), default="table",
              show_default=True)
def compare(input, outdir, fmt):
    """Run all five methods on INPUT, save results in OUTDIR, print a metric report."""
    img = _load(input)
    _check_grid(img, (8, 8))
    out_dir = Path(outdir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        _fail(f"cannot create {outdir}: {exc.strerror or exc}")
    stem = Path(input).stem
    rows, outputs = [], {}
    for method in COMPARE_ORDER:
        enhanced = run_method(img, method)
        path = out_dir / f"{stem}_{method}.pgm"
        _save(enhanced, path)
        label = method.upper()
        outputs[label] = str(path)
        rows.append((label, full_report(img, enhanced)))
    if fmt == "csv":
        text = render_csv(rows)
    elif fmt == "json":
        text = render_json(str(input), rows, outputs)
    else:
        text = render_table(rows)
    click.echo(text, nl=False)

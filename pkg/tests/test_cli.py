import csv
import io
import json

import numpy as np
import pytest
from click.testing import CliRunner

from histeq import GrayImage, che, load_image, mdhe, rmshe, save_image
from histeq.cli import cli

METHOD_ROWS = ["CHE", "BHE", "RMSHE", "AHE", "MDHE"]


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def sample(tmp_path):
    rng = np.random.default_rng(3)
    im = GrayImage(np.clip(rng.normal(120, 25, (40, 48)), 0, 255).round())
    path = tmp_path / "sample.pgm"
    save_image(im, path)
    return path, im


class TestEnhance:
    def test_che(self, runner, sample, tmp_path):
        src, im = sample
        out = tmp_path / "out.pgm"
        res = runner.invoke(cli, ["enhance", str(src), str(out), "--method", "che"])
        assert res.exit_code == 0, res.output
        assert load_image(out) == che(im)
        assert res.stdout == ""

    def test_rmshe_depth_zero_matches_che(self, runner, sample, tmp_path):
        src, _ = sample
        a, b = tmp_path / "a.pgm", tmp_path / "b.pgm"
        runner.invoke(cli, ["enhance", str(src), str(a), "--method", "rmshe", "--depth", "0"])
        runner.invoke(cli, ["enhance", str(src), str(b), "--method", "che"])
        assert a.read_bytes() == b.read_bytes()

    def test_mdhe_options(self, runner, sample, tmp_path):
        src, im = sample
        out = tmp_path / "m.png"
        res = runner.invoke(cli, ["enhance", str(src), str(out), "--method", "mdhe",
                                  "--grid", "8x8", "--brightness-limit", "10"])
        assert res.exit_code == 0, res.output
        assert out.read_bytes().startswith(b"\x89PNG")
        assert load_image(out) == mdhe(im)

    def test_rmshe_depth(self, runner, sample, tmp_path):
        src, im = sample
        out = tmp_path / "r.pgm"
        runner.invoke(cli, ["enhance", str(src), str(out), "-m", "rmshe", "--depth", "3"])
        assert load_image(out) == rmshe(im, 3)

    def test_ahe_clip_and_blend_accepted(self, runner, sample, tmp_path):
        src, _ = sample
        for extra in (["-m", "ahe", "--clip-limit", "2.5", "--grid", "4x3"], ["-m", "mdhe", "--blend"]):
            res = runner.invoke(cli, ["enhance", str(src), str(tmp_path / "o.pgm"), *extra])
            assert res.exit_code == 0, res.output

    @pytest.mark.parametrize(
        "extra",
        [
            ["--method", "clahe"],
            ["--method", "rmshe", "--depth", "8"],
            ["--grid", "8"],
            ["--grid", "0x4"],
            ["--brightness-limit", "-1"],
            ["--clip-limit", "1.0"],
            ["--grid", "100x100"],
        ],
    )
    def test_usage_errors(self, runner, sample, tmp_path, extra):
        src, _ = sample
        res = runner.invoke(cli, ["enhance", str(src), str(tmp_path / "o.pgm"), *extra])
        assert res.exit_code == 2
        assert res.stdout == ""

    def test_missing_input(self, runner, tmp_path):
        res = runner.invoke(cli, ["enhance", str(tmp_path / "none.pgm"), str(tmp_path / "o.pgm")])
        assert res.exit_code == 1
        assert res.stderr.startswith("error:") and res.stderr.count("\n") == 1

    def test_bad_format(self, runner, tmp_path):
        bad = tmp_path / "bad.pgm"
        bad.write_bytes(b"GIF89a")
        res = runner.invoke(cli, ["enhance", str(bad), str(tmp_path / "o.pgm")])
        assert res.exit_code == 1
        assert "unsupported" in res.stderr

    def test_unwritable_output(self, runner, sample, tmp_path):
        src, _ = sample
        res = runner.invoke(cli, ["enhance", str(src), str(tmp_path / "no" / "dir" / "o.pgm")])
        assert res.exit_code == 1


class TestHist:
    def test_two_levels_to_stdout(self, runner, tmp_path):
        p = tmp_path / "t.pgm"
        save_image(GrayImage([[0, 0], [255, 255]]), p)
        res = runner.invoke(cli, ["hist", str(p)])
        assert res.exit_code == 0
        lines = res.stdout.splitlines()
        assert lines[0] == "level,count" and len(lines) == 257
        assert lines[1] == "0,2" and lines[256] == "255,2"
        assert all(line.endswith(",0") for line in lines[2:256])

    def test_constant_to_file(self, runner, tmp_path):
        p = tmp_path / "c.pgm"
        save_image(GrayImage(np.full((3, 5), 128)), p)
        out = tmp_path / "h.csv"
        res = runner.invoke(cli, ["hist", str(p), str(out)])
        assert res.exit_code == 0 and res.stdout == ""
        rows = list(csv.reader(out.read_text().splitlines()))
        assert rows[129] == ["128", "15"]
        assert b"\r" not in out.read_bytes()

    def test_counts_sum_to_pixels(self, runner, sample):
        src, im = sample
        res = runner.invoke(cli, ["hist", str(src)])
        rows = list(csv.DictReader(io.StringIO(res.stdout)))
        assert [int(r["level"]) for r in rows] == list(range(256))
        assert sum(int(r["count"]) for r in rows) == im.width * im.height


class TestCompare:
    def test_csv(self, runner, sample, tmp_path):
        src, _ = sample
        res = runner.invoke(cli, ["compare", str(src), str(tmp_path / "o"), "--format", "csv"])
        assert res.exit_code == 0, res.output
        rows = list(csv.reader(io.StringIO(res.stdout)))
        assert rows[0] == ["method", "psnr", "mse", "rmse", "uiq", "pcc", "snr", "mae"]
        assert [r[0] for r in rows[1:]] == METHOD_ROWS
        for method in ("che", "bhe", "rmshe", "ahe", "mdhe"):
            assert (tmp_path / "o" / f"sample_{method}.pgm").exists()

    def test_table(self, runner, sample, tmp_path):
        src, _ = sample
        res = runner.invoke(cli, ["compare", str(src), str(tmp_path / "o")])
        assert res.exit_code == 0
        header = res.stdout.splitlines()[0].split()
        assert header == ["Method", "PSNR", "MSE", "RMSE", "UIQ", "PPC", "SNR", "MAE"]
        assert [line.split()[0] for line in res.stdout.splitlines()[2:]] == METHOD_ROWS

    def test_json_agrees_with_csv(self, runner, sample, tmp_path):
        src, _ = sample
        c = runner.invoke(cli, ["compare", str(src), str(tmp_path / "o"), "--format", "csv"])
        j = runner.invoke(cli, ["compare", str(src), str(tmp_path / "o"), "--format", "json"])
        doc = json.loads(j.stdout)
        csv_rows = list(csv.DictReader(io.StringIO(c.stdout)))
        assert [m["method"] for m in doc["methods"]] == METHOD_ROWS
        for crow, jrow in zip(csv_rows, doc["methods"]):
            for key in ("psnr", "mse", "rmse", "uiq", "pcc", "snr", "mae"):
                cv, jv = crow[key], jrow[key]
                if isinstance(jv, str):
                    assert cv == jv
                else:
                    assert float(cv) == jv

    def test_degenerate_input_renders_markers(self, runner, tmp_path):
        p = tmp_path / "flat.pgm"
        save_image(GrayImage(np.full((16, 16), 200)), p)
        res = runner.invoke(cli, ["compare", str(p), str(tmp_path / "o"), "--format", "csv"])
        assert res.exit_code == 0
        rows = list(csv.DictReader(io.StringIO(res.stdout)))
        assert all(r["pcc"] == "undefined" for r in rows)

    def test_deterministic(self, runner, sample, tmp_path):
        src, _ = sample
        outs = []
        for _ in range(2):
            res = runner.invoke(cli, ["compare", str(src), str(tmp_path / "o"), "--format", "json"])
            files = {p.name: p.read_bytes() for p in sorted((tmp_path / "o").iterdir())}
            outs.append((res.stdout, files))
        assert outs[0] == outs[1]

    def test_small_image_is_usage_error(self, runner, tmp_path):
        p = tmp_path / "tiny.pgm"
        save_image(GrayImage([[1, 2], [3, 4]]), p)
        res = runner.invoke(cli, ["compare", str(p), str(tmp_path / "o")])
        assert res.exit_code == 2
        assert not (tmp_path / "o").exists()

    def test_grid_ignored_for_global_methods(self, runner, tmp_path):
        p = tmp_path / "tiny.pgm"
        save_image(GrayImage([[1, 2], [3, 4]]), p)
        res = runner.invoke(cli, ["enhance", str(p), str(tmp_path / "t.pgm"), "-m", "che"])
        assert res.exit_code == 0

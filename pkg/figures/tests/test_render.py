import csv
from pathlib import Path

import numpy as np
import pytest

from landauer_lab_figures import cli, io, render

DATA = Path(__file__).parent / "data"
GOLDEN_TRIALS = DATA / "golden_trials.csv"
GOLDEN_FITS = DATA / "golden_fits.csv"
GOLDEN_BOUNDS_TRIALS = DATA / "golden_bounds_trials.csv"
GOLDEN_HULL = DATA / "golden_hull.csv"


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestFig1:
    def test_image_written_with_one_curve_per_series(self, tmp_path):
        out = tmp_path / "fig1.png"
        result = render.render_fig1(GOLDEN_TRIALS, GOLDEN_FITS, out)
        assert out.exists() and out.stat().st_size > 0
        dims = {
            (int(r["d_s"]), int(r["d_r"])) for r in read_rows(GOLDEN_TRIALS)
        }
        assert set(result.series) == dims
        for series in result.series.values():
            assert series.from_fit
            assert series.band_low is not None
            assert np.all(series.band_high >= series.band_low)

    def test_curves_match_fit_csv_to_1e12(self, tmp_path):
        result = render.render_fig1(GOLDEN_TRIALS, GOLDEN_FITS, tmp_path / "f.png")
        for row in read_rows(GOLDEN_FITS):
            dims = (int(row["d_s"]), int(row["d_r"]))
            a, b = float(row["a"]), float(row["b"])
            series = result.series[dims]
            expected = a * (1.0 - np.exp(-b / series.t))
            assert np.max(np.abs(series.central - expected)) < 1e-12
            cov = np.array(
                [
                    [float(row["cov_aa"]), float(row["cov_ab"])],
                    [float(row["cov_ab"]), float(row["cov_bb"])],
                ]
            )
            decay = np.exp(-b / series.t)
            grad = np.stack([1.0 - decay, a * decay / series.t])
            stderr = np.sqrt(np.einsum("ik,ij,jk->k", grad, cov, grad))
            assert np.max(np.abs(series.band_high - (expected + 2 * stderr))) < 1e-12

    def test_unconverged_fit_falls_back_to_medians(self, tmp_path):
        broken = tmp_path / "fits.csv"
        rows = read_rows(GOLDEN_FITS)
        with open(GOLDEN_FITS) as fh:
            header = fh.readline().strip().split(",")
        with open(broken, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=header)
            writer.writeheader()
            for row in rows:
                row["converged"] = "0"
                writer.writerow(row)
        with pytest.warns(UserWarning, match="not converged"):
            result = render.render_fig1(GOLDEN_TRIALS, broken, tmp_path / "f.png")
        trials = read_rows(GOLDEN_TRIALS)
        for dims, series in result.series.items():
            assert not series.from_fit
            for t, value in zip(series.t, series.central):
                mus = [
                    float(r["mu"])
                    for r in trials
                    if (int(r["d_s"]), int(r["d_r"])) == dims
                    and float(r["T_tilde"]) == t
                    and r["skipped"] == "0"
                ]
                assert value == pytest.approx(np.median(mus), abs=1e-12)

    def test_missing_column_named(self, tmp_path):
        crippled = tmp_path / "trials.csv"
        rows = read_rows(GOLDEN_TRIALS)
        fields = [c for c in rows[0] if c != "mu"]
        with open(crippled, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore")
            writer.writeheader()
            writer.writerows(rows)
        with pytest.raises(io.SchemaError, match="'mu'"):
            render.render_fig1(crippled, GOLDEN_FITS, tmp_path / "f.png")

    def test_empty_trials_rejected(self, tmp_path):
        empty = tmp_path / "empty.csv"
        with open(GOLDEN_TRIALS) as fh:
            empty.write_text(fh.readline())
        with pytest.raises(io.EmptyDataError):
            render.render_fig1(empty, GOLDEN_FITS, tmp_path / "f.png")


class TestBounds:
    def test_polygons_match_hull_csv(self, tmp_path):
        out = tmp_path / "bounds.png"
        result = render.render_bounds(GOLDEN_BOUNDS_TRIALS, GOLDEN_HULL, out)
        assert out.exists() and out.stat().st_size > 0
        rows = read_rows(GOLDEN_HULL)
        layers = {int(r["layer"]) for r in rows}
        assert set(result.polygons) == layers
        assert result.confidence_layer == max(layers)
        for layer in layers:
            expected = np.array(
                [
                    [float(r["x"]), float(r["y"])]
                    for r in sorted(
                        (r for r in rows if int(r["layer"]) == layer),
                        key=lambda r: int(r["vertex_index"]),
                    )
                ]
            )
            assert np.max(np.abs(result.polygons[layer] - expected)) < 1e-12

    def test_scatter_matches_trials_csv(self, tmp_path):
        result = render.render_bounds(
            GOLDEN_BOUNDS_TRIALS, GOLDEN_HULL, tmp_path / "b.png"
        )
        expected = np.array(
            [
                [float(r["gamma_minus_omega"]), float(r["betaQ_minus_gamma"])]
                for r in read_rows(GOLDEN_BOUNDS_TRIALS)
                if r["skipped"] == "0"
            ]
        )
        assert np.max(np.abs(result.points - expected)) < 1e-12

    def test_square_synthetic_hull(self, tmp_path):
        hull = tmp_path / "hull.csv"
        with open(hull, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(io.HULL_COLUMNS)
            for i, (x, y) in enumerate([(0, 0), (1, 0), (1, 1), (0, 1)]):
                writer.writerow(["sq", 0, i, x, y, 1.0])
        result = render.render_bounds(GOLDEN_BOUNDS_TRIALS, hull, tmp_path / "b.png")
        assert result.polygons[0].shape == (4, 2)
        assert np.array_equal(
            result.polygons[0], np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
        )

    def test_deterministic_series_for_identical_inputs(self, tmp_path):
        first = render.render_bounds(GOLDEN_BOUNDS_TRIALS, GOLDEN_HULL, tmp_path / "1.png")
        second = render.render_bounds(GOLDEN_BOUNDS_TRIALS, GOLDEN_HULL, tmp_path / "2.png")
        assert np.array_equal(first.points, second.points)
        for layer in first.polygons:
            assert np.array_equal(first.polygons[layer], second.polygons[layer])

    def test_missing_hull_column_named(self, tmp_path):
        crippled = tmp_path / "hull.csv"
        rows = read_rows(GOLDEN_HULL)
        fields = [c for c in rows[0] if c != "vertex_index"]
        with open(crippled, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore")
            writer.writeheader()
            writer.writerows(rows)
        with pytest.raises(io.SchemaError, match="'vertex_index'"):
            render.render_bounds(GOLDEN_BOUNDS_TRIALS, crippled, tmp_path / "b.png")


class TestCli:
    def test_fig1_command(self, tmp_path):
        out = tmp_path / "fig.png"
        code = cli.run(
            ["fig1", "--trials", str(GOLDEN_TRIALS), "--fits", str(GOLDEN_FITS),
             "--out", str(out)]
        )
        assert code == 0
        assert out.exists() and out.stat().st_size > 0

    def test_bounds_command(self, tmp_path):
        out = tmp_path / "bounds.png"
        code = cli.run(
            ["bounds", "--trials", str(GOLDEN_BOUNDS_TRIALS), "--hulls",
             str(GOLDEN_HULL), "--out", str(out)]
        )
        assert code == 0
        assert out.exists() and out.stat().st_size > 0

    def test_schema_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        code = cli.run(
            ["fig1", "--trials", str(bad), "--fits", str(GOLDEN_FITS),
             "--out", str(tmp_path / "f.png")]
        )
        assert code == 1
        assert "experiment" in capsys.readouterr().err

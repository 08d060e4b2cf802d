import xml.etree.ElementTree as ET

import numpy as np
import pytest

from gridstudies.svg import (
    ChartStyle,
    DataSeries,
    histogram_counts,
    render_histogram,
    render_scatter,
    render_series,
    write_svg,
)

NS = "{http://www.w3.org/2000/svg}"


def _parse(svg_text):
    return ET.fromstring(svg_text)


def _all(root, tag):
    return root.findall(f".//{NS}{tag}")


class TestSeries:

    def test_two_point_series_is_one_polyline_with_two_vertices(self):
        svg = render_series([DataSeries([0.0, 1.0], [1.0, 3.0])])
        root = _parse(svg)
        lines = _all(root, "polyline")
        assert len(lines) == 1
        points = lines[0].get("points").split()
        assert len(points) == 2

    def test_multiple_series_get_own_polylines_and_legend(self):
        svg = render_series(
            [DataSeries([0, 1, 2], [1, 2, 3], "first"),
             DataSeries([0, 1, 2], [3, 2, 1], "second")],
            ChartStyle(title="pair", x_label="t", y_label="v"))
        root = _parse(svg)
        assert len(_all(root, "polyline")) == 2
        texts = [t.text for t in _all(root, "text")]
        assert "first" in texts and "second" in texts
        assert "pair" in texts and "t" in texts and "v" in texts

    def test_axes_have_tick_labels(self):
        svg = render_series([DataSeries([0.0, 10.0], [0.0, 100.0])])
        root = _parse(svg)
        labels = [t.text for t in _all(root, "text")]
        assert any(lab == "5" for lab in labels)
        assert any(lab == "50" for lab in labels)

    def test_empty_series_rejected(self):
        with pytest.raises(ValueError):
            render_series([])
        with pytest.raises(ValueError):
            DataSeries([], [])

    def test_mismatched_lengths_rejected(self):
        with pytest.raises(ValueError):
            DataSeries([1.0, 2.0], [1.0])

    def test_well_formed_with_hostile_labels(self):
        svg = render_series([DataSeries([0, 1], [0, 1], "a<b & c>d")],
                            ChartStyle(title="x < y"))
        root = _parse(svg)   # would raise on malformed XML
        assert root.tag == f"{NS}svg"


class TestHistogram:

    def test_bin_counts_sum_to_sample_size(self):
        rng = np.random.default_rng(0)
        values = rng.lognormal(3.5, 0.7, 50_000)
        edges, counts = histogram_counts(values, 40)
        assert counts.sum() == 50_000
        assert edges.size == 41
        assert edges[0] == values.min() and edges[-1] == values.max()

    def test_rect_per_nonempty_bin(self):
        values = [0.5, 0.6, 2.5, 2.6, 2.7]
        edges, counts = histogram_counts(values, 3)
        svg = render_histogram(values, bins=3)
        root = _parse(svg)
        rects = _all(root, "rect")
        # background + frame + one bar per non-empty bin
        bars = len(rects) - 2
        assert bars == int((counts > 0).sum())

    def test_constant_data_still_renders(self):
        svg = render_histogram([5.0, 5.0, 5.0], bins=4)
        assert _parse(svg) is not None

    def test_empty_or_bad_bins_rejected(self):
        with pytest.raises(ValueError):
            histogram_counts([], 10)
        with pytest.raises(ValueError):
            histogram_counts([1.0], 0)


class TestScatter:

    def test_one_marker_per_row(self):
        rng = np.random.default_rng(1)
        svg = render_scatter([DataSeries(rng.uniform(0, 1, 137),
                                         rng.uniform(0, 1, 137))])
        root = _parse(svg)
        assert len(_all(root, "circle")) == 137

    def test_groups_use_distinct_colors(self):
        svg = render_scatter([DataSeries([1, 2], [1, 2], "one"),
                              DataSeries([3, 4], [3, 4], "two")])
        root = _parse(svg)
        fills = {c.get("fill") for c in _all(root, "circle")}
        assert len(fills) == 2

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            render_scatter([])


class TestWrite:

    def test_write_svg_round_trip(self, tmp_path):
        path = tmp_path / "chart.svg"
        write_svg(path, render_series([DataSeries([0, 1], [1, 0])]))
        text = path.read_text()
        assert text.startswith("<svg")
        assert text.rstrip().endswith("</svg>")
        _parse(text)

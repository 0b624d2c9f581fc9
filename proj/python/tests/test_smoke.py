import math

import pytest

import basin_metric_lab as bml


def test_fixed_points_of_square():
    f = bml.RationalMap([0, 0, 1])
    kinds = [(p["point"], p["kind"]) for p in f.fixed_points()]
    assert kinds == [(0j, "superattracting"), (1 + 0j, "repelling"), (None, "superattracting")]
    assert f(2) == 4 + 0j
    assert f(None) is None


def test_preimages_sum_to_degree():
    newton = bml.RationalMap([1, 0, 0, 2], [0, 0, 3])
    assert newton.degree == 3
    pre = newton.preimages(0.3 + 0.2j)
    assert sum(m for _, m in pre) == 3
    for z, _ in pre:
        assert bml.spherical_distance(newton(z), 0.3 + 0.2j) < 1e-10


def test_disk_distance_and_green():
    assert bml.disk_reference_distance(0, 0.5) == pytest.approx(0.5493061443340548, abs=1e-15)
    assert bml.greens_function(bml.RationalMap([0, 0, 1]), 2) == pytest.approx(math.log(2))
    assert bml.greens_function(bml.RationalMap([1, 0, 1]), 2) == pytest.approx(0.814709045478960, abs=1e-9)


def test_basin_and_distance():
    disk = bml.Basin(bml.RationalMap([0, 0, 1]), 0, resolution=256)
    assert disk.component_count == 1
    assert disk.locate(0.5) == 1
    assert disk.locate(2) is None
    labels = disk.components()
    assert labels.shape == (2, 256, 256)
    assert int((labels > 0).sum()) >= disk.member_cells
    assert disk.distance(0, 0.5) == pytest.approx(math.log(2), rel=0.05)


def test_errors_are_raised():
    with pytest.raises(bml.BmlError, match="NotPolynomial"):
        bml.greens_function(bml.RationalMap([1, 0, 0, 2], [0, 0, 3]), 2)
    with pytest.raises(bml.BmlError, match="ValidationError"):
        bml.echo_config(bml.VERSION_LINE + "\nnum_coeffs = 0;0;1\nsample_count = 0\n")


def test_small_experiment(tmp_path):
    text = "\n".join([
        bml.VERSION_LINE,
        "scenario_id = py",
        "num_coeffs = 0; 0; 1",
        "attracting_point = 0",
        "base_point = 0.5",
        "resolution = 128",
        "tree_depth = 5",
        "sample_count = 10",
    ])
    report = bml.run_experiment(text, tmp_path)
    assert report["tree_ok"]
    assert report["unresolved"] == 0
    assert math.isfinite(report["max_C"])
    series = report["max_C_by_depth"]
    assert all(a >= b for a, b in zip(series, series[1:]))
    lines = (tmp_path / "samples.csv").read_text().splitlines()
    assert lines[0] == bml.VERSION_LINE
    assert len(lines) == 2 + 10

import json
import math
import pathlib

import numpy as np
import pytest

import metric_lab as ml

DATA = pathlib.Path(__file__).resolve().parents[1] / "data"


@pytest.fixture(scope="module")
def grid():
    return ml.Space.grid(2, 12)


def test_space_basics(grid):
    assert len(grid) == 144
    assert grid.dim == 2
    assert grid.coordinates.shape == (144, 2)
    assert grid.weights.sum() == pytest.approx(1.0)
    assert grid.min_spacing == pytest.approx(1 / 12)
    assert grid.dist(0, 1) == pytest.approx(1 / 12)


def test_certificate(grid):
    cert = ml.certify(grid)
    summary = ml.certificate_summary(grid, cert)
    assert summary["sound"]
    assert 1.8 < cert.nu_hat < 2.5
    value, holds = cert.condition()
    assert holds == (value < 1)
    d_theory, d_emp = ml.check_doubling(grid, cert)
    assert d_emp <= d_theory


def test_kernel_annihilates_constants(grid):
    cert = ml.certify(grid)
    k = ml.kernel(grid, cert.nu_hat, "random-pm1", seed=3)
    assert k.values.shape == (144, 144)
    t = ml.maximal_singular(grid, k, np.ones(len(grid)))
    assert t.max() <= 1e-10 * k.row_scale


def test_maximal_dominates_average(grid):
    f = ml.bump_field(grid, 5)
    m = ml.maximal_function(grid, f)
    assert np.all(m >= np.abs(f) - 1e-12)
    assert m.max() <= np.abs(f).max() + 1e-12


def test_norms():
    line = ml.Space.grid(1, 16, "uniform")
    f = np.linspace(-1, 2, 16)
    assert ml.lorentz_norm(line, f, 2.5, 2.5) == pytest.approx(ml.lebesgue_norm(line, f, 2.5), rel=1e-9)
    assert ml.orlicz_norm(line, f, "power", 3.0) == pytest.approx(ml.lebesgue_norm(line, f, 3.0), rel=1e-8)
    assert ml.varexp_norm(line, f, np.full(16, 2.0)) == pytest.approx(ml.lebesgue_norm(line, f, 2.0), rel=1e-8)
    assert math.isfinite(ml.morrey_norm(line, f, 1.5, 2.0))


def test_pointwise_checks(grid):
    cert = ml.certify(grid)
    k = ml.kernel(grid, cert.nu_hat, "random-pm1", seed=1)
    f = ml.bump_field(grid, 2, signed=True)
    for report in (ml.check_thm1(grid, k, f, cert), ml.check_thm2(grid, np.abs(f), cert),
                   ml.check_thm3(grid, k, f, cert)):
        assert report["violations"] == 0
        assert math.isfinite(report["empirical_constant"])


def test_errors(grid):
    with pytest.raises(ml.Error):
        ml.maximal_function(grid, np.ones(3))
    with pytest.raises(ValueError):
        ml.check_thm2(grid, np.ones(len(grid)), ml.certify(grid), 1.0, 3.0, 2.0)


def test_run_config(tmp_path):
    code, out, err = ml.run(str(DATA / "grid2_demo.json"), seed=5, output=str(tmp_path))
    assert code == 0, err
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["seed"] == 5
    assert manifest["total_violations"] == 0
    assert "bundle:" in out

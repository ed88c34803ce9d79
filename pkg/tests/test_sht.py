"""Tests for the spherical harmonic transforms.

The independent oracle for synthesis is a naive double loop over modes
and grid points built on scipy.special.lpmv with explicit normalization
(scipy applies the Condon-Shortley phase, which this package's basis does
not use, hence the (-1)^m factor in the oracle).
"""

import math

import numpy as np
import pytest
import scipy.special

from nlsphere.sht import (
    SphHarmCoeffs,
    SphereGrid,
    _layout,
    analysis,
    mean,
    read_coeffs,
    relative_error_2norm,
    synthesis,
    write_coeffs,
    write_grid_values,
)


def random_coeffs(n, seed):
    rng = np.random.default_rng(seed)
    data = rng.standard_normal((n + 1, 2 * n + 1))
    data[~_layout(n)[1]] = 0.0
    return SphHarmCoeffs(n, data)


def naive_basis(ell, m, theta, phi):
    """Real orthonormal harmonic via scipy, independent of the package."""
    mm = abs(m)
    norm = math.sqrt(
        (2 * ell + 1)
        / 2.0
        * math.factorial(ell - mm)
        / math.factorial(ell + mm)
    )
    # strip scipy's Condon-Shortley phase
    plm = (-1.0) ** mm * scipy.special.lpmv(mm, ell, math.cos(theta)) * norm
    if m == 0:
        return plm / math.sqrt(2.0 * math.pi)
    if m < 0:
        return plm * math.sin(mm * phi) / math.sqrt(math.pi)
    return plm * math.cos(mm * phi) / math.sqrt(math.pi)


# ----------------------------------------------------------------------
# layout and element access
# ----------------------------------------------------------------------

def test_slot_addressing_roundtrip():
    c = SphHarmCoeffs(5)
    c.set(3, -2, 1.5)
    c.set(3, 2, -0.5)
    c.set(4, 0, 2.0)
    assert c.get(3, -2) == 1.5
    assert c.get(3, 2) == -0.5
    assert c.get(4, 0) == 2.0
    # layout positions per the storage convention
    assert c.data[3 - 2, 2 * 2 - 1] == 1.5
    assert c.data[3 - 2, 2 * 2] == -0.5
    assert c.data[4, 0] == 2.0


def test_slot_bounds_checked():
    c = SphHarmCoeffs(4)
    with pytest.raises(ValueError):
        c.get(5, 0)
    with pytest.raises(ValueError):
        c.get(3, 4)
    with pytest.raises(ValueError):
        c.set(2, -3, 1.0)


def test_structural_zeros_enforced_on_construction():
    n = 3
    data = np.zeros((4, 7))
    data[3, 5] = 1.0  # would be degree 3+... beyond the m=3 triangle
    ok = SphHarmCoeffs(n, np.zeros((4, 7)))
    assert ok.degree == 3
    data = np.zeros((4, 7))
    data[2, 5] = 1.0  # m=3 column admits only row 0 (ell=3)
    with pytest.raises(ValueError):
        SphHarmCoeffs(n, data)
    with pytest.raises(ValueError):
        SphHarmCoeffs(3, np.zeros((4, 6)))


def test_grid_geometry():
    g = SphereGrid(8)
    assert g.colat_nodes.shape == (9,)
    assert g.lon_nodes.shape == (17,)
    assert np.all(np.diff(g.colat_nodes) > 0)
    assert g.lon_nodes[0] == 0.0
    assert g.colat_weights.sum() == pytest.approx(2.0, rel=1e-14)
    with pytest.raises(ValueError):
        SphereGrid(-1)


# ----------------------------------------------------------------------
# synthesis
# ----------------------------------------------------------------------

def test_synthesis_constant_field():
    n = 6
    c = SphHarmCoeffs(n)
    c.set(0, 0, math.sqrt(4.0 * math.pi))
    vals = synthesis(c, SphereGrid(n))
    np.testing.assert_allclose(vals, 1.0, rtol=1e-14)


def test_synthesis_cos_theta_mode():
    n = 5
    c = SphHarmCoeffs(n)
    c.set(1, 0, 1.0)
    grid = SphereGrid(n)
    vals = synthesis(c, grid)
    expected = math.sqrt(3.0 / (4.0 * math.pi)) * np.cos(grid.colat_nodes)
    np.testing.assert_allclose(vals, expected[:, None] * np.ones((1, 2 * n + 1)),
                               rtol=0, atol=1e-15)


def test_synthesis_matches_naive_evaluator():
    n = 16
    c = random_coeffs(n, seed=7)
    grid = SphereGrid(n)
    vals = synthesis(c, grid)
    # independent double loop over every mode and a subsample of grid points
    deg, valid = _layout(n)
    i_sample = [0, 3, 9, 16]
    j_sample = [0, 1, 8, 21, 32]
    for i in i_sample:
        for j in j_sample:
            theta, phi = grid.colat_nodes[i], grid.lon_nodes[j]
            total = 0.0
            for ell in range(n + 1):
                for m in range(-ell, ell + 1):
                    total += c.get(ell, m) * naive_basis(ell, m, theta, phi)
            assert abs(vals[i, j] - total) <= 1e-12


def test_synthesis_degree_mismatch():
    with pytest.raises(ValueError):
        synthesis(SphHarmCoeffs(4), SphereGrid(5))


# ----------------------------------------------------------------------
# analysis
# ----------------------------------------------------------------------

@pytest.mark.parametrize("n", [4, 16, 64])
def test_roundtrip_identity(n):
    c = random_coeffs(n, seed=n)
    grid = SphereGrid(n)
    back = analysis(synthesis(c, grid), grid)
    assert np.max(np.abs(back.data - c.data)) <= 1e-12


def test_analysis_constant_field():
    n = 8
    grid = SphereGrid(n)
    c = analysis(np.ones((n + 1, 2 * n + 1)), grid)
    assert c.get(0, 0) == pytest.approx(math.sqrt(4.0 * math.pi), rel=1e-14)
    rest = c.data.copy()
    rest[0, 0] = 0.0
    assert np.max(np.abs(rest)) <= 1e-13


def test_analysis_cos_theta_field():
    n = 8
    grid = SphereGrid(n)
    vals = np.cos(grid.colat_nodes)[:, None] * np.ones((1, 2 * n + 1))
    c = analysis(vals, grid)
    assert c.get(1, 0) == pytest.approx(math.sqrt(4.0 * math.pi / 3.0), rel=1e-14)
    rest = c.data.copy()
    rest[1, 0] = 0.0
    assert np.max(np.abs(rest)) <= 1e-14


def test_analysis_shape_mismatch():
    with pytest.raises(ValueError):
        analysis(np.ones((4, 9)), SphereGrid(5))


def test_structural_zeros_preserved_by_transforms():
    n = 12
    c = random_coeffs(n, seed=3)
    grid = SphereGrid(n)
    back = analysis(synthesis(c, grid), grid)
    _, valid = _layout(n)
    assert np.all(back.data[~valid] == 0.0)


# ----------------------------------------------------------------------
# mean, Parseval, error norm
# ----------------------------------------------------------------------

def test_mean_examples():
    c = SphHarmCoeffs(5)
    c.set(0, 0, math.sqrt(4.0 * math.pi))
    assert mean(c) == pytest.approx(4.0 * math.pi, rel=1e-15)
    c = SphHarmCoeffs(5)
    c.set(5, 3, 2.0)
    assert mean(c) == 0.0


def test_mean_matches_grid_quadrature():
    n = 20
    c = random_coeffs(n, seed=11)
    grid = SphereGrid(n)
    vals = synthesis(c, grid)
    quad = float(
        (grid.colat_weights @ vals).sum() * (2.0 * np.pi / (2 * n + 1))
    )
    assert mean(c) == pytest.approx(quad, rel=1e-11, abs=1e-11)


@pytest.mark.parametrize("n", [16, 64])
def test_parseval(n):
    c = random_coeffs(n, seed=n + 1)
    grid = SphereGrid(n)
    vals = synthesis(c, grid)
    quad = float(
        (grid.colat_weights @ (vals * vals)).sum() * (2.0 * np.pi / (2 * n + 1))
    )
    coeff_sum = float(np.sum(c.data * c.data))
    assert quad == pytest.approx(coeff_sum, rel=1e-11)


def test_relative_error_2norm_definition():
    a = random_coeffs(6, seed=1)
    b = random_coeffs(6, seed=2)
    expect = np.linalg.norm(a.data - b.data) / np.linalg.norm(b.data)
    assert relative_error_2norm(a, b) == pytest.approx(expect, rel=1e-15)
    assert relative_error_2norm(a, a) == 0.0
    with pytest.raises(ValueError):
        relative_error_2norm(a, SphHarmCoeffs(5))
    with pytest.raises(ValueError):
        relative_error_2norm(a, SphHarmCoeffs(6))  # zero reference


# ----------------------------------------------------------------------
# files
# ----------------------------------------------------------------------

def test_coeff_file_roundtrip(tmp_path):
    c = random_coeffs(9, seed=4)
    path = tmp_path / "c.csv"
    write_coeffs(c, path, comment="test field")
    text = path.read_text()
    assert text.splitlines()[0] == "# sht-coeffs v1 degree=9"
    back = read_coeffs(path)
    assert back.degree == 9
    np.testing.assert_array_equal(back.data, c.data)
    # deterministic bytes
    path2 = tmp_path / "c2.csv"
    write_coeffs(c, path2, comment="test field")
    assert path.read_bytes() == path2.read_bytes()


def test_read_coeffs_rejects_other_files(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("ell,lambda\n0,0\n")
    with pytest.raises(ValueError):
        read_coeffs(path)


def test_grid_values_file(tmp_path):
    n = 3
    grid = SphereGrid(n)
    c = SphHarmCoeffs(n)
    c.set(0, 0, math.sqrt(4.0 * math.pi))
    vals = synthesis(c, grid)
    path = tmp_path / "g.csv"
    write_grid_values(vals, grid, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "# sht-grid v1 degree=3"
    assert lines[1] == "theta,phi,value"
    assert len(lines) == 2 + (n + 1) * (2 * n + 1)
    first = lines[2].split(",")
    assert float(first[0]) == pytest.approx(grid.colat_nodes[0])
    assert float(first[2]) == pytest.approx(1.0, rel=1e-12)

"""Tests for the nonlocal operator eigenvalues.

Cross-checks used here, in increasing strength:
* closed forms (degree 0; the alpha = -1/2, delta = 2 kernel where the
  exact eigenvalues are -2*ell),
* the local-limit and sign/magnitude bounds satisfied by every eigenvalue,
* agreement between the recurrence and asymptotic integrand evaluations,
* agreement between the default summation and a compensated (math.fsum)
  re-evaluation of the same quadrature sum,
* node-count independence, since the recurrence integrand is a polynomial
  the rule already integrates exactly.
"""

import math
import warnings

import numpy as np
import pytest

from nlsphere.quadrature import cc_weights
from nlsphere.specfun import legendre_rec
from nlsphere.spectrum import (
    ASYMPTOTIC,
    DEFAULT_METHOD,
    EvalMethod,
    KernelParams,
    RECURRENCE,
    Spectrum,
    _eigenvalue_with_panels,
    eigenvalue,
    hybrid,
    local_eigenvalue,
    local_spectrum,
    spectrum,
    write_spectrum,
)


def test_kernel_params_validation_and_derived():
    kp = KernelParams(alpha=-0.5, delta=2.0)
    assert kp.d == -1.0
    assert KernelParams(0.0, 1.0).d == 0.5
    for bad in [(-1.0, 1.0), (1.0, 1.0), (0.0, 0.0), (0.0, 2.5), (0.0, -1.0),
                (math.nan, 1.0), (0.0, math.inf)]:
        with pytest.raises(ValueError):
            KernelParams(*bad)


def test_kernel_params_frozen():
    kp = KernelParams(0.0, 1.0)
    with pytest.raises(Exception):
        kp.alpha = 0.5


def test_eval_method_validation():
    assert RECURRENCE.kind == "recurrence"
    assert ASYMPTOTIC.uses_asymptotics(1)
    assert not RECURRENCE.uses_asymptotics(10**6)
    m = hybrid(50)
    assert not m.uses_asymptotics(50)
    assert m.uses_asymptotics(51)
    # hybrid with switch 0 behaves as pure asymptotics for ell >= 1
    assert hybrid(0).uses_asymptotics(1)
    with pytest.raises(ValueError):
        EvalMethod("magic")
    with pytest.raises(ValueError):
        hybrid(-1)


def test_degree_zero_is_exactly_zero():
    for params in [KernelParams(-0.5, 2.0), KernelParams(0.9, 0.01)]:
        for method in (RECURRENCE, ASYMPTOTIC, DEFAULT_METHOD):
            assert eigenvalue(0, params, method) == 0.0


def test_minus_two_ell_kernel():
    # at alpha = -1/2, delta = 2 the eigenvalues are exactly -2*ell
    params = KernelParams(-0.5, 2.0)
    assert eigenvalue(5, params) == pytest.approx(-10.0, rel=1e-11)
    for ell in (1, 2, 17, 100):
        assert eigenvalue(ell, params) == pytest.approx(-2.0 * ell, rel=1e-12)


def test_spectrum_low_degrees_minus_two_ell():
    sp = spectrum(3, KernelParams(-0.5, 2.0), RECURRENCE)
    assert sp.values[0] == 0.0
    np.testing.assert_allclose(sp.values, [0.0, -2.0, -4.0, -6.0], rtol=1e-11)


def test_local_limit_small_horizon():
    # |lambda_delta(ell) + ell(ell+1)| <= ell(ell+1)(ell+2)^2 delta^2 / 16
    v = eigenvalue(8, KernelParams(0.5, 1e-3))
    assert v == pytest.approx(-72.0, abs=3.2e-3)
    for alpha in (-0.5, 0.5):
        for delta in (1e-3, 1e-2):
            params = KernelParams(alpha, delta)
            for ell in (1, 7, 30):
                lam = eigenvalue(ell, params)
                bound = ell * (ell + 1) * (ell + 2) ** 2 * delta**2 / 16.0
                assert abs(lam + ell * (ell + 1)) <= bound * (1.0 + 1e-8) + 1e-12


@pytest.mark.parametrize("ell", [30, 60, 150])
def test_recurrence_and_asymptotics_agree(ell):
    params = KernelParams(-0.5, 1.0)
    a = eigenvalue(ell, params, RECURRENCE)
    b = eigenvalue(ell, params, hybrid(0))
    assert b == pytest.approx(a, rel=1e-8)


def test_hybrid_switch_matches_constituents():
    params = KernelParams(0.3, 0.7)
    m = hybrid(40)
    assert eigenvalue(20, params, m) == eigenvalue(20, params, RECURRENCE)
    assert eigenvalue(80, params, m) == eigenvalue(80, params, ASYMPTOTIC)


def test_compensated_summation_reference():
    # re-evaluate the quadrature sum with math.fsum and direct formulas
    for ell, alpha, delta in [(30, 0.3, 0.7), (12, -0.5, 2.0), (57, 0.0, 1.0)]:
        rule = cc_weights(alpha, 0.0, max(ell + 1, 8))
        d2 = delta * delta
        terms = []
        for xj, wj in zip(rule.nodes, rule.weights):
            if xj == 1.0:
                g = -(d2 / 8.0) * ell * (ell + 1)
            else:
                q = d2 * (1.0 - xj) / 8.0
                g = (legendre_rec(ell, 1.0 - 2.0 * q) - 1.0) / (1.0 - xj)
            terms.append(wj * g)
        ref = (1.0 + alpha) * 2.0 ** (2.0 - alpha) / d2 * math.fsum(terms)
        mine = eigenvalue(ell, KernelParams(alpha, delta), RECURRENCE)
        assert mine == pytest.approx(ref, rel=5e-13)


@pytest.mark.parametrize("ell", [1, 5, 30, 101])
def test_node_count_independence_under_recurrence(ell):
    # the integrand is a degree ell-1 polynomial: doubling the panel count
    # must not change the integral beyond roundoff
    params = KernelParams(0.3, 0.7)
    base = max(ell + 1, 8)
    a = _eigenvalue_with_panels(ell, params, RECURRENCE, base)
    b = _eigenvalue_with_panels(ell, params, RECURRENCE, 2 * base)
    assert b == pytest.approx(a, rel=1e-12)


BOUND_GRID_ALPHAS = (-0.9, -0.5, 0.0, 0.5, 0.9)
BOUND_GRID_DELTAS = (0.01, 0.1, 1.0, 2.0)


@pytest.mark.parametrize("alpha", BOUND_GRID_ALPHAS)
@pytest.mark.parametrize("delta", BOUND_GRID_DELTAS)
def test_bounds_on_parameter_grid(alpha, delta):
    # -ell(ell+1) <= lambda <= 0 with slack 1e-8 * ell(ell+1); degree 60
    # here keeps the module suite fast, the acceptance suite runs 200
    sp = spectrum(60, KernelParams(alpha, delta))
    ells = np.arange(61, dtype=float)
    tol = 1e-8 * ells * (ells + 1.0)
    assert np.all(sp.values <= tol)
    assert np.all(sp.values >= -ells * (ells + 1.0) - tol)


@pytest.mark.parametrize("alpha", BOUND_GRID_ALPHAS)
def test_monotonicity_where_claimed(alpha):
    # eigenvalue sequences decrease in ell for alpha <= 0; for positive
    # alpha at moderate horizons they genuinely oscillate while settling
    # toward their large-ell plateau, so there the check only warns
    for delta in BOUND_GRID_DELTAS:
        sp = spectrum(60, KernelParams(alpha, delta))
        increases = np.diff(sp.values) > 1e-10
        if alpha <= 0.0:
            assert not increases.any(), (alpha, delta)
        elif increases.any():
            warnings.warn(
                f"eigenvalues not monotone at alpha={alpha}, delta={delta} "
                f"({int(increases.sum())} increases); expected for positive alpha",
                stacklevel=1,
            )


def test_local_eigenvalue_values():
    assert local_eigenvalue(0) == 0.0
    assert local_eigenvalue(1) == -2.0
    assert local_eigenvalue(10) == -110.0
    with pytest.raises(ValueError):
        local_eigenvalue(-1)


def test_local_spectrum_object():
    sp = local_spectrum(4)
    assert sp.params is None
    assert sp.degree == 4
    np.testing.assert_array_equal(sp.values, [0.0, -2.0, -6.0, -12.0, -20.0])


def test_spectrum_object_immutable():
    sp = spectrum(3, KernelParams(0.0, 1.0))
    assert len(sp) == 4
    assert sp.degree == 3
    with pytest.raises(ValueError):
        sp.values[1] = 0.0
    with pytest.raises(Exception):
        sp.values = np.zeros(4)


def test_eigenvalue_argument_validation():
    params = KernelParams(0.0, 1.0)
    with pytest.raises(ValueError):
        eigenvalue(-1, params)
    with pytest.raises(TypeError):
        eigenvalue(2, (0.0, 1.0))
    with pytest.raises(TypeError):
        eigenvalue(2, params, "hybrid")


def test_write_spectrum_format(tmp_path):
    sp = spectrum(3, KernelParams(-0.5, 2.0), RECURRENCE)
    path = tmp_path / "spec.csv"
    write_spectrum(sp, path, comment="kernel alpha=-0.5 delta=2")
    text = path.read_text()
    lines = text.splitlines()
    assert lines[0] == "# kernel alpha=-0.5 delta=2"
    assert lines[1] == "ell,lambda"
    assert lines[2] == "0,0"
    assert len(lines) == 6
    # deterministic: writing again yields identical bytes
    path2 = tmp_path / "spec2.csv"
    write_spectrum(spectrum(3, KernelParams(-0.5, 2.0), RECURRENCE), path2,
                   comment="kernel alpha=-0.5 delta=2")
    assert path.read_bytes() == path2.read_bytes()
    # full precision round trip
    data = np.genfromtxt(path, delimiter=",", skip_header=2)
    np.testing.assert_array_equal(data[:, 1], sp.values)

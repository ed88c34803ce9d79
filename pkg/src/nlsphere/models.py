"""Concrete model problems built on the spectral toolbox.

Provides the nonlocal Poisson solve with a mean condition, Allen--Cahn
and Brusselator reaction--diffusion setups for the ETDRK4 integrator,
the Ginzburg--Landau free energy, Cesaro smoothing of coefficient
expansions, and reproducible random fields.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .spectrum import DEFAULT_METHOD, KernelParams, Spectrum, local_spectrum
from .spectrum import spectrum as _spectrum
from .sht import SphereGrid, SphHarmCoeffs, _layout, synthesis
from .timestep import DiagonalOperator

__all__ = [
    "PoissonProblem",
    "solve_poisson",
    "AllenCahnConfig",
    "BrusselatorConfig",
    "allen_cahn_nonlinearity",
    "allen_cahn_operator",
    "brusselator_nonlinearities",
    "brusselator_operators",
    "build_spectrum",
    "ginzburg_landau_energy",
    "EnergyRecorder",
    "CesaroWeights",
    "cesaro_weights",
    "cesaro_apply",
    "random_coeffs",
    "embed",
    "integrate_grid",
    "death_star_rhs",
    "cos10xy",
    "north_south_step",
]


def build_spectrum(degree, kernel=None, method=None):
    """Eigenvalue table for a kernel, or the local spectrum if kernel is None."""
    if kernel is None:
        return local_spectrum(degree)
    if not isinstance(kernel, KernelParams):
        raise TypeError(f"kernel must be KernelParams or None, got {kernel!r}")
    return _spectrum(degree, kernel, method or DEFAULT_METHOD)


def embed(coeffs, degree):
    """Zero-pad a coefficient set into a layout of higher degree."""
    n = coeffs.degree
    if degree < n:
        raise ValueError(f"target degree {degree} is below the input degree {n}")
    if degree == n:
        return coeffs.copy()
    out = SphHarmCoeffs(degree)
    out.data[: n + 1, 0] = coeffs.data[:, 0]
    for m in range(1, n + 1):
        rows = n - m + 1
        out.data[:rows, 2 * m - 1 : 2 * m + 1] = coeffs.data[
            :rows, 2 * m - 1 : 2 * m + 1
        ]
    return out


def integrate_grid(values, grid):
    """Quadrature of grid values over the sphere.

    Longitudes carry the uniform periodic-trapezoid weight 2*pi/(2n+1);
    colatitudes carry the Gauss--Legendre weights in cos(theta), which
    absorb the sin(theta) surface factor.  Exact for integrands of
    harmonic degree <= 2n.
    """
    values = np.asarray(values, dtype=float)
    n = grid.degree
    if values.shape != (n + 1, 2 * n + 1):
        raise ValueError(f"values shape {values.shape} does not match grid degree {n}")
    return float(
        np.dot(grid.colat_weights, values.sum(axis=1)) * (2.0 * np.pi / (2 * n + 1))
    )


# ----------------------------------------------------------------------
# Poisson with mean condition
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class PoissonProblem:
    """Right-hand side and operator eigenvalues of one Poisson solve."""

    rhs: SphHarmCoeffs
    spectrum: Spectrum

    def __post_init__(self):
        if not isinstance(self.rhs, SphHarmCoeffs):
            raise TypeError(f"rhs must be SphHarmCoeffs, got {self.rhs!r}")
        if not isinstance(self.spectrum, Spectrum):
            raise TypeError(f"spectrum must be Spectrum, got {self.spectrum!r}")
        if self.rhs.degree != self.spectrum.degree:
            raise ValueError(
                f"degree mismatch: rhs {self.rhs.degree}, "
                f"spectrum {self.spectrum.degree}"
            )


def solve_poisson(problem):
    """Modewise division by the eigenvalues, with the mean pinned.

    The operator annihilates constants, so the mean slot is replaced by a
    unit entry: the solution inherits the mean of the right-hand side and
    is otherwise u_l^m = f_l^m / lambda(l).
    """
    spec = problem.spectrum
    if spec.values[0] != 0.0:
        raise ValueError(
            f"spectrum must annihilate constants, got lambda(0) = {spec.values[0]}"
        )
    if np.any(spec.values[1:] == 0.0):
        bad = 1 + int(np.flatnonzero(spec.values[1:] == 0.0)[0])
        raise ZeroDivisionError(
            f"eigenvalue at degree {bad} is zero; the kernel is degenerate and "
            "the Poisson problem is singular beyond the mean mode"
        )
    n = spec.degree
    denom = DiagonalOperator(spec.values).dense().copy()
    denom[0, 0] = 1.0
    _, valid = _layout(n)
    denom[~valid] = 1.0  # keep structural zeros as 0/1
    return SphHarmCoeffs(n, problem.rhs.data / denom)


# ----------------------------------------------------------------------
# reaction-diffusion models
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class AllenCahnConfig:
    """Phase-field flow with diffusion eps^2 * L and reaction u - u^3."""

    epsilon: float
    kernel: KernelParams | None
    degree: int
    h: float
    steps: int

    def __post_init__(self):
        _check_model_common(self)
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class BrusselatorConfig:
    """Coupled activator--inhibitor system.

    Fields follow u_t = eps^2 L u + eps^2 E - u + f u^2 v and
    tau v_t = L v + eps^{-2} (u - u^2 v).  By default the -u decay stays
    in the nonlinearity; decay_in_linear folds it into the (diagonal)
    linear part instead, which the exponential integrator then treats
    exactly.
    """

    E: float
    epsilon: float
    tau: float
    f: float
    kernel: KernelParams | None
    degree: int
    h: float
    steps: int
    decay_in_linear: bool = False

    def __post_init__(self):
        _check_model_common(self)
        for name in ("E", "epsilon", "tau"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v}")
        if not (math.isfinite(self.f) and 0.0 < self.f < 1.0):
            raise ValueError(f"f must lie in (0, 1), got {self.f}")

    def equilibrium(self):
        """Spatially constant steady state (u_e, v_e = 1/u_e)."""
        u_e = self.epsilon**2 * self.E / (1.0 - self.f)
        return u_e, 1.0 / u_e


def _check_model_common(cfg):
    if cfg.kernel is not None and not isinstance(cfg.kernel, KernelParams):
        raise TypeError(f"kernel must be KernelParams or None, got {cfg.kernel!r}")
    if not isinstance(cfg.degree, (int, np.integer)) or cfg.degree < 0:
        raise ValueError(f"degree must be a non-negative integer, got {cfg.degree!r}")
    if not (math.isfinite(cfg.h) and cfg.h > 0):
        raise ValueError(f"h must be positive, got {cfg.h}")
    if not isinstance(cfg.steps, (int, np.integer)) or cfg.steps < 1:
        raise ValueError(f"steps must be a positive integer, got {cfg.steps!r}")


def allen_cahn_nonlinearity(u):
    """Pointwise cubic reaction u - u^3."""
    u = np.asarray(u, dtype=float)
    return u - u * u * u


def allen_cahn_operator(cfg, spec):
    """Diagonal linear part eps^2 * L from a precomputed spectrum."""
    if spec.degree != cfg.degree:
        raise ValueError(f"spectrum degree {spec.degree} != config degree {cfg.degree}")
    return DiagonalOperator.from_spectrum(spec, prefactor=cfg.epsilon**2)


def brusselator_nonlinearities(u, v, cfg):
    """Reaction terms (N_u, N_v) on grid values, honoring the decay split."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    uuv = u * u * v
    n_u = cfg.epsilon**2 * cfg.E + cfg.f * uuv
    if not cfg.decay_in_linear:
        n_u = n_u - u
    n_v = (u - uuv) / (cfg.tau * cfg.epsilon**2)
    return n_u, n_v


def brusselator_operators(cfg, spec):
    """Diagonal linear parts (eps^2 * L, L / tau), plus -1 if the decay moved."""
    if spec.degree != cfg.degree:
        raise ValueError(f"spectrum degree {spec.degree} != config degree {cfg.degree}")
    if cfg.decay_in_linear:
        op_u = DiagonalOperator(cfg.epsilon**2 * spec.values - 1.0)
    else:
        op_u = DiagonalOperator.from_spectrum(spec, prefactor=cfg.epsilon**2)
    return op_u, DiagonalOperator.from_spectrum(spec, prefactor=1.0 / cfg.tau)


# ----------------------------------------------------------------------
# Ginzburg--Landau free energy
# ----------------------------------------------------------------------

_REFINED_GRIDS = {}


def _refined_grid(degree):
    grid = _REFINED_GRIDS.get(degree)
    if grid is None:
        grid = SphereGrid(degree)
        _REFINED_GRIDS[degree] = grid
    return grid


def ginzburg_landau_energy(u, spec, epsilon, grid=None):
    """Free energy -(eps^2/2) sum lambda (u_l^m)^2 + (1/4) int (u^2-1)^2.

    The diffusion term reduces to a coefficient sum by orthonormality.
    The quartic term has band limit 4n, so it is synthesized and
    integrated on a degree-2n grid (built on demand and cached) unless a
    sufficiently fine grid is supplied.
    """
    if not isinstance(u, SphHarmCoeffs):
        raise TypeError(f"u must be SphHarmCoeffs, got {u!r}")
    if spec.degree != u.degree:
        raise ValueError(f"degree mismatch: coefficients {u.degree}, spectrum {spec.degree}")
    n = u.degree
    lam = DiagonalOperator(spec.values).dense()
    linear = -0.5 * epsilon**2 * float(np.sum(lam * u.data * u.data))
    if grid is None:
        grid = _refined_grid(2 * n)
    elif grid.degree < n:
        raise ValueError(f"grid degree {grid.degree} is below the field degree {n}")
    vals = synthesis(embed(u, grid.degree), grid)
    quartic = (vals * vals - 1.0) ** 2
    return linear + 0.25 * integrate_grid(quartic, grid)


class EnergyRecorder:
    """Observer for `evolve` that records (t, energy) of the first field."""

    def __init__(self, spec, epsilon, grid=None):
        self.spec = spec
        self.epsilon = epsilon
        self.grid = grid
        self.times = []
        self.energies = []

    def __call__(self, step, t, state):
        u = state[0] if isinstance(state, tuple) else state
        self.times.append(t)
        self.energies.append(ginzburg_landau_energy(u, self.spec, self.epsilon, self.grid))

    def write(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("# t,energy\n")
            for t, e in zip(self.times, self.energies):
                fh.write(f"{t:.17g},{e:.17g}\n")


# ----------------------------------------------------------------------
# Cesaro means
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class CesaroWeights:
    """Degreewise taper factors A_{n-l}^kappa / A_n^kappa, l = 0..n."""

    kappa: int
    degree: int
    factors: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.factors.setflags(write=False)


def cesaro_weights(degree, kappa):
    """Taper factors with A_l^kappa = C(l + kappa, l); exact integer ratios."""
    if not isinstance(kappa, (int, np.integer)) or kappa < 0:
        raise ValueError(f"kappa must be a non-negative integer, got {kappa!r}")
    if not isinstance(degree, (int, np.integer)) or degree < 0:
        raise ValueError(f"degree must be a non-negative integer, got {degree!r}")
    n, kappa = int(degree), int(kappa)
    a_n = math.comb(n + kappa, n)
    factors = np.array(
        [math.comb(n - ell + kappa, n - ell) / a_n for ell in range(n + 1)]
    )
    return CesaroWeights(kappa=kappa, degree=n, factors=factors)


def cesaro_apply(coeffs, kappa):
    """Scale degree-l coefficients by A_{n-l}^kappa / A_n^kappa; kappa=0 is identity."""
    w = cesaro_weights(coeffs.degree, kappa)
    if w.kappa == 0:
        return coeffs.copy()
    deg, _ = _layout(coeffs.degree)
    return SphHarmCoeffs(coeffs.degree, coeffs.data * w.factors[deg])


# ----------------------------------------------------------------------
# reproducible fields and built-in right-hand sides
# ----------------------------------------------------------------------

def random_coeffs(degree_cap, degree, scale, seed):
    """Independent N(0, scale^2) coefficients up to degree_cap, zero above.

    Draw order is fixed by contract: a counter-based Philox generator
    seeded by `seed` produces (degree_cap + 1)^2 standard normals that
    fill the valid slots of the degree-cap layout in row-major order; the
    block is then zero-padded to the requested degree.  Deterministic
    across runs and platforms.
    """
    if not isinstance(degree_cap, (int, np.integer)) or degree_cap < 0:
        raise ValueError(f"degree_cap must be a non-negative integer, got {degree_cap!r}")
    if degree_cap > degree:
        raise ValueError(f"degree_cap {degree_cap} exceeds the layout degree {degree}")
    scale = float(scale)
    if not math.isfinite(scale):
        raise ValueError(f"scale must be finite, got {scale}")
    cap = int(degree_cap)
    rng = np.random.Generator(np.random.Philox(int(seed)))
    draws = rng.standard_normal((cap + 1) ** 2)
    small = SphHarmCoeffs(cap)
    _, valid = _layout(cap)
    small.data[valid] = scale * draws
    return embed(small, int(degree))


def _grid_xyz(grid):
    # colatitude theta down rows, longitude phi across columns
    st = np.sin(grid.colat_nodes)[:, None]
    x = st * np.cos(grid.lon_nodes)[None, :]
    y = st * np.sin(grid.lon_nodes)[None, :]
    z = np.broadcast_to(grid.colat_cos[:, None], x.shape)
    return x, y, z


def death_star_rhs(grid):
    """Gaussian dimple plus an equatorial band, evaluated on the grid."""
    x, y, z = _grid_xyz(grid)
    bump = np.exp(
        -30.0 * ((x - 0.25) ** 2 + (y - math.sqrt(11.0) / 4.0) ** 2 + (z - 0.25) ** 2)
    )
    return -bump - np.exp(-50.0 * z * z)


def cos10xy(grid):
    """cos(10xy) on the grid; a standard phase-field initial condition."""
    x, y, _ = _grid_xyz(grid)
    return np.cos(10.0 * x * y)


def _legendre_at_zero(k):
    # P_k(0): zero for odd k, (-1)^j C(2j,j)/4^j for k = 2j
    if k % 2:
        return 0.0
    j = k // 2
    return (-1) ** j * math.comb(2 * j, j) / 4.0**j


def north_south_step(degree):
    """Exact expansion coefficients of sign(z): +1 north cap, -1 south.

    Only odd zonal modes survive; each uses the closed form
    int_0^1 P_l = [P_{l-1}(0) - P_{l+1}(0)] / (2l + 1).  The partial sums
    exhibit the classical overshoot near the equator, which Cesaro
    smoothing removes.
    """
    c = SphHarmCoeffs(degree)
    for ell in range(1, degree + 1, 2):
        half_int = (_legendre_at_zero(ell - 1) - _legendre_at_zero(ell + 1)) / (
            2 * ell + 1
        )
        c.set(
            ell, 0, 2.0 * half_int * math.sqrt(2.0 * math.pi * (2 * ell + 1) / 2.0)
        )
    return c

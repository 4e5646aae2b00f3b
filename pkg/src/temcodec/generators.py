"""Generator functions for shift-invariant signal spaces.

A generator is the single function whose integer shifts span the signal
space.  This module evaluates the shipped families (cardinal B-splines,
sinc, tabulated samples), their derivatives, antiderivatives and Fourier
transforms, and derives the spectral quantities that control sampling:
the aliased-energy profile, the frame bounds and the critical density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateFrameError,
    NonConvergentTailError,
    OutOfTableError,
    UnboundedDerivativeProfileError,
    UnsupportedOrderError,
)

__all__ = [
    "GeneratorSpec",
    "SpectralProfile",
    "FrameBounds",
    "DensityBound",
    "eval_generator",
    "generator_fourier",
    "spectral_profile",
    "frame_bounds",
    "density_bound",
]

_ORDERS = ("value", "derivative", "antiderivative")


@dataclass(frozen=True)
class GeneratorSpec:
    """Description of a space generator.

    Parameters
    ----------
    family : {'bspline', 'sinc', 'tabulated'}
    period : int
        Period K of the signal space; shifts are taken mod K.
    degree : int, optional
        B-spline degree d >= 0 (support length d + 1).
    centered : bool
        Center B-splines at 0 (support symmetric about the origin).
        Ignored for sinc and tabulated families, which are always centered.
    samples, step : tuple of float, float
        Sample table for the tabulated family; the samples cover
        [-(n-1)*step/2, (n-1)*step/2] and evaluation uses linear
        interpolation.
    """

    family: str
    period: int
    degree: int | None = None
    centered: bool = True
    samples: tuple[float, ...] | None = None
    step: float | None = None

    def __post_init__(self):
        if self.family not in ("bspline", "sinc", "tabulated"):
            raise ValueError(f"unknown generator family {self.family!r}")
        if self.period < 1:
            raise ValueError("period must be a positive integer")
        if self.family == "bspline":
            if self.degree is None or self.degree < 0:
                raise ValueError("bspline family needs degree >= 0")
        if self.family == "tabulated":
            if not self.samples or self.step is None or self.step <= 0:
                raise ValueError("tabulated family needs samples and step > 0")

    # -- constructors --------------------------------------------------------

    @staticmethod
    def bspline(degree: int, period: int, centered: bool = True) -> "GeneratorSpec":
        return GeneratorSpec("bspline", period, degree=degree, centered=centered)

    @staticmethod
    def sinc(period: int) -> "GeneratorSpec":
        return GeneratorSpec("sinc", period)

    @staticmethod
    def tabulated(samples, step: float, period: int) -> "GeneratorSpec":
        return GeneratorSpec(
            "tabulated", period, samples=tuple(float(s) for s in samples), step=float(step)
        )

    # -- geometry --------------------------------------------------------------

    @property
    def support(self) -> float:
        """Support length S (inf for sinc)."""
        if self.family == "bspline":
            return float(self.degree + 1)
        if self.family == "tabulated":
            return (len(self.samples) - 1) * self.step
        return math.inf

    @property
    def is_compact(self) -> bool:
        return self.family != "sinc"

    @property
    def bspline_offset(self) -> float:
        """Shift applied to evaluation points for non-centered splines."""
        if self.family == "bspline" and not self.centered:
            return (self.degree + 1) / 2.0
        return 0.0


@dataclass(frozen=True)
class SpectralProfile:
    """Aliased-energy profiles sampled on a uniform frequency grid.

    ``g_lambda[i]`` is the square root of the alias sum of the generator's
    Fourier transform at ``omega_grid[i]``; ``g_lambda_prime`` is the same
    quantity for the derivative.  ``tail_bound``/``tail_bound_prime`` bound
    the alias mass dropped by truncating the sum at ``k_max`` rings.
    """

    omega_grid: np.ndarray
    g_lambda: np.ndarray
    g_lambda_prime: np.ndarray
    k_max: int
    tail_bound: float = 0.0
    tail_bound_prime: float = math.inf

    def __post_init__(self):
        if self.g_lambda.shape != self.omega_grid.shape:
            raise ValueError("g_lambda grid mismatch")
        if self.g_lambda_prime.shape != self.omega_grid.shape:
            raise ValueError("g_lambda_prime grid mismatch")
        if not np.all(np.isfinite(self.g_lambda)) or np.any(self.g_lambda < 0):
            raise ValueError("g_lambda entries must be finite and >= 0")
        if np.any(self.g_lambda_prime < 0):
            raise ValueError("g_lambda_prime entries must be >= 0")


@dataclass(frozen=True)
class FrameBounds:
    """Extrema of the aliased-energy profile: 0 < lower <= upper."""

    lower: float
    upper: float

    def __post_init__(self):
        if not (0 < self.lower <= self.upper < math.inf):
            raise ValueError("frame bounds must satisfy 0 < A <= B < inf")


@dataclass(frozen=True)
class DensityBound:
    """Critical spike density tau; trains with gaps < tau are decodable."""

    tau: float

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.tau)


# ---------------------------------------------------------------------------
# cardinal B-splines (iterative Cox-de Boor on the uniform integer knots)
# ---------------------------------------------------------------------------

def _bspline_value(degree: int, x: np.ndarray) -> np.ndarray:
    """Centered cardinal B-spline of the given degree, vectorized."""
    u = np.asarray(x, dtype=float) + (degree + 1) / 2.0
    # level-0 basis: indicators of the unit knot intervals [j, j+1)
    levels = [((u >= j) & (u < j + 1)).astype(float) for j in range(degree + 1)]
    for k in range(1, degree + 1):
        inv = 1.0 / k
        levels = [
            (u - j) * inv * levels[j] + (j + k + 1 - u) * inv * levels[j + 1]
            for j in range(degree + 1 - k)
        ]
    return levels[0]


def _bspline_derivative(degree: int, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return _bspline_value(degree - 1, x + 0.5) - _bspline_value(degree - 1, x - 0.5)


def _bspline_antiderivative(degree: int, x: np.ndarray) -> np.ndarray:
    # integral of a degree-d spline telescopes into shifted degree-(d+1) splines
    x = np.asarray(x, dtype=float)
    half = (degree + 1) / 2.0
    out = np.where(x >= half, 1.0, 0.0)
    mid = (x > -half) & (x < half)
    if np.any(mid):
        xm = x[mid]
        acc = np.zeros_like(xm)
        for j in range(degree + 2):
            acc += _bspline_value(degree + 1, xm - 0.5 - j)
        out[mid] = acc
    return out


# ---------------------------------------------------------------------------
# sinc
# ---------------------------------------------------------------------------

def _sinc_derivative(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    xs = np.where(small, 1.0, x)  # avoid 0/0, the branch is discarded
    gen = (np.cos(np.pi * xs) - np.sinc(xs)) / xs
    taylor = -(np.pi ** 2) * x / 3.0 + (np.pi ** 4) * x ** 3 / 30.0
    return np.where(small, taylor, gen)


# ---------------------------------------------------------------------------
# tabulated
# ---------------------------------------------------------------------------

def _table_axis(spec: GeneratorSpec) -> np.ndarray:
    n = len(spec.samples)
    return (np.arange(n) - (n - 1) / 2.0) * spec.step


def _tabulated_eval(spec: GeneratorSpec, x: np.ndarray, order: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    axis = _table_axis(spec)
    lo, hi = axis[0], axis[-1]
    if np.any(x < lo - 1e-12) or np.any(x > hi + 1e-12):
        raise OutOfTableError(
            f"tabulated generator queried outside coverage [{lo}, {hi}]"
        )
    vals = np.asarray(spec.samples, dtype=float)
    if order == "value":
        return np.interp(x, axis, vals)
    idx = np.clip(np.searchsorted(axis, x, side="right") - 1, 0, len(axis) - 2)
    slope = (vals[idx + 1] - vals[idx]) / spec.step
    if order == "derivative":
        return slope
    # antiderivative of the linear interpolant: piecewise quadratic
    seg = 0.5 * (vals[1:] + vals[:-1]) * spec.step
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    dt = x - axis[idx]
    return cum[idx] + vals[idx] * dt + 0.5 * slope * dt ** 2


# ---------------------------------------------------------------------------
# public evaluation
# ---------------------------------------------------------------------------

def eval_generator(spec: GeneratorSpec, t, order: str = "value"):
    """Evaluate the generator, its derivative or its antiderivative.

    Parameters
    ----------
    spec : GeneratorSpec
    t : float or array_like
    order : {'value', 'derivative', 'antiderivative'}
        The antiderivative is the integral from -inf, which is only defined
        for compactly supported generators.

    Returns
    -------
    float or ndarray, matching the shape of ``t``.

    Raises
    ------
    UnsupportedOrderError
        Derivative of the degree-0 spline, or antiderivative of sinc.
    OutOfTableError
        Tabulated generator queried outside its sample coverage.
    """
    if order not in _ORDERS:
        raise ValueError(f"order must be one of {_ORDERS}")
    scalar = np.isscalar(t) or (isinstance(t, np.ndarray) and t.ndim == 0)
    x = np.atleast_1d(np.asarray(t, dtype=float))

    if spec.family == "bspline":
        x = x - spec.bspline_offset
        if order == "value":
            out = _bspline_value(spec.degree, x)
        elif order == "derivative":
            if spec.degree < 1:
                raise UnsupportedOrderError("degree-0 spline has no a.e. derivative")
            out = _bspline_derivative(spec.degree, x)
        else:
            out = _bspline_antiderivative(spec.degree, x)
    elif spec.family == "sinc":
        if order == "value":
            out = np.sinc(x)
        elif order == "derivative":
            out = _sinc_derivative(x)
        else:
            raise UnsupportedOrderError("sinc has no L1 antiderivative")
    else:
        out = _tabulated_eval(spec, x, order)

    return float(out[0]) if scalar else out


def generator_fourier(spec: GeneratorSpec, omega):
    """Fourier transform of the generator at ``omega`` (complex).

    Closed forms for the analytic families; trapezoid quadrature of the
    defining integral for tabulated generators.
    """
    scalar = np.isscalar(omega) or (isinstance(omega, np.ndarray) and omega.ndim == 0)
    w = np.atleast_1d(np.asarray(omega, dtype=float))

    if spec.family == "bspline":
        half = w / 2.0
        core = np.ones_like(w)
        nz = half != 0
        core[nz] = np.sin(half[nz]) / half[nz]
        out = core ** (spec.degree + 1) + 0j
        if not spec.centered:
            out = out * np.exp(-1j * w * spec.bspline_offset)
    elif spec.family == "sinc":
        out = ((w >= -np.pi) & (w < np.pi)).astype(complex)
    else:
        axis = _table_axis(spec)
        vals = np.asarray(spec.samples, dtype=float)
        weights = np.full(len(axis), spec.step)
        weights[0] *= 0.5
        weights[-1] *= 0.5
        wv = weights * vals
        out = np.empty(w.shape, dtype=complex)
        chunk = max(1, 2 ** 22 // max(len(axis), 1))  # cap the outer product
        for i in range(0, len(w), chunk):
            out[i : i + chunk] = np.exp(-1j * np.outer(w[i : i + chunk], axis)) @ wv

    return complex(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# spectral profiles
# ---------------------------------------------------------------------------

def _default_k_max(spec: GeneratorSpec) -> int:
    # one ring is exact for sinc; spline tails decay like k^-(d+1)
    return 1 if spec.family == "sinc" else 64


def _bspline_tail(degree: int, k_max: int) -> tuple[float, float]:
    # |lambda_hat(w)| <= (2/|w|)^(d+1) and |w + 2k pi| >= (2|k|-1) pi on the grid
    ks = np.arange(k_max + 1, k_max + 20001)
    base = 2.0 / ((2 * ks - 1) * np.pi)
    tail_val = 2.0 * float(np.sum(base ** (2 * degree + 2)))
    if degree >= 1:
        tail_der = 2.0 * float(np.sum(4.0 * base ** (2 * degree)))
    else:
        tail_der = math.inf  # the box derivative alias sum diverges
    return tail_val, tail_der


def spectral_profile(
    spec: GeneratorSpec,
    grid_size: int = 4096,
    k_max: int | None = None,
    tail_tol: float = 1e-8,
) -> SpectralProfile:
    """Truncated alias sums of |lambda_hat|^2 and |omega lambda_hat|^2.

    Both profiles are evaluated on a uniform grid over [0, 2 pi) by summing
    the rings |k| <= k_max of the alias series.  For spline generators a
    rigorous bound on the dropped tail is recorded; for tabulated
    generators the tail is estimated geometrically and an error is raised
    when it exceeds ``tail_tol``.

    Raises
    ------
    NonConvergentTailError
        Tabulated generator whose alias tail estimate exceeds ``tail_tol``.
    """
    if grid_size < 64:
        raise ValueError("grid_size must be >= 64")
    if k_max is None:
        k_max = _default_k_max(spec)
    if k_max < 1:
        raise ValueError("k_max must be >= 1")

    omega = np.arange(grid_size) * (2.0 * np.pi / grid_size)
    ks = np.arange(-k_max, k_max + 1)
    walias = omega[None, :] + 2.0 * np.pi * ks[:, None]
    lam2 = np.abs(generator_fourier(spec, walias.ravel()).reshape(walias.shape)) ** 2
    g2 = lam2.sum(axis=0)
    gp2 = (walias ** 2 * lam2).sum(axis=0)

    if spec.family == "bspline":
        tail_val, tail_der = _bspline_tail(spec.degree, k_max)
    elif spec.family == "sinc":
        tail_val, tail_der = 0.0, 0.0
    else:
        # geometric extrapolation of the outermost two rings
        outer = lam2[0] + lam2[-1]
        inner = lam2[1] + lam2[-2]
        r = float(np.max(outer) / max(np.max(inner), 1e-300))
        tail_val = float(np.max(outer)) * (r / (1 - r) if r < 1 else math.inf)
        tail_der = tail_val * float(np.max(walias ** 2))
        if not tail_val < tail_tol:
            raise NonConvergentTailError(
                f"alias tail estimate {tail_val:.3g} exceeds tolerance {tail_tol:.3g}"
            )

    return SpectralProfile(
        omega_grid=omega,
        g_lambda=np.sqrt(g2),
        g_lambda_prime=np.sqrt(gp2),
        k_max=int(k_max),
        tail_bound=tail_val,
        tail_bound_prime=tail_der,
    )


def frame_bounds(profile: SpectralProfile, floor: float = 1e-12) -> FrameBounds:
    """Frame bounds A (grid min) and B (grid max) of the shift system.

    Raises
    ------
    DegenerateFrameError
        If the grid minimum falls below ``floor``: at this resolution the
        shifts do not form a frame.
    """
    if profile.omega_grid.size == 0:
        raise ValueError("empty profile")
    lower = float(profile.g_lambda.min())
    upper = float(profile.g_lambda.max())
    if lower < floor:
        raise DegenerateFrameError(
            f"lower frame bound {lower:.3g} below floor {floor:.3g}"
        )
    return FrameBounds(lower=lower, upper=upper)


def density_bound(profile: SpectralProfile) -> DensityBound:
    """Critical density tau = pi * min over the grid of G / G'.

    Grid points where the derivative profile vanishes do not constrain the
    minimum; if it vanishes identically the bound is infinite (constant
    signals are recoverable from arbitrarily sparse trains).

    Raises
    ------
    UnboundedDerivativeProfileError
        If the derivative profile contains a non-finite entry.
    """
    gp = profile.g_lambda_prime
    if not np.all(np.isfinite(gp)):
        raise UnboundedDerivativeProfileError("derivative profile has non-finite entries")
    mask = gp > 0
    if not np.any(mask):
        return DensityBound(tau=math.inf)
    tau = np.pi * float(np.min(profile.g_lambda[mask] / gp[mask]))
    return DensityBound(tau=tau)

"""Generator evaluation, Fourier transforms, spectral profiles and bounds."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

import temcodec as tc
from temcodec.errors import (
    DegenerateFrameError,
    NonConvergentTailError,
    OutOfTableError,
    UnboundedDerivativeProfileError,
    UnsupportedOrderError,
)
from temcodec.generators import SpectralProfile

from helpers import scipy_bspline

# frozen analytic anchors for the cubic generator (computed before the build)
CUBIC_A = 0.2323106841457232            # sqrt(17/315)
CUBIC_TAU_EXACT = 0.9993547764221936    # pi * sqrt(17/168)
CUBIC_TAU_GRID = 0.99935477642359027    # grid 4096, k_max 64


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def test_bspline_peak_values():
    hat = tc.GeneratorSpec.bspline(1, 50)
    assert tc.eval_generator(hat, 0.0) == 1.0
    cubic = tc.GeneratorSpec.bspline(3, 50)
    assert tc.eval_generator(cubic, 0.0) == pytest.approx(2.0 / 3.0, abs=1e-15)
    assert tc.eval_generator(cubic, 1.0) == pytest.approx(1.0 / 6.0, abs=1e-15)
    assert tc.eval_generator(cubic, 0.5) == pytest.approx(23.0 / 48.0, abs=1e-15)
    assert tc.eval_generator(cubic, 2.0) == 0.0


@pytest.mark.parametrize("degree", [0, 1, 2, 3, 4, 5])
def test_bspline_matches_scipy(degree):
    spec = tc.GeneratorSpec.bspline(degree, 50)
    oracle = scipy_bspline(degree)
    rng = np.random.default_rng(degree)
    x = rng.uniform(-4.0, 4.0, 200)
    np.testing.assert_allclose(tc.eval_generator(spec, x), oracle(x), atol=1e-13)


def test_box_antiderivative():
    box = tc.GeneratorSpec.bspline(0, 50)
    assert tc.eval_generator(box, 0.25, "antiderivative") == pytest.approx(0.75)
    assert tc.eval_generator(box, -0.5, "antiderivative") == 0.0
    assert tc.eval_generator(box, 0.5, "antiderivative") == 1.0
    assert tc.eval_generator(box, 3.0, "antiderivative") == 1.0


def test_sinc_values():
    spec = tc.GeneratorSpec.sinc(50)
    assert tc.eval_generator(spec, 0.0) == 1.0
    for k in (1, 2, 5, -3):
        assert tc.eval_generator(spec, float(k)) == pytest.approx(0.0, abs=1e-15)


def test_unsupported_orders():
    with pytest.raises(UnsupportedOrderError):
        tc.eval_generator(tc.GeneratorSpec.sinc(50), 0.3, "antiderivative")
    with pytest.raises(UnsupportedOrderError):
        tc.eval_generator(tc.GeneratorSpec.bspline(0, 50), 0.3, "derivative")


def test_noncentered_bspline_is_shifted():
    c = tc.GeneratorSpec.bspline(3, 50, centered=True)
    nc = tc.GeneratorSpec.bspline(3, 50, centered=False)
    x = np.linspace(-1.0, 5.0, 77)
    np.testing.assert_allclose(
        tc.eval_generator(nc, x), tc.eval_generator(c, x - 2.0), atol=1e-14
    )


def test_tabulated_eval_and_out_of_table():
    axis = np.linspace(-2.0, 2.0, 81)
    spec = tc.GeneratorSpec.tabulated(np.cos(axis * np.pi / 4) ** 2, 0.05, 50)
    assert tc.eval_generator(spec, 0.0) == pytest.approx(1.0)
    assert tc.eval_generator(spec, 0.025) == pytest.approx(
        0.5 * (np.cos(0 * np.pi / 4) ** 2 + np.cos(0.05 * np.pi / 4) ** 2)
    )
    with pytest.raises(OutOfTableError):
        tc.eval_generator(spec, 2.5)


@pytest.mark.parametrize("degree", [0, 1, 2, 3, 4, 5])
def test_partition_of_unity(degree):
    spec = tc.GeneratorSpec.bspline(degree, 50)
    rng = np.random.default_rng(100 + degree)
    t = rng.uniform(-10, 10, 100)
    total = sum(tc.eval_generator(spec, t - k) for k in range(-16, 17))
    np.testing.assert_allclose(total, 1.0, atol=1e-12)


@pytest.mark.parametrize("degree", [1, 2, 3, 4, 5])
def test_derivative_consistency(degree):
    spec = tc.GeneratorSpec.bspline(degree, 50)
    rng = np.random.default_rng(degree)
    # keep clear of the knot lattice where one-sided kinks live
    t = np.round(rng.uniform(-3, 3, 100) * 4) / 4 + 0.11
    h = 1e-6
    fd = (tc.eval_generator(spec, t + h) - tc.eval_generator(spec, t - h)) / (2 * h)
    np.testing.assert_allclose(tc.eval_generator(spec, t, "derivative"), fd, atol=1e-6)


def test_sinc_derivative_consistency():
    spec = tc.GeneratorSpec.sinc(50)
    rng = np.random.default_rng(3)
    t = rng.uniform(-5, 5, 100)
    h = 1e-6
    fd = (tc.eval_generator(spec, t + h) - tc.eval_generator(spec, t - h)) / (2 * h)
    np.testing.assert_allclose(tc.eval_generator(spec, t, "derivative"), fd, atol=1e-6)
    assert tc.eval_generator(spec, 0.0, "derivative") == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("degree", [0, 1, 3, 5])
def test_antiderivative_consistency(degree):
    spec = tc.GeneratorSpec.bspline(degree, 50)
    rng = np.random.default_rng(degree + 7)
    t = rng.uniform(-4, 4, 100)
    h = 1e-6
    fd = (
        tc.eval_generator(spec, t + h, "antiderivative")
        - tc.eval_generator(spec, t - h, "antiderivative")
    ) / (2 * h)
    np.testing.assert_allclose(fd, tc.eval_generator(spec, t), atol=1e-6)


# ---------------------------------------------------------------------------
# Fourier transforms
# ---------------------------------------------------------------------------

def test_fourier_closed_forms():
    sinc = tc.GeneratorSpec.sinc(50)
    assert tc.generator_fourier(sinc, np.pi / 2) == 1.0
    assert tc.generator_fourier(sinc, 3 * np.pi / 2) == 0.0
    assert tc.generator_fourier(sinc, -np.pi) == 1.0
    assert tc.generator_fourier(sinc, np.pi) == 0.0
    box = tc.GeneratorSpec.bspline(0, 50)
    assert tc.generator_fourier(box, 0.0) == 1.0
    cubic = tc.GeneratorSpec.bspline(3, 50)
    assert abs(tc.generator_fourier(cubic, 2 * np.pi)) == pytest.approx(0.0, abs=1e-30)


@pytest.mark.parametrize("degree", [0, 1, 2, 3, 4, 5])
def test_fourier_vs_quadrature(degree):
    spec = tc.GeneratorSpec.bspline(degree, 50)
    half = (degree + 1) / 2.0
    knots = np.arange(-half, half + 0.25, 0.5)  # piecewise-smooth between knots
    rng = np.random.default_rng(degree + 31)
    for w in rng.uniform(-12.0, 12.0, 20):
        re = im = 0.0
        for lo, hi in zip(knots[:-1], knots[1:]):
            re += quad(lambda t: tc.eval_generator(spec, t) * math.cos(w * t), lo, hi)[0]
            im += quad(lambda t: -tc.eval_generator(spec, t) * math.sin(w * t), lo, hi)[0]
        assert abs(tc.generator_fourier(spec, w) - complex(re, im)) < 1e-8


def test_fourier_tabulated_matches_trapezoid_of_table():
    axis = np.linspace(-2.0, 2.0, 401)
    samples = np.maximum(0.0, 1 - np.abs(axis) / 2)
    spec = tc.GeneratorSpec.tabulated(samples, 0.01, 50)
    # the tabulated transform approximates the hat-of-width-4 closed form
    w = 1.3
    exact = 2 * (np.sin(w) / w) ** 2  # width-2 hat scaled: integral 2
    assert abs(tc.generator_fourier(spec, w) - exact) < 1e-4


# ---------------------------------------------------------------------------
# spectral profiles, frame bounds, density
# ---------------------------------------------------------------------------

def test_profile_sinc_is_unity():
    prof = tc.spectral_profile(tc.GeneratorSpec.sinc(50))
    np.testing.assert_allclose(prof.g_lambda, 1.0, atol=1e-14)
    assert prof.k_max == 1
    fb = tc.frame_bounds(prof)
    assert fb.lower == fb.upper == 1.0


@pytest.mark.parametrize("degree", [1, 2, 3])
def test_profile_matches_autocorrelation_series(degree):
    """Alias sum == cosine series of the sampled autocorrelation, within the
    reported truncation tail (exact-route cross-check)."""
    spec = tc.GeneratorSpec.bspline(degree, 50)
    prof = tc.spectral_profile(spec)
    auto = scipy_bspline(2 * degree + 1)
    m = np.arange(-degree, degree + 1)
    r = auto(m.astype(float))
    closed = np.real(r @ np.exp(-1j * np.outer(m, prof.omega_grid)))
    np.testing.assert_allclose(prof.g_lambda ** 2, closed, atol=prof.tail_bound + 1e-12)


def test_profile_box_truncation_converges():
    box = tc.GeneratorSpec.bspline(0, 50)
    prof_default = tc.spectral_profile(box)
    # the box alias tail decays only like 1/k: ~2e-3 short of unity at k_max=64
    assert abs(prof_default.g_lambda.min() - 1.0) < 5e-3
    assert prof_default.tail_bound > 1e-4
    prof_big = tc.spectral_profile(box, grid_size=64, k_max=200000)
    np.testing.assert_allclose(prof_big.g_lambda, 1.0, atol=2e-6)


def test_profile_symmetry(cubic_profile):
    g = cubic_profile.g_lambda
    np.testing.assert_allclose(g[1:], g[1:][::-1], atol=1e-10)
    prof = tc.spectral_profile(tc.GeneratorSpec.sinc(50))
    np.testing.assert_allclose(prof.g_lambda[1:], prof.g_lambda[1:][::-1], atol=1e-14)


def test_frame_bounds_cubic(cubic_profile):
    fb = tc.frame_bounds(cubic_profile)
    assert fb.lower == pytest.approx(CUBIC_A, abs=1e-12)
    assert fb.upper == pytest.approx(1.0, abs=1e-12)
    # the minimum sits exactly at omega = pi
    i = np.argmin(cubic_profile.g_lambda)
    assert cubic_profile.omega_grid[i] == pytest.approx(np.pi, abs=1e-12)


def test_degenerate_frame_error():
    w = np.linspace(0, 2 * np.pi, 128, endpoint=False)
    prof = SpectralProfile(
        omega_grid=w, g_lambda=np.zeros_like(w), g_lambda_prime=np.ones_like(w), k_max=1
    )
    with pytest.raises(DegenerateFrameError):
        tc.frame_bounds(prof)


def test_density_bound_sinc_is_one():
    prof = tc.spectral_profile(tc.GeneratorSpec.sinc(50))
    db = tc.density_bound(prof)
    assert db.tau == pytest.approx(1.0, abs=1e-3)
    assert db.tau == pytest.approx(1.0, abs=1e-12)  # pi is on the even grid


def test_density_bound_cubic_golden(cubic_profile):
    db = tc.density_bound(cubic_profile)
    assert db.tau == pytest.approx(CUBIC_TAU_GRID, abs=1e-12)
    assert db.tau == pytest.approx(CUBIC_TAU_EXACT, abs=1e-9)


def test_density_bound_flags_infinite():
    w = np.linspace(0, 2 * np.pi, 128, endpoint=False)
    prof = SpectralProfile(
        omega_grid=w, g_lambda=np.ones_like(w), g_lambda_prime=np.zeros_like(w), k_max=1
    )
    db = tc.density_bound(prof)
    assert not db.is_finite
    bad = SpectralProfile(
        omega_grid=w,
        g_lambda=np.ones_like(w),
        g_lambda_prime=np.full_like(w, np.inf),
        k_max=1,
    )
    with pytest.raises(UnboundedDerivativeProfileError):
        tc.density_bound(bad)


def test_grid_refinement_stability(cubic_spec, cubic_profile):
    tau_default = tc.density_bound(cubic_profile).tau
    fine = tc.spectral_profile(cubic_spec, grid_size=16384, k_max=128)
    tau_fine = tc.density_bound(fine).tau
    assert abs(tau_default - tau_fine) < 1e-9


def test_tabulated_tail_check():
    # a finely sampled smooth bump decays well below its table Nyquist ring;
    # a 3-sample table has a flat transform and must be rejected
    axis = np.linspace(-2.0, 2.0, 81)
    bump = tc.GeneratorSpec.tabulated(np.cos(axis * np.pi / 4) ** 2, 0.05, 50)
    prof = tc.spectral_profile(bump, k_max=5, tail_tol=1e-3)
    assert np.all(prof.g_lambda >= 0)
    assert prof.tail_bound < 1e-3
    tri = tc.GeneratorSpec.tabulated([0.0, 1.0, 0.0], 1.0, 50)
    with pytest.raises(NonConvergentTailError):
        tc.spectral_profile(tri, k_max=32)


def test_profile_validation():
    with pytest.raises(ValueError):
        tc.spectral_profile(tc.GeneratorSpec.sinc(50), grid_size=32)
    with pytest.raises(ValueError):
        tc.spectral_profile(tc.GeneratorSpec.sinc(50), k_max=0)

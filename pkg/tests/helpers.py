"""Shared test utilities: random signals, random dense trains, independent
quadrature oracles built on scipy (never on the library's own quadrature)."""

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import BSpline

import temcodec as tc


def scipy_bspline(degree: int):
    """Independent centered cardinal B-spline via scipy's basis_element."""
    knots = np.arange(degree + 2) - (degree + 1) / 2.0
    basis = BSpline.basis_element(knots, extrapolate=False)

    def f(x):
        v = basis(np.atleast_1d(np.asarray(x, dtype=float)))
        return np.nan_to_num(v, nan=0.0)

    return f


def random_signal(spec, seed, normalize=False):
    rng = np.random.default_rng(seed)
    coeffs = rng.uniform(-1.0, 1.0, spec.period)
    sig = tc.PeriodicSignal(spec, coeffs)
    if normalize:
        sup = tc.norms(sig).sup_estimate
        sig = tc.PeriodicSignal(spec, coeffs / sup)
    return sig


def random_dense_train(K, T, seed):
    """Random strictly increasing train in [-K/2, K/2) whose gaps (wraparound
    included) all stay below 0.95 T."""
    rng = np.random.default_rng(seed)
    t0 = -K / 2.0 + rng.uniform(0.0, 0.3 * T)
    times = [t0]
    wrap_end = t0 + K
    while True:
        remaining = wrap_end - times[-1]
        if remaining <= 0.95 * T:
            break
        hi = min(0.95 * T, remaining - 0.3 * T)
        lo = min(0.35 * T, 0.9 * hi)
        times.append(times[-1] + rng.uniform(lo, hi))
    return tc.SpikeTrain(times=np.array(times), K=K)


def quad_periodic(func, K, a=0.0, pieces_per_unit=1):
    """Adaptive scipy quadrature of a scalar callable over [a, a + K]."""
    total = 0.0
    n = int(K * pieces_per_unit)
    edges = np.linspace(a, a + K, n + 1)
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = quad(func, lo, hi, limit=200)
        total += val
    return total


def inner_product_quad(sig_f, sig_g, K):
    """(1/K) integral of f * g over one period via scipy quadrature."""
    f = lambda t: tc.eval_signal(sig_f, float(t))
    g = lambda t: tc.eval_signal(sig_g, float(t))
    return quad_periodic(lambda t: f(t) * g(t), K) / K

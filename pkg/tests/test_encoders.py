"""Crossing and integrate-and-fire encoders, density, Voronoi, thinning."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

import temcodec as tc
from temcodec.errors import (
    EmptyTrainError,
    NoSpikesError,
    NotDenseEnoughError,
    SpikeBudgetExceededError,
    UnsupportedGeneratorError,
)

from helpers import random_dense_train, random_signal


@pytest.fixture(scope="module")
def norm_signals(cubic_spec):
    return [random_signal(cubic_spec, seed=1000 + i, normalize=True) for i in range(20)]


# ---------------------------------------------------------------------------
# crossing encoder
# ---------------------------------------------------------------------------

def test_zero_signal_cosine_roots(cubic_spec):
    sig = tc.PeriodicSignal(cubic_spec, np.zeros(50))
    train = tc.encode_crossing(sig, tc.CosineTest(1.1, 1.0))
    want = np.arange(-24.75, 25.0, 0.5)
    assert len(train) == 100
    np.testing.assert_allclose(train.times, want, atol=1e-10)


def test_zero_signal_ramp_roots(cubic_spec):
    sig = tc.PeriodicSignal(cubic_spec, np.zeros(50))
    train = tc.encode_crossing(sig, tc.RampTest(span=1.0))
    want = -25.0 + 0.5 * np.arange(1, 100)
    assert len(train) == 99
    np.testing.assert_allclose(train.times, want, atol=1e-10)


def test_crossing_validity(norm_signals):
    phi = tc.CosineTest(1.1, 1.0)
    for sig in norm_signals[:10]:
        train = tc.encode_crossing(sig, phi)
        resid = tc.eval_signal(sig, train.times) - phi.value(train.times)
        assert np.max(np.abs(resid)) <= 1e-9
        # transversality: sign change across the bisection bracket
        tol = 1e-9
        left = tc.eval_signal(sig, train.times - tol) - phi.value(train.times - tol)
        right = tc.eval_signal(sig, train.times + tol) - phi.value(train.times + tol)
        assert np.all(left * right <= 0)


def test_crossing_density_guarantee(norm_signals):
    """Amplitude above sup |f| fires in every half period: the train is
    T_c-dense (one crossing per half-period interval)."""
    phi = tc.CosineTest(1.1, 1.0)
    for sig in norm_signals:
        train = tc.encode_crossing(sig, phi, signal_sup=1.0)
        assert tc.density_report(train).max_gap <= 1.0


def test_ramp_crossing_validity(norm_signals):
    phi = tc.RampTest(span=0.8)
    sig = norm_signals[0]
    train = tc.encode_crossing(sig, phi)
    prev = np.concatenate([[-25.0], train.times[:-1]])
    resid = tc.eval_signal(sig, train.times) - phi.value(train.times, prev)
    assert np.max(np.abs(resid)) <= 1e-9
    assert tc.density_report(train).max_gap <= 0.8 + 1e-9


def test_scan_refinement_stability(cubic_spec):
    phi = tc.CosineTest(1.1, 1.0)
    for seed in range(100):
        sig = random_signal(cubic_spec, seed=2000 + seed, normalize=True)
        t64 = tc.encode_crossing(sig, phi, tc.EncoderConfig(scan_oversampling=64))
        t256 = tc.encode_crossing(sig, phi, tc.EncoderConfig(scan_oversampling=256))
        assert len(t64) == len(t256)
        np.testing.assert_allclose(t64.times, t256.times, atol=1e-9)


def test_no_spikes_guard(cubic_spec):
    sig = random_signal(cubic_spec, seed=3, normalize=True)
    with pytest.raises(NoSpikesError):
        tc.encode_crossing(sig, tc.CosineTest(0.9, 1.0), signal_sup=1.0)
    # constant signal above the test amplitude never crosses
    big = tc.PeriodicSignal(tc.GeneratorSpec.bspline(0, 50), np.full(50, 2.0))
    with pytest.raises(NoSpikesError):
        tc.encode_crossing(big, tc.CosineTest(1.1, 1.0))


def test_spike_budget(cubic_spec):
    sig = tc.PeriodicSignal(cubic_spec, np.zeros(50))
    with pytest.raises(SpikeBudgetExceededError):
        tc.encode_crossing(sig, tc.CosineTest(1.1, 1.0), tc.EncoderConfig(max_spikes=3))


# ---------------------------------------------------------------------------
# integrate-and-fire encoder
# ---------------------------------------------------------------------------

def test_if_zero_signal_matches_ramp(cubic_spec):
    sig = tc.PeriodicSignal(cubic_spec, np.zeros(50))
    ramp = tc.RampTest(span=1.0)
    a = tc.encode_crossing(sig, ramp)
    b = tc.encode_if(sig, ramp)
    np.testing.assert_allclose(a.times, b.times, atol=1e-10)


def test_if_constant_signal_interval(box_spec):
    sig = tc.PeriodicSignal(box_spec, np.full(50, 0.8))
    train = tc.encode_if(sig, tc.ConstantTest(level=0.3))
    gaps = np.diff(train.times)
    np.testing.assert_allclose(gaps, 0.3 / 0.8, atol=1e-10)
    assert train.times[0] == pytest.approx(-25.0 + 0.3 / 0.8, abs=1e-10)


def test_if_crossing_validity_quadrature(cubic_spec):
    sig = random_signal(cubic_spec, seed=4, normalize=True)
    phi = tc.RampTest(span=1.0)
    train = tc.encode_if(sig, phi)
    prev = np.concatenate([[-25.0], train.times[:-1]])
    for tp, tn in zip(prev[:25], train.times[:25]):
        knots = np.arange(math.ceil(tp * 2) / 2, tn, 0.5)
        val, _ = quad(
            lambda u: tc.eval_signal(sig, float(u)),
            tp,
            tn,
            points=knots,
            limit=500,
            epsabs=1e-13,
            epsrel=1e-13,
        )
        want = phi.value(tn, tp)
        assert abs(val - want) <= 1e-9


def test_if_rejects_sinc():
    sig = tc.PeriodicSignal(tc.GeneratorSpec.sinc(50), np.zeros(50))
    with pytest.raises(UnsupportedGeneratorError):
        tc.encode_if(sig, tc.RampTest(span=1.0))


# ---------------------------------------------------------------------------
# density report
# ---------------------------------------------------------------------------

def test_density_report_wraparound():
    train = tc.SpikeTrain(times=np.array([-25.0, 0.0, 24.0]), K=50)
    rep = tc.density_report(train)
    np.testing.assert_allclose(np.sort(rep.gaps), [1.0, 24.0, 25.0])
    assert rep.max_gap == 25.0
    assert rep.is_T_dense(25.0) and not rep.is_T_dense(24.0)


def test_density_report_uniform():
    times = np.arange(-25.0, 25.0, 2.5)
    rep = tc.density_report(tc.SpikeTrain(times=times, K=50))
    assert rep.max_gap == pytest.approx(2.5)


def test_density_report_empty():
    with pytest.raises(EmptyTrainError):
        tc.density_report(tc.SpikeTrain(times=np.array([]), K=50))


# ---------------------------------------------------------------------------
# Voronoi cells
# ---------------------------------------------------------------------------

def test_voronoi_uniform():
    times = np.arange(-25.0, 25.0, 1.0)
    cells = tc.voronoi(tc.SpikeTrain(times=times, K=50))
    np.testing.assert_allclose(cells.midpoints, times - 0.5, atol=1e-12)
    np.testing.assert_allclose(cells.weights, 1.0, atol=1e-12)


def test_voronoi_tiles_period():
    for seed in range(20):
        train = random_dense_train(50, 1.5, seed=3000 + seed)
        cells = tc.voronoi(train)
        assert np.sum(cells.weights) == pytest.approx(50.0, abs=1e-9)
        assert np.all(cells.weights > 0)
        ext = np.append(cells.midpoints, cells.midpoints[0] + 50.0)
        assert np.all(train.times >= ext[:-1]) and np.all(train.times < ext[1:])


def test_voronoi_needs_two_spikes():
    with pytest.raises(EmptyTrainError):
        tc.voronoi(tc.SpikeTrain(times=np.array([1.0]), K=50))


# ---------------------------------------------------------------------------
# thinning
# ---------------------------------------------------------------------------

def test_thin_exact_gaps_bound():
    times = np.arange(-25.0, 25.0, 1.0)  # all gaps exactly T = 1
    out = tc.thin_to_density(tc.SpikeTrain(times=times, K=50), 1.0)
    assert tc.density_report(out).max_gap <= 1.0
    assert len(out) < 2 * math.ceil(50 / 1.0)


def test_thin_dense_input_cardinality():
    rng = np.random.default_rng(41)
    times = np.unique(rng.uniform(-25.0, 25.0, 10000))
    out = tc.thin_to_density(tc.SpikeTrain(times=times, K=50), 1.0)
    assert len(out) <= 99
    assert tc.density_report(out).max_gap <= 1.0
    assert np.all(np.isin(out.times, times))


def test_thin_random_trains():
    for seed in range(25):
        train = random_dense_train(50, 1.0, seed=4000 + seed)
        out = tc.thin_to_density(train, 1.0)
        assert tc.density_report(out).max_gap <= 1.0
        assert len(out) < 100


def test_thin_rejects_sparse_input():
    train = tc.SpikeTrain(times=np.array([-20.0, 0.0, 20.0]), K=50)
    with pytest.raises(NotDenseEnoughError):
        tc.thin_to_density(train, 1.0)


# ---------------------------------------------------------------------------
# amplitude recovery
# ---------------------------------------------------------------------------

def test_sample_amplitudes_cosine():
    train = tc.SpikeTrain(times=np.array([-1.3, 0.2, 3.7]), K=50)
    y = tc.sample_amplitudes(tc.CosineTest(1.1, 1.0), train)
    np.testing.assert_allclose(y, 1.1 * np.cos(2 * np.pi * train.times), atol=1e-15)


def test_sample_amplitudes_ramp():
    train = tc.SpikeTrain(times=np.array([-24.0, -23.1]), K=50)
    y = tc.sample_amplitudes(tc.RampTest(span=2.0), train)
    np.testing.assert_allclose(y, [-1 + 2 * 1.0 / 2.0, -1 + 2 * 0.9 / 2.0], atol=1e-12)


def test_roundtrip_amplitudes_match_signal(norm_signals):
    phi = tc.CosineTest(1.1, 1.0)
    for sig in norm_signals[:10]:
        train = tc.encode_crossing(sig, phi)
        y = tc.sample_amplitudes(phi, train)
        np.testing.assert_allclose(y, tc.eval_signal(sig, train.times), atol=1e-9)

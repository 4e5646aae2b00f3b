"""Timing-quantization robustness experiments.

Each trial draws a random signal, encodes it with a no-feedback cosine
crossing encoder, rounds the firing times to a quantization grid, decodes
from the perturbed times, and records the timing and signal errors.  The
experiment sweeps a grid of quantization steps and aggregates the signal
error against the l2 timing error, which behaves linearly.

Determinism: every trial owns the stream PCG64(SeedSequence([rng_seed,
trial_index])), so results are reproducible bit-for-bit regardless of
execution order or thread count.  NOISELAB_THREADS caps the worker pool
(0 or unset = auto, 1 = sequential).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .decoders import (
    build_system,
    decode_frame_iterative,
    decode_pinv,
    decode_pv_iterative,
)
from .encoders import (
    CosineTest,
    EncoderConfig,
    SpikeTrain,
    density_report,
    encode_crossing,
    sample_amplitudes,
)
from .errors import TemcodecError
from .generators import GeneratorSpec
from .serialize import fmt17
from .spaces import PeriodicSignal, PeriodicSpace, eval_signal

__all__ = [
    "NoiseExperimentConfig",
    "TrialRecord",
    "ExperimentSummary",
    "quantize_train",
    "run_trial",
    "run_experiment",
    "summary_to_csv",
]

_DECODERS = ("pinv_plain", "pinv_weighted", "frame", "pv")


def _default_epsilon_grid() -> tuple[float, ...]:
    # four decades: keeps the smallest-step error far below the largest
    return tuple(float(e) for e in np.logspace(-5, -1, 9))


@dataclass(frozen=True)
class NoiseExperimentConfig:
    """Parameters of the quantization experiment (defaults reproduce the
    standard study: K=50, cubic spline, 1.1 cos(2 pi t), 1000 trials)."""

    K: int = 50
    generator: GeneratorSpec | None = None
    test_function: CosineTest = CosineTest(amplitude=1.1, period=1.0)
    trials: int = 1000
    epsilon_grid: tuple[float, ...] = field(default_factory=_default_epsilon_grid)
    rng_seed: int = 20260810
    decoder: str = "pinv_plain"
    bins: int = 20

    def __post_init__(self):
        if self.generator is None:
            object.__setattr__(self, "generator", GeneratorSpec.bspline(3, self.K))
        if self.generator.period != self.K:
            raise ValueError("generator period disagrees with K")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if len(self.epsilon_grid) == 0 or any(e < 0 for e in self.epsilon_grid):
            raise ValueError("epsilon_grid entries must be >= 0")
        if self.decoder not in _DECODERS:
            raise ValueError(f"decoder must be one of {_DECODERS}")
        if self.bins < 1:
            raise ValueError("bins must be >= 1")

    def epsilon_for(self, trial_index: int) -> float:
        """Round-robin assignment of quantization steps to trials."""
        return self.epsilon_grid[trial_index % len(self.epsilon_grid)]


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    seed: int
    epsilon: float
    time_error_l2: float
    time_error_inf: float
    signal_error_L2: float
    spike_count: int
    decode_failed: bool = False
    density_preserved: bool = True


@dataclass(frozen=True)
class ExperimentSummary:
    """Binned error statistics plus a weighted linear fit over the bins."""

    bin_centers: np.ndarray
    bin_means: np.ndarray
    bin_ci_half: np.ndarray
    bin_counts: np.ndarray
    per_epsilon_mean: dict[float, float]
    slope: float
    intercept: float
    r_squared: float
    trials: int
    failed: int
    records: list[TrialRecord]


# ---------------------------------------------------------------------------
# quantizer
# ---------------------------------------------------------------------------

def _rounded_times(train: SpikeTrain, epsilon: float) -> np.ndarray:
    if epsilon == 0.0:
        return train.times.copy()
    return np.round(train.times / epsilon) * epsilon


def quantize_train(train: SpikeTrain, epsilon: float) -> SpikeTrain:
    """Round firing times to the grid epsilon * Z.

    Round-to-nearest guarantees a per-spike displacement of at most
    epsilon / 2.  Collisions (distinct spikes rounding to the same grid
    point) are merged keeping the first, restoring strict monotonicity;
    times that round onto the window edge wrap periodically.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    r = _rounded_times(train, epsilon)
    K = train.K
    wrapped = np.sort(((r + K / 2.0) % K) - K / 2.0)
    keep = np.concatenate([[True], np.diff(wrapped) > 0]) if len(wrapped) else []
    return SpikeTrain(times=wrapped[keep], K=K)


# ---------------------------------------------------------------------------
# trials
# ---------------------------------------------------------------------------

def _trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, trial_index]))


def _decode(cfg, space, train, y, gamma):
    if cfg.decoder == "pinv_plain":
        return decode_pinv(build_system(space, train), y, weighted=False)
    if cfg.decoder == "pinv_weighted":
        return decode_pinv(build_system(space, train), y, weighted=True)
    if cfg.decoder == "frame":
        return decode_frame_iterative(build_system(space, train), y, gamma=gamma)
    return decode_pv_iterative(space, train, y)


def run_trial(cfg: NoiseExperimentConfig, trial_index: int, space: PeriodicSpace | None = None) -> TrialRecord:
    """One deterministic trial: draw, normalize, encode, quantize, decode.

    The random coefficients are uniform on [-1, 1] and the signal is
    normalized to unit sup norm (grid estimate) before encoding.  The
    decode uses the quantized times both for the matrix and for the
    amplitude readout, which is exact for no-feedback tests.  Decode
    failures are recorded on the trial, not raised.
    """
    if space is None:
        space = PeriodicSpace.for_spec(cfg.generator)
    rng = _trial_rng(cfg.rng_seed, trial_index)
    epsilon = cfg.epsilon_for(trial_index)
    K = cfg.K
    phi = cfg.test_function

    coeffs = rng.uniform(-1.0, 1.0, K)
    sig = PeriodicSignal(cfg.generator, coeffs)
    grid = np.arange(-K / 2.0, K / 2.0, 1e-3)
    sup = float(np.max(np.abs(eval_signal(sig, grid))))
    sig = PeriodicSignal(cfg.generator, coeffs / sup)

    train = encode_crossing(sig, phi, EncoderConfig(), signal_sup=1.0)
    rounded = _rounded_times(train, epsilon)
    diffs = rounded - train.times
    time_inf = float(np.max(np.abs(diffs))) if len(diffs) else 0.0
    time_l2 = float(np.linalg.norm(diffs))

    qtrain = quantize_train(train, epsilon)
    clean_gap = density_report(train).max_gap
    density_ok = bool(
        len(qtrain) >= 2 and density_report(qtrain).max_gap <= clean_gap + epsilon + 1e-12
    )

    try:
        y = sample_amplitudes(phi, qtrain)
        gamma = density_report(qtrain).max_gap / space.tau
        result = _decode(cfg, space, qtrain, y, gamma)
        err = result.coeffs - sig.coeffs
        sig_err = space.norm(err)
        failed = False
    except TemcodecError:
        sig_err = math.nan
        failed = True

    return TrialRecord(
        trial_index=trial_index,
        seed=cfg.rng_seed,
        epsilon=epsilon,
        time_error_l2=time_l2,
        time_error_inf=time_inf,
        signal_error_L2=sig_err,
        spike_count=len(train),
        decode_failed=failed,
        density_preserved=density_ok,
    )


# ---------------------------------------------------------------------------
# experiment
# ---------------------------------------------------------------------------

def _worker_count() -> int:
    raw = os.environ.get("NOISELAB_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = min(8, os.cpu_count() or 1)
    return n


def _weighted_linfit(x, y, w):
    """Weighted least-squares line and its coefficient of determination."""
    w = np.asarray(w, dtype=float)
    sw = w.sum()
    xm = (w * x).sum() / sw
    ym = (w * y).sum() / sw
    sxx = (w * (x - xm) ** 2).sum()
    sxy = (w * (x - xm) * (y - ym)).sum()
    slope = sxy / sxx if sxx > 0 else 0.0
    intercept = ym - slope * xm
    ss_res = (w * (y - slope * x - intercept) ** 2).sum()
    ss_tot = (w * (y - ym) ** 2).sum()
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), float(r2)


def run_experiment(cfg: NoiseExperimentConfig) -> ExperimentSummary:
    """Run all trials, bin signal error against l2 timing error.

    Validates the quantization margin first: the encoder is (period/2)-
    dense, and every perturbed train must stay denser than the critical
    density, which requires max(epsilon) < tau - period/2.
    """
    space = PeriodicSpace.for_spec(cfg.generator)
    t_enc = cfg.test_function.period / 2.0
    margin = space.tau - t_enc
    if max(cfg.epsilon_grid) >= margin:
        raise ValueError(
            f"epsilon grid reaches {max(cfg.epsilon_grid)}, breaking the "
            f"density margin {margin:.4g} (tau={space.tau:.4g})"
        )

    workers = _worker_count()
    indices = range(cfg.trials)
    if workers == 1:
        records = [run_trial(cfg, i, space) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda i: run_trial(cfg, i, space), indices))

    ok = [r for r in records if not r.decode_failed]
    failed = len(records) - len(ok)
    x = np.array([r.time_error_l2 for r in ok])
    y = np.array([r.signal_error_L2 for r in ok])

    hi = float(x.max()) if len(x) and x.max() > 0 else 1.0
    edges = np.linspace(0.0, hi, cfg.bins + 1)
    edges[-1] = np.nextafter(edges[-1], np.inf)  # top edge inclusive
    which = np.clip(np.digitize(x, edges) - 1, 0, cfg.bins - 1)

    centers, means, cis, counts = [], [], [], []
    for b in range(cfg.bins):
        sel = which == b
        n = int(sel.sum())
        if n == 0:
            continue
        yy = y[sel]
        m = float(yy.mean())
        sd = float(yy.std(ddof=1)) if n > 1 else 0.0
        centers.append(0.5 * (edges[b] + min(edges[b + 1], hi)))
        means.append(m)
        cis.append(1.96 * sd / math.sqrt(n))
        counts.append(n)

    centers = np.array(centers)
    means = np.array(means)
    slope, intercept, r2 = _weighted_linfit(centers, means, np.array(counts, float))

    per_eps: dict[float, float] = {}
    for e in cfg.epsilon_grid:
        sel = [r.signal_error_L2 for r in ok if r.epsilon == e]
        per_eps[e] = float(np.mean(sel)) if sel else math.nan

    return ExperimentSummary(
        bin_centers=centers,
        bin_means=means,
        bin_ci_half=np.array(cis),
        bin_counts=np.array(counts, dtype=int),
        per_epsilon_mean=per_eps,
        slope=slope,
        intercept=intercept,
        r_squared=r2,
        trials=cfg.trials,
        failed=failed,
        records=records,
    )


def summary_to_csv(summary: ExperimentSummary) -> str:
    """Binned results as CSV: bin_center, mean_err, ci_low, ci_high, n."""
    lines = ["bin_center,mean_err,ci_low,ci_high,n"]
    for c, m, h, n in zip(
        summary.bin_centers, summary.bin_means, summary.bin_ci_half, summary.bin_counts
    ):
        lines.append(
            ",".join([fmt17(c), fmt17(m), fmt17(m - h), fmt17(m + h), str(int(n))])
        )
    return "\n".join(lines) + "\n"

"""Time encoders: map a periodic signal to a spike train.

Two machines are provided.  The crossing encoder fires whenever the signal
equals a test function (a fixed cosine, or a linear ramp that resets at
each spike).  The integrate-and-fire encoder fires whenever the running
integral of the signal since the last spike crosses the test function;
it is implemented as a crossing encoder on the integrated signal, using
exact spline antiderivatives.

All encoders emit one period of spikes inside the window [-K/2, K/2),
with the wraparound convention t_{J+1} = t_1 + K.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyTrainError,
    NoSpikesError,
    NotDenseEnoughError,
    SpikeBudgetExceededError,
    UnsupportedGeneratorError,
)
from .spaces import PeriodicSignal, cell_integral_matrix, eval_signal

__all__ = [
    "CosineTest",
    "RampTest",
    "ConstantTest",
    "SpikeTrain",
    "EncoderConfig",
    "DensityReport",
    "VoronoiCells",
    "encode_crossing",
    "encode_if",
    "density_report",
    "voronoi",
    "thin_to_density",
    "sample_amplitudes",
]


# ---------------------------------------------------------------------------
# test functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CosineTest:
    """Fixed test function amplitude * cos(2 pi t / period); no feedback."""

    amplitude: float = 1.1
    period: float = 1.0

    feedback = False

    def __post_init__(self):
        if self.amplitude <= 0 or self.period <= 0:
            raise ValueError("cosine test needs amplitude > 0 and period > 0")

    @property
    def scan_period(self) -> float:
        return self.period

    def value(self, t, t_prev=None):
        return self.amplitude * np.cos(2.0 * np.pi * np.asarray(t, float) / self.period)


@dataclass(frozen=True)
class RampTest:
    """Linear ramp from -1 at the previous spike to +1 one span later."""

    span: float

    feedback = True

    def __post_init__(self):
        if self.span <= 0:
            raise ValueError("ramp test needs span > 0")

    @property
    def scan_period(self) -> float:
        return self.span

    def value(self, t, t_prev):
        return -1.0 + 2.0 * (np.asarray(t, float) - t_prev) / self.span


@dataclass(frozen=True)
class ConstantTest:
    """Constant threshold, the classic integrate-and-fire firing level."""

    level: float

    feedback = True

    def __post_init__(self):
        if self.level == 0:
            raise ValueError("constant test needs a nonzero level")

    @property
    def scan_period(self) -> float:
        return 1.0

    def value(self, t, t_prev=None):
        return np.full(np.shape(np.asarray(t, float)), self.level)


# ---------------------------------------------------------------------------
# spike trains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpikeTrain:
    """Strictly increasing firing times inside [-K/2, K/2)."""

    times: np.ndarray
    K: int

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1:
            raise ValueError("times must be a 1-d array")
        if len(t) and (t[0] < -self.K / 2.0 or t[-1] >= self.K / 2.0):
            raise ValueError("times must lie in [-K/2, K/2)")
        if len(t) > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", t)

    def __len__(self) -> int:
        return len(self.times)

    def gaps(self) -> np.ndarray:
        """Consecutive gaps including the periodic wraparound gap."""
        if len(self.times) == 0:
            raise EmptyTrainError("no spikes")
        ext = np.append(self.times, self.times[0] + self.K)
        return np.diff(ext)


@dataclass(frozen=True)
class EncoderConfig:
    """Root-search tuning: scan density, bisection tolerance, spike budget."""

    scan_oversampling: int = 64
    bisection_tol: float = 1e-12
    max_spikes: int | None = None

    def __post_init__(self):
        if self.scan_oversampling < 8:
            raise ValueError("scan_oversampling must be >= 8")
        if self.bisection_tol <= 0:
            raise ValueError("bisection_tol must be > 0")


@dataclass(frozen=True)
class DensityReport:
    max_gap: float
    gaps: np.ndarray

    def is_T_dense(self, T: float) -> bool:
        return bool(self.max_gap <= T)


@dataclass(frozen=True)
class VoronoiCells:
    """Cell midpoints s_n and widths w_n = s_{n+1} - s_n of a spike train."""

    midpoints: np.ndarray
    weights: np.ndarray


# ---------------------------------------------------------------------------
# root finding
# ---------------------------------------------------------------------------

def _bisect(h, lo, hi, flo, tol):
    """Vectorized bisection on brackets with a sign change; returns midpoints."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    sgn_lo = np.sign(flo)
    width = float(np.max(hi - lo)) if len(lo) else 0.0
    iters = max(1, int(math.ceil(math.log2(max(width / tol, 1.0)))) + 1)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = h(mid)
        exact = fm == 0.0
        same = (np.sign(fm) == sgn_lo) & ~exact
        lo = np.where(exact, mid, np.where(same, mid, lo))
        hi = np.where(exact, mid, np.where(same, hi, mid))
    return 0.5 * (lo + hi)


def _default_budget(K: int, scan_period: float) -> int:
    return int(math.ceil(10.0 * K / scan_period))


def _dedupe(times: np.ndarray, tol: float) -> np.ndarray:
    if len(times) < 2:
        return times
    keep = np.concatenate([[True], np.diff(times) > 10 * tol])
    return times[keep]


# ---------------------------------------------------------------------------
# crossing encoder
# ---------------------------------------------------------------------------

def encode_crossing(
    sig: PeriodicSignal,
    phi,
    cfg: EncoderConfig | None = None,
    signal_sup: float | None = None,
) -> SpikeTrain:
    """Crossing encoder: fire at every time where the signal meets the test.

    A sign-change scan at step scan_period / scan_oversampling locates the
    transversal crossings; bisection then refines each to the configured
    time tolerance.  Tangential touches without a sign change are not
    detected.  Feedback tests (the ramp) restart at each emitted spike,
    with the initial reference fixed at the window start -K/2.

    Parameters
    ----------
    sig : PeriodicSignal
    phi : CosineTest or RampTest
    cfg : EncoderConfig, optional
    signal_sup : float, optional
        Known bound on sup |f|; if given for a cosine test with amplitude
        not exceeding it, the guaranteed-crossing condition fails and
        NoSpikesError is raised up front.

    Raises
    ------
    NoSpikesError
        No crossings in the window (or the amplitude check failed).
    SpikeBudgetExceededError
        More crossings than the max_spikes guard allows.
    """
    cfg = cfg or EncoderConfig()
    K = sig.K
    budget = cfg.max_spikes or _default_budget(K, phi.scan_period)
    step = phi.scan_period / cfg.scan_oversampling
    tol = cfg.bisection_tol

    if not phi.feedback:
        if signal_sup is not None and phi.amplitude <= signal_sup:
            raise NoSpikesError(
                f"test amplitude {phi.amplitude} does not exceed sup bound {signal_sup}"
            )
        h = lambda t: eval_signal(sig, t) - phi.value(t)
        n = int(math.ceil(K / step))
        grid = -K / 2.0 + np.arange(n + 1) * (K / n)
        hg = h(grid)
        roots = [grid[hg == 0.0]]
        sw = hg[:-1] * hg[1:] < 0
        if np.any(sw):
            roots.append(_bisect(h, grid[:-1][sw], grid[1:][sw], hg[:-1][sw], tol))
        times = np.sort(np.concatenate(roots))
        times = _dedupe(times, tol)
        times = times[(times >= -K / 2.0) & (times < K / 2.0)]
        if len(times) == 0:
            raise NoSpikesError("signal never crosses the test function")
        if len(times) > budget:
            raise SpikeBudgetExceededError(f"{len(times)} crossings exceed budget {budget}")
        return SpikeTrain(times=times, K=K)

    # feedback: sequential search, one segment per emitted spike
    t_prev = -K / 2.0
    end = K / 2.0
    spikes: list[float] = []
    while True:
        h = lambda t, tp=t_prev: eval_signal(sig, t) - phi.value(t, tp)
        root = _first_crossing(h, t_prev, end, step, tol)
        if root is None or root >= end:
            break
        spikes.append(root)
        if len(spikes) > budget:
            raise SpikeBudgetExceededError(f"budget {budget} exceeded")
        t_prev = root
    if not spikes:
        raise NoSpikesError("signal never crosses the test function")
    return SpikeTrain(times=np.array(spikes), K=K)


def _first_crossing(h, start, end, step, tol):
    """Earliest sign change of h in (start, end]; None when there is none."""
    lo = start
    f_lo = None
    while lo < end:
        hi = min(lo + 128 * step, end)
        n = max(int(math.ceil((hi - lo) / step)), 1)
        grid = np.linspace(lo, hi, n + 1)
        hg = h(grid)
        if f_lo is not None:
            hg[0] = f_lo
        zero = np.flatnonzero(hg[1:] == 0.0)
        sw = np.flatnonzero(hg[:-1] * hg[1:] < 0)
        first_zero = zero[0] + 1 if len(zero) else None
        first_sw = sw[0] if len(sw) else None
        if first_sw is not None and (first_zero is None or first_sw < first_zero):
            root = _bisect(
                h,
                np.array([grid[first_sw]]),
                np.array([grid[first_sw + 1]]),
                np.array([hg[first_sw]]),
                tol,
            )
            return float(root[0])
        if first_zero is not None:
            return float(grid[first_zero])
        lo = hi
        f_lo = hg[-1]
    return None


# ---------------------------------------------------------------------------
# integrate-and-fire encoder
# ---------------------------------------------------------------------------

class _RunningIntegral:
    """F(t) = integral of the signal from the window start, vectorized.

    Built once per encode from exact generator antiderivatives; each query
    sums the bounded number of shifts whose support meets [-K/2, t].
    """

    def __init__(self, sig: PeriodicSignal):
        self.sig = sig
        K = sig.K
        S = sig.spec.support
        self.t0 = -K / 2.0
        self.j_lo = int(math.floor(self.t0 - S / 2.0))
        self.j_hi = int(math.ceil(K / 2.0 + S / 2.0)) + 1

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        sig = self.sig
        out = np.zeros(t.shape)
        from .generators import eval_generator

        for j in range(self.j_lo, self.j_hi + 1):
            c = sig.coeffs[j % sig.K]
            if c == 0.0:
                continue
            out += c * (
                eval_generator(sig.spec, t - j, "antiderivative")
                - eval_generator(sig.spec, self.t0 - j, "antiderivative")
            )
        return out


def encode_if(
    sig: PeriodicSignal,
    phi,
    cfg: EncoderConfig | None = None,
) -> SpikeTrain:
    """Integrate-and-fire encoder: fire when the integral since the last
    spike crosses the test function.

    Equivalent to a crossing encoder on the integrated signal; each spike
    resets the lower limit of the integral, so the machine is sequential
    for every test-function kind.  Requires a compactly supported
    generator (exact antiderivatives).

    Raises
    ------
    UnsupportedGeneratorError
        The sinc generator has no antiderivative.
    NoSpikesError, SpikeBudgetExceededError
        As for the crossing encoder.
    """
    if not sig.spec.is_compact:
        raise UnsupportedGeneratorError("integrate-and-fire needs compact support")
    cfg = cfg or EncoderConfig()
    K = sig.K
    budget = cfg.max_spikes or _default_budget(K, phi.scan_period)
    step = phi.scan_period / cfg.scan_oversampling
    tol = cfg.bisection_tol
    F = _RunningIntegral(sig)

    t_prev = -K / 2.0
    end = K / 2.0
    spikes: list[float] = []
    while True:
        f_prev = float(F(np.array([t_prev]))[0])
        h = lambda t, fp=f_prev, tp=t_prev: (F(t) - fp) - phi.value(t, tp)
        root = _first_crossing(h, t_prev, end, step, tol)
        if root is None or root >= end:
            break
        spikes.append(root)
        if len(spikes) > budget:
            raise SpikeBudgetExceededError(f"budget {budget} exceeded")
        t_prev = root
    if not spikes:
        raise NoSpikesError("integral never crosses the test function")
    return SpikeTrain(times=np.array(spikes), K=K)


# ---------------------------------------------------------------------------
# train analysis
# ---------------------------------------------------------------------------

def density_report(train: SpikeTrain) -> DensityReport:
    """Max inter-spike gap, wraparound included."""
    gaps = train.gaps()
    return DensityReport(max_gap=float(gaps.max()), gaps=gaps)


def voronoi(train: SpikeTrain) -> VoronoiCells:
    """Voronoi midpoints and cell widths of a spike train.

    The cell of spike n is [s_n, s_{n+1}) with s_n the midpoint of
    (t_{n-1}, t_n), wrapping periodically; the widths are positive and
    tile the period exactly.
    """
    if len(train) < 2:
        raise EmptyTrainError("voronoi cells need at least two spikes")
    t = train.times
    prev = np.concatenate([[t[-1] - train.K], t[:-1]])
    mid = 0.5 * (prev + t)
    ext = np.append(mid, mid[0] + train.K)
    return VoronoiCells(midpoints=mid, weights=np.diff(ext))


def thin_to_density(train: SpikeTrain, T: float) -> SpikeTrain:
    """Greedy subsequence that stays T-dense with fewer than 2*ceil(K/T) spikes.

    Starting from the first spike, repeatedly jump to the farthest spike
    within distance T.  The output density never exceeds T, and the strict
    cardinality bound holds because two consecutive jumps always cover
    more than T.

    Raises
    ------
    NotDenseEnoughError
        If the input train itself is not T-dense.
    """
    rep = density_report(train)
    if rep.max_gap > T:
        raise NotDenseEnoughError(f"input has gap {rep.max_gap} > {T}")
    t = train.times
    ext = np.append(t, t[0] + train.K)
    last = len(ext) - 1
    idx = [0]
    cur = 0
    while True:
        j = int(np.searchsorted(ext, ext[cur] + T, side="right") - 1)
        j = max(j, cur + 1)  # fp ties on gaps exactly T must still advance
        if j >= last:
            break
        idx.append(j)
        cur = j
    return SpikeTrain(times=t[np.array(idx)], K=train.K)


def sample_amplitudes(phi, train: SpikeTrain) -> np.ndarray:
    """Recover the amplitudes carried by the timing: y_n = Phi_n(t_n).

    For feedback tests the train itself supplies the reset times, with the
    encoder's initial reference -K/2 used for the first spike.
    """
    t = train.times
    if not phi.feedback:
        return np.asarray(phi.value(t), dtype=float)
    prev = np.concatenate([[-train.K / 2.0], t[:-1]])
    return np.asarray(phi.value(t, prev), dtype=float)

"""Periodic shift-invariant signal spaces.

A signal is a coefficient vector c_0..c_{K-1} against the K mod-K shifts
of a generator; the module provides signal evaluation, the circulant Gram
matrix of the shifts, the biorthogonal (dual) generator, the reproducing
kernel, projection of step functions onto the space, and norms.  All
integrals carry the 1/K normalization of the periodic inner product
(1/K) * integral over one period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadPartitionError,
    PeriodTooSmallError,
    SingularGramError,
    SpaceMismatchError,
)
from .generators import GeneratorSpec, eval_generator

__all__ = [
    "PeriodicSignal",
    "GramMatrix",
    "DualGenerator",
    "PeriodicSpace",
    "SignalNorms",
    "eval_signal",
    "gram_circulant",
    "dual_generator",
    "kernel_eval",
    "project_piecewise_constant",
    "inner_product",
    "norms",
    "point_matrix",
    "cell_integral_matrix",
    "derivative_norm_l2k",
]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class PeriodicSignal:
    """Coefficient vector over the K-periodic shift space of a generator."""

    spec: GeneratorSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (self.spec.period,):
            raise ValueError(
                f"coefficient vector must have length K={self.spec.period}"
            )
        object.__setattr__(self, "coeffs", c)

    @property
    def K(self) -> int:
        return self.spec.period


@dataclass(frozen=True)
class GramMatrix:
    """First row of the circulant Gram matrix of the shifted generators."""

    first_row: np.ndarray

    @property
    def K(self) -> int:
        return len(self.first_row)

    def as_matrix(self) -> np.ndarray:
        from scipy.linalg import circulant

        return circulant(self.first_row)

    def eigenvalues(self) -> np.ndarray:
        """Real eigenvalues of the symmetric circulant (DFT of first row)."""
        return np.fft.fft(self.first_row).real

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return np.fft.ifft(np.fft.fft(self.first_row) * np.fft.fft(v)).real


@dataclass(frozen=True)
class DualGenerator:
    """Coefficients g expressing the biorthogonal generator in the primal frame."""

    dual_coeffs: np.ndarray
    residual: float


@dataclass(frozen=True)
class SignalNorms:
    l2_of_coeffs: float
    L2_K: float
    sup_estimate: float
    H1_estimate: float


# ---------------------------------------------------------------------------
# periodized sinc (Dirichlet) helpers
# ---------------------------------------------------------------------------

def _sinc_fourier_weights(K: int) -> tuple[np.ndarray, np.ndarray]:
    """Frequencies n and Fourier coefficients b_n of the periodized sinc.

    The band edge |n| = K/2 (even K) carries half weight: the symmetric
    principal value of the periodization.
    """
    m = K // 2
    n = np.arange(-m, m + 1)
    b = np.full(n.shape, 1.0 / K)
    if K % 2 == 0:
        b[0] = b[-1] = 1.0 / (2 * K)
    return n, b


def _sinc_signal_weights(K: int, coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n, b = _sinc_fourier_weights(K)
    chat = np.fft.fft(coeffs)
    return n, b * chat[n % K]


def _fourier_eval(K, n, w, t, order="value"):
    t = np.asarray(t, dtype=float)
    shape = t.shape
    tf = t.ravel()
    if order == "derivative":
        w = w * (2j * np.pi * n / K)
    out = np.empty(tf.shape, dtype=float)
    chunk = max(1, 2 ** 21 // max(len(n), 1))
    for i in range(0, len(tf), chunk):
        block = np.exp(2j * np.pi * np.outer(tf[i : i + chunk], n) / K)
        out[i : i + chunk] = (block @ w).real
    return out.reshape(shape)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def eval_signal(sig: PeriodicSignal, t, order: str = "value"):
    """Evaluate the signal (or its derivative) at arbitrary real points.

    For compactly supported generators only the shifts whose support covers
    each point contribute; the periodized sinc is summed in closed form.
    """
    if order not in ("value", "derivative"):
        raise ValueError("order must be 'value' or 'derivative'")
    scalar = np.isscalar(t) or (isinstance(t, np.ndarray) and np.ndim(t) == 0)
    tarr = np.atleast_1d(np.asarray(t, dtype=float))
    spec, c, K = sig.spec, sig.coeffs, sig.K

    if spec.family == "sinc":
        n, w = _sinc_signal_weights(K, c)
        out = _fourier_eval(K, n, w, tarr, order)
    else:
        S = spec.support
        if K <= S:
            raise PeriodTooSmallError(f"support {S} does not fit in period {K}")
        out = np.zeros_like(tarr)
        j0 = np.floor(tarr - S / 2.0).astype(int)
        for o in range(int(math.ceil(S)) + 2):
            jj = j0 + o
            out += c[jj % K] * eval_generator(spec, tarr - jj, order)

    return float(out[0]) if scalar else out


def point_matrix(spec: GeneratorSpec, times) -> np.ndarray:
    """Matrix of periodized generator samples: entry (j, k) = lambda_K(t_j - k)."""
    t = np.asarray(times, dtype=float)
    K = spec.period
    if spec.family == "sinc":
        n, b = _sinc_fourier_weights(K)
        u = t[:, None] - np.arange(K)[None, :]
        return _fourier_eval(K, n, b, u)
    S = spec.support
    if K <= S:
        raise PeriodTooSmallError(f"support {S} does not fit in period {K}")
    M = np.zeros((len(t), K))
    rows = np.arange(len(t))
    j0 = np.floor(t - S / 2.0).astype(int)
    for o in range(int(math.ceil(S)) + 2):
        jj = j0 + o
        vals = eval_generator(spec, t - jj, "value")
        np.add.at(M, (rows, jj % K), vals)
    return M


def cell_integral_matrix(spec: GeneratorSpec, lefts, rights) -> np.ndarray:
    """Integrals of each shifted generator over each cell [left, right).

    Entry (n, j) = integral over cell n of lambda_K(u - j) du; computed from
    exact antiderivatives for compact generators and from the Fourier series
    for the periodized sinc.
    """
    l = np.asarray(lefts, dtype=float)
    r = np.asarray(rights, dtype=float)
    K = spec.period
    cols = np.arange(K)

    if spec.family == "sinc":
        n, b = _sinc_fourier_weights(K)
        nz = n != 0
        B = np.zeros((len(l), K))
        lk = l[:, None] - cols[None, :]
        rk = r[:, None] - cols[None, :]
        # n = 0 term integrates the mean; the rest integrate in closed form
        B += b[~nz].sum() * (rk - lk)
        coef = b[nz] * K / (2j * np.pi * n[nz])
        up = np.exp(2j * np.pi * rk[..., None] * n[nz] / K)
        dn = np.exp(2j * np.pi * lk[..., None] * n[nz] / K)
        B += ((up - dn) @ coef).real
        return B

    S = spec.support
    if K <= S:
        raise PeriodTooSmallError(f"support {S} does not fit in period {K}")
    B = np.zeros((len(l), K))
    m_lo = int(math.floor((l.min() - (K - 1) - S / 2.0) / K)) - 1
    m_hi = int(math.ceil((r.max() + S / 2.0) / K)) + 1
    for m in range(m_lo, m_hi + 1):
        shift = cols[None, :] + m * K
        B += eval_generator(spec, r[:, None] - shift, "antiderivative")
        B -= eval_generator(spec, l[:, None] - shift, "antiderivative")
    return B


# ---------------------------------------------------------------------------
# Gram matrix and dual generator
# ---------------------------------------------------------------------------

def _gl_partition(a: float, b: float, max_width: float) -> tuple[np.ndarray, np.ndarray]:
    n = int(math.ceil((b - a) / max_width))
    edges = np.linspace(a, b, n + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return nodes, weights


def gram_circulant(spec: GeneratorSpec, K: int | None = None) -> GramMatrix:
    """First row of the Gram matrix under the (1/K)-normalized inner product.

    Spline entries are exact: Gauss-Legendre of order 8 on the half-integer
    knot lattice integrates the piecewise-polynomial products without error.
    The periodized sinc Gram is summed in the Fourier domain.

    Raises
    ------
    PeriodTooSmallError
        If the generator support does not fit inside one period.
    """
    if K is None:
        K = spec.period
    elif K != spec.period:
        raise ValueError("K disagrees with spec.period")

    if spec.family == "sinc":
        n, b = _sinc_fourier_weights(K)
        ls = np.arange(K)
        first_row = (np.exp(2j * np.pi * np.outer(ls, n) / K) @ (b ** 2)).real
        return GramMatrix(first_row=first_row)

    S = spec.support
    if K <= S:
        raise PeriodTooSmallError(f"support {S} does not fit in period {K}")
    width = 0.5 if spec.family == "bspline" else min(0.5, spec.step)
    nodes, weights = _gl_partition(0.0, float(K), width)
    V = point_matrix(spec, nodes)
    first_row = (weights * V[:, 0]) @ V / K
    return GramMatrix(first_row=first_row)


def dual_generator(gram: GramMatrix) -> DualGenerator:
    """Solve the circulant system Gram * g = e0 by DFT diagonalization.

    The result expresses the biorthogonal generator in the primal frame;
    the reported residual is the max deviation from biorthogonality.

    Raises
    ------
    SingularGramError
        If any circulant eigenvalue is below 1e-12 of the largest.
    """
    eigs = np.fft.fft(gram.first_row)
    mags = np.abs(eigs)
    if mags.min() < 1e-12 * max(mags.max(), 1e-300):
        raise SingularGramError("Gram matrix numerically singular")
    dual = np.fft.ifft(1.0 / eigs).real
    e0 = np.zeros(gram.K)
    e0[0] = 1.0
    residual = float(np.max(np.abs(gram.matvec(dual) - e0)))
    return DualGenerator(dual_coeffs=dual, residual=residual)


# ---------------------------------------------------------------------------
# the space aggregate
# ---------------------------------------------------------------------------

class PeriodicSpace:
    """Generator spec plus the cached machinery built from it.

    Immutable after construction; every method is a pure function of its
    arguments, so instances may be shared across threads.
    """

    _cache: dict[GeneratorSpec, "PeriodicSpace"] = {}

    def __init__(self, spec: GeneratorSpec):
        self.spec = spec
        self.K = spec.period
        self.gram = gram_circulant(spec)
        self.dual = dual_generator(self.gram)
        self._eigs = np.fft.fft(self.gram.first_row)
        self._profile = None
        self._tau = None

    @classmethod
    def for_spec(cls, spec: GeneratorSpec) -> "PeriodicSpace":
        space = cls._cache.get(spec)
        if space is None:
            space = cls(spec)
            cls._cache[spec] = space
        return space

    # -- spectral quantities (lazy; computed on the default grid) -----------

    @property
    def profile(self):
        if self._profile is None:
            from .generators import spectral_profile

            self._profile = spectral_profile(self.spec)
        return self._profile

    @property
    def tau(self) -> float:
        if self._tau is None:
            from .generators import density_bound

            self._tau = density_bound(self.profile).tau
        return self._tau

    # -- circulant actions ---------------------------------------------------

    def apply_gram(self, v: np.ndarray) -> np.ndarray:
        return np.fft.ifft(np.fft.fft(v, axis=-1) * self._eigs, axis=-1).real

    def apply_dual(self, v: np.ndarray) -> np.ndarray:
        """Multiply by the inverse Gram (the dual-frame change of basis)."""
        return np.fft.ifft(np.fft.fft(v, axis=-1) / self._eigs, axis=-1).real

    def norm(self, coeffs: np.ndarray) -> float:
        """Signal L2 norm over one period induced by the Gram form."""
        q = float(coeffs @ self.apply_gram(coeffs))
        return math.sqrt(max(q, 0.0))

    def signal(self, coeffs) -> PeriodicSignal:
        return PeriodicSignal(self.spec, np.asarray(coeffs, dtype=float))


# ---------------------------------------------------------------------------
# kernel, projection, inner products
# ---------------------------------------------------------------------------

def kernel_eval(space: PeriodicSpace, x, t):
    """Reproducing kernel K_x(t) of the space (elementwise over broadcast x, t)."""
    xb, tb = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
    shape = xb.shape
    u = point_matrix(space.spec, np.atleast_1d(xb.ravel()))
    v = point_matrix(space.spec, np.atleast_1d(tb.ravel()))
    out = np.einsum("ij,ij->i", u, space.apply_dual(v))
    return float(out[0]) if shape == () else out.reshape(shape)


def kernel_coeff_matrix(space: PeriodicSpace, points) -> np.ndarray:
    """Columns are the frame coefficients of the kernels K_x at the points."""
    return space.apply_dual(point_matrix(space.spec, points)).T


def project_piecewise_constant(space: PeriodicSpace, breakpoints, values) -> np.ndarray:
    """Project a periodic step function onto the space.

    Cell i runs from breakpoints[i] to breakpoints[i+1] (the last cell wraps
    to breakpoints[0] + K) and carries values[i].  Returns the coefficient
    vector of the projection.

    Raises
    ------
    BadPartitionError
        Breakpoints not strictly increasing, spanning more than one period,
        or values mismatched / non-finite.
    """
    b = np.asarray(breakpoints, dtype=float)
    v = np.asarray(values, dtype=float)
    K = space.K
    if b.ndim != 1 or len(b) < 1 or len(v) != len(b):
        raise BadPartitionError("need one value per breakpoint")
    if len(b) > 1 and np.any(np.diff(b) <= 0):
        raise BadPartitionError("breakpoints must be strictly increasing")
    if b[-1] - b[0] >= K:
        raise BadPartitionError("breakpoints span more than one period")
    if not np.all(np.isfinite(v)):
        raise BadPartitionError("cell values must be finite")
    rights = np.append(b[1:], b[0] + K)
    Bp = cell_integral_matrix(space.spec, b, rights)
    return space.apply_dual(Bp.T @ v) / K


def inner_product(f: PeriodicSignal, g: PeriodicSignal) -> float:
    """Periodic inner product (1/K) * integral f g, via the Gram form."""
    if f.spec != g.spec:
        raise SpaceMismatchError("signals live in different spaces")
    space = PeriodicSpace.for_spec(f.spec)
    return float(f.coeffs @ space.apply_gram(g.coeffs))


def derivative_norm_l2k(sig: PeriodicSignal) -> float:
    """L2-over-one-period norm of the signal derivative.

    Exact Gauss-Legendre quadrature on the knot lattice for splines, exact
    Fourier summation for sinc signals.
    """
    spec, K = sig.spec, sig.K
    if spec.family == "sinc":
        n, w = _sinc_signal_weights(K, sig.coeffs)
        return float(np.sqrt(np.sum(np.abs(w * (2j * np.pi * n / K)) ** 2)))
    width = 0.5 if spec.family == "bspline" else min(0.5, spec.step)
    nodes, weights = _gl_partition(0.0, float(K), width)
    d = eval_signal(sig, nodes, order="derivative")
    return math.sqrt(max(float(weights @ d ** 2) / K, 0.0))


def norms(f: PeriodicSignal, sup_grid_step: float = 1e-3) -> SignalNorms:
    """Coefficient, signal, sup and Sobolev norms of a periodic signal."""
    space = PeriodicSpace.for_spec(f.spec)
    l2c = float(np.linalg.norm(f.coeffs))
    l2k = space.norm(f.coeffs)
    grid = np.arange(-f.K / 2.0, f.K / 2.0, sup_grid_step)
    sup = float(np.max(np.abs(eval_signal(f, grid))))
    dnorm = derivative_norm_l2k(f)
    return SignalNorms(
        l2_of_coeffs=l2c,
        L2_K=l2k,
        sup_estimate=sup,
        H1_estimate=math.sqrt(l2k ** 2 + dnorm ** 2),
    )

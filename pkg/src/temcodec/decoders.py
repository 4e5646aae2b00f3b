"""Decoders: recover signal coefficients from spike timing.

Direct route: weighted least squares on the sample matrix M_{jk} =
lambda(t_j - k), solved through the normal equations whose matrix
U = M^T D M is banded up to periodic corner blocks; a cyclic-banded
Cholesky engages when the generator support is small against the period.

Iterative routes: the relaxation on the weighted frame operator (optimal
step 1/(1 + gamma^2), contraction 2 gamma / (1 + gamma^2) for density
ratio gamma), and the project-the-step-function iteration that contracts
at rate gamma per step.  The integrate-and-fire path consumes inter-spike
integrals instead of samples and is the adjoint of the crossing path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    EmptyTrainError,
    NonConvergentError,
    NotContractiveError,
    NotDenseEnoughError,
    RankDeficientError,
)
from .encoders import SpikeTrain, density_report, voronoi
from .spaces import PeriodicSpace, cell_integral_matrix, point_matrix

__all__ = [
    "LinearSystem",
    "DualCellMatrix",
    "DecodeResult",
    "build_system",
    "decode_pinv",
    "decode_frame_iterative",
    "decode_pv_iterative",
    "decode_if",
    "operator_norm_estimate",
    "dual_cell_matrix",
    "pv_matrix",
    "pv_prime_matrix",
    "pz_matrix",
]


@dataclass(frozen=True)
class LinearSystem:
    """Everything the decoders consume for one spike train."""

    space: PeriodicSpace
    times: np.ndarray
    M: np.ndarray              # J x K samples of the shifted generators
    weights: np.ndarray        # Voronoi cell widths w_j (diagonal of D)
    support: float
    gamma_hint: float | None = None

    @property
    def K(self) -> int:
        return self.space.K

    @property
    def J(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class DualCellMatrix:
    """Integrals of the dual generator over the Voronoi cells (K x J)."""

    values: np.ndarray


@dataclass(frozen=True)
class DecodeResult:
    coeffs: np.ndarray
    iterations: int
    residual_history: list[float] = field(default_factory=list)
    converged: bool = True


# ---------------------------------------------------------------------------
# system assembly
# ---------------------------------------------------------------------------

def build_system(space: PeriodicSpace, train: SpikeTrain, tau: float | None = None) -> LinearSystem:
    """Assemble the sample matrix and Voronoi weights for a spike train.

    Raises
    ------
    EmptyTrainError
        Fewer than two spikes (no Voronoi cells).
    """
    if len(train) == 0:
        raise EmptyTrainError("cannot build a system from an empty train")
    M = point_matrix(space.spec, train.times)
    cells = voronoi(train)
    gamma = None
    if tau is not None:
        gamma = density_report(train).max_gap / tau
    return LinearSystem(
        space=space,
        times=train.times,
        M=M,
        weights=cells.weights,
        support=space.spec.support,
        gamma_hint=gamma,
    )


def dual_cell_matrix(space: PeriodicSpace, train: SpikeTrain) -> DualCellMatrix:
    """Integrals of each shifted dual generator over each Voronoi cell.

    Entry (k, j) is the plain (un-normalized) integral over cell j of the
    dual generator shifted by k; divide by K to get projector coefficients.
    """
    cells = voronoi(train)
    lefts = cells.midpoints
    rights = np.append(lefts[1:], lefts[0] + train.K)
    B = cell_integral_matrix(space.spec, lefts, rights)
    return DualCellMatrix(values=space.apply_dual(B).T)


# ---------------------------------------------------------------------------
# cyclic-banded SPD solve
# ---------------------------------------------------------------------------

def _pivot_floor(U: np.ndarray) -> float:
    return 1e-12 * float(np.max(np.abs(U)))


def _solve_spd(U: np.ndarray, rhs: np.ndarray, half_bw: int) -> np.ndarray:
    """Solve U x = rhs for symmetric positive definite U.

    When the half-bandwidth (ignoring the periodic corner blocks) is small
    against the dimension, split off the last half_bw indices as a border:
    the core is strictly banded and factorized with a banded Cholesky, the
    border through its Schur complement.  Otherwise a dense Cholesky.

    Raises
    ------
    RankDeficientError
        Factorization breakdown or a pivot below 1e-12 * max |U|.
    """
    K = U.shape[0]
    floor = _pivot_floor(U)
    if half_bw >= K / 4 or K - half_bw <= half_bw:
        return _solve_dense(U, rhs, floor)

    nc = K - half_bw
    core = U[:nc, :nc]
    # lower band storage: ab[i - j, j] = core[i, j]
    ab = np.zeros((half_bw + 1, nc))
    for d in range(half_bw + 1):
        ab[d, : nc - d] = np.diagonal(core, -d)
    try:
        cb = scipy.linalg.cholesky_banded(ab, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise RankDeficientError(str(exc)) from exc
    if float(np.min(cb[0] ** 2)) < floor:
        raise RankDeficientError("banded pivot below rank tolerance")

    Ucb = U[:nc, nc:]
    rhs_c = rhs[:nc]
    sol_c = scipy.linalg.cho_solve_banded((cb, True), np.column_stack([Ucb, rhs_c]))
    X, y_c = sol_c[:, :-1], sol_c[:, -1]
    schur = U[nc:, nc:] - Ucb.T @ X
    x_b = _solve_dense(schur, rhs[nc:] - Ucb.T @ y_c, floor)
    x_c = y_c - X @ x_b
    return np.concatenate([x_c, x_b])


def _solve_dense(U: np.ndarray, rhs: np.ndarray, floor: float) -> np.ndarray:
    try:
        cf = scipy.linalg.cho_factor(U, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise RankDeficientError(str(exc)) from exc
    if float(np.min(np.diagonal(cf[0]) ** 2)) < floor:
        raise RankDeficientError("pivot below rank tolerance")
    return scipy.linalg.cho_solve(cf, rhs)


# ---------------------------------------------------------------------------
# direct decoder
# ---------------------------------------------------------------------------

def decode_pinv(sys: LinearSystem, y: np.ndarray, weighted: bool = True) -> DecodeResult:
    """Least-squares decode through the normal equations.

    weighted=True (default) solves (M^T D M) c = M^T D y with the Voronoi
    weights, which compensates spike clustering and is the better
    conditioned of the two; weighted=False solves the plain pseudo-inverse
    normal equations (M^T M) c = M^T y.

    Raises
    ------
    RankDeficientError
        The train does not determine the coefficients (not dense enough).
    """
    y = np.asarray(y, dtype=float)
    M = sys.M
    if weighted:
        MW = M * sys.weights[:, None]
        U = M.T @ MW
        rhs = MW.T @ y
    else:
        U = M.T @ M
        rhs = M.T @ y
    half_bw = int(math.floor(sys.support)) if sys.space.spec.is_compact else sys.K
    coeffs = _solve_spd(U, rhs, half_bw)
    res = float(np.linalg.norm(U @ coeffs - rhs) / max(np.linalg.norm(rhs), 1e-300))
    return DecodeResult(coeffs=coeffs, iterations=0, residual_history=[res], converged=True)


# ---------------------------------------------------------------------------
# frame relaxation (weighted samples, dual-frame preconditioned residual)
# ---------------------------------------------------------------------------

def decode_frame_iterative(
    sys: LinearSystem,
    y: np.ndarray,
    gamma: float,
    tol: float = 1e-10,
    max_iter: int = 500,
) -> DecodeResult:
    """Relaxation on the weighted frame operator of the sampled kernels.

    One step moves the iterate by mu * S (y - M c) where S maps weighted
    sample residuals back to coefficients through the dual frame and mu is
    the optimal step 1/(1 + gamma^2); the error contracts in the signal
    norm by at least 2 gamma / (1 + gamma^2) per step when the density
    ratio gamma = T / tau is below one.

    Raises
    ------
    NotContractiveError
        gamma >= 1, or the update norms grow for five consecutive steps.
    """
    if not 0.0 <= gamma < 1.0:
        raise NotContractiveError(f"density ratio gamma={gamma} must be < 1")
    y = np.asarray(y, dtype=float)
    space, M, w, K = sys.space, sys.M, sys.weights, sys.K
    mu = 1.0 / (1.0 + gamma ** 2)

    def step(c):
        r = y - M @ c
        return mu * space.apply_dual(M.T @ (w * r)) / K

    c = np.zeros(K)
    history: list[float] = []
    grow = 0
    for it in range(1, max_iter + 1):
        u = step(c)
        c = c + u
        un = space.norm(u)
        if history and un > 1e-14 * max(space.norm(c), 1e-300):
            if un >= history[-1]:
                grow += 1
                if grow >= 5:
                    raise NotContractiveError("update norms grew 5 steps in a row")
            else:
                grow = 0
        history.append(un)
        if un <= tol * max(space.norm(c), 1e-300):
            return DecodeResult(coeffs=c, iterations=it, residual_history=history, converged=True)
    return DecodeResult(coeffs=c, iterations=max_iter, residual_history=history, converged=False)


# ---------------------------------------------------------------------------
# project-the-step-function iteration
# ---------------------------------------------------------------------------

def pv_matrix(space: PeriodicSpace, train: SpikeTrain) -> np.ndarray:
    """Coefficient matrix of the map: sample at spikes, hold on Voronoi
    cells, project back onto the space."""
    acell = dual_cell_matrix(space, train).values
    M = point_matrix(space.spec, train.times)
    return acell @ M / space.K


def decode_pv_iterative(
    space: PeriodicSpace,
    train: SpikeTrain,
    y: np.ndarray,
    tol: float = 1e-10,
    max_iter: int = 500,
    tau: float | None = None,
) -> DecodeResult:
    """Iterative decode by projecting the sample-and-hold step function.

    The known step function (value y_n on the Voronoi cell of spike n) is
    projected onto the space to give the first iterate; each subsequent
    step adds the projection of the residual step function.  Converges
    geometrically at the density ratio T / tau.

    Raises
    ------
    NotDenseEnoughError
        max gap >= tau, the invertibility threshold.
    NonConvergentError
        max_iter exhausted while updates still grow.
    """
    if tau is None:
        tau = space.tau
    rep = density_report(train)
    if not rep.max_gap < tau:
        raise NotDenseEnoughError(f"max gap {rep.max_gap} >= tau {tau}")
    y = np.asarray(y, dtype=float)

    acell = dual_cell_matrix(space, train).values
    M = point_matrix(space.spec, train.times)
    c1 = acell @ y / space.K

    c = c1.copy()
    history = [space.norm(c1)]
    prev = c
    for it in range(2, max_iter + 1):
        c_next = c1 + c - acell @ (M @ c) / space.K
        u = c_next - c
        prev, c = c, c_next
        un = space.norm(u)
        history.append(un)
        if un <= tol * max(space.norm(c), 1e-300):
            return DecodeResult(coeffs=c, iterations=it, residual_history=history, converged=True)
    if len(history) >= 2 and history[-1] >= history[-2]:
        raise NonConvergentError("iteration exhausted max_iter while diverging")
    return DecodeResult(coeffs=c, iterations=max_iter, residual_history=history, converged=False)


# ---------------------------------------------------------------------------
# integrate-and-fire path
# ---------------------------------------------------------------------------

def _if_cells(train: SpikeTrain, n_cells: int) -> tuple[np.ndarray, np.ndarray]:
    t = train.times
    if n_cells == len(t):            # wrap cell included
        return t, np.append(t[1:], t[0] + train.K)
    if n_cells == len(t) - 1:        # open chain without the wrap cell
        return t[:-1], t[1:]
    raise ValueError("need one integral per inter-spike cell (J or J-1 values)")


def pv_prime_matrix(space: PeriodicSpace, train: SpikeTrain) -> np.ndarray:
    """Coefficient matrix of: sample at cell midpoints, hold on inter-spike
    cells, project back (the crossing-path operator with roles swapped)."""
    lefts, rights = _if_cells(train, len(train))
    B = cell_integral_matrix(space.spec, lefts, rights)
    mids = 0.5 * (lefts + rights)
    Mp = point_matrix(space.spec, mids)
    return space.apply_dual(B).T @ Mp / space.K


def pz_matrix(space: PeriodicSpace, train: SpikeTrain) -> np.ndarray:
    """Coefficient matrix of: integrate over inter-spike cells, expand on
    the kernels at the cell midpoints, project back.  Adjoint of
    ``pv_prime_matrix`` in the signal inner product."""
    lefts, rights = _if_cells(train, len(train))
    B = cell_integral_matrix(space.spec, lefts, rights)
    mids = 0.5 * (lefts + rights)
    kappa = space.apply_dual(point_matrix(space.spec, mids)).T   # K x J
    return kappa @ B / space.K


def decode_if(
    space: PeriodicSpace,
    train: SpikeTrain,
    q: np.ndarray,
    method: str = "direct",
    tol: float = 1e-10,
    max_iter: int = 500,
    tau: float | None = None,
) -> DecodeResult:
    """Decode from inter-spike integrals q_n = integral of f over
    [t_n, t_{n+1}).

    Pass J integrals to include the wraparound cell, or J - 1 to decode
    from the open chain only (direct method only).  The direct route
    solves the cell-integral system by least squares weighted with the
    reciprocal cell lengths; the iterative route runs the step-projection
    scheme with the integral operator in place of sampling.

    Raises
    ------
    NotDenseEnoughError, RankDeficientError, NonConvergentError
        As for the crossing-path decoders.
    """
    q = np.asarray(q, dtype=float)
    lefts, rights = _if_cells(train, len(q))
    widths = rights - lefts
    B = cell_integral_matrix(space.spec, lefts, rights)

    if method == "direct":
        W = 1.0 / widths
        BW = B * W[:, None]
        U = B.T @ BW
        rhs = BW.T @ q
        # cell integrals widen the band by the largest cell
        half_bw = int(math.floor(space.spec.support + np.max(widths))) + 1
        coeffs = _solve_spd(U, rhs, half_bw)
        res = float(np.linalg.norm(U @ coeffs - rhs) / max(np.linalg.norm(rhs), 1e-300))
        return DecodeResult(coeffs=coeffs, iterations=0, residual_history=[res], converged=True)

    if method != "iterative":
        raise ValueError("method must be 'direct' or 'iterative'")
    if len(q) != len(train):
        raise ValueError("iterative method needs the full wrap partition")
    if tau is None:
        tau = space.tau
    rep = density_report(train)
    if not rep.max_gap < tau:
        raise NotDenseEnoughError(f"max gap {rep.max_gap} >= tau {tau}")

    mids = 0.5 * (lefts + rights)
    kappa = space.apply_dual(point_matrix(space.spec, mids)).T
    c1 = kappa @ q / space.K
    c = c1.copy()
    history = [space.norm(c1)]
    for it in range(2, max_iter + 1):
        c_next = c1 + c - kappa @ (B @ c) / space.K
        u = c_next - c
        c = c_next
        un = space.norm(u)
        history.append(un)
        if un <= tol * max(space.norm(c), 1e-300):
            return DecodeResult(coeffs=c, iterations=it, residual_history=history, converged=True)
    if len(history) >= 2 and history[-1] >= history[-2]:
        raise NonConvergentError("iteration exhausted max_iter while diverging")
    return DecodeResult(coeffs=c, iterations=max_iter, residual_history=history, converged=False)


# ---------------------------------------------------------------------------
# operator diagnostics
# ---------------------------------------------------------------------------

def operator_norm_estimate(
    sys: LinearSystem,
    mu: float,
    iters: int = 200,
    stagnation: float = 1e-10,
    seed: int = 0,
) -> float:
    """Signal-norm estimate of || Id - mu * S || by power iteration.

    S is the weighted frame operator realized on coefficients (the same
    operator the frame relaxation steps on); it is self-adjoint in the
    Gram metric, so the ratio of successive Gram norms converges to the
    spectral radius from below.
    """
    space, M, w, K = sys.space, sys.M, sys.weights, sys.K

    def apply_T(c):
        return c - mu * space.apply_dual(M.T @ (w * (M @ c))) / K

    rng = np.random.default_rng(seed)
    v = rng.standard_normal(K)
    nv = space.norm(v)
    if nv == 0.0:
        return 0.0
    v /= nv
    est = 0.0
    for _ in range(iters):
        tv = apply_T(v)
        ntv = space.norm(tv)
        if ntv < 1e-150:
            return 0.0
        new_est = ntv  # ||v|| = 1 each round
        v = tv / ntv
        if abs(new_est - est) < stagnation:
            return new_est
        est = new_est
    return est

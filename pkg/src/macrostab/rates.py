"""Decoherence rates and their size scaling.

The analytic rate is the exact initial fidelity-decay slope
-dF/dt at t = 0 under white noise,

    Gamma = kappa * sum_{xy} g(x-y) Re <da(x) da(y)>,

which reduces to kappa times the additive-operator fluctuation for the
collective kernel.  The trajectory-side estimate fits -ln F(t) over the
early-time window with inverse-variance weights.  Size scaling is a
log-log least-squares fit Gamma ~ K * N^(1+delta); the state counts as
fragile when the fitted exponent reaches 1.5.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .operators import centered_applied_vectors

FRAGILE_EXPONENT = 1.5
RATE_WINDOW_FRACTION = 0.05


def analytic_dephasing_rate(psi, noise):
    """Initial fidelity-decay rate of ``psi`` under ``noise``."""
    lattice = psi.lattice
    ops = noise.coupling_operators(lattice)
    g = noise.kernel_matrix(lattice)
    phi, _ = centered_applied_vectors(psi, ops)
    gram = np.einsum("ad,bd->ab", phi.conj(), phi).real
    rate = noise.kappa * float(np.sum(g * gram))
    return rate if rate > 0.0 else 0.0


@dataclass(frozen=True)
class DecoherenceFit:
    """Fitted Gamma ~ K N^(1+delta) over a size sequence."""

    points: tuple            # (N, Gamma) pairs
    prefactor: float         # K
    one_plus_delta: float    # fitted exponent
    residual: float          # RMS log deviation

    @property
    def fragile(self):
        return self.one_plus_delta >= FRAGILE_EXPONENT


def fit_gamma_scaling(points):
    """Log-log least squares through (N, Gamma) pairs, all Gamma > 0."""
    pts = [(int(n), float(g)) for n, g in points]
    if len({n for n, _ in pts}) < 3:
        raise ArgumentError("rate-scaling fit needs at least 3 distinct sizes")
    if any(g <= 0 for _, g in pts):
        raise ArgumentError("rate-scaling fit needs strictly positive rates")
    logn = np.log([n for n, _ in pts])
    logg = np.log([g for _, g in pts])
    slope, intercept = np.polyfit(logn, logg, 1)
    fit = slope * logn + intercept
    residual = float(np.sqrt(np.mean((logg - fit) ** 2)))
    return DecoherenceFit(tuple(pts), float(np.exp(intercept)), float(slope), residual)


@dataclass(frozen=True)
class RateFit:
    """Weighted early-time slope of -ln F with its standard error."""

    gamma: float
    stderr: float
    n_points: int
    window: float


def _weighted_slope(t, y, w):
    sw = np.sum(w)
    st = np.sum(w * t)
    stt = np.sum(w * t * t)
    sy = np.sum(w * y)
    sty = np.sum(w * t * y)
    denom = sw * stt - st * st
    if denom <= 0:
        raise ArgumentError("degenerate rate-fit window")
    return (sw * sty - st * sy) / denom, sw / denom


def fit_initial_rate(times, f_mean, f_stderr, window_fraction=RATE_WINDOW_FRACTION):
    """Estimate the decay rate from a fidelity series.

    Fits a weighted line to -ln F over 0 < t <= window_fraction * t_max;
    weights are the inverse variances propagated from the fidelity
    standard errors (capped where the spread underflows).
    """
    times = np.asarray(times, dtype=np.float64)
    f_mean = np.asarray(f_mean, dtype=np.float64)
    f_stderr = np.asarray(f_stderr, dtype=np.float64)
    if times.size != f_mean.size or times.size != f_stderr.size:
        raise ArgumentError("times, f_mean and f_stderr must align")
    window = window_fraction * float(times[-1])
    sel = (times > 0) & (times <= window)
    if int(sel.sum()) < 3:
        raise ArgumentError(
            f"rate window holds {int(sel.sum())} points; need >= 3 (reduce dt "
            "or record more often)"
        )
    t = times[sel]
    f = np.clip(f_mean[sel], 1e-300, None)
    y = -np.log(f)
    sigma = f_stderr[sel] / f
    w = np.where(sigma > 1e-15, 1.0 / np.maximum(sigma, 1e-15) ** 2, 1e30)
    slope, slope_var = _weighted_slope(t, y, w)
    return RateFit(float(slope), float(np.sqrt(slope_var)), int(sel.sum()), window)


def trajectory_rate(result, window_fraction=RATE_WINDOW_FRACTION, n_blocks=20):
    """Decay rate from an ensemble run with a jackknife standard error.

    The per-point error propagation in ``fit_initial_rate`` understates the
    slope uncertainty because fidelity errors are strongly correlated in
    time along each trajectory.  This estimator refits the early-time
    slope with one block of trajectories left out at a time and reports
    the delete-block jackknife spread, which respects that correlation.
    """
    times = result.times
    f_rows = result.f_rows
    window = window_fraction * float(times[-1])
    sel = (times > 0) & (times <= window)
    if int(sel.sum()) < 3:
        raise ArgumentError(
            f"rate window holds {int(sel.sum())} points; need >= 3"
        )
    t = times[sel]
    cols = f_rows[:, sel[1:]]  # f_rows excludes the t = 0 column
    n_traj = cols.shape[0]
    f_full = cols.mean(axis=0)
    sigma = cols.std(axis=0, ddof=1) / np.sqrt(n_traj) / f_full
    w = np.where(sigma > 1e-15, 1.0 / np.maximum(sigma, 1e-15) ** 2, 1e30)

    def slope_of(mean_f):
        y = -np.log(np.clip(mean_f, 1e-300, None))
        return _weighted_slope(t, y, w)[0]

    slope = slope_of(f_full)
    n_blocks = max(2, min(n_blocks, n_traj))
    edges = np.linspace(0, n_traj, n_blocks + 1, dtype=int)
    total = cols.sum(axis=0)
    replicates = []
    for b in range(n_blocks):
        lo, hi = edges[b], edges[b + 1]
        block_sum = cols[lo:hi].sum(axis=0)
        replicates.append(slope_of((total - block_sum) / (n_traj - (hi - lo))))
    replicates = np.asarray(replicates)
    se = math.sqrt((n_blocks - 1) / n_blocks * float(np.sum((replicates - replicates.mean()) ** 2)))
    return RateFit(float(slope), float(se), int(sel.sum()), window)

"""Finite-size cluster-property diagnostics.

The normalized correlation rho(x, y) is the supremum of

    |<da db>| / sqrt(<da^2><db^2>)

over Hermitian single-site observables a at x and b at y.  Within the
Pauli parametrization that supremum is exactly the largest singular value
of the whitened cross-covariance block

    W = C_xx^{-1/2} C_xy C_yy^{-1/2},

where the inverse square roots are taken on the eigenspace with variance
at least ``VARIANCE_FLOOR``; deterministic directions carry no
fluctuation, so they are projected out (Cauchy-Schwarz forces their
numerators to zero as well).

Omega(eps, x) counts the sites y != x whose rho(x, y) exceeds eps, and
Omega(eps) is the worst case over x.  A size sequence "has the cluster
property" when Omega(eps) has stopped growing over the two largest sizes
and fills at most half the chain, a finite-size stand-in for
V-independence.
"""

from dataclasses import dataclass

import numpy as np

from .analyzer import covariance_matrix
from .errors import ArgumentError
from .operators import LocalOperator, apply_local, expectation
from .states import _cdot

VARIANCE_FLOOR = 1e-10


def connected_correlator(psi, a, b):
    """<a b> - <a><b> for local operators at distinct sites."""
    if not isinstance(a, LocalOperator) or not isinstance(b, LocalOperator):
        raise ArgumentError("connected_correlator expects two LocalOperators")
    if a.site == b.site:
        raise ArgumentError("connected correlations need two distinct sites")
    psi.require_normalized()
    phi_a = apply_local(a, psi)
    phi_b = apply_local(b, psi)
    mean_a = expectation(a, psi)
    mean_b = expectation(b, psi)
    return _cdot(phi_a.amplitudes, phi_b.amplitudes) - mean_a * mean_b


def _inverse_sqrt_projected(block):
    """(eigenspace-projected) inverse square root of a 3x3 PSD block."""
    evals, evecs = np.linalg.eigh(block)
    keep = evals >= VARIANCE_FLOOR
    if not np.any(keep):
        return None
    inv = evecs[:, keep] * (1.0 / np.sqrt(evals[keep]))
    return inv @ evecs[:, keep].T


def _rho_from_blocks(c_xx, c_xy, c_yy):
    if np.max(np.abs(c_xx)) < VARIANCE_FLOOR or np.max(np.abs(c_yy)) < VARIANCE_FLOOR:
        return 0.0
    wx = _inverse_sqrt_projected(c_xx)
    wy = _inverse_sqrt_projected(c_yy)
    if wx is None or wy is None:
        return 0.0
    sv = np.linalg.svd(wx @ c_xy @ wy, compute_uv=False)
    return float(sv[0]) if sv.size else 0.0


@dataclass(frozen=True)
class CorrelationField:
    """Normalized correlation strengths for all site pairs; rho(x,x) = 1."""

    lattice: object
    rho: np.ndarray  # (N, N) real symmetric, entries in [0, 1]


def correlation_field(psi):
    """All-pairs normalized correlations from one covariance pass."""
    cov = covariance_matrix(psi)
    n = psi.n_sites
    rho = np.eye(n)
    for x in range(n):
        for y in range(x + 1, n):
            val = _rho_from_blocks(cov.site_block(x, x), cov.site_block(x, y), cov.site_block(y, y))
            rho[x, y] = rho[y, x] = val
    rho.flags.writeable = False
    return CorrelationField(psi.lattice, rho)


def normalized_correlation(psi, x, y):
    """rho(x, y) for one site pair."""
    if x == y:
        raise ArgumentError("normalized correlation needs two distinct sites")
    psi.lattice.validate_site(x)
    psi.lattice.validate_site(y)
    cov = covariance_matrix(psi)
    return _rho_from_blocks(cov.site_block(x, x), cov.site_block(x, y), cov.site_block(y, y))


@dataclass(frozen=True)
class ClusterReport:
    """Correlated-region sizes of one state at a fixed threshold."""

    epsilon: float
    omega_of_x: np.ndarray  # per-site counts of strongly correlated partners
    omega: int              # max over sites
    field: CorrelationField


def omega(psi, epsilon):
    """Count, per site, the partners with rho > epsilon; report the max."""
    if not 0.0 < epsilon < 1.0:
        raise ArgumentError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    field = correlation_field(psi)
    n = psi.n_sites
    off_diag = field.rho > epsilon
    counts = off_diag.sum(axis=1) - 1  # rho(x,x) = 1 never counts
    counts.flags.writeable = False
    return ClusterReport(float(epsilon), counts, int(counts.max()), field)


@dataclass(frozen=True)
class ClusterScalingVerdict:
    """Whether Omega(eps) has saturated across a size sequence."""

    has_cluster_property: bool
    tail_constant: bool
    tail_small: bool
    points: tuple  # (N, omega) ascending in N


def cluster_verdict(points):
    """TRUE when Omega is constant over the two largest sizes and <= N/2."""
    pts = sorted((int(n), int(om)) for n, om in points)
    if len({n for n, _ in pts}) < 3:
        raise ArgumentError("cluster verdict needs at least 3 distinct sizes")
    tail_constant = pts[-1][1] == pts[-2][1]
    tail_small = pts[-1][1] <= pts[-1][0] / 2
    return ClusterScalingVerdict(tail_constant and tail_small, tail_constant, tail_small, tuple(pts))

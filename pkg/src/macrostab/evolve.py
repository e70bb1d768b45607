"""Stochastic trajectory ensembles under correlated dephasing noise.

Each trajectory applies, per time step, the exact unitary
exp(-i sum_x W_x a(x)) with Gaussian increments W ~ N(0, kappa g dt);
site-local couplings always commute across sites, so no splitting error
enters while the system Hamiltonian is off.  With a Hamiltonian on, a
second-order symmetric (Strang) split surrounds the noise step with two
exact half-step propagators exp(-i H dt / 2).

Noise increments come from a counter-based Philox stream keyed by
(master seed, trajectory index), so any execution order or thread count
reproduces identical trajectories; the cross-trajectory mean runs over
an index-ordered array, making reports bit-stable.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ArgumentError, CapabilityError

DENSITY_CAP_SITES = 8
MIN_TRAJECTORIES = 100
_STABILITY_FACTOR = 0.1
_MAX_RECORD_POINTS = 400


def default_threads():
    raw = os.environ.get("MACROSTAB_THREADS", "")
    if raw.strip():
        try:
            n = int(raw)
        except ValueError:
            raise ArgumentError(f"MACROSTAB_THREADS is not an integer: {raw!r}")
        if n < 1:
            raise ArgumentError("MACROSTAB_THREADS must be >= 1")
        return n
    return 1


def stability_dt_bound(noise, lattice):
    """Largest admissible step: 0.1 / (kappa * N * lambda_max(g))."""
    if noise.kappa == 0.0:
        return math.inf
    lam = noise.max_kernel_eigenvalue(lattice)
    return _STABILITY_FACTOR / (noise.kappa * lattice.n_sites * lam)


@dataclass(frozen=True)
class TrajectoryEnsemble:
    """Run configuration for a trajectory ensemble."""

    n_traj: int
    dt: float
    horizon: float
    seed: int
    record_stride: int = None
    collect_density: bool = False

    def __post_init__(self):
        if not isinstance(self.n_traj, int) or self.n_traj < MIN_TRAJECTORIES:
            raise ArgumentError(f"n_traj must be an integer >= {MIN_TRAJECTORIES}")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ArgumentError(f"dt must be > 0, got {self.dt!r}")
        if not (np.isfinite(self.horizon) and self.horizon >= self.dt):
            raise ArgumentError("horizon must be at least one step long")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ArgumentError("seed must be an integer in [0, 2^64)")
        if self.record_stride is not None and self.record_stride < 1:
            raise ArgumentError("record_stride must be >= 1")

    @property
    def n_steps(self):
        return max(1, int(round(self.horizon / self.dt)))

    def effective_stride(self):
        if self.record_stride is not None:
            return self.record_stride
        return max(1, -(-self.n_steps // _MAX_RECORD_POINTS))


@dataclass(frozen=True)
class EvolveResult:
    """Fidelity series (and optional ensemble density matrix) of a run.

    ``f_rows`` holds the per-trajectory fidelities at the recorded times
    after t = 0; resampling them gives error bars that respect the strong
    temporal correlation along each trajectory.
    """

    times: np.ndarray
    f_mean: np.ndarray
    f_stderr: np.ndarray
    f_rows: np.ndarray
    n_traj: int
    dt: float
    seed: int
    kernel_path: str
    density_matrix: np.ndarray = None


def _site_eigensystems(ops):
    n = len(ops)
    lam = np.empty((n, 2), dtype=np.float64)
    q = np.empty((n, 2, 2), dtype=np.complex128)
    for x, op in enumerate(ops):
        evals, evecs = np.linalg.eigh(op.matrix)
        lam[x] = evals
        q[x] = evecs
    return q, lam


def _traj_rng(seed, traj):
    key = np.array([seed, traj], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def evolve_noisy(psi0, noise, ensemble, hamiltonian=None, threads=None):
    """Average fidelity F(t) = <psi0| rho(t) |psi0> over noise trajectories.

    Parameters
    ----------
    psi0 : StateVector
    noise : NoiseModel
    ensemble : TrajectoryEnsemble
    hamiltonian : optional Hamiltonian handle; None freezes system evolution.
    threads : worker threads (default: MACROSTAB_THREADS or 1).  Results are
        independent of the thread count.
    """
    psi0.require_normalized()
    lattice = psi0.lattice
    bound = stability_dt_bound(noise, lattice)
    if ensemble.dt > bound:
        raise ArgumentError(
            f"dt={ensemble.dt!r} violates the stability bound {bound!r} "
            "(0.1 / (kappa N lambda_kernel))"
        )
    if ensemble.collect_density and lattice.n_sites > DENSITY_CAP_SITES:
        raise CapabilityError(
            f"ensemble density matrix capped at {DENSITY_CAP_SITES} sites, "
            f"requested {lattice.n_sites}"
        )
    if hamiltonian is not None and hamiltonian.lattice.n_sites != lattice.n_sites:
        raise ArgumentError("Hamiltonian and state live on different lattices")

    ops = noise.coupling_operators(lattice)
    q, lam = _site_eigensystems(ops)
    n_steps = ensemble.n_steps
    stride = ensemble.effective_stride()
    n_rec = n_steps // stride
    b_scaled = noise.kernel_sqrt(lattice) * math.sqrt(noise.kappa * ensemble.dt)

    amps0 = psi0.amplitudes.astype(np.complex128)
    f_rows = np.empty((ensemble.n_traj, n_rec), dtype=np.float64)
    finals = (
        np.empty((ensemble.n_traj, lattice.dim), dtype=np.complex128)
        if ensemble.collect_density
        else None
    )

    half_u = None
    if hamiltonian is not None:
        from scipy.sparse.linalg import expm_multiply

        h_csr = hamiltonian.to_csr().astype(np.complex128) * (-0.5j * ensemble.dt)

        def half_u(vec):
            return expm_multiply(h_csr, vec)

    def run_one(traj):
        rng = _traj_rng(ensemble.seed, traj)
        w = rng.standard_normal((n_steps, lattice.n_sites)) @ b_scaled.T
        if hamiltonian is None:
            psi = _kernels.dephase_trajectory(amps0, q, lam, w, stride, f_rows[traj])
        else:
            psi = amps0.copy()
            r = 0
            for s in range(n_steps):
                psi = half_u(psi)
                psi = _kernels.noise_step_numpy(psi, q, lam, w[s])
                psi = half_u(psi)
                if (s + 1) % stride == 0:
                    ov = np.sum(amps0.conj() * psi)
                    f_rows[traj, r] = ov.real**2 + ov.imag**2
                    r += 1
        if finals is not None:
            finals[traj] = psi
        return traj

    n_workers = default_threads() if threads is None else int(threads)
    if n_workers <= 1:
        for traj in range(ensemble.n_traj):
            run_one(traj)
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            list(pool.map(run_one, range(ensemble.n_traj)))

    times = np.concatenate(([0.0], ensemble.dt * stride * np.arange(1, n_rec + 1)))
    f_mean = np.concatenate(([1.0], f_rows.mean(axis=0)))
    if ensemble.n_traj > 1:
        spread = f_rows.std(axis=0, ddof=1) / math.sqrt(ensemble.n_traj)
    else:
        spread = np.zeros(n_rec)
    f_stderr = np.concatenate(([0.0], spread))

    density = None
    if finals is not None:
        density = np.einsum("ti,tj->ij", finals, finals.conj()) / ensemble.n_traj

    return EvolveResult(
        times=times,
        f_mean=f_mean,
        f_stderr=f_stderr,
        f_rows=f_rows,
        n_traj=ensemble.n_traj,
        dt=ensemble.dt,
        seed=ensemble.seed,
        kernel_path=_kernels.kernel_path(),
        density_matrix=density,
    )


def dephasing_channel_density(psi0, noise, t):
    """Closed-form ensemble density matrix for commuting diagonal couplings.

    Valid when every coupling operator is diagonal in the computational
    basis (z-axis noise): rho_ij(t) = rho_ij(0) exp(-t R_ij) with
    R_ij = (kappa/2) d^T g d and d the difference of the diagonal
    eigenvalue patterns of basis states i and j.
    """
    lattice = psi0.lattice
    ops = noise.coupling_operators(lattice)
    n = lattice.n_sites
    dim = lattice.dim
    diag_vals = np.empty((n, 2))
    for x, op in enumerate(ops):
        if abs(op.matrix[0, 1]) > 1e-14 or abs(op.matrix[1, 0]) > 1e-14:
            raise ArgumentError("closed-form channel needs diagonal couplings")
        diag_vals[x, 0] = op.matrix[0, 0].real
        diag_vals[x, 1] = op.matrix[1, 1].real
    idx = np.arange(dim)
    bits = (idx[:, None] >> np.arange(n)) & 1
    site_vals = np.where(bits == 0, diag_vals[None, :, 0], diag_vals[None, :, 1])
    g = noise.kernel_matrix(lattice)
    amps = psi0.amplitudes
    rho0 = np.outer(amps, amps.conj())
    d = site_vals[:, None, :] - site_vals[None, :, :]
    rates = 0.5 * noise.kappa * np.einsum("ijx,xy,ijy->ij", d, g, d)
    return rho0 * np.exp(-t * rates)

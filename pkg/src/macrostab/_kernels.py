"""Hot numeric kernels: numba-jitted versions with pure-numpy fallbacks.

Selection: the numba path is used when numba imports cleanly and the
environment variable ``MACROSTAB_NUMBA`` is not set to 0/false/off.
Both paths implement identical arithmetic; ``benchmarks/bench_kernels.py``
compares them.
"""

import os

import numpy as np


def _env_flag(name, default=True):
    raw = os.environ.get(name)
    if raw is None:
        return default
    return raw.strip().lower() not in ("0", "false", "off", "no")


NUMBA_REQUESTED = _env_flag("MACROSTAB_NUMBA")
try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via MACROSTAB_NUMBA=0
    HAVE_NUMBA = False

USE_NUMBA = NUMBA_REQUESTED and HAVE_NUMBA


def kernel_path():
    """Name of the active implementation path."""
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# Hamiltonian matrix-vector product
#
# H v = diag * v  - h * sum_x v[i ^ bit_x]  + swap_coef * sum_bonds v[i ^ mask]
# where the swap term only hits indices whose two bond bits differ.
# ---------------------------------------------------------------------------


def ham_matvec_numpy(v, diag, h, flip_indices, swap_coef, swap_indices, swap_mult):
    out = diag * v
    if h != 0.0 and flip_indices is not None:
        for x in range(flip_indices.shape[0]):
            out -= h * v[flip_indices[x]]
    if swap_coef != 0.0 and swap_indices is not None:
        for b in range(swap_indices.shape[0]):
            out += (swap_coef * swap_mult[b]) * v[swap_indices[b]]
    return out


if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _ham_matvec_numba(v, out, diag, h, n_flip_sites, swap_coef, bond_lo, bond_hi):
        dim = v.shape[0]
        for i in range(dim):
            out[i] = diag[i] * v[i]
        if h != 0.0:
            for x in range(n_flip_sites):
                bit = 1 << x
                for i in range(dim):
                    out[i] -= h * v[i ^ bit]
        if swap_coef != 0.0:
            for b in range(bond_lo.shape[0]):
                mx = 1 << bond_lo[b]
                my = 1 << bond_hi[b]
                mask = mx | my
                for i in range(dim):
                    if ((i & mx) == 0) != ((i & my) == 0):
                        out[i] += swap_coef * v[i ^ mask]
        return out


def ham_matvec(v, tables):
    """Dispatching matvec; ``tables`` comes from ``build_matvec_tables``."""
    if USE_NUMBA:
        out = np.empty_like(v)
        _ham_matvec_numba(
            v,
            out,
            tables["diag"],
            tables["h"],
            tables["n_flip_sites"],
            tables["swap_coef"],
            tables["bond_lo"],
            tables["bond_hi"],
        )
        return out
    return ham_matvec_numpy(
        v,
        tables["diag"],
        tables["h"],
        tables["flip_indices"],
        tables["swap_coef"],
        tables["swap_indices"],
        tables["swap_mult"],
    )


def build_matvec_tables(n_sites, diag, h, swap_coef, bonds):
    """Precompute the index tables both matvec paths consume."""
    dim = diag.shape[0]
    tables = {
        "diag": diag,
        "h": float(h),
        "n_flip_sites": n_sites if h != 0.0 else 0,
        "swap_coef": float(swap_coef),
        "bond_lo": np.array([b[0] for b in bonds], dtype=np.int64),
        "bond_hi": np.array([b[1] for b in bonds], dtype=np.int64),
        "flip_indices": None,
        "swap_indices": None,
        "swap_mult": None,
    }
    if not USE_NUMBA:
        idx = np.arange(dim, dtype=np.int64)
        if h != 0.0:
            tables["flip_indices"] = np.stack(
                [idx ^ (1 << x) for x in range(n_sites)]
            )
        if swap_coef != 0.0 and bonds:
            swaps = []
            mults = []
            for x, y in bonds:
                mx, my = 1 << x, 1 << y
                differ = ((idx & mx) == 0) != ((idx & my) == 0)
                swaps.append(np.where(differ, idx ^ (mx | my), idx))
                mults.append(differ.astype(np.float64))
            tables["swap_indices"] = np.stack(swaps)
            tables["swap_mult"] = np.stack(mults)
    return tables


# ---------------------------------------------------------------------------
# Dephasing trajectory: per step apply exp(-i w[s,x] a(x)) site by site,
# with a(x) = Q diag(lam) Q^dagger, recording |<psi0|psi>|^2 every
# record_stride steps.  Site-local operators at distinct sites commute, so
# the product of single-site rotations is the exact noise step.
# ---------------------------------------------------------------------------


def dephase_trajectory_numpy(psi0, q, lam, w, record_stride, f_out):
    psi = psi0.copy()
    psi0c = psi0.conj()
    dim = psi.shape[0]
    n_steps, n = w.shape
    r = 0
    for s in range(n_steps):
        for x in range(n):
            phase = np.exp(-1j * w[s, x] * lam[x])
            u = (q[x] * phase[np.newaxis, :]) @ q[x].conj().T
            block = psi.reshape(-1, 2, 1 << x)
            psi = np.einsum("ab,hbl->hal", u, block).reshape(dim)
        if (s + 1) % record_stride == 0:
            ov = np.sum(psi0c * psi)
            f_out[r] = ov.real * ov.real + ov.imag * ov.imag
            r += 1
    return np.ascontiguousarray(psi)


if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _dephase_trajectory_numba(psi, psi0c, q, lam, w, record_stride, f_out):
        dim = psi.shape[0]
        n_steps = w.shape[0]
        n = w.shape[1]
        r = 0
        for s in range(n_steps):
            for x in range(n):
                t0 = w[s, x] * lam[x, 0]
                t1 = w[s, x] * lam[x, 1]
                e0 = complex(np.cos(t0), -np.sin(t0))
                e1 = complex(np.cos(t1), -np.sin(t1))
                u00 = q[x, 0, 0] * e0 * np.conj(q[x, 0, 0]) + q[x, 0, 1] * e1 * np.conj(q[x, 0, 1])
                u01 = q[x, 0, 0] * e0 * np.conj(q[x, 1, 0]) + q[x, 0, 1] * e1 * np.conj(q[x, 1, 1])
                u10 = q[x, 1, 0] * e0 * np.conj(q[x, 0, 0]) + q[x, 1, 1] * e1 * np.conj(q[x, 0, 1])
                u11 = q[x, 1, 0] * e0 * np.conj(q[x, 1, 0]) + q[x, 1, 1] * e1 * np.conj(q[x, 1, 1])
                stride = 1 << x
                base = 0
                while base < dim:
                    for off in range(stride):
                        i0 = base + off
                        i1 = i0 + stride
                        a0 = psi[i0]
                        a1 = psi[i1]
                        psi[i0] = u00 * a0 + u01 * a1
                        psi[i1] = u10 * a0 + u11 * a1
                    base += 2 * stride
            if (s + 1) % record_stride == 0:
                ov = complex(0.0, 0.0)
                for i in range(dim):
                    ov += psi0c[i] * psi[i]
                f_out[r] = ov.real * ov.real + ov.imag * ov.imag
                r += 1
        return psi


def dephase_trajectory(psi0, q, lam, w, record_stride, f_out):
    """Run one noise-only trajectory; returns the final state."""
    if USE_NUMBA:
        psi = psi0.copy()
        _dephase_trajectory_numba(psi, psi0.conj(), q, lam, w, record_stride, f_out)
        return psi
    return dephase_trajectory_numpy(psi0, q, lam, w, record_stride, f_out)


def noise_step_numpy(psi, q, lam, w_row):
    """Apply one noise step exp(-i sum_x w[x] a(x)) outside the jitted path."""
    dim = psi.shape[0]
    n = w_row.shape[0]
    for x in range(n):
        phase = np.exp(-1j * w_row[x] * lam[x])
        u = (q[x] * phase[np.newaxis, :]) @ q[x].conj().T
        block = psi.reshape(-1, 2, 1 << x)
        psi = np.einsum("ab,hbl->hal", u, block).reshape(dim)
    return np.ascontiguousarray(psi)

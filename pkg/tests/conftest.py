"""Shared dense-matrix oracles, built by kron products independently of the
package's bit-twiddling kernels."""

from functools import reduce

import numpy as np
import pytest

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
ID2 = np.eye(2, dtype=complex)
PAULI = {"x": SX, "y": SY, "z": SZ}


def dense_site_op(n, site, matrix):
    """matrix at `site`, identity elsewhere; site k lives on bit k."""
    mats = [ID2] * n
    mats[site] = matrix
    return reduce(np.kron, reversed(mats))


def dense_additive(n, axis):
    return sum(dense_site_op(n, x, PAULI[axis]) for x in range(n))


def dense_tfim(n, J, h, B=0.0, periodic=False):
    dim = 2**n
    H = np.zeros((dim, dim), dtype=complex)
    bonds = [(x, x + 1) for x in range(n - 1)]
    if periodic and n > 2:
        bonds.append((n - 1, 0))
    for x, y in bonds:
        H -= J * dense_site_op(n, x, SZ) @ dense_site_op(n, y, SZ)
    for x in range(n):
        H -= h * dense_site_op(n, x, SX)
        H -= B * dense_site_op(n, x, SZ)
    return H


def dense_xxz(n, J, delta, h=0.0, B=0.0, periodic=False):
    dim = 2**n
    H = np.zeros((dim, dim), dtype=complex)
    bonds = [(x, x + 1) for x in range(n - 1)]
    if periodic and n > 2:
        bonds.append((n - 1, 0))
    for x, y in bonds:
        H += J * (
            dense_site_op(n, x, SX) @ dense_site_op(n, y, SX)
            + dense_site_op(n, x, SY) @ dense_site_op(n, y, SY)
            + delta * dense_site_op(n, x, SZ) @ dense_site_op(n, y, SZ)
        )
    for x in range(n):
        H -= h * dense_site_op(n, x, SX)
        H -= B * dense_site_op(n, x, SZ)
    return H


def dense_variance(op, amps):
    """<O^2> - <O>^2 by direct dense multiplication."""
    mean = np.vdot(amps, op @ amps).real
    second = np.vdot(amps, op @ (op @ amps)).real
    return second - mean * mean


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(key=np.array([0xABCDEF, 1], dtype=np.uint64)))


def random_state_amps(n, rng):
    dim = 2**n
    amps = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return amps / np.linalg.norm(amps)

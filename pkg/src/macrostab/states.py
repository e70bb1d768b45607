"""Pure states of a spin-1/2 chain as dense amplitude vectors.

Published ``StateVector`` objects are immutable; every operation returns a
new instance.  Reductions use numpy's pairwise summation so results do not
depend on how work is partitioned.
"""

import math

import numpy as np

from .errors import ArgumentError, StateError
from .lattice import LatticeSpec

NORM_TOL = 1e-8


def _cdot(a, b):
    """<a|b> via pairwise summation (deterministic, thread-count independent)."""
    return complex(np.sum(np.conjugate(a) * b))


class StateVector:
    """Normalized pure state on ``lattice``; amplitudes indexed bit-wise by site.

    Pass ``normalized=False`` for intermediate unnormalized vectors (e.g. the
    image of a local operator); such states are rejected by expectation
    values and measurements.
    """

    __slots__ = ("lattice", "_amps")

    def __init__(self, lattice, amplitudes, *, normalized=True, _take=False):
        if not isinstance(lattice, LatticeSpec):
            raise ArgumentError("lattice must be a LatticeSpec")
        arr = np.asarray(amplitudes, dtype=np.complex128)
        if arr.shape != (lattice.dim,):
            raise StateError(
                f"amplitude count {arr.shape} does not match 2^{lattice.n_sites}"
            )
        if not np.all(np.isfinite(arr.view(np.float64))):
            raise StateError("amplitudes must be finite")
        if not _take:
            arr = arr.copy()
        if normalized:
            n2 = float(np.sum(arr.real**2 + arr.imag**2))
            if abs(n2 - 1.0) > NORM_TOL:
                raise StateError(f"state not normalized: sum |a|^2 = {n2!r}")
        arr.flags.writeable = False
        object.__setattr__(self, "lattice", lattice)
        object.__setattr__(self, "_amps", arr)

    def __setattr__(self, name, value):
        raise AttributeError("StateVector is immutable")

    @property
    def amplitudes(self):
        """Read-only view of the 2^N complex amplitudes."""
        return self._amps

    @property
    def n_sites(self):
        return self.lattice.n_sites

    @property
    def dim(self):
        return self.lattice.dim

    def norm_squared(self):
        return float(np.sum(self._amps.real**2 + self._amps.imag**2))

    def overlap(self, other):
        """<self|other> as a complex number."""
        if other.lattice.n_sites != self.lattice.n_sites:
            raise ArgumentError("states live on different lattices")
        return _cdot(self._amps, other._amps)

    def normalized(self):
        """Unit-norm copy of this state."""
        n = math.sqrt(self.norm_squared())
        if n < 1e-12:
            raise StateError("cannot normalize a (near-)zero vector")
        if abs(n - 1.0) <= 1e-12:
            return StateVector(self.lattice, self._amps, normalized=True)
        return StateVector(self.lattice, self._amps / n, normalized=True, _take=True)

    def writable_copy(self):
        return np.array(self._amps, dtype=np.complex128)

    def require_normalized(self):
        if abs(self.norm_squared() - 1.0) > NORM_TOL:
            raise StateError("operation requires a normalized state")
        return self


def basis_state(lattice, index):
    """Computational basis state |index> (bit k of index = site k)."""
    if not 0 <= index < lattice.dim:
        raise ArgumentError(f"basis index {index} out of range")
    amps = np.zeros(lattice.dim, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(lattice, amps, _take=True)


def make_product_state(lattice, bloch_angles):
    """Tensor product of single-site states cos(t/2)|up> + e^{i p} sin(t/2)|down>.

    Parameters
    ----------
    lattice : LatticeSpec
    bloch_angles : sequence of (theta, phi) pairs in radians, one per site.
    """
    angles = list(bloch_angles)
    if len(angles) != lattice.n_sites:
        raise ArgumentError(
            f"need {lattice.n_sites} angle pairs, got {len(angles)}"
        )
    amps = np.ones(1, dtype=np.complex128)
    for theta, phi in angles:
        if not (math.isfinite(theta) and math.isfinite(phi)):
            raise ArgumentError("Bloch angles must be finite")
        v = np.array(
            [math.cos(theta / 2.0),
             complex(math.cos(phi), math.sin(phi)) * math.sin(theta / 2.0)],
            dtype=np.complex128,
        )
        # site k occupies bit k, so later (higher) sites go on the left of kron
        amps = np.kron(v, amps)
    n = math.sqrt(float(np.sum(amps.real**2 + amps.imag**2)))
    if abs(n - 1.0) > 1e-15:
        amps /= n
    return StateVector(lattice, amps, _take=True)


def make_uniform_product(lattice, theta, phi=0.0):
    """Product state with the same Bloch angles on every site."""
    return make_product_state(lattice, [(theta, phi)] * lattice.n_sites)


def make_ghz(lattice):
    """(|all-up> + |all-down>)/sqrt(2)."""
    if lattice.n_sites < 2:
        raise ArgumentError("GHZ state needs at least 2 sites")
    amps = np.zeros(lattice.dim, dtype=np.complex128)
    r = 1.0 / math.sqrt(2.0)
    amps[0] = r
    amps[-1] = r
    return StateVector(lattice, amps, _take=True)


def make_dicke(lattice, k):
    """Equal superposition of all basis states with exactly k down spins."""
    n = lattice.n_sites
    if not isinstance(k, int) or isinstance(k, bool) or not 0 <= k <= n:
        raise ArgumentError(f"excitation count k={k!r} out of range 0..{n}")
    idx = np.arange(lattice.dim, dtype=np.uint64)
    pop = np.zeros(lattice.dim, dtype=np.int64)
    for x in range(n):
        pop += ((idx >> np.uint64(x)) & np.uint64(1)).astype(np.int64)
    hits = np.nonzero(pop == k)[0]
    amps = np.zeros(lattice.dim, dtype=np.complex128)
    amps[hits] = 1.0 / math.sqrt(len(hits))
    return StateVector(lattice, amps, _take=True)

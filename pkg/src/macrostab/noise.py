"""Spatially correlated white-noise models coupling to local operators.

Convention: the noise field f(x, t) multiplying the coupling operator
a(x) is Gaussian and white in time with

    E[f(x,t) f(y,t')] = kappa * g(x - y) * delta(t - t'),

so the ensemble obeys drho/dt = -(kappa/2) sum_{xy} g(x-y) [a(x),[a(y),rho]]
and the initial fidelity-decay rate of a pure state is
kappa * sum_{xy} g(x-y) Re<da(x) da(y)>.  For the collective kernel
(g identically 1) that rate is exactly kappa times the fluctuation of
the additive operator sum_x a(x).
"""

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, ModelError
from .operators import LocalOperator, PAULI_MATRICES

KERNEL_COLLECTIVE = "collective"
KERNEL_INDEPENDENT = "independent"
KERNEL_EXPONENTIAL = "exponential"
KERNELS = (KERNEL_COLLECTIVE, KERNEL_INDEPENDENT, KERNEL_EXPONENTIAL)

_PSD_TOL = 1e-8


@dataclass(frozen=True)
class NoiseModel:
    """White noise of intensity kappa with a spatial correlation kernel.

    The coupling is either a Pauli ``axis`` replicated on every site or an
    explicit per-site operator list.
    """

    kappa: float
    kernel: str = KERNEL_COLLECTIVE
    axis: str = "z"
    site_operators: tuple = None
    xi: float = None

    def __post_init__(self):
        if not np.isfinite(self.kappa) or self.kappa < 0:
            raise ArgumentError(f"kappa must be >= 0, got {self.kappa!r}")
        if self.kernel not in KERNELS:
            raise ArgumentError(f"kernel must be one of {KERNELS}, got {self.kernel!r}")
        if self.kernel == KERNEL_EXPONENTIAL:
            if self.xi is None or not np.isfinite(self.xi) or self.xi <= 0:
                raise ArgumentError("exponential kernel needs a correlation length xi > 0")
        if self.site_operators is None and self.axis not in PAULI_MATRICES:
            raise ArgumentError(f"axis must be one of ('x','y','z'), got {self.axis!r}")
        if self.site_operators is not None:
            object.__setattr__(self, "site_operators", tuple(self.site_operators))

    def coupling_operators(self, lattice):
        """One Hermitian coupling operator per lattice site."""
        if self.site_operators is not None:
            ops = self.site_operators
            if len(ops) != lattice.n_sites:
                raise ArgumentError(
                    f"need {lattice.n_sites} site operators, got {len(ops)}"
                )
            for x, op in enumerate(ops):
                if not isinstance(op, LocalOperator) or op.site != x:
                    raise ArgumentError("site_operators must be site-ordered LocalOperators")
            return list(ops)
        return [LocalOperator(x, PAULI_MATRICES[self.axis]) for x in lattice.sites]

    def kernel_matrix(self, lattice):
        """Spatial correlation matrix g, validated positive semidefinite."""
        n = lattice.n_sites
        if self.kernel == KERNEL_COLLECTIVE:
            g = np.ones((n, n))
        elif self.kernel == KERNEL_INDEPENDENT:
            g = np.eye(n)
        else:
            g = np.empty((n, n))
            for x in range(n):
                for y in range(n):
                    g[x, y] = np.exp(-lattice.distance(x, y) / self.xi)
        evals = np.linalg.eigvalsh(g)
        if evals[0] < -_PSD_TOL * max(1.0, evals[-1]):
            raise ModelError(
                f"noise kernel is not positive semidefinite (min eigenvalue {evals[0]:.3e})"
            )
        return g

    def kernel_sqrt(self, lattice):
        """Symmetric square root B with B @ B.T = g (negative dust clipped)."""
        g = self.kernel_matrix(lattice)
        evals, evecs = np.linalg.eigh(g)
        evals = np.clip(evals, 0.0, None)
        return (evecs * np.sqrt(evals)) @ evecs.T

    def max_kernel_eigenvalue(self, lattice):
        return float(np.linalg.eigvalsh(self.kernel_matrix(lattice))[-1])

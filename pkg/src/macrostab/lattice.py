"""1-D lattice of spin-1/2 sites.

Site ``x`` lives on bit ``x`` of the basis index, bit value 0 meaning the
sigma_z eigenvalue +1 ("up") and 1 meaning -1 ("down").  The default site
cap keeps dense state vectors at 2^14 amplitudes; override it with the
``MACROSTAB_MAX_SITES`` environment variable.
"""

import os
from dataclasses import dataclass

from .errors import ArgumentError, CapabilityError

OPEN_CHAIN = "open-chain"
PERIODIC_CHAIN = "periodic-chain"
GEOMETRIES = (OPEN_CHAIN, PERIODIC_CHAIN)

DEFAULT_SITE_CAP = 14


def site_cap():
    """Configured maximum number of sites."""
    raw = os.environ.get("MACROSTAB_MAX_SITES", "")
    if raw.strip():
        try:
            return int(raw)
        except ValueError:
            raise ArgumentError(f"MACROSTAB_MAX_SITES is not an integer: {raw!r}")
    return DEFAULT_SITE_CAP


@dataclass(frozen=True)
class LatticeSpec:
    """Chain of ``n_sites`` spin-1/2 sites with open or periodic ends."""

    n_sites: int
    geometry: str = OPEN_CHAIN

    def __post_init__(self):
        if not isinstance(self.n_sites, int) or isinstance(self.n_sites, bool):
            raise ArgumentError(f"n_sites must be an integer, got {self.n_sites!r}")
        if self.n_sites < 1:
            raise ArgumentError(f"n_sites must be >= 1, got {self.n_sites}")
        cap = site_cap()
        if self.n_sites > cap:
            raise CapabilityError(
                f"n_sites={self.n_sites} exceeds the site cap {cap} "
                "(set MACROSTAB_MAX_SITES to raise it)"
            )
        if self.geometry not in GEOMETRIES:
            raise ArgumentError(
                f"geometry must be one of {GEOMETRIES}, got {self.geometry!r}"
            )

    @property
    def dim(self):
        return 1 << self.n_sites

    @property
    def sites(self):
        return range(self.n_sites)

    def validate_site(self, x):
        if not isinstance(x, int) or isinstance(x, bool) or not 0 <= x < self.n_sites:
            raise ArgumentError(
                f"site index {x!r} out of range for n_sites={self.n_sites}"
            )

    def bonds(self):
        """Nearest-neighbour bonds as (x, y) pairs, no duplicates."""
        n = self.n_sites
        if n < 2:
            return []
        pairs = [(x, x + 1) for x in range(n - 1)]
        if self.geometry == PERIODIC_CHAIN and n > 2:
            pairs.append((n - 1, 0))
        return pairs

    def distance(self, x, y):
        """Separation of two sites; ring distance on periodic chains."""
        self.validate_site(x)
        self.validate_site(y)
        d = abs(x - y)
        if self.geometry == PERIODIC_CHAIN:
            d = min(d, self.n_sites - d)
        return d

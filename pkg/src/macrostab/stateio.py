"""Text serialization of state vectors.

Format (normative): a header line ``macrostab-state v1 n_sites=<N>``
followed by 2^N lines ``<index> <re> <im>`` in increasing index order,
17 significant digits per float so amplitudes round-trip bit-exactly.
"""

import io
import math
import re
from pathlib import Path

import numpy as np

from .errors import FormatError
from .lattice import LatticeSpec, OPEN_CHAIN
from .states import StateVector

_HEADER_RE = re.compile(r"^macrostab-state v1 n_sites=(\d+)$")


def export_state(psi, destination):
    """Write a state to a path or text file object."""
    if isinstance(destination, (str, Path)):
        with open(destination, "w", encoding="ascii") as fh:
            _write(psi, fh)
    else:
        _write(psi, destination)


def _write(psi, fh):
    fh.write(f"macrostab-state v1 n_sites={psi.n_sites}\n")
    amps = psi.amplitudes
    for i in range(psi.dim):
        fh.write(f"{i} {amps[i].real:.17e} {amps[i].imag:.17e}\n")


def import_state(source, geometry=OPEN_CHAIN):
    """Read a state file, validate its layout, and renormalize.

    Renormalization is skipped when the stored norm is already 1 within
    1e-12 so that export/import round-trips are bit-exact.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="ascii") as fh:
            return _read(fh, geometry)
    if isinstance(source, bytes):
        return _read(io.StringIO(source.decode("ascii")), geometry)
    return _read(source, geometry)


def _read(fh, geometry):
    header = fh.readline().rstrip("\n")
    m = _HEADER_RE.match(header)
    if not m:
        raise FormatError(f"malformed state-file header: {header!r}")
    n_sites = int(m.group(1))
    lattice = LatticeSpec(n_sites, geometry)
    dim = lattice.dim
    amps = np.empty(dim, dtype=np.complex128)
    count = 0
    for line in fh:
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise FormatError(f"malformed amplitude line: {line!r}")
        try:
            idx = int(parts[0])
            re_part = float(parts[1])
            im_part = float(parts[2])
        except ValueError:
            raise FormatError(f"malformed amplitude line: {line!r}")
        if idx != count:
            raise FormatError(
                f"amplitude index {idx} out of order (expected {count})"
            )
        if count >= dim:
            raise FormatError(f"too many amplitude lines for n_sites={n_sites}")
        if not (math.isfinite(re_part) and math.isfinite(im_part)):
            raise FormatError("amplitudes must be finite")
        amps[count] = complex(re_part, im_part)
        count += 1
    if count != dim:
        raise FormatError(
            f"expected {dim} amplitudes for n_sites={n_sites}, found {count}"
        )
    norm = math.sqrt(float(np.sum(amps.real**2 + amps.imag**2)))
    if norm < 1e-6:
        raise FormatError("state file holds a (near-)zero vector")
    if abs(norm - 1.0) > 1e-12:
        amps /= norm
    return StateVector(lattice, amps, _take=True)

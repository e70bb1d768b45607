import itertools
import math

import numpy as np
import pytest

from macrostab import (
    ArgumentError,
    CapabilityError,
    LatticeSpec,
    StateError,
    StateVector,
    basis_state,
    make_dicke,
    make_ghz,
    make_product_state,
    make_uniform_product,
)


def product_amps_oracle(angles):
    """Expand the tensor product by explicit bitstring enumeration."""
    n = len(angles)
    amps = np.zeros(2**n, dtype=complex)
    for idx in range(2**n):
        val = 1.0 + 0j
        for k, (theta, phi) in enumerate(angles):
            bit = (idx >> k) & 1
            if bit == 0:
                val *= math.cos(theta / 2)
            else:
                val *= np.exp(1j * phi) * math.sin(theta / 2)
        amps[idx] = val
    return amps


class TestLattice:
    def test_basic(self):
        lat = LatticeSpec(4)
        assert lat.dim == 16
        assert list(lat.sites) == [0, 1, 2, 3]
        assert lat.bonds() == [(0, 1), (1, 2), (2, 3)]

    def test_periodic_bonds_and_distance(self):
        lat = LatticeSpec(4, "periodic-chain")
        assert lat.bonds() == [(0, 1), (1, 2), (2, 3), (3, 0)]
        assert lat.distance(0, 3) == 1
        # two-site ring keeps a single bond
        assert LatticeSpec(2, "periodic-chain").bonds() == [(0, 1)]

    def test_cap(self):
        with pytest.raises(CapabilityError):
            LatticeSpec(15)

    def test_bad_args(self):
        with pytest.raises(ArgumentError):
            LatticeSpec(0)
        with pytest.raises(ArgumentError):
            LatticeSpec(3, "ring")


class TestStateVector:
    def test_normalization_enforced(self):
        lat = LatticeSpec(2)
        with pytest.raises(StateError):
            StateVector(lat, [1.0, 1.0, 0.0, 0.0])

    def test_immutable(self):
        psi = make_ghz(LatticeSpec(2))
        with pytest.raises(ValueError):
            psi.amplitudes[0] = 0.0
        with pytest.raises(AttributeError):
            psi.lattice = None

    def test_wrong_size(self):
        with pytest.raises(StateError):
            StateVector(LatticeSpec(2), [1.0, 0.0])

    def test_overlap(self):
        lat = LatticeSpec(3)
        up = basis_state(lat, 0)
        ghz = make_ghz(lat)
        assert abs(up.overlap(ghz) - 1 / math.sqrt(2)) < 1e-12


class TestProductState:
    def test_all_up_two_sites(self):
        psi = make_product_state(LatticeSpec(2), [(0.0, 0.0), (0.0, 0.0)])
        assert np.allclose(psi.amplitudes, [1, 0, 0, 0])

    def test_single_site_plus(self):
        psi = make_product_state(LatticeSpec(1), [(math.pi / 2, 0.0)])
        assert np.allclose(psi.amplitudes, [1 / math.sqrt(2)] * 2)

    def test_three_site_plus_from_oracle(self):
        angles = [(math.pi / 2, 0.0)] * 3
        psi = make_product_state(LatticeSpec(3), angles)
        assert np.allclose(psi.amplitudes, np.full(8, 1 / math.sqrt(8)))
        assert np.allclose(psi.amplitudes, product_amps_oracle(angles), atol=1e-14)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_random_angles_match_oracle(self, n, rng):
        angles = [(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi)) for _ in range(n)]
        psi = make_product_state(LatticeSpec(n), angles)
        assert np.allclose(psi.amplitudes, product_amps_oracle(angles), atol=1e-13)
        assert abs(psi.norm_squared() - 1.0) < 1e-12

    def test_bad_angles(self):
        with pytest.raises(ArgumentError):
            make_product_state(LatticeSpec(1), [(math.nan, 0.0)])
        with pytest.raises(ArgumentError):
            make_product_state(LatticeSpec(2), [(0.0, 0.0)])


class TestGhz:
    def test_two_sites(self):
        psi = make_ghz(LatticeSpec(2))
        r = 1 / math.sqrt(2)
        assert np.allclose(psi.amplitudes, [r, 0, 0, r])

    def test_three_sites(self):
        psi = make_ghz(LatticeSpec(3))
        assert abs(psi.amplitudes[0] - 1 / math.sqrt(2)) < 1e-15
        assert abs(psi.amplitudes[7] - 1 / math.sqrt(2)) < 1e-15
        assert np.all(psi.amplitudes[1:7] == 0)

    def test_norm_four_sites(self):
        psi = make_ghz(LatticeSpec(4))
        assert abs(psi.norm_squared() - 1.0) < 1e-12

    def test_too_small(self):
        with pytest.raises(ArgumentError):
            make_ghz(LatticeSpec(1))


class TestDicke:
    def test_w_state(self):
        psi = make_dicke(LatticeSpec(3), 1)
        expected = np.zeros(8)
        expected[[1, 2, 4]] = 1 / math.sqrt(3)
        assert np.allclose(psi.amplitudes, expected)

    def test_zero_excitations(self):
        psi = make_dicke(LatticeSpec(3), 0)
        assert np.allclose(psi.amplitudes, basis_state(LatticeSpec(3), 0).amplitudes)

    def test_counts_match_binomial(self):
        psi = make_dicke(LatticeSpec(4), 2)
        nonzero = np.nonzero(psi.amplitudes)[0]
        assert len(nonzero) == math.comb(4, 2)
        assert np.allclose(psi.amplitudes[nonzero], 1 / math.sqrt(6))
        expected = {i for i in range(16) if bin(i).count("1") == 2}
        assert set(nonzero) == expected

    def test_out_of_range(self):
        with pytest.raises(ArgumentError):
            make_dicke(LatticeSpec(3), 4)
        with pytest.raises(ArgumentError):
            make_dicke(LatticeSpec(3), -1)


def test_uniform_product_matches_explicit():
    a = make_uniform_product(LatticeSpec(3), math.pi / 2, 0.3)
    b = make_product_state(LatticeSpec(3), list(itertools.repeat((math.pi / 2, 0.3), 3)))
    assert np.allclose(a.amplitudes, b.amplitudes)

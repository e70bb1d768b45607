import math

import numpy as np
import pytest

from macrostab import (
    ArgumentError,
    LatticeSpec,
    LocalOperator,
    StateMixture,
    basis_state,
    build_hamiltonian,
    conditional_distribution,
    ground_state,
    make_dicke,
    make_ghz,
    make_uniform_product,
    max_additive_fluctuation,
    measure_local,
    measurement_cascade,
    pauli,
    stability_test,
    HamiltonianSpec,
)
from macrostab.measure import direction_grid, single_site_rdm, two_site_rdm


def tfim_ground(n, h):
    spec = HamiltonianSpec("transverse-ising", LatticeSpec(n), J=1.0, h=h)
    return ground_state(build_hamiltonian(spec)).states[0]


class TestMeasureLocal:
    def test_ghz_collapse(self):
        lat = LatticeSpec(4)
        out = measure_local(make_ghz(lat), pauli(lat, 0, "z"))
        assert out.eigenvalues == (1.0, -1.0)
        assert out.probabilities[1.0] == pytest.approx(0.5, abs=1e-12)
        assert out.probabilities[-1.0] == pytest.approx(0.5, abs=1e-12)
        assert np.allclose(out.post_states[1.0].amplitudes, basis_state(lat, 0).amplitudes)
        assert np.allclose(out.post_states[-1.0].amplitudes, basis_state(lat, 15).amplitudes)

    def test_eigenstate_unchanged(self):
        lat = LatticeSpec(3)
        up = basis_state(lat, 0)
        out = measure_local(up, pauli(lat, 2, "z"))
        assert out.probabilities[1.0] == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(out.post_states[1.0].amplitudes, up.amplitudes)
        assert -1.0 not in out.post_states

    def test_single_plus_site(self):
        lat = LatticeSpec(1)
        out = measure_local(make_uniform_product(lat, math.pi / 2), pauli(lat, 0, "z"))
        assert out.probabilities[1.0] == pytest.approx(0.5, abs=1e-12)

    def test_degenerate_observable_rejected(self):
        lat = LatticeSpec(2)
        with pytest.raises(ArgumentError):
            measure_local(make_ghz(lat), LocalOperator(0, np.eye(2)))


class TestConditionalDistribution:
    def test_ghz_perfect_correlation(self):
        lat = LatticeSpec(4)
        table = conditional_distribution(make_ghz(lat), pauli(lat, 0, "z"), pauli(lat, 3, "z"))
        ia = table.a_values.index(1.0)
        jb = table.b_values.index(1.0)
        assert table.p_b_given_a[ia, jb] == pytest.approx(1.0, abs=1e-12)
        assert table.p_b[jb] == pytest.approx(0.5, abs=1e-12)

    def test_product_factorizes(self):
        lat = LatticeSpec(4)
        psi = make_uniform_product(lat, 0.9, 0.4)
        table = conditional_distribution(psi, pauli(lat, 0, "x"), pauli(lat, 3, "y"))
        for ia in range(2):
            for jb in range(2):
                assert table.p_b_given_a[ia, jb] == pytest.approx(table.p_b[jb], abs=1e-12)

    @pytest.mark.parametrize("make", [
        lambda: make_ghz(LatticeSpec(4)),
        lambda: make_dicke(LatticeSpec(4), 2),
        lambda: make_uniform_product(LatticeSpec(4), 1.1, 0.2),
    ])
    def test_total_probability(self, make):
        lat = LatticeSpec(4)
        psi = make()
        table = conditional_distribution(psi, pauli(lat, 1, "z"), pauli(lat, 3, "x"))
        for jb in range(2):
            total = sum(table.p_a[ia] * table.p_b_given_a[ia, jb] for ia in range(2))
            assert total == pytest.approx(table.p_b[jb], abs=1e-10)

    def test_joint_symmetry_under_swap(self):
        # commuting projectors: P(a and b) must not depend on measurement order
        lat = LatticeSpec(4)
        psi = make_dicke(lat, 1)
        a_obs, b_obs = pauli(lat, 0, "z"), pauli(lat, 3, "x")
        fwd = conditional_distribution(psi, a_obs, b_obs)
        rev = conditional_distribution(psi, b_obs, a_obs)
        assert np.allclose(fwd.joint, rev.joint.T, atol=1e-10)

    def test_same_site_rejected(self):
        lat = LatticeSpec(3)
        with pytest.raises(ArgumentError):
            conditional_distribution(make_ghz(lat), pauli(lat, 1, "z"), pauli(lat, 1, "x"))


class TestRdmConsistency:
    def test_joint_probabilities_match_conditional_route(self):
        lat = LatticeSpec(5)
        psi = make_dicke(lat, 2)
        x, y = 1, 4
        a_obs, b_obs = pauli(lat, x, "z"), pauli(lat, y, "x")
        table = conditional_distribution(psi, a_obs, b_obs)
        rdm = two_site_rdm(psi, x, y)
        proj_az = np.diag([1.0, 0.0])  # sigma_z outcome +1
        proj_bx = 0.5 * np.array([[1, 1], [1, 1]], dtype=complex)
        joint = np.trace(rdm @ np.kron(proj_bx, proj_az)).real  # y-major ordering
        ia = table.a_values.index(1.0)
        jb = table.b_values.index(1.0)
        assert joint == pytest.approx(table.joint[ia, jb], abs=1e-12)

    def test_single_site_rdm_trace(self):
        psi = make_dicke(LatticeSpec(4), 1)
        for x in range(4):
            rdm = single_site_rdm(psi, x)
            assert np.trace(rdm).real == pytest.approx(1.0, abs=1e-12)

    def test_mixture_rdm_is_convex_combination(self):
        lat = LatticeSpec(3)
        up = basis_state(lat, 0)
        down = basis_state(lat, 7)
        mix = StateMixture(((0.5, up), (0.5, down)))
        rdm = single_site_rdm(mix, 1)
        assert np.allclose(rdm, np.diag([0.5, 0.5]), atol=1e-12)


class TestStability:
    def test_ghz_unstable_at_half(self):
        rep = stability_test(make_ghz(LatticeSpec(6)), epsilon=0.1, varepsilon=0.1, min_distance=3)
        assert rep.max_deviation == pytest.approx(0.5, abs=1e-9)
        assert not rep.stable
        for dist, dev in rep.max_deviation_at_distance.items():
            assert dev == pytest.approx(0.5, abs=1e-9), dist

    def test_product_stable(self):
        rep = stability_test(
            make_uniform_product(LatticeSpec(6), 0.8, 0.3), epsilon=0.1, varepsilon=0.1, min_distance=3
        )
        assert rep.max_deviation <= 1e-9
        assert rep.stable

    def test_paramagnetic_ground_stable(self):
        rep = stability_test(tfim_ground(10, 2.0), epsilon=0.1, varepsilon=0.1, min_distance=5)
        assert rep.stable

    def test_classical_mixture_unstable(self):
        lat = LatticeSpec(4)
        mix = StateMixture(((0.5, basis_state(lat, 0)), (0.5, basis_state(lat, 15))))
        rep = stability_test(mix, epsilon=0.1, varepsilon=0.1, min_distance=2)
        assert rep.max_deviation == pytest.approx(0.5, abs=1e-9)
        assert not rep.stable

    def test_parameter_validation(self):
        psi = make_ghz(LatticeSpec(4))
        with pytest.raises(ArgumentError):
            stability_test(psi, epsilon=0.0)
        with pytest.raises(ArgumentError):
            stability_test(psi, epsilon=0.1, varepsilon=1.5)
        with pytest.raises(ArgumentError):
            stability_test(psi, epsilon=0.1, min_distance=4)

    def test_grid_has_26_unit_directions(self):
        grid = direction_grid()
        assert grid.shape == (26, 3)
        assert np.allclose(np.linalg.norm(grid, axis=1), 1.0)
        assert len({tuple(np.round(v, 12)) for v in grid}) == 26


class TestMixtureValidation:
    def test_weights_must_sum_to_one(self):
        lat = LatticeSpec(2)
        with pytest.raises(ArgumentError):
            StateMixture(((0.7, basis_state(lat, 0)), (0.7, basis_state(lat, 3))))

    def test_negative_weight(self):
        lat = LatticeSpec(2)
        with pytest.raises(ArgumentError):
            StateMixture(((-0.5, basis_state(lat, 0)), (1.5, basis_state(lat, 3))))


class TestCascade:
    def test_ghz_collapses_to_product_after_one(self):
        for n in (4, 6):
            psi = make_ghz(LatticeSpec(n))
            result = measurement_cascade(psi)
            assert len(result.steps) == 1
            assert result.reached_nfs
            post = result.final_state
            assert max_additive_fluctuation(post).max_variance <= n + 1e-6

    def test_symmetric_ground_reaches_nfs_quickly(self):
        psi = tfim_ground(8, 0.1)
        result = measurement_cascade(psi)
        assert result.reached_nfs
        assert len(result.steps) <= 2

    def test_product_needs_no_measurement(self):
        psi = make_uniform_product(LatticeSpec(5), math.pi / 2)
        result = measurement_cascade(psi)
        assert result.reached_nfs
        assert len(result.steps) == 0

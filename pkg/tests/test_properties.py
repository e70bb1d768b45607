"""Property-based invariants over randomized states."""

import math

import numpy as np
from hypothesis import given, settings, strategies as st

from macrostab import (
    AdditiveOperator,
    LatticeSpec,
    StateVector,
    additive_variance,
    expectation,
    make_product_state,
    max_additive_fluctuation,
    normalized_correlation,
    pauli,
)
from macrostab.measure import conditional_distribution


angle_pairs = st.tuples(
    st.floats(0.0, math.pi, allow_nan=False),
    st.floats(0.0, 2 * math.pi, allow_nan=False),
)


@st.composite
def product_states(draw, min_sites=2, max_sites=5):
    n = draw(st.integers(min_sites, max_sites))
    angles = draw(st.lists(angle_pairs, min_size=n, max_size=n))
    return make_product_state(LatticeSpec(n), angles)


@st.composite
def random_states(draw, min_sites=2, max_sites=4):
    n = draw(st.integers(min_sites, max_sites))
    dim = 2**n
    res = draw(
        st.lists(st.floats(-1, 1, allow_nan=False), min_size=2 * dim, max_size=2 * dim)
    )
    amps = np.array(res[:dim]) + 1j * np.array(res[dim:])
    norm = np.linalg.norm(amps)
    if norm < 1e-6:
        amps = np.zeros(dim, dtype=complex)
        amps[0] = 1.0
        norm = 1.0
    return StateVector(LatticeSpec(n), amps / norm)


@settings(max_examples=40, deadline=None)
@given(product_states())
def test_constructors_normalize(psi):
    assert abs(psi.norm_squared() - 1.0) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(random_states())
def test_variance_never_negative(psi):
    for axis in "xyz":
        assert additive_variance(AdditiveOperator.from_axis(psi.lattice, axis), psi) >= 0.0


@settings(max_examples=30, deadline=None)
@given(random_states())
def test_expectation_is_additive(psi):
    lat = psi.lattice
    for axis in "xz":
        total = sum(expectation(pauli(lat, x, axis), psi) for x in lat.sites)
        whole = expectation(AdditiveOperator.from_axis(lat, axis), psi)
        assert abs(whole - total) <= 1e-10


@settings(max_examples=25, deadline=None)
@given(random_states(min_sites=2, max_sites=4))
def test_normalized_correlation_obeys_cauchy_schwarz(psi):
    n = psi.n_sites
    for x in range(n):
        for y in range(x + 1, n):
            assert normalized_correlation(psi, x, y) <= 1 + 1e-9


@settings(max_examples=25, deadline=None)
@given(random_states(min_sites=2, max_sites=4))
def test_axis_variances_never_beat_maximum(psi):
    rep = max_additive_fluctuation(psi)
    for axis in "xyz":
        var = additive_variance(AdditiveOperator.from_axis(psi.lattice, axis), psi)
        assert var <= rep.max_variance + 1e-8


@settings(max_examples=20, deadline=None)
@given(random_states(min_sites=3, max_sites=4))
def test_total_probability_identity(psi):
    lat = psi.lattice
    table = conditional_distribution(psi, pauli(lat, 0, "z"), pauli(lat, lat.n_sites - 1, "x"))
    for jb in range(2):
        recombined = sum(
            table.p_a[ia] * table.p_b_given_a[ia, jb]
            for ia in range(2)
            if table.p_a[ia] > 1e-12
        )
        assert abs(recombined - table.p_b[jb]) <= 1e-10

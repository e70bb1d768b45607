"""Ideal local projective measurements and measurement-stability tests.

The stability test compares, for well-separated site pairs (x, y), the
conditional outcome distribution P(b; a) of measuring b right after an
ideal local measurement at x returned a, against the undisturbed P(b).
Only conditioning outcomes with P(a) above a floor count.  The deviation
is maximized over observable directions with a fixed 26-point direction
grid (the nonzero points of {-1,0,1}^3, normalized; grid version v1)
refined by a deterministic Nelder-Mead local search, so the reported
maximum is a reproducible lower bound on the true supremum.

Mixed states enter as explicit convex mixtures of pure states; their
outcome distributions are probability-weighted averages per the
projection postulate.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .analyzer import max_additive_fluctuation
from .errors import ArgumentError, NumericalError
from .operators import LocalOperator, PAULI_MATRICES, apply_local
from .states import StateVector

OUTCOME_FLOOR = 1e-12
DEFAULT_CONDITIONING_FLOOR = 0.05
GRID_VERSION = "v1"
_REFINE_TOL = 1e-6

_I2 = np.eye(2, dtype=np.complex128)


def direction_grid():
    """26 unit vectors: nonzero points of {-1,0,1}^3 in lexicographic order."""
    dirs = []
    for i in (-1, 0, 1):
        for j in (-1, 0, 1):
            for k in (-1, 0, 1):
                if (i, j, k) == (0, 0, 0):
                    continue
                v = np.array([i, j, k], dtype=np.float64)
                dirs.append(v / np.linalg.norm(v))
    return np.array(dirs)


_GRID = direction_grid()


def _direction_matrix(n_vec):
    return (
        n_vec[0] * PAULI_MATRICES["x"]
        + n_vec[1] * PAULI_MATRICES["y"]
        + n_vec[2] * PAULI_MATRICES["z"]
    )


def _angles_to_direction(theta, phi):
    st = math.sin(theta)
    return np.array([st * math.cos(phi), st * math.sin(phi), math.cos(theta)])


def _direction_to_angles(n_vec):
    theta = math.acos(min(1.0, max(-1.0, n_vec[2])))
    phi = math.atan2(n_vec[1], n_vec[0])
    return theta, phi


@dataclass(frozen=True)
class StateMixture:
    """Convex mixture of pure states on one lattice."""

    components: tuple  # ((weight, StateVector), ...)

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ArgumentError("mixture needs at least one component")
        lattice = comps[0][1].lattice
        total = 0.0
        for w, psi in comps:
            if not isinstance(psi, StateVector):
                raise ArgumentError("mixture components must be StateVectors")
            if psi.lattice.n_sites != lattice.n_sites:
                raise ArgumentError("mixture components live on different lattices")
            if w < 0:
                raise ArgumentError("mixture weights must be non-negative")
            psi.require_normalized()
            total += w
        if abs(total - 1.0) > 1e-10:
            raise ArgumentError(f"mixture weights must sum to 1, got {total!r}")
        object.__setattr__(self, "components", comps)

    @property
    def lattice(self):
        return self.components[0][1].lattice

    @property
    def n_sites(self):
        return self.lattice.n_sites


def _as_components(state):
    if isinstance(state, StateVector):
        state.require_normalized()
        return ((1.0, state),)
    if isinstance(state, StateMixture):
        return state.components
    raise ArgumentError("state must be a StateVector or StateMixture")


@dataclass(frozen=True)
class MeasurementOutcome:
    """Probabilities and post-measurement states of one local measurement."""

    observable: LocalOperator
    eigenvalues: tuple     # (a_plus, a_minus), descending
    probabilities: dict    # eigenvalue -> P(a)
    post_states: dict      # eigenvalue -> StateVector, only for P(a) >= floor


def _eigendecompose_observable(obs):
    evals, evecs = np.linalg.eigh(obs.matrix)
    scale = max(1.0, float(np.max(np.abs(evals))))
    if abs(evals[1] - evals[0]) <= 1e-12 * scale:
        raise ArgumentError(
            "observable is degenerate (proportional to the identity); "
            "its measurement reveals nothing"
        )
    # descending order: a_plus first
    order = [1, 0]
    vals = tuple(float(evals[i]) for i in order)
    projs = tuple(np.outer(evecs[:, i], evecs[:, i].conj()) for i in order)
    return vals, projs


def measure_local(psi, obs):
    """Ideal projective measurement of a local observable on a pure state."""
    psi.require_normalized()
    psi.lattice.validate_site(obs.site)
    vals, projs = _eigendecompose_observable(obs)
    probabilities = {}
    post_states = {}
    for a, proj in zip(vals, projs):
        branch = apply_local(LocalOperator(obs.site, proj), psi)
        p = branch.norm_squared()
        probabilities[a] = p
        if p >= OUTCOME_FLOOR:
            post_states[a] = StateVector(
                psi.lattice, branch.amplitudes / math.sqrt(p), _take=True
            )
    total = sum(probabilities.values())
    if abs(total - 1.0) > 1e-10:
        raise NumericalError(f"outcome probabilities sum to {total!r}")
    return MeasurementOutcome(obs, vals, probabilities, post_states)


@dataclass(frozen=True)
class ConditionalTable:
    """P(b; a) versus P(b) for one ordered pair of local observables."""

    a_values: tuple
    b_values: tuple
    p_a: np.ndarray          # (2,)
    p_b: np.ndarray          # (2,)
    p_b_given_a: np.ndarray  # (2, 2), rows follow a_values; NaN when P(a) = 0
    joint: np.ndarray        # (2, 2) P(a and b)


def conditional_distribution(state, a_obs, b_obs):
    """Conditional and marginal distributions for measurements at two sites.

    Computed through the projection postulate: the conditional row for
    outcome a uses the post-measurement state of that outcome, with no
    evolution between the two measurements.
    """
    if a_obs.site == b_obs.site:
        raise ArgumentError("conditional distribution needs two distinct sites")
    components = _as_components(state)
    a_vals, _ = _eigendecompose_observable(a_obs)
    b_vals, _ = _eigendecompose_observable(b_obs)
    joint = np.zeros((2, 2))
    p_a = np.zeros(2)
    p_b = np.zeros(2)
    for weight, psi in components:
        out_a = measure_local(psi, a_obs)
        out_b = measure_local(psi, b_obs)
        for jb, b in enumerate(b_vals):
            p_b[jb] += weight * out_b.probabilities[b]
        for ia, a in enumerate(a_vals):
            pa = out_a.probabilities[a]
            p_a[ia] += weight * pa
            if a in out_a.post_states:
                cond = measure_local(out_a.post_states[a], b_obs)
                for jb, b in enumerate(b_vals):
                    joint[ia, jb] += weight * pa * cond.probabilities[b]
    with np.errstate(invalid="ignore", divide="ignore"):
        p_b_given_a = joint / p_a[:, None]
    for ia in range(2):
        if p_a[ia] < OUTCOME_FLOOR:
            p_b_given_a[ia, :] = np.nan
        elif abs(p_b_given_a[ia].sum() - 1.0) > 1e-10:
            raise NumericalError(
                f"conditional row sums to {p_b_given_a[ia].sum()!r}"
            )
    if abs(p_a.sum() - 1.0) > 1e-10 or abs(p_b.sum() - 1.0) > 1e-10:
        raise NumericalError("marginal distributions do not sum to 1")
    return ConditionalTable(a_vals, b_vals, p_a, p_b, p_b_given_a, joint)


# ---------------------------------------------------------------------------
# Reduced density matrices (fast path for the direction sweep)
# ---------------------------------------------------------------------------


def single_site_rdm(state, x):
    """2x2 reduced density matrix of site x."""
    components = _as_components(state)
    lattice = components[0][1].lattice
    lattice.validate_site(x)
    rdm = np.zeros((2, 2), dtype=np.complex128)
    for w, psi in components:
        block = psi.amplitudes.reshape(-1, 2, 1 << x)
        rdm += w * np.einsum("aic,akc->ik", block, block.conj())
    return rdm


def two_site_rdm(state, x, y):
    """4x4 reduced density matrix of sites x < y, row index = 2*bit_y + bit_x."""
    if x == y:
        raise ArgumentError("two-site density matrix needs distinct sites")
    if x > y:
        raise ArgumentError("two_site_rdm expects x < y")
    components = _as_components(state)
    lattice = components[0][1].lattice
    lattice.validate_site(x)
    lattice.validate_site(y)
    n = lattice.n_sites
    hi = 1 << (n - 1 - y)
    mid = 1 << (y - x - 1)
    lo = 1 << x
    rdm = np.zeros((4, 4), dtype=np.complex128)
    for w, psi in components:
        block = psi.amplitudes.reshape(hi, 2, mid, 2, lo)
        rdm += w * np.einsum("ajbic,albkc->jilk", block, block.conj()).reshape(4, 4)
    return rdm


def _pair_deviation(rdm4, rho_first, rho_second, first_holds_a, n_a, n_b, floor):
    """Max |P(b;a) - P(b)| over outcome pairs with P(a) >= floor.

    ``rdm4`` is ordered with the lower site on the low bit; ``first_holds_a``
    says whether the a-observable sits on that lower site.
    """
    proj_a = (_I2 + _direction_matrix(n_a)) / 2.0
    proj_b = (_I2 + _direction_matrix(n_b)) / 2.0
    best = (0.0, 1.0, 1.0, 0.0, 0.0)  # deviation, a, b, p_b_given_a, p_b
    for a_sign in (1.0, -1.0):
        pa_mat = proj_a if a_sign > 0 else _I2 - proj_a
        rho_a = rho_first if first_holds_a else rho_second
        p_a = float(np.trace(rho_a @ pa_mat).real)
        if p_a < floor:
            continue
        for b_sign in (1.0, -1.0):
            pb_mat = proj_b if b_sign > 0 else _I2 - proj_b
            rho_b = rho_second if first_holds_a else rho_first
            p_b = float(np.trace(rho_b @ pb_mat).real)
            if first_holds_a:
                pair_op = np.kron(pb_mat, pa_mat)
            else:
                pair_op = np.kron(pa_mat, pb_mat)
            p_ab = float(np.trace(rdm4 @ pair_op).real)
            dev = abs(p_ab / p_a - p_b)
            if dev > best[0]:
                best = (dev, a_sign, b_sign, p_ab / p_a, p_b)
    return best


@dataclass(frozen=True)
class PairStabilityRecord:
    """Worst conditional-versus-marginal deviation found for one site pair.

    ``x`` is where the conditioning observable acts and ``y`` where the
    probed one does; both orderings of each site pair are searched because
    the deviation divides by P(a).
    """

    x: int
    y: int
    distance: int
    direction_a: tuple
    direction_b: tuple
    a: float
    b: float
    p_b_given_a: float
    p_b: float
    deviation: float


@dataclass(frozen=True)
class MeasurementStabilityReport:
    epsilon: float
    varepsilon: float
    min_distance: int
    pairs: tuple                    # PairStabilityRecord per admissible pair
    max_deviation_at_distance: dict
    max_deviation: float
    stable: bool
    grid_version: str = GRID_VERSION


def stability_test(state, epsilon, varepsilon=DEFAULT_CONDITIONING_FLOOR, min_distance=None):
    """Sweep distant site pairs for measurement-induced disturbance.

    Verdict: stable iff the worst deviation at the largest admissible
    separation stays within ``epsilon``.  ``varepsilon`` is the floor on
    the conditioning probability P(a).
    """
    if not 0.0 < epsilon < 1.0:
        raise ArgumentError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if not 0.0 < varepsilon < 1.0:
        raise ArgumentError(f"varepsilon must lie in (0, 1), got {varepsilon!r}")
    components = _as_components(state)
    n = components[0][1].n_sites
    if min_distance is None:
        min_distance = max(1, n // 2)
    if not 1 <= min_distance < n:
        raise ArgumentError(
            f"min_distance must lie in [1, {n - 1}], got {min_distance}"
        )
    site_rdms = {x: single_site_rdm(state, x) for x in range(n)}
    records = []
    for x in range(n):
        for y in range(x + 1, n):
            if y - x < min_distance:
                continue
            rdm4 = two_site_rdm(state, x, y)
            records.append(
                _best_pair_record(state, rdm4, site_rdms[x], site_rdms[y], x, y, varepsilon)
            )
    if not records:
        raise ArgumentError("no site pair satisfies the distance cut")
    by_distance = {}
    for rec in records:
        by_distance[rec.distance] = max(by_distance.get(rec.distance, 0.0), rec.deviation)
    d_max = max(by_distance)
    max_dev = max(r.deviation for r in records)
    stable = by_distance[d_max] <= epsilon
    return MeasurementStabilityReport(
        float(epsilon),
        float(varepsilon),
        int(min_distance),
        tuple(records),
        by_distance,
        max_dev,
        stable,
    )


def _best_pair_record(state, rdm4, rho_x, rho_y, x, y, floor):
    def evaluate(n_a, n_b, a_at_low):
        return _pair_deviation(rdm4, rho_x, rho_y, a_at_low, n_a, n_b, floor)

    best_val = -1.0
    best = None
    for a_at_low in (True, False):
        for n_a in _GRID:
            for n_b in _GRID:
                dev, a, b, pba, pb = evaluate(n_a, n_b, a_at_low)
                if dev > best_val:
                    best_val = dev
                    best = (a_at_low, n_a, n_b, a, b, pba, pb)
    a_at_low, n_a, n_b, a, b, pba, pb = best

    def objective(angles):
        da = _angles_to_direction(angles[0], angles[1])
        db = _angles_to_direction(angles[2], angles[3])
        return -evaluate(da, db, a_at_low)[0]

    start = np.array([*_direction_to_angles(n_a), *_direction_to_angles(n_b)])
    res = minimize(
        objective,
        start,
        method="Nelder-Mead",
        options={"xatol": _REFINE_TOL, "fatol": _REFINE_TOL**2, "maxiter": 400},
    )
    if -res.fun > best_val:
        n_a = _angles_to_direction(res.x[0], res.x[1])
        n_b = _angles_to_direction(res.x[2], res.x[3])
        dev, a, b, pba, pb = evaluate(n_a, n_b, a_at_low)
    else:
        dev = best_val
    a_site, b_site = (x, y) if a_at_low else (y, x)
    return PairStabilityRecord(
        a_site, b_site, abs(y - x),
        tuple(float(v) for v in n_a), tuple(float(v) for v in n_b),
        float(a), float(b), float(pba), float(pb), float(dev),
    )


# ---------------------------------------------------------------------------
# Repeated local measurements (symmetry-breaking cascade)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CascadeStep:
    site: int
    outcome: float
    probability: float
    max_variance: float
    is_nfs: bool


@dataclass(frozen=True)
class CascadeResult:
    steps: tuple
    reached_nfs: bool
    final_state: StateVector


def measurement_cascade(psi, axis="z", nfs_factor=3.0, max_measurements=None):
    """Measure one site after another until fluctuations look normal.

    Deterministic outcome policy: take the more probable branch (ties go
    to the larger eigenvalue).  A state counts as NFS here once its
    maximal additive fluctuation drops to ``nfs_factor * N``, an O(N)
    proxy consistent with every product-like exemplar.
    """
    psi.require_normalized()
    n = psi.n_sites
    if max_measurements is None:
        max_measurements = n
    threshold = nfs_factor * n
    steps = []
    current = psi
    reached = max_additive_fluctuation(current).max_variance <= threshold
    for site in range(min(n, max_measurements)):
        if reached:
            break
        obs = LocalOperator(site, PAULI_MATRICES[axis])
        out = measure_local(current, obs)
        a_plus, a_minus = out.eigenvalues
        p_plus = out.probabilities[a_plus]
        p_minus = out.probabilities[a_minus]
        outcome = a_plus if p_plus >= p_minus - 1e-12 else a_minus
        current = out.post_states[outcome]
        fluct = max_additive_fluctuation(current).max_variance
        reached = fluct <= threshold
        steps.append(CascadeStep(site, float(outcome), float(out.probabilities[outcome]), float(fluct), reached))
    return CascadeResult(tuple(steps), reached, current)

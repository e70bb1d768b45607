"""Experiment pipelines behind the command-line front end.

Every runner validates its inputs before any computation starts, returns
plain-dict results whose verdicts are recomputable from the raw numbers
included next to them, and leaves all randomness keyed by the scenario
seed.
"""

import time

import numpy as np

from . import __version__
from .analyzer import classify_scaling, max_additive_fluctuation
from .catalog import build_state, correspondence_catalog
from .cluster import cluster_verdict, omega
from .errors import ValidationError
from .evolve import MIN_TRAJECTORIES, TrajectoryEnsemble, evolve_noisy, stability_dt_bound
from .ground import WHICH_LOWEST_TWO, ground_state, pure_phase_vacuum
from .hamiltonian import HamiltonianSpec, build_hamiltonian
from .lattice import LatticeSpec
from .measure import measurement_cascade, stability_test
from .noise import NoiseModel
from .operators import AdditiveOperator, expectation
from .rates import analytic_dephasing_rate, fit_gamma_scaling, trajectory_rate
from .report import build_report, write_experiment_csvs, write_structured
from .stateio import export_state, import_state
from . import _kernels


def _noise_from_params(p):
    xi = p.xi if p.kernel == "exponential" else None
    return NoiseModel(kappa=p.kappa, kernel=p.kernel, axis=p.axis, xi=xi)


def _state_entries(scenario):
    """Resolve the scenario's state source into (label, {n: state}) entries."""
    src = scenario.state
    if src is None:
        raise ValidationError("this experiment set needs a state source")
    p = scenario.params
    if src.file is not None:
        psi = import_state(src.file, geometry=p.geometry)
        if tuple(scenario.sizes) != (psi.n_sites,):
            raise ValidationError(
                f"state file holds n_sites={psi.n_sites} but scenario sizes are "
                f"{list(scenario.sizes)}"
            )
        return [("file", {psi.n_sites: psi})]
    if src.family == "catalog":
        entries = []
        for label, family, params in correspondence_catalog():
            entries.append(
                (label, {n: build_state(family, n, p.geometry, params) for n in scenario.sizes})
            )
        return entries
    return [
        (
            src.family,
            {n: build_state(src.family, n, p.geometry, src.params) for n in scenario.sizes},
        )
    ]


def _single_entry(scenario, experiment):
    entries = _state_entries(scenario)
    if len(entries) != 1:
        raise ValidationError(f"experiment {experiment!r} needs a single state family")
    return entries[0]


def run_classify(scenario):
    if len(scenario.sizes) < 3:
        raise ValidationError("classify needs at least 3 sizes for the scaling fit")
    label, states = _single_entry(scenario, "classify")
    per_size = []
    points = []
    for n in scenario.sizes:
        rep = max_additive_fluctuation(states[n])
        per_size.append(
            {
                "n": n,
                "max_variance": rep.max_variance,
                "lambda_max": rep.lambda_max,
                "coefficient_normalization": "sum c^2 = N",
            }
        )
        points.append((n, rep.max_variance))
    verdict = classify_scaling(points)
    results = {
        "state": label,
        "per_size": per_size,
        "scaling": {
            "exponent": verdict.exponent,
            "intercept": verdict.intercept,
            "residual": verdict.residual,
            "points": [list(p) for p in verdict.points],
        },
    }
    return {"classify": results}, {"classification": verdict.verdict}


def run_cluster(scenario, include_rho=True):
    per_state = []
    verdicts = {}
    for label, states in _state_entries(scenario):
        per_size = []
        points = []
        for n in scenario.sizes:
            rep = omega(states[n], scenario.params.epsilon)
            row = {
                "n": n,
                "epsilon": rep.epsilon,
                "omega": rep.omega,
                "omega_of_x": [int(v) for v in rep.omega_of_x],
            }
            if include_rho:
                row["rho"] = [[float(v) for v in r] for r in rep.field.rho]
            per_size.append(row)
            points.append((n, rep.omega))
        entry = {"label": label, "per_size": per_size}
        if len(scenario.sizes) >= 3:
            cv = cluster_verdict(points)
            entry["verdict"] = {
                "has_cluster_property": cv.has_cluster_property,
                "tail_constant": cv.tail_constant,
                "tail_small": cv.tail_small,
                "points": [list(p) for p in cv.points],
            }
            verdicts[f"cluster/{label}"] = cv.has_cluster_property
        per_state.append(entry)
    return {"cluster": {"per_state": per_state}}, verdicts


def run_measure(scenario):
    p = scenario.params
    per_state = []
    verdicts = {}
    for label, states in _state_entries(scenario):
        per_size = []
        for n in scenario.sizes:
            rep = stability_test(
                states[n], p.epsilon, p.varepsilon,
                p.min_distance if p.min_distance is not None else max(1, n // 2),
            )
            per_size.append(
                {
                    "n": n,
                    "epsilon": rep.epsilon,
                    "varepsilon": rep.varepsilon,
                    "min_distance": rep.min_distance,
                    "max_deviation": rep.max_deviation,
                    "max_deviation_at_distance": {
                        str(d): v for d, v in sorted(rep.max_deviation_at_distance.items())
                    },
                    "stable": rep.stable,
                    "grid_version": rep.grid_version,
                    "pairs": [
                        {
                            "x": r.x,
                            "y": r.y,
                            "distance": r.distance,
                            "direction_a": list(r.direction_a),
                            "direction_b": list(r.direction_b),
                            "a": r.a,
                            "b": r.b,
                            "p_b_given_a": r.p_b_given_a,
                            "p_b": r.p_b,
                            "deviation": r.deviation,
                        }
                        for r in rep.pairs
                    ],
                }
            )
        stable_at_largest = per_size[-1]["stable"]
        per_state.append({"label": label, "per_size": per_size, "stable": stable_at_largest})
        verdicts[f"measurement-stable/{label}"] = stable_at_largest
    return {"measure": {"per_state": per_state}}, verdicts


def _auto_ensemble(p, noise, lattice, gamma_hint):
    horizon = p.horizon
    if horizon is None:
        horizon = 0.5 / gamma_hint if gamma_hint > 1e-12 else 1.0
    bound = stability_dt_bound(noise, lattice)
    dt = p.dt
    if dt is None:
        dt = min(horizon / 400.0, 0.5 * bound) if np.isfinite(bound) else horizon / 400.0
    return TrajectoryEnsemble(n_traj=p.n_traj, dt=dt, horizon=horizon, seed=p.seed)


def run_decohere(scenario):
    p = scenario.params
    if p.kappa <= 0:
        raise ValidationError("decohere needs kappa > 0")
    if len(scenario.sizes) < 3:
        raise ValidationError("decohere needs at least 3 sizes for the scaling fit")
    if p.n_traj != 0 and p.n_traj < MIN_TRAJECTORIES:
        raise ValidationError(
            f"n_traj must be 0 (analytic only) or >= {MIN_TRAJECTORIES}, got {p.n_traj}"
        )
    label, states = _single_entry(scenario, "decohere")
    noise = _noise_from_params(p)
    if p.dt is not None and p.n_traj > 0:
        # validate the step bound for every size before any computation
        for n in scenario.sizes:
            bound = stability_dt_bound(noise, LatticeSpec(n, p.geometry))
            if p.dt > bound:
                raise ValidationError(
                    f"dt={p.dt} violates the stability bound {bound} at n={n}"
                )
    per_size = []
    analytic_points = []
    traj_points = []
    for n in scenario.sizes:
        psi = states[n]
        gamma_a = analytic_dephasing_rate(psi, noise)
        row = {"n": n, "gamma_analytic": gamma_a}
        if p.n_traj > 0:
            ens = _auto_ensemble(p, noise, psi.lattice, gamma_a)
            res = evolve_noisy(psi, noise, ens)
            fit = trajectory_rate(res)
            row.update(
                {
                    "gamma_trajectory": fit.gamma,
                    "gamma_trajectory_stderr": fit.stderr,
                    "rate_window": fit.window,
                    "n_traj": res.n_traj,
                    "dt": res.dt,
                    "fidelity": {
                        "times": [float(t) for t in res.times],
                        "f_mean": [float(v) for v in res.f_mean],
                        "f_stderr": [float(v) for v in res.f_stderr],
                    },
                }
            )
            traj_points.append((n, fit.gamma))
        per_size.append(row)
        analytic_points.append((n, gamma_a))
    results = {"state": label, "kernel": p.kernel, "axis": p.axis, "kappa": p.kappa, "per_size": per_size}
    verdicts = {}

    def _fit_block(points):
        fit = fit_gamma_scaling(points)
        return {
            "prefactor": fit.prefactor,
            "one_plus_delta": fit.one_plus_delta,
            "residual": fit.residual,
            "fragile": fit.fragile,
            "points": [list(q) for q in fit.points],
        }

    if all(g > 0 for _, g in analytic_points):
        results["fit_analytic"] = _fit_block(analytic_points)
        verdicts["fragile/analytic"] = results["fit_analytic"]["fragile"]
    if traj_points and all(g > 0 for _, g in traj_points):
        results["fit_trajectory"] = _fit_block(traj_points)
        verdicts["fragile/trajectory"] = results["fit_trajectory"]["fragile"]
    verdicts["fragile"] = verdicts.get("fragile/trajectory", verdicts.get("fragile/analytic"))
    return {"decohere": results}, verdicts


def run_symmetry_breaking(scenario):
    p = scenario.params
    if p.model != "transverse-ising":
        raise ValidationError("symmetry-breaking scenario is defined for the transverse-ising model")
    if p.B != 0.0:
        raise ValidationError("symmetry-breaking scenario needs B = 0 for the symmetric ground state")
    noise = NoiseModel(kappa=p.kappa, kernel="collective", axis="z")
    per_size = []
    paramagnetic = not (abs(p.h) < abs(p.J))
    for n in scenario.sizes:
        lattice = LatticeSpec(n, p.geometry)
        spec = HamiltonianSpec("transverse-ising", lattice, J=p.J, h=p.h)
        ham = build_hamiltonian(spec)
        res = ground_state(ham, WHICH_LOWEST_TWO)
        sym = res.states[0]
        m_op = AdditiveOperator.from_axis(lattice, "z")
        pp = pure_phase_vacuum(spec, p.method)
        cascade = measurement_cascade(sym, nfs_factor=p.nfs_factor)
        per_size.append(
            {
                "n": n,
                "e_symmetric": res.energies[0],
                "e_pure_phase": pp.energy,
                "m_symmetric": expectation(m_op, sym),
                "m_pure_phase": pp.magnetization,
                "fluct_symmetric": max_additive_fluctuation(sym).max_variance,
                "fluct_pure_phase": max_additive_fluctuation(pp.state).max_variance,
                "gamma_symmetric": analytic_dephasing_rate(sym, noise),
                "gamma_pure_phase": analytic_dephasing_rate(pp.state, noise),
                "cascade_measurements": len(cascade.steps),
                "cascade_reached_nfs": cascade.reached_nfs,
                "cascade": [
                    {
                        "site": s.site,
                        "outcome": s.outcome,
                        "probability": s.probability,
                        "max_variance": s.max_variance,
                        "is_nfs": s.is_nfs,
                    }
                    for s in cascade.steps
                ],
            }
        )
    ratios = [r["gamma_symmetric"] / r["gamma_pure_phase"] for r in per_size if r["gamma_pure_phase"] > 0]
    verdicts = {
        "energy-ordering": all(r["e_symmetric"] <= r["e_pure_phase"] + 1e-10 for r in per_size),
        "rate-ratio-growing": all(b > a for a, b in zip(ratios, ratios[1:])) if len(ratios) > 1 else None,
        "cascade-max-measurements": max(r["cascade_measurements"] for r in per_size),
        "cascade-all-reached-nfs": all(r["cascade_reached_nfs"] for r in per_size),
    }
    results = {
        "J": p.J,
        "h": p.h,
        "kappa": p.kappa,
        "method": p.method,
        "paramagnetic_warning": paramagnetic,
        "per_size": per_size,
    }
    return {"symmetry-breaking": results}, verdicts


def run_ground(scenario, export_base=None):
    p = scenario.params
    per_size = []
    exported = []
    for n in scenario.sizes:
        lattice = LatticeSpec(n, p.geometry)
        spec = HamiltonianSpec(p.model, lattice, J=p.J, h=p.h, delta=p.delta, B=p.B)
        ham = build_hamiltonian(spec)
        res = ground_state(ham, WHICH_LOWEST_TWO)
        m_op = AdditiveOperator.from_axis(lattice, "z")
        per_size.append(
            {
                "n": n,
                "energies": list(res.energies),
                "residuals": list(res.residuals),
                "magnetization": expectation(m_op, res.states[0]),
                "max_fluctuation": max_additive_fluctuation(res.states[0]).max_variance,
            }
        )
        if export_base is not None:
            path = f"{export_base}_ground_N{n}.state"
            export_state(res.states[0], path)
            exported.append(path)
    results = {"model": p.model, "J": p.J, "h": p.h, "delta": p.delta, "B": p.B, "per_size": per_size}
    if exported:
        results["exported"] = exported
    return {"ground": results}, {}


def run_ground_report(scenario, export_base=None):
    """Assemble a full report for the ground-state subcommand."""
    start = time.monotonic()
    results, verdicts = run_ground(scenario, export_base=export_base)
    provenance = {
        "seed": scenario.params.seed,
        "version": __version__,
        "kernel_path": _kernels.kernel_path(),
        "wall_time_s": time.monotonic() - start,
    }
    return build_report(scenario.echo(), results, verdicts, provenance)


_RUNNERS = {
    "classify": run_classify,
    "cluster": run_cluster,
    "decohere": run_decohere,
    "measure": run_measure,
    "symmetry-breaking": run_symmetry_breaking,
}


def _correspondence_rows(results):
    cluster_by_label = {}
    for entry in results.get("cluster", {}).get("per_state", []):
        if "verdict" in entry:
            cluster_by_label[entry["label"]] = entry["verdict"]["has_cluster_property"]
    rows = []
    for entry in results.get("measure", {}).get("per_state", []):
        label = entry["label"]
        if label not in cluster_by_label:
            continue
        has_cluster = cluster_by_label[label]
        stable = entry["stable"]
        rows.append(
            {"label": label, "cluster": has_cluster, "stable": stable, "match": has_cluster == stable}
        )
    return rows


def run_scenario(scenario, export_base=None):
    """Execute the scenario's experiment set and assemble one report."""
    start = time.monotonic()
    if scenario.state is not None and scenario.state.file is not None:
        _state_entries(scenario)  # validates file/size agreement before compute
    results = {}
    verdicts = {}
    for experiment in scenario.experiments:
        frag_results, frag_verdicts = _RUNNERS[experiment](scenario)
        results.update(frag_results)
        verdicts.update(frag_verdicts)
    if "cluster" in results and "measure" in results:
        rows = _correspondence_rows(results)
        if rows:
            results["correspondence"] = rows
            verdicts["cluster-equals-measurement-stability"] = all(r["match"] for r in rows)
    provenance = {
        "seed": scenario.params.seed,
        "version": __version__,
        "kernel_path": _kernels.kernel_path(),
        "wall_time_s": time.monotonic() - start,
    }
    return build_report(scenario.echo(), results, verdicts, provenance)


def write_report_files(report, scenario):
    """Emit the structured file and/or CSVs next to the scenario's output path."""
    written = []
    if scenario.output_path is None:
        return written
    if scenario.output_format in ("structured", "both"):
        written.append(write_structured(report, f"{scenario.output_path}.json"))
    if scenario.output_format in ("csv", "both"):
        written.extend(write_experiment_csvs(report, scenario.output_path))
    return [str(p) for p in written]

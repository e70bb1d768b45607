"""Declarative scenario files: schema, strict validation, defaults.

A scenario is a JSON object; unknown keys are rejected everywhere so a
typo can never silently change physics parameters.

    {
      "name": "ghz-fragility",
      "state": {"family": "ghz", "params": {}},        # or {"file": "..."}
      "sizes": [4, 6, 8],
      "experiments": ["classify", "decohere"],
      "params": {"kappa": 0.01, "kernel": "collective", "seed": 7},
      "output": {"path": "out/run", "format": "both"}
    }
"""

import json
from dataclasses import asdict, dataclass, field

from .catalog import FAMILY_NAMES
from .errors import FormatError, ValidationError
from .hamiltonian import MODELS, TRANSVERSE_ISING
from .lattice import GEOMETRIES, OPEN_CHAIN
from .noise import KERNELS

EXPERIMENTS = ("classify", "cluster", "decohere", "measure", "symmetry-breaking")
FORMATS = ("structured", "csv", "both")

_SCALING_EXPERIMENTS = ("classify", "decohere")
_STATEFUL_EXPERIMENTS = ("classify", "cluster", "decohere", "measure")


@dataclass(frozen=True)
class ScenarioParams:
    epsilon: float = 0.1
    varepsilon: float = 0.05
    min_distance: int = None
    kappa: float = 0.01
    kernel: str = "collective"
    axis: str = "z"
    xi: float = 2.0
    n_traj: int = 200
    dt: float = None
    horizon: float = None
    seed: int = 12345
    model: str = TRANSVERSE_ISING
    J: float = 1.0
    h: float = 0.1
    delta: float = 1.0
    B: float = 0.0
    method: str = "doublet-superposition"
    nfs_factor: float = 3.0
    geometry: str = OPEN_CHAIN


@dataclass(frozen=True)
class StateSource:
    family: str = None
    params: dict = field(default_factory=dict)
    file: str = None


@dataclass(frozen=True)
class Scenario:
    name: str
    sizes: tuple
    experiments: tuple
    state: StateSource = None
    params: ScenarioParams = ScenarioParams()
    output_path: str = None
    output_format: str = "both"

    def echo(self):
        """Plain-dict copy embedded into every report."""
        return {
            "name": self.name,
            "sizes": list(self.sizes),
            "experiments": list(self.experiments),
            "state": None
            if self.state is None
            else {
                "family": self.state.family,
                "params": dict(self.state.params),
                "file": self.state.file,
            },
            "params": asdict(self.params),
            "output": {"path": self.output_path, "format": self.output_format},
        }


def _require(cond, message):
    if not cond:
        raise ValidationError(message)


def _check_keys(obj, allowed, where):
    _require(isinstance(obj, dict), f"{where} must be an object")
    unknown = set(obj) - set(allowed)
    _require(not unknown, f"unknown key(s) {sorted(unknown)} in {where}")


def _typed(obj, key, types, where, default=None):
    if key not in obj or obj[key] is None:
        return default
    val = obj[key]
    _require(isinstance(val, types) and not isinstance(val, bool), f"{where}.{key} has the wrong type")
    return val


def validate_scenario(raw):
    """Turn a parsed JSON object into a Scenario, rejecting anything odd."""
    _check_keys(raw, ("name", "state", "sizes", "experiments", "params", "output"), "scenario")
    name = _typed(raw, "name", str, "scenario")
    _require(name, "scenario.name is required")

    _require("experiments" in raw, "scenario.experiments is required")
    experiments = raw["experiments"]
    _require(
        isinstance(experiments, list) and experiments, "scenario.experiments must be a non-empty list"
    )
    for e in experiments:
        _require(e in EXPERIMENTS, f"unknown experiment {e!r}; choose from {EXPERIMENTS}")
    _require(len(set(experiments)) == len(experiments), "duplicate experiments")

    _require("sizes" in raw, "scenario.sizes is required")
    sizes = raw["sizes"]
    _require(
        isinstance(sizes, list) and all(isinstance(n, int) and not isinstance(n, bool) for n in sizes),
        "scenario.sizes must be a list of integers",
    )
    _require(sizes == sorted(sizes) and len(set(sizes)) == len(sizes), "scenario.sizes must be strictly ascending")
    _require(len(sizes) >= 1, "scenario.sizes must not be empty")
    if any(e in _SCALING_EXPERIMENTS for e in experiments):
        _require(len(sizes) >= 3, "scaling experiments need at least 3 sizes")

    state = None
    if any(e in _STATEFUL_EXPERIMENTS for e in experiments):
        _require("state" in raw and raw["state"] is not None, "scenario.state is required for this experiment set")
    if raw.get("state") is not None:
        sobj = raw["state"]
        _check_keys(sobj, ("family", "params", "file"), "scenario.state")
        family = _typed(sobj, "family", str, "scenario.state")
        file_path = _typed(sobj, "file", str, "scenario.state")
        _require(
            (family is None) != (file_path is None),
            "scenario.state needs exactly one of 'family' or 'file'",
        )
        sparams = sobj.get("params") or {}
        _require(isinstance(sparams, dict), "scenario.state.params must be an object")
        if family is not None:
            _require(
                family in FAMILY_NAMES + ("catalog",),
                f"unknown state family {family!r}",
            )
        state = StateSource(family=family, params=dict(sparams), file=file_path)

    defaults = ScenarioParams()
    pobj = raw.get("params") or {}
    _check_keys(pobj, tuple(asdict(defaults)), "scenario.params")
    merged = dict(asdict(defaults))
    for key, val in pobj.items():
        if val is None:
            continue
        ref = getattr(defaults, key)
        if key in ("min_distance", "n_traj", "seed"):
            _require(isinstance(val, int) and not isinstance(val, bool), f"params.{key} must be an integer")
        elif key in ("kernel", "axis", "model", "method", "geometry"):
            _require(isinstance(val, str), f"params.{key} must be a string")
        else:
            _require(isinstance(val, (int, float)) and not isinstance(val, bool), f"params.{key} must be a number")
            val = float(val)
        merged[key] = val
    _require(merged["kernel"] in KERNELS, f"params.kernel must be one of {KERNELS}")
    _require(merged["axis"] in ("x", "y", "z"), "params.axis must be x, y or z")
    _require(merged["model"] in MODELS, f"params.model must be one of {MODELS}")
    _require(merged["geometry"] in GEOMETRIES, f"params.geometry must be one of {GEOMETRIES}")
    _require(merged["n_traj"] == 0 or merged["n_traj"] >= 100, "params.n_traj must be 0 (analytic only) or >= 100")
    _require(0 <= merged["seed"] < 2**64, "params.seed must fit in 64 bits")
    params = ScenarioParams(**merged)

    output_path = None
    output_format = "both"
    if raw.get("output") is not None:
        oobj = raw["output"]
        _check_keys(oobj, ("path", "format"), "scenario.output")
        output_path = _typed(oobj, "path", str, "scenario.output")
        output_format = _typed(oobj, "format", str, "scenario.output", "both")
        _require(output_format in FORMATS, f"output.format must be one of {FORMATS}")

    return Scenario(
        name=name,
        sizes=tuple(sizes),
        experiments=tuple(experiments),
        state=state,
        params=params,
        output_path=output_path,
        output_format=output_format,
    )


def load_scenario(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise FormatError(f"cannot read scenario file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"scenario file is not valid JSON: {exc}") from exc
    return validate_scenario(raw)

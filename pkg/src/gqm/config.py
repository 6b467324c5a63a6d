"""JSON analysis configs: parsing, validation and model construction.

A config has four sections::

    {
      "name": "qubit-xz",
      "model": {"kind": "qubit", "hamiltonian": {...}, "initial_state": {...}},
      "histories": {"times": [1, 2], "families": [{"basis": "x"}, {"basis": "z"}]},
      "analysis": {"criterion": "medium", "epsilon": 1e-6},
      "output": {"format": "json"}
    }

Lattice models replace ``histories`` with ``paths`` (``slices``, ``dt``,
``partition``). Complex numbers are written as ``[re, im]`` pairs; plain
reals are accepted wherever a complex entry is expected. Validation
collects every violation with the dotted path of the offending field.
"""

import json
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from .exceptions import ConfigError, GQMError
from .hilbert import (
    QUBIT_BASES,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DensityState,
    Hamiltonian,
    ProjectionFamily,
    Projector,
    qubit_family,
)
from .histories import CoarseGrainingMap, HistoryGrid
from .pathsum import (
    LatticeModel,
    hopping_hamiltonian,
    predicate_partition,
    region_partition,
)

MODEL_KINDS = ("qubit", "spin-pair", "lattice-particle")
FORMATS = ("json", "csv")
CRITERION_NAMES = ("medium", "weak", "lp", "linear-positivity")
FORMULATIONS = ("operator", "path-sum")


@dataclass(frozen=True)
class AnalysisConfig:
    """A validated config. ``raw`` is the parsed document, echoed in reports."""

    raw: dict
    kind: str
    dimension: int
    formulation: str
    criterion: str
    epsilon: float
    output_format: str
    output_path: Optional[str]

    @property
    def name(self):
        return self.raw.get("name", "analysis")

    def build(self):
        """Construct the analysis target.

        Returns ``("grid", HistoryGrid, map)`` for the operator formulation
        or ``("lattice", (LatticeModel, PathPartition), map)`` for path sums;
        ``map`` is the configured coarse graining or ``None``.
        """
        return _build(self)


def _complex(x):
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ValueError("complex entries must be [re, im]")
        return complex(float(x[0]), float(x[1]))
    return complex(float(x))


def parse_matrix(rows):
    return np.array([[_complex(x) for x in row] for row in rows], dtype=np.complex128)


def parse_vector(items):
    return np.array([_complex(x) for x in items], dtype=np.complex128)


class _Collector:
    def __init__(self):
        self.violations = []

    def add(self, path, message):
        self.violations.append((path, message))

    def require(self, obj, key, path, kind=dict):
        if not isinstance(obj, dict) or key not in obj:
            self.add(f"{path}.{key}".lstrip("."), "is required")
            return None
        value = obj[key]
        if kind is not None and not isinstance(value, kind):
            self.add(f"{path}.{key}".lstrip("."), f"must be a JSON {_kind_name(kind)}")
            return None
        return value


def _kind_name(kind):
    if isinstance(kind, tuple):
        return " or ".join(k.__name__ for k in kind)
    return {"dict": "object", "list": "array", "str": "string"}.get(kind.__name__, kind.__name__)


def load_config(text):
    """Parse and validate a JSON config document.

    Raises :class:`ConfigError` listing every violation found.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            [("", f"JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}")]
        ) from exc
    return validate_config(doc)


def validate_config(doc):
    c = _Collector()
    if not isinstance(doc, dict):
        raise ConfigError([("", "config must be a JSON object")])
    model = c.require(doc, "model", "")
    analysis = c.require(doc, "analysis", "")
    output = doc.get("output", {})
    if not isinstance(output, dict):
        c.add("output", "must be a JSON object")
        output = {}

    kind = None
    if model is not None:
        kind = c.require(model, "kind", "model", str)
        if kind is not None and kind not in MODEL_KINDS:
            c.add("model.kind", f"unknown model kind {kind!r}; expected one of {list(MODEL_KINDS)}")
            kind = None

    criterion, epsilon, formulation = "medium", 1e-8, None
    if analysis is not None:
        criterion = analysis.get("criterion", "medium")
        if criterion not in CRITERION_NAMES:
            c.add("analysis.criterion", f"must be one of {list(CRITERION_NAMES)}")
        epsilon = analysis.get("epsilon", 1e-8)
        if isinstance(epsilon, bool) or not isinstance(epsilon, (int, float)):
            c.add("analysis.epsilon", "must be a number")
        elif not (np.isfinite(epsilon) and epsilon > 0):
            c.add("analysis.epsilon", "must be > 0")
        formulation = analysis.get("formulation")
        if formulation is not None and formulation not in FORMULATIONS:
            c.add("analysis.formulation", f"must be one of {list(FORMULATIONS)}")

    fmt = output.get("format", "json")
    if fmt not in FORMATS:
        c.add("output.format", f"must be one of {list(FORMATS)}")
    out_path = output.get("path")
    if out_path is not None and not isinstance(out_path, str):
        c.add("output.path", "must be a string")

    if c.violations or kind is None:
        raise ConfigError(c.violations or [("model.kind", "is required")])

    if formulation is None:
        formulation = "path-sum" if kind == "lattice-particle" else "operator"
    if formulation == "path-sum" and kind != "lattice-particle":
        c.add("analysis.formulation", "path-sum requires a lattice-particle model")
    cfg = AnalysisConfig(
        raw=doc,
        kind=kind,
        dimension=_dimension(kind, model, c),
        formulation=formulation,
        criterion=criterion,
        epsilon=float(epsilon),
        output_format=fmt,
        output_path=out_path,
    )
    if c.violations:
        raise ConfigError(c.violations)
    # Building surfaces every remaining structural problem with a path.
    try:
        _build(cfg)
    except ConfigError:
        raise
    except (GQMError, ValueError, IndexError, TypeError, KeyError) as exc:
        raise ConfigError([("", f"model construction failed: {exc}")]) from exc
    return cfg


def _dimension(kind, model, c):
    if kind == "qubit":
        return 2
    if kind == "spin-pair":
        return 4
    sites = model.get("sites")
    if isinstance(sites, bool) or not isinstance(sites, int) or sites < 1:
        c.add("model.sites", "must be a positive integer")
        return 1
    return sites


def _hamiltonian(spec, cfg, dt, path):
    d = cfg.dimension
    if spec is None:
        return Hamiltonian.zero(d)
    if not isinstance(spec, dict):
        raise ConfigError([(path, "must be an object")])
    kind = spec.get("type", "zero")
    if kind == "zero":
        return Hamiltonian.zero(d)
    if kind == "matrix":
        m = parse_matrix(spec["matrix"])
        if m.shape != (d, d):
            raise ConfigError([(f"{path}.matrix", f"shape {m.shape} does not match dimension {d}")])
        return Hamiltonian(m)
    if kind == "pauli" and cfg.kind == "qubit":
        return Hamiltonian(
            spec.get("x", 0) * SIGMA_X + spec.get("y", 0) * SIGMA_Y + spec.get("z", 0) * SIGMA_Z
        )
    if kind == "heisenberg" and cfg.kind == "spin-pair":
        j, h = spec.get("coupling", 1.0), spec.get("field", 0.0)
        eye = np.eye(2)
        m = j * sum(np.kron(s, s) for s in (SIGMA_X, SIGMA_Y, SIGMA_Z))
        m = m + h * (np.kron(SIGMA_Z, eye) + np.kron(eye, SIGMA_Z))
        return Hamiltonian(m)
    if kind == "hopping" and cfg.kind == "lattice-particle":
        return hopping_hamiltonian(
            d, spec.get("hopping", 1.0), spec.get("ring", True), spec.get("potential")
        )
    if kind == "balanced-hop" and cfg.kind == "lattice-particle":
        if d != 2:
            raise ConfigError([(f"{path}.type", "balanced-hop needs model.sites = 2")])
        return Hamiltonian(np.pi / (4 * dt) * SIGMA_X)
    raise ConfigError([(f"{path}.type", f"unsupported Hamiltonian type {kind!r} for {cfg.kind}")])


_QUBIT_KETS = {
    lab: QUBIT_BASES[axis][0][:, k]
    for axis in QUBIT_BASES
    for k, lab in enumerate(QUBIT_BASES[axis][1])
}


def _state(spec, cfg, path):
    d = cfg.dimension
    if not isinstance(spec, dict):
        raise ConfigError([(path, "is required and must be an object")])
    kind = spec.get("type")
    if kind == "ket":
        v = parse_vector(spec["ket"])
        if v.shape != (d,):
            raise ConfigError([(f"{path}.ket", f"length {v.size} does not match dimension {d}")])
        return DensityState.from_ket(v)
    if kind == "basis":
        i = spec.get("index", 0)
        if not isinstance(i, int) or not 0 <= i < d:
            raise ConfigError([(f"{path}.index", f"must be an integer in [0, {d})")])
        return DensityState.from_ket(np.eye(d)[i])
    if kind == "qubit" and cfg.kind == "qubit":
        label = spec.get("label")
        if label not in _QUBIT_KETS:
            raise ConfigError([(f"{path}.label", f"must be one of {list(_QUBIT_KETS)}")])
        return DensityState.from_ket(_QUBIT_KETS[label])
    if kind == "diagonal":
        w = np.asarray(spec["weights"], dtype=float)
        if w.shape != (d,):
            raise ConfigError([(f"{path}.weights", f"length {w.size} does not match dimension {d}")])
        return DensityState(np.diag(w))
    if kind == "maximally-mixed":
        return DensityState(np.eye(d) / d)
    if kind == "matrix":
        m = parse_matrix(spec["matrix"])
        if m.shape != (d, d):
            raise ConfigError([(f"{path}.matrix", f"shape {m.shape} does not match dimension {d}")])
        return DensityState(m)
    raise ConfigError([(f"{path}.type", f"unsupported initial state type {kind!r}")])


def _family(spec, cfg, path):
    d = cfg.dimension
    if not isinstance(spec, dict):
        raise ConfigError([(path, "must be an object")])
    if spec.get("trivial"):
        return ProjectionFamily.trivial(d)
    if "groups" in spec:
        eye = np.eye(d)
        groups = spec["groups"]
        labels = spec.get("labels") or ["".join(map(str, g)) for g in groups]
        return ProjectionFamily.from_basis(eye, labels, groups)
    if "projectors" in spec:
        mats = [parse_matrix(m) for m in spec["projectors"]]
        labels = spec.get("labels") or [str(k) for k in range(len(mats))]
        return ProjectionFamily(tuple(Projector(m, lab) for m, lab in zip(mats, labels)))
    basis = spec.get("basis")
    if cfg.kind == "qubit" and basis in QUBIT_BASES:
        return qubit_family(basis)
    if cfg.kind == "spin-pair" and basis in QUBIT_BASES:
        spin = spec.get("spin")
        single = qubit_family(basis)
        if spin is None:
            projectors = [
                Projector(np.kron(a.matrix, b.matrix), a.label + b.label)
                for a in single
                for b in single
            ]
            return ProjectionFamily(tuple(projectors))
        if spin not in (0, 1):
            raise ConfigError([(f"{path}.spin", "must be 0 or 1")])
        eye = np.eye(2)
        return ProjectionFamily(
            tuple(
                Projector(
                    np.kron(p.matrix, eye) if spin == 0 else np.kron(eye, p.matrix),
                    f"s{spin}:{p.label}",
                )
                for p in single
            )
        )
    if cfg.kind == "spin-pair" and basis == "bell":
        s = 1 / np.sqrt(2)
        vecs = {
            "phi+": [s, 0, 0, s], "phi-": [s, 0, 0, -s],
            "psi+": [0, s, s, 0], "psi-": [0, s, -s, 0],
        }
        return ProjectionFamily(tuple(Projector.onto(np.array(v), k) for k, v in vecs.items()))
    if basis == "computational":
        return ProjectionFamily.from_basis(np.eye(d))
    raise ConfigError([(path, f"cannot build a family from {spec!r} for {cfg.kind}")])


def _coarse_map(spec, labels, path):
    if spec is None:
        return None
    if not isinstance(spec, dict):
        raise ConfigError([(path, "must be an object")])
    if spec.get("all"):
        return CoarseGrainingMap.constant(labels)
    if "keep_slots" in spec:
        slots = spec["keep_slots"]
        width = len(labels[0]) if isinstance(labels[0], tuple) else 0
        bad = [s for s in slots if not isinstance(s, int) or not 0 <= s < width]
        if bad:
            raise ConfigError([(f"{path}.keep_slots", f"slots {bad} out of range [0, {width})")])
        return CoarseGrainingMap.marginal(labels, slots)
    raise ConfigError([(path, "expected 'keep_slots' or 'all'")])


def _hop_count(path):
    return sum(a != b for a, b in zip(path, path[1:]))


def _path_partition(spec, model, path):
    kind = spec.get("kind", "regions")
    if kind == "regions":
        regions = spec.get("regions", {})
        return region_partition(model, {int(k): v for k, v in regions.items()}), regions
    if kind == "hop-count":
        return predicate_partition(model, _hop_count), None
    if kind == "visits":
        site = spec.get("site", 0)
        return predicate_partition(model, lambda p: site in p), None
    raise ConfigError([(f"{path}.kind", f"unknown partition kind {kind!r}")])


def build_lattice(cfg):
    """The :class:`LatticeModel` of a lattice-particle config."""
    model = cfg.raw["model"]
    paths = cfg.raw.get("paths")
    if not isinstance(paths, dict):
        raise ConfigError([("paths", "is required for lattice-particle models")])
    slices = paths.get("slices")
    dt = paths.get("dt", 1.0)
    if isinstance(slices, bool) or not isinstance(slices, int) or slices < 0:
        raise ConfigError([("paths.slices", "must be a non-negative integer")])
    if isinstance(dt, bool) or not isinstance(dt, (int, float)) or not dt > 0:
        raise ConfigError([("paths.dt", "must be > 0")])
    h = _hamiltonian(model.get("hamiltonian"), cfg, dt, "model.hamiltonian")
    rho = _state(model.get("initial_state"), cfg, "model.initial_state")
    return LatticeModel(cfg.dimension, slices, dt, h, rho)


def _build(cfg):
    doc = cfg.raw
    model = doc["model"]
    if cfg.kind == "lattice-particle":
        lattice = build_lattice(cfg)
        paths = doc["paths"]
        part, regions = _path_partition(paths.get("partition", {}), lattice, "paths.partition")
        if cfg.formulation == "operator":
            if regions is None:
                raise ConfigError(
                    [("analysis.formulation", "operator formulation needs a regions partition")]
                )
            from .pathsum import region_grid

            grid = region_grid(lattice, {int(k): v for k, v in regions.items()})
            cg = _coarse_map(paths.get("coarse_graining"), list(part.labels), "paths.coarse_graining")
            return "grid", grid, cg
        cg = _coarse_map(paths.get("coarse_graining"), list(part.labels), "paths.coarse_graining")
        return "lattice", (lattice, part), cg

    hist = doc.get("histories")
    if not isinstance(hist, dict):
        raise ConfigError([("histories", f"is required for {cfg.kind} models")])
    times = hist.get("times")
    fams = hist.get("families")
    if not isinstance(times, list) or not times:
        raise ConfigError([("histories.times", "must be a non-empty array")])
    if not isinstance(fams, list) or len(fams) != len(times):
        raise ConfigError([("histories.families", "must be an array with one entry per time")])
    h = _hamiltonian(model.get("hamiltonian"), cfg, None, "model.hamiltonian")
    rho = _state(model.get("initial_state"), cfg, "model.initial_state")
    families = [_family(f, cfg, f"histories.families[{i}]") for i, f in enumerate(fams)]
    grid = HistoryGrid(times, families, h, rho)
    labels = [tuple(a) for a in np.ndindex(*grid.shape)]
    cg = _coarse_map(hist.get("coarse_graining"), labels, "histories.coarse_graining")
    return "grid", grid, cg


def region_sets_of(cfg: AnalysisConfig) -> Any:
    """The region partition of a lattice config, or ``None``."""
    if cfg.kind != "lattice-particle":
        return None
    spec = cfg.raw["paths"].get("partition", {})
    if spec.get("kind", "regions") != "regions":
        return None
    return {int(k): v for k, v in spec.get("regions", {}).items()}

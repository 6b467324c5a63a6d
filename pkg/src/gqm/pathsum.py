"""Sum-over-histories on a finite lattice.

Fine-grained histories are site sequences ``(q_0, ..., q_N)`` over ``N``
time steps of length ``dt``. A path's amplitude is the product of exact
short-time propagator elements ``K[q_{k+1}, q_k]`` with
``K = exp(-i H dt)``, whose phase plays the role of the discretized action.
Two paths contribute to ``D(a, b)`` only when their final sites agree, and
their initial sites are weighted by ``rho[q_0, q'_0]``.
"""

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .decoherence import decoherence_from_operators
from .exceptions import EnumerationSizeError, PartitionError
from .hilbert import (
    DensityState,
    Hamiltonian,
    ProjectionFamily,
    Projector,
    evolution_operator,
)
from .histories import HistoryGrid
from .validation import DEFAULT_TOLERANCES, frozen

MAX_PATHS = 10**6

_TOL = DEFAULT_TOLERANCES.structural_tol


@dataclass(frozen=True, eq=False)
class LatticeModel:
    """``sites`` lattice points, ``slice_count`` steps of length ``dt``."""

    sites: int
    slice_count: int
    dt: float
    hamiltonian: Hamiltonian
    initial_state: DensityState
    tol: float = field(default=_TOL, repr=False)

    def __post_init__(self):
        if int(self.sites) < 1:
            raise ValueError("sites must be >= 1")
        if int(self.slice_count) < 0:
            raise ValueError("slice_count must be >= 0")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be finite and > 0, got {self.dt!r}")
        for name, obj in (("hamiltonian", self.hamiltonian), ("initial_state", self.initial_state)):
            if obj.dimension != self.sites:
                raise ValueError(
                    f"{name} has dimension {obj.dimension}, expected {self.sites}"
                )
        object.__setattr__(self, "sites", int(self.sites))
        object.__setattr__(self, "slice_count", int(self.slice_count))
        object.__setattr__(self, "dt", float(self.dt))
        k = evolution_operator(self.hamiltonian, self.dt, self.tol)
        residual = float(np.max(np.abs(k.conj().T @ k - np.eye(self.sites))))
        if residual > self.tol:
            raise ValueError(f"propagator is not unitary (residual {residual:.3e})")
        object.__setattr__(self, "propagator", k)

    @property
    def n_paths(self):
        return self.sites ** (self.slice_count + 1)

    @classmethod
    def balanced_hop(cls, slice_count=1, dt=1.0, initial_site=0):
        """Two sites whose one-step propagator hops with probability 1/2."""
        h = Hamiltonian(np.pi / (4 * dt) * np.array([[0, 1], [1, 0]]))
        rho = np.zeros((2, 2))
        rho[initial_site, initial_site] = 1
        return cls(2, slice_count, dt, h, DensityState(rho))


def hopping_hamiltonian(sites, hopping=1.0, ring=True, potential=None):
    """Tight-binding ``H = -J sum_j (|j><j+1| + h.c.) + sum_j V_j |j><j|``."""
    h = np.zeros((sites, sites), dtype=np.complex128)
    bonds = sites if ring and sites > 2 else sites - 1
    for j in range(bonds):
        a, b = j, (j + 1) % sites
        h[a, b] -= hopping
        h[b, a] -= hopping
    if potential is not None:
        h += np.diag(np.asarray(potential, dtype=float))
    return Hamiltonian(h)


def check_path(m, path):
    path = tuple(int(q) for q in path)
    if len(path) != m.slice_count + 1:
        raise ValueError(
            f"path has {len(path)} sites, expected {m.slice_count + 1}"
        )
    for q in path:
        if not 0 <= q < m.sites:
            raise IndexError(f"site {q} out of range [0, {m.sites})")
    return path


def enumerate_paths(m):
    """Every fine path as rows of an int array, in lexicographic order."""
    if m.n_paths > MAX_PATHS:
        raise EnumerationSizeError(
            f"{m.sites}^{m.slice_count + 1} = {m.n_paths} paths exceeds the cap of {MAX_PATHS}",
            m.n_paths,
        )
    grids = np.indices((m.sites,) * (m.slice_count + 1)).reshape(m.slice_count + 1, -1)
    return frozen(grids.T)


def path_amplitude(m, path):
    """``prod_k K[q_{k+1}, q_k]``; the empty product is 1."""
    path = check_path(m, path)
    amp = 1.0 + 0j
    for a, b in zip(path, path[1:]):
        amp *= m.propagator[b, a]
    return complex(amp)


def path_amplitudes(m, paths=None):
    if paths is None:
        paths = enumerate_paths(m)
    amps = np.ones(len(paths), dtype=np.complex128)
    for k in range(m.slice_count):
        amps *= m.propagator[paths[:, k + 1], paths[:, k]]
    return amps


@dataclass(frozen=True, eq=False)
class PathPartition:
    """Exhaustive, exclusive classification of every fine path of a model.

    ``codes[i]`` is the position in ``labels`` of the class of the i-th path
    in lexicographic order.
    """

    classifier: Callable
    labels: tuple
    codes: np.ndarray

    def __len__(self):
        return len(self.labels)

    def class_sizes(self):
        return dict(zip(self.labels, np.bincount(self.codes, minlength=len(self.labels)).tolist()))

    def members(self, m, label):
        paths = enumerate_paths(m)
        k = self.labels.index(label)
        return [tuple(int(q) for q in p) for p in paths[self.codes == k]]


def _check_regions(m, slice_index, regions):
    if not 0 <= slice_index <= m.slice_count:
        raise PartitionError(
            f"slice {slice_index} outside [0, {m.slice_count}]"
        )
    owner = np.full(m.sites, -1)
    for r, region in enumerate(regions):
        if len(region) == 0:
            raise PartitionError(f"slice {slice_index}: region {r} is empty")
        for q in region:
            if not 0 <= q < m.sites:
                raise PartitionError(f"slice {slice_index}: site {q} out of range")
            if owner[q] >= 0:
                raise PartitionError(
                    f"slice {slice_index}: site {q} is in regions {owner[q]} and {r}"
                )
            owner[q] = r
    missing = np.flatnonzero(owner < 0).tolist()
    if missing:
        raise PartitionError(f"slice {slice_index}: sites {missing} are in no region")
    return owner


def normalize_regions(m, region_sets):
    """Validate ``{slice: [[sites], ...]}`` and return it sorted by slice."""
    out = {}
    for s, regions in sorted((int(k), v) for k, v in dict(region_sets).items()):
        _check_regions(m, s, regions)
        out[s] = tuple(tuple(int(q) for q in r) for r in regions)
    return out


def region_partition(m, region_sets):
    """Classes of paths by which region they occupy at each constrained slice.

    Labels are tuples of region indices, one per constrained slice in
    increasing slice order, enumerated lexicographically. Slices missing
    from ``region_sets`` are unconstrained.
    """
    regions = normalize_regions(m, region_sets)
    slices = list(regions)
    owners = [_check_regions(m, s, regions[s]) for s in slices]
    shape = [len(regions[s]) for s in slices]
    labels = tuple(itertools.product(*(range(n) for n in shape)))

    def classifier(path):
        path = check_path(m, path)
        return tuple(int(owner[path[s]]) for s, owner in zip(slices, owners))

    paths = enumerate_paths(m)
    codes = np.zeros(len(paths), dtype=np.int64)
    for s, owner, n in zip(slices, owners, shape):
        codes = codes * n + owner[paths[:, s]]
    return PathPartition(classifier, labels, frozen(codes))


def predicate_partition(m, labeler):
    """Partition by an arbitrary function of the whole path.

    Covers alternatives not tied to one time, such as "ever visits site 0".
    Labels appear in order of first occurrence over the lexicographic path
    enumeration.
    """
    paths = enumerate_paths(m)
    index = {}
    codes = np.empty(len(paths), dtype=np.int64)
    for i, row in enumerate(paths):
        lab = labeler(tuple(int(q) for q in row))
        codes[i] = index.setdefault(lab, len(index))
    return PathPartition(labeler, tuple(index), frozen(codes))


def merge_partition(part, cg):
    """Coarsen ``part`` by a :class:`CoarseGrainingMap` over its labels."""
    cells = cg.preimages(part.labels)
    bars = tuple(cells)
    remap = np.empty(len(part.labels), dtype=np.int64)
    for b, bar in enumerate(bars):
        remap[cells[bar]] = b
    return PathPartition(
        lambda path: cg(part.classifier(path)), bars, frozen(remap[part.codes])
    )


def class_kernels(m, part):
    """``W_a[f, i]``: summed amplitudes of class-``a`` paths from ``i`` to ``f``.

    Accumulated path by path in lexicographic order.
    """
    paths = enumerate_paths(m)
    amps = path_amplitudes(m, paths)
    w = np.zeros((len(part.labels), m.sites, m.sites), dtype=np.complex128)
    np.add.at(w, (part.codes, paths[:, -1], paths[:, 0]), amps)
    return w


def build_D_pathsum(m, part):
    """Decoherence matrix of the double path sum.

    ``D(a, b) = sum_{q in a} sum_{q' in b} [q_N = q'_N] A[q] conj(A[q']) rho[q_0, q'_0]``,
    evaluated by first summing amplitudes of each class between fixed
    endpoints, which regroups the double sum without approximation.
    """
    w = class_kernels(m, part)
    return decoherence_from_operators(
        w, m.initial_state.matrix, part.labels, "path-sum"
    )


def region_grid(m, region_sets):
    """The operator-formulation grid equivalent to a region partition.

    Constrained slice ``k`` becomes time ``k * dt`` with one projector per
    region. With no constrained slice the grid has the trivial family at
    time 0.
    """
    regions = normalize_regions(m, region_sets)
    eye = np.eye(m.sites)
    if not regions:
        return HistoryGrid(
            (0.0,), (ProjectionFamily.trivial(m.sites),), m.hamiltonian, m.initial_state
        )
    families = [
        ProjectionFamily(
            tuple(
                Projector(eye[:, list(r)] @ eye[:, list(r)].T, f"{s}:{j}")
                for j, r in enumerate(regs)
            )
        )
        for s, regs in regions.items()
    ]
    times = [s * m.dt for s in regions]
    return HistoryGrid(times, families, m.hamiltonian, m.initial_state)


def operator_equivalence_oracle(m, region_sets):
    """``max |D_pathsum - D_operator|`` for the same instantaneous alternatives."""
    from .decoherence import build_decoherence_functional

    path_d = build_D_pathsum(m, region_partition(m, region_sets))
    op_d = build_decoherence_functional(region_grid(m, region_sets))
    if len(path_d) != len(op_d):
        raise ValueError("formulations produced different history counts")
    # Both enumerate region tuples lexicographically; the only label
    # difference is () versus (0,) for the unconstrained case.
    return float(np.max(np.abs(path_d.entries - op_d.entries)))

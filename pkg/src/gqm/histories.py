"""History grids, class operators and coarse graining.

A grid fixes a sequence of times, one family of alternatives per time, the
dynamics and the initial state. A history is a tuple ``(a_1, ..., a_n)``
choosing one projector per time; its class operator is the time-ordered
product with the latest factor leftmost.
"""

import itertools
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .exceptions import (
    CoverageError,
    DimensionError,
    EnumerationSizeError,
    HistoryIndexError,
    StructuralError,
)
from .hilbert import (
    DensityState,
    Hamiltonian,
    ProjectionFamily,
    heisenberg_projector,
    validate_family,
)
from .validation import DEFAULT_TOLERANCES, frozen

MAX_HISTORIES = 10**6


@dataclass(frozen=True, eq=False)
class HistoryGrid:
    """Times, per-time alternatives, dynamics and initial state.

    Pass ``validate=False`` to build a grid whose families are not
    exhaustive and exclusive; such grids are refused by the decoherence
    functional but useful for diagnosing broken inputs.
    """

    times: tuple
    families: tuple
    hamiltonian: Hamiltonian
    state: DensityState
    tol: float = field(default=DEFAULT_TOLERANCES.structural_tol, repr=False)
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        families = tuple(
            f if isinstance(f, ProjectionFamily) else ProjectionFamily(tuple(f))
            for f in self.families
        )
        if not times:
            raise ValueError("a history grid needs at least one time")
        if len(times) != len(families):
            raise ValueError(f"{len(times)} times but {len(families)} families")
        if any(not np.isfinite(t) for t in times):
            raise ValueError("times must be finite")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError(f"times must be strictly increasing, got {times}")
        d = self.hamiltonian.dimension
        for j, fam in enumerate(families):
            if fam.dimension != d:
                raise DimensionError(
                    f"family {j} has dimension {fam.dimension}, Hamiltonian has {d}"
                )
            if self.validate:
                report = validate_family(fam.projectors, self.tol)
                if not report.passed:
                    raise StructuralError(
                        f"family {j} is not exhaustive and exclusive "
                        f"(completeness {report.completeness_residual:.3e}, "
                        f"exclusivity {report.exclusivity_residual:.3e})",
                        max(report.completeness_residual, report.exclusivity_residual),
                    )
        if self.state.dimension != d:
            raise DimensionError(
                f"state has dimension {self.state.dimension}, Hamiltonian has {d}"
            )
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "families", families)
        evolved = tuple(
            tuple(
                heisenberg_projector(p, self.hamiltonian, t, self.tol).matrix
                for p in fam
            )
            for t, fam in zip(times, families)
        )
        object.__setattr__(self, "_heisenberg", evolved)

    @property
    def dimension(self):
        return self.hamiltonian.dimension

    @property
    def shape(self):
        """Number of alternatives at each time."""
        return tuple(len(f) for f in self.families)

    @property
    def n_histories(self):
        return int(np.prod(self.shape, dtype=object))

    def heisenberg(self, slot, k):
        """Heisenberg-picture matrix of alternative ``k`` at time slot ``slot``."""
        return self._heisenberg[slot][k]

    def history_label(self, alpha):
        return tuple(self.families[j][a].label for j, a in enumerate(alpha))


def enumerate_histories(g):
    """All history indices of ``g`` in lexicographic order."""
    size = g.n_histories
    if size > MAX_HISTORIES:
        raise EnumerationSizeError(
            f"grid has {size} histories (shape {g.shape}), above the cap of {MAX_HISTORIES}",
            size,
        )
    return list(itertools.product(*(range(n) for n in g.shape)))


def _check_index(g, alpha):
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != len(g.shape) or any(
        not 0 <= a < n for a, n in zip(alpha, g.shape)
    ):
        raise HistoryIndexError(f"history {alpha} is not valid for grid shape {g.shape}")
    return alpha


def class_operator(g, alpha):
    """``C_alpha = P_{a_n}(t_n) ... P_{a_1}(t_1)``, latest time leftmost."""
    alpha = _check_index(g, alpha)
    c = g.heisenberg(0, alpha[0])
    for j in range(1, len(alpha)):
        c = g.heisenberg(j, alpha[j]) @ c
    return frozen(c)


def class_operators(g):
    """Class operators for every history, stacked in lexicographic order.

    Shares the partial products of common prefixes, so the cost is one
    matrix product per node of the history tree.
    """
    enumerate_histories(g)
    d = g.dimension
    layer = np.eye(d, dtype=np.complex128)[None]
    for j, n in enumerate(g.shape):
        proj = np.stack([g.heisenberg(j, k) for k in range(n)])
        # new[i, k] = P_k(t_j) @ layer[i]
        layer = np.einsum("kab,ibc->ikac", proj, layer).reshape(-1, d, d)
    return layer


def completeness_check(g):
    """``max |sum_alpha C_alpha - I|``; zero for a valid grid up to rounding."""
    total = np.zeros((g.dimension, g.dimension), dtype=np.complex128)
    for c in class_operators(g):
        total += c
    return float(np.max(np.abs(total - np.eye(g.dimension))))


@dataclass(frozen=True, eq=False)
class CoarseGrainingMap:
    """Total assignment of fine labels to coarse (bar) labels."""

    assignment: Mapping

    def __post_init__(self):
        if not self.assignment:
            raise ValueError("a coarse-graining map needs at least one entry")
        object.__setattr__(self, "assignment", dict(self.assignment))

    def __call__(self, label):
        return self.assignment[label]

    def preimages(self, labels):
        """Bar label -> positions in ``labels``, bar labels in first-seen order."""
        missing = [lab for lab in labels if lab not in self.assignment]
        if missing:
            raise CoverageError(
                f"{len(missing)} histories are not assigned a coarse label: "
                f"{missing[:10]}{' ...' if len(missing) > 10 else ''}",
                missing,
            )
        cells = {}
        for i, lab in enumerate(labels):
            cells.setdefault(self.assignment[lab], []).append(i)
        return cells

    def then(self, other):
        """Composite map: apply ``self`` first, then ``other``."""
        return CoarseGrainingMap(
            {lab: other(bar) for lab, bar in self.assignment.items()}
        )

    @classmethod
    def identity(cls, labels):
        return cls({lab: lab for lab in labels})

    @classmethod
    def constant(cls, labels, bar="all"):
        return cls({lab: bar for lab in labels})

    @classmethod
    def marginal(cls, labels, slots):
        """Keep only the chosen time slots of each history tuple."""
        slots = tuple(slots)
        return cls({lab: tuple(lab[s] for s in slots) for lab in labels})

    @classmethod
    def from_function(cls, labels, fn):
        return cls({lab: fn(lab) for lab in labels})


def coarse_grain_operators(g, m):
    """``C_bar = sum of C_alpha over the cell``, summed in lexicographic order."""
    labels = enumerate_histories(g)
    ops = class_operators(g)
    out = {}
    for bar, members in m.preimages(labels).items():
        acc = np.zeros((g.dimension, g.dimension), dtype=np.complex128)
        for i in members:
            acc += ops[i]
        out[bar] = frozen(acc)
    return out

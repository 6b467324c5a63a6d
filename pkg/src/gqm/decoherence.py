"""Decoherence functional, axiom checks, decoherence criteria and records.

Convention: ``D(a, b) = Tr(C_a rho C_b^dagger)`` with the latest projector
leftmost in ``C``. The diagonal is then the sequential-measurement (Born)
probability of each history, and each row sums to ``Tr(C_a rho)``.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import (
    IncompleteGridError,
    RecordsUnavailable,
    StructuralError,
    UnsupportedStateError,
)
from .histories import (
    CoarseGrainingMap,
    HistoryGrid,
    class_operators,
    coarse_grain_operators,
    completeness_check,
    enumerate_histories,
)
from .hilbert import Projector
from .validation import DEFAULT_TOLERANCES, check_square, hermiticity_residual

_TOL = DEFAULT_TOLERANCES.structural_tol

CRITERIA = ("medium", "weak", "linear-positivity")
_ALIASES = {"lp": "linear-positivity", "linear_positivity": "linear-positivity"}


@dataclass(frozen=True, eq=False)
class DecoherenceMatrix:
    """Square complex matrix indexed by history labels.

    ``provenance`` records which formulation produced it: ``"operator"``,
    ``"path-sum"``, ``"coarse-grained"`` or ``"manual"``.
    """

    entries: np.ndarray
    index_labels: tuple
    provenance: str = "manual"

    def __post_init__(self):
        d = check_square(self.entries, "decoherence matrix", cap=None)
        labels = tuple(self.index_labels)
        if len(labels) != d.shape[0]:
            raise ValueError(
                f"{len(labels)} labels for a {d.shape[0]}x{d.shape[0]} matrix"
            )
        if len(set(labels)) != len(labels):
            raise ValueError("history labels must be unique")
        object.__setattr__(self, "entries", d)
        object.__setattr__(self, "index_labels", labels)

    def __len__(self):
        return len(self.index_labels)

    def __getitem__(self, pair):
        a, b = pair
        pos = self.position
        return complex(self.entries[pos[a], pos[b]])

    @property
    def position(self):
        return {lab: i for i, lab in enumerate(self.index_labels)}

    def diagonal(self):
        return np.real(np.diag(self.entries))

    def max_off_diagonal(self, part=np.abs):
        if len(self) < 2:
            return 0.0
        off = self.entries[~np.eye(len(self), dtype=bool)]
        return float(np.max(part(off)))

    def row_sums(self):
        return self.entries.sum(axis=1)


def decoherence_from_operators(ops, rho, labels, provenance="operator"):
    """``D(a, b) = Tr(C_a rho C_b^dagger)`` for a stack of operators."""
    ops = np.asarray(ops, dtype=np.complex128)
    n, d, _ = ops.shape
    left = (ops @ rho).reshape(n, d * d)
    right = ops.reshape(n, d * d)
    # Tr(A B^dagger) = sum_ij A_ij conj(B_ij)
    return DecoherenceMatrix(left @ right.conj().T, tuple(labels), provenance)


def _require_complete(g, tol):
    residual = completeness_check(g)
    if residual > tol:
        raise IncompleteGridError(
            f"class operators do not sum to the identity (residual {residual:.3e})",
            residual,
        )


def build_decoherence_functional(g: HistoryGrid, tol=_TOL):
    """Decoherence matrix of every fine history of ``g``."""
    _require_complete(g, tol)
    return decoherence_from_operators(
        class_operators(g), g.state.matrix, enumerate_histories(g)
    )


def coarse_grain_D(d: DecoherenceMatrix, m: CoarseGrainingMap):
    """Double sum of ``d`` over the cells of ``m``.

    Rows are folded first, then columns, each in label order, so the result
    does not depend on BLAS reduction order.
    """
    cells = m.preimages(d.index_labels)
    bars = list(cells)
    rows = np.zeros((len(bars), len(d)), dtype=np.complex128)
    for r, bar in enumerate(bars):
        for i in cells[bar]:
            rows[r] += d.entries[i]
    out = np.zeros((len(bars), len(bars)), dtype=np.complex128)
    for c, bar in enumerate(bars):
        for i in cells[bar]:
            out[:, c] += rows[:, i]
    return DecoherenceMatrix(out, tuple(bars), "coarse-grained")


@dataclass(frozen=True)
class AxiomReport:
    hermiticity_residual: float
    normalization_residual: float
    positivity_min_diagonal: float
    superposition_residual: float
    tol: float = _TOL
    pass_: bool = field(init=False)

    def __post_init__(self):
        ok = (
            self.hermiticity_residual <= self.tol
            and self.normalization_residual <= self.tol
            and self.positivity_min_diagonal >= -self.tol
            and self.superposition_residual <= self.tol
        )
        object.__setattr__(self, "pass_", ok)

    @property
    def passed(self):
        return self.pass_

    def as_dict(self):
        return {
            "hermiticity_residual": self.hermiticity_residual,
            "normalization_residual": self.normalization_residual,
            "positivity_min_diagonal": self.positivity_min_diagonal,
            "superposition_residual": self.superposition_residual,
            "pass": self.pass_,
        }


def standard_maps(labels):
    """Identity, all-to-one and every single-slot marginal over ``labels``."""
    labels = list(labels)
    maps = [CoarseGrainingMap.identity(labels), CoarseGrainingMap.constant(labels)]
    first = labels[0]
    if isinstance(first, tuple) and len(first) > 1:
        maps += [CoarseGrainingMap.marginal(labels, [s]) for s in range(len(first))]
    return maps


def check_axioms(d, source=None, maps=(), tol=_TOL):
    """Residuals of Hermiticity, normalization, positivity and superposition.

    ``source`` is what ``d`` was built from: a :class:`HistoryGrid`, or a
    ``(LatticeModel, PathPartition)`` pair. Superposition is checked by
    rebuilding each coarse-grained set from scratch through ``source`` and
    comparing with the double sum of ``d``. The battery always includes
    the identity, all-to-one and single-slot marginal maps; ``maps`` adds
    to it. Without a source the superposition residual is 0 (unchecked).
    """
    e = d.entries
    herm = hermiticity_residual(e)
    norm = abs(complex(e.sum()) - 1.0)
    min_diag = float(np.min(np.real(np.diag(e)))) if len(d) else 0.0
    superposition = 0.0
    if source is not None:
        for m in list(standard_maps(d.index_labels)) + list(maps):
            fast = coarse_grain_D(d, m)
            slow = _rebuild_coarse(source, m)
            pos = slow.position
            order = [pos[b] for b in fast.index_labels]
            diff = fast.entries - slow.entries[np.ix_(order, order)]
            superposition = max(superposition, float(np.max(np.abs(diff))))
    return AxiomReport(herm, norm, min_diag, superposition, tol)


def _rebuild_coarse(source, m):
    if isinstance(source, HistoryGrid):
        ops = coarse_grain_operators(source, m)
        return decoherence_from_operators(
            list(ops.values()), source.state.matrix, list(ops), "operator"
        )
    from .pathsum import build_D_pathsum, merge_partition

    model, partition = source
    return build_D_pathsum(model, merge_partition(partition, m))


@dataclass(frozen=True)
class DecoherenceVerdict:
    criterion: str
    epsilon: float
    max_violation: float
    decoherent: bool
    probabilities: Optional[dict] = None

    def as_dict(self):
        return {
            "criterion": self.criterion,
            "epsilon": self.epsilon,
            "max_violation": self.max_violation,
            "decoherent": self.decoherent,
        }


def normalize_criterion(criterion):
    name = _ALIASES.get(criterion, criterion)
    if name not in CRITERIA:
        raise ValueError(
            f"unknown criterion {criterion!r}; expected one of {CRITERIA + tuple(_ALIASES)}"
        )
    return name


def decide(d: DecoherenceMatrix, criterion="medium", epsilon=1e-8, tol=_TOL):
    """Decide whether ``d`` decoheres under ``criterion`` at threshold ``epsilon``.

    ``medium`` bounds ``|D(a, b)|`` and ``weak`` bounds ``|Re D(a, b)|`` off
    the diagonal; both report ``p(a) = Re D(a, a)`` on success.
    ``linear-positivity`` uses the row sums ``Re sum_b D(a, b)``, which
    equal ``Re Tr(C_a rho)`` for any complete set.
    """
    criterion = normalize_criterion(criterion)
    epsilon = float(epsilon)
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    herm = hermiticity_residual(d.entries)
    if herm > tol:
        raise StructuralError(
            f"decoherence matrix is not Hermitian (residual {herm:.3e})", herm
        )
    if criterion == "linear-positivity":
        return _lp_verdict(np.real(d.row_sums()), d.index_labels, epsilon)
    part = np.abs if criterion == "medium" else (lambda z: np.abs(np.real(z)))
    violation = d.max_off_diagonal(part)
    ok = violation <= epsilon
    probs = dict(zip(d.index_labels, d.diagonal().tolist())) if ok else None
    return DecoherenceVerdict(criterion, epsilon, violation, ok, probs)


def _lp_verdict(p, labels, epsilon):
    violation = max(0.0, -float(np.min(p)))
    ok = violation <= epsilon
    probs = dict(zip(labels, [float(x) for x in p])) if ok else None
    return DecoherenceVerdict("linear-positivity", epsilon, violation, ok, probs)


def linear_positivity_probs(g: HistoryGrid, epsilon=1e-8, tol=_TOL):
    """Candidate probabilities ``Re Tr(C_a rho)`` and their positivity verdict.

    The probabilities always sum to 1 for a complete grid, so the verdict
    only asks whether any is negative beyond ``epsilon``.
    """
    _require_complete(g, tol)
    ops = class_operators(g)
    p = np.real(np.einsum("nij,ji->n", ops, g.state.matrix))
    return _lp_verdict(p, enumerate_histories(g), float(epsilon))


def branch_vectors(g: HistoryGrid, tol=_TOL):
    """``C_a |psi>`` for every history of a grid with a pure initial state."""
    if not g.state.is_pure(tol):
        raise UnsupportedStateError(
            f"branch records need a pure state (purity {g.state.purity():.6g})"
        )
    psi = g.state.ket(tol)
    return class_operators(g) @ psi


def branch_records(g: HistoryGrid, epsilon=1e-8, tol=_TOL):
    """Orthogonal record projectors, one per history, for a pure state.

    Nonzero branches are normalized and then symmetrically orthogonalized
    (the closest orthonormal set), so records are exactly orthogonal even
    when branches are orthogonal only to ``epsilon``. Branches with norm
    at most ``tol`` get the zero projector.
    """
    labels = enumerate_histories(g)
    vecs = branch_vectors(g, tol)
    norms = np.linalg.norm(vecs, axis=1)
    gram = vecs.conj() @ vecs.T
    np.fill_diagonal(gram, 0)
    max_overlap = float(np.max(np.abs(gram))) if len(labels) > 1 else 0.0
    if max_overlap > epsilon:
        with np.errstate(divide="ignore", invalid="ignore"):
            scaled = np.abs(gram) / np.outer(norms, norms)
        scaled[~np.isfinite(scaled)] = 0.0
        raise RecordsUnavailable(
            f"branches are not orthogonal: max overlap {max_overlap:.6g} "
            f"(normalized {float(np.max(scaled)):.6g}) exceeds {epsilon:.1e}",
            max_overlap,
            float(np.max(scaled)),
        )
    d = g.dimension
    live = np.flatnonzero(norms > tol)
    directions = (vecs[live] / norms[live, None]).T
    if live.size:
        u, _, vh = np.linalg.svd(directions, full_matrices=False)
        directions = u @ vh
    records = {lab: Projector(np.zeros((d, d)), str(lab)) for lab in labels}
    for col, i in enumerate(live):
        records[labels[i]] = Projector.onto(directions[:, col], str(labels[i]))
    return records


def record_residual(g, records, tol=_TOL):
    """``max |R_a C_b psi - delta_ab C_b psi|`` over all pairs."""
    labels = enumerate_histories(g)
    vecs = branch_vectors(g, tol)
    worst = 0.0
    for i, a in enumerate(labels):
        r = records[a].matrix
        for j in range(len(labels)):
            target = vecs[j] if i == j else 0.0
            worst = max(worst, float(np.max(np.abs(r @ vecs[j] - target))))
    return worst


__all__ = [
    "AxiomReport",
    "CRITERIA",
    "DecoherenceMatrix",
    "DecoherenceVerdict",
    "branch_records",
    "branch_vectors",
    "build_decoherence_functional",
    "check_axioms",
    "coarse_grain_D",
    "decide",
    "decoherence_from_operators",
    "linear_positivity_probs",
    "record_residual",
    "standard_maps",
]

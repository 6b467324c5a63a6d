"""Finite-dimensional Hilbert space substrate.

States, projectors and Hamiltonians are thin immutable wrappers around
read-only complex arrays. Units have hbar = 1, so time is dimensionless.
"""

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import DimensionError, StructuralError
from .validation import (
    DEFAULT_TOLERANCES,
    check_hermitian,
    check_same_dimension,
    check_square,
    frozen,
)

_TOL = DEFAULT_TOLERANCES.structural_tol


@dataclass(frozen=True)
class HilbertSpace:
    dimension: int
    basis_labels: tuple = None

    def __post_init__(self):
        if int(self.dimension) < 1:
            raise DimensionError("dimension must be >= 1")
        labels = self.basis_labels
        if labels is None:
            labels = tuple(str(i) for i in range(self.dimension))
        labels = tuple(str(x) for x in labels)
        if len(labels) != self.dimension:
            raise DimensionError(
                f"{len(labels)} basis labels for dimension {self.dimension}"
            )
        if len(set(labels)) != len(labels):
            raise ValueError("basis labels must be unique")
        object.__setattr__(self, "dimension", int(self.dimension))
        object.__setattr__(self, "basis_labels", labels)

    def basis_vector(self, i):
        v = np.zeros(self.dimension, dtype=np.complex128)
        v[i] = 1.0
        return v


@dataclass(frozen=True, eq=False)
class DensityState:
    """Hermitian, positive semidefinite, unit-trace matrix."""

    matrix: np.ndarray
    tol: float = field(default=_TOL, repr=False)

    def __post_init__(self):
        rho = check_hermitian(self.matrix, self.tol, "density matrix")
        trace = np.trace(rho)
        if abs(trace - 1.0) > self.tol:
            raise StructuralError(
                f"density matrix trace is {trace.real:.12g}, not 1", abs(trace - 1.0)
            )
        lowest = float(np.linalg.eigvalsh(rho)[0])
        if lowest < -self.tol:
            raise StructuralError(
                f"density matrix has negative eigenvalue {lowest:.3e}", -lowest
            )
        object.__setattr__(self, "matrix", rho)

    @classmethod
    def from_ket(cls, ket, tol=_TOL):
        v = np.asarray(ket, dtype=np.complex128).ravel()
        norm = np.linalg.norm(v)
        if norm == 0:
            raise StructuralError("cannot build a state from the zero vector")
        v = v / norm
        return cls(np.outer(v, v.conj()), tol)

    @property
    def dimension(self):
        return self.matrix.shape[0]

    def purity(self):
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def is_pure(self, tol=_TOL):
        return abs(self.purity() - 1.0) <= tol

    def ket(self, tol=_TOL):
        """Return the state vector of a pure state (phase fixed by eigh)."""
        if not self.is_pure(tol):
            raise StructuralError("state is mixed; no single ket represents it")
        w, v = np.linalg.eigh(self.matrix)
        return v[:, -1] * np.sqrt(w[-1])


@dataclass(frozen=True, eq=False)
class Projector:
    matrix: np.ndarray
    label: str = ""
    tol: float = field(default=_TOL, repr=False)

    def __post_init__(self):
        p = check_hermitian(self.matrix, self.tol, f"projector {self.label!r}")
        residual = float(np.max(np.abs(p @ p - p)))
        if residual > self.tol:
            raise StructuralError(
                f"projector {self.label!r} is not idempotent: max |P^2 - P| = {residual:.3e}",
                residual,
            )
        object.__setattr__(self, "matrix", p)
        object.__setattr__(self, "label", str(self.label))

    @classmethod
    def onto(cls, vectors, label="", tol=_TOL):
        """Orthogonal projector onto the span of the given column vectors."""
        a = np.asarray(vectors, dtype=np.complex128)
        if a.ndim == 1:
            a = a[:, None]
        q, r = np.linalg.qr(a)
        keep = np.abs(np.diag(r)) > tol
        q = q[:, keep]
        return cls(q @ q.conj().T, label, tol)

    @property
    def dimension(self):
        return self.matrix.shape[0]

    @property
    def rank(self):
        return int(round(np.real(np.trace(self.matrix))))


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    matrix: np.ndarray
    tol: float = field(default=_TOL, repr=False)

    def __post_init__(self):
        object.__setattr__(
            self, "matrix", check_hermitian(self.matrix, self.tol, "Hamiltonian")
        )

    @classmethod
    def zero(cls, dimension):
        return cls(np.zeros((dimension, dimension)))

    @property
    def dimension(self):
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class ProjectionFamily:
    """The alternatives available at a single time."""

    projectors: tuple

    def __post_init__(self):
        ps = tuple(self.projectors)
        if not ps:
            raise ValueError("a projection family needs at least one projector")
        check_same_dimension(*(p.matrix for p in ps))
        object.__setattr__(self, "projectors", ps)

    def __len__(self):
        return len(self.projectors)

    def __getitem__(self, k):
        return self.projectors[k]

    def __iter__(self):
        return iter(self.projectors)

    @property
    def dimension(self):
        return self.projectors[0].dimension

    @property
    def labels(self):
        return tuple(p.label for p in self.projectors)

    @classmethod
    def from_basis(cls, basis, labels=None, groups=None):
        """Group the columns of a unitary ``basis`` into projectors.

        Without ``groups`` every column gets its own rank-one projector.
        """
        u = np.asarray(basis, dtype=np.complex128)
        if groups is None:
            groups = [[k] for k in range(u.shape[1])]
        if labels is None:
            labels = [str(k) for k in range(len(groups))]
        return cls(
            tuple(
                Projector(u[:, list(g)] @ u[:, list(g)].conj().T, lab)
                for g, lab in zip(groups, labels)
            )
        )

    @classmethod
    def trivial(cls, dimension, label="I"):
        return cls((Projector(np.eye(dimension), label),))

    def validate(self, tol=_TOL):
        return validate_family(self.projectors, tol)


def evolution_operator(h, t, tol=_TOL):
    """Return ``U(t) = exp(-i H t)`` from the eigendecomposition of ``H``."""
    hm = h.matrix if isinstance(h, Hamiltonian) else check_hermitian(h, tol, "Hamiltonian")
    t = float(t)
    if not np.isfinite(t):
        raise ValueError(f"time must be finite, got {t!r}")
    w, v = np.linalg.eigh((hm + hm.conj().T) / 2)
    return frozen((v * np.exp(-1j * w * t)) @ v.conj().T)


def heisenberg_projector(p, h, t, tol=_TOL):
    """Heisenberg-picture projector ``U(t)^dagger P U(t)``."""
    hm = h.matrix if isinstance(h, Hamiltonian) else check_square(h, "Hamiltonian")
    if p.matrix.shape != hm.shape:
        raise DimensionError(
            f"projector shape {p.matrix.shape} does not match Hamiltonian {hm.shape}"
        )
    if t == 0 or not np.any(hm):
        return p
    u = evolution_operator(h, t, tol)
    m = u.conj().T @ p.matrix @ u
    # Symmetrize away rounding so the result re-validates.
    return Projector((m + m.conj().T) / 2, p.label, tol)


@dataclass(frozen=True)
class FamilyReport:
    completeness_residual: float
    exclusivity_residual: float
    passed: bool

    def __bool__(self):
        return self.passed


def validate_family(projectors: Sequence, tol=_TOL):
    """Check that projectors sum to the identity and are mutually orthogonal.

    Never raises on failure; the residuals say how far off the family is.
    """
    ps = [p.matrix if isinstance(p, Projector) else check_square(p) for p in projectors]
    if not ps:
        raise ValueError("empty projector family")
    d = check_same_dimension(*ps)
    completeness = float(np.max(np.abs(sum(ps) - np.eye(d))))
    exclusivity = 0.0
    for j, pj in enumerate(ps):
        for k, pk in enumerate(ps):
            if j != k:
                exclusivity = max(exclusivity, float(np.max(np.abs(pj @ pk))))
    return FamilyReport(
        completeness, exclusivity, completeness <= tol and exclusivity <= tol
    )


# Standard qubit pieces used by the model zoo and the tests.

SIGMA_X = frozen(np.array([[0, 1], [1, 0]], dtype=np.complex128))
SIGMA_Y = frozen(np.array([[0, -1j], [1j, 0]], dtype=np.complex128))
SIGMA_Z = frozen(np.array([[1, 0], [0, -1]], dtype=np.complex128))

QUBIT_BASES = {
    "z": (np.eye(2, dtype=np.complex128), ("0", "1")),
    "x": (np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2), ("+", "-")),
    "y": (np.array([[1, 1], [1j, -1j]], dtype=np.complex128) / np.sqrt(2), ("+i", "-i")),
}


def qubit_family(axis):
    """Two-outcome family measuring a Pauli axis ('x', 'y' or 'z')."""
    basis, labels = QUBIT_BASES[axis]
    return ProjectionFamily.from_basis(basis, labels)

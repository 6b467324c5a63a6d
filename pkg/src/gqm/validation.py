"""Input validation helpers, in the spirit of ``sklearn.utils.validation``.

Every public entry point funnels raw array-likes through these so that the
rest of the package can assume square complex128 read-only arrays.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError, StructuralError

MAX_DIMENSION = 64


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds.

    ``structural_tol`` governs checks that hold exactly in exact arithmetic
    (Hermiticity, idempotence, completeness). ``decoherence_eps`` is the
    caller's reading of "approximately zero" for off-diagonal interference.
    """

    structural_tol: float = 1e-10
    decoherence_eps: float = 1e-8

    def __post_init__(self):
        for name in ("structural_tol", "decoherence_eps"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be > 0, got {value!r}")


DEFAULT_TOLERANCES = Tolerances()


def frozen(a):
    """Return ``a`` as a read-only array (copying if it is writeable)."""
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def check_square(matrix, name="matrix", cap=MAX_DIMENSION):
    """Coerce to a read-only square complex128 array of size at most ``cap``."""
    a = np.asarray(matrix, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise DimensionError(f"{name} must have dimension >= 1")
    if cap is not None and a.shape[0] > cap:
        raise DimensionError(
            f"{name} has dimension {a.shape[0]}, above the cap of {cap}"
        )
    if not np.all(np.isfinite(a)):
        raise StructuralError(f"{name} contains non-finite entries")
    return frozen(a)


def hermiticity_residual(a):
    return float(np.max(np.abs(a - a.conj().T)))


def check_hermitian(matrix, tol=DEFAULT_TOLERANCES.structural_tol, name="matrix"):
    a = check_square(matrix, name)
    residual = hermiticity_residual(a)
    if residual > tol:
        raise StructuralError(
            f"{name} is not Hermitian: max |A - A^dagger| = {residual:.3e} > {tol:.1e}",
            residual,
        )
    return a


def check_same_dimension(*matrices):
    dims = {m.shape[0] for m in matrices}
    if len(dims) > 1:
        raise DimensionError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def check_tolerance(value, name="tolerance"):
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be > 0, got {value!r}")
    return value

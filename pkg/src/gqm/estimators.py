"""Estimator-style wrappers.

``fit`` computes the decoherence matrix of a history set, ``transform``
coarse-grains it, and ``predict_proba`` returns history probabilities when
the set decoheres. Hyperparameters go through ``get_params``/``set_params``
so the estimators clone and grid-search like any scikit-learn object.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .decoherence import (
    build_decoherence_functional,
    check_axioms,
    coarse_grain_D,
    decide,
    normalize_criterion,
)
from .exceptions import NotDecoherentError
from .histories import CoarseGrainingMap, HistoryGrid
from .pathsum import LatticeModel, build_D_pathsum, predicate_partition, region_partition
from .validation import check_tolerance


def resolve_map(coarse_graining, labels):
    """Accept a map, a callable on labels, or a label -> bar dict."""
    if coarse_graining is None or isinstance(coarse_graining, CoarseGrainingMap):
        return coarse_graining
    if callable(coarse_graining):
        return CoarseGrainingMap.from_function(labels, coarse_graining)
    return CoarseGrainingMap(coarse_graining)


class _DecoherenceEstimator(BaseEstimator):
    def _validate_params(self):
        normalize_criterion(self.criterion)
        check_tolerance(self.epsilon, "epsilon")
        check_tolerance(self.structural_tol, "structural_tol")

    def _finish(self, fine, source):
        self.fine_matrix_ = fine
        self.n_histories_ = len(fine)
        cg = resolve_map(self.coarse_graining, fine.index_labels)
        extra = [cg] if cg is not None else []
        self.axioms_ = check_axioms(fine, source, extra, self.structural_tol)
        self.decoherence_matrix_ = fine if cg is None else coarse_grain_D(fine, cg)
        self.labels_ = self.decoherence_matrix_.index_labels
        self.verdict_ = decide(
            self.decoherence_matrix_, self.criterion, self.epsilon, self.structural_tol
        )
        return self

    def transform(self, X):
        """Coarse-grain the fitted fine-grained matrix by ``X``."""
        check_is_fitted(self, "fine_matrix_")
        return coarse_grain_D(self.fine_matrix_, resolve_map(X, self.fine_matrix_.index_labels))

    def predict_proba(self, X=None):
        """Probabilities in ``labels_`` order; raises if the set does not decohere."""
        check_is_fitted(self, "verdict_")
        if not self.verdict_.decoherent:
            raise NotDecoherentError(
                f"{self.verdict_.criterion} decoherence fails: max violation "
                f"{self.verdict_.max_violation:.3e} > {self.verdict_.epsilon:.1e}"
            )
        return np.array([self.verdict_.probabilities[lab] for lab in self.labels_])

    def score(self, X=None, y=None):
        """Negated largest violation, so larger is more decoherent."""
        check_is_fitted(self, "verdict_")
        return -self.verdict_.max_violation


class HistoryDecoherence(_DecoherenceEstimator):
    """Operator formulation: fit on a :class:`HistoryGrid`."""

    def __init__(self, criterion="medium", epsilon=1e-8, structural_tol=1e-10,
                 coarse_graining=None):
        self.criterion = criterion
        self.epsilon = epsilon
        self.structural_tol = structural_tol
        self.coarse_graining = coarse_graining

    def fit(self, X, y=None):
        if not isinstance(X, HistoryGrid):
            raise TypeError(f"expected a HistoryGrid, got {type(X).__name__}")
        self._validate_params()
        self.grid_ = X
        return self._finish(build_decoherence_functional(X, self.structural_tol), X)


class PathSumDecoherence(_DecoherenceEstimator):
    """Sum-over-histories formulation: fit on a :class:`LatticeModel`.

    Paths are partitioned by ``regions`` (``{slice: [[sites], ...]}``) or,
    if given instead, by ``labeler`` applied to each whole path.
    """

    def __init__(self, regions=None, labeler=None, criterion="medium", epsilon=1e-8,
                 structural_tol=1e-10, coarse_graining=None):
        self.regions = regions
        self.labeler = labeler
        self.criterion = criterion
        self.epsilon = epsilon
        self.structural_tol = structural_tol
        self.coarse_graining = coarse_graining

    def fit(self, X, y=None):
        if not isinstance(X, LatticeModel):
            raise TypeError(f"expected a LatticeModel, got {type(X).__name__}")
        if self.regions is not None and self.labeler is not None:
            raise ValueError("give either regions or labeler, not both")
        self._validate_params()
        if self.labeler is not None:
            part = predicate_partition(X, self.labeler)
        else:
            part = region_partition(X, self.regions or {})
        self.model_ = X
        self.partition_ = part
        return self._finish(build_D_pathsum(X, part), (X, part))

"""scikit-learn style wrapper around the classification pipeline."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.exceptions import NotFittedError

from .criterion import FIRST_KIND, NOT_FIRST_KIND, UNDETERMINED, ClassifyOptions, Thresholds, classify
from .validation import check_depth, check_positive, check_surfaces

FEATURES = ("log_partial_sum", "partial_sum_slope", "term_slope", "confirmed")


class FluteSurfaceClassifier(ClassifierMixin, TransformerMixin, BaseEstimator):
    """Label surfaces FIRST_KIND / NOT_FIRST_KIND / UNDETERMINED.

    ``X`` is a sequence of :class:`FluteSurface` objects or their dict form.
    Nothing is learned; ``fit`` only validates parameters and fixes ``classes_``.
    """

    def __init__(self, depth=200, divergent_slope=0.1, convergent_term_slope=-1.1,
                 beam_width=64, search_depth=None):
        self.depth = depth
        self.divergent_slope = divergent_slope
        self.convergent_term_slope = convergent_term_slope
        self.beam_width = beam_width
        self.search_depth = search_depth

    def _options(self) -> ClassifyOptions:
        th = Thresholds(divergent_slope=check_positive(self.divergent_slope, "divergent_slope"),
                        convergent_term_slope=float(self.convergent_term_slope))
        sd = None if self.search_depth is None else int(self.search_depth)
        return ClassifyOptions(thresholds=th, beam_width=int(self.beam_width), search_depth=sd)

    def fit(self, X, y=None):
        check_depth(self.depth)
        self.options_ = self._options()
        check_surfaces(X)
        self.classes_ = np.array([FIRST_KIND, NOT_FIRST_KIND, UNDETERMINED])
        self.n_features_out_ = len(FEATURES)
        return self

    def _reports(self, X):
        if not hasattr(self, "options_"):
            raise NotFittedError("call fit before using this estimator")
        return [classify(s, self.depth, self.options_) for s in check_surfaces(X)]

    def transform(self, X):
        rows = []
        for rep in self._reports(X):
            g = rep.growth_fit
            rows.append([float(rep.partial_sums[-1]), g.get("slope", np.nan), g.get("term_slope", np.nan),
                         0.0 if rep.heuristic else 1.0])
        return np.asarray(rows, dtype=float)

    def predict(self, X):
        return np.array([rep.first_kind for rep in self._reports(X)])

    def get_feature_names_out(self, input_features=None):
        return np.array(FEATURES, dtype=object)

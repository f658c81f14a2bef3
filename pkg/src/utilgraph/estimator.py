"""scikit-learn style wrapper around perfect-map construction and decomposition."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .decompose import decompose_over_cliques
from .graph import build_perfect_map, maximal_cliques
from .model import ModelError, ToleranceConfig, UtilityTable, VariableSpace


class CliqueDecomposer(RegressorMixin, TransformerMixin, BaseEstimator):
    """Learn the CA-independence graph of a utility table and its clique decomposition.

    ``fit`` accepts either a :class:`UtilityTable` or an integer state matrix
    ``X`` (one column per variable, one row per state, every state exactly
    once) with utilities ``y``. After fitting, ``predict`` evaluates the
    decomposition on state rows and ``transform`` returns the per-factor
    contributions, one column per maximal clique.

    Parameters
    ----------
    epsilon : float, default=1e-9
        Relative tolerance; values within ``epsilon * (1 + max|u|)`` are equal.
    reference : dict or None, default=None
        Reference value index per variable for the interaction terms.
    force : bool, default=False
        Allow dense tables above the state-count guard.

    Attributes
    ----------
    space_ : VariableSpace
    graph_ : UndirectedGraph
    cliques_ : list of tuple of str
    decomposition_ : AdditiveDecomposition
    residual_ : float
    n_features_in_ : int
    """

    def __init__(self, epsilon=1e-9, reference=None, force=False):
        self.epsilon = epsilon
        self.reference = reference
        self.force = force

    def _table(self, X, y) -> UtilityTable:
        if isinstance(X, UtilityTable):
            return X
        X = check_array(X, dtype=np.int64)
        if y is None:
            raise ValueError("y is required when X is a state matrix")
        y = check_array(np.asarray(y, dtype=np.float64).reshape(-1, 1)).ravel()
        if len(y) != len(X):
            raise ValueError("X and y have different lengths")
        if X.min() < 0:
            raise ValueError("state values must be nonnegative indices")
        sizes = np.maximum(X.max(axis=0) + 1, 2)
        space = VariableSpace((f"x{i}", [str(v) for v in range(s)]) for i, s in enumerate(sizes))
        space.check_dense(self.force)
        flat = np.ravel_multi_index(X.T, space.shape)
        if len(flat) != space.n_states or len(np.unique(flat)) != space.n_states:
            raise ValueError("X must list every state of the product space exactly once")
        values = np.empty(space.n_states)
        values[flat] = y
        return UtilityTable(space, values, force=self.force)

    def fit(self, X, y=None):
        tol = ToleranceConfig(self.epsilon)
        u = self._table(X, y)
        self.space_ = u.space
        self.n_features_in_ = len(u.space)
        self.graph_ = build_perfect_map(u, tol)
        self.cliques_ = maximal_cliques(self.graph_)
        report = decompose_over_cliques(u, self.graph_, self.reference, tol)
        self.decomposition_ = report.decomposition
        self.residual_ = report.max_residual
        return self

    def _states(self, X) -> np.ndarray:
        check_is_fitted(self, "decomposition_")
        X = check_array(X, dtype=np.int64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} columns, expected {self.n_features_in_}")
        if np.any(X < 0) or np.any(X >= np.array(self.space_.shape)):
            raise ModelError("state value index out of range")
        return X

    def transform(self, X):
        X = self._states(X)
        space = self.space_
        cols = []
        for f in self.decomposition_.factors:
            pos = [space.index(n) for n in f.scope]
            if pos:
                idx = np.ravel_multi_index(X[:, pos].T, space.scope_shape(f.scope))
            else:
                idx = np.zeros(len(X), dtype=np.int64)
            cols.append(f.table[idx])
        return np.column_stack(cols) if cols else np.zeros((len(X), 0))

    def predict(self, X):
        return self.transform(X).sum(axis=1)

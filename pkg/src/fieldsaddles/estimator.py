"""scikit-learn style front end for the multistart search.

:class:`SaddleSearch` behaves like a clusterer over starting configurations:
each start is labelled by the stationary point its Newton iteration lands on.
Fitting without data draws the random starts itself.
"""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils import check_array
from sklearn.utils.validation import check_is_fitted

from . import _kernels, finder
from .model import ModelParams


def check_starts(X, n_electrons=None) -> np.ndarray:
    """Validate starts given as ``(n_samples, N, 3)`` or ``(n_samples, 3N)``.

    Returns a float array of shape ``(n_samples, N, 3)``.
    """
    X = check_array(X, allow_nd=True, ensure_2d=True, dtype=np.float64)
    if X.ndim == 2:
        if X.shape[1] % 3:
            raise ValueError(f"flat starts need 3N columns, got {X.shape[1]}")
        X = X.reshape(len(X), -1, 3)
    if X.ndim != 3 or X.shape[2] != 3:
        raise ValueError(f"starts must have shape (n_samples, N, 3), got {X.shape}")
    if n_electrons is not None and X.shape[1] != n_electrons:
        raise ValueError(f"starts have {X.shape[1]} electrons, estimator expects {n_electrons}")
    if X.shape[1] < 2:
        raise ValueError("need at least two electrons")
    return X


class SaddleSearch(ClusterMixin, BaseEstimator):
    """Enumerate stationary points by multistart Newton-Raphson.

    Parameters
    ----------
    n_electrons : int, optional
        Electron count.  Inferred from ``X`` when fitting on explicit starts.
    n_starts : int
        Number of random starts drawn when ``fit`` gets no data.
    random_state : int
        Seed of the start stream (64-bit unsigned).
    n_jobs : int, optional
        Worker processes for random starts; results do not depend on it.

    The remaining parameters mirror :class:`fieldsaddles.finder.SearchParams`
    and :class:`fieldsaddles.model.ModelParams`.

    Attributes
    ----------
    saddles_ : list of SaddleRecord
        Inequivalent stationary points, ascending energy.
    energies_ : ndarray
    n_saddles_ : int
    labels_ : ndarray or None
        Saddle index per start (``-1`` if the start failed or was rejected);
        only set when fitted on explicit starts.
    status_counts_ : dict
    """

    def __init__(
        self,
        n_electrons=None,
        n_starts=100_000,
        random_state=0,
        nuclear_charge=None,
        field=1.0,
        sample_rho_max=4.0,
        sample_z_range=(0.05, 4.0),
        newton_tol=1e-10,
        max_iters=200,
        step_clamp=0.5,
        dedup_tol=1e-5,
        require_downfield=True,
        shard_size=10_000,
        zero_tol=1e-6,
        n_jobs=None,
    ):
        self.n_electrons = n_electrons
        self.n_starts = n_starts
        self.random_state = random_state
        self.nuclear_charge = nuclear_charge
        self.field = field
        self.sample_rho_max = sample_rho_max
        self.sample_z_range = sample_z_range
        self.newton_tol = newton_tol
        self.max_iters = max_iters
        self.step_clamp = step_clamp
        self.dedup_tol = dedup_tol
        self.require_downfield = require_downfield
        self.shard_size = shard_size
        self.zero_tol = zero_tol
        self.n_jobs = n_jobs

    def _search_params(self) -> finder.SearchParams:
        if not isinstance(self.random_state, numbers.Integral):
            raise ValueError("random_state must be an integer seed")
        return finder.SearchParams(
            n_starts=self.n_starts,
            rng_seed=int(self.random_state),
            sample_rho_max=self.sample_rho_max,
            sample_z_range=self.sample_z_range,
            newton_tol=self.newton_tol,
            max_iters=self.max_iters,
            step_clamp=self.step_clamp,
            dedup_tol=self.dedup_tol,
            require_downfield=self.require_downfield,
            shard_size=self.shard_size,
            zero_tol=self.zero_tol,
        )

    def _keep(self, configs, status):
        keep = status == _kernels.CONVERGED
        if self.require_downfield:
            keep &= np.all(configs[..., 2] > 0, axis=1)
        return keep

    def fit(self, X=None, y=None):
        params = self._search_params()
        if X is None:
            if self.n_electrons is None:
                raise ValueError("n_electrons is required when fitting without starts")
            model = ModelParams(self.n_electrons, self.nuclear_charge, self.field)
            workers = self.n_jobs or 1
            self.saddles_, counts = finder.search(
                model.n_electrons, params, model, workers, return_counts=True
            )
            self.labels_ = None
        else:
            X = check_starts(X, self.n_electrons)
            model = ModelParams(X.shape[1], self.nuclear_charge, self.field)
            configs, status, _, _ = finder.refine_batch(X, params, model)
            counts = {name: int(np.sum(status == code)) for code, name in finder.STATUS_NAMES.items()}
            keep = self._keep(configs, status)
            reps, hits, labels = finder._cluster(configs[keep], params.dedup_tol)
            records, order = finder.make_records(
                model.n_electrons, reps, hits, params, model, return_order=True
            )
            rank = np.empty(len(order), dtype=np.int64)
            rank[np.asarray(order, dtype=np.int64)] = np.arange(len(order))
            full = np.full(len(X), -1, dtype=np.int64)
            full[keep] = rank[labels] if len(order) else labels
            self.saddles_ = records
            self.labels_ = full
        self.n_electrons_ = model.n_electrons
        self.status_counts_ = counts
        self.energies_ = np.array([r.energy for r in self.saddles_])
        self.n_saddles_ = len(self.saddles_)
        return self

    def predict(self, X):
        """Saddle index (into ``saddles_``) reached from each start, or -1."""
        check_is_fitted(self, "saddles_")
        X = check_starts(X, self.n_electrons_)
        params = self._search_params()
        model = ModelParams(self.n_electrons_, self.nuclear_charge, self.field)
        configs, status, _, _ = finder.refine_batch(X, params, model)
        keep = self._keep(configs, status)
        out = np.full(len(X), -1, dtype=np.int64)
        reps = [r.positions for r in self.saddles_]
        out[keep] = finder.match(configs[keep], reps, params.dedup_tol)
        return out

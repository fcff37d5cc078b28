"""sklearn-style estimator facade.

Both aligners are transductive: they learn embeddings for the nodes of
the graph they were fitted on, so `transform` returns the fitted blocks
and refuses a different graph. `get_params` / `set_params` come from
scikit-learn's BaseEstimator, which makes the aligners usable with
clone, grid search over hyperparameters, and friends.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .baselines import BaselineConfig, align_features
from .graph import HeteroGraph, require_valid
from .solver import SolverConfig, run_alignment


class RelationSubspaceAligner(BaseEstimator):
    """Relation-aware feature aligner for heterogeneous graphs.

    Maps every node type's features into a shared `k`-dimensional latent
    space by alternating a structure-driven latent refit against all
    relations with a ridge decomposition of each latent block into a
    semantic projection of the raw features plus a structural residual.

    Parameters
    ----------
    k : int
        Latent dimension of the shared space.
    rho : int or None
        Rank of the random relation subspace; None picks max(2, k // 4).
    beta : float
        Structural residual penalty (> 0). Also the ridge weight of the
        structure pass.
    gamma : float
        Projection regularization (>= 0).
    iters : int
        Number of alternating iterations.
    sigma : float or None
        Std of the random projection entries; None picks 1/sqrt(rho).
    variant : str
        Operator parameterization: "type", "relation", "global", or
        "fullrank".
    seed : int
        Seed for projections and state initialization.
    rel_tol : float
        Early-stop threshold on the relative objective change; 0 disables.
    init_scale : float
        Scale of the random initial latent blocks.

    Attributes
    ----------
    embeddings_ : dict[str, ndarray]
        Aligned (count, k) block per node type.
    state_ : AlignmentState
        Full solver state (latent, projection, residual blocks).
    report_ : DiagnosticsReport
        Objective trace and reconstruction diagnostics of the run.
    """

    def __init__(
        self,
        k: int = 16,
        rho: int | None = None,
        beta: float = 1.0,
        gamma: float = 1.0,
        iters: int = 30,
        sigma: float | None = None,
        variant: str = "type",
        seed: int = 0,
        rel_tol: float = 0.0,
        init_scale: float = 1.0,
    ):
        self.k = k
        self.rho = rho
        self.beta = beta
        self.gamma = gamma
        self.iters = iters
        self.sigma = sigma
        self.variant = variant
        self.seed = seed
        self.rel_tol = rel_tol
        self.init_scale = init_scale

    def _config(self) -> SolverConfig:
        return SolverConfig(
            k=self.k,
            rho=self.rho,
            beta=self.beta,
            gamma=self.gamma,
            max_iters=self.iters,
            sigma=self.sigma,
            seed=self.seed,
            variant=self.variant,
            rel_tol=self.rel_tol,
            init_scale=self.init_scale,
        )

    def fit(self, graph: HeteroGraph, y=None) -> "RelationSubspaceAligner":
        require_valid(graph)
        state, report = run_alignment(graph, self._config())
        self.graph_ = graph
        self.state_ = state
        self.report_ = report
        self.embeddings_ = dict(state.latent)
        return self

    def transform(self, graph: HeteroGraph | None = None) -> dict[str, np.ndarray]:
        if not hasattr(self, "embeddings_"):
            raise NotFittedError("this aligner is not fitted yet; call fit first")
        if graph is not None and graph is not self.graph_:
            raise ValueError("transductive aligner: transform only the graph passed to fit")
        return self.embeddings_

    def fit_transform(self, graph: HeteroGraph, y=None) -> dict[str, np.ndarray]:
        return self.fit(graph).transform()


class BaselineAligner(BaseEstimator):
    """Per-type global projection baseline (truncated SVD or PCA).

    Projects each node type's features independently to `target_dim`
    columns; relation structure is never read.
    """

    def __init__(self, method: str = "svd", target_dim: int = 50):
        self.method = method
        self.target_dim = target_dim

    def fit(self, graph: HeteroGraph, y=None) -> "BaselineAligner":
        cfg = BaselineConfig(method=self.method, target_dim=self.target_dim)
        self.graph_ = graph
        self.embeddings_ = align_features(graph, cfg)
        return self

    def transform(self, graph: HeteroGraph | None = None) -> dict[str, np.ndarray]:
        if not hasattr(self, "embeddings_"):
            raise NotFittedError("this aligner is not fitted yet; call fit first")
        if graph is not None and graph is not self.graph_:
            raise ValueError("transductive aligner: transform only the graph passed to fit")
        return self.embeddings_

    def fit_transform(self, graph: HeteroGraph, y=None) -> dict[str, np.ndarray]:
        return self.fit(graph).transform()

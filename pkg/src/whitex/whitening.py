"""PCA whitening of embedding matrices.

Fits an invertible linear map W together with the data mean so that
``W @ (x - mean)`` has zero mean and identity covariance on the fit set.
Highly correlated feature columns are replaced with seeded Gaussian noise
before the covariance is estimated, which keeps W invertible.
"""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from whitex.exceptions import NumericalError, ValidationError
from whitex.validation import check_dim, check_matrix

__all__ = [
    "WhiteningTransformer",
    "compute_mean_and_center",
    "compute_covariance",
    "prune_correlated_features",
]


def compute_mean_and_center(x) -> tuple[np.ndarray, np.ndarray]:
    """Return the per-feature mean and the mean-centered copy of ``x``.

    Args:
        x: (n_samples, n_features) matrix; a 1-D vector counts as one sample.

    Returns:
        (mean, centered) where ``centered[i] = x[i] - mean``.
    """
    x = check_matrix(x)
    mean = x.mean(axis=0)
    return mean, x - mean


def compute_covariance(centered) -> np.ndarray:
    """Empirical covariance of pre-centered rows, with divisor N (not N-1).

    The result is symmetrized explicitly so downstream eigendecomposition
    sees an exactly symmetric matrix regardless of accumulated rounding.
    """
    centered = check_matrix(centered, name="centered")
    n = centered.shape[0]
    sigma = (centered.T @ centered) / n
    return (sigma + sigma.T) / 2.0


def prune_correlated_features(
    x,
    tau: float = 0.999,
    seed: int = 0,
    noise_variance: float = 0.1,
) -> tuple[np.ndarray, list[int]]:
    """Replace feature columns that are too correlated with noise.

    The Pearson correlation is computed once on the original columns. For
    every pair (i, j) with i < j and |corr| > tau, the higher-indexed column
    j is replaced by i.i.d. draws from N(0, noise_variance). Zero-variance
    columns (correlation undefined) are replaced as well, with a warning.

    Args:
        x: (n_samples, n_features) matrix.
        tau: correlation threshold in (0, 1].
        seed: seed for the replacement-noise generator.
        noise_variance: variance of the replacement noise.

    Returns:
        (pruned, dropped) where ``pruned`` is a copy of ``x`` with the
        flagged columns replaced and ``dropped`` lists their indices in
        ascending order. Deterministic for a fixed seed.
    """
    x = check_matrix(x)
    if not 0.0 < tau <= 1.0:
        raise ValidationError(f"tau must be in (0, 1], got {tau}")
    if noise_variance <= 0.0:
        raise ValidationError(f"noise_variance must be > 0, got {noise_variance}")

    n, d = x.shape
    centered = x - x.mean(axis=0)
    std = np.sqrt(np.mean(centered**2, axis=0))
    zero_var = np.flatnonzero(std == 0.0)
    if zero_var.size:
        warnings.warn(
            f"columns {zero_var.tolist()} have zero variance; "
            "replacing them with noise",
            RuntimeWarning,
            stacklevel=2,
        )

    dropped_mask = np.zeros(d, dtype=bool)
    dropped_mask[zero_var] = True

    ok = std > 0.0
    if np.count_nonzero(ok) >= 2 and n >= 2:
        safe_std = np.where(ok, std, 1.0)
        corr = (centered.T @ centered) / n / np.outer(safe_std, safe_std)
        corr[~ok, :] = 0.0
        corr[:, ~ok] = 0.0
        # pair (i, j), i < j, over threshold: the higher index j is replaced
        over = np.triu(np.abs(corr) > tau, k=1)
        dropped_mask |= over.any(axis=0)

    dropped = np.flatnonzero(dropped_mask)
    pruned = x.copy()
    if dropped.size:
        rng = np.random.default_rng(seed)
        pruned[:, dropped] = rng.normal(
            0.0, np.sqrt(noise_variance), size=(n, dropped.size)
        )
    return pruned, dropped.tolist()


class WhiteningTransformer(TransformerMixin, BaseEstimator):
    """Whitens embeddings via the eigendecomposition of their covariance.

    ``fit`` prunes over-correlated columns, centers the data, and
    diagonalizes the covariance ``sigma = V diag(lam) V^T``. The forward map
    is ``y = diag(lam)^(-1/2) V^T (x - mean)`` and the inverse map is
    ``x = V diag(lam)^(1/2) y + mean``. Eigenpairs are ordered by descending
    eigenvalue and each eigenvector's sign is fixed so its largest-magnitude
    component is positive, making the fit deterministic.

    Parameters:
        tau: correlation threshold for pruning, in (0, 1].
        seed: seed for the pruning-noise generator.
        noise_variance: variance of the pruning replacement noise.
        eig_floor: relative floor; eigenvalues below ``eig_floor * lam_max``
            are clamped up to it before inversion.

    Attributes (after fit):
        mean_: (d,) per-feature mean of the pruned fit data.
        w_: (d, d) whitening matrix.
        w_inv_: (d, d) inverse whitening matrix.
        eigenvalues_: (d,) clamped covariance eigenvalues, descending.
        covariance_: (d, d) covariance of the pruned, centered fit data.
        dropped_features_: indices of columns replaced during pruning.
        clamped_eigenvalues_: indices (in descending-eigenvalue order) of
            eigenvalues that were raised to the floor.
        n_features_in_: feature dimension d.
        n_fit_samples_: number of fit samples N.
    """

    def __init__(
        self,
        tau: float = 0.999,
        seed: int = 0,
        noise_variance: float = 0.1,
        eig_floor: float = 1e-10,
    ):
        self.tau = tau
        self.seed = seed
        self.noise_variance = noise_variance
        self.eig_floor = eig_floor

    def fit(self, X, y=None):
        """Fit the whitening transform on rows of ``X``.

        Raises:
            ValidationError: fewer than 2 samples or invalid parameters.
            NumericalError: eigendecomposition failure or a numerically
                non-invertible result.
        """
        X = check_matrix(X)
        if X.shape[0] < 2:
            raise ValidationError(
                f"need at least 2 samples to fit, got {X.shape[0]}"
            )
        if self.eig_floor <= 0.0:
            raise ValidationError(f"eig_floor must be > 0, got {self.eig_floor}")

        pruned, dropped = prune_correlated_features(
            X, tau=self.tau, seed=self.seed, noise_variance=self.noise_variance
        )
        mean, centered = compute_mean_and_center(pruned)
        sigma = compute_covariance(centered)

        try:
            lam, vecs = np.linalg.eigh(sigma)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"eigendecomposition failed: {exc}") from exc

        order = np.argsort(lam)[::-1]
        lam = lam[order]
        vecs = vecs[:, order]

        # fix the sign gauge: largest-magnitude component positive
        flip = vecs[np.argmax(np.abs(vecs), axis=0), np.arange(vecs.shape[1])] < 0
        vecs[:, flip] *= -1.0

        lam_max = lam[0]
        if not lam_max > 0.0:
            raise NumericalError(
                "covariance has no positive eigenvalue; data is degenerate"
            )
        floor = self.eig_floor * lam_max
        clamped = np.flatnonzero(lam < floor)
        lam = np.maximum(lam, floor)

        inv_sqrt = 1.0 / np.sqrt(lam)
        w = inv_sqrt[:, None] * vecs.T
        w_inv = vecs * np.sqrt(lam)[None, :]

        residual = np.max(np.abs(w @ w_inv - np.eye(X.shape[1])))
        if residual > 1e-8:
            raise NumericalError(
                f"w @ w_inv deviates from identity by {residual:.3e}"
            )

        self.mean_ = mean
        self.w_ = w
        self.w_inv_ = w_inv
        self.eigenvalues_ = lam
        self.covariance_ = sigma
        self.dropped_features_ = dropped
        self.clamped_eigenvalues_ = clamped.tolist()
        self.n_features_in_ = X.shape[1]
        self.n_fit_samples_ = X.shape[0]
        return self

    def transform(self, X) -> np.ndarray:
        """Whiten rows of ``X``: each row maps to ``w_ @ (row - mean_)``."""
        check_is_fitted(self)
        X = check_matrix(X)
        check_dim(X, self.n_features_in_)
        return (X - self.mean_) @ self.w_.T

    def inverse_transform(self, Y) -> np.ndarray:
        """Map whitened rows back: each row maps to ``w_inv_ @ row + mean_``."""
        check_is_fitted(self)
        Y = check_matrix(Y, name="Y")
        check_dim(Y, self.n_features_in_, name="Y")
        return Y @ self.w_inv_.T + self.mean_

    def score_samples(self, X) -> np.ndarray:
        """Gaussian log-likelihood of each row in the whitened space."""
        from whitex.likelihood import batch_scores

        return np.array([s.log_likelihood for s in batch_scores(self, X)])

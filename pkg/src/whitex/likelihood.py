"""Log-likelihood surrogates and chi-distribution norm diagnostics.

A whitened embedding is modeled as a d-dimensional standard normal vector,
so its log-likelihood is ``-0.5 * (d * log(2*pi) + ||y||^2)`` and the
population of norms follows the chi distribution with d degrees of freedom.
Everything is evaluated in the log domain; the raw density underflows
float64 around d = 300 and is never exposed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from whitex.exceptions import DomainError, ValidationError
from whitex.validation import check_dim, check_matrix, check_vector

__all__ = [
    "LikelihoodScore",
    "ChiSummary",
    "log_likelihood",
    "norm_from_loglik",
    "chi_log_pdf",
    "chi_mean_std",
    "chi_summary",
    "normalize_to_sqrt_d",
    "batch_scores",
]

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class LikelihoodScore:
    """Log-likelihood and Euclidean norm of one whitened embedding."""

    log_likelihood: float
    norm: float
    dim: int


@dataclass(frozen=True)
class ChiSummary:
    """Empirical vs. theoretical norm statistics under the chi model."""

    dim: int
    theoretical_mean: float
    theoretical_std: float
    empirical_mean: float
    empirical_std: float
    relative_deviation_mean: float
    relative_deviation_std: float


def log_likelihood(y) -> LikelihoodScore:
    """Standard-normal log-likelihood of a whitened vector.

    Returns ``-0.5 * (d * log(2*pi) + ||y||^2)`` together with ``||y||``.
    """
    y = check_vector(y)
    d = y.size
    norm = float(np.linalg.norm(y))
    ll = -0.5 * (d * LOG_2PI + norm * norm)
    return LikelihoodScore(log_likelihood=ll, norm=norm, dim=d)


def norm_from_loglik(l: float, d: int) -> float:
    """Invert the log-likelihood back to the whitened norm.

    Solves ``l = -0.5 * (d * log(2*pi) + s^2)`` for ``s >= 0``.

    Raises:
        DomainError: if ``l`` exceeds the d-dimensional maximum
            ``-0.5 * d * log(2*pi)`` (negative radicand).
    """
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    radicand = -2.0 * l - d * LOG_2PI
    if radicand < 0.0:
        raise DomainError(
            f"log-likelihood {l} exceeds the maximum {-0.5 * d * LOG_2PI} "
            f"attainable in dimension {d}"
        )
    return math.sqrt(radicand)


def chi_log_pdf(s: float, d: int) -> float:
    """Log density of the chi distribution with ``d`` degrees of freedom.

    ``C(d) + (d - 1) * log(s) - s^2 / 2`` with the normalizer
    ``C(d) = -((d/2 - 1) * log(2) + lgamma(d/2))`` evaluated via the
    log-Gamma function (the raw Gamma overflows beyond d ~ 340). This is
    the density whose d=2 case is the Rayleigh distribution, whose mode is
    ``sqrt(d - 1)``, and which integrates to one.
    """
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    if not s > 0.0:
        raise DomainError(f"s must be > 0, got {s}")
    c = -((d / 2.0 - 1.0) * math.log(2.0) + math.lgamma(d / 2.0))
    return c + (d - 1.0) * math.log(s) - 0.5 * s * s


def chi_mean_std(d: int) -> tuple[float, float]:
    """Mean and standard deviation of the chi distribution.

    ``mean = sqrt(2) * Gamma((d+1)/2) / Gamma(d/2)`` computed through
    log-Gamma differences, and ``std = sqrt(d - mean^2)``; the identity
    ``mean^2 + std^2 = d`` holds by construction. For large d the mean
    approaches ``sqrt(d - 1/2)``.
    """
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    mean = math.sqrt(2.0) * math.exp(math.lgamma((d + 1) / 2.0) - math.lgamma(d / 2.0))
    std = math.sqrt(d - mean * mean)
    return mean, std


def chi_summary(norms, d: int) -> ChiSummary:
    """Compare an observed norm population against the chi model.

    Empirical mean/std use divisor N. Relative deviations are
    ``|empirical - theoretical| / theoretical``, as fractions.
    """
    norms = check_vector(norms, name="norms")
    if norms.size < 2:
        raise ValidationError(f"need at least 2 norms, got {norms.size}")
    if np.any(norms < 0):
        raise ValidationError("norms must be nonnegative")
    t_mean, t_std = chi_mean_std(d)
    e_mean = float(np.mean(norms))
    e_std = float(np.std(norms))
    return ChiSummary(
        dim=d,
        theoretical_mean=t_mean,
        theoretical_std=t_std,
        empirical_mean=e_mean,
        empirical_std=e_std,
        relative_deviation_mean=abs(e_mean - t_mean) / t_mean,
        relative_deviation_std=abs(e_std - t_std) / t_std,
    )


def normalize_to_sqrt_d(y) -> np.ndarray:
    """Rescale a vector to the most probable chi norm, sqrt(d)."""
    y = check_vector(y)
    norm = float(np.linalg.norm(y))
    if norm == 0.0:
        raise DomainError("cannot normalize the zero vector")
    return y * (math.sqrt(y.size) / norm)


def batch_scores(model, x) -> list[LikelihoodScore]:
    """Whiten rows of ``x`` with ``model`` and score each one.

    Row order is preserved.
    """
    x = check_matrix(x)
    check_dim(x, model.n_features_in_)
    whitened = model.transform(x)
    return [log_likelihood(row) for row in whitened]

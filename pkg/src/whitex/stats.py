"""Statistical diagnostics for whitened embedding spaces.

Normality testing (Anderson-Darling and D'Agostino-Pearson, run as a
grouped battery over features), a diagonality score for covariance
matrices, pairwise cosine-similarity statistics, ROC AUC, Pearson
correlation, and histogram export.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc
from scipy.stats import rankdata

from whitex.exceptions import DegenerateSampleError, DomainError, ValidationError
from whitex.validation import check_matrix, check_square_matrix, check_vector

__all__ = [
    "NormalityReport",
    "SeparationResult",
    "HistogramSpec",
    "anderson_darling",
    "dagostino_pearson",
    "normality_battery",
    "diagonal_score",
    "pairwise_cosine_stats",
    "auc",
    "pearson_correlation",
    "histogram",
]

AD_THRESHOLD = 0.752  # 5% critical value; lower statistics pass
DP_PVALUE_THRESHOLD = 0.05  # higher p-values pass
_MIN_TEST_SAMPLES = 8
_CDF_CLAMP = 1e-15


@dataclass(frozen=True)
class NormalityReport:
    """Per-feature normality statistics, averaged over sample groups."""

    ad_stat: np.ndarray  # (d,) average Anderson-Darling A^2 per feature
    dp_stat: np.ndarray  # (d,) average D'Agostino-Pearson K^2 per feature
    dp_pvalue: np.ndarray  # (d,) average D'Agostino-Pearson p-value per feature
    avg_ad: float
    avg_dp_pvalue: float
    pct_normal_ad: float  # % of features with average A^2 below threshold
    pct_normal_dp: float  # % of features with average p above threshold
    group_size: int
    n_groups: int


@dataclass(frozen=True)
class SeparationResult:
    """ROC AUC between two score populations."""

    auc: float
    n_positive: int
    n_negative: int


@dataclass(frozen=True)
class HistogramSpec:
    """Equal-width histogram with explicit bin edges."""

    bin_edges: np.ndarray  # (n_bins + 1,)
    counts: np.ndarray  # (n_bins,) ints; last bin is right-closed

    def rows(self) -> list[tuple[float, float, int]]:
        """(bin_lo, bin_hi, count) triples, one per bin."""
        return [
            (float(self.bin_edges[i]), float(self.bin_edges[i + 1]), int(c))
            for i, c in enumerate(self.counts)
        ]

    def to_json_obj(self) -> list[dict]:
        return [
            {"bin_lo": lo, "bin_hi": hi, "count": count}
            for lo, hi, count in self.rows()
        ]


def _standard_normal_cdf(x: np.ndarray) -> np.ndarray:
    # erfc-based evaluation keeps absolute error below ~1e-15 in the tails,
    # which matters because the A^2 weighting amplifies CDF error there.
    return 0.5 * erfc(-x / math.sqrt(2.0))


def _check_test_columns(x: np.ndarray) -> None:
    n = x.shape[0]
    if n < _MIN_TEST_SAMPLES:
        raise ValidationError(
            f"need at least {_MIN_TEST_SAMPLES} samples, got {n}"
        )
    degenerate = np.flatnonzero(x.std(axis=0) == 0.0)
    if degenerate.size:
        raise DegenerateSampleError(
            f"zero-variance sample (feature {degenerate[0]}): "
            "normality statistic undefined"
        )


def _anderson_darling_columns(x: np.ndarray) -> np.ndarray:
    """A^2 per column of an (n, k) matrix."""
    n = x.shape[0]
    w = np.sort((x - x.mean(axis=0)) / x.std(axis=0, ddof=1), axis=0)
    z = np.clip(_standard_normal_cdf(w), _CDF_CLAMP, 1.0 - _CDF_CLAMP)
    i = np.arange(1, n + 1)[:, None]
    s = np.sum((2 * i - 1) * (np.log(z) + np.log(1.0 - z[::-1])), axis=0)
    return -n - s / n


def _dagostino_pearson_columns(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(K^2, p-value) per column of an (n, k) matrix."""
    n = x.shape[0]
    c = x - x.mean(axis=0)
    m2 = np.mean(c**2, axis=0)
    g1 = np.mean(c**3, axis=0) / m2**1.5
    g2 = np.mean(c**4, axis=0) / m2**2
    z1 = g1 / math.sqrt(6.0 / n)
    z2 = (g2 - 3.0) / math.sqrt(24.0 / n)
    k2 = z1**2 + z2**2
    return k2, np.exp(-k2 / 2.0)


def anderson_darling(sample) -> float:
    """Anderson-Darling A^2 of a sample against the fitted normal.

    The sample is standardized by its own mean and std (divisor n-1),
    sorted, and scored against the standard normal CDF; CDF values are
    clamped away from {0, 1} before taking logs. No finite-sample
    correction is applied. Values below 0.752 are conventionally normal.

    Raises:
        ValidationError: fewer than 8 observations.
        DegenerateSampleError: zero sample variance.
    """
    sample = check_vector(sample, name="sample")
    col = sample[:, None]
    _check_test_columns(col)
    return float(_anderson_darling_columns(col)[0])


def dagostino_pearson(sample) -> tuple[float, float]:
    """D'Agostino-Pearson omnibus statistic K^2 and its p-value.

    Standardized skewness ``z1 = g1 / sqrt(6/n)`` and non-excess kurtosis
    ``z2 = (g2 - 3) / sqrt(24/n)`` combine into ``K^2 = z1^2 + z2^2``; the
    p-value is the chi-square(2) survival function ``exp(-K^2 / 2)``.
    Samples with p above 0.05 are conventionally normal.
    """
    sample = check_vector(sample, name="sample")
    col = sample[:, None]
    _check_test_columns(col)
    k2, p = _dagostino_pearson_columns(col)
    return float(k2[0]), float(p[0])


def normality_battery(y, group_size: int = 250) -> NormalityReport:
    """Run both normality tests per feature over contiguous sample groups.

    Rows are split in input order into ``floor(N / group_size)`` groups
    (the remainder is discarded); each feature is tested within each group
    and the per-feature statistics are averaged over groups. Pass
    percentages are computed on those averaged statistics.
    """
    y = check_matrix(y, name="y")
    if group_size < _MIN_TEST_SAMPLES:
        raise ValidationError(f"group_size must be >= {_MIN_TEST_SAMPLES}")
    n, d = y.shape
    n_groups = n // group_size
    if n_groups < 2:
        raise ValidationError(
            f"need at least {2 * group_size} samples for group_size "
            f"{group_size}, got {n}"
        )

    ad = np.empty((n_groups, d))
    k2 = np.empty((n_groups, d))
    pv = np.empty((n_groups, d))
    for g in range(n_groups):
        block = y[g * group_size : (g + 1) * group_size]
        _check_test_columns(block)
        ad[g] = _anderson_darling_columns(block)
        k2[g], pv[g] = _dagostino_pearson_columns(block)

    avg_ad = ad.mean(axis=0)
    avg_k2 = k2.mean(axis=0)
    avg_pv = pv.mean(axis=0)
    return NormalityReport(
        ad_stat=avg_ad,
        dp_stat=avg_k2,
        dp_pvalue=avg_pv,
        avg_ad=float(avg_ad.mean()),
        avg_dp_pvalue=float(avg_pv.mean()),
        pct_normal_ad=float(np.mean(avg_ad < AD_THRESHOLD) * 100.0),
        pct_normal_dp=float(np.mean(avg_pv > DP_PVALUE_THRESHOLD) * 100.0),
        group_size=group_size,
        n_groups=n_groups,
    )


def diagonal_score(m) -> float:
    """How close a square matrix is to diagonal, in [0, 1].

    Ratio of the absolute diagonal mass to the total absolute mass;
    exactly 1 iff every off-diagonal entry is zero.
    """
    m = check_square_matrix(m)
    total = float(np.sum(np.abs(m)))
    if total == 0.0:
        raise DomainError("diagonal score undefined for the all-zero matrix")
    return float(np.sum(np.abs(np.diag(m)))) / total


def pairwise_cosine_stats(
    x,
    max_pairs: int = 20_000_000,
    n_bins: int = 50,
    seed: int = 0,
) -> tuple[float, float, HistogramSpec]:
    """Cosine-similarity statistics over unordered row pairs.

    All n*(n-1)/2 pairs are used when they fit within ``max_pairs``;
    otherwise ``max_pairs`` pairs are drawn uniformly (with replacement)
    by a generator seeded with ``seed``. Returns the mean, the std
    (divisor N), and a histogram of the similarities.

    Raises:
        ValidationError: fewer than 2 rows, or any zero-norm row.
    """
    x = check_matrix(x)
    n = x.shape[0]
    if n < 2:
        raise ValidationError(f"need at least 2 rows, got {n}")
    norms = np.linalg.norm(x, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ValidationError(f"row {zero[0]} has zero norm")
    unit = x / norms[:, None]

    n_pairs = n * (n - 1) // 2
    if n_pairs <= max_pairs:
        sims = np.empty(n_pairs)
        pos = 0
        block = max(1, min(n, 8_000_000 // max(n, 1)))
        for start in range(0, n, block):
            stop = min(start + block, n)
            gram = unit[start:stop] @ unit.T
            for i in range(start, stop):
                row = gram[i - start, i + 1 :]
                sims[pos : pos + row.size] = row
                pos += row.size
    else:
        rng = np.random.default_rng(seed)
        i = rng.integers(0, n, size=max_pairs)
        j = rng.integers(0, n, size=max_pairs)
        while True:
            clash = i == j
            if not clash.any():
                break
            j[clash] = rng.integers(0, n, size=int(clash.sum()))
        sims = np.sum(unit[i] * unit[j], axis=1)

    mean = float(np.mean(sims))
    std = float(np.std(sims))
    return mean, std, histogram(sims, n_bins=n_bins)


def auc(positives, negatives) -> SeparationResult:
    """Area under the ROC curve separating two score populations.

    Computed as the Mann-Whitney statistic: the fraction of
    (positive, negative) pairs where the positive scores higher, ties
    counting one half. Equivalent to integrating TPR over FPR.
    """
    pos = check_vector(positives, name="positives")
    neg = check_vector(negatives, name="negatives")
    ranks = rankdata(np.concatenate([pos, neg]), method="average")
    n_pos, n_neg = pos.size, neg.size
    u = float(ranks[:n_pos].sum()) - n_pos * (n_pos + 1) / 2.0
    return SeparationResult(
        auc=u / (n_pos * n_neg), n_positive=n_pos, n_negative=n_neg
    )


def pearson_correlation(a, b) -> float:
    """Pearson product-moment correlation of two equal-length sequences.

    Raises:
        ValidationError: length mismatch or fewer than 2 points.
        DegenerateSampleError: either sequence is constant.
    """
    a = check_vector(a, name="a")
    b = check_vector(b, name="b")
    if a.size != b.size:
        raise ValidationError(f"length mismatch: {a.size} vs {b.size}")
    if a.size < 2:
        raise ValidationError("need at least 2 points")
    da = a - a.mean()
    db = b - b.mean()
    denom = math.sqrt(float(np.sum(da * da)) * float(np.sum(db * db)))
    if denom == 0.0:
        raise DegenerateSampleError("correlation undefined for constant input")
    return float(np.sum(da * db)) / denom


def histogram(values, n_bins: int = 50, value_range: tuple[float, float] | None = None) -> HistogramSpec:
    """Equal-width histogram of ``values``.

    Bins are half-open with a right-closed last bin; counts sum to the
    number of values inside the range. The range defaults to the observed
    (min, max).
    """
    values = check_vector(values, name="values")
    if n_bins < 1:
        raise ValidationError(f"n_bins must be >= 1, got {n_bins}")
    if value_range is not None:
        lo, hi = float(value_range[0]), float(value_range[1])
        if lo >= hi:
            raise ValidationError(f"invalid range: lo {lo} >= hi {hi}")
    counts, edges = np.histogram(values, bins=n_bins, range=value_range)
    return HistogramSpec(bin_edges=edges, counts=counts)

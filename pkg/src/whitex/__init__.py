"""whitex: whitening transforms for embedding spaces.

Fits an invertible whitening map on an embedding matrix, scores
log-likelihoods via norms in the whitened space, runs normality and
uniformity diagnostics, and interpolates embeddings along great circles.
"""

from whitex.exceptions import (
    DegenerateSampleError,
    DomainError,
    FormatError,
    GeometryError,
    IntegrityError,
    NumericalError,
    ParseError,
    ValidationError,
    WhitexError,
)
from whitex.geometry import (
    SlerpPath,
    angle_between,
    full_circle_slerp,
    opposite_embedding,
    slerp,
)
from whitex.image_metrics import entropy, load_image, saturation_pct, total_variation
from whitex.io import load_model, read_embeddings, save_model, write_embeddings
from whitex.likelihood import (
    ChiSummary,
    LikelihoodScore,
    batch_scores,
    chi_log_pdf,
    chi_mean_std,
    chi_summary,
    log_likelihood,
    norm_from_loglik,
    normalize_to_sqrt_d,
)
from whitex.stats import (
    HistogramSpec,
    NormalityReport,
    SeparationResult,
    anderson_darling,
    auc,
    dagostino_pearson,
    diagonal_score,
    histogram,
    normality_battery,
    pairwise_cosine_stats,
    pearson_correlation,
)
from whitex.whitening import (
    WhiteningTransformer,
    compute_covariance,
    compute_mean_and_center,
    prune_correlated_features,
)

__version__ = "0.1.0"

__all__ = [
    "WhiteningTransformer",
    "compute_mean_and_center",
    "compute_covariance",
    "prune_correlated_features",
    "read_embeddings",
    "write_embeddings",
    "save_model",
    "load_model",
    "LikelihoodScore",
    "ChiSummary",
    "log_likelihood",
    "norm_from_loglik",
    "chi_log_pdf",
    "chi_mean_std",
    "chi_summary",
    "normalize_to_sqrt_d",
    "batch_scores",
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
    "SlerpPath",
    "angle_between",
    "slerp",
    "full_circle_slerp",
    "opposite_embedding",
    "total_variation",
    "entropy",
    "saturation_pct",
    "load_image",
    "WhitexError",
    "ValidationError",
    "FormatError",
    "ParseError",
    "IntegrityError",
    "DomainError",
    "DegenerateSampleError",
    "GeometryError",
    "NumericalError",
]

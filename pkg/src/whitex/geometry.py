"""Spherical interpolation between embeddings.

Great-circle interpolation (and extrapolation) between two vectors, the
full-circle sweep parameterized by degrees, and the 180-degree "opposite"
point, which is just the negated source and therefore independent of the
destination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from whitex.exceptions import DomainError, GeometryError
from whitex.validation import check_vector

__all__ = [
    "SlerpPath",
    "angle_between",
    "slerp",
    "full_circle_slerp",
    "opposite_embedding",
]

THETA_EPS = 1e-6  # radians; the slerp formula is singular at 0 and pi


@dataclass(frozen=True)
class SlerpPath:
    """Great-circle sweep: one embedding per interpolation angle."""

    degrees: np.ndarray  # (k,) strictly increasing angles in degrees
    points: np.ndarray  # (k, d) embedding at each angle
    source: np.ndarray  # (d,)
    destination: np.ndarray  # (d,)
    theta_rad: float  # angle between source and destination


def angle_between(a, b) -> float:
    """Angle in radians between two nonzero vectors, in [0, pi].

    The cosine similarity is clamped to [-1, 1] before arccos so that
    parallel vectors with rounding noise do not produce NaN.
    """
    a = check_vector(a, name="a")
    b = check_vector(b, name="b")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise DomainError("angle undefined for the zero vector")
    cos = float(np.dot(a, b)) / (na * nb)
    return math.acos(min(1.0, max(-1.0, cos)))


def _checked_theta(e1: np.ndarray, e2: np.ndarray) -> float:
    theta = angle_between(e1, e2)
    if theta <= THETA_EPS or theta >= math.pi - THETA_EPS:
        raise GeometryError(
            f"angle {theta:.3e} rad is too close to collinear; "
            "spherical interpolation is singular"
        )
    return theta


def slerp(e1, e2, t: float) -> np.ndarray:
    """Spherical linear interpolation between ``e1`` and ``e2``.

    ``sin((1-t)*theta)/sin(theta) * e1 + sin(t*theta)/sin(theta) * e2``
    where theta is the angle between the inputs. ``t`` may lie outside
    [0, 1] (extrapolation stays on the great circle for equal-norm
    inputs). Inputs are not normalized.

    Raises:
        GeometryError: inputs closer than 1e-6 rad to collinear.
    """
    e1 = check_vector(e1, name="e1")
    e2 = check_vector(e2, name="e2")
    theta = _checked_theta(e1, e2)
    sin_theta = math.sin(theta)
    return (
        math.sin((1.0 - t) * theta) * e1 + math.sin(t * theta) * e2
    ) / sin_theta


def full_circle_slerp(e1, e2, step_deg: float = 10.0) -> SlerpPath:
    """Sweep the full great circle in ``step_deg`` increments.

    Points are placed at angles 0, step, 2*step, ... up to the largest
    multiple of ``step_deg`` below 360; each is the interpolation with
    ``t = omega / theta`` (angles in radians). The 0-degree point is the
    source, and the 180-degree point (when on the grid) is the negated
    source regardless of the destination.
    """
    e1 = check_vector(e1, name="e1")
    e2 = check_vector(e2, name="e2")
    if not step_deg > 0.0:
        raise DomainError(f"step_deg must be > 0, got {step_deg}")
    theta = _checked_theta(e1, e2)

    n_steps = int(math.ceil(360.0 / step_deg)) + 1
    degrees = step_deg * np.arange(n_steps)
    degrees = degrees[degrees < 360.0]

    t = np.radians(degrees) / theta
    sin_theta = math.sin(theta)
    coeff1 = np.sin((1.0 - t) * theta) / sin_theta
    coeff2 = np.sin(t * theta) / sin_theta
    points = coeff1[:, None] * e1 + coeff2[:, None] * e2
    return SlerpPath(
        degrees=degrees,
        points=points,
        source=e1,
        destination=e2,
        theta_rad=theta,
    )


def opposite_embedding(e1) -> np.ndarray:
    """The 180-degree point of the full-circle sweep: the negated source."""
    e1 = check_vector(e1, name="e1")
    if float(np.linalg.norm(e1)) == 0.0:
        raise DomainError("opposite embedding undefined for the zero vector")
    return -e1

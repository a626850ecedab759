"""Pixel-domain statistics for comparing image populations.

Total variation, histogram entropy, and the fraction of near-saturated
pixels, each computed per channel on the 0-255 scale and averaged over
channels. Images arrive as H x W (grayscale) or H x W x C arrays with
C in {1, 3}, or as 8-bit PNG files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from whitex.exceptions import FormatError, ValidationError

__all__ = ["total_variation", "entropy", "saturation_pct", "load_image"]

SATURATION_LO = 2.55  # bottom 1% of the 0-255 range
SATURATION_HI = 252.45  # top 1% of the 0-255 range


def check_image(img) -> np.ndarray:
    """Coerce to a float64 H x W x C array with C in
    {1, 3} and values in [0, 255]."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3 or arr.shape[2] not in (1, 3):
        raise ValidationError(
            f"expected an H x W or H x W x C image with C in {{1, 3}}, "
            f"got shape {np.asarray(img).shape}"
        )
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValidationError(f"image has empty spatial dims: {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("image contains NaN or Inf")
    if arr.min() < 0.0 or arr.max() > 255.0:
        raise ValidationError(
            f"pixel values must lie in [0, 255], got "
            f"[{arr.min()}, {arr.max()}]"
        )
    return arr


def total_variation(img) -> float:
    """Mean absolute forward difference, horizontal plus vertical.

    Per channel: the mean of |img[:, x+1] - img[:, x]| over all defined
    horizontal differences plus the mean of the vertical analogue;
    channel values are averaged. Constant images score 0.

    Raises:
        ValidationError: images smaller than 2 x 2.
    """
    arr = check_image(img)
    h, w = arr.shape[:2]
    if h < 2 or w < 2:
        raise ValidationError(
            f"total variation needs height and width >= 2, got {h} x {w}"
        )
    dx = np.abs(np.diff(arr, axis=1)).mean(axis=(0, 1))
    dy = np.abs(np.diff(arr, axis=0)).mean(axis=(0, 1))
    return float(np.mean(dx + dy))


def entropy(img) -> float:
    """Shannon entropy in bits of the 256-bin intensity histogram.

    Intensities are floored to integers 0-255; channels are averaged.
    Ranges over [0, 8]: 0 for a constant image, 8 when all 256 values
    are equally represented.
    """
    arr = check_image(img)
    bits_per_channel = []
    for c in range(arr.shape[2]):
        counts = np.bincount(
            np.floor(arr[:, :, c]).astype(np.int64).ravel(), minlength=256
        )
        p = counts / counts.sum()
        p = p[p > 0]
        bits_per_channel.append(float(-np.sum(p * np.log2(p))))
    return float(np.mean(bits_per_channel))


def saturation_pct(img) -> float:
    """Percentage of pixels in the extreme 1% of the intensity range.

    A pixel counts when its value is below 2.55 or above 252.45;
    channel percentages are averaged.
    """
    arr = check_image(img)
    extreme = (arr < SATURATION_LO) | (arr > SATURATION_HI)
    return float(np.mean(extreme.mean(axis=(0, 1))) * 100.0)


def load_image(path) -> np.ndarray:
    """Load an image as H x W x C float64 in [0, 255].

    Accepts 8-bit grayscale or RGB PNG files, or NPY files holding an
    H x W or H x W x C array already in range. Other formats and bit
    depths are rejected.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".npy":
        return check_image(np.load(path, allow_pickle=False))
    if suffix != ".png":
        raise FormatError(
            f"{path}: unsupported image format {suffix!r}; "
            "use 8-bit PNG or NPY"
        )
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(path) as im:
            if im.format != "PNG":
                raise FormatError(f"{path}: not a PNG file (format {im.format})")
            if im.mode not in ("L", "RGB"):
                raise FormatError(
                    f"{path}: unsupported PNG mode {im.mode!r}; "
                    "only 8-bit L and RGB are read"
                )
            arr = np.asarray(im, dtype=np.float64)
    except UnidentifiedImageError as exc:
        raise FormatError(f"{path}: cannot decode image: {exc}") from exc
    return check_image(arr)

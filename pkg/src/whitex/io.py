"""Reading and writing embedding matrices and fitted whitening models.

Embedding matrices travel as NPY (version 1.0, little-endian float32/float64,
C order, at most 2 dims) or as numeric CSV with an optional single header
row. Fitted models are persisted as a zip bundle holding a JSON manifest and
the mean / W / W^-1 arrays as NPY payloads.
"""

from __future__ import annotations

import csv
import json
import os
import zipfile
from io import BytesIO
from pathlib import Path

import numpy as np
import numpy.lib.format as npy_format

from whitex.exceptions import FormatError, IntegrityError, ParseError, ValidationError
from whitex.validation import check_matrix
from whitex.whitening import WhiteningTransformer

__all__ = ["read_embeddings", "write_embeddings", "save_model", "load_model"]

BUNDLE_FORMAT_VERSION = 1
BUNDLE_MEMBERS = ("manifest.json", "mean.npy", "w.npy", "w_inv.npy")

_ALLOWED_DTYPES = (np.dtype("<f4"), np.dtype("<f8"))


def _infer_format(path, fmt: str | None) -> str:
    if fmt is not None:
        if fmt not in ("npy", "csv"):
            raise ValidationError(f"format must be 'npy' or 'csv', got {fmt!r}")
        return fmt
    suffix = Path(path).suffix.lower()
    if suffix == ".npy":
        return "npy"
    if suffix == ".csv":
        return "csv"
    raise ValidationError(
        f"cannot infer format from {path!r}; pass format='npy' or 'csv'"
    )


def _read_npy(fp) -> np.ndarray:
    try:
        version = npy_format.read_magic(fp)
    except ValueError as exc:
        raise FormatError(f"not an NPY file: {exc}") from exc
    if version != (1, 0):
        raise FormatError(f"unsupported NPY version {version}; only 1.0 is read")
    try:
        shape, fortran_order, dtype = npy_format.read_array_header_1_0(fp)
    except ValueError as exc:
        raise FormatError(f"malformed NPY header: {exc}") from exc
    if dtype not in _ALLOWED_DTYPES:
        raise FormatError(
            f"unsupported NPY dtype {dtype.str!r}; expected '<f4' or '<f8'"
        )
    if fortran_order:
        raise FormatError("fortran-order NPY arrays are not supported")
    if len(shape) not in (1, 2):
        raise FormatError(f"expected a 1-D or 2-D array, got shape {shape}")

    count = int(np.prod(shape, dtype=np.int64)) if shape else 0
    payload = fp.read(count * dtype.itemsize)
    if len(payload) != count * dtype.itemsize:
        raise FormatError(
            f"NPY payload truncated: expected {count * dtype.itemsize} bytes, "
            f"got {len(payload)}"
        )
    arr = np.frombuffer(payload, dtype=dtype).reshape(shape)
    return arr.astype(np.float64, copy=True)


def _write_npy(fp, arr: np.ndarray) -> None:
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    npy_format.write_array_header_1_0(
        fp, {"descr": "<f8", "fortran_order": False, "shape": arr.shape}
    )
    fp.write(arr.tobytes())


def _read_csv(fp, path) -> np.ndarray:
    rows: list[list[float]] = []
    reader = csv.reader(fp)
    for row_idx, row in enumerate(reader):
        if not row or (len(row) == 1 and row[0].strip() == ""):
            continue
        values = []
        for col_idx, cell in enumerate(row):
            try:
                values.append(float(cell))
            except ValueError:
                if row_idx == 0 and not rows:
                    values = None  # single header row: skip it
                    break
                raise ParseError(
                    f"{path}: non-numeric value {cell!r} at row {row_idx + 1}, "
                    f"column {col_idx + 1}"
                ) from None
        if values is None:
            continue
        if rows and len(values) != len(rows[0]):
            raise ParseError(
                f"{path}: row {row_idx + 1} has {len(values)} columns, "
                f"expected {len(rows[0])}"
            )
        rows.append(values)
    if not rows:
        raise FormatError(f"{path}: no numeric rows found")
    return np.array(rows, dtype=np.float64)


def read_embeddings(path, fmt: str | None = None) -> np.ndarray:
    """Read an embedding matrix from an NPY or CSV file.

    Args:
        path: file to read.
        fmt: 'npy' or 'csv'; inferred from the extension when omitted.

    Returns:
        (n_samples, dim) float64 matrix; 1-D input becomes a single row and
        float32 payloads are widened.

    Raises:
        FormatError / ParseError: malformed file.
        ValidationError: non-finite entries.
        OSError: unreadable path.
    """
    fmt = _infer_format(path, fmt)
    if fmt == "npy":
        with open(path, "rb") as fp:
            arr = _read_npy(fp)
    else:
        with open(path, "r", newline="") as fp:
            arr = _read_csv(fp, path)
    return check_matrix(arr, name=str(path))


def write_embeddings(m, path, fmt: str | None = None) -> None:
    """Write an embedding matrix as float64 NPY or CSV.

    NPY output round-trips bit-exactly through :func:`read_embeddings`;
    CSV cells use 17 significant digits, which also round-trips float64.
    """
    m = check_matrix(m)
    fmt = _infer_format(path, fmt)
    if fmt == "npy":
        with open(path, "wb") as fp:
            _write_npy(fp, m)
    else:
        with open(path, "w", newline="") as fp:
            writer = csv.writer(fp)
            for row in m:
                writer.writerow([format(v, ".17g") for v in row])


def _default_created_utc() -> str:
    # Reproducible by default: fit bundles must be byte-identical across
    # runs, so wall-clock time is never written. SOURCE_DATE_EPOCH (the
    # reproducible-builds convention) overrides the fixed epoch stamp.
    epoch = int(os.environ.get("SOURCE_DATE_EPOCH", "0"))
    from datetime import datetime, timezone

    return (
        datetime.fromtimestamp(epoch, tz=timezone.utc)
        .strftime("%Y-%m-%dT%H:%M:%SZ")
    )


def save_model(model: WhiteningTransformer, path, created_utc: str | None = None) -> None:
    """Persist a fitted model as a zip bundle.

    The bundle holds exactly manifest.json, mean.npy, w.npy and w_inv.npy.
    Zip member metadata is pinned so identical models serialize to
    byte-identical files.
    """
    if not hasattr(model, "w_"):
        raise ValidationError("model is not fitted")
    manifest = {
        "format_version": BUNDLE_FORMAT_VERSION,
        "dim": int(model.n_features_in_),
        "n_fit_samples": int(model.n_fit_samples_),
        "tau": float(model.tau),
        "noise_seed": int(model.seed),
        "noise_variance": float(model.noise_variance),
        "dropped_features": [int(i) for i in model.dropped_features_],
        "created_utc": created_utc or _default_created_utc(),
    }
    payloads = {
        "manifest.json": json.dumps(manifest, indent=2, sort_keys=True).encode(),
    }
    for name, arr in (("mean.npy", model.mean_), ("w.npy", model.w_), ("w_inv.npy", model.w_inv_)):
        buf = BytesIO()
        _write_npy(buf, arr)
        payloads[name] = buf.getvalue()

    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as zf:
        for name in BUNDLE_MEMBERS:
            info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
            zf.writestr(info, payloads[name])


def load_model(path) -> WhiteningTransformer:
    """Load a model bundle written by :func:`save_model`.

    All bundle invariants are re-verified: exact member set, manifest /
    array shape agreement, finite values, dropped indices in range, and
    ``w @ w_inv = I`` within 1e-8 max-abs.

    Raises:
        FormatError: not a zip archive or malformed members.
        IntegrityError: invariant violation.
    """
    try:
        zf = zipfile.ZipFile(path, "r")
    except (zipfile.BadZipFile, OSError) as exc:
        if isinstance(exc, zipfile.BadZipFile):
            raise FormatError(f"{path}: not a valid zip bundle: {exc}") from exc
        raise
    with zf:
        names = sorted(zf.namelist())
        if names != sorted(BUNDLE_MEMBERS):
            raise IntegrityError(
                f"{path}: bundle members {names} != expected {sorted(BUNDLE_MEMBERS)}"
            )
        try:
            manifest = json.loads(zf.read("manifest.json").decode())
        except (ValueError, UnicodeDecodeError) as exc:
            raise FormatError(f"{path}: malformed manifest.json: {exc}") from exc
        arrays = {}
        for name in ("mean.npy", "w.npy", "w_inv.npy"):
            arrays[name] = _read_npy(BytesIO(zf.read(name)))

    required = {
        "format_version", "dim", "n_fit_samples", "tau",
        "noise_seed", "noise_variance", "dropped_features", "created_utc",
    }
    missing = required - manifest.keys()
    if missing:
        raise IntegrityError(f"{path}: manifest missing fields {sorted(missing)}")
    if manifest["format_version"] != BUNDLE_FORMAT_VERSION:
        raise IntegrityError(
            f"{path}: unsupported bundle format_version {manifest['format_version']}"
        )

    dim = int(manifest["dim"])
    mean = arrays["mean.npy"].reshape(-1)
    w = arrays["w.npy"]
    w_inv = arrays["w_inv.npy"]
    if mean.shape != (dim,) or w.shape != (dim, dim) or w_inv.shape != (dim, dim):
        raise IntegrityError(
            f"{path}: array shapes {mean.shape}, {w.shape}, {w_inv.shape} "
            f"do not match manifest dim {dim}"
        )
    dropped = [int(i) for i in manifest["dropped_features"]]
    if any(i < 0 or i >= dim for i in dropped):
        raise IntegrityError(f"{path}: dropped_features indices out of [0, {dim})")
    residual = float(np.max(np.abs(w @ w_inv - np.eye(dim))))
    if residual > 1e-8:
        raise IntegrityError(
            f"{path}: w @ w_inv deviates from identity by {residual:.3e}"
        )

    model = WhiteningTransformer(
        tau=float(manifest["tau"]),
        seed=int(manifest["noise_seed"]),
        noise_variance=float(manifest["noise_variance"]),
    )
    model.mean_ = mean
    model.w_ = w
    model.w_inv_ = w_inv
    # lam = diag(w_inv^T w_inv); exact up to rounding since w_inv = V lam^(1/2)
    model.eigenvalues_ = np.sum(w_inv**2, axis=0)
    model.dropped_features_ = dropped
    model.clamped_eigenvalues_ = []
    model.n_features_in_ = dim
    model.n_fit_samples_ = int(manifest["n_fit_samples"])
    return model

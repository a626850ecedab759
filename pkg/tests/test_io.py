"""Embedding file round trips, format rejection, and model bundles."""

import json
import zipfile
from io import BytesIO

import numpy as np
import pytest

from whitex.exceptions import (
    FormatError,
    IntegrityError,
    ParseError,
    ValidationError,
)
from whitex.io import load_model, read_embeddings, save_model, write_embeddings
from whitex.whitening import WhiteningTransformer


@pytest.fixture
def fitted_model():
    rng = np.random.default_rng(7)
    x = rng.standard_normal((200, 8)) @ rng.standard_normal((8, 8))
    return WhiteningTransformer().fit(x)


class TestEmbeddingRoundTrips:
    def test_npy_round_trip_bit_exact(self, tmp_path):
        m = np.random.default_rng(0).standard_normal((5, 3))
        path = tmp_path / "m.npy"
        write_embeddings(m, path)
        back = read_embeddings(path)
        assert back.tobytes() == m.tobytes()

    def test_npy_known_values(self, tmp_path):
        m = np.array([[1.0, 2.0], [3.0, 4.0]])
        path = tmp_path / "m.npy"
        write_embeddings(m, path)
        np.testing.assert_array_equal(read_embeddings(path), m)

    def test_csv_known_values(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("1.0,2.0\n3.0,4.0\n")
        np.testing.assert_array_equal(
            read_embeddings(path), [[1.0, 2.0], [3.0, 4.0]]
        )

    def test_cross_format_equality(self, tmp_path):
        m = np.random.default_rng(1).standard_normal((4, 6))
        write_embeddings(m, tmp_path / "m.npy")
        write_embeddings(m, tmp_path / "m.csv")
        np.testing.assert_array_equal(
            read_embeddings(tmp_path / "m.npy"), read_embeddings(tmp_path / "m.csv")
        )

    def test_csv_round_trips_float64_exactly(self, tmp_path):
        m = np.random.default_rng(2).standard_normal((3, 3)) * 1e-7
        write_embeddings(m, tmp_path / "m.csv")
        assert read_embeddings(tmp_path / "m.csv").tobytes() == m.tobytes()

    def test_csv_optional_header_row(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("f0,f1\n1.5,2.5\n")
        np.testing.assert_array_equal(read_embeddings(path), [[1.5, 2.5]])

    def test_float32_widened(self, tmp_path):
        path = tmp_path / "m.npy"
        np.save(path, np.array([[1.5, 2.5]], dtype=np.float32))
        out = read_embeddings(path)
        assert out.dtype == np.float64
        np.testing.assert_array_equal(out, [[1.5, 2.5]])

    def test_1d_becomes_single_row(self, tmp_path):
        path = tmp_path / "v.npy"
        np.save(path, np.arange(4.0))
        assert read_embeddings(path).shape == (1, 4)

    def test_written_vector_has_2d_header(self, tmp_path):
        path = tmp_path / "v.npy"
        write_embeddings(np.arange(5.0), path)
        header = path.read_bytes()[:128].decode("latin1")
        assert "(1, 5)" in header


class TestReadRejections:
    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.npy"
        good = BytesIO()
        np.save(good, np.zeros((2, 2)))
        data = bytearray(good.getvalue())
        data[0] ^= 0xFF
        path.write_bytes(bytes(data))
        with pytest.raises(FormatError):
            read_embeddings(path)

    def test_unsupported_npy_version(self, tmp_path):
        path = tmp_path / "v2.npy"
        good = BytesIO()
        np.save(good, np.zeros((2, 2)))
        data = bytearray(good.getvalue())
        data[6] = 2  # major version byte
        path.write_bytes(bytes(data))
        with pytest.raises(FormatError, match="version"):
            read_embeddings(path)

    def test_integer_dtype_rejected(self, tmp_path):
        path = tmp_path / "i.npy"
        np.save(path, np.arange(4).reshape(2, 2))
        with pytest.raises(FormatError, match="dtype"):
            read_embeddings(path)

    def test_fortran_order_rejected(self, tmp_path):
        path = tmp_path / "f.npy"
        np.save(path, np.asfortranarray(np.random.default_rng(0).standard_normal((3, 3))))
        with pytest.raises(FormatError, match="fortran"):
            read_embeddings(path)

    def test_3d_rejected(self, tmp_path):
        path = tmp_path / "t.npy"
        np.save(path, np.zeros((2, 2, 2)))
        with pytest.raises(FormatError):
            read_embeddings(path)

    def test_truncated_payload(self, tmp_path):
        good = BytesIO()
        np.save(good, np.zeros((4, 4)))
        path = tmp_path / "trunc.npy"
        path.write_bytes(good.getvalue()[:-8])
        with pytest.raises(FormatError, match="truncated"):
            read_embeddings(path)

    def test_nan_rejected(self, tmp_path):
        path = tmp_path / "nan.npy"
        np.save(path, np.array([[1.0, np.nan]]))
        with pytest.raises(ValidationError, match="NaN"):
            read_embeddings(path)

    def test_csv_parse_error_names_row_and_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1.0,2.0\n3.0,oops\n")
        with pytest.raises(ParseError, match=r"row 2, column 2"):
            read_embeddings(path)

    def test_csv_ragged_rows(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("1.0,2.0\n3.0\n")
        with pytest.raises(ParseError):
            read_embeddings(path)

    def test_unknown_extension(self, tmp_path):
        with pytest.raises(ValidationError):
            read_embeddings(tmp_path / "data.bin")


class TestWriteErrors:
    def test_unwritable_path(self, tmp_path):
        # parent is a file, not a directory (permission bits are useless
        # under root, which this suite may run as)
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        with pytest.raises(OSError):
            write_embeddings(np.zeros((1, 1)), blocker / "m.npy")

    def test_missing_directory(self, tmp_path):
        with pytest.raises(OSError):
            write_embeddings(np.zeros((1, 1)), tmp_path / "nope" / "m.npy")


class TestModelBundles:
    def test_save_load_whitening_identical(self, fitted_model, tmp_path):
        path = tmp_path / "model.zip"
        save_model(fitted_model, path)
        loaded = load_model(path)
        x = np.random.default_rng(3).standard_normal((10, 8))
        np.testing.assert_array_equal(
            loaded.transform(x), fitted_model.transform(x)
        )
        assert loaded.n_features_in_ == fitted_model.n_features_in_
        assert loaded.dropped_features_ == fitted_model.dropped_features_

    def test_bundle_member_set(self, fitted_model, tmp_path):
        path = tmp_path / "model.zip"
        save_model(fitted_model, path)
        with zipfile.ZipFile(path) as zf:
            assert sorted(zf.namelist()) == [
                "manifest.json", "mean.npy", "w.npy", "w_inv.npy",
            ]
            manifest = json.loads(zf.read("manifest.json"))
        assert manifest["format_version"] == 1
        assert manifest["dim"] == 8
        assert manifest["n_fit_samples"] == 200
        assert manifest["tau"] == 0.999
        assert manifest["noise_seed"] == 0
        assert manifest["noise_variance"] == 0.1
        assert manifest["dropped_features"] == []
        assert "created_utc" in manifest

    def test_save_is_deterministic(self, fitted_model, tmp_path):
        save_model(fitted_model, tmp_path / "a.zip")
        save_model(fitted_model, tmp_path / "b.zip")
        assert (tmp_path / "a.zip").read_bytes() == (tmp_path / "b.zip").read_bytes()

    def test_unfitted_model_rejected(self, tmp_path):
        with pytest.raises(ValidationError, match="not fitted"):
            save_model(WhiteningTransformer(), tmp_path / "m.zip")

    def test_eigenvalues_recovered(self, fitted_model, tmp_path):
        path = tmp_path / "model.zip"
        save_model(fitted_model, path)
        loaded = load_model(path)
        np.testing.assert_allclose(
            loaded.eigenvalues_, fitted_model.eigenvalues_, rtol=1e-12
        )

    def _edit_bundle(self, src, dst, drop=None, replace=None, manifest_patch=None):
        with zipfile.ZipFile(src) as zf:
            members = {n: zf.read(n) for n in zf.namelist()}
        if drop:
            members.pop(drop)
        if replace:
            members.update(replace)
        if manifest_patch:
            manifest = json.loads(members["manifest.json"])
            manifest.update(manifest_patch)
            members["manifest.json"] = json.dumps(manifest).encode()
        with zipfile.ZipFile(dst, "w") as zf:
            for name, data in members.items():
                zf.writestr(name, data)

    def test_missing_member(self, fitted_model, tmp_path):
        save_model(fitted_model, tmp_path / "good.zip")
        self._edit_bundle(tmp_path / "good.zip", tmp_path / "bad.zip", drop="w_inv.npy")
        with pytest.raises(IntegrityError):
            load_model(tmp_path / "bad.zip")

    def test_extra_member(self, fitted_model, tmp_path):
        save_model(fitted_model, tmp_path / "good.zip")
        self._edit_bundle(
            tmp_path / "good.zip", tmp_path / "bad.zip",
            replace={"extra.txt": b"hello"},
        )
        with pytest.raises(IntegrityError):
            load_model(tmp_path / "bad.zip")

    def test_manifest_dim_mismatch(self, fitted_model, tmp_path):
        save_model(fitted_model, tmp_path / "good.zip")
        self._edit_bundle(
            tmp_path / "good.zip", tmp_path / "bad.zip", manifest_patch={"dim": 9}
        )
        with pytest.raises(IntegrityError, match="dim"):
            load_model(tmp_path / "bad.zip")

    def test_tampered_w_detected(self, fitted_model, tmp_path):
        # a 1e-3 perturbation of one entry must break w @ w_inv = I
        save_model(fitted_model, tmp_path / "good.zip")
        w = fitted_model.w_.copy()
        w[0, 0] += 1e-3
        buf = BytesIO()
        from whitex.io import _write_npy

        _write_npy(buf, w)
        self._edit_bundle(
            tmp_path / "good.zip", tmp_path / "bad.zip",
            replace={"w.npy": buf.getvalue()},
        )
        with pytest.raises(IntegrityError, match="identity"):
            load_model(tmp_path / "bad.zip")

    def test_truncated_zip(self, fitted_model, tmp_path):
        save_model(fitted_model, tmp_path / "good.zip")
        data = (tmp_path / "good.zip").read_bytes()
        (tmp_path / "trunc.zip").write_bytes(data[: len(data) // 2])
        with pytest.raises(FormatError):
            load_model(tmp_path / "trunc.zip")

    def test_not_a_zip(self, tmp_path):
        path = tmp_path / "junk.zip"
        path.write_bytes(b"definitely not a zip")
        with pytest.raises(FormatError):
            load_model(path)

import struct

import numpy as np
import pytest

from gdc import archive as ar
from gdc import mixture
from gdc.errors import (
    BadMagic,
    DuplicateLabel,
    EmptyInput,
    MissingPlaceholder,
    NonFiniteValue,
    TruncatedFile,
    UnsupportedVersion,
)
from gdc.gaussian import fit_class

from testutil import gaussian_archive


def small_archive(rng, labels=("a", "b"), n=3, d=4):
    return gaussian_archive(rng, list(labels), n, d)


def fit_model(archive, eps=1e-8):
    comps = [fit_class(np.asarray(b, np.float64), eps, i, label)
             for i, (label, b) in enumerate(archive.classes)]
    return mixture.assemble(comps)


class TestManifest:
    def test_full_expansion(self):
        m = ar.expand_manifest(["goldfish"], per_template=30, seed=0)
        assert len(m.entries) == 8
        assert sum(e.count for e in m.entries) == 240
        assert m.per_class_total == 240

    def test_placeholder_substitution(self):
        m = ar.expand_manifest(["goldfish"], ["a photo of a {}"],
                               per_template=1, seed=0)
        assert m.entries[0].prompt == "a photo of a goldfish"

    def test_missing_placeholder(self):
        with pytest.raises(MissingPlaceholder):
            ar.expand_manifest(["x"], ["no placeholder here"], 1, 0)

    def test_empty_inputs(self):
        with pytest.raises(EmptyInput):
            ar.expand_manifest([], None, 1, 0)
        with pytest.raises(EmptyInput):
            ar.expand_manifest(["x"], [], 1, 0)

    def test_distinct_seeds(self):
        m = ar.expand_manifest(["a", "b"], per_template=2, seed=5)
        seeds = [e.seed for e in m.entries]
        assert len(set(seeds)) == len(seeds)

    def test_deterministic(self):
        m1 = ar.expand_manifest(["a", "b"], per_template=3, seed=1)
        m2 = ar.expand_manifest(["a", "b"], per_template=3, seed=1)
        assert m1 == m2

    def test_file_round_trip(self, tmp_path):
        m = ar.expand_manifest(["cat", "dog"], per_template=4, seed=2)
        path = tmp_path / "m.tsv"
        ar.write_manifest(m, path)
        back = ar.read_manifest(path)
        assert back.entries == m.entries
        assert back.per_class_total == m.per_class_total

    def test_default_templates(self):
        templates = ar.default_templates()
        assert len(templates) == 8
        assert "a photo of a {}" in templates
        assert all(t.count("{}") == 1 for t in templates)


class TestEmbeddingFormat:
    def test_round_trip_bitwise(self, rng, tmp_path):
        archive = small_archive(rng)
        p1 = tmp_path / "a.gdce"
        p2 = tmp_path / "b.gdce"
        ar.write_embeddings(archive, p1)
        back = ar.read_embeddings(p1)
        assert back.d == archive.d
        for (l1, b1), (l2, b2) in zip(archive.classes, back.classes):
            assert l1 == l2
            assert np.array_equal(b1, b2)
        ar.write_embeddings(back, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_hand_computed_bytes(self, tmp_path):
        archive = ar.EmbeddingArchive(
            d=2, classes=[("a", np.array([[1.0, 2.0]], dtype=np.float32))])
        path = tmp_path / "min.gdce"
        ar.write_embeddings(archive, path)
        expected = (
            b"GDCE"
            + bytes.fromhex("0100")            # version 1
            + bytes.fromhex("00")              # dtype f32
            + bytes.fromhex("02000000")        # d = 2
            + bytes.fromhex("0100") + b"a"     # label
            + bytes.fromhex("01000000")        # rows = 1
            + bytes.fromhex("0000803f")        # 1.0f
            + bytes.fromhex("00000040")        # 2.0f
            + bytes.fromhex("00000000")        # end marker
        )
        assert path.read_bytes() == expected

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.gdce"
        path.write_bytes(b"NOPE" + bytes(20))
        with pytest.raises(BadMagic):
            ar.read_embeddings(path)

    def test_unsupported_version(self, rng, tmp_path):
        path = tmp_path / "v.gdce"
        ar.write_embeddings(small_archive(rng), path)
        data = bytearray(path.read_bytes())
        data[4] = 99
        path.write_bytes(bytes(data))
        with pytest.raises(UnsupportedVersion):
            ar.read_embeddings(path)

    def test_truncated_block_names_class(self, rng, tmp_path):
        path = tmp_path / "t.gdce"
        ar.write_embeddings(small_archive(rng), path)
        data = path.read_bytes()
        path.write_bytes(data[:len(data) // 2])
        with pytest.raises(TruncatedFile) as err:
            ar.read_embeddings(path)
        assert "'a'" in str(err.value) or "'b'" in str(err.value)

    def test_non_finite_value_offset(self, tmp_path):
        archive = ar.EmbeddingArchive(
            d=2, classes=[("a", np.array([[1.0, 2.0]], dtype=np.float32))])
        path = tmp_path / "nan.gdce"
        ar.write_embeddings(archive, path)
        data = bytearray(path.read_bytes())
        data[18:22] = struct.pack("<f", float("nan"))  # second value
        path.write_bytes(bytes(data))
        with pytest.raises(NonFiniteValue) as err:
            ar.read_embeddings(path)
        assert err.value.offset == 18

    def test_duplicate_label_rejected(self):
        with pytest.raises(DuplicateLabel):
            ar.EmbeddingArchive(d=1, classes=[
                ("a", np.zeros((1, 1), np.float32)),
                ("a", np.zeros((1, 1), np.float32))])


class TestModelFormat:
    def test_round_trip_bitwise(self, rng, tmp_path):
        model = fit_model(small_archive(rng, n=8, d=3))
        p1 = tmp_path / "m1.gdcm"
        p2 = tmp_path / "m2.gdcm"
        ar.write_model(model, p1)
        back = ar.read_model(p1)
        assert back.d == model.d and back.k == model.k
        for g1, g2 in zip(model.components, back.components):
            assert g1.label == g2.label
            assert np.array_equal(g1.mean, g2.mean)
            assert np.array_equal(g1.inv_factor.packed, g2.inv_factor.packed)
            assert g1.log_det_cov == g2.log_det_cov
            assert g1.n_ref == g2.n_ref
        ar.write_model(back, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_version_bump(self, rng, tmp_path):
        path = tmp_path / "m.gdcm"
        ar.write_model(fit_model(small_archive(rng, n=8, d=3)), path)
        data = bytearray(path.read_bytes())
        data[4] = 2
        path.write_bytes(bytes(data))
        with pytest.raises(UnsupportedVersion):
            ar.read_model(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "m.gdcm"
        path.write_bytes(b"XXXX" + bytes(30))
        with pytest.raises(BadMagic):
            ar.read_model(path)

    def test_truncated(self, rng, tmp_path):
        path = tmp_path / "m.gdcm"
        ar.write_model(fit_model(small_archive(rng, n=8, d=3)), path)
        data = path.read_bytes()
        path.write_bytes(data[:-9])
        with pytest.raises(TruncatedFile):
            ar.read_model(path)

    def test_reloaded_posteriors_bitwise(self, rng, tmp_path):
        model = fit_model(small_archive(rng, n=10, d=5))
        path = tmp_path / "m.gdcm"
        ar.write_model(model, path)
        back = ar.read_model(path)
        for _ in range(100):
            e = rng.normal(size=5)
            p1 = mixture.posterior(model, e)
            p2 = mixture.posterior(back, e)
            assert np.array_equal(p1.log_joint, p2.log_joint)
            assert np.array_equal(p1.probs, p2.probs)

    def test_scan_matches_read(self, rng, tmp_path):
        model = fit_model(small_archive(rng, n=8, d=4))
        path = tmp_path / "m.gdcm"
        ar.write_model(model, path)
        header, refs = ar.scan_model(path)
        assert header.d == model.d and header.k == model.k
        with open(path, "rb") as fh:
            for ref, g in zip(refs, model.components):
                assert ref.label == g.label
                assert ref.log_det_cov == g.log_det_cov
                fh.seek(ref.mean_offset)
                mean = np.fromfile(fh, dtype="<f8", count=model.d)
                assert np.array_equal(mean, g.mean)
                fh.seek(ref.factor_offset)
                packed = np.fromfile(fh, dtype="<f8",
                                     count=model.d * (model.d + 1) // 2)
                assert np.array_equal(packed, g.inv_factor.packed)

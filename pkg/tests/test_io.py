"""Tests for dataset manifests and image files."""

import json

import numpy as np
import pytest

from src.exceptions import DataValidationError, MissingFileError, ParseError
from src.frontend import CorrespondenceSet, save_matches
from src.geometry import EulerPose, PinholeIntrinsics
from src.io import (
    DatasetManifest,
    dump_json,
    frame_entry,
    load_dataset,
    load_frame,
    load_gray,
    read_json,
    save_gray,
    save_manifest,
    save_png,
    write_pgm,
)
from src.pointcloud import OrganizedScan, save_scan

K = PinholeIntrinsics(fx=20, fy=20, cx=8, cy=6, width=16, height=12)


def make_manifest(ids=("0000", "0001"), **overrides) -> DatasetManifest:
    fields = {
        "k_left": K,
        "k_right": K,
        "k_thermal": K,
        "t_lr": EulerPose(x=0.2),
        "laser_rings": 2,
        "laser_columns": 4,
        "frames": [frame_entry(i) for i in ids],
    }
    return DatasetManifest(**{**fields, **overrides})


@pytest.fixture
def dataset_root(tmp_path):
    """A two-frame dataset; frame 0001 has no matches file."""
    manifest = make_manifest()
    rng = np.random.default_rng(0)
    for entry in manifest.frames:
        for name in ("left", "right", "thermal"):
            save_png(rng.integers(0, 256, size=(12, 16)), tmp_path / getattr(entry, name))
        points = rng.uniform(1, 5, size=(2, 4, 3))
        save_scan(OrganizedScan(points, np.ones((2, 4), dtype=bool)), tmp_path / entry.laser)
    save_matches(
        CorrespondenceSet(np.array([[3.0, 4.0]]), np.array([[2.5, 4.0]])), tmp_path / manifest.frames[0].matches
    )
    save_manifest(manifest, tmp_path)
    return tmp_path


class TestManifest:
    """Tests for DatasetManifest validation."""

    def test_duplicate_ids(self):
        """Frame ids must be unique."""
        with pytest.raises(ValueError, match="unique"):
            make_manifest(ids=("0000", "0000"))

    def test_unpadded_ids(self):
        """Frame ids must share one zero-padded width."""
        with pytest.raises(ValueError, match="zero-padded"):
            make_manifest(ids=("0000", "1"))
        with pytest.raises(ValueError, match="zero-padded"):
            make_manifest(ids=("frame0",))

    def test_unknown_frame(self):
        """Looking up a missing id lists the valid ones."""
        with pytest.raises(DataValidationError, match="0000, 0001"):
            make_manifest().frame("0007")

    def test_unknown_key(self):
        """Manifests reject unexpected keys."""
        raw = make_manifest().model_dump(mode="json")
        raw["baseline"] = 0.2
        with pytest.raises(ValueError):
            DatasetManifest.model_validate(raw)

    def test_frame_entry_paths(self):
        """Frame files live under frames/<id>/."""
        entry = frame_entry("0003", with_matches=False)
        assert entry.laser == "frames/0003/laser.csv"
        assert entry.matches is None


class TestLoadDataset:
    """Tests for load_dataset() and load_frame()."""

    def test_roundtrip(self, dataset_root):
        """A saved dataset loads back with its frames."""
        dataset = load_dataset(dataset_root)
        assert dataset.manifest.frame_ids == ["0000", "0001"]
        assert np.allclose(dataset.t_lr.translation, [0.2, 0.0, 0.0])

    def test_missing_manifest(self, tmp_path):
        """A directory without a manifest is a MissingFileError."""
        with pytest.raises(MissingFileError):
            load_dataset(tmp_path)

    def test_invalid_manifest(self, tmp_path):
        """Schema problems are DataValidationError."""
        dump_json({"frames": []}, tmp_path / "manifest.json")
        with pytest.raises(DataValidationError):
            load_dataset(tmp_path)

    def test_missing_frame_file(self, dataset_root):
        """Every listed image and scan must exist."""
        (dataset_root / "frames" / "0001" / "thermal.png").unlink()
        with pytest.raises(MissingFileError, match="0001"):
            load_dataset(dataset_root)

    def test_load_frame(self, dataset_root):
        """Frames load images, scan and matches."""
        frame = load_frame(load_dataset(dataset_root), "0000", require_matches=True)
        assert frame.left.shape == (12, 16)
        assert frame.scan.points.shape == (2, 4, 3)
        assert len(frame.matches) == 1

    def test_matches_optional(self, dataset_root):
        """Without matches the frame still loads unless they are required."""
        dataset = load_dataset(dataset_root)
        assert load_frame(dataset, "0001").matches is None
        with pytest.raises(MissingFileError, match="matches.csv"):
            load_frame(dataset, "0001", require_matches=True)


class TestJson:
    """Tests for dump_json() and read_json()."""

    def test_sorted_and_indented(self, tmp_path):
        """Output is deterministic."""
        path = tmp_path / "out.json"
        dump_json({"b": 1, "a": [1, 2]}, path)
        text = path.read_text()
        assert text.index('"a"') < text.index('"b"')
        assert text.endswith("\n")
        assert read_json(path) == {"a": [1, 2], "b": 1}

    def test_bad_json_reports_line(self, tmp_path):
        """Parse errors carry the line number."""
        path = tmp_path / "bad.json"
        path.write_text('{\n  "a": 1,\n  oops\n}\n')
        with pytest.raises(ParseError) as info:
            read_json(path)
        assert info.value.line == 3


class TestImages:
    """Tests for grayscale image files."""

    def test_png_roundtrip(self, tmp_path):
        """PNG keeps 8-bit values exactly."""
        image = np.arange(48, dtype=np.uint8).reshape(6, 8)
        save_png(image, tmp_path / "a.png")
        assert np.array_equal(load_gray(tmp_path / "a.png"), image)

    def test_boolean_images(self, tmp_path):
        """Masks are written as 0/255."""
        save_gray(np.eye(4, dtype=bool), tmp_path / "mask.png")
        assert load_gray(tmp_path / "mask.png").max() == 255

    def test_pgm_layout(self, tmp_path):
        """ASCII PGM wraps rows at 16 values."""
        path = tmp_path / "wide.pgm"
        write_pgm(np.full((2, 20), 7), path)
        lines = path.read_text().splitlines()
        assert lines[:3] == ["P2", "20 2", "255"]
        assert len(lines[3].split()) == 16
        assert len(lines[4].split()) == 4

    def test_pgm_reads_back(self, tmp_path):
        """Written PGMs load through the image reader."""
        image = np.arange(30, dtype=np.uint8).reshape(5, 6)
        save_gray(image, tmp_path / "img.pgm")
        assert np.array_equal(load_gray(tmp_path / "img.pgm"), image)

    def test_missing_image(self, tmp_path):
        """Missing images raise MissingFileError."""
        with pytest.raises(MissingFileError):
            load_gray(tmp_path / "none.png")

    def test_garbage_image(self, tmp_path):
        """Unreadable files raise ParseError."""
        path = tmp_path / "junk.png"
        path.write_bytes(json.dumps({"not": "an image"}).encode())
        with pytest.raises(ParseError):
            load_gray(path)

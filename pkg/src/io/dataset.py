"""Dataset layout: ``manifest.json`` plus one directory per frame.

Layout::

    <root>/manifest.json
    <root>/frames/<id>/left.png
    <root>/frames/<id>/right.png
    <root>/frames/<id>/thermal.png
    <root>/frames/<id>/laser.csv
    <root>/frames/<id>/matches.csv   (optional)
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from src.core.logging import get_logger
from src.exceptions import DataValidationError, MissingFileError, ParseError
from src.frontend.stereo import CorrespondenceSet, load_matches
from src.geometry import EulerPose, PinholeIntrinsics, Pose
from src.io.images import load_gray
from src.pointcloud import OrganizedScan, load_scan

logger = get_logger(__name__)

MANIFEST_NAME = "manifest.json"
FRAMES_DIR = "frames"


class FrameEntry(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    id: str
    left: str
    right: str
    thermal: str
    laser: str
    matches: str | None = None


class DatasetManifest(BaseModel):
    """Intrinsics, stereo baseline transform and per-frame files of one capture session."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    k_left: PinholeIntrinsics
    k_right: PinholeIntrinsics
    k_thermal: PinholeIntrinsics
    t_lr: EulerPose = Field(description="Right camera to left camera")
    laser_rings: int = Field(gt=0)
    laser_columns: int = Field(gt=0)
    laser_wrap: bool = True
    thermal_is_edge_map: bool = Field(
        default=False, description="Thermal images already hold 1-px edge chains"
    )
    init_laser: EulerPose | None = Field(default=None, description="Suggested T_SL start")
    init_thermal: EulerPose | None = Field(default=None, description="Suggested T_ST start")
    frames: list[FrameEntry]

    @field_validator("frames")
    @classmethod
    def _unique_padded_ids(cls, frames: list[FrameEntry]) -> list[FrameEntry]:
        ids = [f.id for f in frames]
        if len(set(ids)) != len(ids):
            raise ValueError("frame ids must be unique")
        if any(not i.isdigit() for i in ids) or len({len(i) for i in ids}) > 1:
            raise ValueError("frame ids must be zero-padded digits of equal width")
        return frames

    @property
    def frame_ids(self) -> list[str]:
        return [f.id for f in self.frames]

    def frame(self, frame_id: str) -> FrameEntry:
        for entry in self.frames:
            if entry.id == frame_id:
                return entry
        raise DataValidationError(
            f"unknown frame id {frame_id!r}; valid ids: {', '.join(self.frame_ids)}"
        )


@dataclass(frozen=True, eq=False)
class Dataset:
    root: Path
    manifest: DatasetManifest

    @property
    def t_lr(self) -> Pose:
        return self.manifest.t_lr.to_pose()

    def path(self, relative: str) -> Path:
        return self.root / relative


@dataclass(frozen=True, eq=False)
class FrameData:
    id: str
    left: NDArray[np.uint8]
    right: NDArray[np.uint8]
    thermal: NDArray[np.uint8]
    scan: OrganizedScan
    matches: CorrespondenceSet | None


def frame_entry(frame_id: str, with_matches: bool = True) -> FrameEntry:
    base = f"{FRAMES_DIR}/{frame_id}"
    return FrameEntry(
        id=frame_id,
        left=f"{base}/left.png",
        right=f"{base}/right.png",
        thermal=f"{base}/thermal.png",
        laser=f"{base}/laser.csv",
        matches=f"{base}/matches.csv" if with_matches else None,
    )


def dump_json(payload: Any, path: Path) -> None:
    """Deterministic JSON: sorted keys, two-space indent, trailing newline."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_json(path: Path | str) -> Any:
    path = Path(path)
    if not path.exists():
        raise MissingFileError(f"file not found: {path}")
    text = path.read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(path, e.lineno, e.msg) from e


def save_manifest(manifest: DatasetManifest, root: Path | str) -> Path:
    path = Path(root) / MANIFEST_NAME
    dump_json(manifest.model_dump(mode="json"), path)
    return path


def load_dataset(root: Path | str) -> Dataset:
    """Parse and validate ``manifest.json``; every required frame file must exist."""
    root = Path(root)
    raw = read_json(root / MANIFEST_NAME)
    try:
        manifest = DatasetManifest.model_validate(raw)
    except ValidationError as e:
        raise DataValidationError(f"{root / MANIFEST_NAME}: {e}") from e
    for entry in manifest.frames:
        for name in ("left", "right", "thermal", "laser"):
            if not (root / getattr(entry, name)).exists():
                raise MissingFileError(f"frame {entry.id}: missing {getattr(entry, name)}")
    logger.info("dataset_loaded", root=str(root), frames=len(manifest.frames))
    return Dataset(root=root, manifest=manifest)


def load_frame(dataset: Dataset, frame_id: str, require_matches: bool = False) -> FrameData:
    entry = dataset.manifest.frame(frame_id)
    matches = None
    if entry.matches is not None and dataset.path(entry.matches).exists():
        matches = load_matches(dataset.path(entry.matches))
    elif require_matches:
        raise MissingFileError(
            f"frame {frame_id}: matches.csv not found; precompute stereo correspondences "
            f"into {FRAMES_DIR}/{frame_id}/matches.csv (columns ul,vl,ur,vr)"
        )
    manifest = dataset.manifest
    return FrameData(
        id=frame_id,
        left=load_gray(dataset.path(entry.left)),
        right=load_gray(dataset.path(entry.right)),
        thermal=load_gray(dataset.path(entry.thermal)),
        scan=load_scan(dataset.path(entry.laser), manifest.laser_rings, manifest.laser_columns),
        matches=matches,
    )

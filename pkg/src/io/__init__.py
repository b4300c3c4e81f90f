"""Dataset manifests and image files."""

from src.io.dataset import (
    Dataset,
    DatasetManifest,
    FrameData,
    FrameEntry,
    dump_json,
    frame_entry,
    load_dataset,
    load_frame,
    read_json,
    save_manifest,
)
from src.io.images import load_gray, save_gray, save_png, write_pgm

__all__ = [
    "Dataset",
    "DatasetManifest",
    "FrameData",
    "FrameEntry",
    "dump_json",
    "frame_entry",
    "load_dataset",
    "load_frame",
    "load_gray",
    "read_json",
    "save_gray",
    "save_manifest",
    "save_png",
    "write_pgm",
]

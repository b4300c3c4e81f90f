"""Synthetic box-and-wall scenes with known extrinsics."""

from src.synth.generator import (
    GROUND_TRUTH_NAME,
    SyntheticDataset,
    SyntheticFrame,
    generate,
    render_frame,
    simulate,
    thermal_edge_map,
    write_dataset,
)
from src.synth.perturb import perturb_pose
from src.synth.presets import PRESETS, SUITE, preset
from src.synth.scene import (
    Box,
    NoiseSpec,
    SceneSpec,
    SensorRig,
    cast_rays,
    render_labels,
    silhouette_edges,
    visible_from,
)

__all__ = [
    # Generation
    "GROUND_TRUTH_NAME",
    "SyntheticDataset",
    "SyntheticFrame",
    "generate",
    "render_frame",
    "simulate",
    "thermal_edge_map",
    "write_dataset",
    # Initial guesses
    "perturb_pose",
    # Presets
    "PRESETS",
    "SUITE",
    "preset",
    # Scene
    "Box",
    "NoiseSpec",
    "SceneSpec",
    "SensorRig",
    "cast_rays",
    "render_labels",
    "silhouette_edges",
    "visible_from",
]

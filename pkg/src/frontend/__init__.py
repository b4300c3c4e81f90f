"""Per-sensor edge and point extraction: stereo, laser and thermal."""

from src.frontend.laser_edges import (
    EdgeStats,
    LaserEdgeParams,
    detect_laser_edges,
    edge_stats,
    laser_edge_mask,
)
from src.frontend.stereo import (
    CorrespondenceSet,
    EdgeMap,
    TriangulationResult,
    load_matches,
    save_matches,
    sobel_edges,
    tag_stereo_edge_points,
    triangulate,
    triangulate_frame,
)
from src.frontend.thermal_edges import (
    AttractionField,
    CannyParams,
    EdgeFilterReport,
    build_attraction_field,
    canny,
    filter_edges,
    filter_edges_report,
    sample_field,
    sample_gradient,
    save_field_pgm,
)

__all__ = [
    # Stereo
    "CorrespondenceSet",
    "EdgeMap",
    "TriangulationResult",
    "load_matches",
    "save_matches",
    "sobel_edges",
    "tag_stereo_edge_points",
    "triangulate",
    "triangulate_frame",
    # Laser
    "EdgeStats",
    "LaserEdgeParams",
    "detect_laser_edges",
    "edge_stats",
    "laser_edge_mask",
    # Thermal
    "AttractionField",
    "CannyParams",
    "EdgeFilterReport",
    "build_attraction_field",
    "canny",
    "filter_edges",
    "filter_edges_report",
    "sample_field",
    "sample_gradient",
    "save_field_pgm",
]

"""Point-cloud and organized-scan file formats.

Supported formats:
    - ASCII PLY with a ``vertex`` element (``x y z`` floats, optional ``edge`` uchar)
    - CSV with header ``x,y,z`` or ``x,y,z,edge``
    - Organized scan CSV with header ``ring,col,x,y,z,valid``

Every parse failure raises :class:`ParseError` carrying the file path and the
1-based line number of the offending line.
"""

from __future__ import annotations

from collections.abc import Iterator
from pathlib import Path
from typing import Literal

import numpy as np

from src.core.logging import get_logger
from src.exceptions import DataValidationError, MissingFileError, ParseError
from src.pointcloud.cloud import OrganizedScan, PointCloud

logger = get_logger(__name__)

CloudFormat = Literal["ply", "csv"]

SCAN_HEADER = ["ring", "col", "x", "y", "z", "valid"]
_PLY_FLOAT_TYPES = {"float", "float32", "double", "float64"}


def _numbered_lines(path: Path) -> Iterator[tuple[int, str]]:
    if not path.exists():
        raise MissingFileError(f"file not found: {path}")
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            yield lineno, raw.strip()


def _floats(path: Path, lineno: int, tokens: list[str]) -> list[float]:
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise ParseError(path, lineno, f"non-numeric value in {tokens!r}") from None


def _check_finite(path: Path, lineno: int, values: list[float]) -> None:
    if not all(np.isfinite(values)):
        raise DataValidationError(f"{path}:{lineno}: non-finite coordinate")


def _infer_format(path: Path) -> CloudFormat:
    suffix = path.suffix.lower().lstrip(".")
    if suffix not in ("ply", "csv"):
        raise ParseError(path, 0, f"cannot infer cloud format from suffix {path.suffix!r}")
    return suffix  # type: ignore[return-value]


# ===== PLY =====


def _parse_ply_header(path: Path, lines: Iterator[tuple[int, str]]) -> tuple[int, list[str]]:
    lineno, first = next(lines, (1, ""))
    if first != "ply":
        raise ParseError(path, lineno, "missing 'ply' magic line")
    count: int | None = None
    properties: list[str] = []
    in_vertex = False
    for lineno, line in lines:
        tokens = line.split()
        if not tokens or tokens[0] == "comment":
            continue
        if tokens[0] == "format":
            if len(tokens) < 2 or tokens[1] != "ascii":
                raise ParseError(path, lineno, "only 'format ascii 1.0' is supported")
        elif tokens[0] == "element":
            if len(tokens) != 3:
                raise ParseError(path, lineno, "malformed element line")
            in_vertex = tokens[1] == "vertex"
            if in_vertex:
                try:
                    count = int(tokens[2])
                except ValueError:
                    raise ParseError(path, lineno, "vertex count is not an integer") from None
                if count < 0:
                    raise ParseError(path, lineno, "negative vertex count")
        elif tokens[0] == "property":
            if len(tokens) != 3:
                raise ParseError(path, lineno, "malformed property line")
            if in_vertex:
                if tokens[2] in ("x", "y", "z") and tokens[1] not in _PLY_FLOAT_TYPES:
                    raise ParseError(
                        path, lineno, f"coordinate {tokens[2]!r} must be a float, got {tokens[1]!r}"
                    )
                properties.append(tokens[2])
        elif tokens[0] == "end_header":
            break
        else:
            raise ParseError(path, lineno, f"unexpected header keyword {tokens[0]!r}")
    else:
        raise ParseError(path, lineno, "header is missing 'end_header'")

    if count is None:
        raise ParseError(path, lineno, "no 'vertex' element declared")
    if properties[:3] != ["x", "y", "z"]:
        raise ParseError(path, lineno, "vertex properties must start with 'x y z'")
    return count, properties


def _load_ply(path: Path) -> PointCloud:
    lines = _numbered_lines(path)
    count, properties = _parse_ply_header(path, lines)
    edge_col = properties.index("edge") if "edge" in properties else None

    points = np.empty((count, 3))
    edges = np.zeros(count, dtype=bool)
    read = 0
    lineno = 0
    for lineno, line in lines:
        if not line:
            continue
        if read == count:
            raise ParseError(path, lineno, "more vertex rows than declared")
        tokens = line.split()
        if len(tokens) != len(properties):
            raise ParseError(
                path, lineno, f"expected {len(properties)} values, got {len(tokens)}"
            )
        values = _floats(path, lineno, tokens)
        _check_finite(path, lineno, values[:3])
        points[read] = values[:3]
        if edge_col is not None:
            flag = values[edge_col]
            if flag not in (0.0, 1.0):
                raise ParseError(path, lineno, f"edge flag must be 0 or 1, got {tokens[edge_col]}")
            edges[read] = flag == 1.0
        read += 1
    if read != count:
        raise ParseError(path, lineno, f"declared {count} vertices, found {read}")
    return PointCloud(points, edges if edge_col is not None else None)


def _save_ply(cloud: PointCloud, path: Path) -> None:
    header = [
        "ply",
        "format ascii 1.0",
        f"element vertex {len(cloud)}",
        "property float x",
        "property float y",
        "property float z",
    ]
    if cloud.edges is not None:
        header.append("property uchar edge")
    header.append("end_header")
    rows = []
    for i, p in enumerate(cloud.points):
        row = f"{p[0]:.9g} {p[1]:.9g} {p[2]:.9g}"
        if cloud.edges is not None:
            row += f" {int(cloud.edges[i])}"
        rows.append(row)
    path.write_text("\n".join(header + rows) + "\n", encoding="utf-8")


# ===== CSV =====


def _load_csv(path: Path) -> PointCloud:
    lines = _numbered_lines(path)
    lineno, header = next(lines, (1, ""))
    columns = [c.strip() for c in header.split(",")]
    if columns not in (["x", "y", "z"], ["x", "y", "z", "edge"]):
        raise ParseError(path, lineno, f"expected header 'x,y,z[,edge]', got {header!r}")
    has_edge = len(columns) == 4
    points: list[list[float]] = []
    edges: list[bool] = []
    for lineno, line in lines:
        if not line:
            continue
        tokens = line.split(",")
        if len(tokens) != len(columns):
            raise ParseError(path, lineno, f"expected {len(columns)} fields, got {len(tokens)}")
        values = _floats(path, lineno, tokens)
        _check_finite(path, lineno, values[:3])
        points.append(values[:3])
        if has_edge:
            if values[3] not in (0.0, 1.0):
                raise ParseError(path, lineno, "edge flag must be 0 or 1")
            edges.append(values[3] == 1.0)
    return PointCloud(np.array(points).reshape(-1, 3), np.array(edges, dtype=bool) if has_edge else None)


def _save_csv(cloud: PointCloud, path: Path) -> None:
    has_edge = cloud.edges is not None
    rows = ["x,y,z,edge" if has_edge else "x,y,z"]
    for i, p in enumerate(cloud.points):
        row = f"{p[0]:.12g},{p[1]:.12g},{p[2]:.12g}"
        if has_edge:
            row += f",{int(cloud.edges[i])}"  # type: ignore[index]
        rows.append(row)
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


def load_cloud(path: Path | str, format: CloudFormat | None = None) -> PointCloud:
    """Load a point cloud; the format defaults to the file suffix."""
    path = Path(path)
    fmt = format or _infer_format(path)
    cloud = _load_ply(path) if fmt == "ply" else _load_csv(path)
    logger.debug("cloud_loaded", path=str(path), points=len(cloud))
    return cloud


def save_cloud(cloud: PointCloud, path: Path | str, format: CloudFormat | None = None) -> None:
    path = Path(path)
    fmt = format or _infer_format(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "ply":
        _save_ply(cloud, path)
    else:
        _save_csv(cloud, path)


# ===== Organized scans =====


def load_scan(path: Path | str, rings: int | None = None, columns: int | None = None) -> OrganizedScan:
    """Load an organized scan CSV.

    Grid dimensions default to the largest indices present plus one. Cells
    missing from the file are treated as invalid returns.
    """
    path = Path(path)
    lines = _numbered_lines(path)
    lineno, header = next(lines, (1, ""))
    if [c.strip() for c in header.split(",")] != SCAN_HEADER:
        raise ParseError(path, lineno, f"expected header {','.join(SCAN_HEADER)!r}, got {header!r}")

    rows: list[tuple[int, int, float, float, float, bool]] = []
    row_lines: list[int] = []
    for lineno, line in lines:
        if not line:
            continue
        tokens = line.split(",")
        if len(tokens) != 6:
            raise ParseError(path, lineno, f"expected 6 fields, got {len(tokens)}")
        try:
            ring, col, valid = int(tokens[0]), int(tokens[1]), int(tokens[5])
        except ValueError:
            raise ParseError(path, lineno, "ring, col and valid must be integers") from None
        if valid not in (0, 1):
            raise ParseError(path, lineno, f"valid must be 0 or 1, got {valid}")
        x, y, z = _floats(path, lineno, tokens[2:5])
        if valid:
            _check_finite(path, lineno, [x, y, z])
        rows.append((ring, col, x, y, z, bool(valid)))
        row_lines.append(lineno)

    if not rows:
        raise ParseError(path, lineno, "scan file holds no rows")

    n_rings = rings if rings is not None else max(r[0] for r in rows) + 1
    n_cols = columns if columns is not None else max(r[1] for r in rows) + 1
    points = np.zeros((n_rings, n_cols, 3))
    valid_mask = np.zeros((n_rings, n_cols), dtype=bool)
    seen = np.zeros((n_rings, n_cols), dtype=bool)
    for (ring, col, x, y, z, valid), at in zip(rows, row_lines, strict=True):
        if not (0 <= ring < n_rings) or not (0 <= col < n_cols):
            raise DataValidationError(
                f"{path}:{at}: cell ({ring}, {col}) outside a {n_rings}x{n_cols} scan"
            )
        if seen[ring, col]:
            raise DataValidationError(f"{path}:{at}: duplicate cell ({ring}, {col})")
        seen[ring, col] = True
        if valid:
            points[ring, col] = (x, y, z)
            valid_mask[ring, col] = True
    scan = OrganizedScan(points, valid_mask)
    logger.debug("scan_loaded", path=str(path), rings=n_rings, columns=n_cols, valid=int(valid_mask.sum()))
    return scan


def save_scan(scan: OrganizedScan, path: Path | str) -> None:
    """Write every cell in row-major order; invalid cells carry zero coordinates."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = [",".join(SCAN_HEADER)]
    for ring in range(scan.rings):
        for col in range(scan.columns):
            x, y, z = scan.points[ring, col]
            rows.append(f"{ring},{col},{x:.12g},{y:.12g},{z:.12g},{int(scan.valid[ring, col])}")
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")

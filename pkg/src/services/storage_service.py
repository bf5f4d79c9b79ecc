"""Delimited result tables, metadata sidecars and key=value reports."""
import json
import logging
import os
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.errors import DataIOError
from src.models import (
    ATTRIBUTE_COLUMNS,
    FEATURE_NAMES,
    AttributeMatrix,
    BlockRecord,
    BlockTexture,
    ClusterResult,
    ClusterSpread,
    GlcmFeatures,
    LocalitySummary,
    Mode,
    SsiVector,
)
from src.utils import atomic_write_text, file_checksum, format_number, format_row, format_timestamp

logger = logging.getLogger(__name__)


def _table(header: Sequence[str], rows: Iterable[Sequence[Any]], delimiter: str = ",") -> str:
    """Render a header plus rows as delimited text."""
    lines = [delimiter.join(header)]
    lines.extend(format_row(row, delimiter) for row in rows)
    return "\n".join(lines) + "\n"


def _read_table(path: str, required: Sequence[str], delimiter: str = ",") -> pd.DataFrame:
    """Read a delimited result table and check its header."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"File not found: {path}")
    try:
        frame = pd.read_csv(path, sep=delimiter, dtype={"block_id": str}, keep_default_na=False,
                            na_values=[""])
    except pd.errors.EmptyDataError as e:
        raise DataIOError(f"{path}: empty file") from e
    except pd.errors.ParserError as e:
        raise DataIOError(f"{path}: {e}") from e
    missing = [name for name in required if name not in frame.columns]
    if missing:
        raise DataIOError(f"{path}: missing column(s) {', '.join(missing)}")
    return frame


def metadata_path(path: str) -> str:
    """Sidecar metadata path of a result table."""
    return f"{path}.meta.json"


def write_json(path: str, payload: Dict[str, Any]) -> None:
    """Write a JSON document atomically."""
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_json(path: str) -> Dict[str, Any]:
    """Read a JSON sidecar."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"File not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as e:
        raise DataIOError(f"{path}: invalid JSON ({e})") from e


# Census tables

def write_census(path: str, records: Sequence[BlockRecord], delimiter: str = ",") -> None:
    """Write census records with field names as headers."""
    header = [
        "block_id", "locality_id", "year", "houses_total", "houses_no_water",
        "houses_dirt_floor_or_single_room", "houses_no_sanitation", "occupants_total", "rooms_total",
    ]
    rows = ([getattr(record, name) for name in header] for record in records)
    atomic_write_text(path, _table(header, rows, delimiter))


# Attributes

def write_attributes(path: str, matrix: AttributeMatrix, source_path: Optional[str] = None) -> None:
    """
    Write an attribute table plus its normalization sidecar.

    Args:
        path: Destination table
        matrix: Attribute matrix
        source_path: Census file whose checksum is recorded
    """
    rows = ([block_id, *row] for block_id, row in zip(matrix.block_ids, matrix.values))
    atomic_write_text(path, _table(("block_id",) + ATTRIBUTE_COLUMNS, rows))
    write_json(metadata_path(path), {
        "columns": list(ATTRIBUTE_COLUMNS),
        "n_blocks": matrix.n_blocks,
        "normalization_params": {
            name: {"min": float(low), "max": float(high)}
            for name, (low, high) in matrix.normalization_params.items()
        },
        "input_checksum": file_checksum(source_path) if source_path else None,
    })


def read_attributes(path: str) -> AttributeMatrix:
    """Read an attribute table and, when present, its normalization sidecar."""
    frame = _read_table(path, ("block_id",) + ATTRIBUTE_COLUMNS)
    params: Dict[str, Tuple[float, float]] = {}
    meta = metadata_path(path)
    if os.path.exists(meta):
        stored = read_json(meta).get("normalization_params", {})
        params = {name: (float(v["min"]), float(v["max"])) for name, v in stored.items()}
    values = frame[list(ATTRIBUTE_COLUMNS)].to_numpy(dtype=float)
    return AttributeMatrix(block_ids=frame["block_id"].tolist(), values=values, normalization_params=params)


def read_density_scale(path: str) -> Tuple[float, float]:
    """Persisted overcrowding (min, max) from an attribute sidecar."""
    stored = read_json(path).get("normalization_params", {}).get("overcrowding")
    if stored is None:
        raise DataIOError(f"{path}: no overcrowding scale recorded")
    return float(stored["min"]), float(stored["max"])


# SSI

def write_ssi(path: str, ssi: SsiVector) -> None:
    """Write `block_id,ssi`."""
    atomic_write_text(path, _table(("block_id", "ssi"), zip(ssi.block_ids, ssi.values)))


def read_ssi(path: str) -> SsiVector:
    """Read `block_id,ssi`."""
    frame = _read_table(path, ("block_id", "ssi"))
    return SsiVector(block_ids=frame["block_id"].tolist(), values=frame["ssi"].to_numpy(dtype=float))


def load_fixed_weights(path: str) -> np.ndarray:
    """Weights from a previous solution report sidecar."""
    weights = read_json(path).get("solution", {}).get("weights")
    if weights is None or len(weights) != len(ATTRIBUTE_COLUMNS):
        raise DataIOError(f"{path}: no {len(ATTRIBUTE_COLUMNS)}-element solution weights found")
    return np.asarray(weights, dtype=float)


# Texture

def write_features(path: str, textures: Sequence[BlockTexture]) -> None:
    """Write per-block mean features; missing blocks get empty feature fields."""
    rows = []
    for texture in textures:
        if texture.features is None:
            rows.append([texture.block_id] + [""] * len(FEATURE_NAMES) + [0])
        else:
            rows.append([texture.block_id, *texture.features.as_array(), texture.n_windows])
    atomic_write_text(path, _table(("block_id",) + FEATURE_NAMES + ("n_windows",), rows))


def read_features(path: str) -> Dict[str, Optional[GlcmFeatures]]:
    """Read a feature table; blocks without windows map to None."""
    frame = _read_table(path, ("block_id",) + FEATURE_NAMES + ("n_windows",))
    result: Dict[str, Optional[GlcmFeatures]] = {}
    values = frame[list(FEATURE_NAMES)].to_numpy(dtype=float)
    for block_id, row, count in zip(frame["block_id"], values, frame["n_windows"]):
        result[block_id] = None if int(count) == 0 or np.isnan(row).any() else GlcmFeatures.from_array(row)
    return result


# Clusters

def write_clusters(path: str, block_ids: Sequence[str], result: ClusterResult) -> None:
    """Write `block_id,cluster`."""
    atomic_write_text(path, _table(("block_id", "cluster"), zip(block_ids, (int(v) for v in result.labels))))


def write_cluster_spread(path: str, spreads: Sequence[ClusterSpread]) -> None:
    """Write per-cluster SSI spread."""
    rows = ([s.cluster, s.count, s.mean, s.minimum, s.maximum, s.std] for s in spreads)
    atomic_write_text(path, _table(("cluster", "count", "mean", "min", "max", "std"), rows))


# Aggregation and modes

def write_locality_summaries(path: str, summaries: Sequence[LocalitySummary]) -> None:
    """Write the per-locality, per-year summary table."""
    rows = (
        [s.year, s.locality_id, s.count, s.mean, s.weighted_mean, s.minimum, s.q1, s.median, s.q3, s.maximum]
        for s in summaries
    )
    header = ("year", "locality_id", "count", "mean", "weighted_mean", "min", "q1", "median", "q3", "max")
    atomic_write_text(path, _table(header, rows))


def write_modes(path: str, modes: Sequence[Mode]) -> None:
    """Write `rank,location,density`."""
    rows = ([rank, m.location, m.density] for rank, m in enumerate(modes, start=1))
    atomic_write_text(path, _table(("rank", "location", "density"), rows))


def write_density(path: str, grid: np.ndarray, density: np.ndarray,
                  values: np.ndarray, bins: int = 50) -> None:
    """Write KDE curve and histogram densities on a shared table for plotting."""
    counts, edges = np.histogram(values, bins=bins, range=(0.0, 1.0), density=True)
    kde_rows = (["kde", x, y] for x, y in zip(grid, density))
    centers = (edges[:-1] + edges[1:]) / 2.0
    hist_rows = (["histogram", x, y] for x, y in zip(centers, counts))
    atomic_write_text(path, _table(("series", "x", "density"), list(kde_rows) + list(hist_rows)))


# Reports

class Report:
    """Plain-text key=value report with a JSON twin."""

    def __init__(self, title: str):
        """
        Initialize an empty report.

        Args:
            title: Report name shown in the header line
        """
        self.title = title
        self.sections: Dict[str, Dict[str, Any]] = {}

    def add_section(self, name: str, values: Dict[str, Any]) -> None:
        """Append or extend a section."""
        self.sections.setdefault(name, {}).update(values)

    @staticmethod
    def _render(value: Any) -> str:
        if isinstance(value, (list, tuple, np.ndarray)):
            return ",".join(Report._render(v) for v in value)
        if isinstance(value, bool):
            return str(value).lower()
        if isinstance(value, (float, np.floating)):
            return format_number(value)
        return str(value)

    @staticmethod
    def _plain(value: Any) -> Any:
        if isinstance(value, np.ndarray):
            return [Report._plain(v) for v in value.tolist()]
        if isinstance(value, (list, tuple)):
            return [Report._plain(v) for v in value]
        if isinstance(value, (np.floating, float)):
            return None if np.isnan(value) else float(value)
        if isinstance(value, np.integer):
            return int(value)
        if isinstance(value, np.bool_):
            return bool(value)
        return value

    def to_text(self, generated: str = None) -> str:
        """Render as text; the header line is the only place a timestamp appears."""
        generated = generated or format_timestamp()
        lines = [f"# {self.title} generated={generated}"]
        for name, values in self.sections.items():
            lines.append(f"[{name}]")
            lines.extend(f"{key}={self._render(value)}" for key, value in values.items())
        return "\n".join(lines) + "\n"

    def to_dict(self) -> Dict[str, Any]:
        """Machine-readable form without timestamps."""
        return {
            name: {key: self._plain(value) for key, value in values.items()}
            for name, values in self.sections.items()
        }

    def write(self, path: str) -> None:
        """Write the text report and its `<path>.json` sidecar."""
        atomic_write_text(path, self.to_text())
        write_json(f"{path}.json", self.to_dict())
        logger.info(f"Wrote report {path}")

"""Data models for the Slum Severity Index toolkit."""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

# Fixed attribute order; every weight vector follows it
ATTRIBUTE_COLUMNS = ('sanitation', 'water', 'structural', 'overcrowding')

FEATURE_NAMES = (
    'uniformity',
    'entropy',
    'contrast',
    'idm',
    'variance',
    'covariance',
    'correlation',
)


@dataclass
class BlockRecord:
    """Raw per-block household counts from one census row."""
    block_id: str
    locality_id: str
    year: int
    houses_total: int
    houses_no_water: int
    houses_dirt_floor_or_single_room: int
    houses_no_sanitation: int
    occupants_total: int
    rooms_total: int

    @property
    def is_empty(self) -> bool:
        """True when the block has no houses (kept, but flagged)."""
        return self.houses_total == 0

    @property
    def density(self) -> Optional[float]:
        """Persons per room, None when the block has no rooms."""
        if self.rooms_total == 0:
            return None
        return self.occupants_total / self.rooms_total

    def validate(self) -> List[str]:
        """Validate counts and return list of errors."""
        errors = []
        counts = {
            'houses_total': self.houses_total,
            'houses_no_water': self.houses_no_water,
            'houses_dirt_floor_or_single_room': self.houses_dirt_floor_or_single_room,
            'houses_no_sanitation': self.houses_no_sanitation,
            'occupants_total': self.occupants_total,
            'rooms_total': self.rooms_total,
        }
        for name, value in counts.items():
            if value < 0:
                errors.append(f"{name} must be non-negative, got {value}")

        for name in ('houses_no_water', 'houses_dirt_floor_or_single_room', 'houses_no_sanitation'):
            if counts[name] > self.houses_total:
                errors.append(
                    f"{name}={counts[name]} exceeds houses_total={self.houses_total}"
                )

        if not self.block_id:
            errors.append("block_id is required")

        return errors

    def is_valid(self) -> bool:
        """Check if the record is valid."""
        return len(self.validate()) == 0


@dataclass
class AttributeMatrix:
    """Normalized deprivation attributes, one row per block."""
    block_ids: List[str]
    values: np.ndarray
    normalization_params: Dict[str, Tuple[float, float]] = field(default_factory=dict)

    @property
    def n_blocks(self) -> int:
        """Number of rows."""
        return len(self.block_ids)

    def column(self, name: str) -> np.ndarray:
        """Return one attribute column by name."""
        return self.values[:, ATTRIBUTE_COLUMNS.index(name)]

    def validate(self) -> List[str]:
        """Validate shape and range and return list of errors."""
        errors = []
        if self.values.ndim != 2 or self.values.shape[1] != len(ATTRIBUTE_COLUMNS):
            errors.append(f"values must be n x {len(ATTRIBUTE_COLUMNS)}, got {self.values.shape}")
            return errors
        if self.values.shape[0] != len(self.block_ids):
            errors.append(
                f"{self.values.shape[0]} rows but {len(self.block_ids)} block ids"
            )
        if self.values.size and (np.nanmin(self.values) < 0.0 or np.nanmax(self.values) > 1.0):
            errors.append("attribute values must lie in [0, 1]")
        if np.isnan(self.values).any():
            errors.append("attribute values contain NaN")
        return errors

    def is_valid(self) -> bool:
        """Check if the matrix is valid."""
        return len(self.validate()) == 0


@dataclass
class KmoResult:
    """Kaiser-Meyer-Olkin sampling adequacy."""
    value: float
    msa: np.ndarray
    threshold: float = 0.6

    @property
    def factorable(self) -> bool:
        """True when the overall statistic reaches the threshold."""
        return self.value >= self.threshold

    @property
    def verdict(self) -> str:
        """Report label for the adequacy decision."""
        return 'factorable' if self.factorable else 'not-factorable'


@dataclass
class CorrelationSummary:
    """Correlation structure of an attribute matrix."""
    r_matrix: np.ndarray
    partials: np.ndarray
    kmo: KmoResult
    n_observations: int


@dataclass
class FactorSolution:
    """Single-factor principal axis solution."""
    loadings: np.ndarray
    communalities: np.ndarray
    weights: np.ndarray
    iterations: int
    converged: bool
    tolerance: float
    eigenvalue: float = 0.0

    def validate(self) -> List[str]:
        """Validate solution invariants and return list of errors."""
        errors = []
        if not np.allclose(self.communalities, self.loadings ** 2, rtol=0.0, atol=1e-12):
            errors.append("communalities must equal squared loadings")
        if (self.weights < 0).any():
            errors.append("weights must be non-negative")
        if abs(float(self.weights.sum()) - 1.0) > 1e-12:
            errors.append("weights must sum to 1")
        if float(self.loadings.sum()) < 0:
            errors.append("loadings must sum to a non-negative value")
        return errors


@dataclass
class SsiVector:
    """Per-block Slum Severity Index values."""
    block_ids: List[str]
    values: np.ndarray

    def as_dict(self) -> Dict[str, float]:
        """Map block id to SSI."""
        return dict(zip(self.block_ids, (float(v) for v in self.values)))


@dataclass
class Mode:
    """Local maximum of an estimated density."""
    location: float
    density: float


@dataclass
class LocalitySummary:
    """SSI summary for one locality in one census year."""
    locality_id: str
    year: int
    count: int
    mean: float
    weighted_mean: float
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float


@dataclass
class Raster:
    """Grayscale intensity raster stored row-major as (height, width)."""
    width: int
    height: int
    pixels: np.ndarray
    maxval: int = 255

    def validate(self) -> List[str]:
        """Validate dimensions and return list of errors."""
        errors = []
        if self.pixels.shape != (self.height, self.width):
            errors.append(
                f"pixels shape {self.pixels.shape} does not match {self.height}x{self.width}"
            )
        if self.width < 1 or self.height < 1:
            errors.append("raster must be non-empty")
        if not 1 <= self.maxval <= 65535:
            errors.append("maxval must be in [1, 65535]")
        return errors


@dataclass
class BlockMask:
    """Per-pixel block labels (0 = unassigned) with a label to block id map."""
    width: int
    height: int
    labels: np.ndarray
    block_ids: Dict[int, str] = field(default_factory=dict)

    def block_id(self, label: int) -> str:
        """Block id for a label, falling back to the label itself."""
        return self.block_ids.get(int(label), str(int(label)))

    def validate(self, raster: Optional[Raster] = None) -> List[str]:
        """Validate dimensions, optionally against a raster, and return list of errors."""
        errors = []
        if self.labels.shape != (self.height, self.width):
            errors.append(
                f"labels shape {self.labels.shape} does not match {self.height}x{self.width}"
            )
        if raster is not None and (raster.width, raster.height) != (self.width, self.height):
            errors.append(
                f"mask is {self.width}x{self.height} but raster is {raster.width}x{raster.height}"
            )
        return errors


@dataclass
class Glcm:
    """Symmetric, normalized gray-level co-occurrence matrix."""
    levels: int
    matrix: np.ndarray


@dataclass
class GlcmFeatures:
    """Haralick texture statistics of one GLCM, window or block."""
    uniformity: float
    entropy: float
    contrast: float
    inverse_difference_moment: float
    variance: float
    covariance: float
    correlation: float

    def as_array(self) -> np.ndarray:
        """Features in FEATURE_NAMES order."""
        return np.array([
            self.uniformity,
            self.entropy,
            self.contrast,
            self.inverse_difference_moment,
            self.variance,
            self.covariance,
            self.correlation,
        ])

    @classmethod
    def from_array(cls, values: np.ndarray) -> 'GlcmFeatures':
        """Build from a vector in FEATURE_NAMES order."""
        return cls(*(float(v) for v in values))

    def get(self, name: str) -> float:
        """Look up a feature by its FEATURE_NAMES name."""
        return float(self.as_array()[FEATURE_NAMES.index(name)])


@dataclass
class BlockTexture:
    """Mean window features of one block; features is None when missing."""
    block_id: str
    label: int
    features: Optional[GlcmFeatures]
    n_windows: int


@dataclass
class ClusterResult:
    """K-means partition of the attribute rows."""
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    iterations: int
    converged: bool = True
    inertia_history: List[float] = field(default_factory=list)

    def validate(self) -> List[str]:
        """Validate labels and inertia and return list of errors."""
        errors = []
        k = self.centroids.shape[0]
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= k):
            errors.append(f"labels must lie in [0, {k})")
        if self.inertia < 0:
            errors.append("inertia must be non-negative")
        return errors


@dataclass
class ClusterSpread:
    """SSI spread inside one k-means class."""
    cluster: int
    count: int
    mean: float
    minimum: float
    maximum: float
    std: float


@dataclass
class BlockLayout:
    """Grid of square block tiles on a raster."""
    rows: int
    cols: int
    tile_size: int
    width: int
    height: int

    @classmethod
    def for_blocks(cls, n_blocks: int, width: int, height: int) -> 'BlockLayout':
        """Smallest near-square grid holding n_blocks tiles on a width x height raster."""
        cols = int(np.ceil(np.sqrt(n_blocks)))
        rows = int(np.ceil(n_blocks / cols))
        tile_size = min(width // cols, height // rows)
        return cls(rows=rows, cols=cols, tile_size=tile_size, width=width, height=height)

    @property
    def capacity(self) -> int:
        """Number of tiles on the grid."""
        return self.rows * self.cols


@dataclass
class SyntheticCensus:
    """Generated census with its planted ground truth."""
    records: List[BlockRecord]
    factor_scores: np.ndarray
    attributes: np.ndarray
    loadings: np.ndarray
    seed: int

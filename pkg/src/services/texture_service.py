"""GLCM texture: quantization, co-occurrence matrices, Haralick features and block means."""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Sequence, Tuple

import numpy as np
from scipy import ndimage
from scipy.special import xlogy

from src.config import config
from src.errors import ValidationError
from src.models import FEATURE_NAMES, BlockMask, BlockTexture, Glcm, GlcmFeatures, Raster

logger = logging.getLogger(__name__)

Offset = Tuple[int, int]

# 0, 45, 90 and 135 degrees at distance one, as (drow, dcol)
FOUR_ORIENTATIONS: Tuple[Offset, ...] = ((0, 1), (-1, 1), (-1, 0), (-1, -1))
SHIFT_11: Tuple[Offset, ...] = ((1, 1),)

OFFSET_MODES = {
    'four-orientations': FOUR_ORIENTATIONS,
    'shift11': SHIFT_11,
}

DEGENERATE_SIGMA = 1e-12


def quantize(raster: Raster, levels: int) -> Raster:
    """
    Map raw intensities linearly onto gray levels 0..levels-1.

    Args:
        raster: Raw intensity raster
        levels: Number of gray levels G >= 2

    Returns:
        Raster whose pixels are floor((v - min) * G / (max - min + 1))
    """
    if levels < 2:
        raise ValidationError(f"levels must be at least 2, got {levels}")
    errors = raster.validate()
    if errors:
        raise ValidationError('; '.join(errors))

    pixels = raster.pixels.astype(np.int64)
    low = int(pixels.min())
    span = int(pixels.max()) - low + 1
    quantized = ((pixels - low) * levels) // span
    return Raster(width=raster.width, height=raster.height, pixels=quantized, maxval=levels - 1)


def glcm_for_patch(patch: np.ndarray, offset: Offset, levels: int = None) -> Glcm:
    """
    Symmetric normalized co-occurrence matrix of a quantized patch.

    Args:
        patch: 2-D array of gray levels
        offset: (drow, dcol) displacement of the second pixel
        levels: Matrix size; defaults to the largest level plus one

    Returns:
        Glcm whose entries sum to 1
    """
    patch = np.asarray(patch, dtype=np.int64)
    if levels is None:
        levels = int(patch.max()) + 1
    first, second = _pair_views(patch, offset)
    if first.size == 0:
        raise ValidationError(f"patch of shape {patch.shape} has no pixel pair at offset {offset}")

    counts = np.zeros((levels, levels), dtype=np.int64)
    np.add.at(counts, (first.ravel(), second.ravel()), 1)
    counts = counts + counts.T
    return Glcm(levels=levels, matrix=counts / counts.sum())


def _pair_views(image: np.ndarray, offset: Offset) -> Tuple[np.ndarray, np.ndarray]:
    """Aligned views of (p, p + offset) pixel pairs, indexed by the pair's top-left anchor."""
    drow, dcol = offset
    height, width = image.shape
    rows = height - abs(drow)
    cols = width - abs(dcol)
    if rows <= 0 or cols <= 0:
        empty = image[:0, :0]
        return empty, empty
    r1 = max(-drow, 0)
    c1 = max(-dcol, 0)
    first = image[r1:r1 + rows, c1:c1 + cols]
    second = image[r1 + drow:r1 + drow + rows, c1 + dcol:c1 + dcol + cols]
    return first, second


def features(glcm: Glcm) -> GlcmFeatures:
    """
    Haralick statistics of a GLCM.

    Args:
        glcm: Normalized co-occurrence matrix

    Returns:
        GlcmFeatures; correlation is 0 when the marginal spread vanishes
    """
    P = np.asarray(glcm.matrix, dtype=float)
    i, j = np.indices(P.shape)
    px = P.sum(axis=1)
    py = P.sum(axis=0)
    levels = np.arange(P.shape[0])
    mu_x = float(levels @ px)
    mu_y = float(levels @ py)
    sigma_x = np.sqrt(float(((levels - mu_x) ** 2) @ px))
    sigma_y = np.sqrt(float(((levels - mu_y) ** 2) @ py))

    covariance = float(((i - mu_x) * (j - mu_y) * P).sum())
    denominator = sigma_x * sigma_y
    correlation = covariance / denominator if denominator >= DEGENERATE_SIGMA else 0.0

    return GlcmFeatures(
        uniformity=float((P ** 2).sum()),
        entropy=float(-xlogy(P, P).sum()),
        contrast=float(((i - j) ** 2 * P).sum()),
        inverse_difference_moment=float((P / (1.0 + (i - j) ** 2)).sum()),
        variance=float(((i - mu_x) ** 2 * P).sum()),
        covariance=covariance,
        correlation=correlation,
    )


class _PairClasses:
    """Unordered gray-level pair classes and their per-class feature terms."""

    def __init__(self, levels: int):
        upper_i, upper_j = np.triu_indices(levels)
        self.n_classes = upper_i.size
        self.index = np.zeros((levels, levels), dtype=np.int64)
        self.index[upper_i, upper_j] = np.arange(self.n_classes)
        self.index[upper_j, upper_i] = np.arange(self.n_classes)

        self.i = upper_i.astype(float)
        self.j = upper_j.astype(float)
        diagonal = upper_i == upper_j
        # An off-diagonal class splits its mass over (i, j) and (j, i)
        self.uniformity_scale = np.where(diagonal, 1.0, 0.5)
        self.off_diagonal = (~diagonal).astype(float)
        self.contrast = (self.i - self.j) ** 2
        self.idm = 1.0 / (1.0 + self.contrast)
        self.midpoint = (self.i + self.j) / 2.0

    def codes(self, quantized: np.ndarray, offset: Offset) -> np.ndarray:
        """Class index of every pixel pair, laid out on the pair anchor grid."""
        first, second = _pair_views(quantized, offset)
        return self.index[first, second]

    def features_from_counts(self, counts: np.ndarray, n_pairs: int) -> np.ndarray:
        """Feature rows (FEATURE_NAMES order) from per-window class counts."""
        q = counts / float(n_pairs)
        uniformity = (q * q) @ self.uniformity_scale
        entropy = -xlogy(q, q).sum(axis=1) + np.log(2.0) * (q @ self.off_diagonal)
        contrast = q @ self.contrast
        idm = q @ self.idm
        mu = q @ self.midpoint
        di = self.i[None, :] - mu[:, None]
        dj = self.j[None, :] - mu[:, None]
        variance = (q * (di * di + dj * dj)).sum(axis=1) / 2.0
        covariance = (q * (di * dj)).sum(axis=1)
        safe = np.where(variance >= DEGENERATE_SIGMA, variance, 1.0)
        correlation = np.where(variance >= DEGENERATE_SIGMA, covariance / safe, 0.0)
        return np.stack([uniformity, entropy, contrast, idm, variance, covariance, correlation], axis=1)


def _sliding_rows(classes: _PairClasses, codes: np.ndarray, window: int, offset: Offset,
                  row_start: int, row_stop: int) -> np.ndarray:
    """
    Features of every window whose top row lies in [row_start, row_stop).

    Column histograms of pair classes are updated incrementally as the
    window band slides down; windows along a row are box sums of them.
    """
    band_rows = window - abs(offset[0])
    band_cols = window - abs(offset[1])
    n_pairs = band_rows * band_cols
    anchor_cols = codes.shape[1]
    n_windows = anchor_cols - band_cols + 1
    columns = np.arange(anchor_cols)

    histogram = np.zeros((anchor_cols, classes.n_classes), dtype=np.int64)
    for anchor_row in range(row_start, row_start + band_rows):
        histogram[columns, codes[anchor_row]] += 1

    cumulative = np.zeros((anchor_cols + 1, classes.n_classes), dtype=np.int64)
    out = np.empty((row_stop - row_start, n_windows, len(FEATURE_NAMES)))
    for top in range(row_start, row_stop):
        if top > row_start:
            histogram[columns, codes[top - 1]] -= 1
            histogram[columns, codes[top + band_rows - 1]] += 1
        np.cumsum(histogram, axis=0, out=cumulative[1:])
        counts = cumulative[band_cols:] - cumulative[:n_windows]
        out[top - row_start] = classes.features_from_counts(counts, n_pairs)
    return out


def window_features(raster: Raster, window: int = None, levels: int = None,
                    offsets: Sequence[Offset] = FOUR_ORIENTATIONS, threads: int = 1) -> np.ndarray:
    """
    Orientation-averaged Haralick features for every full window.

    Args:
        raster: Raw intensity raster (quantized internally)
        window: Odd window side W
        levels: Gray levels G
        offsets: Pixel-pair displacements to average over
        threads: Worker threads; output is identical for any count

    Returns:
        Array (height - W + 1, width - W + 1, 7); entry [r, c] belongs to the
        window centered on pixel (r + W // 2, c + W // 2)
    """
    window = config.glcm_window if window is None else window
    levels = config.glcm_levels if levels is None else levels
    if window < 1 or window % 2 == 0:
        raise ValidationError(f"window must be a positive odd number, got {window}")
    if window > min(raster.width, raster.height):
        raise ValidationError(
            f"raster {raster.width}x{raster.height} is smaller than the {window}x{window} window"
        )
    if not offsets:
        raise ValidationError("at least one offset is required")
    for drow, dcol in offsets:
        if abs(drow) >= window or abs(dcol) >= window:
            raise ValidationError(f"offset {(drow, dcol)} does not fit a {window}-pixel window")

    quantized = quantize(raster, levels).pixels
    classes = _PairClasses(levels)
    codes = [classes.codes(quantized, offset) for offset in offsets]

    n_rows = raster.height - window + 1
    tiles = [(int(t[0]), int(t[-1]) + 1) for t in np.array_split(np.arange(n_rows), min(threads, n_rows))]

    def run_tile(bounds: Tuple[int, int]) -> np.ndarray:
        start, stop = bounds
        total = None
        for offset, offset_codes in zip(offsets, codes):
            part = _sliding_rows(classes, offset_codes, window, offset, start, stop)
            total = part if total is None else total + part
        return total / len(offsets)

    logger.info(
        f"Computing window features: {raster.width}x{raster.height}, W={window}, G={levels}, "
        f"{len(offsets)} offset(s), {len(tiles)} tile(s)"
    )
    if len(tiles) == 1:
        parts = [run_tile(tiles[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(tiles)) as pool:
            parts = list(pool.map(run_tile, tiles))
    return np.concatenate(parts, axis=0)


def block_texture(raster: Raster, mask: BlockMask, window: int = None, levels: int = None,
                  offsets: Sequence[Offset] = FOUR_ORIENTATIONS, threads: int = 1,
                  exclude_straddling: bool = False) -> List[BlockTexture]:
    """
    Mean window features per block, assigning each window to its center label.

    Args:
        raster: Raw intensity raster
        mask: Block labels with the same dimensions
        window: Odd window side W
        levels: Gray levels G
        offsets: Pixel-pair displacements to average over
        threads: Worker threads
        exclude_straddling: Drop windows that cover more than one label

    Returns:
        One BlockTexture per known label, ordered by label; blocks without
        any valid window carry features=None
    """
    window = config.glcm_window if window is None else window
    errors = mask.validate(raster)
    if errors:
        raise ValidationError('; '.join(errors))

    grid = window_features(raster, window=window, levels=levels, offsets=offsets, threads=threads)
    half = window // 2
    labels = mask.labels.astype(np.int64)
    centers = labels[half:labels.shape[0] - half, half:labels.shape[1] - half]

    valid = centers != 0
    if exclude_straddling:
        lowest = ndimage.minimum_filter(labels, size=window, mode='nearest')
        highest = ndimage.maximum_filter(labels, size=window, mode='nearest')
        uniform = (lowest == highest)[half:labels.shape[0] - half, half:labels.shape[1] - half]
        valid &= uniform

    known = sorted(set(int(v) for v in np.unique(labels) if v != 0) | set(mask.block_ids))
    size = max(known) + 1 if known else 1
    center_labels = centers[valid]
    n_windows = np.bincount(center_labels, minlength=size)
    sums = np.stack(
        [np.bincount(center_labels, weights=grid[..., k][valid], minlength=size)
         for k in range(len(FEATURE_NAMES))],
        axis=1,
    )

    results = []
    missing = []
    for label in known:
        count = int(n_windows[label])
        block_id = mask.block_id(label)
        if count == 0:
            missing.append(block_id)
            results.append(BlockTexture(block_id=block_id, label=label, features=None, n_windows=0))
        else:
            mean = GlcmFeatures.from_array(sums[label] / count)
            results.append(BlockTexture(block_id=block_id, label=label, features=mean, n_windows=count))

    if not any(result.n_windows for result in results):
        raise ValidationError("no block has a valid window center")
    if missing:
        logger.warning(f"{len(missing)} block(s) have no valid window and are reported missing")
    logger.info(f"Computed texture for {len(results) - len(missing)} block(s)")
    return results

"""Seeded synthetic census tables and texture rasters with planted structure."""
import logging
from typing import Dict, Sequence, Tuple

import numpy as np

from src.errors import ValidationError
from src.models import BlockLayout, BlockMask, BlockRecord, Raster, SsiVector, SyntheticCensus
from src.utils import make_generator

logger = logging.getLogger(__name__)

# Two-humped latent deprivation: middle-class peak and slum peak
MIXTURE_WEIGHTS = (0.7, 0.3)
MIXTURE_MEANS = (0.15, 0.6)
MIXTURE_SDS = (0.05, 0.08)

# Affine embedding of the standardized one-factor model into [0, 1]
ATTRIBUTE_CENTER = 0.3
ATTRIBUTE_SCALE = 0.1

HOUSES_RANGE = (50, 500)
ROOMS_PER_HOUSE = 2
DENSITY_FLOOR = 1.0
DENSITY_SPAN = 5.0

MAX_AMPLITUDE = 200.0
BASE_INTENSITY = 128.0
NOISE_SIGMA = 3.0


def mixture_moments() -> Tuple[float, float]:
    """Mean and standard deviation of the (unclipped) latent mixture."""
    w = np.asarray(MIXTURE_WEIGHTS)
    m = np.asarray(MIXTURE_MEANS)
    s = np.asarray(MIXTURE_SDS)
    mean = float(w @ m)
    variance = float(w @ (s ** 2 + m ** 2)) - mean ** 2
    return mean, float(np.sqrt(variance))


def sample_mixture(n: int, rng: np.random.Generator) -> np.ndarray:
    """
    Draw latent scores from the two-component mixture, clipped to [0, 1].

    Args:
        n: Number of draws
        rng: Seeded generator

    Returns:
        Vector of scores
    """
    component = (rng.random(n) >= MIXTURE_WEIGHTS[0]).astype(int)
    means = np.asarray(MIXTURE_MEANS)[component]
    sds = np.asarray(MIXTURE_SDS)[component]
    return np.clip(rng.normal(means, sds), 0.0, 1.0)


def generate_census(n: int, loadings: Sequence[float], seed: int,
                    noise_scale: float = 1.0, locality_size: int = 50,
                    year: int = 2010) -> SyntheticCensus:
    """
    Generate census blocks whose attributes follow a planted one-factor model.

    Attribute j is center + scale * (l_j * z + sqrt(1 - l_j^2) * noise_scale * e)
    with z the standardized latent score and e standard normal, clipped to
    [0, 1] and converted to integer household counts.

    Args:
        n: Number of blocks (at least 100)
        loadings: Four planted loadings in (0, 1)
        seed: Generator seed
        noise_scale: Unique-variance multiplier; 0 gives noiseless attributes
        locality_size: Blocks per synthetic locality
        year: Census year stamped on every record

    Returns:
        SyntheticCensus with records and planted ground truth
    """
    loadings = np.asarray(loadings, dtype=float)
    if n < 100:
        raise ValidationError(f"synthetic census needs at least 100 blocks, got {n}")
    if loadings.shape != (4,) or (loadings <= 0).any() or (loadings >= 1).any():
        raise ValidationError("loadings must be four values in (0, 1)")
    if noise_scale < 0:
        raise ValidationError("noise_scale must be non-negative")

    rng = make_generator(seed)
    scores = sample_mixture(n, rng)
    mean, sd = mixture_moments()
    standardized = (scores - mean) / sd

    noise = rng.standard_normal((n, 4))
    uniqueness = np.sqrt(1.0 - loadings ** 2) * noise_scale
    latent = standardized[:, None] * loadings[None, :] + noise * uniqueness[None, :]
    attributes = np.clip(ATTRIBUTE_CENTER + ATTRIBUTE_SCALE * latent, 0.0, 1.0)

    houses = rng.integers(HOUSES_RANGE[0], HOUSES_RANGE[1] + 1, size=n)
    rooms = houses * ROOMS_PER_HOUSE
    sanitation = np.rint(attributes[:, 0] * houses).astype(int)
    water = np.rint(attributes[:, 1] * houses).astype(int)
    structural = np.rint(attributes[:, 2] * houses).astype(int)
    occupants = np.rint((DENSITY_FLOOR + DENSITY_SPAN * attributes[:, 3]) * rooms).astype(int)

    width = len(str(n))
    records = [
        BlockRecord(
            block_id=f"B{index + 1:0{width}d}",
            locality_id=f"L{index // locality_size + 1:03d}",
            year=year,
            houses_total=int(houses[index]),
            houses_no_water=int(water[index]),
            houses_dirt_floor_or_single_room=int(structural[index]),
            houses_no_sanitation=int(sanitation[index]),
            occupants_total=int(occupants[index]),
            rooms_total=int(rooms[index]),
        )
        for index in range(n)
    ]
    logger.info(f"Generated {n} synthetic blocks with seed {seed}")
    return SyntheticCensus(
        records=records,
        factor_scores=scores,
        attributes=attributes,
        loadings=loadings,
        seed=seed,
    )


def planted_ssi(census: SyntheticCensus) -> SsiVector:
    """
    SSI implied by the planted loadings and continuous attributes.

    Args:
        census: Generated census

    Returns:
        SsiVector over the census block ids
    """
    communalities = census.loadings ** 2
    omega = communalities / communalities.sum()
    values = np.clip(census.attributes @ omega, 0.0, 1.0)
    return SsiVector(block_ids=[r.block_id for r in census.records], values=values)


def generate_raster(ssi: SsiVector, block_layout: BlockLayout, seed: int,
                    noise_sigma: float = NOISE_SIGMA,
                    max_amplitude: float = MAX_AMPLITUDE) -> Tuple[Raster, BlockMask, Dict[str, float]]:
    """
    Render each block as a checkered tile whose contrast falls as SSI rises.

    Args:
        ssi: SSI per block; tile i belongs to ssi.block_ids[i]
        block_layout: Tile grid on the raster
        seed: Generator seed for pixel noise
        noise_sigma: Standard deviation of additive pixel noise
        max_amplitude: Checker amplitude of an SSI = 0 block

    Returns:
        8-bit raster, block mask (labels 1..n) and per-block amplitudes
    """
    n_blocks = len(ssi.block_ids)
    if n_blocks > block_layout.capacity:
        raise ValidationError(
            f"{n_blocks} blocks do not fit a {block_layout.rows}x{block_layout.cols} grid"
        )
    if block_layout.tile_size < 1:
        raise ValidationError("tile size must be at least one pixel")

    rng = make_generator(seed)
    height, width = block_layout.height, block_layout.width
    intensity = np.full((height, width), BASE_INTENSITY)
    labels = np.zeros((height, width), dtype=np.int64)
    tile = block_layout.tile_size
    rows, cols = np.indices((tile, tile))
    checker = ((rows + cols) % 2) - 0.5

    amplitudes: Dict[str, float] = {}
    for index, (block_id, value) in enumerate(zip(ssi.block_ids, ssi.values)):
        amplitude = max_amplitude * (1.0 - float(np.clip(value, 0.0, 1.0)))
        top = (index // block_layout.cols) * tile
        left = (index % block_layout.cols) * tile
        intensity[top:top + tile, left:left + tile] = BASE_INTENSITY + amplitude * checker
        labels[top:top + tile, left:left + tile] = index + 1
        amplitudes[block_id] = amplitude

    if noise_sigma > 0:
        intensity = intensity + rng.normal(0.0, noise_sigma, size=intensity.shape)
    pixels = np.clip(np.rint(intensity), 0, 255).astype(np.int64)

    raster = Raster(width=width, height=height, pixels=pixels, maxval=255)
    mask = BlockMask(
        width=width,
        height=height,
        labels=labels,
        block_ids={index + 1: block_id for index, block_id in enumerate(ssi.block_ids)},
    )
    logger.info(f"Rendered {n_blocks} block tiles of {tile}px on a {width}x{height} raster")
    return raster, mask, amplitudes

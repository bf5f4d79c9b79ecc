"""Shared fixtures."""
import numpy as np
import pytest

from src.models import ATTRIBUTE_COLUMNS, AttributeMatrix, BlockRecord
from src.services import synth_service

# Loadings of the reference single-factor solution
REFERENCE_LOADINGS = np.array([0.72, 0.43, 0.84, 0.46])


def one_factor_matrix(n: int = 2000, loadings=REFERENCE_LOADINGS, seed: int = 7) -> AttributeMatrix:
    """Attributes drawn from an exact one-factor model, affinely squeezed into [0, 1]."""
    rng = np.random.Generator(np.random.Philox(seed))
    z = rng.standard_normal(n)
    e = rng.standard_normal((n, len(loadings)))
    latent = z[:, None] * loadings[None, :] + e * np.sqrt(1.0 - loadings ** 2)[None, :]
    values = np.clip(0.5 + 0.08 * latent, 0.0, 1.0)
    return AttributeMatrix(block_ids=[f"B{i:05d}" for i in range(n)], values=values)


def make_record(block_id: str = 'B1', locality_id: str = 'L1', year: int = 2010, houses: int = 100,
                no_water: int = 10, structural: int = 20, no_sanitation: int = 30,
                occupants: int = 400, rooms: int = 200) -> BlockRecord:
    """Build a census record with sensible defaults."""
    return BlockRecord(
        block_id=block_id,
        locality_id=locality_id,
        year=year,
        houses_total=houses,
        houses_no_water=no_water,
        houses_dirt_floor_or_single_room=structural,
        houses_no_sanitation=no_sanitation,
        occupants_total=occupants,
        rooms_total=rooms,
    )


@pytest.fixture
def reference_matrix():
    """Large sample of the reference one-factor model."""
    return one_factor_matrix()


@pytest.fixture
def independent_matrix():
    """Attributes with (nearly) no common factor."""
    rng = np.random.Generator(np.random.Philox(11))
    values = rng.uniform(0.0, 1.0, size=(2000, len(ATTRIBUTE_COLUMNS)))
    return AttributeMatrix(block_ids=[f"B{i:05d}" for i in range(2000)], values=values)


@pytest.fixture
def synthetic_census():
    """Small seeded synthetic census."""
    return synth_service.generate_census(500, REFERENCE_LOADINGS, seed=3)


@pytest.fixture
def census_csv(tmp_path):
    """A four-block census table on disk."""
    path = tmp_path / 'census.csv'
    path.write_text(
        "block_id,locality_id,year,houses_total,houses_no_water,houses_dirt_floor_or_single_room,"
        "houses_no_sanitation,occupants_total,rooms_total\n"
        "B1,L1,2010,100,10,20,30,200,100\n"
        "B2,L1,2010,50,25,0,5,300,100\n"
        "B3,L2,2010,200,0,40,100,500,100\n"
        "B4,L2,2010,0,0,0,0,0,0\n"
    )
    return path

"""Test the k-means baseline."""
import numpy as np
import pytest

from src.errors import DimensionError, ValidationError
from src.models import SsiVector
from src.services.cluster_service import cluster_ssi_spread, kmeans, kmeans_plusplus
from src.utils import make_generator


def three_blobs() -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(2))
    centers = np.array([[0.1, 0.1, 0.1, 0.1], [0.5, 0.5, 0.5, 0.5], [0.9, 0.9, 0.9, 0.9]])
    return np.vstack([c + rng.normal(0.0, 0.02, size=(60, 4)) for c in centers])


class TestKmeans:
    """Test Lloyd iterations."""

    def test_separates_blobs(self):
        """Test well-separated groups end up in distinct clusters for any seed."""
        points = three_blobs()

        for seed in range(20):
            result = kmeans(points, k=3, seed=seed)

            assert result.converged
            assert len(set(result.labels[:60])) == 1
            assert len(set(result.labels[60:120])) == 1
            assert len(set(result.labels[120:])) == 1
            assert len(set(result.labels)) == 3
            assert result.validate() == []

    def test_deterministic_for_seed(self):
        """Test equal seeds give equal labels."""
        points = three_blobs()

        first = kmeans(points, k=4, seed=7)
        second = kmeans(points, k=4, seed=7)

        np.testing.assert_array_equal(first.labels, second.labels)
        assert first.inertia == second.inertia

    def test_inertia_never_increases(self, reference_matrix):
        """Test the objective is monotone across iterations."""
        result = kmeans(reference_matrix, k=4, seed=3)

        history = np.array(result.inertia_history)
        assert (np.diff(history) <= 1e-9).all()
        assert result.inertia == pytest.approx(history[-1])

    def test_inertia_monotone_on_random_instances(self):
        """Test the objective never rises on many small random problems."""
        rng = np.random.Generator(np.random.Philox(15))
        for trial in range(100):
            points = rng.uniform(size=(int(rng.integers(8, 40)), 4))
            result = kmeans(points, k=int(rng.integers(1, 6)), seed=trial)

            assert (np.diff(result.inertia_history) <= 1e-12).all()

    def test_one_dimensional_optimum(self):
        """Test four points on a line split into their optimal pairs."""
        points = np.array([[0.0], [1.0], [10.0], [11.0]])

        result = kmeans(points, k=2, seed=0)

        assert result.labels[0] == result.labels[1]
        assert result.labels[2] == result.labels[3]
        assert result.labels[0] != result.labels[2]
        assert result.inertia == pytest.approx(1.0)

    def test_k_larger_than_points(self):
        """Test k above the row count is rejected."""
        with pytest.raises(ValidationError):
            kmeans(np.zeros((3, 4)), k=4)

    def test_bad_shape(self):
        """Test a vector input is a dimension error."""
        with pytest.raises(DimensionError):
            kmeans(np.zeros(5), k=2)

    def test_duplicate_points(self):
        """Test identical rows still yield a valid partition."""
        points = np.vstack([np.zeros((5, 4)), np.ones((5, 4))])

        result = kmeans(points, k=3, seed=0)

        assert result.validate() == []
        assert result.inertia == pytest.approx(0.0)

    def test_plusplus_picks_data_points(self):
        """Test seeding chooses rows of the data."""
        points = three_blobs()

        centroids = kmeans_plusplus(points, 3, make_generator(0))

        for centroid in centroids:
            assert np.isclose(points, centroid).all(axis=1).any()

    def test_plusplus_covers_every_blob(self):
        """Test greedy seeding places one centroid in each separated group."""
        points = three_blobs()

        for seed in range(20):
            centroids = kmeans_plusplus(points, 3, make_generator(seed))

            groups = {int(np.flatnonzero((points == c).all(axis=1))[0]) // 60 for c in centroids}
            assert groups == {0, 1, 2}


class TestClusterSpread:
    """Test SSI spread per class."""

    def test_spread(self):
        """Test per-cluster statistics."""
        points = three_blobs()
        result = kmeans(points, k=3, seed=1)
        values = points.mean(axis=1)
        ssi = SsiVector(block_ids=[str(i) for i in range(len(values))], values=values)

        spreads = cluster_ssi_spread(result, ssi)

        assert sum(s.count for s in spreads) == len(values)
        for spread in spreads:
            assert spread.minimum <= spread.mean <= spread.maximum
            assert spread.std >= 0.0

    def test_length_mismatch(self):
        """Test SSI and labels must align."""
        result = kmeans(three_blobs(), k=2, seed=0)

        with pytest.raises(DimensionError):
            cluster_ssi_spread(result, SsiVector(block_ids=['a'], values=np.array([0.1])))

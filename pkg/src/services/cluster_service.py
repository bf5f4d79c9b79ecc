"""K-means baseline over the deprivation attributes."""
import logging
from typing import List, Union

import numpy as np

from src.config import config
from src.errors import DimensionError, ValidationError
from src.models import AttributeMatrix, ClusterResult, ClusterSpread, SsiVector
from src.utils import make_generator

logger = logging.getLogger(__name__)


def _squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Squared Euclidean distance of every point to every centroid."""
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum('ijk,ijk->ij', diff, diff)


def kmeans_plusplus(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """
    Pick k initial centroids by greedy D^2 weighting.

    Each step draws 2 + ln(k) candidates with probability proportional to
    their squared distance from the nearest chosen centroid and keeps the
    one that lowers the total squared distance most.

    Args:
        points: n x d data
        k: Number of centroids
        rng: Seeded generator

    Returns:
        k x d centroid matrix
    """
    n_points = points.shape[0]
    n_trials = 2 + int(np.log(k))
    centroids = np.empty((k, points.shape[1]))
    centroids[0] = points[rng.integers(0, n_points)]
    closest = _squared_distances(points, centroids[:1])[:, 0]
    for index in range(1, k):
        total = closest.sum()
        if total > 0:
            candidates = rng.choice(n_points, size=n_trials, p=closest / total)
            potentials = np.minimum(closest[None, :], _squared_distances(points, points[candidates]).T)
            best = int(np.argmin(potentials.sum(axis=1)))
            chosen = int(candidates[best])
            closest = potentials[best]
        else:
            # Remaining points coincide with chosen centroids
            chosen = int(np.argmax(closest))
        centroids[index] = points[chosen]
    return centroids


def kmeans(X: Union[AttributeMatrix, np.ndarray], k: int = None, seed: int = 0,
           max_iter: int = None) -> ClusterResult:
    """
    Lloyd's algorithm with k-means++ seeding.

    Args:
        X: Attribute matrix (or raw n x d array)
        k: Number of clusters
        seed: Generator seed; equal seeds give equal labels
        max_iter: Iteration cap

    Returns:
        ClusterResult with labels, centroids, inertia and per-iteration inertia
    """
    k = config.kmeans_k if k is None else k
    max_iter = config.kmeans_max_iter if max_iter is None else max_iter
    points = X.values if isinstance(X, AttributeMatrix) else np.asarray(X, dtype=float)
    if points.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {points.shape}")
    n_points = points.shape[0]
    if k < 1:
        raise ValidationError(f"k must be at least 1, got {k}")
    if k > n_points:
        raise ValidationError(f"k={k} exceeds the number of points {n_points}")
    if max_iter < 1:
        raise ValidationError(f"max_iter must be at least 1, got {max_iter}")

    rng = make_generator(seed)
    centroids = kmeans_plusplus(points, k, rng)

    labels = np.full(n_points, -1)
    history: List[float] = []
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        distances = _squared_distances(points, centroids)
        new_labels = np.argmin(distances, axis=1)
        history.append(float(distances[np.arange(n_points), new_labels].sum()))
        if np.array_equal(new_labels, labels):
            converged = True
            break
        labels = new_labels

        nearest = distances[np.arange(n_points), labels]
        for cluster in range(k):
            members = labels == cluster
            if members.any():
                centroids[cluster] = points[members].mean(axis=0)
            else:
                farthest = int(np.argmax(nearest))
                logger.debug(f"Re-seeding empty cluster {cluster} at point {farthest}")
                centroids[cluster] = points[farthest]
                labels[farthest] = cluster
                nearest[farthest] = 0.0

    if not converged:
        logger.warning(f"k-means stopped at max_iter={max_iter} before labels stabilized")

    distances = _squared_distances(points, centroids)
    inertia = float(distances[np.arange(n_points), labels].sum())
    result = ClusterResult(
        labels=labels,
        centroids=centroids,
        inertia=inertia,
        iterations=iterations,
        converged=converged,
        inertia_history=history,
    )
    logger.info(f"k-means k={k}: inertia={inertia:.6f} after {iterations} iteration(s)")
    return result


def cluster_ssi_spread(result: ClusterResult, ssi: SsiVector) -> List[ClusterSpread]:
    """
    SSI spread inside each class, showing the variation a discrete map hides.

    Args:
        result: Clustering of the same blocks, in the same order
        ssi: SSI vector

    Returns:
        One ClusterSpread per non-empty cluster
    """
    values = np.asarray(ssi.values, dtype=float)
    if values.shape[0] != result.labels.shape[0]:
        raise DimensionError(
            f"{values.shape[0]} SSI values but {result.labels.shape[0]} cluster labels"
        )
    spreads = []
    for cluster in range(result.centroids.shape[0]):
        members = values[result.labels == cluster]
        if members.size == 0:
            continue
        spreads.append(ClusterSpread(
            cluster=cluster,
            count=int(members.size),
            mean=float(members.mean()),
            minimum=float(members.min()),
            maximum=float(members.max()),
            std=float(members.std()),
        ))
    return spreads

"""Single-factor principal axis factoring, communality weights and the SSI."""
import logging
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy.signal import find_peaks
from scipy.stats import gaussian_kde, norm

from src.config import config
from src.errors import (
    AdequacyError,
    DegenerateDataError,
    DimensionError,
    NoCommonFactorError,
    ValidationError,
)
from src.models import (
    AttributeMatrix,
    CorrelationSummary,
    FactorSolution,
    Mode,
    SsiVector,
)
from src.services.stats_service import inverse_correlation, summarize_correlations

logger = logging.getLogger(__name__)

# Fallback bandwidth when every SSI value is identical
POINT_MASS_BANDWIDTH = 0.01
# Relative sample range below which data count as a point mass
POINT_MASS_TOLERANCE = 1e-12
DEFAULT_GRID = 512
DEFAULT_MIN_PROMINENCE = 0.05


def initial_communalities(R: np.ndarray) -> np.ndarray:
    """
    Squared multiple correlations used to seed the iteration.

    Args:
        R: Correlation matrix

    Returns:
        Vector h0 with h0_j = 1 - 1 / inv(R)_jj
    """
    inverse = inverse_correlation(R)
    return 1.0 - 1.0 / np.diag(inverse)


def principal_axis_factor(R: np.ndarray, tol: float = None, max_iter: int = None) -> FactorSolution:
    """
    Extract one common factor by iterated principal axis factoring.

    Args:
        R: Correlation matrix
        tol: Convergence tolerance on the largest communality change
        max_iter: Iteration cap

    Returns:
        FactorSolution with loadings, communalities and normalized weights
    """
    tol = config.paf_tolerance if tol is None else tol
    max_iter = config.paf_max_iter if max_iter is None else max_iter
    if tol <= 0:
        raise ValidationError(f"tolerance must be positive, got {tol}")
    if max_iter < 1:
        raise ValidationError(f"max_iter must be at least 1, got {max_iter}")

    R = np.asarray(R, dtype=float)
    R = (R + R.T) / 2.0
    communalities = initial_communalities(R)

    loadings = np.zeros_like(communalities)
    eigenvalue = 0.0
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        reduced = R.copy()
        np.fill_diagonal(reduced, communalities)
        eigenvalues, eigenvectors = np.linalg.eigh(reduced)
        eigenvalue = float(eigenvalues[-1])
        if eigenvalue <= 1e-12:
            raise NoCommonFactorError(
                f"no common factor: leading eigenvalue {eigenvalue:.3g} at iteration {iterations}"
            )

        loadings = np.sqrt(eigenvalue) * eigenvectors[:, -1]
        updated = loadings ** 2
        change = float(np.max(np.abs(updated - communalities)))
        communalities = updated
        if change < tol:
            converged = True
            break

    if loadings.sum() < 0:
        loadings = -loadings
    communalities = loadings ** 2

    if not converged:
        logger.warning(f"Principal axis factoring did not converge in {max_iter} iterations")
    if (communalities > 1.0).any():
        logger.warning("Heywood case: a communality exceeds 1")

    solution = FactorSolution(
        loadings=loadings,
        communalities=communalities,
        weights=weights(communalities),
        iterations=iterations,
        converged=converged,
        tolerance=tol,
        eigenvalue=eigenvalue,
    )
    logger.info(
        f"PAF finished after {iterations} iteration(s), converged={converged}, "
        f"loadings={np.round(loadings, 4).tolist()}"
    )
    return solution


def weights(solution: Union[FactorSolution, np.ndarray]) -> np.ndarray:
    """
    Normalize communalities into SSI weights.

    Args:
        solution: Factor solution or a raw communality vector

    Returns:
        Weights w_j = h_j / sum(h)
    """
    communalities = solution.communalities if isinstance(solution, FactorSolution) else solution
    communalities = np.asarray(communalities, dtype=float)
    total = communalities.sum()
    if total <= 0:
        raise DegenerateDataError("all communalities are zero; weights undefined")
    return communalities / total


def fit_weights(X: AttributeMatrix, tol: float = None, max_iter: int = None,
                threshold: float = None) -> Tuple[CorrelationSummary, FactorSolution]:
    """
    Check sampling adequacy, then fit the single-factor model.

    Args:
        X: Attribute matrix
        tol: PAF tolerance
        max_iter: PAF iteration cap
        threshold: KMO cut-off

    Returns:
        Correlation summary and factor solution
    """
    summary = summarize_correlations(X, threshold=threshold)
    if not summary.kmo.factorable:
        raise AdequacyError(
            f"KMO={summary.kmo.value:.4f} below {summary.kmo.threshold}; data are not factorable"
        )
    return summary, principal_axis_factor(summary.r_matrix, tol=tol, max_iter=max_iter)


def compute_ssi(X: AttributeMatrix, omega: np.ndarray) -> SsiVector:
    """
    Slum Severity Index as the dot product of attributes and weights.

    Args:
        X: Attribute matrix with entries in [0, 1]
        omega: Non-negative weights summing to 1, in ATTRIBUTE_COLUMNS order

    Returns:
        SsiVector aligned with X.block_ids
    """
    omega = np.asarray(omega, dtype=float)
    if omega.ndim != 1 or omega.shape[0] != X.values.shape[1]:
        raise DimensionError(
            f"weights of shape {omega.shape} do not match {X.values.shape[1]} attribute columns"
        )
    if (omega < 0).any() or abs(float(omega.sum()) - 1.0) > 1e-9:
        raise ValidationError("weights must be non-negative and sum to 1")
    errors = X.validate()
    if errors:
        raise ValidationError('; '.join(errors))

    values = np.clip(X.values @ omega, 0.0, 1.0)
    return SsiVector(block_ids=list(X.block_ids), values=values)


def is_point_mass(values: np.ndarray) -> bool:
    """True when every sample sits on the same value, up to rounding."""
    values = np.asarray(values, dtype=float)
    scale = max(1.0, float(np.abs(values).max()))
    return float(np.ptp(values)) <= POINT_MASS_TOLERANCE * scale


def silverman_bandwidth(values: np.ndarray) -> float:
    """
    Silverman's rule-of-thumb bandwidth.

    Args:
        values: Samples

    Returns:
        Bandwidth, falling back to POINT_MASS_BANDWIDTH for constant data
    """
    values = np.asarray(values, dtype=float)
    if values.size < 2 or is_point_mass(values):
        logger.warning(f"Samples are constant; using bandwidth {POINT_MASS_BANDWIDTH}")
        return POINT_MASS_BANDWIDTH
    std = values.std(ddof=1)
    q75, q25 = np.percentile(values, [75, 25])
    spread = [s for s in (std, (q75 - q25) / 1.34) if s > 0]
    return 0.9 * min(spread) * values.size ** (-0.2)


def kernel_density(values: np.ndarray, bandwidth: float,
                   grid: int = DEFAULT_GRID) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gaussian kernel density on a uniform grid over [0, 1].

    Args:
        values: Samples
        bandwidth: Kernel standard deviation
        grid: Number of grid points

    Returns:
        Grid locations and density values
    """
    if bandwidth <= 0:
        raise ValidationError(f"bandwidth must be positive, got {bandwidth}")
    if grid < 3:
        raise ValidationError(f"grid needs at least 3 points, got {grid}")
    if np.size(values) == 0:
        raise DegenerateDataError("kernel density needs at least one value")

    values = np.asarray(values, dtype=float)
    points = np.linspace(0.0, 1.0, grid)
    if values.size < 2 or is_point_mass(values):
        # gaussian_kde cannot factor a singular covariance
        return points, norm.pdf(points, loc=float(values.mean()), scale=bandwidth)

    # gaussian_kde scales its kernel by the sample standard deviation
    kde = gaussian_kde(values, bw_method=bandwidth / values.std(ddof=1))
    return points, kde(points)


def mode_density(ssi: Union[SsiVector, np.ndarray], bandwidth: Optional[float] = None,
                 grid: int = DEFAULT_GRID) -> Tuple[np.ndarray, np.ndarray]:
    """
    SSI density used for peak search.

    Args:
        ssi: SSI vector or raw values
        bandwidth: Kernel bandwidth; Silverman's rule when None
        grid: Number of grid points on [0, 1]

    Returns:
        Grid locations and density values
    """
    values = np.asarray(ssi.values if isinstance(ssi, SsiVector) else ssi, dtype=float)
    if values.size < 10:
        raise DegenerateDataError(f"mode detection needs at least 10 values, got {values.size}")
    if bandwidth is None:
        bandwidth = silverman_bandwidth(values)
    logger.debug(f"KDE bandwidth {bandwidth:.4f} over {values.size} values")
    return kernel_density(values, bandwidth, grid)


def density_peaks(points: np.ndarray, density: np.ndarray,
                  min_prominence: float = DEFAULT_MIN_PROMINENCE) -> List[Mode]:
    """
    Local maxima of a density curve.

    Args:
        points: Grid locations
        density: Density at each location
        min_prominence: Minimum peak prominence relative to the highest density

    Returns:
        Modes in descending density order
    """
    # Pad below zero so maxima on the grid edges count as peaks
    padded = np.concatenate(([-1.0], density, [-1.0]))
    peaks, _ = find_peaks(padded, prominence=min_prominence * density.max())
    peaks = peaks - 1

    modes = [Mode(location=float(points[i]), density=float(density[i])) for i in peaks]
    modes.sort(key=lambda mode: (-mode.density, mode.location))
    logger.info(f"Found {len(modes)} mode(s): {[round(m.location, 3) for m in modes]}")
    return modes


def find_modes(ssi: Union[SsiVector, np.ndarray], bandwidth: Optional[float] = None,
               grid: int = DEFAULT_GRID,
               min_prominence: float = DEFAULT_MIN_PROMINENCE) -> List[Mode]:
    """
    Local maxima of the SSI density.

    Args:
        ssi: SSI vector or raw values
        bandwidth: Kernel bandwidth; Silverman's rule when None
        grid: Number of grid points on [0, 1]
        min_prominence: Minimum peak prominence relative to the highest density

    Returns:
        Modes in descending density order
    """
    points, density = mode_density(ssi, bandwidth, grid)
    return density_peaks(points, density, min_prominence)

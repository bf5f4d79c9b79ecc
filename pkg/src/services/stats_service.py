"""Correlation structure and sampling adequacy of attribute matrices."""
import logging
from typing import Sequence, Union

import numpy as np
from scipy.stats import pearsonr

from src.config import config
from src.errors import AdequacyError, DegenerateDataError, DimensionError, SingularMatrixError
from src.models import ATTRIBUTE_COLUMNS, AttributeMatrix, CorrelationSummary, KmoResult

logger = logging.getLogger(__name__)

MAX_CONDITION_NUMBER = 1e12


def correlation_matrix(X: Union[AttributeMatrix, np.ndarray]) -> np.ndarray:
    """
    Pearson correlation matrix of the attribute columns.

    Args:
        X: Attribute matrix (or raw n x p array)

    Returns:
        Symmetric p x p matrix with unit diagonal
    """
    values = X.values if isinstance(X, AttributeMatrix) else np.asarray(X, dtype=float)
    if values.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {values.shape}")
    n_rows = values.shape[0]
    if n_rows < 3:
        raise DegenerateDataError(f"correlation needs at least 3 rows, got {n_rows}")

    flat = np.flatnonzero(np.ptp(values, axis=0) == 0.0)
    if flat.size:
        names = [_column_name(j, values.shape[1]) for j in flat]
        raise DegenerateDataError(f"zero-variance column(s): {', '.join(names)}")

    r_matrix = np.corrcoef(values, rowvar=False)
    r_matrix = np.clip((r_matrix + r_matrix.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(r_matrix, 1.0)
    return r_matrix


def _column_name(index: int, width: int) -> str:
    """Attribute name for a column index, or its number for foreign widths."""
    if width == len(ATTRIBUTE_COLUMNS):
        return ATTRIBUTE_COLUMNS[index]
    return f"column {index}"


def inverse_correlation(R: np.ndarray) -> np.ndarray:
    """Invert a symmetrized correlation matrix, refusing ill-conditioned input."""
    R = np.asarray(R, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {R.shape}")
    symmetric = (R + R.T) / 2.0
    condition = np.linalg.cond(symmetric)
    if not np.isfinite(condition) or condition > MAX_CONDITION_NUMBER:
        raise SingularMatrixError(
            f"correlation matrix is singular (condition number {condition:.3g}); "
            "attributes are multicollinear, consider removing one"
        )
    return np.linalg.inv(symmetric)


def partial_correlations(R: np.ndarray) -> np.ndarray:
    """
    Anti-image partial correlations from the inverse correlation matrix.

    Args:
        R: Correlation matrix

    Returns:
        Symmetric matrix of partial correlations with unit diagonal
    """
    inverse = inverse_correlation(R)
    scale = np.sqrt(np.diag(inverse))
    partials = -inverse / np.outer(scale, scale)
    partials = (partials + partials.T) / 2.0
    np.fill_diagonal(partials, 1.0)
    return partials


def kmo(R: np.ndarray, threshold: float = None) -> KmoResult:
    """
    Kaiser-Meyer-Olkin measure of sampling adequacy.

    Args:
        R: Correlation matrix
        threshold: Factorability cut-off (defaults to configuration)

    Returns:
        Overall statistic, per-variable MSA and verdict
    """
    if threshold is None:
        threshold = config.kmo_threshold

    R = np.asarray(R, dtype=float)
    off_diagonal = ~np.eye(R.shape[0], dtype=bool)
    r_squared = np.where(off_diagonal, R ** 2, 0.0)
    if r_squared.sum() <= 1e-24:
        raise AdequacyError("KMO undefined - independent attributes (all correlations are zero)")

    p_squared = np.where(off_diagonal, partial_correlations(R) ** 2, 0.0)

    r_total = r_squared.sum()
    value = float(r_total / (r_total + p_squared.sum()))

    r_per = r_squared.sum(axis=0)
    p_per = p_squared.sum(axis=0)
    with np.errstate(invalid='ignore', divide='ignore'):
        msa = np.where(r_per + p_per > 0, r_per / (r_per + p_per), np.nan)

    result = KmoResult(value=value, msa=msa, threshold=threshold)
    logger.info(f"KMO={value:.4f} ({result.verdict})")
    return result


def summarize_correlations(X: AttributeMatrix, threshold: float = None) -> CorrelationSummary:
    """
    Correlations, partial correlations and KMO of an attribute matrix.

    Args:
        X: Attribute matrix
        threshold: Factorability cut-off (defaults to configuration)

    Returns:
        CorrelationSummary
    """
    r_matrix = correlation_matrix(X)
    return CorrelationSummary(
        r_matrix=r_matrix,
        partials=partial_correlations(r_matrix),
        kmo=kmo(r_matrix, threshold=threshold),
        n_observations=X.n_blocks,
    )


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """
    Product-moment correlation of two equal-length sequences.

    Args:
        x: First sequence
        y: Second sequence

    Returns:
        Correlation coefficient in [-1, 1]
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionError(f"sequences must be 1-D and equal length, got {x.shape} and {y.shape}")
    if x.size < 3:
        raise DegenerateDataError(f"pearson needs at least 3 pairs, got {x.size}")

    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise DegenerateDataError("pearson undefined for a zero-variance sequence")

    r = pearsonr(x, y).statistic
    return float(np.clip(r, -1.0, 1.0))

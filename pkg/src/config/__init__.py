"""Configuration management for the Slum Severity Index toolkit."""
import os
import logging
from typing import Dict, Optional
from dotenv import load_dotenv, dotenv_values

# Load environment variables from .env file
load_dotenv()

logger = logging.getLogger(__name__)

# Census fields every column map must resolve
CENSUS_FIELDS = (
    'block_id',
    'locality_id',
    'year',
    'houses_total',
    'houses_no_water',
    'houses_dirt_floor_or_single_room',
    'houses_no_sanitation',
    'occupants_total',
    'rooms_total',
)


class Config:
    """Application configuration read from the environment."""

    PREFIX = 'SSIKIT_'

    def get_setting(self, key: str, default: Optional[str] = None) -> Optional[str]:
        """
        Get a setting value from the environment.

        Args:
            key: Setting name without the SSIKIT_ prefix
            default: Default value if the setting is not found

        Returns:
            The setting value or default
        """
        env_key = f"{self.PREFIX}{key}"
        value = os.getenv(env_key, default)
        if value != default:
            logger.debug(f"Retrieved '{env_key}' from environment variables")
        return value

    # Logging
    @property
    def log_level(self) -> str:
        """Logging level."""
        return self.get_setting('LOG_LEVEL', 'INFO')

    @property
    def log_file(self) -> str:
        """Optional log file path; empty disables file logging."""
        return self.get_setting('LOG_FILE', '')

    # Concurrency
    @property
    def threads(self) -> int:
        """Worker threads for windowed texture extraction."""
        return int(self.get_setting('THREADS', '1'))

    # Input format
    @property
    def delimiter(self) -> str:
        """Field delimiter for census and result tables."""
        return self.get_setting('DELIMITER', ',')

    # Factor analysis
    @property
    def paf_tolerance(self) -> float:
        """Convergence tolerance on communalities."""
        return float(self.get_setting('PAF_TOLERANCE', '1e-6'))

    @property
    def paf_max_iter(self) -> int:
        """Maximum principal axis iterations."""
        return int(self.get_setting('PAF_MAX_ITER', '200'))

    @property
    def kmo_threshold(self) -> float:
        """Minimum KMO for the data to count as factorable."""
        return float(self.get_setting('KMO_THRESHOLD', '0.6'))

    # Texture
    @property
    def glcm_window(self) -> int:
        """Sliding window side in pixels."""
        return int(self.get_setting('GLCM_WINDOW', '21'))

    @property
    def glcm_levels(self) -> int:
        """Gray levels after quantization."""
        return int(self.get_setting('GLCM_LEVELS', '32'))

    # Clustering
    @property
    def kmeans_k(self) -> int:
        """Number of k-means classes."""
        return int(self.get_setting('KMEANS_K', '4'))

    @property
    def kmeans_max_iter(self) -> int:
        """Maximum Lloyd iterations."""
        return int(self.get_setting('KMEANS_MAX_ITER', '300'))


def load_column_map(path: Optional[str] = None) -> Dict[str, str]:
    """
    Load a census column map from a key=value file.

    Keys are census field names, values are header names in the census
    table. Fields absent from the file map onto a header of the same name.
    An optional ``delimiter`` key selects the field separator.

    Args:
        path: Path to the column map file, or None for the identity map

    Returns:
        Mapping of field name to column header, plus 'delimiter'
    """
    column_map = {name: name for name in CENSUS_FIELDS}
    column_map['delimiter'] = config.delimiter
    if path is None:
        return column_map

    if not os.path.exists(path):
        raise FileNotFoundError(f"Column map not found: {path}")

    values = dotenv_values(path)
    unknown = [key for key in values if key not in column_map]
    if unknown:
        logger.warning(f"Ignoring unknown column map keys: {', '.join(sorted(unknown))}")

    for key, value in values.items():
        if key in column_map and value:
            column_map[key] = value

    logger.info(f"Loaded column map from {path}")
    return column_map


# Global configuration instance
config = Config()

"""Utility functions for the Slum Severity Index toolkit."""
import hashlib
import logging
import os
import tempfile
from datetime import datetime
from typing import Iterable, List, Optional

import numpy as np

# Counter-based 64-bit generator used for every seeded draw
GENERATOR_NAME = "numpy.random.Philox (Philox4x64-10)"


def setup_logging(log_level: str = "INFO", log_file: Optional[str] = None,
                  log_format: str = None) -> logging.Logger:
    """
    Set up logging configuration.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Optional file that receives a copy of every record
        log_format: Custom logging format

    Returns:
        Configured logger instance
    """
    if log_format is None:
        log_format = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log_file:
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(
        level=getattr(logging, log_level.upper()),
        format=log_format,
        handlers=handlers,
        force=True
    )

    return logging.getLogger(__name__)


def make_generator(seed: int) -> np.random.Generator:
    """
    Create the toolkit's seeded random generator.

    Args:
        seed: Non-negative integer seed

    Returns:
        Generator backed by Philox
    """
    return np.random.Generator(np.random.Philox(seed))


def format_number(value: float, decimals: int = 6) -> str:
    """
    Format a number with fixed decimals for stable text output.

    Args:
        value: Number to format
        decimals: Digits after the decimal point

    Returns:
        Formatted string; NaN renders as an empty field
    """
    if value is None or (isinstance(value, float) and np.isnan(value)):
        return ""
    text = f"{float(value):.{decimals}f}"
    # Avoid "-0.000000"
    if text.lstrip("-").strip("0.") == "":
        text = text.lstrip("-")
    return text


def format_row(values: Iterable, delimiter: str = ",") -> str:
    """
    Join a row of mixed strings and numbers into one delimited line.

    Args:
        values: Row values; floats are fixed-formatted, others str()-ed
        delimiter: Field separator

    Returns:
        Delimited line without trailing newline
    """
    fields = []
    for value in values:
        if isinstance(value, (float, np.floating)):
            fields.append(format_number(value))
        else:
            fields.append(str(value))
    return delimiter.join(fields)


def file_checksum(path: str, algorithm: str = "sha256") -> str:
    """
    Compute a hex digest of a file's bytes.

    Args:
        path: File to hash
        algorithm: hashlib algorithm name

    Returns:
        Hex digest prefixed with the algorithm name
    """
    digest = hashlib.new(algorithm)
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return f"{algorithm}:{digest.hexdigest()}"


def atomic_write_bytes(path: str, data: bytes) -> None:
    """
    Write bytes to a file atomically via a sibling temp file and rename.

    Args:
        path: Destination path
        data: Content to write
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def atomic_write_text(path: str, text: str) -> None:
    """
    Write UTF-8 text to a file atomically.

    Args:
        path: Destination path
        text: Content to write
    """
    atomic_write_bytes(path, text.encode("utf-8"))


def format_timestamp(timestamp: datetime = None, format_str: str = "%Y-%m-%dT%H:%M:%S") -> str:
    """
    Format timestamp for report headers.

    Args:
        timestamp: Datetime object to format (defaults to now)
        format_str: Format string for datetime formatting

    Returns:
        Formatted timestamp string
    """
    if timestamp is None:
        timestamp = datetime.now()
    return timestamp.strftime(format_str)


def resolve_threads(requested: Optional[int], fallback: int) -> int:
    """
    Pick a worker count from a CLI flag or the configured fallback.

    Args:
        requested: Value given on the command line, if any
        fallback: Configured default

    Returns:
        Worker count, at least 1
    """
    threads = requested if requested is not None else fallback
    return max(1, int(threads))

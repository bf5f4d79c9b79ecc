"""Test utility functions."""
import logging
import os
from datetime import datetime

import numpy as np

from src.utils import (
    GENERATOR_NAME,
    atomic_write_bytes,
    atomic_write_text,
    file_checksum,
    format_number,
    format_row,
    format_timestamp,
    make_generator,
    resolve_threads,
    setup_logging,
)


class TestUtilityFunctions:
    """Test utility functions."""

    def test_format_number(self):
        """Test fixed-decimal number formatting."""
        assert format_number(0.5) == "0.500000"
        assert format_number(1) == "1.000000"
        assert format_number(float('nan')) == ""
        assert format_number(None) == ""

    def test_format_number_suppresses_negative_zero(self):
        """Test tiny negatives do not render as -0.000000."""
        assert format_number(-0.0) == "0.000000"
        assert format_number(-1e-9) == "0.000000"
        assert format_number(-0.25) == "-0.250000"

    def test_format_row(self):
        """Test mixed rows."""
        assert format_row(["B1", 3, np.float64(0.125)]) == "B1,3,0.125000"
        assert format_row(["B1", 0.5], delimiter=";") == "B1;0.500000"

    def test_format_timestamp(self):
        """Test timestamp formatting."""
        timestamp = datetime(2024, 1, 2, 3, 4, 5)
        assert format_timestamp(timestamp) == "2024-01-02T03:04:05"

    def test_resolve_threads(self):
        """Test the command-line value wins over the fallback."""
        assert resolve_threads(4, 1) == 4
        assert resolve_threads(None, 3) == 3
        assert resolve_threads(0, 3) == 1

    def test_setup_logging(self, tmp_path):
        """Test logging setup with a log file."""
        log_file = tmp_path / 'ssikit.log'
        logger = setup_logging("INFO", str(log_file))
        logging.getLogger('src.test').info("hello")

        assert isinstance(logger, logging.Logger)
        for handler in logging.getLogger().handlers:
            handler.flush()
        assert "hello" in log_file.read_text()
        setup_logging("DEBUG")


class TestGenerator:
    """Test the seeded generator."""

    def test_same_seed_same_stream(self):
        """Test determinism across generator instances."""
        first = make_generator(42).random(5)
        second = make_generator(42).random(5)
        np.testing.assert_array_equal(first, second)

    def test_different_seeds_differ(self):
        """Test different seeds give different streams."""
        assert not np.array_equal(make_generator(1).random(5), make_generator(2).random(5))

    def test_generator_name(self):
        """Test the recorded generator name."""
        assert "Philox" in GENERATOR_NAME


class TestAtomicWrites:
    """Test atomic file writes and checksums."""

    def test_atomic_write_text(self, tmp_path):
        """Test text lands at the destination with no temp files left."""
        path = tmp_path / 'out.csv'
        atomic_write_text(str(path), "a,b\n")

        assert path.read_text() == "a,b\n"
        assert os.listdir(tmp_path) == ['out.csv']

    def test_atomic_write_replaces(self, tmp_path):
        """Test an existing file is replaced."""
        path = tmp_path / 'out.bin'
        atomic_write_bytes(str(path), b"old")
        atomic_write_bytes(str(path), b"new")

        assert path.read_bytes() == b"new"

    def test_file_checksum(self, tmp_path):
        """Test checksums are stable and content-sensitive."""
        first = tmp_path / 'a.txt'
        second = tmp_path / 'b.txt'
        first.write_text("same")
        second.write_text("same")

        assert file_checksum(str(first)) == file_checksum(str(second))
        assert file_checksum(str(first)).startswith("sha256:")
        second.write_text("different")
        assert file_checksum(str(first)) != file_checksum(str(second))

"""Test the PGM codec and mask loading."""
import numpy as np
import pytest

from src.errors import DataIOError
from src.models import BlockMask, Raster
from src.services.pgm_service import (
    encode_pgm,
    read_label_map,
    read_mask,
    read_pgm,
    write_mask,
    write_pgm,
)


class TestReadPgm:
    """Test PGM decoding."""

    def test_binary_8bit(self, tmp_path):
        """Test a P5 file written by the encoder."""
        pixels = np.arange(12, dtype=np.int64).reshape(3, 4) * 20
        path = tmp_path / 'a.pgm'
        write_pgm(str(path), Raster(width=4, height=3, pixels=pixels, maxval=255))

        raster = read_pgm(str(path))

        assert (raster.width, raster.height, raster.maxval) == (4, 3, 255)
        np.testing.assert_array_equal(raster.pixels, pixels)

    def test_binary_16bit_big_endian(self, tmp_path):
        """Test two-byte samples are read most significant byte first."""
        path = tmp_path / 'b.pgm'
        path.write_bytes(b"P5\n2 1\n65535\n" + bytes([0x01, 0x00, 0xFF, 0xFF]))

        raster = read_pgm(str(path))

        np.testing.assert_array_equal(raster.pixels, [[256, 65535]])

    def test_ascii_with_comments(self, tmp_path):
        """Test P2 with header comments."""
        path = tmp_path / 'c.pgm'
        path.write_text("P2\n# created by hand\n3 2\n# max\n9\n0 1 2\n3 4 9\n")

        raster = read_pgm(str(path))

        np.testing.assert_array_equal(raster.pixels, [[0, 1, 2], [3, 4, 9]])
        assert raster.maxval == 9

    def test_ascii_encoder(self, tmp_path):
        """Test the P2 encoder output is readable."""
        pixels = np.array([[5, 6], [7, 8]])
        path = tmp_path / 'd.pgm'
        path.write_bytes(encode_pgm(pixels, 8, binary=False))

        np.testing.assert_array_equal(read_pgm(str(path)).pixels, pixels)

    def test_bad_magic(self, tmp_path):
        """Test colour PPM files are rejected."""
        path = tmp_path / 'e.ppm'
        path.write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")

        with pytest.raises(DataIOError):
            read_pgm(str(path))

    def test_truncated_data(self, tmp_path):
        """Test a short raster body."""
        path = tmp_path / 'f.pgm'
        path.write_bytes(b"P5\n4 4\n255\n\x00\x01")

        with pytest.raises(DataIOError):
            read_pgm(str(path))

    def test_value_above_maxval(self, tmp_path):
        """Test samples larger than the declared maximum."""
        path = tmp_path / 'g.pgm'
        path.write_text("P2\n2 1\n10\n3 11\n")

        with pytest.raises(DataIOError):
            read_pgm(str(path))

    def test_missing_file(self, tmp_path):
        """Test a missing raster is an I/O error."""
        with pytest.raises(FileNotFoundError):
            read_pgm(str(tmp_path / 'absent.pgm'))


class TestMasks:
    """Test block masks and label maps."""

    def test_mask_with_labels(self, tmp_path):
        """Test a 16-bit mask and its id sidecar."""
        labels = np.array([[0, 1, 1], [2, 2, 300]])
        mask = BlockMask(width=3, height=2, labels=labels, block_ids={1: 'B1', 2: 'B2', 300: 'B300'})
        mask_path = tmp_path / 'mask.pgm'
        labels_path = tmp_path / 'labels.csv'

        write_mask(str(mask_path), mask, labels_path=str(labels_path))
        loaded = read_mask(str(mask_path), str(labels_path))

        np.testing.assert_array_equal(loaded.labels, labels)
        assert loaded.block_id(300) == 'B300'
        assert labels_path.read_text().splitlines()[0] == 'label,block_id'

    def test_mask_without_labels(self, tmp_path):
        """Test labels double as block ids."""
        path = tmp_path / 'mask.pgm'
        path.write_bytes(encode_pgm(np.array([[0, 7]]), 255))

        mask = read_mask(str(path))

        assert mask.block_id(7) == '7'

    def test_label_map_header(self, tmp_path):
        """Test a label map without the expected header."""
        path = tmp_path / 'labels.csv'
        path.write_text("id,name\n1,B1\n")

        with pytest.raises(DataIOError):
            read_label_map(str(path))

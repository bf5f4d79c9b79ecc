"""PGM (P2/P5, 8- and 16-bit) raster codec and block mask loading."""
import logging
import os
import re
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from src.errors import DataIOError
from src.models import BlockMask, Raster
from src.utils import atomic_write_bytes, atomic_write_text

logger = logging.getLogger(__name__)

_TOKEN = re.compile(rb"#[^\n]*|\S+")


def _header_tokens(data: bytes, count: int) -> Tuple[List[bytes], int]:
    """Read `count` header tokens, skipping comments; return them and the offset after the last."""
    tokens = []
    position = 0
    while len(tokens) < count:
        match = _TOKEN.search(data, position)
        if match is None:
            raise DataIOError("truncated PGM header")
        position = match.end()
        if not match.group().startswith(b"#"):
            tokens.append(match.group())
    return tokens, position


def read_pgm(path: str) -> Raster:
    """
    Read a grayscale PGM file.

    Args:
        path: P2 (ASCII) or P5 (binary) file, maxval up to 65535

    Returns:
        Raster with pixels as an int64 (height, width) array
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"Raster not found: {path}")
    with open(path, "rb") as handle:
        data = handle.read()

    tokens, position = _header_tokens(data, 4)
    magic = tokens[0]
    if magic not in (b"P2", b"P5"):
        raise DataIOError(f"{path}: unsupported PGM magic {magic!r}")
    try:
        width, height, maxval = (int(t) for t in tokens[1:4])
    except ValueError as e:
        raise DataIOError(f"{path}: malformed PGM header") from e
    if width < 1 or height < 1 or not 1 <= maxval <= 65535:
        raise DataIOError(f"{path}: invalid PGM dimensions or maxval")

    n_pixels = width * height
    if magic == b"P5":
        # Exactly one whitespace byte separates the header from the raster
        body = data[position + 1:]
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        expected = n_pixels * dtype.itemsize
        if len(body) < expected:
            raise DataIOError(f"{path}: expected {expected} data bytes, found {len(body)}")
        pixels = np.frombuffer(body[:expected], dtype=dtype).astype(np.int64)
    else:
        try:
            pixels = np.array(data[position:].split()).astype(np.int64)
        except ValueError as e:
            raise DataIOError(f"{path}: non-numeric P2 pixel data") from e
        if pixels.size < n_pixels:
            raise DataIOError(f"{path}: expected {n_pixels} pixels, found {pixels.size}")
        pixels = pixels[:n_pixels]

    if pixels.size and pixels.max() > maxval:
        raise DataIOError(f"{path}: pixel value exceeds maxval {maxval}")

    logger.debug(f"Read {magic.decode()} raster {width}x{height} maxval={maxval} from {path}")
    return Raster(width=width, height=height, pixels=pixels.reshape(height, width), maxval=maxval)


def encode_pgm(pixels: np.ndarray, maxval: int, binary: bool = True) -> bytes:
    """
    Encode a 2-D array as PGM bytes.

    Args:
        pixels: Non-negative integer array (height, width)
        maxval: Declared maximum value (16-bit samples when above 255)
        binary: P5 when True, P2 otherwise

    Returns:
        File content
    """
    pixels = np.asarray(pixels)
    height, width = pixels.shape
    magic = "P5" if binary else "P2"
    header = f"{magic}\n{width} {height}\n{maxval}\n".encode("ascii")
    if binary:
        dtype = ">u2" if maxval > 255 else "u1"
        return header + pixels.astype(dtype).tobytes()
    lines = "\n".join(" ".join(str(int(v)) for v in row) for row in pixels)
    return header + lines.encode("ascii") + b"\n"


def write_pgm(path: str, raster: Raster, binary: bool = True) -> None:
    """
    Write a raster as PGM atomically.

    Args:
        path: Destination path
        raster: Raster to write
        binary: P5 when True, P2 otherwise
    """
    atomic_write_bytes(path, encode_pgm(raster.pixels, raster.maxval, binary=binary))


def read_label_map(path: str) -> Dict[int, str]:
    """
    Read a `label,block_id` sidecar.

    Args:
        path: Delimited file with a header row

    Returns:
        Mapping of integer label to block id
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"Label map not found: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError as e:
        raise DataIOError(f"{path}: empty label map") from e
    if list(frame.columns[:2]) != ["label", "block_id"]:
        raise DataIOError(f"{path}: expected header 'label,block_id'")
    try:
        return {int(label): block_id for label, block_id in zip(frame["label"], frame["block_id"])}
    except ValueError as e:
        raise DataIOError(f"{path}: labels must be integers") from e


def write_label_map(path: str, block_ids: Dict[int, str]) -> None:
    """Write a `label,block_id` sidecar atomically."""
    lines = ["label,block_id"] + [f"{label},{block_id}" for label, block_id in sorted(block_ids.items())]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_mask(path: str, labels_path: Optional[str] = None) -> BlockMask:
    """
    Read a label raster and its optional block id sidecar.

    Args:
        path: 16-bit (or 8-bit) PGM whose values are block labels, 0 = none
        labels_path: Optional `label,block_id` file

    Returns:
        BlockMask
    """
    raster = read_pgm(path)
    block_ids = read_label_map(labels_path) if labels_path else {}
    return BlockMask(width=raster.width, height=raster.height, labels=raster.pixels, block_ids=block_ids)


def write_mask(path: str, mask: BlockMask, labels_path: Optional[str] = None) -> None:
    """Write a label raster as 16-bit P5 plus an optional id sidecar."""
    write_pgm(path, Raster(width=mask.width, height=mask.height, pixels=mask.labels, maxval=65535))
    if labels_path:
        write_label_map(labels_path, mask.block_ids)

"""Census ingestion: block tables, deprivation attributes and locality summaries."""
import logging
import os
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.config import CENSUS_FIELDS
from src.errors import (
    ConfigurationError,
    DataIOError,
    DegenerateDataError,
    OrphanBlockError,
    RecordParseError,
    ValidationError,
)
from src.models import ATTRIBUTE_COLUMNS, AttributeMatrix, BlockRecord, LocalitySummary, SsiVector

logger = logging.getLogger(__name__)

COUNT_FIELDS = (
    'houses_total',
    'houses_no_water',
    'houses_dirt_floor_or_single_room',
    'houses_no_sanitation',
    'occupants_total',
    'rooms_total',
)

# Deprivation count behind each proportion column
PROPORTION_SOURCES = {
    'sanitation': 'houses_no_sanitation',
    'water': 'houses_no_water',
    'structural': 'houses_dirt_floor_or_single_room',
}

# Header row is line 1 of the file
FIRST_DATA_ROW = 2


def parse_census(table_path: str, column_map: Dict[str, str]) -> List[BlockRecord]:
    """
    Parse a delimited census table into block records.

    Args:
        table_path: Path to a UTF-8 delimited file with a header row
        column_map: Field name to column header mapping, plus optional 'delimiter'

    Returns:
        One BlockRecord per data row; empty blocks are kept and logged
    """
    if not os.path.exists(table_path):
        raise FileNotFoundError(f"Census table not found: {table_path}")

    delimiter = column_map.get('delimiter', ',')
    try:
        frame = pd.read_csv(
            table_path,
            sep=delimiter,
            dtype=str,
            encoding='utf-8',
            keep_default_na=False,
            skipinitialspace=True,
        )
    except pd.errors.EmptyDataError:
        logger.warning(f"Census table {table_path} is empty")
        return []
    except (UnicodeDecodeError, pd.errors.ParserError) as e:
        raise DataIOError(f"Cannot read census table {table_path}: {e}") from e

    missing = [
        f"{field_name} (column '{column_map[field_name]}')"
        for field_name in CENSUS_FIELDS
        if column_map[field_name] not in frame.columns
    ]
    if missing:
        raise ConfigurationError(f"Census table {table_path} lacks mapped columns: {', '.join(missing)}")

    if frame.empty:
        logger.warning(f"Census table {table_path} has a header but no data rows")
        return []

    parsed = pd.DataFrame({
        'block_id': frame[column_map['block_id']].str.strip(),
        'locality_id': frame[column_map['locality_id']].str.strip(),
    })
    for field_name in ('year',) + COUNT_FIELDS:
        parsed[field_name] = _parse_integer_column(frame[column_map[field_name]], field_name)

    for field_name in COUNT_FIELDS:
        negative = np.flatnonzero(parsed[field_name].to_numpy() < 0)
        if negative.size:
            row = int(negative[0])
            raise RecordParseError(
                f"negative count {field_name}={parsed[field_name].iat[row]}",
                row_number=row + FIRST_DATA_ROW,
            )

    records = [
        BlockRecord(
            block_id=row.block_id,
            locality_id=row.locality_id,
            year=int(row.year),
            houses_total=int(row.houses_total),
            houses_no_water=int(row.houses_no_water),
            houses_dirt_floor_or_single_room=int(row.houses_dirt_floor_or_single_room),
            houses_no_sanitation=int(row.houses_no_sanitation),
            occupants_total=int(row.occupants_total),
            rooms_total=int(row.rooms_total),
        )
        for row in parsed.itertuples(index=False)
    ]

    for index, record in enumerate(records):
        errors = record.validate()
        if errors:
            raise RecordParseError('; '.join(errors), row_number=index + FIRST_DATA_ROW)

    empty = sum(1 for record in records if record.is_empty)
    if empty:
        logger.warning(f"{empty} block(s) report houses_total=0 and will be excluded from attributes")

    logger.info(f"Parsed {len(records)} census rows from {table_path}")
    return records


def _parse_integer_column(column: pd.Series, field_name: str) -> pd.Series:
    """Convert a text column to int64, raising on the first unparsable row."""
    numeric = pd.to_numeric(column.str.strip(), errors='coerce')
    bad = numeric.isna() | (numeric % 1 != 0)
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise RecordParseError(
            f"{field_name} is not an integer: '{column.iat[row]}'",
            row_number=row + FIRST_DATA_ROW,
        )
    return numeric.astype(np.int64)


def derive_attributes(records: Sequence[BlockRecord],
                      density_scale: Optional[Tuple[float, float]] = None) -> AttributeMatrix:
    """
    Derive the four normalized deprivation attributes.

    Sanitation, water and structural columns are proportions of deprived
    houses. Overcrowding is persons per room, min-max rescaled over the
    dataset, or over ``density_scale`` when a persisted scale is reused.

    Args:
        records: Validated census records
        density_scale: Optional fixed (min, max) persons-per-room scale

    Returns:
        AttributeMatrix with columns in ATTRIBUTE_COLUMNS order
    """
    for record in records:
        errors = record.validate()
        if errors:
            raise ValidationError(f"block {record.block_id}: {'; '.join(errors)}")

    usable = []
    for record in records:
        if record.is_empty:
            logger.warning(f"Excluding block {record.block_id}: houses_total=0")
        elif record.rooms_total == 0:
            logger.warning(f"Excluding block {record.block_id}: rooms_total=0, density undefined")
        else:
            usable.append(record)

    minimum_rows = 1 if density_scale is not None else 2
    if len(usable) < minimum_rows:
        raise DegenerateDataError(
            f"need at least {minimum_rows} usable records to derive attributes, got {len(usable)}"
        )

    houses = np.array([r.houses_total for r in usable], dtype=float)
    values = np.empty((len(usable), len(ATTRIBUTE_COLUMNS)))
    params: Dict[str, Tuple[float, float]] = {}

    for column, source in PROPORTION_SOURCES.items():
        counts = np.array([getattr(r, source) for r in usable], dtype=float)
        values[:, ATTRIBUTE_COLUMNS.index(column)] = counts / houses
        params[column] = (0.0, 1.0)

    density = np.array([r.occupants_total / r.rooms_total for r in usable])
    if density_scale is None:
        low, high = float(density.min()), float(density.max())
    else:
        low, high = float(density_scale[0]), float(density_scale[1])

    overcrowding = ATTRIBUTE_COLUMNS.index('overcrowding')
    if high - low <= 0.0:
        logger.warning("Overcrowding density has zero range; column set to 0")
        values[:, overcrowding] = 0.0
    else:
        scaled = (density - low) / (high - low)
        if density_scale is not None and ((scaled < 0).any() or (scaled > 1).any()):
            logger.warning("Densities fall outside the fixed scale and were clipped to [0, 1]")
        values[:, overcrowding] = np.clip(scaled, 0.0, 1.0)
    params['overcrowding'] = (low, high)

    matrix = AttributeMatrix(
        block_ids=[r.block_id for r in usable],
        values=values,
        normalization_params=params,
    )
    logger.info(f"Derived attributes for {matrix.n_blocks} of {len(records)} blocks")
    return matrix


def aggregate_ssi(ssi: SsiVector, records: Sequence[BlockRecord],
                  level: str = 'locality') -> List[LocalitySummary]:
    """
    Summarize block SSI per locality and census year.

    Args:
        ssi: Block-level SSI values
        records: Census records providing locality ids, years and house counts
        level: Aggregation level; only 'locality' is supported

    Returns:
        One summary per (year, locality), sorted by year then locality id
    """
    return aggregate_ssi_years([(ssi, records)], level=level)


def aggregate_ssi_years(datasets: Iterable[Tuple[SsiVector, Sequence[BlockRecord]]],
                        level: str = 'locality') -> List[LocalitySummary]:
    """
    Summarize several census years into one locality table.

    Args:
        datasets: Pairs of (SSI vector, records of the same census year)
        level: Aggregation level; only 'locality' is supported

    Returns:
        One summary per (year, locality), sorted by year then locality id
    """
    if level != 'locality':
        raise ValidationError(f"unsupported aggregation level '{level}'")

    frames = []
    for ssi, records in datasets:
        lookup = {}
        duplicated = set()
        for record in records:
            if record.block_id in lookup:
                duplicated.add(record.block_id)
            lookup[record.block_id] = record
        if duplicated:
            raise ValidationError(
                f"census records repeat block ids: {', '.join(sorted(duplicated)[:20])}"
            )

        orphans = [block_id for block_id in ssi.block_ids
                   if block_id not in lookup or not lookup[block_id].locality_id]
        if orphans:
            raise OrphanBlockError(orphans)

        frames.append(pd.DataFrame({
            'year': [lookup[b].year for b in ssi.block_ids],
            'locality_id': [lookup[b].locality_id for b in ssi.block_ids],
            'houses_total': [lookup[b].houses_total for b in ssi.block_ids],
            'ssi': np.asarray(ssi.values, dtype=float),
        }))

    if not frames:
        return []
    joined = pd.concat(frames, ignore_index=True)

    summaries = []
    for (year, locality_id), group in joined.groupby(['year', 'locality_id'], sort=True):
        values = group['ssi'].to_numpy()
        houses = group['houses_total'].to_numpy(dtype=float)
        weighted = float(np.average(values, weights=houses)) if houses.sum() > 0 else float('nan')
        q1, median, q3 = np.percentile(values, [25, 50, 75])
        summaries.append(LocalitySummary(
            locality_id=str(locality_id),
            year=int(year),
            count=int(values.size),
            mean=float(values.mean()),
            weighted_mean=weighted,
            minimum=float(values.min()),
            q1=float(q1),
            median=float(median),
            q3=float(q3),
            maximum=float(values.max()),
        ))

    logger.info(f"Aggregated {len(joined)} blocks into {len(summaries)} locality summaries")
    return summaries

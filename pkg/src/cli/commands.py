"""Subcommand handlers for the ssikit command line."""
import argparse
import logging
import os
from typing import Dict, List

import numpy as np

from src import __version__
from src.config import CENSUS_FIELDS, config, load_column_map
from src.errors import DegenerateDataError, SsiKitError, ValidationError
from src.models import ATTRIBUTE_COLUMNS, FEATURE_NAMES, BlockLayout, SsiVector
from src.services import (
    census_service,
    cluster_service,
    factor_service,
    pgm_service,
    stats_service,
    storage_service,
    synth_service,
    texture_service,
)
from src.utils import GENERATOR_NAME, atomic_write_text, resolve_threads

logger = logging.getLogger(__name__)

# Planted loadings used by `synth` unless overridden
DEFAULT_LOADINGS = (0.72, 0.43, 0.84, 0.46)


def run_ingest(args: argparse.Namespace) -> int:
    """
    Census table to attribute table.

    Args:
        args: Parsed arguments (census, config, out, scale, delimiter)

    Returns:
        Exit code
    """
    column_map = load_column_map(args.config)
    if args.delimiter:
        column_map['delimiter'] = args.delimiter

    records = census_service.parse_census(args.census, column_map)
    scale = storage_service.read_density_scale(args.scale) if args.scale else None
    matrix = census_service.derive_attributes(records, density_scale=scale)

    storage_service.write_attributes(args.out, matrix, source_path=args.census)
    logger.info(f"Wrote {matrix.n_blocks} attribute rows to {args.out}")
    return 0


def _parse_weights_option(option: str) -> str:
    """Return the fixed-weights file of a `fixed:<file>` option, or '' for `fit`."""
    if option == 'fit':
        return ''
    if option.startswith('fixed:') and len(option) > len('fixed:'):
        return option[len('fixed:'):]
    raise ValidationError(f"--weights must be 'fit' or 'fixed:<file>', got '{option}'")


def run_efa(args: argparse.Namespace) -> int:
    """
    Attribute table to factor solution report and SSI table.

    Args:
        args: Parsed arguments (attributes, tol, max_iter, weights, out, report)

    Returns:
        Exit code
    """
    fixed_path = _parse_weights_option(args.weights)
    matrix = storage_service.read_attributes(args.attributes)
    report = storage_service.Report('efa')

    if fixed_path:
        omega = storage_service.load_fixed_weights(fixed_path)
        try:
            summary = stats_service.summarize_correlations(matrix)
        except SsiKitError as e:
            logger.warning(f"Adequacy diagnostics unavailable with fixed weights: {e}")
            summary = None
        solution = None
    else:
        summary, solution = factor_service.fit_weights(matrix, tol=args.tol, max_iter=args.max_iter)
        omega = solution.weights

    ssi = factor_service.compute_ssi(matrix, omega)

    if summary is not None:
        report.add_section('adequacy', {
            'n_observations': summary.n_observations,
            'kmo': summary.kmo.value,
            'verdict': summary.kmo.verdict,
            'threshold': summary.kmo.threshold,
            'msa': summary.kmo.msa,
        })
    section: Dict[str, object] = {'attributes': list(ATTRIBUTE_COLUMNS)}
    if solution is not None:
        section.update({
            'method': 'principal-axis',
            'loadings': solution.loadings,
            'communalities': solution.communalities,
            'weights': solution.weights,
            'eigenvalue': solution.eigenvalue,
            'iterations': solution.iterations,
            'converged': solution.converged,
            'tolerance': solution.tolerance,
        })
    else:
        section.update({'method': f"fixed:{fixed_path}", 'weights': omega})
    report.add_section('solution', section)
    report.add_section('ssi', {
        'n_blocks': len(ssi.block_ids),
        'mean': float(np.mean(ssi.values)),
        'min': float(np.min(ssi.values)),
        'max': float(np.max(ssi.values)),
    })

    storage_service.write_ssi(args.out, ssi)
    report.write(args.report)
    return 0


def run_modes(args: argparse.Namespace) -> int:
    """
    SSI table to peak list and plot-ready density table.

    Args:
        args: Parsed arguments (ssi, bandwidth, grid, out, density_out)

    Returns:
        Exit code
    """
    ssi = storage_service.read_ssi(args.ssi)
    grid, density = factor_service.mode_density(ssi, bandwidth=args.bandwidth, grid=args.grid)
    modes = factor_service.density_peaks(grid, density, min_prominence=args.min_prominence)

    storage_service.write_modes(args.out, modes)
    if args.density_out:
        storage_service.write_density(args.density_out, grid, density, ssi.values)
    for rank, mode in enumerate(modes, start=1):
        logger.info(f"mode {rank}: location={mode.location:.4f} density={mode.density:.4f}")
    return 0


def run_aggregate(args: argparse.Namespace) -> int:
    """
    SSI and census tables to a locality summary table.

    Args:
        args: Parsed arguments (ssi, census lists, config, level, out)

    Returns:
        Exit code
    """
    if len(args.ssi) != len(args.census):
        raise ValidationError("--ssi and --census must be given the same number of times")
    column_map = load_column_map(args.config)
    datasets = [
        (storage_service.read_ssi(ssi_path), census_service.parse_census(census_path, column_map))
        for ssi_path, census_path in zip(args.ssi, args.census)
    ]
    summaries = census_service.aggregate_ssi_years(datasets, level=args.level)
    storage_service.write_locality_summaries(args.out, summaries)
    return 0


def run_glcm(args: argparse.Namespace) -> int:
    """
    Raster and block mask to per-block texture features.

    Args:
        args: Parsed arguments (raster, mask, labels, window, levels, mode, threads,
            exclude_straddling, out)

    Returns:
        Exit code
    """
    raster = pgm_service.read_pgm(args.raster)
    mask = pgm_service.read_mask(args.mask, args.labels)
    threads = resolve_threads(args.threads, config.threads)

    textures = texture_service.block_texture(
        raster,
        mask,
        window=args.window,
        levels=args.levels,
        offsets=texture_service.OFFSET_MODES[args.mode],
        threads=threads,
        exclude_straddling=args.exclude_straddling,
    )
    storage_service.write_features(args.out, textures)
    return 0


def run_validate(args: argparse.Namespace) -> int:
    """
    Pearson correlation between SSI and a block texture feature.

    Args:
        args: Parsed arguments (ssi, features, feature, report)

    Returns:
        Exit code
    """
    ssi = storage_service.read_ssi(args.ssi)
    textures = storage_service.read_features(args.features)

    paired_ssi: List[float] = []
    paired_features = []
    for block_id, value in zip(ssi.block_ids, ssi.values):
        features = textures.get(block_id)
        if features is not None:
            paired_ssi.append(float(value))
            paired_features.append(features.as_array())
    missing = len(ssi.block_ids) - len(paired_ssi)
    if len(paired_ssi) < 3:
        raise DegenerateDataError(f"only {len(paired_ssi)} block(s) have both SSI and texture")
    matrix = np.vstack(paired_features)

    r = stats_service.pearson(paired_ssi, matrix[:, FEATURE_NAMES.index(args.feature)])

    all_features: Dict[str, object] = {}
    for index, name in enumerate(FEATURE_NAMES):
        try:
            all_features[name] = stats_service.pearson(paired_ssi, matrix[:, index])
        except DegenerateDataError:
            all_features[name] = 'undefined'

    report = storage_service.Report('validate')
    report.add_section('validation', {
        'feature': args.feature,
        'pearson_r': r,
        'n_blocks': len(paired_ssi),
        'n_missing': missing,
        'direction': 'negative' if r < 0 else 'non-negative',
    })
    report.add_section('all_features', all_features)
    report.write(args.report)
    logger.info(f"pearson(SSI, {args.feature}) = {r:.4f} over {len(paired_ssi)} blocks")
    return 0


def run_kmeans(args: argparse.Namespace) -> int:
    """
    Attribute table to k-means class table.

    Args:
        args: Parsed arguments (attributes, k, seed, max_iter, out, ssi, spread_out)

    Returns:
        Exit code
    """
    matrix = storage_service.read_attributes(args.attributes)
    result = cluster_service.kmeans(matrix, k=args.k, seed=args.seed, max_iter=args.max_iter)

    spreads = None
    if args.ssi:
        lookup = storage_service.read_ssi(args.ssi).as_dict()
        absent = [b for b in matrix.block_ids if b not in lookup]
        if absent:
            raise ValidationError(f"{len(absent)} clustered block(s) have no SSI, e.g. {absent[0]}")
        aligned = SsiVector(
            block_ids=list(matrix.block_ids),
            values=np.array([lookup[b] for b in matrix.block_ids]),
        )
        spreads = cluster_service.cluster_ssi_spread(result, aligned)

    storage_service.write_clusters(args.out, matrix.block_ids, result)
    if spreads is not None and args.spread_out:
        storage_service.write_cluster_spread(args.spread_out, spreads)
    return 0


def run_synth(args: argparse.Namespace) -> int:
    """
    Write a synthetic census bundle, optionally with raster and mask.

    Args:
        args: Parsed arguments (blocks, seed, with_raster, raster_size, out_dir)

    Returns:
        Exit code
    """
    loadings = np.array(args.loadings, dtype=float)
    census = synth_service.generate_census(args.blocks, loadings, args.seed, noise_scale=args.noise_scale)
    planted = synth_service.planted_ssi(census)

    truth: Dict[str, object] = {
        'generator': GENERATOR_NAME,
        'version': __version__,
        'seed': args.seed,
        'n_blocks': args.blocks,
        'loadings': loadings.tolist(),
        'mixture': {
            'weights': list(synth_service.MIXTURE_WEIGHTS),
            'means': list(synth_service.MIXTURE_MEANS),
            'sds': list(synth_service.MIXTURE_SDS),
        },
        'factor_scores': dict(zip(planted.block_ids, census.factor_scores.round(6).tolist())),
        'planted_ssi': dict(zip(planted.block_ids, planted.values.round(6).tolist())),
    }

    raster_outputs = None
    if args.with_raster:
        layout = BlockLayout.for_blocks(args.blocks, args.raster_size, args.raster_size)
        if layout.tile_size < config.glcm_window:
            logger.warning(
                f"Tiles of {layout.tile_size}px are smaller than the {config.glcm_window}px GLCM window"
            )
        raster, mask, amplitudes = synth_service.generate_raster(planted, layout, args.seed)
        truth['texture'] = {
            'tile_size': layout.tile_size,
            'grid': [layout.rows, layout.cols],
            'amplitudes': {k: round(v, 6) for k, v in amplitudes.items()},
        }
        raster_outputs = (raster, mask)

    out_dir = args.out_dir
    os.makedirs(out_dir, exist_ok=True)
    storage_service.write_census(os.path.join(out_dir, 'census.csv'), census.records)
    atomic_write_text(
        os.path.join(out_dir, 'columns.env'),
        "".join(f"{name}={name}\n" for name in CENSUS_FIELDS),
    )
    if raster_outputs is not None:
        raster, mask = raster_outputs
        pgm_service.write_pgm(os.path.join(out_dir, 'raster.pgm'), raster)
        pgm_service.write_mask(os.path.join(out_dir, 'mask.pgm'), mask,
                               labels_path=os.path.join(out_dir, 'labels.csv'))
    storage_service.write_json(os.path.join(out_dir, 'truth.json'), truth)
    logger.info(f"Wrote synthetic bundle with {args.blocks} blocks to {out_dir}")
    return 0

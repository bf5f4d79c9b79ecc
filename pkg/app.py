"""Command-line entry point for the Slum Severity Index toolkit."""
import argparse
import logging
import sys
from typing import List, Optional

from src import __version__
from src.cli import commands
from src.config import config
from src.errors import SsiKitError
from src.models import FEATURE_NAMES
from src.services.texture_service import OFFSET_MODES
from src.utils import setup_logging

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    """
    Build the argument parser with one subcommand per pipeline stage.

    Returns:
        Configured ArgumentParser
    """
    parser = argparse.ArgumentParser(
        prog='ssikit',
        description='Slum Severity Index from census attributes, validated against image texture.',
    )
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest='command', required=True)

    ingest = subparsers.add_parser('ingest', help='census table to attribute table')
    ingest.add_argument('census', help='delimited census table')
    ingest.add_argument('--config', help='key=value column map')
    ingest.add_argument('--delimiter', help='field separator overriding the column map')
    ingest.add_argument('--scale', help='attribute sidecar whose overcrowding scale is reused')
    ingest.add_argument('--out', required=True, help='attribute table to write')
    ingest.set_defaults(handler=commands.run_ingest)

    efa = subparsers.add_parser('efa', help='attributes to factor report and SSI')
    efa.add_argument('attributes', help='attribute table')
    efa.add_argument('--tol', type=float, default=None, help='PAF convergence tolerance')
    efa.add_argument('--max-iter', type=int, default=None, help='PAF iteration cap')
    efa.add_argument('--weights', default='fit', help="'fit' or 'fixed:<report.json>'")
    efa.add_argument('--out', required=True, help='SSI table to write')
    efa.add_argument('--report', required=True, help='solution report to write')
    efa.set_defaults(handler=commands.run_efa)

    modes = subparsers.add_parser('modes', help='SSI density peaks')
    modes.add_argument('ssi', help='SSI table')
    modes.add_argument('--bandwidth', type=float, default=None, help='kernel bandwidth')
    modes.add_argument('--grid', type=int, default=512, help='density grid points')
    modes.add_argument('--min-prominence', type=float, default=0.05,
                       help='peak prominence relative to the highest density')
    modes.add_argument('--out', required=True, help='peak table to write')
    modes.add_argument('--density-out', help='KDE and histogram table to write')
    modes.set_defaults(handler=commands.run_modes)

    aggregate = subparsers.add_parser('aggregate', help='block SSI to locality summaries')
    aggregate.add_argument('--ssi', action='append', required=True, help='SSI table (repeatable)')
    aggregate.add_argument('--census', action='append', required=True,
                           help='census table matching each --ssi (repeatable)')
    aggregate.add_argument('--config', help='key=value column map')
    aggregate.add_argument('--level', default='locality', choices=['locality'])
    aggregate.add_argument('--out', required=True, help='summary table to write')
    aggregate.set_defaults(handler=commands.run_aggregate)

    glcm = subparsers.add_parser('glcm', help='raster texture features per block')
    glcm.add_argument('raster', help='grayscale PGM')
    glcm.add_argument('mask', help='block label PGM')
    glcm.add_argument('--labels', help='label,block_id table')
    glcm.add_argument('--window', type=int, default=config.glcm_window)
    glcm.add_argument('--levels', type=int, default=config.glcm_levels)
    glcm.add_argument('--mode', default='four-orientations', choices=sorted(OFFSET_MODES))
    glcm.add_argument('--threads', type=int, default=None, help='workers; SSIKIT_THREADS otherwise')
    glcm.add_argument('--exclude-straddling', action='store_true',
                      help='drop windows that cross a block boundary')
    glcm.add_argument('--out', required=True, help='feature table to write')
    glcm.set_defaults(handler=commands.run_glcm)

    validate = subparsers.add_parser('validate', help='correlate SSI with a texture feature')
    validate.add_argument('ssi', help='SSI table')
    validate.add_argument('features', help='feature table')
    validate.add_argument('--feature', default='variance', choices=FEATURE_NAMES)
    validate.add_argument('--report', required=True, help='validation report to write')
    validate.set_defaults(handler=commands.run_validate)

    kmeans = subparsers.add_parser('kmeans', help='cluster blocks by attributes')
    kmeans.add_argument('attributes', help='attribute table')
    kmeans.add_argument('--k', type=int, default=config.kmeans_k)
    kmeans.add_argument('--seed', type=int, default=0)
    kmeans.add_argument('--max-iter', type=int, default=config.kmeans_max_iter)
    kmeans.add_argument('--ssi', help='SSI table for per-cluster spread')
    kmeans.add_argument('--spread-out', help='per-cluster SSI spread table to write')
    kmeans.add_argument('--out', required=True, help='class table to write')
    kmeans.set_defaults(handler=commands.run_kmeans)

    synth = subparsers.add_parser('synth', help='synthetic census bundle with known truth')
    synth.add_argument('--blocks', type=int, default=1000)
    synth.add_argument('--seed', type=int, default=0)
    synth.add_argument('--loadings', type=float, nargs=4, default=list(commands.DEFAULT_LOADINGS),
                       metavar=('SANITATION', 'WATER', 'STRUCTURAL', 'OVERCROWDING'))
    synth.add_argument('--noise-scale', type=float, default=1.0)
    synth.add_argument('--with-raster', action='store_true')
    synth.add_argument('--raster-size', type=int, default=512)
    synth.add_argument('--out-dir', required=True)
    synth.set_defaults(handler=commands.run_synth)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one subcommand.

    Args:
        argv: Arguments without the program name; sys.argv when None

    Returns:
        0 on success, 1 on validation or numerical failure, 2 on I/O failure
    """
    setup_logging(config.log_level, config.log_file or None)
    args = build_parser().parse_args(argv)

    try:
        return args.handler(args)
    except SsiKitError as e:
        logger.error(f"{args.command}: {e}")
        return e.exit_code
    except OSError as e:
        logger.error(f"{args.command}: {e}")
        return 2


if __name__ == '__main__':
    sys.exit(main())

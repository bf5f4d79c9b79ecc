"""Test the command-line pipeline end to end."""
import json

import numpy as np
import pytest

from app import build_parser, main
from src.models import AttributeMatrix, SsiVector
from src.services.storage_service import write_attributes, write_ssi


@pytest.fixture
def bundle(tmp_path):
    """Synthetic census bundle plus its attribute table."""
    out_dir = tmp_path / 'bundle'
    assert main(['synth', '--blocks', '1000', '--seed', '11', '--out-dir', str(out_dir)]) == 0
    attributes = tmp_path / 'attributes.csv'
    assert main(['ingest', str(out_dir / 'census.csv'), '--config', str(out_dir / 'columns.env'),
                 '--out', str(attributes)]) == 0
    return out_dir, attributes


def write_planted_weights(out_dir) -> str:
    """Report sidecar carrying the weights implied by a bundle's planted loadings."""
    loadings = np.array(json.loads((out_dir / 'truth.json').read_text())['loadings'])
    path = out_dir / 'planted.json'
    path.write_text(json.dumps({'solution': {'weights': (loadings ** 2 / (loadings ** 2).sum()).tolist()}}))
    return str(path)


class TestParser:
    """Test argument parsing."""

    def test_subcommands(self):
        """Test every pipeline stage is registered."""
        parser = build_parser()
        for command in ('ingest', 'efa', 'modes', 'aggregate', 'glcm', 'validate', 'kmeans', 'synth'):
            with pytest.raises(SystemExit) as excinfo:
                parser.parse_args([command, '--help'])
            assert excinfo.value.code == 0

    def test_unknown_feature(self):
        """Test validate only accepts known feature names."""
        with pytest.raises(SystemExit):
            build_parser().parse_args(['validate', 'a.csv', 'b.csv', '--feature', 'energy', '--report', 'r'])


class TestCensusPipeline:
    """Test synth, ingest, efa and the downstream summaries."""

    def test_synth_outputs(self, bundle):
        """Test the bundle carries census, column map and truth."""
        out_dir, _ = bundle

        truth = json.loads((out_dir / 'truth.json').read_text())

        assert 'Philox' in truth['generator']
        assert truth['loadings'] == [0.72, 0.43, 0.84, 0.46]
        assert len(truth['factor_scores']) == 1000
        assert (out_dir / 'columns.env').exists()

    def test_efa_converges(self, bundle, tmp_path):
        """Test the factor model fits the synthetic census."""
        _, attributes = bundle
        report = tmp_path / 'efa.txt'
        ssi = tmp_path / 'ssi.csv'

        assert main(['efa', str(attributes), '--out', str(ssi), '--report', str(report)]) == 0

        text = report.read_text()
        payload = json.loads((tmp_path / 'efa.txt.json').read_text())
        assert 'converged=true' in text
        assert payload['adequacy']['verdict'] == 'factorable'
        assert sum(payload['solution']['weights']) == pytest.approx(1.0, abs=1e-5)
        np.testing.assert_allclose(payload['solution']['loadings'], [0.72, 0.43, 0.84, 0.46], atol=0.1)
        assert len(ssi.read_text().splitlines()) == 1001

    def test_fixed_weights_reproduce_ssi(self, bundle, tmp_path):
        """Test reusing a report's weights gives the same index."""
        _, attributes = bundle
        first = tmp_path / 'first.csv'
        second = tmp_path / 'second.csv'
        report = tmp_path / 'efa.txt'
        assert main(['efa', str(attributes), '--out', str(first), '--report', str(report)]) == 0

        assert main(['efa', str(attributes), '--weights', f"fixed:{report}.json",
                     '--out', str(second), '--report', str(tmp_path / 'fixed.txt')]) == 0

        assert first.read_bytes() == second.read_bytes()

    def test_unfactorable_data_exit_code(self, tmp_path):
        """Test independent attributes fail the adequacy gate."""
        rng = np.random.Generator(np.random.Philox(4))
        matrix = AttributeMatrix(block_ids=[f"B{i}" for i in range(1000)], values=rng.uniform(size=(1000, 4)))
        attributes = tmp_path / 'attributes.csv'
        write_attributes(str(attributes), matrix)
        ssi = tmp_path / 'ssi.csv'

        code = main(['efa', str(attributes), '--out', str(ssi), '--report', str(tmp_path / 'r.txt')])

        assert code == 1
        assert not ssi.exists()

    def test_modes_aggregate_kmeans(self, bundle, tmp_path):
        """Test the summary subcommands on a fitted index."""
        out_dir, attributes = bundle
        ssi = tmp_path / 'ssi.csv'
        assert main(['efa', str(attributes), '--out', str(ssi), '--report', str(tmp_path / 'efa.txt')]) == 0

        assert main(['modes', str(ssi), '--out', str(tmp_path / 'modes.csv'),
                     '--density-out', str(tmp_path / 'density.csv')]) == 0
        assert main(['aggregate', '--ssi', str(ssi), '--census', str(out_dir / 'census.csv'),
                     '--out', str(tmp_path / 'localities.csv')]) == 0
        assert main(['kmeans', str(attributes), '--k', '4', '--seed', '2', '--ssi', str(ssi),
                     '--spread-out', str(tmp_path / 'spread.csv'), '--out', str(tmp_path / 'classes.csv')]) == 0

        assert len((tmp_path / 'modes.csv').read_text().splitlines()) >= 2
        localities = (tmp_path / 'localities.csv').read_text().splitlines()
        assert localities[0].startswith('year,locality_id,count')
        assert len(localities) == 1 + 20
        assert len((tmp_path / 'classes.csv').read_text().splitlines()) == 1001
        assert len((tmp_path / 'spread.csv').read_text().splitlines()) == 1 + 4

    def test_modes_rejects_zero_bandwidth(self, tmp_path):
        """Test a non-positive bandwidth fails instead of falling back to the default."""
        ssi = tmp_path / 'ssi.csv'
        write_ssi(str(ssi), SsiVector(block_ids=[f"B{i}" for i in range(50)], values=np.linspace(0.1, 0.9, 50)))
        out = tmp_path / 'modes.csv'

        assert main(['modes', str(ssi), '--bandwidth', '0', '--out', str(out)]) == 1
        assert not out.exists()

    def test_modes_density_table_matches_peaks(self, tmp_path):
        """Test the plotted curve is the one the peaks were read from."""
        ssi = tmp_path / 'ssi.csv'
        values = np.concatenate([np.linspace(0.1, 0.2, 60), np.linspace(0.55, 0.65, 40)])
        write_ssi(str(ssi), SsiVector(block_ids=[f"B{i}" for i in range(100)], values=values))
        modes = tmp_path / 'modes.csv'
        density = tmp_path / 'density.csv'

        assert main(['modes', str(ssi), '--bandwidth', '0.03', '--out', str(modes),
                     '--density-out', str(density)]) == 0

        peaks = [line.split(',') for line in modes.read_text().splitlines()[1:]]
        kde = [line.split(',') for line in density.read_text().splitlines()[1:] if line.startswith('kde')]
        assert len(peaks) == 2
        assert peaks[0][2] == max(kde, key=lambda row: float(row[2]))[2]

    def test_missing_input_exit_code(self, tmp_path):
        """Test unreadable input maps to exit code 2."""
        code = main(['ingest', str(tmp_path / 'absent.csv'), '--out', str(tmp_path / 'a.csv')])

        assert code == 2

    def test_malformed_row_exit_code(self, tmp_path):
        """Test a bad census row maps to exit code 1 and writes nothing."""
        census = tmp_path / 'census.csv'
        census.write_text(
            "block_id,locality_id,year,houses_total,houses_no_water,houses_dirt_floor_or_single_room,"
            "houses_no_sanitation,occupants_total,rooms_total\nB1,L1,2010,ten,1,1,1,1,1\n"
        )
        out = tmp_path / 'a.csv'

        assert main(['ingest', str(census), '--out', str(out)]) == 1
        assert not out.exists()


class TestTexturePipeline:
    """Test raster generation, texture extraction and validation."""

    def test_variance_tracks_ssi(self, tmp_path):
        """Test GLCM variance falls as SSI rises on 100 planted blocks."""
        out_dir = tmp_path / 'bundle'
        assert main(['synth', '--blocks', '100', '--seed', '3', '--with-raster', '--raster-size', '512',
                     '--out-dir', str(out_dir)]) == 0
        planted = write_planted_weights(out_dir)
        attributes = tmp_path / 'attributes.csv'
        ssi = tmp_path / 'ssi.csv'
        features = tmp_path / 'features.csv'
        report = tmp_path / 'validate.txt'

        assert main(['ingest', str(out_dir / 'census.csv'), '--out', str(attributes)]) == 0
        assert main(['efa', str(attributes), '--weights', f"fixed:{planted}", '--out', str(ssi),
                     '--report', str(tmp_path / 'efa.txt')]) == 0
        assert main(['glcm', str(out_dir / 'raster.pgm'), str(out_dir / 'mask.pgm'),
                     '--labels', str(out_dir / 'labels.csv'), '--window', '21', '--levels', '32',
                     '--threads', '1', '--out', str(features)]) == 0
        assert main(['validate', str(ssi), str(features), '--feature', 'variance',
                     '--report', str(report)]) == 0

        payload = json.loads((tmp_path / 'validate.txt.json').read_text())
        assert payload['validation']['pearson_r'] <= -0.5
        assert payload['validation']['n_blocks'] == 100
        assert payload['validation']['n_missing'] == 0
        assert set(payload['all_features']) == {
            'uniformity', 'entropy', 'contrast', 'idm', 'variance', 'covariance', 'correlation',
        }

    def test_pipeline_is_deterministic(self, tmp_path):
        """Test seeds and thread counts do not change any output byte."""
        outputs = ('census.csv', 'raster.pgm', 'mask.pgm', 'labels.csv', 'truth.json',
                   'attributes.csv', 'ssi.csv', 'features.csv', 'classes.csv')
        runs = []
        for name, threads in (('one', '1'), ('four', '4')):
            out_dir = tmp_path / name
            assert main(['synth', '--blocks', '100', '--seed', '8', '--with-raster', '--raster-size', '512',
                         '--out-dir', str(out_dir)]) == 0
            planted = write_planted_weights(out_dir)
            assert main(['ingest', str(out_dir / 'census.csv'), '--out', str(out_dir / 'attributes.csv')]) == 0
            assert main(['efa', str(out_dir / 'attributes.csv'), '--weights', f"fixed:{planted}",
                         '--out', str(out_dir / 'ssi.csv'), '--report', str(out_dir / 'efa.txt')]) == 0
            assert main(['glcm', str(out_dir / 'raster.pgm'), str(out_dir / 'mask.pgm'),
                         '--labels', str(out_dir / 'labels.csv'), '--window', '21', '--levels', '32',
                         '--threads', threads, '--out', str(out_dir / 'features.csv')]) == 0
            assert main(['kmeans', str(out_dir / 'attributes.csv'), '--seed', '5',
                         '--out', str(out_dir / 'classes.csv')]) == 0
            runs.append(out_dir)

        for filename in outputs:
            assert (runs[0] / filename).read_bytes() == (runs[1] / filename).read_bytes()
        assert (runs[0] / 'efa.txt.json').read_bytes() == (runs[1] / 'efa.txt.json').read_bytes()
        assert len((runs[0] / 'features.csv').read_text().splitlines()) == 101

    def test_mismatched_mask_exit_code(self, tmp_path):
        """Test a mask of the wrong size is rejected before writing."""
        out_dir = tmp_path / 'bundle'
        assert main(['synth', '--blocks', '100', '--seed', '1', '--with-raster', '--raster-size', '200',
                     '--out-dir', str(out_dir)]) == 0
        small = tmp_path / 'small.pgm'
        small.write_bytes(b"P5\n2 2\n255\n\x01\x01\x01\x01")
        features = tmp_path / 'features.csv'

        code = main(['glcm', str(out_dir / 'raster.pgm'), str(small), '--window', '9',
                     '--out', str(features)])

        assert code == 1
        assert not features.exists()

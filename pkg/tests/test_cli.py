import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from conftest import read_matrix
from innerlab.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main, read_job_file
from innerlab.experiment import config_grid, config_kernel
from innerlab.utils.errors import ConfigError
from innerlab.utils.parameters import JobConfig

RECIPES = Path(__file__).parents[1] / 'experiment' / 'recipes'


def run_cli(tmp_path, *argv):
    ''' Run the command line with the outputs in a temporary directory. '''

    return main(list(argv) + ['--out_dir', str(tmp_path)])


def output(tmp_path, pattern):

    files = sorted(tmp_path.glob(pattern))
    assert len(files) == 1, f'Expected one file matching {pattern}, got {files}'
    return files[0]

# --- COMMANDS ---

def test_npcheck_certifies_dirichlet(tmp_path):

    assert run_cli(tmp_path, 'npcheck', '--spec', 'dirichlet:1', '--degree', '200', '--exact') == EXIT_OK

    report = json.loads(output(tmp_path, 'npcheck-*[0-9a-f].json').read_text())
    assert report['certificate']['status'] == 'certified'
    assert report['certificate']['mode'] == 'exact'


def test_ratio_scan_closed_form(tmp_path):

    code = run_cli(
        tmp_path, 'ratio-scan', '--spec', 'dirichlet:2', '--d', '1', '--point-zero', '1',
        '--direction', '-1', '--tmax', '0.95', '--N', '500',
    )
    assert code == EXIT_OK

    df = pd.read_csv(output(tmp_path, 'ratio-scan-*.csv'))
    assert list(df.columns) == ['t', 'ratio', 'tail_bound', 'closed_form']
    assert df['ratio'].iloc[-1] == pytest.approx(df['closed_form'].iloc[-1], abs=0.02)

    manifest = json.loads(output(tmp_path, 'ratio-scan-*.manifest.json').read_text())
    assert manifest['summary']['boundary_value']['value'] == pytest.approx(0.75, abs=1e-9)


def test_inner_scan_is_radius(tmp_path):

    code = run_cli(
        tmp_path, 'inner', '--spec', 'szego', '--d', '2', '--generators', 'z1,z2',
        '--N', '8', '--scan-direction', '0.6,0.8',
    )
    assert code == EXIT_OK

    df = pd.read_csv(output(tmp_path, 'inner-*.scan.csv'))
    assert df['sigma_1'].to_numpy() == pytest.approx(df['t'].to_numpy(), abs=1e-10)

    manifest = json.loads(output(tmp_path, 'inner-*.manifest.json').read_text())
    assert manifest['summary']['dim_E'] == 2
    assert manifest['summary']['reproduction']['passed']

    S = read_matrix(output(tmp_path, 'inner-*.S.txt'))
    assert S.shape == (45, 45)
    np.testing.assert_allclose(S, S.conj().T, atol=1e-15)
    assert np.trace(S).real == pytest.approx(2.)


def test_job_file_overridden_by_flags(tmp_path):

    job = tmp_path / 'job.json'
    job.write_text(json.dumps({'command': 'series', 'spec': 'dirichlet:1', 'degree': 50}))

    assert run_cli(tmp_path, 'series', '--config', str(job), '--degree', '20') == EXIT_OK

    manifest = json.loads(output(tmp_path, 'series-*.manifest.json').read_text())
    assert manifest['config']['degree'] == 20
    assert manifest['config']['spec'] == 'dirichlet:1'
    assert len(pd.read_csv(output(tmp_path, 'series-*.a.csv'), header=None)) == 21

# --- DETERMINISM ---

def test_outputs_are_byte_identical(tmp_path):

    argv = ['curvature', '--spec', 'szego', '--d', '2', '--generators', 'z1,z2', '--N', '6', '--samples', '500', '--tgrid', '0.5,0.9']

    assert run_cli(tmp_path / 'a', *argv) == EXIT_OK
    assert run_cli(tmp_path / 'b', *argv) == EXIT_OK

    first  = {fp.name: fp.read_bytes() for fp in (tmp_path / 'a').iterdir()}
    second = {fp.name: fp.read_bytes() for fp in (tmp_path / 'b').iterdir()}

    assert first == second
    assert any(name.endswith('.manifest.json') for name in first)


def test_manifest_contents(tmp_path):

    assert run_cli(tmp_path, 'conjecture45', '--count', '3', '--degree', '100') == EXIT_OK

    manifest = json.loads(output(tmp_path, 'conjecture45-*.manifest.json').read_text())

    assert set(manifest) == {'command', 'hash', 'config', 'versions', 'tolerances', 'tail_bounds', 'summary', 'artifacts'}
    assert manifest['command'] == 'conjecture45'
    assert manifest['config']['count'] == 3
    assert not {'name', 'out_dir', 'log_file'} & set(manifest['config'])
    assert 'numpy' in manifest['versions']
    assert all((tmp_path / name).exists() for name in manifest['artifacts'])


def test_hash_ignores_run_keys():

    a = JobConfig.from_mapping('series', {'name': 'a', 'out_dir': 'x'})
    b = JobConfig.from_mapping('series', {'name': 'b', 'out_dir': 'y', 'log_file': True})
    c = JobConfig.from_mapping('series', {'degree': 10})

    assert a.hash == b.hash != c.hash

# --- ERRORS ---

def test_unknown_job_key(tmp_path):

    job = tmp_path / 'job.json'
    job.write_text(json.dumps({'spec': 'szego', 'frobnicate': 1}))

    assert run_cli(tmp_path, 'series', '--config', str(job)) == EXIT_CONFIG


@pytest.mark.parametrize('argv', [
    ['series', '--degree', 'ten'],
    ['series', '--d', '0'],
    ['series', '--frobnicate', '1'],
    ['series', '--spec', 'hardy'],
    ['inner', '--generators', 'z1 + z3'],
    ['extremal', '--spec', 'szego'],
    ['ratio-scan', '--generators', 'z1', '--tmax', '1.5'],
])
def test_invalid_configuration(tmp_path, argv):

    assert run_cli(tmp_path, *argv) == EXIT_CONFIG


def test_malformed_job_file(tmp_path):

    job = tmp_path / 'job.json'
    job.write_text('{"spec": "szego",\n "degree": }')

    assert run_cli(tmp_path, 'series', '--config', str(job)) == EXIT_CONFIG
    assert run_cli(tmp_path, 'series', '--config', str(tmp_path / 'missing.json')) == EXIT_CONFIG


def test_job_file_of_another_command(tmp_path):

    job = tmp_path / 'job.json'
    job.write_text(json.dumps({'command': 'inner'}))

    assert run_cli(tmp_path, 'series', '--config', str(job)) == EXIT_CONFIG


def test_truncation_budget_violation(tmp_path):

    code = run_cli(tmp_path, 'ratio-scan', '--generators', 'z1 - 1/2', '--N', '5', '--tmax', '0.95')
    assert code == EXIT_NUMERICAL


def test_non_nevanlinna_pick_kernel(tmp_path):

    coeffs = tmp_path / 'linear.csv'
    coeffs.write_text(''.join(f'{n},{n + 1},1\n' for n in range(41)))

    code = run_cli(tmp_path, 'inner', '--spec', str(coeffs), '--generators', 'z1', '--N', '10', '--degree', '20')
    assert code == EXIT_NUMERICAL


def test_config_error_names_field():

    with pytest.raises(ConfigError) as e:
        JobConfig.from_mapping('series', {'N': 2.5})

    assert e.value.field == 'N'


@pytest.mark.parametrize('recipe', sorted(RECIPES.glob('*.json')), ids=lambda fp: fp.stem)
def test_recipes_are_valid(recipe):

    command = json.loads(recipe.read_text())['command']
    config  = JobConfig.from_mapping(command, read_job_file(str(recipe), command))

    assert config_grid(config)
    assert config_kernel(config).degree == config.kernel_degree

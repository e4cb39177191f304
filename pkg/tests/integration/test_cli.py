"""
Fallcat - Command Line Tests
End-to-end runs of `main` on temporary run configs.
"""
import csv
import io
import json
from pathlib import Path

import numpy as np
import pytest

from apps.cli.config import load_config, parse_config
from apps.cli.main import main
from apps.core.exceptions import ConfigError

CONFIG_DIR = Path(__file__).resolve().parents[2] / 'configs'

DISC = {'type': 'disc', 'I': 1.0, 'm': 1.0}
CIRCLE = {'generator': 'disc_circle_loop', 'params': {'r0': 1.0, 'turns': 1}}

pytestmark = pytest.mark.integration


def envelope(stderr):
    """The JSON error envelope among the log lines on stderr."""
    lines = [line for line in stderr.splitlines() if line.startswith('{')]
    assert lines, stderr
    return json.loads(lines[-1])


# ===========================================
# Config Loading
# ===========================================

class TestConfig:
    """Tests for config parsing and validation."""

    @pytest.mark.parametrize('path', sorted(CONFIG_DIR.glob('*.json')), ids=lambda p: p.stem)
    def test_shipped_configs_parse(self, path):
        config = load_config(path)
        assert config.system_type in ('board', 'disc', 'nbody', 'generic')

    def test_defaults(self):
        config = parse_config({'system': DISC})
        assert config.steps == 4096
        assert config.method == 'rk4'

    def test_overrides_ignore_none(self):
        config = parse_config({'system': DISC, 'integrator': {'steps': 100}})
        assert config.with_overrides(steps=None, tolerance=1e-3).steps == 100
        assert config.with_overrides(steps=7).steps == 7

    def test_schema_violation_names_field(self):
        with pytest.raises(ConfigError) as excinfo:
            parse_config({'system': DISC, 'integrator': {'steps': 0}})
        assert excinfo.value.details['field'] == 'integrator.steps'

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            parse_config({'system': DISC, 'extra': 1})

    def test_json_syntax_error_has_position(self, write_config):
        with pytest.raises(ConfigError) as excinfo:
            load_config(write_config('{\n  "system": {,\n}'))
        assert excinfo.value.details['line'] == 2

    def test_cat_loop_takes_system_masses(self):
        config = parse_config({
            'system': {'type': 'nbody', 'masses': [1.0, 2.0, 3.0], 'group_parts': ['rotations']},
            'path': {'generator': 'cat_loop', 'params': {'amplitude': 0.1}},
            'integrator': {'steps': 16},
        })
        path = config.build_path()
        r = path.position(0.3).reshape(3, 3)
        np.testing.assert_allclose(np.array([1.0, 2.0, 3.0]) @ r, 0.0, atol=1e-12)
        assert path.samples == 16

    def test_bad_generator_params(self):
        config = parse_config({'system': DISC, 'path': {'generator': 'disc_circle_loop', 'params': {'radius': 1}}})
        with pytest.raises(ConfigError):
            config.build_path()


# ===========================================
# Commands
# ===========================================

class TestHolonomyCommand:
    """Tests for `holonomy`."""

    def test_disc_circle(self, write_config, capsys):
        code = main(['holonomy', write_config({'system': DISC, 'path': CIRCLE})])
        record = json.loads(capsys.readouterr().out)
        assert code == 0
        assert record['log'][0] == pytest.approx(-np.pi, abs=1e-9)
        assert record['analytic']['formula'] == 'circle'
        assert record['analytic']['passed'] is True

    def test_lie_euler_override(self, write_config, capsys):
        code = main(['holonomy', write_config({'system': DISC, 'path': CIRCLE}),
                     '--method', 'lie-euler', '--steps', '512'])
        record = json.loads(capsys.readouterr().out)
        assert code == 0
        assert record['method'] == 'lie-euler'
        assert record['steps'] == 512

    def test_csv_record(self, write_config, capsys):
        code = main(['holonomy', write_config({'system': DISC, 'path': CIRCLE}), '--format', 'csv'])
        rows = dict(csv.reader(io.StringIO(capsys.readouterr().out)))
        assert code == 0
        assert float(rows['angle']) == pytest.approx(-np.pi, abs=1e-9)
        assert rows['analytic.formula'] == 'circle'

    def test_cat_loop(self, write_config, capsys):
        code = main(['holonomy', write_config({
            'system': {'type': 'nbody', 'masses': [1.0, 1.0, 1.0], 'group_parts': ['rotations']},
            'path': {'generator': 'cat_loop', 'params': {'amplitude': 0.2}},
            'integrator': {'steps': 256},
        })])
        record = json.loads(capsys.readouterr().out)
        assert code == 0
        assert record['analytic'] is None
        assert abs(record['angle']) > 1e-4

    def test_open_sampled_path(self, write_config, tmp_path, capsys):
        (tmp_path / 'open.csv').write_text('t,r,phi,alpha\n0,1,0,0\n0.5,1.5,0,0\n1,2,0,0\n')
        code = main(['holonomy', write_config({'system': DISC, 'path': {'samples': 'open.csv'}})])
        assert code == 2
        assert envelope(capsys.readouterr().err)['error']['code'] == 'PATH_NOT_CLOSED'

    def test_malformed_sampled_path(self, write_config, tmp_path, capsys):
        (tmp_path / 'bad.csv').write_text('t,r,phi,alpha\n0,1,0,0\n0.5,oops,0,0\n')
        code = main(['holonomy', write_config({'system': DISC, 'path': {'samples': 'bad.csv'}})])
        error = envelope(capsys.readouterr().err)['error']
        assert code == 2
        assert error['code'] == 'CONFIG_ERROR'
        assert error['details']['line'] == 3

    def test_missing_path_section(self, write_config, capsys):
        assert main(['holonomy', write_config({'system': DISC})]) == 2


class TestLiftCommand:
    """Tests for `lift`."""

    def test_table_to_file(self, write_config, tmp_path, capsys):
        out = tmp_path / 'lift.csv'
        code = main(['lift', write_config({'system': DISC, 'path': CIRCLE}), '--steps', '64', '--out', str(out)])
        rows = list(csv.reader(out.read_text().splitlines()))
        assert code == 0
        assert capsys.readouterr().out == ''
        assert rows[0] == ['t', 'r', 'phi', 'alpha', 'P0', 'pairing']
        assert len(rows) == 66
        assert float(rows[-1][3]) == pytest.approx(-np.pi, abs=1e-9)

    def test_record_format(self, write_config, capsys):
        code = main(['lift', write_config({'system': DISC, 'path': CIRCLE}), '--steps', '16', '--format', 'record'])
        record = json.loads(capsys.readouterr().out)
        assert code == 0
        assert len(record['rows']) == 17

    def test_coarse_lift_fails_audit(self, write_config, capsys):
        wobble = {'generator': 'disc_wobble_loop', 'params': {'r0': 1.0, 'dr': 0.4}}
        code = main(['lift', write_config({'system': DISC, 'path': wobble}), '--steps', '16'])
        assert code == 1


class TestVerifyCommand:
    """Tests for `verify`."""

    def test_disc_passes(self, write_config, capsys):
        code = main(['verify', write_config({'system': DISC, 'verify': {'samples': 20}})])
        record = json.loads(capsys.readouterr().out)
        assert code == 0
        assert record['evaluated'] == 20
        assert all(item['passed'] for item in record['identities'])

    def test_seed_is_reproducible(self, write_config, capsys):
        path = write_config({'system': {'type': 'board', 'm1': 2.0, 'm2': 1.0}, 'verify': {'samples': 5}})
        main(['verify', path, '--seed', '7'])
        first = capsys.readouterr().out
        main(['verify', path, '--seed', '7'])
        assert capsys.readouterr().out == first

    def test_collinear_point_is_singular(self, write_config, capsys):
        code = main(['verify', write_config({
            'system': {'type': 'nbody', 'masses': [1.0, 1.0, 1.0]},
            'point': [0, 0, 0, 1, 0, 0, 2, 0, 0],
        })])
        assert code == 3
        assert envelope(capsys.readouterr().err)['error']['code'] == 'SINGULAR_ACTION'

    def test_generic_system(self, capsys):
        code = main(['verify', str(CONFIG_DIR / 'generic_planar.json'), '--seed', '1'])
        record = json.loads(capsys.readouterr().out)
        assert code == 0
        assert record['system'] == 'planar_particle'


class TestCurvatureCommand:
    """Tests for `curvature`."""

    def test_disc_scan(self, write_config, capsys):
        code = main(['curvature', write_config({
            'system': DISC,
            'curvature': {'plane': [0, 1], 'scan': {'base': [1, 0, 0], 'coordinate': 0,
                                                     'start': 0.5, 'stop': 2.0, 'num': 4}},
        })])
        rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
        assert code == 0
        assert rows[0] == ['r', 'phi', 'alpha', 'i', 'j', 'F0', 'analytic']
        for row in rows[1:]:
            assert float(row[5]) == pytest.approx(float(row[6]), abs=1e-6)

    def test_bad_plane(self, write_config, capsys):
        code = main(['curvature', write_config({
            'system': DISC, 'curvature': {'plane': [1, 1], 'points': [[1, 0, 0]]},
        })])
        assert code == 2


class TestDescribeCommand:
    """Tests for `describe`."""

    def test_disc(self, write_config, capsys):
        code = main(['describe', write_config({'system': DISC, 'point': [1.0, 0.0, 0.0]})])
        record = json.loads(capsys.readouterr().out)
        assert code == 0
        assert record['gram'] == [[2.0]]
        assert record['connection'] == [[0.0, 0.5, 1.0]]

    def test_wrong_point_length(self, write_config, capsys):
        assert main(['describe', write_config({'system': DISC, 'point': [1.0]})]) == 2


# ===========================================
# Error Handling
# ===========================================

class TestErrorHandling:
    """Exit codes and the error envelope."""

    def test_invalid_json(self, write_config, capsys):
        code = main(['verify', write_config('{"system": ')])
        error = envelope(capsys.readouterr().err)['error']
        assert code == 2
        assert error['code'] == 'CONFIG_ERROR'
        assert error['details']['line'] == 1

    def test_missing_file(self, tmp_path, capsys):
        assert main(['verify', str(tmp_path / 'missing.json')]) == 2

    def test_invalid_system_parameters(self, write_config, capsys):
        code = main(['verify', write_config({'system': {'type': 'disc', 'm': -1.0}})])
        assert code == 2
        assert envelope(capsys.readouterr().err)['success'] is False

    def test_two_bodies_with_translations_and_rotations(self, write_config, capsys):
        code = main(['verify', write_config({'system': {'type': 'nbody', 'masses': [1.0, 1.0]}})])
        assert code == 2
        assert envelope(capsys.readouterr().err)['error']['code'] == 'INVALID_SPEC'

"""
Fallcat - Run Configuration
JSON run configs checked against schemas/run_config.schema.json.
"""
import csv
import json
import logging
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from apps.core.exceptions import ConfigError, FallcatError
from apps.dynamics.models import ShapePath
from apps.systems import paths
from apps.systems.models import BoardSpec, CatLoopParams, DiscSpec, GenericSpec, NBodySpec
from apps.systems.services import build
from fallcat import settings

logger = logging.getLogger(__name__)

SCHEMA_PATH = Path(__file__).resolve().parent / 'schemas' / 'run_config.schema.json'

PATH_GENERATORS = {
    'disc_circle_loop': paths.disc_circle_loop,
    'radial_excursion': paths.radial_excursion,
    'disc_wobble_loop': paths.disc_wobble_loop,
    'board_sinusoid': paths.board_sinusoid,
    'stationary': paths.stationary_path,
}


@lru_cache(maxsize=1)
def load_schema():
    with open(SCHEMA_PATH, encoding='utf-8') as handle:
        return json.load(handle)


def _field_name(error_path):
    name = ''
    for part in error_path:
        name += f'[{part}]' if isinstance(part, int) else (f'.{part}' if name else str(part))
    return name or '<root>'


@dataclass
class RunConfig:
    system: dict
    path: Optional[dict] = None
    point: Optional[list] = None
    holonomy_base: Optional[list] = None
    curvature: Optional[dict] = None
    steps: int = settings.DEFAULT_STEPS
    tolerance: float = settings.DEFAULT_TOLERANCE
    method: str = settings.DEFAULT_METHOD
    seed: int = settings.DEFAULT_SEED
    verify_samples: int = settings.VERIFY_SAMPLES
    output_path: Optional[str] = None
    output_format: Optional[str] = None
    base_dir: Path = field(default_factory=Path.cwd)

    @property
    def system_type(self):
        return self.system['type']

    def with_overrides(self, **overrides):
        """Command-line flags win over config fields; None means not given."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    # ===========================================
    # Builders
    # ===========================================

    def system_spec(self):
        params = {k: v for k, v in self.system.items() if k != 'type'}
        kind = self.system_type
        if kind == 'board':
            return BoardSpec(**params)
        if kind == 'disc':
            return DiscSpec(**params)
        if kind == 'nbody':
            return NBodySpec(**params)
        for key in ('coordinates', 'action'):
            params[key] = tuple(params[key])
        for key in ('metric', 'generators', 'sample_box'):
            if key in params:
                params[key] = tuple(tuple(row) for row in params[key])
        return GenericSpec(**params)

    def build_system(self):
        return build(self.system_spec())

    def build_path(self, model=None) -> ShapePath:
        if not self.path:
            raise ConfigError("This command needs a 'path' section", field='path')
        if 'samples' in self.path:
            return load_sampled_path(self.base_dir / self.path['samples'], steps=self.steps)

        name = self.path['generator']
        params = dict(self.path.get('params', {}))
        try:
            if name == 'cat_loop':
                if 'masses' not in params and self.system_type == 'nbody' and len(self.system['masses']) == 3:
                    params['masses'] = tuple(self.system['masses'])
                params.setdefault('samples', self.steps)
                return paths.cat_loop(CatLoopParams(**params))
            params.setdefault('samples', self.steps)
            return PATH_GENERATORS[name](**params)
        except TypeError as exc:
            raise ConfigError(f"Bad parameters for path '{name}': {exc}", field='path.params') from exc


def load_sampled_path(csv_path, steps=None) -> ShapePath:
    """
    CSV side file: header row, first column t, one column per coordinate.

    Raises:
        ConfigError: missing file or malformed rows (with line number)
    """
    csv_path = Path(csv_path)
    if not csv_path.is_file():
        raise ConfigError(f"Sampled path file not found: {csv_path}", field='path.samples')
    rows = []
    with open(csv_path, newline='', encoding='utf-8') as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if not header or len(header) < 2:
            raise ConfigError("Sampled path needs a header 't,<coordinates>'", field='path.samples', line=1)
        for row in reader:
            if not row:
                continue
            try:
                values = [float(v) for v in row]
            except ValueError as exc:
                raise ConfigError(f"Non-numeric value: {exc}", field='path.samples',
                                  line=reader.line_num) from exc
            if len(values) != len(header):
                raise ConfigError(f"Expected {len(header)} columns, got {len(values)}",
                                  field='path.samples', line=reader.line_num)
            rows.append(values)
    table = np.array(rows, dtype=float)
    if len(table) < 2:
        raise ConfigError("Sampled path needs at least 2 rows", field='path.samples')
    try:
        path = ShapePath.from_samples(table[:, 0], table[:, 1:], name=csv_path.stem)
    except FallcatError as exc:
        raise ConfigError(exc.message, field='path.samples') from exc
    if steps:
        path = replace(path, samples=steps)
    return path


def parse_config(data, base_dir=None) -> RunConfig:
    """
    Raises:
        ConfigError: schema violation, with the offending field
    """
    validator = jsonschema.Draft202012Validator(load_schema())
    error = jsonschema.exceptions.best_match(validator.iter_errors(data))
    if error is not None:
        where = _field_name(error.absolute_path)
        raise ConfigError(f"Invalid config at {where}: {error.message}", field=where)

    integrator = data.get('integrator', {})
    output = data.get('output', {})
    return RunConfig(
        system=data['system'],
        path=data.get('path'),
        point=data.get('point'),
        holonomy_base=data.get('holonomy', {}).get('base'),
        curvature=data.get('curvature'),
        steps=integrator.get('steps', settings.DEFAULT_STEPS),
        tolerance=integrator.get('tolerance', settings.DEFAULT_TOLERANCE),
        method=integrator.get('method', settings.DEFAULT_METHOD),
        seed=data.get('seed', settings.DEFAULT_SEED),
        verify_samples=data.get('verify', {}).get('samples', settings.VERIFY_SAMPLES),
        output_path=output.get('path'),
        output_format=output.get('format'),
        base_dir=Path(base_dir) if base_dir else Path.cwd(),
    )


def load_config(path) -> RunConfig:
    """
    Raises:
        ConfigError: unreadable file, JSON syntax error (line/column) or schema violation
    """
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as exc:
        raise ConfigError(f"Cannot read config {path}: {exc.strerror}", field='config') from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Config is not valid JSON: {exc.msg}", line=exc.lineno, column=exc.colno) from exc
    logger.debug(f"Loaded config {path}")
    return parse_config(data, base_dir=path.resolve().parent)

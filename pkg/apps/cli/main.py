"""
Fallcat - Command Line Entry Point

    python manage.py verify    config.json [--seed N]
    python manage.py lift      config.json [--steps N] [--method rk4|lie-euler]
    python manage.py holonomy  config.json [--tol T]
    python manage.py curvature config.json [--out FILE] [--format csv|record]
    python manage.py describe  config.json

Exit codes: 0 pass, 1 verification failure, 2 config error, 3 singular action.
"""
import argparse
import json
import logging
import logging.config
import sys

from apps.core.exceptions import ExitCode, error_payload, get_exit_code
from fallcat import __version__, settings

from .commands import COMMANDS
from .config import load_config
from .output import flatten_record, plain, render_record, render_table, require_finite, write_output

logger = logging.getLogger(__name__)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('config', help='run configuration (JSON)')
    common.add_argument('--steps', type=int, help='integration steps per unit time')
    common.add_argument('--tol', type=float, help='pass/fail tolerance')
    common.add_argument('--seed', type=int, help='seed for random sample points')
    common.add_argument('--out', help='output file (default: stdout)')
    common.add_argument('--format', choices=['csv', 'record'], help='output format')
    common.add_argument('--method', choices=['rk4', 'lie-euler'], help='reconstruction integrator')
    common.add_argument('-v', '--verbose', action='store_true', help='debug logging')

    parser = argparse.ArgumentParser(
        prog='fallcat',
        description='Momentum-map connections: lifts, holonomy, curvature and identity checks.',
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    sub = parser.add_subparsers(dest='command', required=True)
    helps = {
        'verify': 'check every connection identity at sampled points',
        'lift': 'horizontal lift of a shape path (trajectory table)',
        'holonomy': 'holonomy of a closed shape path',
        'curvature': 'curvature of the connection at configured points',
        'describe': 'metric, generators, Gram matrix and connection at a point',
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


def configure_logging(verbose=False):
    config = json.loads(json.dumps(settings.LOGGING))
    if verbose:
        config['loggers']['apps']['level'] = 'DEBUG'
    logging.config.dictConfig(config)


def render(result, fmt):
    fmt = fmt or ('csv' if result.kind == 'table' else 'record')
    if fmt == 'record':
        return render_record(result.as_record())
    if result.kind == 'table':
        return render_table(result.header, result.rows)
    require_finite(plain(result.record), 'record')
    return render_table(['key', 'value'], flatten_record(plain(result.record)))


def main(argv=None):
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    logger.info(f"fallcat {args.command} {args.config}")

    try:
        config = load_config(args.config).with_overrides(
            steps=args.steps, tolerance=args.tol, seed=args.seed,
            output_path=args.out, output_format=args.format, method=args.method,
        )
        result = COMMANDS[args.command](config)
        write_output(render(result, config.output_format), config.output_path)
    except Exception as exc:
        payload = error_payload(exc, debug=settings.DEBUG)
        sys.stderr.write(json.dumps(payload, sort_keys=True) + '\n')
        return get_exit_code(exc)

    code = ExitCode.PASS if result.passed else ExitCode.VERIFICATION_FAILED
    logger.info(f"fallcat {args.command} finished with exit code {int(code)}")
    return int(code)


if __name__ == '__main__':
    sys.exit(main())

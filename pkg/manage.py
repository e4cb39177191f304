#!/usr/bin/env python
"""Fallcat command-line utility: verify, lift, holonomy, curvature, describe."""
import sys


def main():
    """Run a fallcat command."""
    try:
        from apps.cli.main import main as run
    except ImportError as exc:
        raise ImportError(
            "Couldn't import fallcat's dependencies. Are numpy, scipy and sympy "
            "installed and available on your PYTHONPATH environment variable? Did you "
            "forget to activate a virtual environment?"
        ) from exc
    return run(sys.argv[1:])


if __name__ == '__main__':
    sys.exit(main())

"""Fallcat - python -m apps.cli"""
import sys

from .main import main

sys.exit(main())

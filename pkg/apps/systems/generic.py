"""
Fallcat - Generic Systems
Table-driven systems: metric, potential and action given as expressions
in the coordinate names, compiled with sympy after a whitelist check.
"""
import keyword
import logging
import re

import numpy as np
import sympy as sp
from sympy.parsing.sympy_parser import (
    convert_xor,
    parse_expr,
    standard_transformations,
)

from apps.core.exceptions import InvalidSpecError
from apps.geometry.models import SystemModel
from apps.lie.models import GroupKind, LieStructure
from apps.lie.services import hat

from .models import GenericSpec

logger = logging.getLogger(__name__)

# ===========================================
# Expression whitelist
# ===========================================

ALLOWED_CHARACTERS = re.compile(r'^[A-Za-z0-9_+\-*/^(). ,]*$')

DANGEROUS_EXPRESSION_PATTERNS = [
    r'__',              # Dunder access
    r'\bimport\b',
    r'\blambda\b',
    r'\beval\b',
    r'\bexec\b',
    r'\bopen\b',
    r'\.\s*[A-Za-z_]',  # Attribute access
]

ALLOWED_FUNCTIONS = {
    'sin', 'cos', 'tan', 'asin', 'acos', 'atan', 'atan2',
    'sinh', 'cosh', 'tanh', 'exp', 'log', 'sqrt', 'Abs', 'pi',
}

IDENTIFIER = re.compile(r'[A-Za-z_][A-Za-z0-9_]*')
NUMBER = re.compile(r"(?<![A-Za-z0-9_])\d+\.?\d*(?:[eE][+-]?\d+)?")
TRANSFORMATIONS = standard_transformations + (convert_xor,)


def parse_lie(text) -> LieStructure:
    """'so3', 'so2' or 'abelian:k'."""
    text = str(text).strip().lower()
    if text == 'so3':
        return LieStructure.so3()
    if text == 'so2':
        return LieStructure.abelian(1)
    match = re.fullmatch(r'abelian:(\d+)', text)
    if match and int(match.group(1)) > 0:
        return LieStructure.abelian(int(match.group(1)))
    raise InvalidSpecError(f"Unsupported group '{text}'", field='lie', choices=['so2', 'so3', 'abelian:k'])


def group_symbols(lie: LieStructure):
    if lie.kind is GroupKind.SO3:
        return [sp.Symbol(f'R{p}{q}') for p in range(3) for q in range(3)]
    return [sp.Symbol(f'b{i}') for i in range(lie.dim)]


def group_values(g):
    """Numeric values for group_symbols, in the same order."""
    return list(np.asarray(g.data, dtype=float).reshape(-1))


def validate_expression(text, allowed_names, field='expression'):
    """
    Reject anything but arithmetic over the allowed names and functions.

    Raises:
        InvalidSpecError: forbidden characters, patterns or names
    """
    text = str(text)
    if not ALLOWED_CHARACTERS.match(text):
        raise InvalidSpecError(f"Forbidden characters in {field}", field=field, expression=text)
    for pattern in DANGEROUS_EXPRESSION_PATTERNS:
        if re.search(pattern, text):
            raise InvalidSpecError(f"Forbidden construct in {field}", field=field, expression=text)
    bare = NUMBER.sub(" ", text)
    unknown = {name for name in IDENTIFIER.findall(bare)
               if name not in allowed_names and name not in ALLOWED_FUNCTIONS}
    if unknown:
        raise InvalidSpecError(f"Unknown names in {field}: {sorted(unknown)}", field=field)
    return text


def _parse(text, symbols, field):
    names = {str(s) for s in symbols}
    validate_expression(text, names, field)
    local = {str(s): s for s in symbols}
    try:
        return parse_expr(text, local_dict=local, transformations=TRANSFORMATIONS)
    except (SyntaxError, TypeError, ValueError, sp.SympifyError) as exc:
        raise InvalidSpecError(f"Cannot parse {field}: {exc}", field=field, expression=text) from exc


def _derived_generators(action_exprs, lie, gsyms):
    """X_a = d/de R_{exp(e E_a)} x at e = 0."""
    columns = []
    if lie.kind is GroupKind.SO3:
        at_identity = dict(zip(gsyms, np.eye(3).reshape(-1)))
        for alpha in range(3):
            E = hat(np.eye(3)[alpha]).reshape(-1)
            columns.append([
                sp.simplify(sum(sp.diff(expr, s) * float(e) for s, e in zip(gsyms, E) if e)
                            .subs(at_identity))
                for expr in action_exprs
            ])
    else:
        at_identity = {s: 0 for s in gsyms}
        for alpha in range(lie.dim):
            columns.append([sp.diff(expr, gsyms[alpha]).subs(at_identity) for expr in action_exprs])
    return sp.Matrix(columns).T


def compile_generic(spec: GenericSpec) -> SystemModel:
    """
    Raises:
        InvalidSpecError: bad names, shapes or expressions
    """
    coordinates = tuple(str(c) for c in spec.coordinates)
    n = len(coordinates)
    if n < 1:
        raise InvalidSpecError("Generic system needs coordinates", field='coordinates')
    lie = parse_lie(spec.lie)
    gsyms = group_symbols(lie)
    reserved = {str(s) for s in gsyms} | ALLOWED_FUNCTIONS
    for name in coordinates:
        if not IDENTIFIER.fullmatch(name) or keyword.iskeyword(name) or name in reserved:
            raise InvalidSpecError(f"Invalid coordinate name '{name}'", field='coordinates')
    if len(set(coordinates)) != n:
        raise InvalidSpecError("Duplicate coordinate names", field='coordinates')

    xsyms = [sp.Symbol(c) for c in coordinates]

    if len(spec.metric) != n or any(len(row) != n for row in spec.metric):
        raise InvalidSpecError(f"metric must be {n}x{n}", field='metric')
    metric_expr = sp.Matrix([[_parse(e, xsyms, f'metric[{i}][{j}]') for j, e in enumerate(row)]
                             for i, row in enumerate(spec.metric)])
    potential_expr = _parse(spec.potential, xsyms, 'potential')

    if len(spec.action) != n:
        raise InvalidSpecError(f"action needs {n} expressions", field='action')
    action_exprs = [_parse(e, xsyms + gsyms, f'action[{i}]') for i, e in enumerate(spec.action)]

    if spec.generators is not None:
        if len(spec.generators) != n or any(len(row) != lie.dim for row in spec.generators):
            raise InvalidSpecError(f"generators must be {n}x{lie.dim}", field='generators')
        generator_expr = sp.Matrix([[_parse(e, xsyms, f'generators[{i}][{a}]') for a, e in enumerate(row)]
                                    for i, row in enumerate(spec.generators)])
    else:
        generator_expr = _derived_generators(action_exprs, lie, gsyms)

    metric_fn = sp.lambdify(xsyms, metric_expr, modules='numpy')
    potential_fn = sp.lambdify(xsyms, potential_expr, modules='numpy')
    action_fn = sp.lambdify(xsyms + gsyms, action_exprs, modules='numpy')
    generator_fn = sp.lambdify(xsyms, generator_expr, modules='numpy')

    def metric(x):
        return np.array(metric_fn(*x), dtype=float).reshape(n, n)

    def potential(x):
        return float(potential_fn(*x))

    def generators(x):
        return np.array(generator_fn(*x), dtype=float).reshape(n, lie.dim)

    def action(g, x):
        lie.require(g.lie)
        return np.array(action_fn(*x, *group_values(g)), dtype=float).reshape(n)

    box = np.array(spec.sample_box, dtype=float) if spec.sample_box is not None else None
    if box is not None and (box.shape != (n, 2) or np.any(box[:, 0] >= box[:, 1])):
        raise InvalidSpecError(f"sample_box must be {n} [lo, hi] pairs with lo < hi", field='sample_box')

    def sampler(rng):
        if box is None:
            return rng.uniform(-1.0, 1.0, n)
        return rng.uniform(box[:, 0], box[:, 1])

    logger.debug(f"Compiled generic system '{spec.name}' on {lie.label}")
    return SystemModel(
        name=spec.name, n=n, lie=lie, metric=metric, potential=potential,
        generators=generators, action=action, coordinates=coordinates,
        sampler=sampler, spec=spec,
    )

"""
Fallcat - Error Types and Error Envelope
Every failure carries a stable code and a process exit status.
"""
import logging
from enum import IntEnum

logger = logging.getLogger(__name__)


class ExitCode(IntEnum):
    PASS = 0
    VERIFICATION_FAILED = 1
    CONFIG_ERROR = 2
    SINGULAR_ACTION = 3


class FallcatError(Exception):
    """Base error. `details` end up in the error envelope."""
    code = 'FALLCAT_ERROR'
    exit_code = ExitCode.CONFIG_ERROR

    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details


class StructuralError(FallcatError):
    """Operands of different dimension."""
    code = 'DIMENSION_MISMATCH'


class KindMismatchError(StructuralError):
    """Group element and algebra vector of different Lie structures."""
    code = 'KIND_MISMATCH'


class AmbiguousBranchError(FallcatError):
    code = 'AMBIGUOUS_BRANCH'


class DegenerateFormError(FallcatError):
    code = 'DEGENERATE_FORM'


class VerticalDegeneracyError(FallcatError):
    """C(x) is singular: some generator is horizontal, the action is not free."""
    code = 'VERTICAL_DEGENERACY'
    exit_code = ExitCode.SINGULAR_ACTION


class SingularActionError(FallcatError):
    """Gram matrix of the generators is (numerically) singular."""
    code = 'SINGULAR_ACTION'
    exit_code = ExitCode.SINGULAR_ACTION


class StepUnderflowError(FallcatError):
    code = 'STEP_UNDERFLOW'


class InvalidSpecError(FallcatError):
    code = 'INVALID_SPEC'


class AuditFailedError(InvalidSpecError):
    """A system failed the Killing / action-law / invariance audits."""
    code = 'AUDIT_FAILED'


class ConfigError(FallcatError):
    code = 'CONFIG_ERROR'


class PathNotClosedError(FallcatError):
    code = 'PATH_NOT_CLOSED'


class NonFiniteError(FallcatError):
    code = 'NON_FINITE'
    exit_code = ExitCode.VERIFICATION_FAILED


def error_payload(exc, debug=False):
    """
    Standard error envelope.
    - Known errors keep their code, message and details
    - Unexpected errors are logged with traceback; details only in debug mode
    """
    if isinstance(exc, FallcatError):
        logger.warning(f"{exc.code}: {exc.message}")
        return {
            'success': False,
            'error': {
                'code': exc.code,
                'message': exc.message,
                'details': _jsonable(exc.details),
            }
        }

    logger.exception(f"Unhandled error: {type(exc).__name__}: {exc}")
    return {
        'success': False,
        'error': {
            'code': 'INTERNAL_ERROR',
            'message': str(exc) if debug else 'Unexpected internal error.',
            'details': {'exception_type': type(exc).__name__} if debug else None,
        }
    }


def get_exit_code(exc):
    """Process exit status for an exception."""
    if isinstance(exc, FallcatError):
        return int(exc.exit_code)
    return int(ExitCode.VERIFICATION_FAILED)


def _jsonable(value):
    """numpy arrays and scalars in details become plain lists/floats."""
    if hasattr(value, 'tolist'):
        return value.tolist()
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value

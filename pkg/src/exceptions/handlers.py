import json
import logging
from typing import Callable

from pydantic import ValidationError

from src import __version__
from src.exceptions import WorkbenchError

logger = logging.getLogger(__name__)


def translate_validation_error(error: dict) -> str:
    type_ = error.get("type", "")
    msg = error.get("msg", "")
    location = ".".join(str(part) for part in error.get("loc", ()))
    ctx = error.get("ctx", {})

    translations = {
        "missing": "required field is missing.",
        "int_parsing": "value is not a valid integer.",
        "int_from_float": "value must be an integer, not a fraction.",
        "float_parsing": "value is not a valid real number.",
        "bool_parsing": "value is not a valid boolean.",
        "greater_than": f"value must be greater than {ctx.get('gt', '')}.",
        "greater_than_equal": f"value must be at least {ctx.get('ge', '')}.",
        "less_than_equal": f"value must be at most {ctx.get('le', '')}.",
        "extra_forbidden": "unknown key.",
        "value_error": f"{msg.removeprefix('Value error, ')}",
    }

    if type_ in translations:
        text = translations[type_]
    elif type_ in ("enum", "literal_error"):
        text = f"value must be one of: {ctx.get('expected', '')}."
    else:
        text = msg

    return f"{location}: {text}" if location else text


def failure_record(exc: Exception) -> dict:
    if isinstance(exc, ValidationError):
        return {
            "status": "failed",
            "error": "ConfigError",
            "detail": "; ".join(translate_validation_error(e) for e in exc.errors()),
            "context": {},
            "version": __version__,
        }

    detail = exc.detail if isinstance(exc, WorkbenchError) else str(exc)
    context = exc.context if isinstance(exc, WorkbenchError) else {}
    return {
        "status": "failed",
        "error": type(exc).__name__,
        "detail": detail,
        "context": context,
        "version": __version__,
    }


def exit_code_for(exc: Exception) -> int:
    if isinstance(exc, ValidationError):
        return 2
    if isinstance(exc, WorkbenchError):
        return exc.exit_code
    return 1


def run_with_handlers(handler: Callable[[], int], emit: Callable[[str], None]) -> int:
    """
    Runs a command handler, turning workbench and validation errors into a
    machine-readable failure record passed to `emit` and a nonzero exit code.
    """
    try:
        return handler()
    except (WorkbenchError, ValidationError) as exc:
        record = failure_record(exc)
        logger.error(f"{record['error']}: {record['detail']}")
        emit(json.dumps(record, indent=2, sort_keys=True, default=str))
        return exit_code_for(exc)

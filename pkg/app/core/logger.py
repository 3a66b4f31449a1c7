import logging
import sys
from typing import Any

CONTEXT_ORDER = ("kind", "curve", "dimension", "twist", "degree", "weight", "grid", "target", "exit_code")


def setup_logging(
    level: str = "INFO",
) -> None:
    """
    Setup structured logging for the engine and the scenario runner.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
    """
    log_format = "%(asctime)s | %(levelname)-8s | %(name)s | %(message)s"
    date_format = "%Y-%m-%d %H:%M:%S"

    logging.basicConfig(
        level=getattr(logging, level.upper()),
        format=log_format,
        datefmt=date_format,
        handlers=[
            logging.StreamHandler(sys.stdout),
        ],
    )

    # sympy's polys layer and matplotlib backends (if a consumer plots) are chatty
    logging.getLogger("sympy").setLevel(logging.WARNING)
    logging.getLogger("matplotlib").setLevel(logging.WARNING)


def get_logger(
    name: str,
) -> logging.Logger:
    """
    Get logger instance for a module.

    Args:
        name: Logger name (usually __name__)

    Returns:
        Logger instance
    """
    return logging.getLogger(name)


def log_error(
    logger: logging.Logger,
    message: str,
    error: Exception,
    context: dict[str, Any] | None = None,
) -> None:
    """
    Log a failed computation with its scenario coordinates.

    Engine errors carry an ``exit_code`` and are expected outcomes of bad
    input or failed tolerances: they are logged without a traceback. Anything
    else is a defect and keeps its traceback.

    Args:
        logger: Logger instance
        message: Error message
        error: Exception object
        context: Scenario coordinates (kind, curve, dimension, twist, degree,
            weight, grid, target); None values are dropped
    """
    fields = dict(context or {})
    exit_code = getattr(error, "exit_code", None)
    if exit_code is not None:
        fields.setdefault("exit_code", exit_code)
    ordered = [key for key in CONTEXT_ORDER if key in fields]
    ordered += [key for key in fields if key not in CONTEXT_ORDER]
    context_str = "".join(f" | {key}={fields[key]}" for key in ordered if fields[key] is not None)

    logger.error(
        f"{message} | error={type(error).__name__}: {error}{context_str}",
        exc_info=exit_code is None,
    )

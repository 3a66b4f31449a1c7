"""
Calibrated global signs, persisted as JSON next to the other cached artifacts.
"""

import json
import threading
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, Field

from app.core.config import settings
from app.core.logger import get_logger

logger = get_logger(__name__)

LEDGER_FILE = "conventions.json"

_lock = threading.Lock()


class SignRecord(BaseModel):
    kernel_sign: Literal[-1, 1]
    projection_sign: Literal[-1, 1]
    residual: float
    losing_residual: Optional[float] = None
    grid: Optional[str] = None
    source: str = ""


class ConventionsLedger(BaseModel):
    signs: dict[str, SignRecord] = Field(default_factory=dict)


def ledger_path(
    path: Optional[Path] = None,
) -> Path:
    return Path(path) if path is not None else settings.CACHE_DIR / LEDGER_FILE


def load_ledger(
    path: Optional[Path] = None,
) -> ConventionsLedger:
    target = ledger_path(path)
    if not target.exists():
        return ConventionsLedger()
    return ConventionsLedger.model_validate(json.loads(target.read_text()))


def record_sign(
    name: str,
    record: SignRecord,
    path: Optional[Path] = None,
) -> ConventionsLedger:
    with _lock:
        ledger = load_ledger(path)
        ledger.signs[name] = record
        target = ledger_path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(json.dumps(ledger.model_dump(), indent=2, sort_keys=True))
    logger.info(
        f"Sign recorded | name={name} | kernel={record.kernel_sign} | projection={record.projection_sign} "
        f"| residual={record.residual:.3e}"
    )
    return ledger


def stored_signs(
    name: str,
    default: tuple[int, int],
    path: Optional[Path] = None,
) -> tuple[int, int]:
    """(kernel sign, projection sign) from the ledger, or ``default``."""
    record = load_ledger(path).signs.get(name)
    if record is None:
        return default
    return record.kernel_sign, record.projection_sign

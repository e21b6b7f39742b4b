"""
Report Writer - deterministic CSV / text artefacts

Every file starts with `# key = value` lines describing the resolved run
configuration and is written atomically (temp file + rename).
"""

import logging
import os
from pathlib import Path
import tempfile
from typing import Any, Dict, List, Optional

import pandas as pd

logger = logging.getLogger(__name__)


def format_value(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ",".join(format_value(v) for v in value)
    return str(value)


def header_lines(header: Dict[str, Any]) -> List[str]:
    return [f"# {key} = {format_value(value)}" for key, value in header.items()]


def write_text_atomic(path: Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: Path, frame: pd.DataFrame, header: Dict[str, Any],
              footer: Optional[List[str]] = None) -> Path:
    """
    CSV with commented config header; floats keep shortest round-trip form.

    footer lines (for example boundary warnings) are appended as comments.
    """
    body = frame.to_csv(index=False, lineterminator="\n")
    lines = header_lines(header)
    text = "\n".join(lines) + "\n" + body
    for note in footer or []:
        text += f"# {note}\n"
    write_text_atomic(path, text)
    logger.info(f"💾 wrote {path} ({len(frame)} rows)")
    return Path(path)


def write_text(path: Path, content: str, header: Dict[str, Any]) -> Path:
    text = "\n".join(header_lines(header)) + "\n" + content
    write_text_atomic(path, text)
    logger.info(f"💾 wrote {path}")
    return Path(path)


def write_series(path: Path, series, header: Dict[str, Any], truncate: bool = False,
                 threshold: float = 1e-6) -> Path:
    """
    Polarisation series as CSV. Boundary-contaminated points are flagged in
    a trailing comment, and dropped when `truncate` is set.
    """
    footer = []
    t_guard = series.t_guard(threshold)
    if t_guard is None or t_guard < series.times[-1]:
        footer.append(f"warning: boundary contamination after t = {format_value(t_guard)}")
        logger.warning(f"⚠️ {Path(path).name}: guard leakage above {threshold:g} after t = {t_guard}")
        if truncate:
            series = series.truncated(threshold)
            footer[-1] += ", series truncated"
    return write_csv(path, series.to_frame(), header, footer)

"""
Shared plumbing for the CLI commands
"""

from dataclasses import dataclass, field
import functools
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Type

import click
import numpy as np

from app.core.config import ConfigT, resolve_config
from app.core.errors import SpinAmpError

logger = logging.getLogger(__name__)


@dataclass
class RunContext:
    """Global options shared by every sub-command"""

    out: Path
    seed: Optional[int] = None
    file_values: Dict[str, Any] = field(default_factory=dict)

    def resolve(self, model: Type[ConfigT], **overrides) -> ConfigT:
        if self.seed is not None:
            overrides.setdefault("seed", self.seed)
        return resolve_config(model, self.file_values, overrides)

    def path(self, name: str) -> Path:
        return self.out / name


def guarded(func):
    """Map simulator errors onto the stable exit codes"""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except SpinAmpError as e:
            logger.debug("command failed", exc_info=True)
            click.echo(f"error: {e}", err=True)
            raise SystemExit(e.exit_code)

    return wrapper


def time_grid(t_max: float, points: int) -> np.ndarray:
    return np.linspace(0.0, t_max, points)

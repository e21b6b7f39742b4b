"""
Configuration - environment settings, key=value config files and the
validated per-command experiment configs
"""

import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Type, TypeVar

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from app import __version__
from app.core.errors import ConfigError

load_dotenv()

logger = logging.getLogger(__name__)


class Settings:
    """Optional environment knobs; nothing is required"""

    def __init__(self):
        self.log_level = os.getenv("SPINAMP_LOG_LEVEL", "INFO").upper()
        workers = os.getenv("SPINAMP_WORKERS", "")
        self.workers = int(workers) if workers.strip() else (os.cpu_count() or 1)


settings = Settings()


def parse_config_file(path) -> Dict[str, str]:
    """Flat `key = value` lines; '#' starts a comment"""
    values: Dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        values[key.replace("-", "_")] = value
    return values


class ExperimentConfig(BaseModel):
    """Base for every sub-command config: unknown keys are rejected"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    seed: int = Field(0, ge=0)

    def header(self, command: str) -> Dict[str, Any]:
        values = {"command": command, "version": __version__}
        values.update(self.model_dump())
        return values


class YoungConfig(ExperimentConfig):
    n_max: int = Field(6, ge=1)


class ChainConfig(ExperimentConfig):
    dim: int = Field(1, ge=1, le=3)
    length: Optional[int] = Field(None, ge=2)
    omega: float = Field(1.0, gt=0)
    t_max: Optional[float] = Field(None, gt=0)
    points: int = Field(201, ge=2)
    tol: float = Field(1e-9, ge=1e-12, le=1e-6)
    guard: int = Field(8, ge=1)
    fit: bool = False


class LindbladConfig(ExperimentConfig):
    dim: int = Field(1, ge=1, le=3)
    length: int = Field(64, ge=2, le=512)
    omega: float = Field(1.0, gt=0)
    gamma: float = Field(1.0, ge=0)
    t_max: float = Field(50.0, gt=0)
    points: int = Field(101, ge=2)
    tol: float = Field(1e-8, gt=0, le=1e-4)
    guard: int = Field(8, ge=1)
    fit: bool = False
    compare_markov: bool = False


class MarkovConfig(ExperimentConfig):
    dim: int = Field(1, ge=1, le=3)
    length: int = Field(1024, ge=2)
    omega: float = Field(1.0, gt=0)
    gamma: float = Field(1.0, gt=0)
    t_max: float = Field(2000.0, gt=0)
    points: int = Field(201, ge=2)
    guard: int = Field(8, ge=1)
    fit: bool = False


class OracleConfig(ExperimentConfig):
    grid: int = Field(12, ge=2)
    max_n: Optional[int] = Field(None, ge=1)
    omega: float = Field(1.0, gt=0)
    validate_couplings: bool = False
    validate_bijection: bool = False
    dump_basis: bool = False
    rwa: bool = False
    two_tone: bool = False
    spins: int = Field(8, ge=2, le=10)
    width: int = Field(3, ge=2)
    height: int = Field(3, ge=2)
    coupling: float = Field(1.0, gt=0)
    ratio: float = Field(0.02, ge=0)
    t_span: float = Field(20.0, gt=0)
    points: int = Field(201, ge=2)
    corner_up: bool = True


class ThermalConfig(ExperimentConfig):
    mode: str = "false-positive"
    sweep: Optional[str] = None
    p: float = Field(0.0, ge=0, lt=1)
    trials: int = Field(400, ge=1)
    width: int = Field(50, ge=8)
    height: int = Field(50, ge=8)
    t_max: float = Field(200.0, gt=0)
    theta: float = Field(0.25, gt=0, le=1)
    test_up: bool = False
    dump_trajectory: bool = False
    workers: Optional[int] = Field(None, ge=1)

    @field_validator("mode")
    @classmethod
    def _known_mode(cls, value: str) -> str:
        if value not in ("false-positive", "detection"):
            raise ValueError("mode must be 'false-positive' or 'detection'")
        return value

    @field_validator("sweep")
    @classmethod
    def _sweep_format(cls, value: Optional[str]) -> Optional[str]:
        if value is not None:
            parse_sweep(value)
        return value


class Figure2Config(ExperimentConfig):
    omega: float = Field(1.0, gt=0)
    gamma: float = Field(1.0, ge=0)
    points: int = Field(201, ge=16)
    tol: float = Field(1e-7, gt=0, le=1e-4)
    coherent_1d_length: int = Field(512, ge=16)
    coherent_1d_t_max: float = Field(200.0, gt=0)
    coherent_2d_length: int = Field(256, ge=16)
    coherent_2d_t_max: float = Field(16.0, gt=0)
    dephased_1d_length: int = Field(160, ge=16, le=512)
    dephased_1d_t_max: float = Field(200.0, gt=0)
    dephased_2d_length: int = Field(256, ge=16, le=512)
    dephased_2d_t_max: float = Field(8.0, gt=0)
    markov_1d_length: int = Field(1024, ge=16)
    markov_1d_t_max: float = Field(2000.0, gt=0)
    markov_2d_length: int = Field(2048, ge=16)
    markov_2d_t_max: float = Field(60.0, gt=0)


def parse_sweep(text: str):
    """'start:stop:step' (inclusive stop) -> list of floats"""
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise ValueError(f"sweep must look like start:stop:step, got {text!r}")
    if step <= 0 or stop < start:
        raise ValueError("sweep needs step > 0 and stop >= start")
    count = int(round((stop - start) / step)) + 1
    return [round(start + k * step, 12) for k in range(count)]


ConfigT = TypeVar("ConfigT", bound=ExperimentConfig)


def resolve_config(model: Type[ConfigT], file_values: Optional[Dict[str, Any]] = None,
                   overrides: Optional[Dict[str, Any]] = None) -> ConfigT:
    """File values first, then command-line overrides that were actually given"""
    merged: Dict[str, Any] = dict(file_values or {})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return model.model_validate(merged)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(f"invalid {model.__name__}: {problems}")

"""
Thermal Monte Carlo models
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
import pandas as pd

from app.core.errors import InvalidParameterError

MIN_GRID = 8
DEFAULT_THETA = 0.25


@dataclass(frozen=True)
class ThermalSpec:
    """One Gillespie experiment on a width x height grid"""

    width: int = 50
    height: int = 50
    p_up: float = 0.0
    test_up: bool = False
    t_max: float = 200.0
    rng_seed: int = 0
    theta: float = DEFAULT_THETA

    def __post_init__(self):
        if not 0.0 <= self.p_up < 1.0:
            raise InvalidParameterError(f"p_up must lie in [0, 1), got {self.p_up}")
        if self.width < MIN_GRID or self.height < MIN_GRID:
            raise InvalidParameterError(f"grid must be at least {MIN_GRID}x{MIN_GRID}")
        if not self.t_max > 0:
            raise InvalidParameterError("t_max must be positive")
        if not 0.0 < self.theta <= 1.0:
            raise InvalidParameterError("theta must lie in (0, 1]")

    @property
    def trigger_count(self) -> float:
        return self.theta * self.width * self.height

    def with_point(self, p_up: float, test_up: bool) -> "ThermalSpec":
        """Same grid, horizon, seed and threshold at another sweep point"""
        return replace(self, p_up=float(p_up), test_up=bool(test_up))


@dataclass(frozen=True)
class TrajectoryResult:
    """
    Event times and up-spin counts (test spin excluded).

    times[0] = 0 holds the initial count; every later entry is one flip.
    """

    times: np.ndarray
    up_counts: np.ndarray
    triggered: bool
    truncated: bool = False
    trigger_time: Optional[float] = None

    @property
    def events(self) -> int:
        return len(self.times) - 1

    def count_at(self, t: float) -> int:
        """Up count of the step function at time t"""
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        return int(self.up_counts[max(k, 0)])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.times, "up_count": self.up_counts})


@dataclass(frozen=True)
class SweepResult:
    """Trigger statistics per initial up-probability, Wilson 95% intervals"""

    p_values: np.ndarray
    trials: int
    triggered: np.ndarray
    truncated: np.ndarray
    trigger_rates: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "p": self.p_values,
            "trials": self.trials,
            "triggered": self.triggered,
            "rate": self.trigger_rates,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "truncated_count": self.truncated,
        })

"""
Thermal Monte Carlo Service
Gillespie simulation of the resonance flip rules from imperfectly polarised
initial states: false-positive and detection sweeps, Boltzmann initialisation.
"""

from concurrent.futures import ProcessPoolExecutor
import logging
import math
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import constants, ndimage, special, stats
from tqdm import tqdm

from app.core.config import settings
from app.core.errors import InvalidParameterError
from app.models.lattice import CORNER, LatticeConfig
from app.models.thermal import SweepResult, ThermalSpec, TrajectoryResult
from app.services.lattice_oracle import allowed_mask, site_allowed

logger = logging.getLogger(__name__)

MIN_SWEEP_TRIALS = 200
UNIFORM_CHUNK = 4096


def boltzmann_up_fraction(freq: float, temperature: float) -> float:
    """Excited-state population of a two-level spin split by h*freq"""
    if not freq > 0 or not temperature > 0:
        raise InvalidParameterError("frequency and temperature must be positive")
    x = constants.h * freq / (constants.k * temperature)
    return float(special.expit(-x))


def max_temperature_for_fraction(p_up: float, freq: float) -> float:
    """Highest temperature at which the up fraction stays at or below p_up"""
    if not 0.0 < p_up < 0.5:
        raise InvalidParameterError("p_up must lie in (0, 0.5)")
    if not freq > 0:
        raise InvalidParameterError("frequency must be positive")
    return constants.h * freq / (constants.k * math.log((1.0 - p_up) / p_up))


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for (seed, trial)"""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(trial,)))


def sample_initial(spec: ThermalSpec, rng: np.random.Generator) -> LatticeConfig:
    spins = rng.random((spec.height, spec.width)) < spec.p_up
    spins[CORNER] = spec.test_up
    return LatticeConfig(spins)


class FlipSimulator:
    """
    Continuous-time simulation with unit rate per allowed flip.

    Allowed sites live in an indexed set (list + position table) so events
    are drawn in O(1); a flip only changes the allowed status of its four
    neighbours, never its own.
    """

    def __init__(self, config: LatticeConfig, rng: np.random.Generator, check_rules: bool = False):
        self.height, self.width = config.height, config.width
        self.corner_up = config.corner_up
        self.spins = [bytearray(row.astype(np.uint8).tobytes()) for row in config.spins]
        self.rng = rng
        self.check_rules = check_rules
        self.members: List[int] = []
        self.position = [-1] * (self.height * self.width)
        for idx in np.flatnonzero(allowed_mask(config.spins)):
            self._add(int(idx))
        self._uniforms = np.empty(0)
        self._cursor = 0

    def _add(self, idx: int):
        self.position[idx] = len(self.members)
        self.members.append(idx)

    def _remove(self, idx: int):
        slot = self.position[idx]
        last = self.members.pop()
        if last != idx:
            self.members[slot] = last
            self.position[last] = slot
        self.position[idx] = -1

    def _refresh(self, row: int, col: int):
        idx = row * self.width + col
        allowed = site_allowed(self.spins, row, col)
        present = self.position[idx] >= 0
        if allowed and not present:
            self._add(idx)
        elif present and not allowed:
            self._remove(idx)

    def _uniform(self) -> float:
        if self._cursor >= len(self._uniforms):
            self._uniforms = self.rng.random(UNIFORM_CHUNK)
            self._cursor = 0
        u = self._uniforms[self._cursor]
        self._cursor += 1
        return float(u)

    @property
    def allowed_count(self) -> int:
        return len(self.members)

    def up_count(self) -> int:
        total = sum(sum(row) for row in self.spins)
        return total - (1 if self.corner_up else 0)

    def _on_corner_cluster(self, row: int, col: int) -> bool:
        """Is (row, col) on the up-cluster grown from an up test corner?"""
        if not self.corner_up:
            return False
        grid = np.array([list(r) for r in self.spins], dtype=bool)
        labels, _ = ndimage.label(grid)
        return bool(labels[row, col] == labels[CORNER])

    def run(self, t_max: float, trigger_count: float, stop_on_trigger: bool = True,
            max_events: Optional[int] = None, record: bool = True) -> TrajectoryResult:
        t = 0.0
        count = self.up_count()
        times, counts = [0.0], [count]
        triggered = count >= trigger_count
        trigger_time = 0.0 if triggered else None
        truncated = False
        events = 0

        while not (triggered and stop_on_trigger):
            k = len(self.members)
            if k == 0 or (max_events is not None and events >= max_events):
                break
            t += -math.log(1.0 - self._uniform()) / k
            if t > t_max:
                break
            idx = self.members[int(self._uniform() * k)]
            row, col = divmod(idx, self.width)
            if self.check_rules:
                assert site_allowed(self.spins, row, col), f"flip at {(row, col)} violates the rules"

            up = self.spins[row][col] == 0
            self.spins[row][col] = 1 if up else 0
            count += 1 if up else -1
            events += 1
            if row > 0:
                self._refresh(row - 1, col)
            if row + 1 < self.height:
                self._refresh(row + 1, col)
            if col > 0:
                self._refresh(row, col - 1)
            if col + 1 < self.width:
                self._refresh(row, col + 1)

            if record:
                times.append(t)
                counts.append(count)
            if not triggered and count >= trigger_count:
                triggered = True
                trigger_time = t
            if up and (row == self.height - 1 or col == self.width - 1) and self._on_corner_cluster(row, col):
                truncated = not triggered
                break

        if not record and events:
            times.append(t if t <= t_max else t_max)
            counts.append(count)
        return TrajectoryResult(
            times=np.array(times),
            up_counts=np.array(counts, dtype=int),
            triggered=triggered,
            truncated=truncated,
            trigger_time=trigger_time,
        )


def run_trajectory(spec: ThermalSpec, rng: np.random.Generator, stop_on_trigger: bool = True,
                   max_events: Optional[int] = None, check_rules: bool = False,
                   record: bool = True) -> TrajectoryResult:
    """Sample an initial grid from rng, then simulate until t_max / trigger / truncation"""
    config = sample_initial(spec, rng)
    simulator = FlipSimulator(config, rng, check_rules=check_rules)
    return simulator.run(spec.t_max, spec.trigger_count, stop_on_trigger, max_events, record)


def _run_trial(job: Tuple[ThermalSpec, int]) -> Tuple[bool, bool]:
    spec, trial = job
    result = run_trajectory(spec, trial_rng(spec.rng_seed, trial), record=False)
    return result.triggered, result.truncated


def _execute(jobs: List[Tuple[ThermalSpec, int]], workers: Optional[int], progress: bool) -> List[Tuple[bool, bool]]:
    workers = workers or settings.workers
    desc = "trajectories"
    if workers <= 1:
        iterator: Iterable = map(_run_trial, jobs)
        return list(tqdm(iterator, total=len(jobs), desc=desc, disable=not progress))
    chunk = max(1, len(jobs) // (workers * 16))
    with ProcessPoolExecutor(max_workers=workers) as executor:
        iterator = executor.map(_run_trial, jobs, chunksize=chunk)
        return list(tqdm(iterator, total=len(jobs), desc=desc, disable=not progress))


def wilson_interval(successes: int, n: int) -> Tuple[float, float]:
    if n == 0:
        return float("nan"), float("nan")
    ci = stats.binomtest(successes, n).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


def _sweep(p_values: Sequence[float], trials: int, template: ThermalSpec, test_up: bool,
           workers: Optional[int], progress: bool) -> SweepResult:
    if trials < MIN_SWEEP_TRIALS:
        raise InvalidParameterError(f"sweeps need at least {MIN_SWEEP_TRIALS} trials per point")
    p_values = np.asarray(p_values, dtype=float)
    specs = [template.with_point(p, test_up) for p in p_values]
    jobs = [(spec, trial) for spec in specs for trial in range(trials)]
    logger.info(f"🚀 {'detection' if test_up else 'false-positive'} sweep: "
                f"{len(p_values)} points x {trials} trials on {template.width}x{template.height}")
    outcomes = _execute(jobs, workers, progress)

    triggered = np.zeros(len(p_values), dtype=int)
    truncated = np.zeros(len(p_values), dtype=int)
    for k, (fired, cut) in enumerate(outcomes):
        point = k // trials
        if cut:
            truncated[point] += 1
        elif fired:
            triggered[point] += 1

    rates, lows, highs = [], [], []
    for fired, cut in zip(triggered, truncated):
        valid = trials - int(cut)
        rates.append(fired / valid if valid else float("nan"))
        low, high = wilson_interval(int(fired), valid)
        lows.append(low)
        highs.append(high)

    if truncated.any():
        logger.warning(f"⚠️ {int(truncated.sum())} trajectories reached the far boundary and were excluded")
    return SweepResult(
        p_values=p_values,
        trials=trials,
        triggered=triggered,
        truncated=truncated,
        trigger_rates=np.array(rates),
        ci_low=np.array(lows),
        ci_high=np.array(highs),
    )


def false_positive_sweep(p_values: Sequence[float], trials: int, template: ThermalSpec,
                         workers: Optional[int] = None, progress: bool = False) -> SweepResult:
    """Trigger rate with the test spin down"""
    return _sweep(p_values, trials, template, False, workers, progress)


def detection_sweep(p_values: Sequence[float], trials: int, template: ThermalSpec,
                    workers: Optional[int] = None, progress: bool = False) -> SweepResult:
    """Trigger rate with the test spin up"""
    return _sweep(p_values, trials, template, True, workers, progress)


def threshold_crossing(sweep: SweepResult, level: float = 0.5) -> Optional[float]:
    """Linearly interpolated p where the trigger rate first reaches `level`"""
    p, rates = sweep.p_values, sweep.trigger_rates
    for k in range(len(p)):
        if np.isnan(rates[k]) or rates[k] < level:
            continue
        if k == 0 or np.isnan(rates[k - 1]):
            return float(p[k])
        lo, hi = rates[k - 1], rates[k]
        return float(p[k - 1] + (level - lo) * (p[k] - p[k - 1]) / (hi - lo))
    return None


def growth_curve(results: Sequence[TrajectoryResult], t_grid: Sequence[float]) -> np.ndarray:
    """Trial-averaged up count at each grid time"""
    return np.array([np.mean([r.count_at(t) for r in results]) for t in t_grid])

"""
Scaling exponent extraction from polarisation series
"""

import logging
from typing import Optional, Tuple

import numpy as np
from scipy import optimize, stats

from app.core.errors import InsufficientDataError, NumericalBreakdownError
from app.models.chain import ExponentFit, PolarisationSeries

logger = logging.getLogger(__name__)

MIN_FIT_POINTS = 8
LEAKAGE_THRESHOLD = 1e-6
TRANSIENT_MEAN = 2.0
MAX_EXPONENT = 10.0


def default_window(series: PolarisationSeries, threshold: float = LEAKAGE_THRESHOLD) -> Tuple[float, float]:
    """[0.2 t_max, t_guard]"""
    t_max = float(series.times[-1])
    t_guard = series.t_guard(threshold)
    return 0.2 * t_max, (t_guard if t_guard is not None else 0.0)


def _log_shifted_power_law(t: np.ndarray, log_a: float, gamma: float, t0: float) -> np.ndarray:
    return log_a + gamma * np.log(t + t0)


def _fit_shifted(t: np.ndarray, n: np.ndarray, start):
    """log n = log A + gamma log(t + t0), seeded from the plain slope"""
    lower = (-np.inf, 0.0, -0.9 * float(t[0]))
    upper = (np.inf, MAX_EXPONENT, 10.0 * float(t[-1]))
    p0 = (float(start.intercept), float(np.clip(start.slope, 1e-3, MAX_EXPONENT - 1e-3)), 0.0)
    try:
        params, cov = optimize.curve_fit(
            _log_shifted_power_law, t, np.log(n), p0=p0, bounds=(lower, upper), maxfev=20000,
        )
    except (RuntimeError, ValueError) as e:
        raise NumericalBreakdownError(f"shifted power-law fit did not converge: {e}")
    stderr = float(np.sqrt(cov[1, 1])) if np.all(np.isfinite(cov)) else float("inf")
    return float(params[1]), stderr, float(params[0]), float(params[2])


def fit_exponent(series: PolarisationSeries, window: Optional[Tuple[float, float]] = None,
                 threshold: float = LEAKAGE_THRESHOLD, shifted: bool = False) -> ExponentFit:
    """
    Least-squares slope of log(mean_n) against log(t).

    Points before mean_n reaches 2, at t <= 0, outside the window or after the
    first boundary contamination are dropped. With shifted=True the model is
    mean_n = A (t + t0)^gamma with t0 free.
    """
    if window is None:
        window = default_window(series, threshold)
    t_lo, t_hi = window

    mask = series.certified_mask(threshold)
    mask &= series.times > 0
    mask &= series.mean_n >= TRANSIENT_MEAN
    mask &= (series.times >= t_lo) & (series.times <= t_hi)

    n_points = int(mask.sum())
    if n_points < MIN_FIT_POINTS:
        raise InsufficientDataError(
            f"only {n_points} certified points in window [{t_lo:.4g}, {t_hi:.4g}]; "
            f"need at least {MIN_FIT_POINTS}"
        )

    t = series.times[mask]
    n = series.mean_n[mask]
    result = stats.linregress(np.log(t), np.log(n))
    exponent, stderr, intercept, t0 = float(result.slope), float(result.stderr), float(result.intercept), 0.0
    if shifted:
        exponent, stderr, intercept, t0 = _fit_shifted(t, n, result)

    fit = ExponentFit(
        exponent=exponent,
        stderr=stderr,
        intercept=intercept,
        n_points=n_points,
        window=(float(t_lo), float(t_hi)),
        time_offset=t0,
    )
    logger.info(f"📈 exponent {fit.exponent:.4f} ± {fit.stderr:.2g} (t0 {t0:+.3f}) from {n_points} points")
    return fit

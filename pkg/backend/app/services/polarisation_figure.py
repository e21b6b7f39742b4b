"""
Polarisation Figure Service
Coherent and dephased polarisation curves for the 1D and 2D chains, plus
the fitted exponents (Markov reduction included for the asymptotic claims).
"""

import logging
from typing import Dict, List, Tuple

import numpy as np

from app.core.config import Figure2Config
from app.core.errors import NumericalError
from app.models.chain import Dimension, PolarisationSeries
from app.services.effective_chain import build_chain, evolve, polarisation_series, predicted_exponent
from app.services.open_dynamics import (
    dephasing_spec,
    lindblad_evolve,
    lindblad_series,
    markov_evolve,
    markov_rates,
    markov_series,
)
from app.services.scaling_fit import fit_exponent

logger = logging.getLogger(__name__)

COHERENT_TOL = 1e-9


def _grid(t_max: float, points: int) -> np.ndarray:
    return np.linspace(0.0, t_max, points)


def coherent_curve(dimension: Dimension, length: int, t_max: float, cfg: Figure2Config) -> PolarisationSeries:
    spec = build_chain(dimension, length, cfg.omega)
    return polarisation_series(evolve(spec, _grid(t_max, cfg.points), min(cfg.tol, COHERENT_TOL)))


def dephased_curve(dimension: Dimension, length: int, t_max: float, cfg: Figure2Config) -> PolarisationSeries:
    spec = dephasing_spec(build_chain(dimension, length, cfg.omega), cfg.gamma)
    return lindblad_series(lindblad_evolve(spec, _grid(t_max, cfg.points), cfg.tol))


def markov_curve(dimension: Dimension, length: int, t_max: float, cfg: Figure2Config) -> PolarisationSeries:
    spec = dephasing_spec(build_chain(dimension, length, cfg.omega), cfg.gamma)
    return markov_series(markov_evolve(markov_rates(spec), _grid(t_max, cfg.points)))


def figure_curves(cfg: Figure2Config) -> Dict[str, PolarisationSeries]:
    """The four plotted curves, keyed by file stem"""
    logger.info(f"🚀 polarisation curves at omega={cfg.omega}, gamma={cfg.gamma}")
    return {
        "1d_coherent": coherent_curve(Dimension.D1, cfg.coherent_1d_length, cfg.coherent_1d_t_max, cfg),
        "1d_dephased": dephased_curve(Dimension.D1, cfg.dephased_1d_length, cfg.dephased_1d_t_max, cfg),
        "2d_coherent": coherent_curve(Dimension.D2, cfg.coherent_2d_length, cfg.coherent_2d_t_max, cfg),
        "2d_dephased": dephased_curve(Dimension.D2, cfg.dephased_2d_length, cfg.dephased_2d_t_max, cfg),
    }


def _fit_row(curve: str, engine: str, series: PolarisationSeries, expected: float,
             coherent: bool = False) -> Dict:
    row = {"curve": curve, "engine": engine, "expected": expected}
    try:
        fit = fit_exponent(series, shifted=coherent)
        row.update({"exponent": fit.exponent, "stderr": fit.stderr, "points": fit.n_points,
                    "t0": fit.time_offset, "t_lo": fit.window[0], "t_hi": fit.window[1]})
    except NumericalError as e:
        logger.warning(f"⚠️ no exponent for {curve} ({engine}): {e}")
        row.update({"exponent": float("nan"), "stderr": float("nan"), "points": 0,
                    "t0": float("nan"), "t_lo": float("nan"), "t_hi": float("nan")})
    return row


def exponent_summary(curves: Dict[str, PolarisationSeries], cfg: Figure2Config) -> List[Dict]:
    dephased = cfg.gamma > 0
    plan: List[Tuple[str, str, Dimension, bool]] = [
        ("1d_coherent", "chain", Dimension.D1, False),
        ("1d_dephased", "lindblad", Dimension.D1, dephased),
        ("2d_coherent", "chain", Dimension.D2, False),
        ("2d_dephased", "lindblad", Dimension.D2, dephased),
    ]
    rows = [_fit_row(name, engine, curves[name], predicted_exponent(dim, flag), coherent=not flag)
            for name, engine, dim, flag in plan]
    if dephased:
        rows.append(_fit_row("1d_dephased", "markov",
                             markov_curve(Dimension.D1, cfg.markov_1d_length, cfg.markov_1d_t_max, cfg),
                             predicted_exponent(Dimension.D1, True)))
        rows.append(_fit_row("2d_dephased", "markov",
                             markov_curve(Dimension.D2, cfg.markov_2d_length, cfg.markov_2d_t_max, cfg),
                             predicted_exponent(Dimension.D2, True)))
    else:
        logger.info("gamma = 0: dephased curves are coherent, Markov rows skipped")
    return rows

"""
`lindblad` - collectively dephased chain evolution
"""

import logging

import click
import pandas as pd

from app.core.config import LindbladConfig
from app.models.chain import Dimension
from app.routers.common import guarded, time_grid
from app.services.effective_chain import build_chain
from app.services.open_dynamics import compare_lindblad_markov, dephasing_spec, lindblad_evolve, lindblad_series
from app.services.report_writer import write_csv, write_series
from app.services.scaling_fit import fit_exponent

logger = logging.getLogger(__name__)


@click.command("lindblad")
@click.option("--dim", type=click.IntRange(1, 3), default=None)
@click.option("--length", type=int, default=None)
@click.option("--omega", type=float, default=None)
@click.option("--gamma", type=float, default=None, help="Dephasing rate")
@click.option("--t-max", type=float, default=None)
@click.option("--points", type=int, default=None)
@click.option("--tol", type=float, default=None)
@click.option("--guard", type=int, default=None)
@click.option("--fit/--no-fit", default=None)
@click.option("--compare-markov/--no-compare-markov", default=None,
              help="Also report the max L1 distance to the Markov reduction")
@click.pass_obj
@guarded
def command(run, dim, length, omega, gamma, t_max, points, tol, guard, fit, compare_markov):
    """Density-matrix series t, mean_n, leakage, trace_err"""
    cfg = run.resolve(LindbladConfig, dim=dim, length=length, omega=omega, gamma=gamma,
                      t_max=t_max, points=points, tol=tol, guard=guard, fit=fit,
                      compare_markov=compare_markov)
    spec = dephasing_spec(build_chain(Dimension(cfg.dim), cfg.length, cfg.omega), cfg.gamma)
    grid = time_grid(cfg.t_max, cfg.points)
    header = cfg.header("lindblad")

    series = lindblad_series(lindblad_evolve(spec, grid, cfg.tol), cfg.guard)
    write_series(run.path(f"lindblad_d{cfg.dim}.csv"), series, header)

    if cfg.fit:
        result = fit_exponent(series)
        write_csv(run.path(f"lindblad_d{cfg.dim}_fit.csv"), pd.DataFrame([result.to_dict()]), header)
        click.echo(f"dephased D{cfg.dim} exponent {result.exponent:.4f} +/- {result.stderr:.2g}")
    if cfg.compare_markov:
        distance = compare_lindblad_markov(spec, grid, cfg.tol)
        click.echo(f"max L1(diag rho, p) = {distance:.6g}")

"""
`figure2` - polarisation curves (1D/2D, coherent/dephased) and exponent summary
"""

import logging

import click
import pandas as pd

from app.core.config import Figure2Config
from app.routers.common import guarded
from app.services.polarisation_figure import exponent_summary, figure_curves
from app.services.report_writer import write_csv, write_series

logger = logging.getLogger(__name__)


@click.command("figure2")
@click.option("--omega", type=float, default=None)
@click.option("--gamma", type=float, default=None, help="Dephasing rate for the dephased curves (0 = coherent)")
@click.option("--points", type=int, default=None)
@click.option("--tol", type=float, default=None)
@click.pass_obj
@guarded
def command(run, **options):
    """Four series figure2_{1d,2d}_{coherent,dephased}.csv plus figure2_exponents.csv"""
    cfg = run.resolve(Figure2Config, **options)
    header = cfg.header("figure2")

    curves = figure_curves(cfg)
    for name, series in curves.items():
        write_series(run.path(f"figure2_{name}.csv"), series, header, truncate=True)

    summary = pd.DataFrame(exponent_summary(curves, cfg))
    write_csv(run.path("figure2_exponents.csv"), summary, header)
    click.echo(summary[["curve", "engine", "exponent", "stderr", "expected"]].to_string(index=False))

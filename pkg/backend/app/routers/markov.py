"""
`markov` - heavy-dephasing classical hopping chain
"""

import click
import pandas as pd

from app.core.config import MarkovConfig
from app.models.chain import Dimension
from app.routers.common import guarded, time_grid
from app.services.effective_chain import build_chain
from app.services.open_dynamics import dephasing_spec, markov_evolve, markov_rates, markov_series
from app.services.report_writer import write_csv, write_series
from app.services.scaling_fit import fit_exponent


@click.command("markov")
@click.option("--dim", type=click.IntRange(1, 3), default=None)
@click.option("--length", type=int, default=None)
@click.option("--omega", type=float, default=None)
@click.option("--gamma", type=float, default=None, help="Dephasing rate")
@click.option("--t-max", type=float, default=None)
@click.option("--points", type=int, default=None)
@click.option("--guard", type=int, default=None)
@click.option("--fit/--no-fit", default=None)
@click.pass_obj
@guarded
def command(run, dim, length, omega, gamma, t_max, points, guard, fit):
    """Markov series t, mean_n, leakage with rates 2 g^2 / gamma"""
    cfg = run.resolve(MarkovConfig, dim=dim, length=length, omega=omega, gamma=gamma,
                      t_max=t_max, points=points, guard=guard, fit=fit)
    spec = dephasing_spec(build_chain(Dimension(cfg.dim), cfg.length, cfg.omega), cfg.gamma)
    header = cfg.header("markov")

    vectors = markov_evolve(markov_rates(spec), time_grid(cfg.t_max, cfg.points))
    series = markov_series(vectors, cfg.guard)
    write_series(run.path(f"markov_d{cfg.dim}.csv"), series, header)

    if cfg.fit:
        result = fit_exponent(series)
        write_csv(run.path(f"markov_d{cfg.dim}_fit.csv"), pd.DataFrame([result.to_dict()]), header)
        click.echo(f"Markov D{cfg.dim} exponent {result.exponent:.4f} +/- {result.stderr:.2g}")

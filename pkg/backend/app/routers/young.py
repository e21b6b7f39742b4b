"""
`young` - Young's lattice level dump with the sum-of-squares check
"""

import logging

import click
import pandas as pd

from app.core.config import YoungConfig
from app.routers.common import guarded
from app.services.report_writer import write_csv, write_text
from app.services.young_lattice import young_lattice

logger = logging.getLogger(__name__)


@click.command("young")
@click.option("--n-max", type=int, default=None, help="Highest level to emit")
@click.pass_obj
@guarded
def command(run, n_max):
    """Levels 1..n_max with path weights and the sum(w^2) = n! check"""
    cfg = run.resolve(YoungConfig, n_max=n_max)
    header = cfg.header("young")

    dump = young_lattice.dump_levels(cfg.n_max)
    checks = pd.DataFrame(young_lattice.level_check_table(cfg.n_max), dtype=object)

    write_text(run.path("young_levels.txt"), dump, header)
    write_csv(run.path("young_check.csv"), checks, header)
    click.echo(checks.to_string(index=False))

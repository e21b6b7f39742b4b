"""
`oracle` - brute-force lattice checks: couplings, partition bijection,
reachable-basis dump, RWA and two-tone leakage
"""

import logging
import math

import click
import pandas as pd

from app.core.config import OracleConfig
from app.routers.common import guarded, time_grid
from app.services.lattice_oracle import (
    reachable_states,
    rule_hamiltonian,
    tridiagonalize_from_seed,
    verify_partition_bijection,
)
from app.services.report_writer import write_csv, write_text
from app.services.spin_models import rule_subspace_size, rwa_validate_1d, two_tone_validate_2d

logger = logging.getLogger(__name__)

COUPLING_TOL = 1e-8


def _coupling_table(cfg: OracleConfig, max_n: int) -> pd.DataFrame:
    form = tridiagonalize_from_seed(rule_hamiltonian(cfg.grid, cfg.grid, max_n, cfg.omega))
    rows = []
    for k in range(1, len(form.betas) + 1):
        beta = form.coupling(k)
        expected = cfg.omega * math.sqrt(k + 1)
        rows.append({
            "k": k,
            "beta": beta,
            "omega_sqrt_k_plus_1": expected,
            "abs_err": abs(beta - expected),
            "check": "ok" if abs(beta - expected) <= COUPLING_TOL else "FAIL",
        })
    max_alpha = float(abs(form.alphas).max()) if len(form.alphas) else 0.0
    logger.info(f"max |alpha| = {max_alpha:.2e}")
    return pd.DataFrame(rows)


@click.command("oracle")
@click.option("--grid", type=int, default=None, help="Square grid side for the rule engine")
@click.option("--max-n", type=int, default=None, help="Highest excitation level (default grid-2)")
@click.option("--omega", type=float, default=None)
@click.option("--validate-couplings", is_flag=True, default=None)
@click.option("--validate-bijection", is_flag=True, default=None)
@click.option("--dump-basis", is_flag=True, default=None)
@click.option("--rwa", is_flag=True, default=None, help="1D full-spin RWA leakage")
@click.option("--two-tone", is_flag=True, default=None, help="2D full-spin two-tone leakage")
@click.option("--spins", type=int, default=None, help="Chain length for --rwa")
@click.option("--width", type=int, default=None, help="Grid width for --two-tone")
@click.option("--height", type=int, default=None, help="Grid height for --two-tone")
@click.option("--coupling", type=float, default=None, help="Ising J")
@click.option("--ratio", type=float, default=None, help="omega/J for the full-spin runs")
@click.option("--t-span", type=float, default=None, help="Duration in units of 1/omega")
@click.option("--points", type=int, default=None)
@click.option("--corner-up/--corner-down", default=None)
@click.pass_obj
@guarded
def command(run, **options):
    """Rule-engine and full-spin validations"""
    cfg = run.resolve(OracleConfig, **options)
    header = cfg.header("oracle")
    max_n = cfg.max_n if cfg.max_n is not None else max(cfg.grid - 2, 1)
    selected = any([cfg.validate_couplings, cfg.validate_bijection, cfg.dump_basis, cfg.rwa, cfg.two_tone])

    if cfg.validate_couplings or not selected:
        table = _coupling_table(cfg, max_n)
        write_csv(run.path("oracle_couplings.csv"), table, header)
        click.echo(table.to_string(index=False))

    if cfg.validate_bijection or not selected:
        table = pd.DataFrame(verify_partition_bijection(cfg.grid, cfg.grid, max_n))
        write_csv(run.path("oracle_bijection.csv"), table, header)
        click.echo(table.to_string(index=False))

    if cfg.dump_basis:
        basis = reachable_states(cfg.grid, cfg.grid, max_n, corner_up=cfg.corner_up)
        lines = [f"{c.bitstring()}\t{c.partition().label() if c.partition() else ''}" for c in basis]
        write_text(run.path("oracle_basis.txt"), "\n".join(lines) + "\n", header)

    omega = cfg.ratio * cfg.coupling
    t_end = cfg.t_span / (omega if omega > 0 else cfg.coupling)
    grid = time_grid(t_end, cfg.points)

    if cfg.rwa:
        series = rwa_validate_1d(cfg.spins, cfg.coupling, omega, grid)
        write_csv(run.path("oracle_rwa.csv"), series.to_frame(), header)
        click.echo(f"RWA n={cfg.spins} omega/J={cfg.ratio:g}: max leakage {series.leakage.max():.3e}, "
                   f"time-averaged {series.time_average():.3e}")

    if cfg.two_tone:
        resonant, full_dim = rule_subspace_size(cfg.width, cfg.height, cfg.corner_up)
        click.echo(f"two-tone resonant subspace: {resonant} of {full_dim} states")
        series = two_tone_validate_2d(cfg.width, cfg.height, cfg.coupling, omega, grid, cfg.corner_up)
        write_csv(run.path("oracle_two_tone.csv"), series.to_frame(), header)
        click.echo(f"two-tone {cfg.width}x{cfg.height} omega/J={cfg.ratio:g}: max leakage "
                   f"{series.leakage.max():.3e}, max subspace deviation {series.deviation.max():.3e}")

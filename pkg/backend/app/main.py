"""
Spin Amplification - Main CLI Application
Simulation harness for spin-state amplification on 1D/2D/3D lattices
"""

import logging
from pathlib import Path

import click

from app import __version__
from app.core.config import parse_config_file, settings
from app.core.errors import SpinAmpError
from app.routers import chain, figure2, lindblad, markov, oracle, thermal, young
from app.routers.common import RunContext

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: str):
    logging.basicConfig(level=level.upper(), format=LOG_FORMAT, force=True)


@click.group()
@click.version_option(__version__, prog_name="spinamp")
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Master RNG seed")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=Path("results"),
              show_default=True, help="Output directory")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Flat key = value config file")
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
              default=None, help="Overrides SPINAMP_LOG_LEVEL")
@click.pass_context
def cli(ctx, seed, out, config_path, log_level):
    """Spin-state amplification simulator"""
    configure_logging(log_level or settings.log_level)
    file_values = {}
    if config_path is not None:
        try:
            file_values = parse_config_file(config_path)
        except SpinAmpError as e:
            click.echo(f"error: {e}", err=True)
            raise SystemExit(e.exit_code)
    ctx.obj = RunContext(out=out, seed=seed, file_values=file_values)


# Register sub-commands
cli.add_command(young.command)
cli.add_command(chain.command)
cli.add_command(lindblad.command)
cli.add_command(markov.command)
cli.add_command(oracle.command)
cli.add_command(thermal.command)
cli.add_command(figure2.command)

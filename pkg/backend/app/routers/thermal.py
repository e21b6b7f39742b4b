"""
`thermal` - finite-temperature Monte Carlo sweeps and trajectories
"""

import logging

import click

from app.core.config import ThermalConfig, parse_sweep
from app.models.thermal import ThermalSpec
from app.routers.common import guarded
from app.services.report_writer import write_csv
from app.services.thermal_mc import (
    boltzmann_up_fraction,
    detection_sweep,
    false_positive_sweep,
    max_temperature_for_fraction,
    run_trajectory,
    threshold_crossing,
    trial_rng,
)

logger = logging.getLogger(__name__)


@click.command("thermal")
@click.option("--mode", type=click.Choice(["false-positive", "detection"]), default=None)
@click.option("--sweep", type=str, default=None, help="p range start:stop:step")
@click.option("--p", type=float, default=None, help="Initial up probability for a single trajectory")
@click.option("--trials", type=int, default=None)
@click.option("--width", type=int, default=None)
@click.option("--height", type=int, default=None)
@click.option("--t-max", type=float, default=None)
@click.option("--theta", type=float, default=None, help="Up fraction that counts as amplification")
@click.option("--test-up/--test-down", default=None)
@click.option("--dump-trajectory", is_flag=True, default=None)
@click.option("--workers", type=int, default=None)
@click.option("--boltzmann", type=(float, float), default=None, metavar="FREQ_HZ TEMP_K",
              help="Print the Boltzmann up fraction and exit")
@click.pass_obj
@guarded
def command(run, boltzmann, **options):
    """Trigger-rate sweeps (CSV p,trials,triggered,rate,ci_low,ci_high,truncated_count)"""
    if boltzmann is not None:
        freq, temperature = boltzmann
        fraction = boltzmann_up_fraction(freq, temperature)
        click.echo(f"up fraction at {freq:g} Hz, {temperature:g} K: {fraction:.6g}")
        if 0 < fraction < 0.5:
            click.echo(f"stays below that fraction up to {max_temperature_for_fraction(fraction, freq):.6g} K")
        return

    cfg = run.resolve(ThermalConfig, **options)
    header = cfg.header("thermal")
    template = ThermalSpec(width=cfg.width, height=cfg.height, p_up=cfg.p, test_up=cfg.test_up,
                           t_max=cfg.t_max, rng_seed=cfg.seed, theta=cfg.theta)

    if cfg.sweep is not None:
        p_values = parse_sweep(cfg.sweep)
        runner = detection_sweep if cfg.mode == "detection" else false_positive_sweep
        result = runner(p_values, cfg.trials, template, workers=cfg.workers, progress=True)
        frame = result.to_frame()
        write_csv(run.path(f"thermal_sweep_{cfg.mode}.csv"), frame, header)
        click.echo(frame.to_string(index=False))
        crossing = threshold_crossing(result)
        click.echo(f"50% trigger crossing: {'none in range' if crossing is None else f'p = {crossing:.4g}'} "
                   f"(theta={cfg.theta:g}, {cfg.width}x{cfg.height}, t_max={cfg.t_max:g})")
        return

    trajectory = run_trajectory(template, trial_rng(cfg.seed, 0))
    click.echo(f"events={trajectory.events} final_up={int(trajectory.up_counts[-1])} "
               f"triggered={trajectory.triggered} truncated={trajectory.truncated}")
    if cfg.dump_trajectory:
        write_csv(run.path("thermal_trajectory.csv"), trajectory.to_frame(), header)

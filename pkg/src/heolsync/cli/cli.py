import click
import logging
from pathlib import Path

from .. import __version__
from .. import Log, ApplicationConfig, PlanValidationError, PRESETS, preset
from ..resources.scenario import scenario_text, write_scenario
from ..commands import run, validate, compare, sweep
from .common import SeedsParamType, load_config, apply_overrides
from .common import handle_errors, dask_handle, close_dask

preset_option = click.option("--preset", "-p", "preset_name", default=None,
        type=click.Choice(sorted(PRESETS)), help="Built-in scenario")
scenario_option = click.option("--scenario", "-s", "scenario_path",
        default=None, type=click.Path(dir_okay=False),
        help="Scenario file (TOML)")
horizon_option = click.option("--horizon", type=float, default=None,
        help="Override the simulated time in seconds")
force_option = click.option("--force", is_flag=True, default=False,
        help="Run even if the reference plan fails validation")
noise_option = click.option("--no-noise", is_flag=True, default=False,
        help="Turn measurement noise off")
seed_option = click.option("--seed", type=click.IntRange(0, 2**64 - 1),
        default=None, help="Override the noise seed")


@click.group()
@click.option("--debug", is_flag=True, default=False, help="Changes logging level from INFO to DEBUG.")
@click.option("--log-dir", default=None, help="Directory for log output", type=str)
@click.option("--log-type", default='stream', type=click.Choice(['stream', 'json']),
        help="Format of log records written to stdout")
@click.option("--progress", is_flag=True, default=False, type=bool, help="Report progress")
@click.option("--workers", type=int, default=4, help="Number of workers for Dask")
@click.option("--threads", type=int, default=1, help="Number of threads per worker for Dask")
@click.option("--dasktype", default='threads', type=click.Choice(['threads',
        'processes']), help="What Dask uses for parallelization. For more"
        "information see here https://docs.dask.org/en/stable/scheduling.html#local-threads")
@click.option("--scheduler", default='local', type=click.Choice(['distributed',
        'local', 'single-threaded']), help="Type of dask scheduler. Both are "
        "local, but are run with different dask libraries. See more here "
        "https://docs.dask.org/en/stable/scheduling.html.")
@click.version_option(__version__)
@click.pass_context
def cli(ctx, debug, log_dir, log_type, progress, workers, threads, dasktype,
        scheduler):

    # Set up logging
    if debug:
        log_level = 'DEBUG'
    else:
        log_level = 'INFO'

    numeric_level = getattr(logging, log_level.upper(), None)
    if not isinstance(numeric_level, int):
        raise ValueError(f"Invalid log level: {log_level}")

    log = Log(log_level, log_dir, log_type)
    app = ApplicationConfig(log=log,
            debug=debug,
            progress=progress,
            scheduler=scheduler,
            dasktype=dasktype,
            workers=workers,
            threads=threads)
    ctx.obj = app
    ctx.call_on_close(close_dask)


@cli.command("run")
@preset_option
@scenario_option
@click.option("--out", "-o", "out_dir", type=click.Path(file_okay=False),
        default=None, help="Output directory, defaults to the scenario's"
        " [output] dir or ./results")
@seed_option
@noise_option
@click.option("--open-loop", is_flag=True, default=False,
        help="Apply the flat feed-forward only, no closed-loop correction")
@click.option("--hold-feedforward", is_flag=True, default=False,
        help="Zero-order hold the feed-forward over each sampling period")
@click.option("--quadrature", type=click.Choice(['trapezoid', 'simpson']),
        default=None, help="Estimator quadrature rule")
@force_option
@horizon_option
@click.option("--no-plots", is_flag=True, default=False, help="Skip the SVG figures")
@click.pass_obj
@handle_errors
def run_cmd(app: ApplicationConfig, preset_name, scenario_path, out_dir, seed,
        no_noise, open_loop, hold_feedforward, quadrature, force, horizon,
        no_plots):
    """Simulate a scenario and write trace.csv, metrics.txt and figures."""
    config, scenario = load_config(preset_name, scenario_path, app.log)
    config = apply_overrides(config, seed, no_noise, open_loop, horizon,
            hold_feedforward=True if hold_feedforward else None,
            quadrature=quadrature)
    plots = not no_plots and (scenario is None or scenario.plots)
    if out_dir is None:
        out_dir = scenario.out_dir if scenario and scenario.out_dir else 'results'
    run.run(config, out_dir=out_dir, force=force, plots=plots, log=app.log)


@cli.command("validate")
@preset_option
@scenario_option
@horizon_option
@click.pass_obj
@handle_errors
def validate_cmd(app: ApplicationConfig, preset_name, scenario_path, horizon):
    """Check the reference plan for singular or invalid stretches."""
    config, _ = load_config(preset_name, scenario_path, app.log)
    config = apply_overrides(config, horizon=horizon)
    report = validate.validate(config, log=app.log)
    click.echo(report.summary())
    if not report.ok:
        click.get_current_context().exit(PlanValidationError.exit_code)


@cli.command("compare")
@preset_option
@scenario_option
@click.option("--out", "-o", "out_dir", type=click.Path(file_okay=False),
        default=None, help="Directory for compare.json")
@seed_option
@noise_option
@force_option
@horizon_option
@click.pass_obj
@handle_errors
def compare_cmd(app: ApplicationConfig, preset_name, scenario_path, out_dir,
        seed, no_noise, force, horizon):
    """Run closed-loop and open-loop and compare their tracking errors."""
    config, _ = load_config(preset_name, scenario_path, app.log)
    config = apply_overrides(config, seed, no_noise, horizon=horizon)
    dask_handle(app.dasktype, app.scheduler, app.workers, app.threads,
            app.progress, app.log)
    doc = compare.compare(config, out_dir=out_dir, force=force, log=app.log)
    click.echo(f"rms_ratio_overall={doc['rms_ratio_overall']:.6g}")


@cli.command("sweep")
@preset_option
@scenario_option
@click.option("--seeds", type=SeedsParamType(), required=True,
        help="Seeds to run, eg. '1,2,10-20'")
@click.option("--out", "-o", "out_dir", type=click.Path(file_okay=False),
        default=None, help="Directory for sweep.csv")
@noise_option
@click.option("--open-loop", is_flag=True, default=False,
        help="Apply the flat feed-forward only, no closed-loop correction")
@force_option
@horizon_option
@click.pass_obj
@handle_errors
def sweep_cmd(app: ApplicationConfig, preset_name, scenario_path, seeds,
        out_dir, no_noise, open_loop, force, horizon):
    """Run a scenario over many noise seeds."""
    config, _ = load_config(preset_name, scenario_path, app.log)
    config = apply_overrides(config, no_noise=no_noise, open_loop=open_loop,
            horizon=horizon)
    dask_handle(app.dasktype, app.scheduler, app.workers, app.threads,
            app.progress, app.log)
    sweep.sweep(config, seeds, out_dir=out_dir, force=force,
            progress=app.progress and app.scheduler != 'local', log=app.log)


@cli.command("presets")
@click.argument("name", required=False, type=click.Choice(sorted(PRESETS)))
@click.option("--write", "write_path", type=click.Path(dir_okay=False),
        default=None, help="Write the preset as a scenario file")
@click.pass_obj
@handle_errors
def presets_cmd(app: ApplicationConfig, name, write_path):
    """List presets, show one as a scenario or write it to a file."""
    if name is None:
        if write_path is not None:
            raise click.UsageError("--write needs a preset NAME")
        for n in sorted(PRESETS):
            click.echo(n)
        return
    config = preset(name)
    if write_path is None:
        click.echo(scenario_text(config), nl=False)
        return
    path = write_scenario(config, Path(write_path))
    app.log.info(f"Wrote {path}")


if __name__ == '__main__':
    cli()

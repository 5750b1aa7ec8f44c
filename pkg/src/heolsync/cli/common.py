import click
import functools

import dask
from dask.diagnostics import ProgressBar
from dask.distributed import Client, LocalCluster
from typing_extensions import Optional, Tuple

from .. import Log, HeolSyncError, SimulationConfig, Scenario
from .. import load_scenario, preset


class SeedsParamType(click.ParamType):
    """Comma separated seeds and inclusive ranges, eg. '1,2,10-20'."""
    name = "seeds"

    def convert(self, value, param, ctx) -> list[int]:
        if isinstance(value, list):
            return value
        seeds = []
        try:
            for part in str(value).split(','):
                part = part.strip()
                if not part:
                    continue
                if '-' in part:
                    lo, hi = (int(p) for p in part.split('-', 1))
                    if hi < lo:
                        raise ValueError
                    seeds.extend(range(lo, hi + 1))
                else:
                    seeds.append(int(part))
        except ValueError:
            self.fail(f"{value!r} is not a list of seeds, eg. '1,2,10-20'",
                    param, ctx)
        if not seeds or any(s < 0 for s in seeds):
            self.fail(f"{value!r} must name at least one non-negative seed",
                    param, ctx)
        return seeds


def load_config(preset_name: Optional[str], scenario_path: Optional[str],
        log: Log) -> Tuple[SimulationConfig, Optional[Scenario]]:
    """
    Config from either a preset or a scenario file, logging to log.

    :raises click.UsageError: neither or both given.
    :raises ScenarioParseError: the scenario file is invalid.
    """
    if (preset_name is None) == (scenario_path is None):
        raise click.UsageError("Give exactly one of --preset or --scenario")
    if preset_name is not None:
        return preset(preset_name).with_overrides(log=log), None
    scenario = load_scenario(scenario_path)
    return scenario.config.with_overrides(log=log), scenario


def apply_overrides(config: SimulationConfig, seed: Optional[int] = None,
        no_noise: bool = False, open_loop: bool = False,
        horizon: Optional[float] = None, **kwargs) -> SimulationConfig:
    return config.with_overrides(rng_seed=seed,
            noise_std=0.0 if no_noise else None,
            open_loop=True if open_loop else None,
            horizon=horizon, **kwargs)


def handle_errors(f):
    """Log heolsync errors and exit with their exit code."""
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return f(*args, **kwargs)
        except HeolSyncError as e:
            app = ctx.find_root().obj
            if app is not None:
                app.log.error(str(e))
            else:
                click.echo(str(e), err=True)
            ctx.exit(e.exit_code)
    return wrapper


def dask_handle(dasktype: str, scheduler: str, workers: int, threads: int,
        progress: bool, log: Log) -> None:
    dask_config = { }

    if scheduler == 'local':
        # fall back to dask type to determine the scheduler type
        dask_config['scheduler'] = dasktype
        dask_config['num_workers'] = workers
        if progress:
            p = ProgressBar()
            p.register()

    elif scheduler == 'distributed':
        dask_config['scheduler'] = scheduler
        if dasktype == 'processes':
            cluster = LocalCluster(processes=True, n_workers=workers,
                    threads_per_worker=threads)
        elif dasktype == 'threads':
            cluster = LocalCluster(processes=False, n_workers=workers,
                    threads_per_worker=threads)
        else:
            raise ValueError(f"Invalid value for 'dasktype', {dasktype}")

        client = Client(cluster)
        dask_config['distributed.client'] = client
        log.debug(f"Dask dashboard at {client.dashboard_link}")

    elif scheduler == 'single-threaded':
        dask_config['scheduler'] = scheduler

    dask.config.set(dask_config)


def close_dask() -> None:
    client = dask.config.get('distributed.client', None)
    if isinstance(client, Client):
        client.close()

from pathlib import Path

import dask
import pandas as pd
from dask.diagnostics import ProgressBar
from contextlib import nullcontext
from typing_extensions import Iterable, Optional, Union

from ..resources.config import SimulationConfig
from ..resources.errors import ConfigurationError
from ..resources.log import Log
from ..resources.simulation import run as simulate
from ..resources.trace import SimulationTrace, metrics
from .run import evaluation_start


def _row(seed: int, trace: SimulationTrace, t_f: float) -> dict:
    m = metrics(trace, t_f)
    row = {'seed': seed, 'sync_error': m.sync_error,
            'max_abs_delta_theta': m.max_abs_delta_theta}
    for i, v in enumerate(m.rms_delta_theta, start=1):
        row[f'rms_delta_theta_{i}'] = float(v)
    for kind, count in m.events.items():
        row[f'{kind}_events'] = count
    return row


def sweep(config: SimulationConfig, seeds: Iterable[int],
        out_dir: Optional[Union[str, Path]] = None, force: bool = False,
        progress: bool = False, log: Optional[Log] = None) -> pd.DataFrame:
    """
    Run config once per noise seed. Runs are independent and computed
    concurrently by dask.

    :param config: SimulationConfig, its rng_seed is replaced.
    :param seeds: Seeds to run.
    :param out_dir: Directory for sweep.csv, nothing is written if None.
    :param force: Run even if the reference plan has blocking violations.
    :param progress: Show a dask progress bar.
    :param log: Log, defaults to config.log.
    :return: One row per seed, in the order given.
    """
    log = log or config.log
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ConfigurationError("A sweep needs at least one seed")
    t_f = evaluation_start(config)

    runs = [dask.delayed(_row)(s,
            dask.delayed(simulate)(config.with_overrides(rng_seed=s), force),
            t_f) for s in seeds]
    with ProgressBar() if progress else nullcontext():
        rows = dask.compute(*runs)

    df = pd.DataFrame(list(rows))
    log.info(f"{config.name}: swept {len(seeds)} seeds, worst sync_error"
            f" {df['sync_error'].max():.6g} rad/s")

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / 'sweep.csv'
        df.to_csv(path, index=False, float_format='%.17g')
        log.info(f"Wrote {path}")
    return df

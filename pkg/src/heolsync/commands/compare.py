import json
from pathlib import Path

import dask
import numpy as np
from typing_extensions import Optional, Union

from ..resources.config import SimulationConfig
from ..resources.log import Log
from ..resources.simulation import run as simulate
from ..resources.trace import metrics
from .run import evaluation_start, metrics_document


def compare(config: SimulationConfig, out_dir: Optional[Union[str, Path]] = None,
        force: bool = False, log: Optional[Log] = None) -> dict:
    """
    Run config closed-loop and open-loop side by side and compare their
    tracking errors after the settling time.

    :param config: SimulationConfig, its open_loop flag is ignored.
    :param out_dir: Directory for compare.json, nothing is written if None.
    :param force: Run even if the reference plan has blocking violations.
    :param log: Log, defaults to config.log.
    :return: Both metrics documents and the RMS improvement ratios.
    """
    log = log or config.log
    t_f = evaluation_start(config)
    closed_cfg = config.with_overrides(open_loop=False)
    open_cfg = config.with_overrides(open_loop=True)

    closed, opened = dask.compute(dask.delayed(simulate)(closed_cfg, force),
            dask.delayed(simulate)(open_cfg, force))
    closed_m = metrics(closed, t_f)
    open_m = metrics(opened, t_f)

    with np.errstate(divide='ignore', invalid='ignore'):
        ratios = open_m.rms_delta_theta / closed_m.rms_delta_theta
        overall = float(np.sqrt(np.mean(open_m.rms_delta_theta ** 2))
                / np.sqrt(np.mean(closed_m.rms_delta_theta ** 2)))
    doc = {
        'closed_loop': metrics_document(closed_cfg, closed_m),
        'open_loop': metrics_document(open_cfg, open_m),
        'rms_ratio': [float(r) for r in ratios],
        'rms_ratio_overall': overall
    }
    log.info(f"{config.name}: open/closed loop RMS tracking error ratio"
            f" {overall:.4g}")

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / 'compare.json'
        path.write_text(json.dumps(doc, indent=2) + '\n')
        log.info(f"Wrote {path}")
    return doc

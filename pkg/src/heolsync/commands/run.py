import json
from dataclasses import dataclass, field
from pathlib import Path

from typing_extensions import Optional, Union

from ..resources.config import SimulationConfig
from ..resources.errors import ConfigurationError
from ..resources.flatness import settle_time
from ..resources.log import Log
from ..resources.plots import write_figures
from ..resources.simulation import run as simulate
from ..resources.trace import SimulationTrace, SyncMetrics, metrics


@dataclass
class RunResult:
    trace: SimulationTrace
    metrics: SyncMetrics
    paths: list[Path] = field(default_factory=list)
    """Artifacts written, empty when no output directory was given."""


def evaluation_start(config: SimulationConfig) -> float:
    """
    Settling time of the reference plan, the start of the metric window.

    :raises InfeasiblePlanError: the plan never settles.
    :raises ConfigurationError: the plan settles after the horizon.
    """
    t_f = settle_time(config.plan)
    if not t_f < config.horizon:
        raise ConfigurationError(f"Reference settles at {t_f:g}s, after the"
                f" {config.horizon:g}s horizon")
    return t_f


def metrics_document(config: SimulationConfig, m: SyncMetrics) -> dict:
    return {
        'name': config.name,
        'mode': config.model.mode.value,
        'rng_seed': config.rng_seed,
        'noise_std': config.noise_std,
        'open_loop': config.open_loop,
        **m.to_json()
    }


def write_run(config: SimulationConfig, result: RunResult,
        out_dir: Union[str, Path], plots: bool = True) -> list[Path]:
    """Write trace.csv, metrics.txt and the SVG figures into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    trace_path = out / 'trace.csv'
    result.trace.to_csv(trace_path)
    metrics_path = out / 'metrics.txt'
    metrics_path.write_text(json.dumps(metrics_document(config, result.metrics),
            indent=2) + '\n')

    paths = [trace_path, metrics_path]
    if plots:
        paths.extend(write_figures(result.trace, out))
    return paths


def run(config: SimulationConfig, out_dir: Optional[Union[str, Path]] = None,
        force: bool = False, plots: bool = True,
        log: Optional[Log] = None) -> RunResult:
    """
    Simulate a configuration, compute its metrics and write its artifacts.

    :param config: SimulationConfig.
    :param out_dir: Output directory, nothing is written if None.
    :param force: Run even if the reference plan has blocking violations.
    :param plots: Write the SVG figures.
    :param log: Log, defaults to config.log.
    :raises PlanValidationError: blocking violations without force.
    :raises SimulationDivergedError: the plant state blew up.
    :return: RunResult.
    """
    log = log or config.log
    t_f = evaluation_start(config)
    trace = simulate(config, force=force)
    m = metrics(trace, t_f)
    log.info(f"{config.name}: sync_error={m.sync_error:.6g} rad/s,"
            f" max |delta_theta|={m.max_abs_delta_theta:.6g} rad after"
            f" t_f={t_f:g}s")

    result = RunResult(trace=trace, metrics=m)
    if out_dir is not None:
        result.paths = write_run(config, result, out_dir, plots)
        for p in result.paths:
            log.info(f"Wrote {p}")
    return result

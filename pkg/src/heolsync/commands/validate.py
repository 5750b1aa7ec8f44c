from typing_extensions import Optional

from ..resources.config import SimulationConfig
from ..resources.flatness import ValidationReport, validate_plan
from ..resources.log import Log


def validate(config: SimulationConfig,
        log: Optional[Log] = None) -> ValidationReport:
    """
    Check the reference plan of config over its horizon at the sampling
    period and report the result.

    :param config: SimulationConfig.
    :param log: Log, defaults to config.log.
    :return: ValidationReport. Only conditions 1 and 2 make it fail.
    """
    log = log or config.log
    report = validate_plan(config.plan, config.model, config.horizon,
            config.sampling_period, config.denom_epsilon)
    if report.ok:
        log.info(f"{config.name}: reference plan is valid"
                f" ({len(report.warnings)} warnings)")
    else:
        log.error(f"{config.name}: reference plan has"
                f" {len(report.errors)} blocking violations")
    if len(report):
        log.debug(report.summary())
    return report

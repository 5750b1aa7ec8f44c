"""
Static SVG figures of a run, one file per signal group with one panel per
oscillator. Measured or applied signals are drawn solid blue, references
dashed red.
"""
from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.figure import Figure
from typing_extensions import Union

from .trace import SimulationTrace

FIGURE_GROUPS = {
    'controls': ('u', 'u_star', r'$u_{}$', 'Control inputs'),
    'outputs': ('theta', 'theta_star', r'$\theta_{}$ [rad]', 'Outputs'),
    'output-derivatives': ('thetadot', 'thetadot_star',
            r'$\dot\theta_{}$ [rad/s]', 'Time derivative outputs'),
    'tracking-errors': ('delta_theta', None, r'$\delta\theta_{}$ [rad]',
            'Tracking errors'),
}
"""file stem: (signal, reference, y label, title)"""


def figure(trace: SimulationTrace, group: str) -> Figure:
    signal, reference, ylabel, title = FIGURE_GROUPS[group]
    n = trace.n
    fig = Figure(figsize=(8, 2.2 * n + 0.6))
    axes = fig.subplots(n, 1, sharex=True, squeeze=False)[:, 0]
    actual = getattr(trace, signal)
    ref = np.zeros_like(actual) if reference is None else getattr(trace, reference)
    for i, ax in enumerate(axes):
        ax.plot(trace.times, actual[:, i], color='tab:blue', linestyle='-',
                linewidth=1.0)
        ax.plot(trace.times, ref[:, i], color='tab:red', linestyle='--',
                linewidth=1.0)
        ax.set_ylabel(ylabel.format(i + 1))
        ax.grid(True, linewidth=0.3)
    axes[-1].set_xlabel('t [s]')
    fig.suptitle(title)
    fig.tight_layout()
    return fig


def write_figures(trace: SimulationTrace, out_dir: Union[str, Path]) -> list[Path]:
    """
    Write every figure group as <group>.svg into out_dir. The SVG carries no
    date and fixed element ids, so identical traces give identical files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    with matplotlib.rc_context({'svg.hashsalt': 'heolsync',
            'svg.fonttype': 'path'}):
        for group in FIGURE_GROUPS:
            path = out / f'{group}.svg'
            fig = figure(trace, group)
            fig.savefig(path, format='svg', metadata={'Date': None})
            paths.append(path)
    return paths

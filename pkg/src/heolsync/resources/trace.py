"""
Recorded runs and the metrics computed from them.
"""
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from typing_extensions import Self, Union

from .errors import ConfigurationError

SERIES = ('theta', 'theta_star', 'thetadot', 'thetadot_star', 'u', 'u_star',
        'delta_theta', 'f_est')
"""Per-oscillator series in trace order."""

EVENT_KINDS = ('alpha_guard', 'estimator_warmup')


@dataclass(frozen=True)
class Event:
    time: float
    oscillator: int
    """0-based index."""
    kind: str

    def to_json(self) -> dict:
        return {'time': self.time, 'oscillator': self.oscillator + 1,
                'kind': self.kind}


@dataclass
class TraceRow:
    """Signals of every oscillator at one sampling instant."""
    t: float
    theta: np.ndarray
    theta_star: np.ndarray
    thetadot: np.ndarray
    thetadot_star: np.ndarray
    u: np.ndarray
    u_star: np.ndarray
    delta_theta: np.ndarray
    f_est: np.ndarray


def columns(n: int) -> list[str]:
    """CSV header for a network of n oscillators."""
    cols = ['t']
    for s in SERIES:
        cols.extend(f'{s}_{i}' for i in range(1, n + 1))
    return cols


@dataclass(eq=False)
class SimulationTrace:
    """
    Time series of a run. Every series is an array of shape (len(times), n).
    """
    times: np.ndarray
    theta: np.ndarray
    theta_star: np.ndarray
    thetadot: np.ndarray
    thetadot_star: np.ndarray
    u: np.ndarray
    u_star: np.ndarray
    delta_theta: np.ndarray
    f_est: np.ndarray
    events: list[Event] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=np.float64)
        length = self.times.size
        for s in SERIES:
            a = np.asarray(getattr(self, s), dtype=np.float64)
            if a.ndim != 2 or a.shape[0] != length:
                raise ValueError(f"Series '{s}' has shape {a.shape}, expected"
                        f" ({length}, n)")
            setattr(self, s, a)
        widths = {getattr(self, s).shape[1] for s in SERIES}
        if len(widths) != 1:
            raise ValueError(f"Series disagree on the oscillator count: {widths}")

    @classmethod
    def from_rows(cls, rows: list[TraceRow], events: list[Event] = None) -> Self:
        data = {s: np.vstack([getattr(r, s) for r in rows]) for s in SERIES}
        return cls(times=np.array([r.t for r in rows]), events=list(events or []),
                **data)

    def __len__(self) -> int:
        return self.times.size

    @property
    def n(self) -> int:
        return self.theta.shape[1]

    @property
    def du(self) -> np.ndarray:
        """Closed-loop correction u - u*."""
        return self.u - self.u_star

    def count_events(self) -> dict:
        counts = {k: 0 for k in EVENT_KINDS}
        for e in self.events:
            counts[e.kind] = counts.get(e.kind, 0) + 1
        return counts

    def to_frame(self) -> pd.DataFrame:
        data = np.column_stack([self.times] + [getattr(self, s) for s in SERIES])
        return pd.DataFrame(data, columns=columns(self.n))

    @classmethod
    def from_frame(cls, df: pd.DataFrame) -> Self:
        names = list(df.columns)
        if not names or names[0] != 't' or (len(names) - 1) % len(SERIES):
            raise ValueError(f"Unexpected trace columns {names}")
        n = (len(names) - 1) // len(SERIES)
        if names != columns(n):
            raise ValueError(f"Unexpected trace columns {names}")
        values = df.to_numpy(dtype=np.float64)
        data = {s: values[:, 1 + k * n: 1 + (k + 1) * n]
                for k, s in enumerate(SERIES)}
        return cls(times=values[:, 0], **data)

    def to_csv(self, path: Union[str, Path]) -> None:
        """Full round-trip precision, NaN written as an empty field."""
        self.to_frame().to_csv(path, index=False, float_format='%.17g')

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> Self:
        """Read a trace.csv back. Events are not stored in the CSV."""
        return cls.from_frame(pd.read_csv(path, float_precision='round_trip'))

    def __eq__(self, other) -> bool:
        if not isinstance(other, SimulationTrace):
            return NotImplemented
        return (np.array_equal(self.times, other.times)
                and all(np.array_equal(getattr(self, s), getattr(other, s),
                        equal_nan=True) for s in SERIES)
                and self.events == other.events)


@dataclass
class SyncMetrics:
    t_f: float
    """Start of the evaluation window, s."""
    sync_error: float
    """max over t >= t_f of max_ij |theta_dot_i - theta_dot_j|, rad/s."""
    rms_delta_theta: np.ndarray
    """Per-oscillator RMS tracking error over t >= t_f, rad."""
    max_abs_delta_theta: float
    """Largest |delta_theta| over t >= t_f, rad."""
    events: dict = field(default_factory=dict)
    """Event counts by kind."""

    def to_json(self) -> dict:
        return {
            't_f': self.t_f,
            'sync_error': self.sync_error,
            'rms_delta_theta': [float(v) for v in self.rms_delta_theta],
            'max_abs_delta_theta': self.max_abs_delta_theta,
            'events': dict(self.events)
        }

    def __repr__(self):
        return json.dumps(self.to_json())


def metrics(trace: SimulationTrace, t_f: float) -> SyncMetrics:
    """
    Synchronization and tracking metrics over t >= t_f, computed from the
    true plant phase velocities and tracking errors.

    :raises ConfigurationError: t_f is not before the end of the trace.
    """
    if not len(trace) or not t_f < trace.times[-1]:
        raise ConfigurationError(f"Metric window start {t_f}s must precede"
                " the end of the trace")
    mask = trace.times >= t_f - 1e-9
    rates = trace.thetadot[mask]
    err = trace.delta_theta[mask]
    spread = rates.max(axis=1) - rates.min(axis=1)
    return SyncMetrics(t_f=float(t_f),
            sync_error=float(spread.max()),
            rms_delta_theta=np.sqrt(np.mean(err ** 2, axis=0)),
            max_abs_delta_theta=float(np.abs(err).max()),
            events=trace.count_events())

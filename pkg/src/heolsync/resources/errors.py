"""
Exception hierarchy. Every error carries the process exit code the CLI
reports for it.
"""
from typing_extensions import Optional


class HeolSyncError(Exception):
    """Base class for heolsync errors."""
    exit_code: int = 1


class ConfigurationError(HeolSyncError, ValueError):
    """Invalid model, plan or simulation parameters."""
    exit_code = 2


class OscillatorIndexError(ConfigurationError, IndexError):
    """Oscillator index outside of [0, n)."""

    def __init__(self, i: int, n: int):
        self.i = i
        self.n = n
        super().__init__(f"Oscillator index {i} out of range for a network"
                f" of {n} oscillators")


class ScenarioParseError(ConfigurationError):
    """Scenario file could not be read or contains invalid entries."""

    def __init__(self, message: str, path: Optional[str] = None,
            line: Optional[int] = None, column: Optional[int] = None):
        self.path = path
        self.line = line
        self.column = column
        self.message = message
        super().__init__(str(self))

    def __str__(self) -> str:
        where = self.path or '<scenario>'
        if self.line is not None:
            where = f'{where}:{self.line}'
            if self.column is not None:
                where = f'{where}:{self.column}'
        return f'{where}: {self.message}'


class InfeasiblePlanError(HeolSyncError):
    """The reference plan never settles within the search limit."""
    exit_code = 3


class PlanValidationError(HeolSyncError):
    """Run refused because the reference plan has blocking violations."""
    exit_code = 3

    def __init__(self, report):
        self.report = report
        super().__init__("Reference plan failed validation:\n"
                f"{report.summary()}")


class SingularityError(HeolSyncError, ArithmeticError):
    """Flatness inversion denominator vanished."""
    exit_code = 4

    def __init__(self, oscillator: int, t: float, denominator: float):
        self.oscillator = oscillator
        self.t = t
        self.denominator = denominator
        super().__init__(f"Singular nominal control for oscillator"
                f" {oscillator + 1} at t={t:.6g}s (denominator"
                f" {denominator:.3g})")


class SimulationDivergedError(HeolSyncError):
    """Plant state blew up."""
    exit_code = 4

    def __init__(self, t: float, detail: str = ''):
        self.t = t
        self.detail = detail
        super().__init__(f"Simulation diverged at t={t:.6g}s. {detail}".strip())


class EstimatorNotReadyError(HeolSyncError):
    """Estimator window does not yet span its full horizon."""

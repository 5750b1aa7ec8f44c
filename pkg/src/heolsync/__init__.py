__version__ = '0.1.0'

from .resources.log import Log
from .resources.errors import HeolSyncError, ConfigurationError
from .resources.errors import ScenarioParseError, InfeasiblePlanError
from .resources.errors import PlanValidationError, SingularityError
from .resources.errors import SimulationDivergedError, EstimatorNotReadyError
from .resources.network import ControlMode, NetworkModel, UncertaintySet
from .resources.network import coupling_sum, coupling_sums, plant_rhs
from .resources.flatness import SyncFunction, ReferencePlan, ValidationReport
from .resources.flatness import Condition, Violation
from .resources.flatness import solve_g, settle_time, reference_state
from .resources.flatness import nominal_control, validate_plan
from .resources.heol import EstimatorWindow, ControllerState
from .resources.heol import alpha, alphas, estimate_F, ip_control
from .resources.heol import homeostat_residual
from .resources.config import ApplicationConfig, SimulationConfig
from .resources.trace import SimulationTrace, SyncMetrics, Event, metrics
from .resources.simulation import SimulationState, step
from .resources.scenario import Scenario, PRESETS, preset
from .resources.scenario import load_scenario, parse_scenario, write_scenario

from .commands.run import run
from .commands.validate import validate
from .commands.compare import compare
from .commands.sweep import sweep

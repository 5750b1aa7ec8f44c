"""
Scenario files and built-in presets.

A scenario is a TOML document with the sections [network], [uncertainty],
[trajectory], [controller], [simulation] and [output]. Oscillator vectors are
lists in 1-based oscillator order. Any number may also be written as a string
holding arithmetic on ``pi``, e.g. ``"pi/2"``.
"""
import ast
import json
import math
import operator
import re
import tomllib
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from typing_extensions import Any, Callable, Optional, Union

from .config import SimulationConfig
from .constants import (ALPHA_FLOOR, DEFAULT_HORIZON, DEFAULT_NOISE_STD,
        DEFAULT_SAMPLING_PERIOD, DEFAULT_SEED, DEFAULT_SETTLE_TOL, DEFAULT_TAU,
        DEFAULT_WINDOW_HORIZON, DENOM_EPSILON, DIVERGENCE_LIMIT)
from .errors import ConfigurationError, ScenarioParseError
from .flatness import ReferencePlan, SyncFunction
from .network import ControlMode, NetworkModel, UncertaintySet

SECTIONS = {
    'network': ('omega', 'coupling', 'adjacency', 'edges', 'mode'),
    'uncertainty': ('freq_scale', 'coupling_scale', 'init_scale'),
    'trajectory': ('c', 'tau', 'settle_tol', 'linear_rate', 'offset',
            'sine_amplitude', 'sine_frequency', 'sine_phase', 'g0', 'gdot0'),
    'controller': ('kp', 'window_horizon', 'alpha_floor', 'quadrature'),
    'simulation': ('name', 'sampling_period', 'horizon', 'noise_std',
            'rng_seed', 'nominal_phases', 'denom_epsilon', 'divergence_limit',
            'open_loop', 'hold_feedforward'),
    'output': ('dir', 'plots'),
}

_OPERATORS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}


def evaluate(expr: str) -> float:
    """
    Value of an arithmetic expression over numbers and ``pi``.

    :raises ValueError: anything else, names and calls included.
    """
    def _eval(node):
        if isinstance(node, ast.Expression):
            return _eval(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == 'pi':
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPERATORS:
            return _OPERATORS[type(node.op)](_eval(node.left), _eval(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPERATORS:
            return _OPERATORS[type(node.op)](_eval(node.operand))
        raise ValueError(f"Unsupported expression {expr!r}")

    try:
        tree = ast.parse(expr.strip(), mode='eval')
    except SyntaxError:
        raise ValueError(f"Invalid expression {expr!r}")
    try:
        return _eval(tree)
    except ZeroDivisionError:
        raise ValueError(f"Division by zero in {expr!r}")


def _number(value: Any) -> float:
    if isinstance(value, bool):
        raise ValueError(f"Expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        return evaluate(value)
    raise ValueError(f"Expected a number, got {value!r}")


def _numbers(value: Any) -> list[float]:
    if not isinstance(value, list):
        raise ValueError(f"Expected a list of numbers, got {value!r}")
    return [_number(v) for v in value]


def _matrix(value: Any) -> list[list[float]]:
    if not isinstance(value, list) or not all(isinstance(r, list) for r in value):
        raise ValueError("Expected a list of rows")
    return [_numbers(r) for r in value]


def _vector_or_scalar(value: Any) -> Union[float, list[float]]:
    if isinstance(value, list):
        return _numbers(value)
    return _number(value)


def _integer(value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"Expected an integer, got {value!r}")
    return value


def _boolean(value: Any) -> bool:
    if not isinstance(value, bool):
        raise ValueError(f"Expected true or false, got {value!r}")
    return value


def _string(value: Any) -> str:
    if not isinstance(value, str):
        raise ValueError(f"Expected a string, got {value!r}")
    return value


def edges_to_adjacency(edges: list, n: int) -> np.ndarray:
    """
    Dense adjacency from [i, j, a] triples with 1-based labels. A pair
    listed once is symmetric, listing (j, i) separately overrides it.
    """
    adjacency = np.zeros((n, n))
    explicit = set()
    for edge in edges:
        if not isinstance(edge, list) or len(edge) not in (2, 3):
            raise ValueError(f"Edge {edge!r} must be [i, j] or [i, j, weight]")
        i, j = _integer(edge[0]), _integer(edge[1])
        weight = _number(edge[2]) if len(edge) == 3 else 1.0
        for k in (i, j):
            if not 1 <= k <= n:
                raise ValueError(f"Edge label {k} outside of 1..{n}")
        if i == j:
            raise ValueError(f"Self loop on oscillator {i}")
        adjacency[i - 1, j - 1] = weight
        explicit.add((i - 1, j - 1))
        if (j - 1, i - 1) not in explicit:
            adjacency[j - 1, i - 1] = weight
    return adjacency


def _locate(text: str, section: Optional[str], key: Optional[str] = None):
    """
    1-based (line, column) of a section header or of a key inside it. A None
    section looks for a top-level key.
    """
    current = None
    header = re.compile(r'^\s*\[\s*([A-Za-z0-9_\-]+)\s*\]')
    for lineno, line in enumerate(text.splitlines(), start=1):
        m = header.match(line)
        if m:
            current = m.group(1)
            if key is None and current == section:
                return lineno, line.index('[') + 1
            continue
        if key is not None and current == section:
            km = re.match(rf'^(\s*){re.escape(key)}\s*=', line)
            if km:
                return lineno, len(km.group(1)) + 1
    return None, None


@dataclass
class Scenario:
    """A parsed scenario file."""
    config: SimulationConfig
    out_dir: Optional[str] = None
    """[output] dir, used when no --out is given."""
    plots: bool = True
    """[output] plots."""
    path: Optional[str] = None


class _Parser:

    def __init__(self, text: str, path: Optional[str]):
        self.text = text
        self.path = path

    def error(self, message: str, section: Optional[str] = None,
            key: Optional[str] = None) -> ScenarioParseError:
        line, column = (None, None)
        if section is not None:
            line, column = _locate(self.text, section, key)
            if line is None and key is not None:
                line, column = _locate(self.text, section)
        return ScenarioParseError(message, self.path, line, column)

    @contextmanager
    def at(self, section: str, key: Optional[str] = None):
        try:
            yield
        except ScenarioParseError:
            raise
        except (ConfigurationError, ValueError, TypeError) as e:
            where = f"[{section}]" + (f" {key}" if key else "")
            raise self.error(f"{where}: {e}", section, key)

    def value(self, data: dict, section: str, key: str, convert: Callable,
            default: Any = None, required: bool = False):
        table = data.get(section, {})
        if key not in table:
            if required:
                raise self.error(f"Missing required key '{key}' in [{section}]",
                        section)
            return default
        with self.at(section, key):
            return convert(table[key])

    def parse(self) -> Scenario:
        try:
            data = tomllib.loads(self.text)
        except tomllib.TOMLDecodeError as e:
            line = getattr(e, 'lineno', None)
            column = getattr(e, 'colno', None)
            message = getattr(e, 'msg', str(e))
            if line is None:
                m = re.search(r'\(at line (\d+), column (\d+)\)', str(e))
                if m:
                    line, column = int(m.group(1)), int(m.group(2))
                    message = str(e)[:m.start()].strip()
            raise ScenarioParseError(message, self.path, line, column)

        for section, table in data.items():
            if section not in SECTIONS:
                raise self.error(f"Unknown section [{section}], expected one of"
                        f" {list(SECTIONS)}", section)
            if not isinstance(table, dict):
                raise ScenarioParseError(f"'{section}' must be a table",
                        self.path, *_locate(self.text, None, section))
            for key in table:
                if key not in SECTIONS[section]:
                    raise self.error(f"Unknown key '{key}' in [{section}],"
                            f" expected one of {list(SECTIONS[section])}",
                            section, key)

        model = self.network(data)
        n = model.n
        unc = self.uncertainty(data, n)
        nominal = self.value(data, 'simulation', 'nominal_phases', _numbers,
                required=True)
        with self.at('simulation', 'nominal_phases'):
            if len(nominal) != n:
                raise ValueError(f"Expected {n} entries, got {len(nominal)}")
        plan = self.trajectory(data, nominal, n)

        v = lambda key, convert, default, section='simulation': self.value(
                data, section, key, convert, default)
        with self.at('simulation'):
            config = SimulationConfig(model=model, unc=unc, plan=plan,
                nominal_phases=nominal,
                sampling_period=v('sampling_period', _number,
                        DEFAULT_SAMPLING_PERIOD),
                horizon=v('horizon', _number, DEFAULT_HORIZON),
                noise_std=v('noise_std', _number, DEFAULT_NOISE_STD),
                rng_seed=v('rng_seed', _integer, DEFAULT_SEED),
                denom_epsilon=v('denom_epsilon', _number, DENOM_EPSILON),
                divergence_limit=v('divergence_limit', _number,
                        DIVERGENCE_LIMIT),
                open_loop=v('open_loop', _boolean, False),
                hold_feedforward=v('hold_feedforward', _boolean, False),
                name=v('name', _string,
                        Path(self.path).stem if self.path else 'scenario'),
                kp=v('kp', _vector_or_scalar, 1.0, 'controller'),
                window_horizon=v('window_horizon', _number,
                        DEFAULT_WINDOW_HORIZON, 'controller'),
                alpha_floor=v('alpha_floor', _number, ALPHA_FLOOR, 'controller'),
                quadrature=v('quadrature', _string, 'trapezoid', 'controller'))

        out_dir = v('dir', _string, None, 'output')
        plots = v('plots', _boolean, True, 'output')
        return Scenario(config=config, out_dir=out_dir, plots=plots,
                path=self.path)

    def network(self, data: dict) -> NetworkModel:
        if 'network' not in data:
            raise ScenarioParseError("Missing required section [network]",
                    self.path)
        omega = self.value(data, 'network', 'omega', _numbers, required=True)
        n = len(omega)
        coupling = self.value(data, 'network', 'coupling', _number, 1.0)
        mode = self.value(data, 'network', 'mode', ControlMode.parse,
                ControlMode.MULTIPLICATIVE)
        table = data['network']
        if 'adjacency' in table and 'edges' in table:
            raise self.error("Give either 'adjacency' or 'edges', not both",
                    'network', 'edges')
        if 'edges' in table:
            adjacency = self.value(data, 'network', 'edges',
                    lambda e: edges_to_adjacency(e, n))
        else:
            adjacency = self.value(data, 'network', 'adjacency', _matrix,
                    np.ones((n, n)))
        with self.at('network'):
            return NetworkModel(omega=omega, coupling=coupling,
                    adjacency=adjacency, mode=mode)

    def uncertainty(self, data: dict, n: int) -> UncertaintySet:
        v = lambda key, convert, default: self.value(data, 'uncertainty', key,
                convert, default)
        with self.at('uncertainty'):
            return UncertaintySet(
                    freq_scale=v('freq_scale', _numbers, [1.0] * n),
                    coupling_scale=v('coupling_scale', _number, 1.0),
                    init_scale=v('init_scale', _numbers, [1.0] * n))

    def trajectory(self, data: dict, nominal: list, n: int) -> ReferencePlan:
        if 'trajectory' not in data:
            raise ScenarioParseError("Missing required section [trajectory]",
                    self.path)
        v = lambda key, convert, default=None, required=False: self.value(data,
                'trajectory', key, convert, default, required)
        with self.at('trajectory'):
            sync = SyncFunction(
                    linear_rate=v('linear_rate', _number, required=True),
                    offset=v('offset', _number, 0.0),
                    sine_amplitude=v('sine_amplitude', _number, 0.0),
                    sine_frequency=v('sine_frequency', _number, 0.0),
                    sine_phase=v('sine_phase', _number, 0.0))
        c = v('c', _numbers, required=True)
        with self.at('trajectory', 'c'):
            if len(c) != n:
                raise ValueError(f"Expected {n} entries, got {len(c)}")
        tau = v('tau', _number, DEFAULT_TAU)
        settle_tol = v('settle_tol', _number, DEFAULT_SETTLE_TOL)
        g0 = v('g0', _numbers)
        gdot0 = v('gdot0', _numbers)
        with self.at('trajectory'):
            plan = ReferencePlan.from_initial_phases(sync, c, tau, nominal,
                    settle_tol)
            if g0 is not None or gdot0 is not None:
                plan = ReferencePlan(sync=sync, c=c, tau=tau,
                        g0=plan.g0 if g0 is None else g0,
                        gdot0=plan.gdot0 if gdot0 is None else gdot0,
                        settle_tol=settle_tol)
        return plan


def parse_scenario(text: str, path: Optional[str] = None) -> Scenario:
    """
    :raises ScenarioParseError: syntax errors, unknown sections or keys,
        and invalid values, located by line and column where possible.
    """
    return _Parser(text, path).parse()


def load_scenario(path: Union[str, Path]) -> Scenario:
    """
    :raises ScenarioParseError: the file cannot be read or parsed.
    """
    p = Path(path)
    try:
        text = p.read_text(encoding='utf-8')
    except OSError as e:
        raise ScenarioParseError(f"Cannot read scenario: {e.strerror}", str(p))
    return parse_scenario(text, str(p))


def _toml(value: Any) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, np.ndarray):
        value = value.tolist()
    if isinstance(value, (list, tuple)):
        return '[' + ', '.join(_toml(v) for v in value) + ']'
    raise TypeError(f"Cannot write {value!r} to a scenario")


def scenario_text(config: SimulationConfig, out_dir: Optional[str] = None,
        plots: bool = True) -> str:
    """TOML text that parses back to config."""
    plan = config.plan
    derived = ReferencePlan.from_initial_phases(plan.sync, plan.c, plan.tau,
            config.nominal_phases, plan.settle_tol)
    sections = {
        'network': {
            'mode': config.model.mode.value,
            'omega': config.model.omega,
            'coupling': config.model.coupling,
            'adjacency': config.model.adjacency,
        },
        'uncertainty': config.unc.to_json(),
        'trajectory': {
            **plan.sync.to_json(),
            'c': plan.c,
            'tau': plan.tau,
            'settle_tol': plan.settle_tol,
        },
        'controller': {
            'kp': config.kp,
            'window_horizon': config.window_horizon,
            'alpha_floor': config.alpha_floor,
            'quadrature': config.quadrature,
        },
        'simulation': {
            'name': config.name,
            'nominal_phases': config.nominal_phases,
            'sampling_period': config.sampling_period,
            'horizon': config.horizon,
            'noise_std': config.noise_std,
            'rng_seed': config.rng_seed,
            'denom_epsilon': config.denom_epsilon,
            'divergence_limit': config.divergence_limit,
            'open_loop': config.open_loop,
            'hold_feedforward': config.hold_feedforward,
        },
        'output': {'plots': plots},
    }
    if not np.array_equal(plan.g0, derived.g0):
        sections['trajectory']['g0'] = plan.g0
    if not np.array_equal(plan.gdot0, derived.gdot0):
        sections['trajectory']['gdot0'] = plan.gdot0
    if out_dir is not None:
        sections['output']['dir'] = str(out_dir)

    lines = [f"# heolsync scenario '{config.name}'"]
    for name, table in sections.items():
        lines.append('')
        lines.append(f'[{name}]')
        lines.extend(f'{k} = {_toml(v)}' for k, v in table.items())
    return '\n'.join(lines) + '\n'


def write_scenario(config: SimulationConfig, path: Union[str, Path],
        out_dir: Optional[str] = None, plots: bool = True) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(scenario_text(config, out_dir, plots), encoding='utf-8')
    return p


PRESET_OMEGA = (5.0, 7.0, 8.0)
PRESET_SYNC = SyncFunction(linear_rate=7.5, offset=7.0, sine_amplitude=2.0,
        sine_frequency=0.5)
PRESET_NOMINAL_PHASES = (0.5, 1.0, 2.0)
PRESET_UNCERTAINTY = UncertaintySet(freq_scale=(1.2, 0.8, 1.2),
        coupling_scale=0.8, init_scale=(0.8, 1.2, 0.8))


def _three_oscillators(name: str, mode: ControlMode, c: tuple) -> SimulationConfig:
    model = NetworkModel.all_to_all(PRESET_OMEGA, coupling=1.0, mode=mode)
    plan = ReferencePlan.from_initial_phases(PRESET_SYNC, c, DEFAULT_TAU,
            PRESET_NOMINAL_PHASES)
    return SimulationConfig(model=model, unc=PRESET_UNCERTAINTY, plan=plan,
            nominal_phases=PRESET_NOMINAL_PHASES,
            sampling_period=DEFAULT_SAMPLING_PERIOD, horizon=DEFAULT_HORIZON,
            noise_std=DEFAULT_NOISE_STD, kp=1.0,
            window_horizon=DEFAULT_WINDOW_HORIZON, rng_seed=DEFAULT_SEED,
            name=name)


def _multiplicative_preset() -> SimulationConfig:
    return _three_oscillators('paper-multiplicative', ControlMode.MULTIPLICATIVE,
            (math.pi / 2, math.pi / 2, math.pi))


def _additive_preset() -> SimulationConfig:
    return _three_oscillators('paper-additive', ControlMode.ADDITIVE,
            (math.pi / 2, math.pi / 2, math.pi / 2))


PRESETS: dict[str, Callable[[], SimulationConfig]] = {
    'paper-multiplicative': _multiplicative_preset,
    'paper-additive': _additive_preset,
}
"""Three-oscillator experiments with multiplicative and additive control."""


def preset(name: str) -> SimulationConfig:
    """
    :raises ConfigurationError: unknown preset name.
    """
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigurationError(f"Unknown preset {name!r}, expected one of"
                f" {sorted(PRESETS)}")

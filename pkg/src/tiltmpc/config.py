"""Run configuration: YAML loading, validation, and defaults.

An empty file (or no file) yields the reference vehicle, the shipped
controller tunings, and the sluggish scenario with the predictive
controller. Unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields as dc_fields

import numpy as np
import yaml

from .baselines import SmcConfig
from .dynamics import DisturbanceConfig
from .errors import ConfigError
from .nmpc import DEFAULT_INPUT_WEIGHTS, DEFAULT_STATE_WEIGHTS, NmpcConfig
from .params import ActuatorLimits, VehicleParams

SCENARIO_NAMES = ("sluggish", "agile", "hover-attitude", "custom")
CONTROLLER_NAMES = ("nmpc", "lqr", "smc")


@dataclass
class LqrWeights:
    """State/input cost diagonals for the LQR baseline."""

    q_state: np.ndarray = field(default_factory=lambda: DEFAULT_STATE_WEIGHTS.copy())
    r_input: np.ndarray = field(default_factory=lambda: DEFAULT_INPUT_WEIGHTS.copy())

    def __post_init__(self) -> None:
        self.q_state = np.asarray(self.q_state, float)
        self.r_input = np.asarray(self.r_input, float)
        if self.q_state.shape != (12,) or np.any(self.q_state < 0):
            raise ValueError("lqr q_state must be 12 nonnegative entries")
        if self.r_input.shape != (6,) or np.any(self.r_input <= 0):
            raise ValueError("lqr r_input must be 6 positive entries")


@dataclass
class CustomScenarioParams:
    """Knobs for the user-defined figure-eight scenario."""

    amplitude_x: float = 4.0
    amplitude_y: float = 1.0
    period: float = 20.0
    altitude: float = -4.0
    duration: float = 60.0
    disturbed: bool = False

    def __post_init__(self) -> None:
        if not self.period > 0:
            raise ValueError("custom.period must be positive")
        if not self.duration > 0:
            raise ValueError("custom.duration must be positive")


@dataclass
class RunConfig:
    """Fully-resolved episode configuration."""

    scenario: str = "sluggish"
    controller: str = "nmpc"
    dt: float = 0.02
    duration: float | None = None
    seed: int = 0
    out_dir: str = "runs"
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    limits: ActuatorLimits = field(default_factory=ActuatorLimits)
    nmpc: NmpcConfig = field(default_factory=NmpcConfig)
    lqr: LqrWeights = field(default_factory=LqrWeights)
    smc: SmcConfig = field(default_factory=SmcConfig)
    disturbance: DisturbanceConfig | None = None
    custom: CustomScenarioParams = field(default_factory=CustomScenarioParams)

    def __post_init__(self) -> None:
        if self.scenario not in SCENARIO_NAMES:
            raise ValueError(f"scenario must be one of {SCENARIO_NAMES}, got {self.scenario!r}")
        if self.controller not in CONTROLLER_NAMES:
            raise ValueError(
                f"controller must be one of {CONTROLLER_NAMES}, got {self.controller!r}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.duration is not None and not self.duration > 0:
            raise ValueError("duration must be positive")
        self.seed = int(self.seed)

    def to_dict(self) -> dict:
        """JSON-ready echo of every resolved setting."""
        return {
            "scenario": self.scenario,
            "controller": self.controller,
            "dt": self.dt,
            "duration": self.duration,
            "seed": self.seed,
            "out_dir": self.out_dir,
            "vehicle": {
                "mass": self.vehicle.mass,
                "inertia": list(self.vehicle.inertia),
                "arm_length": self.vehicle.arm_length,
                "k_thrust": self.vehicle.k_thrust,
                "k_torque": self.vehicle.k_torque,
                "lin_drag": list(self.vehicle.lin_drag),
                "rot_drag": list(self.vehicle.rot_drag),
                "gravity": self.vehicle.gravity,
            },
            "limits": {
                "omega_max": self.limits.omega_max,
                "omega_min": self.limits.omega_min,
                "beta_max": self.limits.beta_max,
                "omega_rate": self.limits.omega_rate,
                "beta_rate": self.limits.beta_rate,
            },
            "nmpc": {
                "horizon": self.nmpc.horizon,
                "dt": self.nmpc.dt,
                "q_state": list(self.nmpc.q_state),
                "q_input": list(self.nmpc.q_input),
                "sqp_max_iters": self.nmpc.sqp_max_iters,
                "step_tol": self.nmpc.step_tol,
                "constraint_tol": self.nmpc.constraint_tol,
                "fd_eps": self.nmpc.fd_eps,
                "lift_tol": self.nmpc.lift_tol,
                "slack_penalty": self.nmpc.slack_penalty,
                "merit_penalty": self.nmpc.merit_penalty,
                "use_warm_start": self.nmpc.use_warm_start,
            },
            "lqr": {
                "q_state": list(self.lqr.q_state),
                "r_input": list(self.lqr.r_input),
            },
            "smc": {
                "lam_pos": list(self.smc.lam_pos),
                "lam_att": list(self.smc.lam_att),
                "gain_pos": list(self.smc.gain_pos),
                "gain_att": list(self.smc.gain_att),
                "bl_pos": list(self.smc.bl_pos),
                "bl_att": list(self.smc.bl_att),
            },
            "disturbance": None if self.disturbance is None else {
                "enabled": self.disturbance.enabled,
                "amp_force": self.disturbance.amp_force,
                "amp_torque": self.disturbance.amp_torque,
                "mix": self.disturbance.mix,
                "randomize_phases": self.disturbance.randomize_phases,
            },
            "custom": {
                "amplitude_x": self.custom.amplitude_x,
                "amplitude_y": self.custom.amplitude_y,
                "period": self.custom.period,
                "altitude": self.custom.altitude,
                "duration": self.custom.duration,
                "disturbed": self.custom.disturbed,
            },
        }


_TOP_KEYS = {"scenario", "controller", "dt", "duration", "seed", "out_dir",
             "vehicle", "limits", "nmpc", "lqr", "smc", "disturbance", "custom"}

_SECTION_BUILDERS = {
    "vehicle": (VehicleParams, {"mass", "inertia", "arm_length", "k_thrust",
                                "k_torque", "lin_drag", "rot_drag", "gravity"}),
    "limits": (ActuatorLimits, {"omega_max", "omega_min", "beta_max",
                                "omega_rate", "beta_rate"}),
    "nmpc": (NmpcConfig, {"horizon", "dt", "q_state", "q_input", "sqp_max_iters",
                          "step_tol", "constraint_tol", "fd_eps", "lift_tol",
                          "slack_penalty", "merit_penalty", "use_warm_start"}),
    "lqr": (LqrWeights, {"q_state", "r_input"}),
    "smc": (SmcConfig, {"lam_pos", "lam_att", "gain_pos", "gain_att",
                        "bl_pos", "bl_att"}),
    "disturbance": (DisturbanceConfig, {"enabled", "amp_force", "amp_torque", "mix",
                                        "force_freqs", "force_phases", "torque_freqs",
                                        "torque_phases", "randomize_phases"}),
    "custom": (CustomScenarioParams, {"amplitude_x", "amplitude_y", "period",
                                      "altitude", "duration", "disturbed"}),
}


def _build_section(name: str, data: dict):
    cls, allowed = _SECTION_BUILDERS[name]
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in section '{name}': {sorted(unknown)}")
    try:
        return cls(**data)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid value in section '{name}': {exc}") from exc


def load_config(path: str | None = None) -> RunConfig:
    """Parse a YAML config file into a fully-resolved RunConfig.

    ``None`` or an empty file returns pure defaults. Raises ConfigError with
    the offending line for syntax errors, and names the key for unknown-key
    or domain violations.
    """
    if path is None:
        return RunConfig()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" (line {mark.line + 1}, column {mark.column + 1})" if mark else ""
        raise ConfigError(f"config parse error in {path!r}{where}: {exc}") from exc
    if raw is None:
        return RunConfig()
    if not isinstance(raw, dict):
        raise ConfigError(f"config root must be a mapping, got {type(raw).__name__}")

    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {sorted(unknown)}")

    kwargs = {}
    for key in ("scenario", "controller", "dt", "duration", "seed", "out_dir"):
        if key in raw and raw[key] is not None:
            kwargs[key] = raw[key]
    for name in _SECTION_BUILDERS:
        if name in raw and raw[name] is not None:
            section = raw[name]
            if not isinstance(section, dict):
                raise ConfigError(f"section '{name}' must be a mapping")
            kwargs[name] = _build_section(name, section)
    try:
        return RunConfig(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc

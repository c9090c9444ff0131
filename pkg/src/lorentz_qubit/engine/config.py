"""Simulation configuration: a flat JSON document with strict validation."""
from dataclasses import dataclass, field, fields, asdict
import hashlib
import json
import math

import numpy as np

from ..readout import ThetaSchedule, theta_preset, ReadoutParams

MODES = ('exact', 'sme', 'charge-field', 'readout')
FORMATS = ('jsonl', 'csv')
STEP_FRACTION = 0.1


class ConfigError(ValueError):
    pass


class InvariantError(RuntimeError):
    pass


class NumericError(ArithmeticError):
    pass


@dataclass
class SimulationConfig:
    mode: str = 'exact'
    initial: list = field(default_factory=lambda: [1.0, 0.0, 0.0])
    gamma: float = 1.0
    theta: object = 'zero'          # preset name, number, or path to a sampled series
    theta_params: dict = field(default_factory=dict)
    duration: float = 2.0
    dt: float = 1e-3
    steps: int = None               # overrides duration when set
    seed: int = 0
    n: int = 1
    chunk: int = 1000
    out: str = None
    format: str = 'jsonl'
    # charge-field mode
    g: float = 1.0
    field_e: list = field(default_factory=lambda: [0.0, 0.0, 0.0])
    field_b: list = field(default_factory=lambda: [0.0, 0.0, 0.0])
    noise: object = 'none'          # 'none', 'theta', or a list of channel dicts
    # readout mode
    kappa: float = 1.0
    chi: float = 0.5
    epsilon: float = None           # default: chosen so the dephasing rate equals gamma
    delay_q: float = 0.0
    delay_r: float = 0.0
    keep_stark: bool = False
    rescale: bool = True

    def __post_init__(self):
        self.validate()

    @property
    def n_steps(self):
        if self.steps is not None:
            return int(self.steps)
        return int(math.ceil(self.duration / self.dt - 1e-9))

    @property
    def horizon(self):
        return self.n_steps * self.dt

    def validate(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode: must be one of {MODES}, got {self.mode!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"format: must be one of {FORMATS}, got {self.format!r}")
        init = np.asarray(self.initial, dtype=float)
        if init.shape not in ((3,), (4,)):
            raise ConfigError("initial: need a 3-component Bloch vector or a 4-component state")
        if init.shape == (3,) and np.linalg.norm(init) > 1 + 1e-10:
            raise ConfigError("initial: Bloch vector longer than 1")
        if init.shape == (4,) and not (init[0] > 0 and init[0] ** 2 >= np.dot(init[1:], init[1:]) - 1e-10 * init[0] ** 2):
            raise ConfigError("initial: four-vector must have s0 > 0 and lie inside the lightcone")
        if not self.dt > 0:
            raise ConfigError(f"dt: must be positive, got {self.dt!r}")
        if self.steps is None and not self.duration > 0:
            raise ConfigError(f"duration: must be positive, got {self.duration!r}")
        if self.steps is not None and not int(self.steps) >= 1:
            raise ConfigError(f"steps: must be at least 1, got {self.steps!r}")
        if not int(self.n) >= 1:
            raise ConfigError(f"n: must be at least 1, got {self.n!r}")
        if not int(self.chunk) >= 1:
            raise ConfigError(f"chunk: must be at least 1, got {self.chunk!r}")
        if not (isinstance(self.seed, int) and self.seed >= 0):
            raise ConfigError(f"seed: must be a non-negative integer, got {self.seed!r}")
        if self.mode in ('exact', 'sme', 'readout') and not self.gamma > 0:
            raise ConfigError(f"gamma: must be positive in {self.mode} mode, got {self.gamma!r}")
        if self.delay_q < 0 or self.delay_r < 0:
            raise ConfigError("delay_q, delay_r: must be non-negative")
        if self.mode == 'readout':
            if not self.kappa > 0:
                raise ConfigError(f"kappa: must be positive, got {self.kappa!r}")
            if not self.chi > 0:
                raise ConfigError(f"chi: must be positive for readout, got {self.chi!r}")
        if self.mode == 'charge-field':
            for key in ('field_e', 'field_b'):
                if np.asarray(getattr(self, key), dtype=float).shape != (3,):
                    raise ConfigError(f"{key}: must be a 3-vector")
            if not (self.noise in ('none', 'theta') or isinstance(self.noise, list)):
                raise ConfigError("noise: must be 'none', 'theta' or a list of channels")
        rate = self.characteristic_rate()
        if rate > 0 and self.dt > STEP_FRACTION / rate * (1 + 1e-12):
            raise ConfigError(f"dt: {self.dt} exceeds {STEP_FRACTION}/rate = {STEP_FRACTION / rate:.3g}")
        self.theta_schedule()

    def characteristic_rate(self):
        rates = []
        if self.mode in ('exact', 'sme', 'readout') or self.noise == 'theta':
            rates.append(self.gamma)
        if self.mode == 'charge-field':
            f = np.asarray(self.field_e, dtype=float) + 1j * np.asarray(self.field_b, dtype=float)
            rates.append(float(np.linalg.norm(f)) * abs(self.g))
            if isinstance(self.noise, list):
                for ch in self.noise:
                    v = np.asarray(ch.get('re', [0, 0, 0]), float) + 1j * np.asarray(ch.get('im', [0, 0, 0]), float)
                    rates.append(self.g ** 2 * float(np.vdot(v, v).real) / ch.get('rate', 1.0))
        return max(rates, default=0.0)

    def theta_schedule(self):
        th = self.theta
        try:
            if isinstance(th, (int, float)):
                return ThetaSchedule.constant(float(th))
            if isinstance(th, str) and th in ('zero', 'half_pi', 'constant', 'linear', 'sweep', 'sinusoid'):
                dur = self.theta_params.get('duration', self.horizon + self.delay_q)
                return theta_preset(th, dur, **{k: v for k, v in self.theta_params.items() if k != 'duration'})
            if isinstance(th, str):
                return load_theta_file(th)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"theta: {exc}") from exc
        raise ConfigError(f"theta: unsupported value {th!r}")

    def readout_params(self):
        sched = self.theta_schedule()
        if self.epsilon is None:
            return ReadoutParams.for_rate(self.gamma, self.dt, self.kappa, self.chi,
                                          delay_q=self.delay_q, delay_r=self.delay_r, theta=sched)
        return ReadoutParams(self.kappa, self.chi, self.epsilon, self.dt,
                             self.delay_q, self.delay_r, sched)

    def to_dict(self):
        return asdict(self)

    def config_hash(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def replace(self, **changes):
        d = self.to_dict()
        d.update(changes)
        return from_dict(d)


def load_theta_file(path):
    """Sampled theta series: JSON ``[[t, theta], ...]`` or two-column text."""
    if path.endswith('.json'):
        with open(path) as fh:
            data = np.asarray(json.load(fh), dtype=float)
    else:
        data = np.loadtxt(path, delimiter=',' if path.endswith('.csv') else None, ndmin=2)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns (t, theta)")
    return ThetaSchedule.sampled(data[:, 0], data[:, 1])


def from_dict(d):
    known = {f.name for f in fields(SimulationConfig)}
    unknown = sorted(set(d) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    try:
        return SimulationConfig(**d)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path):
    try:
        with open(path) as fh:
            d = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    return from_dict(d)

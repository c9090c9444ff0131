"""Dispersive cQED readout with a delayed choice of homodyne quadrature.

The resonator sits in one of two coherent steady states ``alpha_+-`` keyed
to the qubit's ``sz`` eigenstates.  Each detector bin of length ``dt`` leaks
``sqrt(kappa dt) alpha_+-`` into the line; projecting that on a quadrature
eigenstate ``<I_theta|`` gives a diagonal Kraus operator.  After rescaling
``I -> r`` this is ``sqrt(pbar) exp(i w_S dt sz/2) R_{r,theta}``.

The quadrature angle is chosen at the amplifier a delay ``delay_q`` after the
qubit interaction, and the signal is digitized ``delay_r`` later still.
"""
from collections import deque
from dataclasses import dataclass
import math

import numpy as np

from . import pauli
from .measurement import GaussianMeasurementConfig, gaussian_measurement_op, record_density, sample_readout
from .states import BlochState

RATE_CHECK_TOL = 1e-12
FACTOR_CHECK_TOL = 1e-10


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class ThetaSchedule:
    """Quadrature angle as a function of time, defined on ``[0, end]``."""
    fn: object
    end: float = math.inf
    name: str = 'custom'

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t > self.end + 1e-12):
            raise ScheduleError(f"theta schedule '{self.name}' ends at {self.end}, "
                                f"requested t = {float(np.max(t))}")
        return self.fn(t)

    @classmethod
    def constant(cls, theta):
        return cls(lambda t: np.full(np.shape(t), float(theta)) if np.ndim(t) else float(theta),
                   name=f'constant({theta})')

    @classmethod
    def linear(cls, theta0, theta1, duration):
        """Linear ramp from ``theta0`` to ``theta1`` over ``duration``, then held."""
        return cls(lambda t: theta0 + (theta1 - theta0) * np.clip(t / duration, 0, 1),
                   name='linear')

    @classmethod
    def sweep(cls, duration, low=0.0, high=math.pi / 2):
        """Smooth ``low -> high -> low`` cycle over ``duration``."""
        return cls(lambda t: low + (high - low) * np.sin(np.pi * np.clip(t / duration, 0, 1)) ** 2,
                   name='sweep')

    @classmethod
    def sinusoid(cls, period, low=0.0, high=math.pi / 2):
        return cls(lambda t: low + (high - low) * np.sin(np.pi * t / period) ** 2, name='sinusoid')

    @classmethod
    def sampled(cls, times, values):
        """Piecewise-linear interpolation of a sampled series; ends at the last sample."""
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or len(times) < 1:
            raise ValueError("sampled schedule needs matching 1-d time and value arrays")
        if np.any(np.diff(times) <= 0):
            raise ValueError("sample times must increase strictly")
        return cls(lambda t: np.interp(t, times, values), end=float(times[-1]), name='sampled')


def theta_preset(name, duration=None, **kw):
    """Named presets: ``zero``, ``half_pi``, ``constant``, ``linear``, ``sweep``, ``sinusoid``."""
    if name == 'zero':
        return ThetaSchedule.constant(0.0)
    if name == 'half_pi':
        return ThetaSchedule.constant(math.pi / 2)
    if name == 'constant':
        return ThetaSchedule.constant(kw.get('theta', 0.0))
    if name == 'linear':
        return ThetaSchedule.linear(kw.get('theta0', 0.0), kw.get('theta1', math.pi / 2), duration)
    if name == 'sweep':
        return ThetaSchedule.sweep(duration)
    if name == 'sinusoid':
        return ThetaSchedule.sinusoid(kw.get('period', duration))
    raise ValueError(f"unknown theta preset {name!r}")


@dataclass(frozen=True)
class ReadoutParams:
    kappa: float
    chi: float
    epsilon: float
    dt: float
    delay_q: float = 0.0
    delay_r: float = 0.0
    theta: ThetaSchedule = None

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa!r}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if self.delay_q < 0 or self.delay_r < 0:
            raise ValueError("delays must be non-negative")
        if self.theta is None:
            object.__setattr__(self, 'theta', ThetaSchedule.constant(0.0))

    @property
    def x(self):
        return 2 * self.chi / self.kappa

    def require_informative(self):
        if not self.chi > 0:
            raise ValueError(f"readout needs chi > 0, got {self.chi!r}")

    @classmethod
    def for_rate(cls, gamma, dt, kappa=1.0, chi=0.5, **kw):
        """Choose the drive so the dephasing rate equals ``gamma``."""
        x = 2 * chi / kappa
        nbar = gamma * kappa * (1 + x * x) / (2 * (2 * chi) ** 2)
        eps = kappa / 2 * math.sqrt(nbar * (1 + x * x))
        return cls(kappa, chi, eps, dt, **kw)


@dataclass(frozen=True)
class ReadoutSample:
    interaction_time: float
    choice_time: float
    observation_time: float
    theta: float
    signal: float
    r: float


def steady_states(p):
    """``alpha_+- = -i(2 eps/kappa)/(1 -+ i 2chi/kappa)`` and the shared photon number."""
    a = 2 * p.epsilon / p.kappa
    plus = -1j * a / (1 - 1j * p.x)
    minus = -1j * a / (1 + 1j * p.x)
    nbar = a * a / (1 + p.x * p.x)
    return plus, minus, nbar


def rates_from_amplitudes(p):
    plus, minus, _ = steady_states(p)
    gamma = p.kappa * abs(minus - plus) ** 2 / 2
    stark = p.kappa * (np.conj(minus) * plus).imag
    return float(gamma), float(stark)


def rates_closed_form(p):
    _, _, nbar = steady_states(p)
    d = 1 + p.x * p.x
    return (2 / p.kappa) * (2 * p.chi) ** 2 * nbar / d, 4 * p.chi * nbar / d


def dephasing_and_stark(p):
    """Measurement-dephasing rate ``Gamma`` and ac-Stark frequency ``w_S``.

    Evaluated from the closed form and cross-checked against the overlap of
    the two leaked coherent states.
    """
    closed = rates_closed_form(p)
    direct = rates_from_amplitudes(p)
    for c, d in zip(closed, direct):
        if abs(c - d) > RATE_CHECK_TOL * max(1.0, abs(c)):
            raise ArithmeticError(f"rate routes disagree: {closed} vs {direct}")
    return closed


def collapse_amplitude(signal, theta, alpha, kappa_dt):
    """``<I_theta | sqrt(kappa dt) alpha>`` for a quadrature eigenstate."""
    if not kappa_dt > 0:
        raise ValueError("kappa*dt must be positive")
    u = alpha * np.exp(-1j * theta)
    k = math.sqrt(2 * kappa_dt)
    signal = np.asarray(signal, dtype=float)
    expo = (-0.5 * (signal - k * u.real) ** 2 + 1j * signal * k * u.imag
            - 1j * kappa_dt * u.real * u.imag)
    return np.exp(expo) / np.pi ** 0.25


def measurement_config(p, theta):
    gamma, _ = dephasing_and_stark(p)
    return GaussianMeasurementConfig(gamma, p.dt, theta)


def rescale_result(signal, theta, p):
    """``r = I/sqrt(Gamma dt) + (kappa/2chi) sin theta``."""
    p.require_informative()
    gamma, _ = dephasing_and_stark(p)
    return np.asarray(signal) / math.sqrt(gamma * p.dt) + np.sin(theta) / p.x


def result_to_signal(r, theta, p):
    """Inverse of ``rescale_result``."""
    p.require_informative()
    gamma, _ = dephasing_and_stark(p)
    return math.sqrt(gamma * p.dt) * (np.asarray(r) - np.sin(theta) / p.x)


def readout_distribution(state, theta, p):
    """Density of ``r`` for ``state``: two Gaussians at ``+-cos theta``, variance ``1/(2 Gamma dt)``."""
    S = state.vector if isinstance(state, BlochState) else np.asarray(state, dtype=float)
    cfg = measurement_config(p, theta)
    return lambda r: record_density(r, S, cfg)


def amplitude_kraus(r, theta, p):
    """Kraus operator ``(Gamma dt)^(1/4) diag(<I|a_+>, <I|a_->)`` at result ``r``."""
    gamma, _ = dephasing_and_stark(p)
    plus, minus, _ = steady_states(p)
    signal = result_to_signal(r, theta, p)
    kdt = p.kappa * p.dt
    ap = collapse_amplitude(signal, theta, plus, kdt)
    am = collapse_amplitude(signal, theta, minus, kdt)
    scale = (gamma * p.dt) ** 0.25
    return pauli.coeffs(scale * (ap + am) / 2, 0, 0, scale * (ap - am) / 2)


def mean_likelihood_complex(r, theta, p):
    """``pbar(r, theta)`` including the state-independent phase ``-2 dt wbar``."""
    gamma, stark = dephasing_and_stark(p)
    k = gamma * p.dt
    wbar = stark * r * math.cos(theta) - gamma / 4 * (1 + 1 / p.x ** 2) * math.sin(2 * theta)
    return math.sqrt(k / math.pi) * np.exp(-k * (r * r + math.cos(theta) ** 2) - 2j * p.dt * wbar)


def stark_rotation(p):
    """``exp(i w_S dt sz/2)``."""
    _, stark = dephasing_and_stark(p)
    return pauli.exp_pauli(0.0, np.array([0, 0, 1j * stark * p.dt]))


def effective_measurement_op(r, theta, p, keep_stark=False):
    """Factor the amplitude Kraus operator into scale, Stark phase and boost.

    Returns ``(|pbar|, w_S dt, R)`` after confirming
    ``M_r = sqrt(pbar) exp(i w_S dt sz/2) R_{r,theta}`` to 1e-10.  With
    ``keep_stark`` the returned operator includes the Stark rotation,
    otherwise the rotating frame absorbs it.
    """
    _, stark = dephasing_and_stark(p)
    pbar = mean_likelihood_complex(r, theta, p)
    R = gaussian_measurement_op(r, measurement_config(p, theta))
    rot = stark_rotation(p)
    rebuilt = np.sqrt(pbar) * pauli.mul(rot, R)
    direct = amplitude_kraus(r, theta, p)
    err = float(np.max(np.abs(rebuilt - direct)))
    if err > FACTOR_CHECK_TOL * max(1.0, float(np.max(np.abs(direct)))):
        raise ArithmeticError(f"Kraus factorization residual {err:.3e}")
    op = pauli.mul(rot, R) if keep_stark else R
    return float(abs(pbar)), stark * p.dt, op


def sample_result(state, theta, p, rng):
    """Draw ``(signal, r)`` for one detector bin."""
    r = sample_readout(state, measurement_config(p, theta), rng)
    return float(result_to_signal(r, theta, p)), r


@dataclass
class Alignment:
    interaction: np.ndarray
    choice: np.ndarray
    observation: np.ndarray
    theta: np.ndarray


def delayed_choice_schedule(theta, delay_q, delay_r, grid):
    """Pair each interaction time with the later choice and observation.

    The record observed at ``t + delay_r`` used the quadrature chosen at
    ``t`` and acts on the qubit at ``t - delay_q``; here indexed by the
    interaction times in ``grid``.
    """
    if delay_q < 0 or delay_r < 0:
        raise ValueError("delays must be non-negative")
    grid = np.asarray(grid, dtype=float)
    choice = grid + delay_q
    return Alignment(grid, choice, choice + delay_r, np.asarray(theta(choice), dtype=float))


class DelayLine:
    """Pending records ordered by interaction time, released at observation time.

    Capacity is ``ceil((delay_q + delay_r)/dt) + 1`` bins: a bin pushed at
    interaction time ``t`` is always observable by ``t + delay_q + delay_r``.
    """

    def __init__(self, delay_q, delay_r, dt):
        self.delay = delay_q + delay_r
        self.capacity = int(math.ceil(self.delay / dt - 1e-9)) + 1
        self._queue = deque()

    def push(self, sample):
        if len(self._queue) >= self.capacity:
            raise OverflowError("delay line overfull; release observed samples first")
        self._queue.append(sample)

    def release(self, now):
        """Samples whose observation time is at or before ``now``, in order."""
        out = []
        while self._queue and self._queue[0].observation_time <= now + 1e-12:
            out.append(self._queue.popleft())
        return out

    def drain(self):
        out = list(self._queue)
        self._queue.clear()
        return out

    def __len__(self):
        return len(self._queue)

"""Vectorized per-step kernels shared by single trajectories and ensembles.

Every trajectory draws its noise from its own counter-based stream keyed by
``(seed, stream, index)``, so results do not depend on how trajectories are
batched.  States are ``(N, 4)`` real arrays plus an ``(N,)`` log scale.
"""
from dataclasses import dataclass
import math

import numpy as np

from .. import pauli
from ..readout import dephasing_and_stark, stark_rotation
from ..states import RESCALE_HIGH, RESCALE_LOW
from ..stochastic import sme_advance, implied_record
from .config import InvariantError, NumericError

Z = np.array([0.0, 0.0, 1.0])
# det >= -tol*s0^2 matches the |S| <= 1 + 1e-8 bound on integrated trajectories
LIGHTCONE_TOL = 2e-8


def trajectory_rng(seed, index, stream=0):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(stream, index))))


def n_channels(cfg):
    if cfg.mode != 'charge-field' or cfg.noise == 'none':
        return 0
    if cfg.noise == 'theta':
        return 1
    return len(cfg.noise)


def draw_noise(cfg, indices, stream=0):
    """Pre-draw each trajectory's uniforms and normals, stacked along axis 0."""
    n = cfg.n_steps
    u, z = [], []
    for i in indices:
        rng = trajectory_rng(cfg.seed, int(i), stream)
        if cfg.mode in ('exact', 'readout'):
            u.append(rng.random(n))
            z.append(rng.standard_normal(n))
        elif cfg.mode == 'sme':
            z.append(rng.standard_normal(n))
        else:
            z.append(rng.standard_normal((n, max(n_channels(cfg), 1))))
    return (np.array(u) if u else None), np.array(z)


def initial_state(cfg, count):
    init = np.asarray(cfg.initial, dtype=float)
    if init.shape == (3,):
        init = np.concatenate([[0.5], init / 2])
    return np.tile(init, (count, 1)), np.zeros(count)


@dataclass
class StepOutput:
    theta: np.ndarray
    r: np.ndarray
    dW: np.ndarray
    extra: dict


def _sandwich_real(R, s):
    return pauli.sandwich(R, s.astype(complex)).real


def _check(s, k):
    if not np.all(np.isfinite(s)):
        raise NumericError(f"non-finite state at step {k}")
    if np.any(s[:, 0] <= 0):
        raise InvariantError(f"s0 lost positivity at step {k}")
    det = s[:, 0] ** 2 - np.sum(s[:, 1:] ** 2, axis=1)
    if np.any(det < -LIGHTCONE_TOL * s[:, 0] ** 2):
        raise InvariantError(f"state left the lightcone at step {k}")


def rescale(s, ell):
    s0 = s[:, 0]
    mask = (s0 > RESCALE_HIGH) | (s0 < RESCALE_LOW)
    if np.any(mask):
        s = s.copy()
        ell = ell.copy()
        ell[mask] += np.log(s0[mask])
        s[mask] /= s0[mask, None]
    return s, ell


class Stepper:
    """Advances an ``(N, 4)`` batch one grid step in the configured mode."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.dt = cfg.dt
        self.theta = cfg.theta_schedule()
        self.extra_columns = ()
        if cfg.mode == 'readout':
            self.params = cfg.readout_params()
            self.gamma, self.stark = dephasing_and_stark(self.params)
            self.rot = stark_rotation(self.params) if cfg.keep_stark else None
            self.extra_columns = ('choice_t', 'obs_t', 'signal')
        else:
            self.gamma = cfg.gamma
        if cfg.mode == 'charge-field':
            self.f = cfg.g * (np.asarray(cfg.field_e, float) + 1j * np.asarray(cfg.field_b, float))
            if isinstance(cfg.noise, list):
                self.channels = [(np.asarray(ch.get('re', [0, 0, 0]), float)
                                  + 1j * np.asarray(ch.get('im', [0, 0, 0]), float),
                                  float(ch.get('rate', 1.0))) for ch in cfg.noise]
            else:
                self.channels = []

    def theta_at(self, t):
        if self.cfg.mode in ('readout',) or (self.cfg.mode == 'charge-field' and self.cfg.noise == 'theta'):
            return float(self.theta(t + self.cfg.delay_q))
        if self.cfg.mode == 'charge-field':
            return math.nan
        return float(self.theta(t))

    def step(self, k, s, ell, u, z):
        mode = self.cfg.mode
        t = k * self.dt
        if mode in ('exact', 'readout'):
            return self._measure(t, s, ell, u, z)
        if mode == 'sme':
            return self._sme(t, s, ell, z)
        return self._charge(t, s, ell, z)

    def _measure(self, t, s, ell, u, z):
        dt, gamma = self.dt, self.gamma
        th = self.theta_at(t)
        c = math.cos(th)
        Sz = s[:, 3] / s[:, 0]
        sign = np.where(u < (1 + Sz) / 2, 1.0, -1.0)
        r = sign * c + z / math.sqrt(2 * gamma * dt)
        zeta = 2 * gamma * dt * r * np.exp(-1j * th)
        R = pauli.exp_pauli(0.0, zeta[:, None] * Z)
        if self.cfg.mode == 'readout' and self.rot is not None:
            R = pauli.mul(self.rot, R)
        s = _sandwich_real(R, s)
        k = gamma * dt
        ell = ell + 0.5 * math.log(k / math.pi) - k * (r * r + c * c)
        dW = math.sqrt(2 * gamma) * (dt * r - c * Sz * dt)
        extra = {}
        if self.cfg.mode == 'readout':
            p = self.params
            choice = t + p.delay_q
            signal = math.sqrt(gamma * dt) * (r - math.sin(th) / p.x)
            extra = {'choice_t': np.full_like(r, choice), 'obs_t': np.full_like(r, choice + p.delay_r),
                     'signal': signal}
        return s, ell, StepOutput(np.full_like(r, th), r, dW, extra)

    def _sme(self, t, s, ell, z):
        dt, gamma = self.dt, self.gamma
        th = self.theta_at(t)
        S = s[:, 1:] / s[:, :1]
        dW = math.sqrt(dt) * z
        r = implied_record(S, th, gamma, dW, dt)
        S = sme_advance(S, th, gamma, dW, dt)
        s = np.concatenate([np.full((len(S), 1), 0.5), S / 2], axis=1)
        return s, np.zeros_like(ell), StepOutput(np.full_like(r, th), r, dW, {})

    def _charge(self, t, s, ell, z):
        dt = self.dt
        N = len(s)
        S = s[:, 1:] / s[:, :1]
        X = np.tile(dt * self.f, (N, 1)).astype(complex)
        th = self.theta_at(t)
        dW = math.sqrt(dt) * z
        r = np.full(N, math.nan)
        if self.cfg.noise == 'theta':
            v = math.sqrt(self.gamma / 2) * np.exp(-1j * th) * Z
            X += dt * 2 * (S @ v.real)[:, None] * v + dW[:, :1] * v
            r = implied_record(S, th, self.gamma, dW[:, 0], dt)
        else:
            for j, (v, rate) in enumerate(self.channels):
                X += self.cfg.g * dW[:, j:j + 1] * v / math.sqrt(rate)
        R = pauli.exp_pauli(0.0, 2 * X)
        s = _sandwich_real(R, s)
        first = dW[:, 0] if self.channels or self.cfg.noise == 'theta' else np.zeros(N)
        return s, ell, StepOutput(np.full(N, th), r, first, {})


def run_batch(cfg, indices, visit):
    """Integrate the trajectories ``indices`` and call ``visit(k, s, ell, out)``
    for every grid row (``out`` is ``None`` at row 0)."""
    u, z = draw_noise(cfg, indices)
    s, ell = initial_state(cfg, len(indices))
    stepper = Stepper(cfg)
    visit(0, s, ell, None)
    for k in range(cfg.n_steps):
        s, ell, out = stepper.step(k, s, ell, None if u is None else u[:, k], z[:, k])
        if cfg.rescale:
            s, ell = rescale(s, ell)
        _check(s, k + 1)
        visit(k + 1, s, ell, out)
    return stepper

"""Stochastic Lorentz transformations and their Ito increments.

A noise model is a deterministic field ``f_D`` (possibly velocity dependent)
plus white-noise channels ``Sigma_j = v_j.s`` with complex 3-vectors ``v_j``
and rates ``gamma_j``.  Over one step the state is sandwiched by

    R = exp(g (dt f_D + sum_j dW_j Sigma_j / sqrt(gamma_j)))

and expanding that to first order in ``dt`` gives the increments below.
Matrices are Pauli coefficient arrays (see ``pauli``); normalized states
``beta = (1 + S.s)/2`` have unit trace.
"""
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence
import math

import numpy as np

from . import pauli
from .dynamics import ComplexGenerator
from .states import UnnormalizedState, BlochState

LINEARITY_TOL = 1e-10
SME_RENORM_TOL = 1e-10


@dataclass(frozen=True)
class NoiseChannel:
    """One white-noise channel ``dt F = Sigma dW / sqrt(rate)`` with ``Sigma = v.s``."""
    v: np.ndarray
    rate: float = 1.0

    def __post_init__(self):
        v = np.asarray(self.v, dtype=complex)
        if v.shape != (3,):
            raise ValueError(f"channel vector must have 3 components, got {v.shape}")
        if not self.rate > 0:
            raise ValueError(f"channel rate must be positive, got {self.rate!r}")
        object.__setattr__(self, 'v', v)

    @classmethod
    def canonical(cls, direction, magnitude, phase=0.0, rate=1.0):
        """``Sigma = magnitude * exp(i phase) * direction.s`` with ``direction.direction = 1``."""
        d = np.asarray(direction, dtype=complex)
        dd = np.sum(d * d)
        if abs(dd - 1) > 1e-12:
            raise ValueError(f"direction must square to the identity, got d.d = {dd!r}")
        if magnitude < 0:
            raise ValueError("magnitude must be non-negative")
        return cls(magnitude * np.exp(1j * phase) * d, rate)

    @property
    def electric(self):
        return self.v.real

    @property
    def magnetic(self):
        return self.v.imag

    @property
    def square(self):
        """Scalar ``Sigma^2 = v.v = (rho exp(i phi))^2``."""
        return complex(np.sum(self.v * self.v))

    def matrix(self):
        return pauli.from_vector(0.0, self.v)


@dataclass(frozen=True)
class NoiseModel:
    """Drift field plus noise channels sharing the coupling ``g``.

    ``drift`` is a ``ComplexGenerator`` or a callable ``S -> ComplexGenerator``
    for velocity-dependent mean fields.
    """
    drift: object = None
    channels: Sequence[NoiseChannel] = field(default_factory=tuple)
    g: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, 'channels', tuple(self.channels))
        if self.drift is None:
            object.__setattr__(self, 'drift', ComplexGenerator(np.zeros(3), self.g))

    def drift_at(self, S):
        S = _bloch(S)
        gen = self.drift(S) if callable(self.drift) else self.drift
        return gen

    @classmethod
    def compensated(cls, channel, b0=(0, 0, 0), g=1.0):
        """Single channel with the velocity-dependent mean field that keeps the
        normalized mean dynamics linear (Lindblad form)."""
        b0 = np.asarray(b0, dtype=float)
        rule = lambda S: lindblad_generator(channel.electric, channel.magnetic, b0, S,
                                            g=g, rate=channel.rate)
        return cls(rule, (channel,), g)

    @classmethod
    def theta_measurement(cls, gamma, theta, compensated=True):
        """Noise reproducing a homodyne measurement of ``sz`` at quadrature ``theta``.

        ``Sigma = sqrt(gamma/2) exp(-i theta) sz`` with unit rate and ``g = 1``;
        the duality phase is ``-theta``.
        """
        ch = NoiseChannel.canonical((0, 0, 1), math.sqrt(gamma / 2), -theta)
        if compensated:
            return cls.compensated(ch)
        return cls(None, (ch,), 1.0)


def _bloch(S):
    if isinstance(S, BlochState):
        return S.vector
    if isinstance(S, UnnormalizedState):
        return S.s[1:] / S.s[0]
    return np.asarray(S, dtype=float)


def _beta(S):
    return pauli.from_vector(0.5, _bloch(S) / 2)


class NoiseDiagnostics(NamedTuple):
    energy_density: float
    poynting: np.ndarray
    invariant: complex


def noise_diagnostics(nm):
    """Per-unit-time covariances of the noise.

    ``Sigma^dag Sigma / (2 gamma) = energy + poynting.s`` and
    ``Sigma^2 / gamma = invariant``, summed over channels.  The Poynting part
    is ``-(E x B)/gamma`` for ``v = E + iB``.
    """
    energy, poynting, inv = 0.0, np.zeros(3), 0j
    for ch in nm.channels:
        m = pauli.mul(np.conj(ch.matrix()), ch.matrix())
        energy += float(m[0].real) / (2 * ch.rate)
        poynting = poynting + m[1:].real / (2 * ch.rate)
        inv += ch.square / ch.rate
    return NoiseDiagnostics(energy, poynting, inv)


def _dw(nm, dW):
    dW = np.atleast_1d(np.asarray(dW, dtype=float))
    if dW.shape != (len(nm.channels),):
        raise ValueError(f"need one Wiener increment per channel ({len(nm.channels)}), got {dW.shape}")
    return dW


def step_generator(nm, S, dW, dt):
    """Complex 3-vector and scalar of ``g(dt f_D + sum dW Sigma/sqrt(gamma))``."""
    gen = nm.drift_at(S)
    vec = dt * gen.f
    for w, ch in zip(_dw(nm, dW), nm.channels):
        vec = vec + w * ch.v / math.sqrt(ch.rate)
    return nm.g * vec, nm.g * dt * complex(gen.scalar)


def stochastic_step_exact(s, nm, dW, dt):
    """Group step ``s' = R s R^dag`` with the mean field evaluated at the current velocity."""
    vec, scal = step_generator(nm, s, dW, dt)
    R = pauli.exp_pauli(2 * scal, 2 * vec)
    out = pauli.from_matrix(pauli.sandwich(R, pauli.to_matrix(s.s)), tol=1e-10)
    return UnnormalizedState(out, s.log_scale, s.mc)


def _noise_matrix(nm, dW):
    a = np.zeros(4, dtype=complex)
    for w, ch in zip(_dw(nm, dW), nm.channels):
        a = a + w / math.sqrt(ch.rate) * ch.matrix()
    return a


def _double(a, s):
    # {a, {a, s}} = a^2 s + 2 a s a^dag + s a^dag^2
    ad = np.conj(a)
    return (pauli.mul(pauli.mul(a, a), s) + 2 * pauli.mul(pauli.mul(a, s), ad)
            + pauli.mul(s, pauli.mul(ad, ad)))


class Increments(NamedTuple):
    deterministic: np.ndarray
    stochastic: np.ndarray

    @property
    def total(self):
        return self.deterministic + self.stochastic


def momentum_increments(s, nm, dW, dt, ito=True):
    """First-order expansion of the exact step for the unnormalized state.

    ``ds_D = g{dt F_D, s} + (g^2/2){dt F_xi, {dt F_xi, s}}`` and
    ``ds_xi = g{dt F_xi, s}``.  With ``ito=True`` the noise products are
    replaced by their means (``dW_j dW_k -> delta_jk dt``); with
    ``ito=False`` the realized products are kept, which makes the sum
    pathwise accurate to ``O(dt^1.5)``.
    """
    g = nm.g
    v = s.s if isinstance(s, UnnormalizedState) else np.asarray(s, dtype=float)
    sm = pauli.to_matrix(v)
    gen = nm.drift_at(v[1:] / v[0])
    fd = dt * gen.matrix()
    a = _noise_matrix(nm, dW)
    ds_d = g * pauli.anticommutator(fd, sm)
    if ito:
        for ch in nm.channels:
            ds_d = ds_d + g * g / 2 * dt / ch.rate * _double(ch.matrix(), sm)
    else:
        ds_d = ds_d + g * g / 2 * _double(a, sm)
    ds_xi = g * pauli.anticommutator(a, sm)
    return Increments(pauli.from_matrix(ds_d, tol=1e-9), pauli.from_matrix(ds_xi, tol=1e-9))


def _innovation(x, beta):
    # {x, beta} - Tr({x, beta}) beta
    y = pauli.anticommutator(x, beta)
    return y - pauli.trace(y) * beta


def _dissipation(a, beta):
    # a beta a^dag - Tr(a beta a^dag) beta
    y = pauli.sandwich(a, beta)
    return y - pauli.trace(y) * beta


def renormalized_drift(S, nm, dt, dW=None):
    """``dt F_D' = dt F_D - g Tr((dt F_xi + dt F_xi^dag) beta) dt F_xi``.

    Without ``dW`` the Ito mean ``sum_j t_j Sigma_j dt/gamma_j`` is used.
    """
    beta = _beta(S)
    fd = dt * nm.drift_at(S).matrix()
    if dW is None:
        for ch in nm.channels:
            t = pauli.trace(pauli.anticommutator(ch.matrix(), beta))
            fd = fd - nm.g * t * dt / ch.rate * ch.matrix()
        return fd
    a = _noise_matrix(nm, dW)
    t = pauli.trace(pauli.anticommutator(a, beta))
    return fd - nm.g * t * a


def velocity_increments(S, nm, dW, dt, ito=True):
    """Increments of the normalized state ``beta`` (four-vectors, zero trace part).

    ``dbeta_xi = g({dt F_xi, beta} - Tr({dt F_xi, beta}) beta)``;
    ``dbeta_D`` applies the same projection to the renormalized drift and adds
    the dephasing-like ``g^2 (dt F_xi beta dt F_xi^dag - Tr(.) beta)``.  The
    Bloch increment is twice the vector part.
    """
    g = nm.g
    beta = _beta(S)
    a = _noise_matrix(nm, dW)
    d_xi = g * _innovation(a, beta)
    if ito:
        d_d = g * _innovation(renormalized_drift(S, nm, dt), beta)
        for ch in nm.channels:
            d_d = d_d + g * g * dt / ch.rate * _dissipation(ch.matrix(), beta)
    else:
        d_d = g * _innovation(renormalized_drift(S, nm, dt, dW), beta) + g * g * _dissipation(a, beta)
    return Increments(pauli.from_matrix(d_d, tol=1e-9), pauli.from_matrix(d_xi, tol=1e-9))


def bloch_increment(inc):
    """Total ``dS`` from a pair of normalized-state increments."""
    return 2 * inc.total[1:]


def lindblad_generator(e_xi, b_xi, b0, S, g=1.0, rate=1.0):
    """Velocity-dependent mean field compensating the noise-induced boost.

    ``f_D = i b0 + (2g/rate)(e_xi.S)(e_xi + i b_xi)``: the electric part
    cancels the mean boost exactly and the magnetic part makes the
    renormalized drift independent of the velocity.
    """
    e_xi = np.asarray(e_xi, dtype=float)
    b_xi = np.asarray(b_xi, dtype=float)
    k = 2 * g * float(np.dot(e_xi, _bloch(S))) / rate
    f = 1j * np.asarray(b0, dtype=float) + k * (e_xi + 1j * b_xi)
    return ComplexGenerator(f, g)


def lindblad_mean_map(S, b0, channels, g=1.0):
    """``dbeta/dt = i g[B0, beta] + g^2 sum (Sigma beta Sigma^dag - {Sigma^dag Sigma, beta}/2)/gamma``."""
    beta = _beta(S)
    B0 = pauli.from_vector(0.0, np.asarray(b0, dtype=float))
    out = 1j * g * (pauli.mul(B0, beta) - pauli.mul(beta, B0))
    for ch in channels:
        sig = ch.matrix()
        sds = pauli.mul(np.conj(sig), sig)
        out = out + g * g / ch.rate * (pauli.sandwich(sig, beta)
                                       - 0.5 * (pauli.mul(sds, beta) + pauli.mul(beta, sds)))
    return pauli.from_matrix(out, tol=1e-9)


def mean_velocity_rate(S, nm):
    """Ito mean ``dbeta_D/dt`` of the normalized state, as a four-vector."""
    return velocity_increments(S, nm, np.zeros(len(nm.channels)), 1.0).deterministic


@dataclass
class ConstraintReport:
    passed: bool
    poynting: float       # |E_xi x B_xi|
    electric: float       # max |Hermitian part of F_D'| over the grid
    magnetic: float       # spread of the anti-Hermitian part of F_D' over the grid
    affinity: float       # max deviation of the mean map from affinity
    tol: float = LINEARITY_TOL


def check_linearity_constraints(nm, betas=None, rng=None, pairs=64, tol=LINEARITY_TOL):
    """Test the conditions under which the normalized mean dynamics is linear.

    Checks (i) vanishing noise Poynting vector, (ii) vanishing Hermitian part
    of the renormalized drift, (iii) velocity-independent anti-Hermitian part,
    then directly tests affinity of the mean map on random convex pairs.
    """
    if len(nm.channels) > 1:
        raise ValueError("linearity constraints are defined for single-channel noise")
    rng = np.random.default_rng(0) if rng is None else rng
    if betas is None:
        betas = _ball_points(rng, 32)
    betas = [_bloch(b) for b in betas]

    poynting = 0.0
    if nm.channels:
        ch = nm.channels[0]
        poynting = float(np.linalg.norm(np.cross(ch.electric, ch.magnetic)))

    fds = np.array([renormalized_drift(S, nm, 1.0) for S in betas])
    electric = float(np.max(np.abs(fds.real)))
    magnetic = float(np.max(np.abs(fds.imag - fds.imag[0])))

    affinity = 0.0
    for _ in range(pairs):
        b1, b2 = _ball_points(rng, 2)
        a = rng.random()
        lhs = mean_velocity_rate(a * b1 + (1 - a) * b2, nm)
        rhs = a * mean_velocity_rate(b1, nm) + (1 - a) * mean_velocity_rate(b2, nm)
        affinity = max(affinity, float(np.max(np.abs(lhs - rhs))))

    passed = max(poynting, electric, magnetic, affinity) <= tol
    return ConstraintReport(passed, poynting, electric, magnetic, affinity, tol)


def _ball_points(rng, n):
    x = rng.standard_normal((n, 3))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return x * rng.random((n, 1)) ** (1 / 3)


def drifting_momentum(p, channel, b0, g=1.0):
    """Mean momentum drift per unit time under the compensated noise (matrix route).

    ``g{f_D(beta), p} + (g^2/2 gamma){Sigma, {Sigma, p}}`` with the
    velocity-dependent ``f_D`` of ``lindblad_generator``.
    """
    p = np.asarray(p, dtype=float)
    gen = lindblad_generator(channel.electric, channel.magnetic, b0, p[1:] / p[0], g, channel.rate)
    pm = pauli.to_matrix(p)
    out = g * pauli.anticommutator(gen.matrix(), pm)
    out = out + g * g / (2 * channel.rate) * _double(channel.matrix(), pm)
    return pauli.from_matrix(out, tol=1e-9)


def drifting_momentum_components(p, channel, b0, g=1.0):
    """Component form of ``drifting_momentum`` (``e``, ``b`` are the channel's
    real and imaginary parts, ``tau = 1/gamma``)."""
    p = np.asarray(p, dtype=float)
    p0, pv = p[0], p[1:]
    e, b = channel.electric, channel.magnetic
    b0 = np.asarray(b0, dtype=float)
    tau = 1.0 / channel.rate
    ep = float(np.dot(e, pv))
    d0 = 4 * g * g * ep ** 2 / p0 * tau + 2 * g * g * (p0 * np.dot(e, e) - np.dot(pv, np.cross(e, b))) * tau
    dv = (2 * g * np.cross(pv, b0)
          + 4 * g * g * ep / p0 * np.cross(pv, b) * tau
          + 6 * g * g * ep * e * tau
          + 2 * g * g * (p0 * np.cross(e, b) + np.dot(b, pv) * b - np.dot(b, b) * pv) * tau)
    return np.concatenate([[d0], dv])


def ito_sme_step(S, theta, gamma, dW, dt):
    """Ito increment of the Bloch vector under homodyne monitoring of ``sz``.

    Dephasing of ``(Sx, Sy)`` at rate ``gamma`` plus the innovation
    ``sqrt(2 gamma) dW`` weighted by ``cos theta`` (collapse toward ``+-z``)
    and ``sin theta`` (phase kick about ``z``).  The implied record is
    ``r dt = cos(theta) Sz dt + dW/sqrt(2 gamma)``.
    """
    S = _bloch(S)
    x, y, z = S[..., 0], S[..., 1], S[..., 2]
    c, s = np.cos(theta), np.sin(theta)
    k = np.sqrt(2 * gamma) * dW
    dx = -gamma * x * dt + k * (-c * z * x - s * y)
    dy = -gamma * y * dt + k * (-c * z * y + s * x)
    dz = k * c * (1 - z * z)
    return np.stack([dx, dy, dz], axis=-1)


def sme_advance(S, theta, gamma, dW, dt):
    """Apply ``ito_sme_step`` and pull the result back inside the Bloch ball."""
    out = _bloch(S) + ito_sme_step(S, theta, gamma, dW, dt)
    n = np.linalg.norm(out, axis=-1, keepdims=True)
    return np.where(n > 1 + SME_RENORM_TOL, out / n, out)


def implied_record(S, theta, gamma, dW, dt):
    """Record ``r`` (per unit time, dimensionless) implied by an SME increment."""
    return np.cos(theta) * _bloch(S)[..., 2] + dW / (np.sqrt(2 * gamma) * dt)

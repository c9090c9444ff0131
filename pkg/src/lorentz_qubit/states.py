"""Qubit states as four-momenta and velocity fractions.

An unnormalized state ``s = s0*1 + s.sigma`` is a real four-vector: ``s0`` is
half its trace and ``det s = s0^2 - |s|^2`` is its invariant mass squared.
Normalizing gives the Bloch vector ``S = s/s0``, the charge's ``v/c``.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from . import pauli

RESCALE_HIGH = 1e6
RESCALE_LOW = 1e-6
LIGHTCONE_TOL = 1e-10
BLOCH_TOL = 1e-10


class UnphysicalStateError(ValueError):
    pass


@dataclass(frozen=True)
class BlochState:
    vector: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=float)
        if v.shape != (3,):
            raise ValueError(f"Bloch vector must have 3 components, got {v.shape}")
        n = float(np.linalg.norm(v))
        if n > 1 + BLOCH_TOL:
            raise UnphysicalStateError(f"|S| = {n!r} exceeds 1")
        if n > 1:
            v = v / n
        object.__setattr__(self, 'vector', v)

    @property
    def norm(self):
        return float(np.linalg.norm(self.vector))

    def populations(self, axis=(0.0, 0.0, 1.0)):
        """Probabilities of the +/- eigenstates of ``axis.sigma``."""
        proj = float(np.dot(self.vector, np.asarray(axis, dtype=float)))
        return (1 + proj) / 2, (1 - proj) / 2

    def density_matrix(self):
        """Pauli coefficients of ``rho = (1 + S.sigma)/2``."""
        return pauli.from_vector(0.5, self.vector / 2)

    def to_unnormalized(self, log_scale=0.0):
        return UnnormalizedState(np.concatenate([[0.5], self.vector / 2]), log_scale)


@dataclass(frozen=True)
class UnnormalizedState:
    """Four-vector ``(s0, s1, s2, s3)`` plus the factored-out log scale.

    ``log_scale`` accumulates ``ln pbar`` from measurement updates and the
    logarithm of any gauge rescaling, so ``exp(log_scale) * trace`` stays the
    (relative) record probability.  ``mc`` is display metadata for the charge
    reading and plays no role in the dynamics.
    """
    s: np.ndarray
    log_scale: float = 0.0
    mc: float = field(default=None, compare=False)

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        if s.shape != (4,):
            raise ValueError(f"state must have 4 components, got {s.shape}")
        if not s[0] > 0:
            raise UnphysicalStateError(f"s0 = {s[0]!r} must be positive")
        d = s[0] ** 2 - np.dot(s[1:], s[1:])
        if d < -LIGHTCONE_TOL * s[0] ** 2:
            raise UnphysicalStateError(f"state is outside the lightcone (det = {d!r})")
        object.__setattr__(self, 's', s)

    @classmethod
    def from_bloch(cls, vector, log_scale=0.0):
        return BlochState(vector).to_unnormalized(log_scale)

    @property
    def s0(self):
        return float(self.s[0])

    @property
    def trace(self):
        return 2 * float(self.s[0])

    def matrix(self):
        return pauli.to_matrix(self.s)

    def rescaled(self):
        """Apply the global-scale gauge when ``s0`` leaves [1e-6, 1e6]."""
        s0 = self.s[0]
        if RESCALE_LOW <= s0 <= RESCALE_HIGH:
            return self
        return UnnormalizedState(self.s / s0, self.log_scale + math.log(s0), self.mc)


def _components(s):
    if isinstance(s, UnnormalizedState):
        return s.s
    if isinstance(s, BlochState):
        return np.concatenate([[1.0], s.vector])
    return np.asarray(s, dtype=float)


def normalize(s):
    """Velocity fraction / Bloch vector ``S = s/s0``."""
    v = _components(s)
    if not v[0] > 0:
        raise UnphysicalStateError(f"degenerate state: s0 = {v[0]!r}")
    S = v[1:] / v[0]
    n = float(np.linalg.norm(S))
    if n > 1 + BLOCH_TOL:
        raise UnphysicalStateError(f"superluminal state: |s|/s0 = {n!r}")
    return BlochState(S)


def linear_entropy(s):
    """Return ``(det s, S_L)`` with ``S_L = det s / s0^2 = 2(1 - Tr rho^2)``."""
    v = _components(s)
    if not v[0] > 0:
        raise UnphysicalStateError(f"degenerate state: s0 = {v[0]!r}")
    d = float(v[0] ** 2 - np.dot(v[1:], v[1:]))
    return d, d / v[0] ** 2


def linear_cross_entropy(a, b):
    """Minkowski product ``<a, b> = a0 b0 S_L(rho_a, rho_b)``."""
    va, vb = _components(a), _components(b)
    if not (va[0] > 0 and vb[0] > 0):
        raise UnphysicalStateError("cross entropy needs positive s0 on both states")
    return float(va[0] * vb[0] - np.dot(va[1:], vb[1:]))


@dataclass
class Worldline:
    """Cumulative trajectory ``phi(t_n) = 2 sum rho dt`` and its running mean."""
    t: np.ndarray
    position: np.ndarray     # (n, 4) four-vectors; time component equals t
    samples: np.ndarray      # (n, 3) Bloch vectors
    mean: np.ndarray         # (n, 3) time-averaged Bloch vectors


def accumulate_worldline(samples, dt, rule='left'):
    """Integrate Bloch samples taken on the grid ``t_i = i*dt``.

    ``rule='left'`` is a left Riemann sum (the forward-difference convention
    used for stochastic runs); ``'trapezoid'`` suits smooth deterministic runs.
    The running mean at ``t_0`` is the first sample.
    """
    S = np.asarray([x.vector if isinstance(x, BlochState) else x for x in samples],
                   dtype=float)
    if S.ndim != 2 or S.shape[0] == 0 or S.shape[1] != 3:
        raise ValueError("need at least one 3-component Bloch sample")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    n = S.shape[0]
    four = np.concatenate([np.ones((n, 1)), S], axis=1)
    if rule == 'left':
        steps = four[:-1] * dt
    elif rule == 'trapezoid':
        steps = 0.5 * (four[:-1] + four[1:]) * dt
    else:
        raise ValueError(f"unknown quadrature rule {rule!r}")
    pos = np.zeros((n, 4))
    pos[1:] = np.cumsum(steps, axis=0)
    mean = np.empty_like(S)
    mean[0] = S[0]
    mean[1:] = pos[1:, 1:] / pos[1:, :1]
    return Worldline(t=np.arange(n) * dt, position=pos, samples=S, mean=mean)

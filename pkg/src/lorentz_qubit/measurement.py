"""Discrete generalized measurements of a qubit along a fixed axis.

Two-outcome detector likelihoods give a Kraus operator that factors into a
mean likelihood ``pbar`` (pure scale) and a hyperbolic boost of rapidity set
by the log Bayes factor ``lam``.  Gaussian readouts with quadrature angle
``theta`` generalize the boost to a complex angle, so ``theta = pi/2`` gives
a pure phase kick.
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy.integrate import simpson

from . import pauli
from .states import BlochState, UnnormalizedState, normalize

Z_AXIS = np.array([0.0, 0.0, 1.0])
QUADRATURE_SIGMAS = 8.0
QUADRATURE_NODES = 10001


class ImpossibleOutcomeError(ValueError):
    pass


def _unit_axis(axis):
    n = np.asarray(axis, dtype=float)
    if n.shape != (3,):
        raise ValueError(f"axis must be a 3-vector, got shape {n.shape}")
    norm = np.linalg.norm(n)
    if not norm > 0:
        raise ValueError("axis must be nonzero")
    return n / norm


@dataclass(frozen=True)
class DetectorLikelihoods:
    """``p(r|0)`` and ``p(r|1)`` evaluated at the observed outcome."""
    p0: float
    p1: float

    def __post_init__(self):
        for name in ('p0', 'p1'):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and non-negative, got {v!r}")
        if self.p0 == 0 and self.p1 == 0:
            raise ValueError("likelihoods cannot both vanish")


@dataclass(frozen=True)
class MeasurementDecomposition:
    mean_likelihood: float
    surprisal: float        # ln p(r|0)/p(r|1); +-inf marks a projective outcome

    @classmethod
    def from_likelihoods(cls, lk):
        a, b = lk.p0, lk.p1
        if b == 0:
            lam = math.inf
        elif a == 0:
            lam = -math.inf
        else:
            lam = math.log(a / b)
        return cls(math.sqrt(a * b), lam)

    @property
    def finite(self):
        return math.isfinite(self.surprisal)


@dataclass(frozen=True)
class GaussianMeasurementConfig:
    gamma: float
    dt: float
    theta: float = 0.0
    axis: tuple = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        object.__setattr__(self, 'axis', tuple(_unit_axis(self.axis)))

    @property
    def strength(self):
        """``Gamma*dt``: the inverse variance scale of the record."""
        return self.gamma * self.dt

    @property
    def sigma(self):
        """Record standard deviation ``1/sqrt(2 Gamma dt)``."""
        return 1.0 / math.sqrt(2 * self.strength)


def kraus_from_likelihoods(lk, axis=Z_AXIS):
    """Kraus operator ``sqrt(p0)|0><0| + sqrt(p1)|1><1|`` along ``axis``.

    For finite ``lam`` the factorization ``M = sqrt(pbar) exp(lam n.s/4)`` is
    checked before returning.
    """
    n = _unit_axis(axis)
    ra, rb = math.sqrt(lk.p0), math.sqrt(lk.p1)
    m = pauli.from_vector((ra + rb) / 2, n * (ra - rb) / 2)
    decomp = MeasurementDecomposition.from_likelihoods(lk)
    if decomp.finite:
        factored = math.sqrt(decomp.mean_likelihood) * pauli.exp_pauli(0.0, n * decomp.surprisal / 2)
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(factored - m)) > 1e-12 * scale:
            raise ArithmeticError("Kraus factorization check failed")
    return m, decomp


def _density(state):
    if isinstance(state, BlochState):
        S = state.vector
    else:
        S = normalize(state).vector
    return pauli.from_vector(0.5, S / 2)


def bayes_update(state, m):
    """Posterior ``M rho M^dag / p`` and Born probability ``p = Tr(M rho M^dag)``."""
    m = np.asarray(m, dtype=complex)
    if not np.all(np.isfinite(m)):
        raise ValueError("Kraus operator must be finite")
    out = pauli.from_matrix(pauli.sandwich(m, _density(state)), tol=1e-10)
    p = 2 * out[0]
    if not p > 0:
        raise ImpossibleOutcomeError("outcome has zero probability for this state")
    return normalize(out), float(p)


def linear_update(s, decomp, axis=Z_AXIS):
    """Apply the minimal boost ``L = exp(lam n.s/4)`` and bank ``ln pbar``.

    The returned state is not renormalized, so ``exp(log_scale) * Tr(s')``
    (relative to the same quantity before the update) is the outcome
    probability.
    """
    if not decomp.finite:
        raise ValueError("infinite surprisal is projective; use bayes_update")
    n = _unit_axis(axis)
    L = pauli.exp_pauli(0.0, n * decomp.surprisal / 2)
    s_new = pauli.from_matrix(pauli.sandwich(L, pauli.to_matrix(s.s)), tol=1e-10)
    return UnnormalizedState(s_new, s.log_scale + math.log(decomp.mean_likelihood), s.mc)


def record_probability(final, initial):
    """Probability of the records applied between two states of one trajectory."""
    return math.exp(final.log_scale - initial.log_scale) * final.trace / initial.trace


def complex_angle(r, cfg):
    """``zeta = 2 Gamma dt r exp(-i theta)``."""
    return 2 * cfg.strength * np.asarray(r) * np.exp(-1j * cfg.theta)


def gaussian_measurement_op(r, cfg):
    """SL(2,C) backaction ``R = exp(zeta n.s/2)`` of a Gaussian record ``r``."""
    zeta = complex_angle(r, cfg)
    return pauli.exp_pauli(0.0, zeta[..., None] * np.asarray(cfg.axis))


def gaussian_mean_likelihood(r, cfg):
    """``pbar(r) = sqrt(Gamma dt/pi) exp(-Gamma dt (r^2 + cos^2 theta))``."""
    k = cfg.strength
    r = np.asarray(r, dtype=float)
    return np.sqrt(k / np.pi) * np.exp(-k * (r ** 2 + np.cos(cfg.theta) ** 2))


def gaussian_kraus(r, cfg):
    """Full Kraus operator ``sqrt(pbar) R`` for a Gaussian record."""
    return np.sqrt(gaussian_mean_likelihood(r, cfg))[..., None] * gaussian_measurement_op(r, cfg)


def record_density(r, S, cfg):
    """Mixture density of the record given Bloch vector ``S``."""
    k = cfg.strength
    c = math.cos(cfg.theta)
    up = (1 + float(np.dot(S, cfg.axis))) / 2
    r = np.asarray(r, dtype=float)
    return np.sqrt(k / np.pi) * (up * np.exp(-k * (r - c) ** 2)
                                 + (1 - up) * np.exp(-k * (r + c) ** 2))


def sample_readout(state, cfg, rng):
    """Draw one record from the two-Gaussian mixture for ``state``."""
    S = state.vector if isinstance(state, BlochState) else normalize(state).vector
    up = (1 + float(np.dot(S, cfg.axis))) / 2
    sign = 1.0 if rng.random() < up else -1.0
    return sign * math.cos(cfg.theta) + cfg.sigma * rng.standard_normal()


def record_grid(cfg, nodes=QUADRATURE_NODES):
    """Quadrature nodes covering both mixture components to +-8 sigma."""
    half = abs(math.cos(cfg.theta)) + QUADRATURE_SIGMAS * cfg.sigma
    return np.linspace(-half, half, nodes)


def average_backaction(state, cfg, nodes=QUADRATURE_NODES):
    """Ensemble map ``int M_r rho M_r^dag dr`` by Simpson quadrature.

    Returns the real four-vector of the averaged (trace-one) density matrix.
    """
    r = record_grid(cfg, nodes)
    M = gaussian_kraus(r, cfg)
    out = pauli.sandwich(M, _density(state)[None, :])
    return simpson(out, x=r, axis=0).real


def compose_sequence(ops, state=None, mean_likelihoods=None):
    """Right-to-left product ``R_n ... R_1`` and the joint record probability.

    ``ops`` are listed in time order.  With a ``state`` the joint probability
    ``prod(pbar_i) Tr(R rho R^dag)`` is returned as well (``pbar_i`` default 1).
    """
    ops = [np.asarray(op, dtype=complex) for op in ops]
    if not ops:
        raise ValueError("need at least one operator")
    prod = ops[0]
    for op in ops[1:]:
        prod = pauli.mul(op, prod)
    if state is None:
        return prod, None
    weight = 1.0 if mean_likelihoods is None else float(np.prod(mean_likelihoods))
    out = pauli.sandwich(prod, _density(state))
    return prod, weight * float(2 * out[0].real)

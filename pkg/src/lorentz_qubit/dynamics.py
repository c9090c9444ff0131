"""Deterministic Lorentz-force dynamics of qubit states.

A complex field ``f = e + i b`` (electric part real, magnetic part imaginary)
generates ``s -> R s R^dag`` with ``R = exp(g dt f.s)``.  Magnetic parts
rotate the Bloch vector, electric parts boost it toward ``e``.
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import pauli
from .states import UnnormalizedState, BlochState

PURE_TOL = 1e-8
EXCEPTIONAL_TOL = 1e-12


@dataclass(frozen=True)
class ComplexGenerator:
    """Riemann-Silberstein field ``f = e + i b`` with coupling ``g``.

    ``scalar`` is an optional complex identity component; its real part
    rescales the trace and its imaginary part is a global phase.
    """
    f: np.ndarray
    g: float = 1.0
    scalar: complex = 0.0

    def __post_init__(self):
        f = np.asarray(self.f, dtype=complex)
        if f.shape != (3,):
            raise ValueError(f"field must be a complex 3-vector, got shape {f.shape}")
        object.__setattr__(self, 'f', f)

    @classmethod
    def from_fields(cls, e=(0, 0, 0), b=(0, 0, 0), g=1.0, scalar=0.0):
        return cls(np.asarray(e, dtype=float) + 1j * np.asarray(b, dtype=float), g, scalar)

    @property
    def e(self):
        return self.f.real

    @property
    def b(self):
        return self.f.imag

    def matrix(self):
        return pauli.from_vector(self.scalar, self.f)


def propagator(gen, dt):
    """``exp(g dt (scalar + f.s))`` in coefficient form."""
    return pauli.exp_pauli(2 * gen.g * dt * gen.scalar, 2 * gen.g * dt * gen.f)


def step_deterministic(s, gen, dt):
    """Exact group step ``s' = R s R^dag``; negative ``dt`` runs backwards."""
    R = propagator(gen, dt)
    out = pauli.from_matrix(pauli.sandwich(R, pauli.to_matrix(s.s)), tol=1e-10)
    return UnnormalizedState(out, s.log_scale, s.mc)


def momentum_rates(s, gen):
    """``d s/dt = g (F s + s F^dag)`` as a real four-vector.

    For a traceless field this is ``ds0/dt = 2g e.s`` and
    ``ds/dt = 2g (s0 e + s x b)``.
    """
    v = s.s if isinstance(s, UnnormalizedState) else np.asarray(s, dtype=float)
    e, b, g = gen.e, gen.b, gen.g
    d0 = 2 * g * np.dot(e, v[1:])
    dv = 2 * g * (v[0] * e + np.cross(v[1:], b))
    return np.concatenate([[d0], dv]) + 2 * g * complex(gen.scalar).real * v


def velocity_rates(S, gen):
    """Normalized Lorentz acceleration ``dS/dt = 2g (e + S x b - (e.S) S)``."""
    S = S.vector if isinstance(S, BlochState) else np.asarray(S, dtype=float)
    e, b = gen.e, gen.b
    return 2 * gen.g * (e + np.cross(S, b) - np.dot(e, S) * S)


def feedback_hamiltonian(S, gen):
    """Purely magnetic generator reproducing ``gen``'s flow on a pure state.

    The electric part is traded for the state-dependent Hamiltonian
    ``H_D = -i[rho, D]`` with ``D = g e.s``; as a field this is the extra
    magnetic component ``b_eff = -H_D/g``.  Only valid when ``rho`` is a
    projector, so mixed states are rejected.
    """
    S = S.vector if isinstance(S, BlochState) else np.asarray(S, dtype=float)
    if abs(np.linalg.norm(S) - 1) > PURE_TOL:
        raise ValueError(f"feedback equivalence needs a pure state, |S| = {np.linalg.norm(S)!r}")
    rho = pauli.from_vector(0.5, S / 2)
    D = pauli.from_vector(0.0, gen.g * gen.e)
    H = -1j * (pauli.mul(rho, D) - pauli.mul(D, rho))
    b_eff = -pauli.from_matrix(H)[1:] / gen.g
    return ComplexGenerator.from_fields(b=gen.b + b_eff, g=gen.g)


class FieldClass(NamedTuple):
    kind: str           # 'elliptic' | 'parabolic' | 'hyperbolic'
    invariant: complex  # f.f = |e|^2 - |b|^2 + 2i e.b


def classify_field(gen, tol=EXCEPTIONAL_TOL):
    """Classify the generated transformation by the invariant ``I = f.f``.

    ``I`` vanishing marks an exceptional point (parabolic).  A real negative
    ``I`` has purely imaginary eigenvalues (a rotation, elliptic); anything
    else contains a boost (hyperbolic, loxodromic when ``e.b != 0``).
    """
    inv = complex(np.sum(gen.f * gen.f))
    scale = max(1.0, float(np.sum(np.abs(gen.f) ** 2)))
    if abs(inv) <= tol * scale:
        kind = 'parabolic'
    elif abs(inv.imag) <= tol * scale and inv.real < 0:
        kind = 'elliptic'
    else:
        kind = 'hyperbolic'
    return FieldClass(kind, inv)


def integrate_rates(s, field_at, t0, t1, dt):
    """RK4 on the momentum rates for a time-dependent field ``field_at(t)``."""
    v = np.asarray(s.s if isinstance(s, UnnormalizedState) else s, dtype=float)
    n = max(1, int(np.ceil((t1 - t0) / dt - 1e-12)))
    h = (t1 - t0) / n
    t = t0
    for _ in range(n):
        k1 = momentum_rates(v, field_at(t))
        k2 = momentum_rates(v + h / 2 * k1, field_at(t + h / 2))
        k3 = momentum_rates(v + h / 2 * k2, field_at(t + h / 2))
        k4 = momentum_rates(v + h * k3, field_at(t + h))
        v = v + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return v

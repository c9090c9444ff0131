"""Algebra of 2x2 complex matrices stored as Pauli coefficients.

A matrix ``m = c0*1 + c1*sx + c2*sy + c3*sz`` is held as the complex array
``(c0, c1, c2, c3)``.  Every function broadcasts over leading axes, so an
ensemble of ``N`` matrices is simply an array of shape ``(N, 4)``.

Hermitian matrices are exactly the ones with real coefficients, which makes
them four-vectors in the contravariant convention ``a^mu``; the Minkowski
product and the determinant are then the familiar ``a0*b0 - a.b`` forms.
"""
import numpy as np

SIGMA = np.array([
    [[1, 0], [0, 1]],
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)

IDENTITY = np.array([1, 0, 0, 0], dtype=complex)

HERMITIAN_TOL = 1e-12
_SMALL_PHI = 1e-4


class NotHermitianError(ValueError):
    pass


def coeffs(c0, c1=0.0, c2=0.0, c3=0.0):
    """Pack four (possibly array-valued) coefficients into a ``(..., 4)`` array."""
    return np.stack(np.broadcast_arrays(*(np.asarray(c, dtype=complex)
                                           for c in (c0, c1, c2, c3))), axis=-1)


def from_vector(c0, vec):
    """Scalar part ``c0`` plus a ``(..., 3)`` vector part."""
    vec = np.asarray(vec, dtype=complex)
    c0 = np.broadcast_to(np.asarray(c0, dtype=complex), vec.shape[:-1])
    return np.concatenate([c0[..., None], vec], axis=-1)


def to_entries(m):
    """Pauli coefficients -> ``(..., 2, 2)`` matrix entries."""
    m = np.asarray(m, dtype=complex)
    return np.einsum('...k,kij->...ij', m, SIGMA)


def from_entries(a):
    """``(..., 2, 2)`` matrix entries -> Pauli coefficients (``c_k = Tr(s_k a)/2``)."""
    a = np.asarray(a, dtype=complex)
    return np.einsum('kji,...ij->...k', SIGMA, a) / 2


def to_matrix(v):
    """Real four-vector -> Hermitian matrix coefficients (identity map on storage)."""
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != 4:
        raise ValueError(f"four-vector must have 4 components, got shape {v.shape}")
    return v.astype(complex)


def from_matrix(m, tol=HERMITIAN_TOL):
    """Hermitian matrix coefficients -> real four-vector ``a^mu = Tr(s_mu m)/2``.

    Raises ``NotHermitianError`` when any coefficient carries an imaginary part
    larger than ``tol`` (relative to the largest coefficient, floored at 1).
    """
    m = np.asarray(m, dtype=complex)
    residue = np.max(np.abs(m.imag), initial=0.0)
    scale = max(1.0, float(np.max(np.abs(m), initial=0.0)))
    if residue > tol * scale:
        raise NotHermitianError(
            f"matrix is not Hermitian: max imaginary coefficient {residue:.3e}")
    return m.real.copy()


def dagger(m):
    return np.conj(m)


def clifford_conjugate(m):
    """``(c0, c) -> (c0, -c)``; for ``R`` in SL(2,C) this is ``R^-1``."""
    out = np.array(m, dtype=complex, copy=True)
    out[..., 1:] *= -1
    return out


def mul(a, b):
    """Matrix product in coefficient form.

    ``(a0 + a.s)(b0 + b.s) = (a0 b0 + a.b) + (a0 b + b0 a + i a x b).s``
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    a0, av = a[..., 0], a[..., 1:]
    b0, bv = b[..., 0], b[..., 1:]
    scalar = a0 * b0 + np.sum(av * bv, axis=-1)
    vector = (a0[..., None] * bv + b0[..., None] * av
              + 1j * np.cross(av, bv))
    return np.concatenate([scalar[..., None], vector], axis=-1)


def trace(m):
    return 2 * np.asarray(m)[..., 0]


def minkowski_inner(a, b):
    """``Tr(clifford(a) b)/2 = a0 b0 - a.b`` (no complex conjugation)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return a[..., 0] * b[..., 0] - np.sum(a[..., 1:] * b[..., 1:], axis=-1)


def det(m):
    """Determinant ``c0^2 - c.c``, equal to ``minkowski_inner(m, m)``."""
    return minkowski_inner(m, m)


def _sinhc_half(phi):
    # sinh(phi/2)/phi, with a series near the removable singularity
    phi = np.asarray(phi, dtype=complex)
    small = np.abs(phi) < _SMALL_PHI
    safe = np.where(small, 1.0, phi)
    y2 = (phi / 2) ** 2
    series = 0.5 * (1 + y2 / 6 + y2 * y2 / 120)
    return np.where(small, series, np.sinh(safe / 2) / safe)


def exp_pauli(c0, cvec):
    """Closed-form ``exp((c0 + c.s)/2)``.

    With ``phi = sqrt(c.c)`` (principal branch)::

        exp((c0 + c.s)/2) = exp(c0/2) [cosh(phi/2) + sinh(phi/2)/phi * c.s]

    The result has determinant ``exp(c0)``.
    """
    cvec = np.asarray(cvec, dtype=complex)
    c0 = np.asarray(c0, dtype=complex)
    phi = np.sqrt(np.sum(cvec * cvec, axis=-1))
    scale = np.exp(c0 / 2)
    scalar = scale * np.cosh(phi / 2)
    vector = (scale * _sinhc_half(phi))[..., None] * cvec
    scalar = np.broadcast_to(scalar, vector.shape[:-1])
    return np.concatenate([scalar[..., None], vector], axis=-1)


def exp_generator(cvec):
    """``exp(c.s)`` for a traceless generator; an SL(2,C) element."""
    return exp_pauli(0.0, 2 * np.asarray(cvec, dtype=complex))


def sandwich(r, m, dagger=True):
    """Two-sided action ``r m r^dagger`` (or ``r m r^-1`` with ``dagger=False``).

    The dagger form transforms states/four-vectors; the inverse form is the
    adjoint action used to move generators between frames.
    """
    right = np.conj(r) if dagger else clifford_conjugate(r)
    return mul(mul(r, m), right)


def anticommutator(a, b):
    """Non-Hermitian anticommutator ``a b + b a^dagger``."""
    return mul(a, b) + mul(b, np.conj(a))


def commutator(a, b):
    """Non-Hermitian commutator ``a b - b a^dagger``."""
    return mul(a, b) - mul(b, np.conj(a))

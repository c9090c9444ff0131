import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from lorentz_qubit import dynamics as dy, pauli
from lorentz_qubit.states import UnnormalizedState
from oracles import dense, taylor_expm


def test_propagator_matches_dense_exponential():
    gen = dy.ComplexGenerator.from_fields(e=[0.3, 0, 0.2], b=[0, -0.5, 0.1], g=1.7, scalar=0.2 + 0.1j)
    R = dy.propagator(gen, 0.3)
    want = taylor_expm(1.7 * 0.3 * dense(gen.matrix()))
    np.testing.assert_allclose(dense(R), want, atol=1e-13)


def test_electric_field_purifies_mixed_state():
    gen = dy.ComplexGenerator.from_fields(e=[0, 0, 1])
    s = UnnormalizedState([1.0, 0, 0, 0])
    out = dy.step_deterministic(s, gen, 0.5)
    # s0 = cosh(2 g t), s3 = sinh(2 g t) from the maximally mixed state
    np.testing.assert_allclose(out.s, [math.cosh(1.0), 0, 0, math.sinh(1.0)], atol=1e-14)


def test_magnetic_field_rotates():
    gen = dy.ComplexGenerator.from_fields(b=[0, 0, 1])
    out = dy.step_deterministic(UnnormalizedState([1.0, 1.0, 0, 0]), gen, math.pi / 8)
    # dS/dt = 2 S x b: x -> rotates by angle 2t
    c, s = math.cos(math.pi / 4), math.sin(math.pi / 4)
    np.testing.assert_allclose(out.s, [1, c, -s, 0], atol=1e-14)


def test_reverse_step_undoes_forward():
    gen = dy.ComplexGenerator([0.3 + 0.2j, -0.1j, 0.4])
    s = UnnormalizedState([1.0, 0.1, 0.2, 0.3])
    back = dy.step_deterministic(dy.step_deterministic(s, gen, 0.7), gen, -0.7)
    np.testing.assert_allclose(back.s, s.s, atol=1e-13)


def test_momentum_rates_match_finite_difference():
    gen = dy.ComplexGenerator([0.3 + 0.2j, -0.1j, 0.4 + 0.5j], g=0.8, scalar=0.3)
    s = UnnormalizedState([1.0, 0.1, -0.2, 0.3])
    h = 1e-6
    fd = (dy.step_deterministic(s, gen, h).s - dy.step_deterministic(s, gen, -h).s) / (2 * h)
    np.testing.assert_allclose(dy.momentum_rates(s, gen), fd, atol=1e-8)


def test_velocity_rates_match_normalized_flow():
    gen = dy.ComplexGenerator([0.3 + 0.2j, -0.1j, 0.4 + 0.5j])
    s = UnnormalizedState([1.0, 0.1, -0.2, 0.3])
    h = 1e-6
    S = lambda x: x.s[1:] / x.s[0]
    fd = (S(dy.step_deterministic(s, gen, h)) - S(dy.step_deterministic(s, gen, -h))) / (2 * h)
    np.testing.assert_allclose(dy.velocity_rates(S(s), gen), fd, atol=1e-8)


def test_rk4_agrees_with_group_and_scipy():
    gen = dy.ComplexGenerator([0.3 + 0.2j, -0.1j, 0.4])
    s = UnnormalizedState([1.0, 0.1, -0.2, 0.3])
    rk = dy.integrate_rates(s, lambda t: gen, 0.0, 1.0, 1e-3)
    np.testing.assert_allclose(rk, dy.step_deterministic(s, gen, 1.0).s, rtol=1e-10)
    # time-dependent field against an adaptive reference
    field_at = lambda t: dy.ComplexGenerator.from_fields(e=[0, 0, math.sin(t)], b=[0.5, 0, 0])
    rk = dy.integrate_rates(s, field_at, 0.0, 2.0, 1e-3)
    ref = solve_ivp(lambda t, y: dy.momentum_rates(y, field_at(t)), (0, 2), s.s, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(rk, ref.y[:, -1], rtol=1e-9)


def test_feedback_hamiltonian_reproduces_flow():
    gen = dy.ComplexGenerator.from_fields(e=[0.2, 0, 2 / 3], b=[-1, 0, 0.3])
    rng = np.random.default_rng(5)
    for _ in range(20):
        S = rng.standard_normal(3)
        S /= np.linalg.norm(S)
        fb = dy.feedback_hamiltonian(S, gen)
        assert np.allclose(fb.e, 0)
        np.testing.assert_allclose(dy.velocity_rates(S, fb), dy.velocity_rates(S, gen), atol=1e-12)
        # b_eff = -S x e by direct vector algebra
        np.testing.assert_allclose(fb.b, gen.b - np.cross(S, gen.e), atol=1e-14)
    with pytest.raises(ValueError):
        dy.feedback_hamiltonian([0.5, 0, 0], gen)


@pytest.mark.parametrize('e,b,kind', [
    ([0, 0, 0], [0, 0, 1], 'elliptic'),
    ([0, 0, 1], [0, 0, 0], 'hyperbolic'),
    ([1, 0, 0], [0, 1, 0], 'parabolic'),
    ([0, 0, 1 / 8], [0, 0, -1], 'hyperbolic'),
    ([0, 0, 2 / 3], [-1, 0, 0], 'elliptic'),
    ([0, 0, 1], [-1, 0, 0], 'parabolic'),
])
def test_classify_field(e, b, kind):
    fc = dy.classify_field(dy.ComplexGenerator.from_fields(e, b))
    assert fc.kind == kind
    assert fc.invariant == pytest.approx(np.dot(e, e) - np.dot(b, b) + 2j * np.dot(e, b))


def test_exceptional_point_is_nilpotent_and_linear_in_time():
    gen = dy.ComplexGenerator.from_fields(e=[1, 0, 0], b=[0, 1, 0])
    F = dense(gen.matrix())
    np.testing.assert_allclose(F @ F, 0, atol=1e-15)
    for t in (0.1, 1.0, 5.0):
        np.testing.assert_allclose(dense(dy.propagator(gen, t)), np.eye(2) + t * F, atol=1e-12)


def test_determinant_invariant_along_field():
    gen = dy.ComplexGenerator([0.3 + 0.2j, -0.1j, 0.4])
    s = UnnormalizedState([1.0, 0.1, -0.2, 0.3])
    d0 = pauli.det(s.s).real
    for _ in range(50):
        s = dy.step_deterministic(s, gen, 0.1)
    assert pauli.det(s.s).real == pytest.approx(d0, rel=1e-10)


def test_worked_rates():
    rest = np.array([1.0, 0, 0, 0])
    out = dy.step_deterministic(UnnormalizedState(rest), dy.ComplexGenerator.from_fields(b=[0, 0, 0.8]), 1.3)
    np.testing.assert_allclose(out.s, rest, atol=1e-15)
    rng = np.random.default_rng(6)
    s = np.array([1.0, 0.2, -0.3, 0.4])
    assert dy.momentum_rates(s, dy.ComplexGenerator.from_fields(b=rng.standard_normal(3)))[0] == 0
    r = dy.momentum_rates(rest, dy.ComplexGenerator.from_fields(e=[0.1, 0.2, 0.3]))
    np.testing.assert_allclose(r, [0, 0.2, 0.4, 0.6])
    gz = dy.ComplexGenerator.from_fields(e=[0, 0, 1])
    np.testing.assert_allclose(dy.velocity_rates([0, 0, 1], gz), 0)
    np.testing.assert_allclose(dy.velocity_rates([0, 0, 0], gz), [0, 0, 2])
    gen = dy.ComplexGenerator(rng.standard_normal(3) + 1j * rng.standard_normal(3))
    for _ in range(20):
        S = rng.standard_normal(3)
        S /= np.linalg.norm(S)
        assert abs(np.dot(S, dy.velocity_rates(S, gen))) < 1e-12


def test_feedback_worked_values():
    gz = dy.ComplexGenerator.from_fields(e=[0, 0, 1])
    np.testing.assert_allclose(dy.feedback_hamiltonian([0, 0, 1], gz).b, 0, atol=1e-15)
    np.testing.assert_allclose(dy.feedback_hamiltonian([0, 1, 0], gz).b, [-1, 0, 0], atol=1e-15)
    # normalized paths coincide, unnormalized norms do not
    gen = dy.ComplexGenerator.from_fields(e=[0, 0, 2 / 3], b=[-1, 0, 0])
    a = UnnormalizedState([1.0, 0, 1, 0])
    b = a
    for _ in range(200):
        b = dy.step_deterministic(b, dy.feedback_hamiltonian(b.s[1:] / b.s[0], gen), 1e-3)
        a = dy.step_deterministic(a, gen, 1e-3)
    # the feedback field is frozen over each step, so the paths agree to O(dt)
    np.testing.assert_allclose(a.s[1:] / a.s[0], b.s[1:] / b.s[0], atol=1e-3)
    assert abs(a.s[0] - b.s[0]) > 0.05 and b.s[0] == pytest.approx(1.0)


def test_electric_boost_rapidity():
    # R = exp(g t e.s) boosts by rapidity 2 g E t
    for g, E, t in ((1.0, 1.0, 0.3), (0.5, 2.0, 0.7)):
        out = dy.step_deterministic(UnnormalizedState([1.0, 0, 0, 0]),
                                    dy.ComplexGenerator.from_fields(e=[0, 0, E], g=g), t)
        a = 2 * g * E * t
        np.testing.assert_allclose(out.s, [math.cosh(a), 0, 0, math.sinh(a)], atol=1e-14)

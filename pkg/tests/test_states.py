import math

import numpy as np
import pytest
from hypothesis import given, strategies as hs

from lorentz_qubit import pauli
from lorentz_qubit.states import (BlochState, UnnormalizedState, UnphysicalStateError, normalize,
                                  linear_entropy, linear_cross_entropy, accumulate_worldline)
from oracles import density


def test_bloch_state_validation():
    assert BlochState([0, 0, 1]).norm == 1
    with pytest.raises(UnphysicalStateError):
        BlochState([0, 0, 1.1])
    with pytest.raises(ValueError):
        BlochState([0, 1])
    # rounding slack is absorbed
    assert BlochState([0, 0, 1 + 1e-12]).norm == 1


def test_populations_and_density():
    b = BlochState([0.6, 0, 0.8])
    assert b.populations() == pytest.approx((0.9, 0.1))
    assert b.populations((1, 0, 0)) == pytest.approx((0.8, 0.2))
    np.testing.assert_allclose(pauli.to_entries(b.density_matrix()), density([0.6, 0, 0.8]), atol=1e-15)


def test_unnormalized_validation():
    with pytest.raises(UnphysicalStateError):
        UnnormalizedState([0, 0, 0, 0])
    with pytest.raises(UnphysicalStateError):
        UnnormalizedState([1, 0, 0, 1.01])
    s = UnnormalizedState.from_bloch([1, 0, 0])
    assert s.s0 == 0.5 and s.trace == 1.0


@given(hs.floats(1e-9, 1e9), hs.floats(-1, 1))
def test_normalize_is_scale_invariant(scale, z):
    s = np.array([1.0, 0.0, math.sqrt(1 - z * z) * 0.5, z * 0.5])
    np.testing.assert_allclose(normalize(s * scale).vector, normalize(s).vector, atol=1e-12)


def test_normalize_rejects_degenerate():
    with pytest.raises(UnphysicalStateError):
        normalize(np.array([0.0, 0, 0, 0]))
    with pytest.raises(UnphysicalStateError):
        normalize(np.array([1.0, 0, 0, 2]))


def test_linear_entropy_matches_purity():
    for S in ([0, 0, 0], [0.3, 0.4, 0], [0, 0, 1]):
        rho = density(S)
        purity = np.trace(rho @ rho).real
        d, sl = linear_entropy(UnnormalizedState.from_bloch(S))
        assert sl == pytest.approx(2 * (1 - purity), abs=1e-14)
        assert d == pytest.approx(sl / 4, abs=1e-14)


def test_cross_entropy_of_orthogonal_pure_states():
    up = UnnormalizedState.from_bloch([0, 0, 1])
    down = UnnormalizedState.from_bloch([0, 0, -1])
    # two antiparallel pure states: product is s0^2 (1 + 1)
    assert linear_cross_entropy(up, down) == pytest.approx(0.5)
    assert linear_cross_entropy(up, up) == pytest.approx(0.0)


def test_rescale_preserves_physical_state():
    s = UnnormalizedState([1e7, 0, 0, 5e6], log_scale=0.3)
    r = s.rescaled()
    assert r.s0 == 1.0
    assert r.log_scale == pytest.approx(0.3 + math.log(1e7))
    np.testing.assert_allclose(r.s * math.exp(r.log_scale), s.s * math.exp(s.log_scale), rtol=1e-12)
    low = UnnormalizedState([1e-8, 0, 0, 0]).rescaled()
    assert low.s0 == 1.0
    mid = UnnormalizedState([3.0, 0, 0, 0])
    assert mid.rescaled() is mid


def test_worldline_of_constant_velocity():
    S = np.tile([0.5, 0, 0], (11, 1))
    wl = accumulate_worldline(S, 0.1)
    np.testing.assert_allclose(wl.position[-1], [1.0, 0.5, 0, 0], atol=1e-14)
    np.testing.assert_allclose(wl.mean[-1], [0.5, 0, 0])
    assert wl.t[-1] == pytest.approx(1.0)


def test_worldline_rules_differ_on_ramp():
    S = np.zeros((3, 3))
    S[:, 2] = [0, 0.5, 1.0]
    left = accumulate_worldline(S, 1.0, 'left')
    trap = accumulate_worldline(S, 1.0, 'trapezoid')
    assert left.position[-1, 3] == pytest.approx(0.5)
    assert trap.position[-1, 3] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        accumulate_worldline(S, 1.0, 'simpson')
    with pytest.raises(ValueError):
        accumulate_worldline(S, 0.0)


def test_worked_values():
    np.testing.assert_allclose(normalize(np.array([3.0, 0, 0, 0])).vector, 0)
    np.testing.assert_allclose(normalize(np.array([1.0, 1, 0, 0])).vector, [1, 0, 0])
    np.testing.assert_allclose(normalize(np.array([2.0, 0, 0, 1])).vector, [0, 0, 0.5])
    assert linear_entropy(np.array([1.0, 1, 0, 0])) == (0.0, 0.0)
    assert linear_entropy(np.array([1.0, 0, 0, 0])) == (1.0, 1.0)
    d, sl = linear_entropy(np.array([2.0, 0, 0, 1]))
    rho = density([0, 0, 0.5])
    assert (d, sl) == (3.0, 0.75) and 2 * (1 - np.trace(rho @ rho).real) == pytest.approx(0.75)
    assert linear_cross_entropy(np.array([1.0, 1, 0, 0]), np.array([1.0, -1, 0, 0])) == 2
    assert linear_cross_entropy(np.array([1.0, 1, 0, 0]), np.array([1.0, 1, 0, 0])) == 0
    assert linear_cross_entropy(np.array([1.0, 0, 0, 0]), np.array([1.0, 0, 0, 0])) == 1


def test_worldline_limits():
    wl = accumulate_worldline(np.zeros((11, 3)), 0.1)
    np.testing.assert_allclose(wl.position[-1], [1, 0, 0, 0], atol=1e-15)
    wl = accumulate_worldline(np.tile([1.0, 0, 0], (11, 1)), 0.1)
    np.testing.assert_allclose(wl.position[-1], [1, 1, 0, 0], atol=1e-15)
    # Rabi circle over a period: mean velocity vanishes to O(dt)
    for n in (100, 1000):
        t = np.arange(n + 1) * (2 * np.pi / n)
        wl = accumulate_worldline(np.stack([np.cos(t), np.sin(t), 0 * t], 1), 2 * np.pi / n)
        assert np.linalg.norm(wl.mean[-1]) < 2 / n

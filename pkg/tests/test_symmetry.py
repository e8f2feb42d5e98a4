import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dsc_switch.hilbert import EmitterLevel, HilbertSpace, index_of, make_named_state
from dsc_switch.model import PulseSchedule, PulseSpec, SystemParams, build_h0, build_hd
from dsc_switch.propagate import PropagationOptions, propagate
from dsc_switch.symmetry import (
    anticommutator_max_abs,
    commutator_max_abs,
    effective_coupling,
    parity_of_basis,
    parity_operator,
    parity_weights,
)
from oracles import brute_force_h0

G, E, F = EmitterLevel


@pytest.mark.parametrize("level,n,p", [(G, 0, 1), (E, 0, -1), (F, 0, 1), (E, 1, 1), (G, 3, -1), (F, 5, -1)])
def test_parity_of_basis(level, n, p):
    assert parity_of_basis(level, n) == p


def test_parity_operator_is_involution():
    pi = parity_operator(HilbertSpace(6))
    assert np.array_equal(pi @ pi, np.eye(pi.shape[0]))


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 2.0), st.floats(0.0, 3.0), st.floats(0.0, 3.0), st.integers(1, 15))
def test_parity_commutes_with_h0(omega_q, g1, g2, n_max):
    space = HilbertSpace(n_max)
    assert commutator_max_abs(parity_operator(space), build_h0(SystemParams(1.0, omega_q, g1, g2), space)) <= 1e-13


@settings(max_examples=20, deadline=None)
@given(st.floats(-5, 5), st.floats(0, 1), st.floats(0.05, 0.5), st.floats(0, 3))
def test_drive_anticommutes_with_parity(A, omega, tau, t):
    space = HilbertSpace(4)
    hd = build_hd(PulseSchedule.of([PulseSpec(A, omega, tau, 1.5)]), t, space)
    assert anticommutator_max_abs(parity_operator(space), hd) <= 1e-13


def test_drive_anticommutes_at_peak():
    space = HilbertSpace(4)
    hd = build_hd(PulseSchedule.of([PulseSpec(math.pi, 0.0, 0.1, 1.0)]), 1.0, space)
    pi = parity_operator(space)
    assert np.max(np.abs(hd)) > 1.0
    assert np.max(np.abs(pi @ hd + hd @ pi)) == 0.0


def test_parity_weights():
    space = HilbertSpace(3)
    assert parity_weights(make_named_state(space, "plus0")) == pytest.approx((1.0, 0.0))
    assert parity_weights(make_named_state(space, "minus0")) == pytest.approx((0.0, 1.0))
    mix = (space.basis(G, 0) + space.basis(E, 0)) / math.sqrt(2)
    assert parity_weights(mix) == pytest.approx((0.5, 0.5))


@settings(max_examples=20, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
                min_size=12, max_size=12))
def test_parity_weights_sum_to_norm(amps):
    psi = np.array(amps)
    even, odd = parity_weights(psi)
    assert even >= 0 and odd >= 0
    assert even + odd == pytest.approx(np.vdot(psi, psi).real, abs=1e-12)


def test_dark_state_couplings_vanish_for_equal_g():
    space = HilbertSpace(5)
    h0 = build_h0(SystemParams(omega_q=0.01, g1=0.5, g2=0.5), space)
    assert effective_coupling(E, 1, make_named_state(space, "antisym0"), h0) == 0
    assert effective_coupling(E, 2, make_named_state(space, "antisym1"), h0) == 0


def test_effective_coupling_unequal_g():
    space = HilbertSpace(5)
    h0 = build_h0(SystemParams(g1=1.0, g2=0.5), space)
    value = effective_coupling(E, 1, make_named_state(space, "antisym0"), h0)
    oracle = brute_force_h0(1.0, 0.0, 1.0, 0.5, 5)
    ref = (oracle[index_of(space, E, 1), index_of(space, G, 0)]
           - oracle[index_of(space, E, 1), index_of(space, F, 0)]) / math.sqrt(2)
    assert value == pytest.approx(0.35355, abs=1e-5)
    assert value == pytest.approx(ref, abs=1e-15)


def test_dark_state_is_stationary():
    space = HilbertSpace(10)
    h0 = build_h0(SystemParams(omega_q=0.0, g1=0.8, g2=0.8), space)
    assert np.max(np.abs(h0 @ make_named_state(space, "antisym0"))) <= 1e-13


@pytest.mark.parametrize("initial", ["plus0", "plus2", "e1", "antisym0"])
def test_even_chain_confinement(initial):
    space = HilbertSpace(40)
    psi0 = make_named_state(space, initial)
    h0 = build_h0(SystemParams(omega_q=0.2, g1=1.0, g2=0.7), space)
    rec = propagate(h0, PulseSchedule(), psi0, 4 * math.pi, PropagationOptions(dt_base=0.1))
    assert rec["P_odd"].max() < 1e-10

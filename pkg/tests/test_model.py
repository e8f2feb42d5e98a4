import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from dsc_switch.errors import ValidationError
from dsc_switch.hilbert import EmitterLevel, HilbertSpace, index_of
from dsc_switch.model import (
    PulseSchedule,
    PulseSpec,
    SystemParams,
    build_h0,
    build_hd,
    build_heff,
    hamiltonian_at,
    pulse_envelope,
)
from oracles import brute_force_h0

G, E, F = EmitterLevel
PI = math.pi


def test_envelope_peak():
    p = PulseSpec(A=PI, omega=0.0, tau=0.1, t_c=4 * PI)
    assert pulse_envelope(p, 4 * PI) == pytest.approx(12.5331, abs=1e-4)


def test_envelope_with_carrier():
    p = PulseSpec(A=PI, omega=0.01, tau=0.1, t_c=4 * PI)
    expected = PI / (0.1 * math.sqrt(2 * PI)) * math.cos(0.04 * PI)
    assert pulse_envelope(p, 4 * PI) == pytest.approx(expected, rel=1e-14)
    assert pulse_envelope(p, 4 * PI) == pytest.approx(12.4343, abs=1e-4)


def test_envelope_tail():
    p = PulseSpec(A=2.0, omega=0.3, tau=0.2, t_c=1.0)
    assert abs(pulse_envelope(p, 1.0 + 10 * 0.2)) < 2.0 * math.exp(-50) / (0.2 * math.sqrt(2 * PI))


def test_envelope_multiply_convention():
    p = PulseSpec(A=1.0, omega=0.0, tau=0.5, t_c=0.0)
    t = 0.7
    expected = math.exp(-t**2 * 2 * 0.5**2) / (0.5 * math.sqrt(2 * PI))
    assert pulse_envelope(p, t, "multiply") == pytest.approx(expected)
    assert p.width("multiply") == pytest.approx(1.0)


@pytest.mark.parametrize(
    "A,omega,tau,t_c",
    [(PI, 0.01, 0.1, 4 * PI), (PI, 0.01, 0.1, 6 * PI), (1.3, 2.0, 0.3, 5.0), (PI, 0.0, 0.05, 1.0)],
)
def test_pulse_area_matches_closed_form(A, omega, tau, t_c):
    p = PulseSpec(A, omega, tau, t_c)
    area, _ = quad(lambda t: pulse_envelope(p, t), t_c - 12 * tau, t_c + 12 * tau,
                   epsabs=1e-13, epsrel=1e-12, limit=200)
    closed = A * math.exp(-(omega * tau) ** 2 / 2) * math.cos(omega * t_c)
    assert area == pytest.approx(closed, rel=1e-6)
    assert p.rotation_angle() == pytest.approx(closed, rel=1e-14)


def test_pulse_validation():
    with pytest.raises(ValidationError, match="tau"):
        PulseSpec(PI, 0.0, -1.0, 1.0)
    with pytest.raises(ValidationError, match="t_c"):
        PulseSpec(PI, 0.0, 0.1, -1.0)
    with pytest.raises(ValidationError):
        PulseSchedule((), convention="sideways")


def test_params_validation():
    with pytest.raises(ValidationError, match="omega_c"):
        SystemParams(omega_c=0.0)
    with pytest.raises(ValidationError, match="kappa"):
        SystemParams(kappa=-0.1)


def test_schedule_sorts_and_warns_on_overlap():
    a, b = PulseSpec(1, 0, 0.1, 3.0), PulseSpec(1, 0, 0.1, 1.0)
    assert PulseSchedule.of([a, b]).pulses == (b, a)
    with pytest.warns(RuntimeWarning, match="overlap"):
        sched = PulseSchedule.of([PulseSpec(1, 0, 0.1, 1.0), PulseSpec(1, 0, 0.1, 1.5)])
    assert sched.merged_windows() == [(pytest.approx(0.4), pytest.approx(2.1))]
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        PulseSchedule.of([PulseSpec(1, 0, 0.1, 1.0), PulseSpec(1, 0, 0.1, 2.3)])


def test_h0_free_part_diagonal():
    space = HilbertSpace(4)
    h = build_h0(SystemParams(omega_q=0.3, g1=0.0, g2=0.0), space)
    assert np.count_nonzero(h - np.diag(np.diag(h))) == 0
    for lvl, shift in zip(EmitterLevel, (0.0, 0.3, 0.6)):
        for n in range(5):
            assert h[index_of(space, lvl, n)] [index_of(space, lvl, n)] == pytest.approx(n + shift)


def test_h0_matrix_elements():
    space = HilbertSpace(4)
    h = build_h0(SystemParams(omega_q=0.2, g1=0.7, g2=0.4), space)
    assert h[index_of(space, E, 1), index_of(space, G, 0)] == pytest.approx(0.7)
    assert h[index_of(space, F, 2), index_of(space, E, 1)] == pytest.approx(math.sqrt(2) * 0.4)


@settings(max_examples=25, deadline=None)
@given(
    st.floats(0.2, 3.0), st.floats(0.0, 2.0), st.floats(0.0, 3.0), st.floats(0.0, 3.0),
    st.integers(1, 12),
)
def test_h0_matches_brute_force_expansion(omega_c, omega_q, g1, g2, n_max):
    h = build_h0(SystemParams(omega_c, omega_q, g1, g2), HilbertSpace(n_max))
    assert np.allclose(h, brute_force_h0(omega_c, omega_q, g1, g2, n_max), atol=1e-13, rtol=0)
    assert np.max(np.abs(h - h.conj().T)) <= 1e-14


def test_hd_empty_schedule_is_zero():
    assert not np.any(build_hd(PulseSchedule(), 1.0, HilbertSpace(3)))


def test_hd_far_from_pulse():
    p = PulseSpec(PI, 0.01, 0.1, 4 * PI)
    hd = build_hd(PulseSchedule.of([p]), 0.0, HilbertSpace(3))
    assert np.max(np.abs(hd)) < 1e-12 * PI / (0.1 * math.sqrt(2 * PI))


def test_hd_at_peak_matches_two_level_block():
    space = HilbertSpace(3)
    p = PulseSpec(PI, 0.0, 0.1, 2.0)
    hd = build_hd(PulseSchedule.of([p]), 2.0, space)
    peak = PI / (0.1 * math.sqrt(2 * PI))
    expected = np.zeros((space.dim, space.dim))
    block = np.array([[0.0, peak], [peak, 0.0]])
    for n in range(space.n_max + 1):
        idx = [index_of(space, E, n), index_of(space, F, n)]
        expected[np.ix_(idx, idx)] = block
    assert np.allclose(hd, expected, atol=1e-14, rtol=0)


def test_heff_lossless_equals_h0():
    space = HilbertSpace(5)
    params = SystemParams(omega_q=0.1, g1=0.5, g2=0.3)
    assert np.array_equal(build_heff(params, space), build_h0(params, space))


def test_heff_loss_diagonal():
    space = HilbertSpace(5)
    params = SystemParams(omega_q=0.01, g1=0.5, g2=0.5, kappa=0.005, gamma=0.005)
    diff = build_heff(params, space) - build_h0(params, space)
    assert np.count_nonzero(diff - np.diag(np.diag(diff))) == 0
    assert np.all(diff.real == 0)
    assert np.all(np.diag(diff).imag <= 0)
    i = index_of(space, E, 1)
    assert diff[i, i] == pytest.approx(-0.005j)
    assert diff[index_of(space, G, 3), index_of(space, G, 3)] == pytest.approx(-0.0075j)


def test_hamiltonian_at():
    space = HilbertSpace(3)
    base = build_h0(SystemParams(), space)
    assert hamiltonian_at(base, PulseSchedule(), 1.0) is base
    p1 = PulseSpec(PI, 0.0, 0.1, 1.0)
    sched = PulseSchedule.of([p1])
    assert hamiltonian_at(base, sched, 5.0) is base
    h = hamiltonian_at(base, sched, 1.02)
    assert np.allclose(h - base, build_hd(sched, 1.02, space))
    assert np.max(np.abs(h - h.conj().T)) <= 1e-14


def test_overlapping_pulses_add_linearly():
    space = HilbertSpace(2)
    base = build_h0(SystemParams(), space)
    p1, p2 = PulseSpec(1.0, 0.2, 0.1, 1.0), PulseSpec(0.5, 0.0, 0.2, 1.1)
    with pytest.warns(RuntimeWarning):
        both = PulseSchedule.of([p1, p2])
    t = 1.05
    total = hamiltonian_at(base, both, t) - base
    parts = build_hd(PulseSchedule.of([p1]), t, space) + build_hd(PulseSchedule.of([p2]), t, space)
    assert np.allclose(total, parts, atol=1e-14)

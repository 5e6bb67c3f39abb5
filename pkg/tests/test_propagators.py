from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blockade_forge.propagators import (GateDiagonal, compose_gate, two_pulse_closed,
                                        u11_orthogonal_closed, u11_three_pulse_closed,
                                        ut11_three_pulse_closed, ut_step, uv_step)
from blockade_forge.protocol import GeometryVector, ProtocolSpec, Pulse, Scheme, build_sequence

PI = math.pi
X = GeometryVector(1.0, 0.0)
Y = GeometryVector(0.0, 1.0)

angles = st.floats(0, 2 * PI)
areas = st.floats(0, 4 * PI)


def test_uv_step_pi_pulse_excites_first_qubit():
    u = uv_step(Pulse(PI, X))
    np.testing.assert_allclose(u[:, 0], [0, -1, 0], atol=1e-15)


def test_uv_step_two_pi_pulse():
    np.testing.assert_allclose(uv_step(Pulse(2 * PI, X)), np.diag([1, 1, -1]), atol=1e-15)


def test_uv_step_symmetric_superposition():
    e = GeometryVector(1 / math.sqrt(2), 1 / math.sqrt(2))
    u = uv_step(Pulse(PI, e))
    np.testing.assert_allclose(u[:, 0], [0, -1 / math.sqrt(2), -1 / math.sqrt(2)], atol=1e-15)


def test_ut_step_examples():
    np.testing.assert_allclose(ut_step(Pulse(2 * PI, X), 1.0), np.eye(2), atol=1e-15)
    np.testing.assert_allclose(ut_step(Pulse(3.3, X, 1.2), 0.0), np.eye(2), atol=0)
    np.testing.assert_allclose(ut_step(Pulse(PI, X), 1.0), [[0, -1], [-1, 0]], atol=1e-15)


def test_ut_step_uses_modulus_for_stark_phase():
    # a negative coupling factor rotates the other way but shifts the same
    p = Pulse(1.3, X, 0.4)
    plus, minus = ut_step(p, 0.6), ut_step(p, -0.6)
    assert plus[0, 0] == pytest.approx(minus[0, 0], abs=1e-15)
    assert plus[0, 1] == pytest.approx(-minus[0, 1], abs=1e-15)


def test_ut_step_rejects_large_alpha():
    with pytest.raises(ValueError):
        ut_step(Pulse(1.0, X), 1.5)


@given(area=st.floats(0, 40), beta=angles, phase=angles, stark=st.booleans())
def test_step_propagators_are_unitary(area, beta, phase, stark):
    p = Pulse(area, GeometryVector.from_angle(beta), phase)
    for u in (uv_step(p, stark), ut_step(p, p.geometry.a_tilde, stark),
              ut_step(p, p.geometry.b_tilde, stark)):
        assert np.max(np.abs(u.conj().T @ u - np.eye(len(u)))) < 1e-12


def test_compose_jp_gives_cplus_and_identity():
    gate = compose_gate(build_sequence(ProtocolSpec(Scheme.JP, 3, 0.0, 2 * PI, 2 * PI)))
    assert gate.allclose(GateDiagonal(1, 1, 1, -1))
    assert compose_gate([Pulse(0.0, X)]).allclose(GateDiagonal(1, 1, 1, 1))


def test_compose_jp_single_photon_gives_cminus():
    gate = compose_gate(build_sequence(ProtocolSpec(Scheme.JP, 3, 0.0, 2 * PI, 2 * PI)),
                        stark=False)
    assert gate.allclose(GateDiagonal(1, -1, -1, -1))


def test_compose_empty_raises():
    with pytest.raises(ValueError):
        compose_gate([])


def test_gate_diagonal_invariants():
    with pytest.raises(ValueError):
        GateDiagonal(0.5, 1, 1, 1)
    with pytest.raises(ValueError):
        GateDiagonal(1, 1.01, 1, 1)
    g = GateDiagonal.from_amplitudes(0.5, 1j, -1)
    np.testing.assert_allclose(g.leakage(), [0, 0.75, 0, 0])


def test_sop_three_pulse_matches_closed_form():
    spec = ProtocolSpec(Scheme.SOP, 3, 0.1 * PI, 2 * PI, 2 * PI)
    pulses = build_sequence(spec)
    e = [p.geometry for p in pulses]
    closed = u11_three_pulse_closed(PI, 2 * PI, PI, *e, 0, 0, 0)
    assert abs(compose_gate(pulses).u11 - closed) < 1e-12


def test_three_pulse_closed_special_values():
    assert u11_three_pulse_closed(PI, 2 * PI, PI, X, Y, X, 0, 0, 0) == pytest.approx(-1, abs=1e-15)
    assert u11_three_pulse_closed(0, 0, 0, X, Y, X, 0.3, 1.0, 2.0) == 1


def test_orthogonal_closed_form_values():
    assert u11_orthogonal_closed(PI, 2 * PI, PI, 0, 0, 1) == pytest.approx(-1, abs=1e-15)
    for s2 in (PI / 2, 3 * PI, 5.7):
        assert u11_orthogonal_closed(PI, s2, PI, 0, PI - s2 / 2, 1) == pytest.approx(-1, abs=1e-14)
    with pytest.raises(ValueError):
        u11_orthogonal_closed(PI, PI, PI, 0, 0, 0)


@settings(max_examples=100)
@given(s1=areas, s2=areas, s3=areas, beta=angles, p1=angles, p2=angles, p3=angles,
       sign=st.sampled_from([1, -1]))
def test_orthogonal_form_agrees_with_general_form(s1, s2, s3, beta, p1, p2, p3, sign):
    e1 = GeometryVector.from_angle(beta)
    e3 = e1 if sign > 0 else -e1
    general = u11_three_pulse_closed(s1, s2, s3, e1, e1.orthogonal(), e3, p1, p2, p3)
    assert abs(general - u11_orthogonal_closed(s1, s2, s3, p1, p3, sign)) < 1e-12


def test_two_level_three_pulse_values():
    assert ut11_three_pulse_closed(PI, 2 * PI, PI, 1, 0, 1, 0, 0, 0) == pytest.approx(1, abs=1e-15)
    assert ut11_three_pulse_closed(1.0, 2.0, 3.0, 0, 0, 0, 0.1, 0.2, 0.3) == 1


@given(s1=areas, s2=areas, a1=st.floats(0, 1), a2=st.floats(0, 1))
def test_two_level_copy_of_first_pulse_reduces(s1, s2, a1, a2):
    # equal phases and a repeated first pulse collapse to a single cosine
    value = ut11_three_pulse_closed(s1, s2, s1, a1, a2, a1, 0.0, 0.0, 0.0)
    theta = a1 * s1 + a2 * s2 / 2
    assert abs(value - cmath.exp(1j * theta) * math.cos(theta)) < 1e-12


@settings(max_examples=200)
@given(s=st.tuples(areas, areas, areas), b=st.tuples(angles, angles, angles),
       p=st.tuples(angles, angles, angles))
def test_three_pulse_closed_forms_match_composition(s, b, p):
    e = [GeometryVector.from_angle(x) for x in b]
    gate = compose_gate([Pulse(s[k], e[k], p[k]) for k in range(3)])
    assert abs(u11_three_pulse_closed(*s, *e, *p) - gate.u11) < 1e-12
    assert abs(ut11_three_pulse_closed(*s, *(x.a_tilde for x in e), *p) - gate.u10) < 1e-12
    assert abs(ut11_three_pulse_closed(*s, *(x.b_tilde for x in e), *p) - gate.u01) < 1e-12


def test_two_pulse_sop_stark_cancellation():
    uv, _ = two_pulse_closed(2 * PI, 2 * PI, 0, 0, "sop", 1.0, 0.0)
    assert uv == pytest.approx(1, abs=1e-15)


@given(s1=areas, s2=areas, phi=angles, sign=st.sampled_from([1, -1]))
def test_two_pulse_spp_equal_phases(s1, s2, phi, sign):
    uv, _ = two_pulse_closed(s1, s2, phi, phi, Scheme.SPP, 0.9, 0.9, sign)
    expected = cmath.exp(0.5j * (s1 + s2)) * math.cos((s2 + sign * s1) / 2)
    assert abs(uv - expected) < 1e-12


@settings(max_examples=200)
@given(s1=areas, s2=areas, beta=angles, p1=angles, p2=angles,
       scheme=st.sampled_from([Scheme.SOP, Scheme.SPP]), sign=st.sampled_from([1, -1]))
def test_two_pulse_closed_matches_composition(s1, s2, beta, p1, p2, scheme, sign):
    e1 = GeometryVector.from_angle(beta)
    e2 = e1.orthogonal() if scheme is Scheme.SOP else (e1 if sign > 0 else -e1)
    gate = compose_gate([Pulse(s1, e1, p1), Pulse(s2, e2, p2)])
    uv, ua = two_pulse_closed(s1, s2, p1, p2, scheme, e1.a_tilde, e2.a_tilde, sign)
    _, ub = two_pulse_closed(s1, s2, p1, p2, scheme, e1.b_tilde, e2.b_tilde, sign)
    assert abs(uv - gate.u11) < 1e-12
    assert abs(ua - gate.u10) < 1e-12
    assert abs(ub - gate.u01) < 1e-12


def test_two_pulse_rejects_jp():
    with pytest.raises(ValueError):
        two_pulse_closed(PI, PI, 0, 0, "jp", 1, 0)


@given(m=st.integers(1, 5), shift=angles, data=st.data())
def test_common_phase_shift_leaves_gate_unchanged(m, shift, data):
    pulses = [Pulse(data.draw(areas), GeometryVector.from_angle(data.draw(angles)),
                    data.draw(angles)) for _ in range(m)]
    moved = [Pulse(p.area, p.geometry, p.phase + shift) for p in pulses]
    assert compose_gate(pulses).allclose(compose_gate(moved), atol=1e-12)


@given(s1=areas, s2=areas, beta=angles, p1=angles, p2=angles)
def test_dark_state_of_orthogonal_pulse(s1, s2, beta, p1, p2):
    e1 = GeometryVector.from_angle(beta)
    psi = uv_step(Pulse(s1, e1, p1))[:, 0]
    dark = np.array([0, psi[1], psi[2]])
    if np.linalg.norm(dark) < 1e-6:
        return
    dark /= np.linalg.norm(dark)
    out = uv_step(Pulse(s2, e1.orthogonal(), p2)) @ dark
    np.testing.assert_allclose(out, cmath.exp(0.5j * s2) * dark, atol=1e-12)

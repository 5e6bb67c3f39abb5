from __future__ import annotations

import cmath
import math

import numpy as np
import pytest

from blockade_forge.dynamics import (EnvelopeSpec, GeneralVHamiltonian, NumericalError,
                                     PhysicalPulse, build_hv_general, build_hv_symmetric,
                                     build_ht_symmetric, build_two_photon_hamiltonian,
                                     integrate_tdse, propagate_pulse, single_photon_step)
from blockade_forge.propagators import GateDiagonal, compose_gate, ut_step, uv_step
from blockade_forge.protocol import (GeometryVector, InvalidSpecError, ProtocolSpec, Pulse, Scheme,
                                     build_sequence)

PI = math.pi
E10 = GeometryVector.from_angle(0.1 * PI)


def test_envelope_validation():
    with pytest.raises(InvalidSpecError):
        EnvelopeSpec(width=0.0)
    with pytest.raises(InvalidSpecError):
        EnvelopeSpec(truncation=3.0)
    with pytest.raises(InvalidSpecError):
        EnvelopeSpec(shape="square")


def test_envelope_area_and_mixing_angle():
    env = EnvelopeSpec(center=1.0, width=0.5)
    t = np.linspace(env.t_start, env.t_end, 20001)
    rabi = env.rabi(t, 3.0)
    integral = float(np.sum((rabi[1:] + rabi[:-1]) / 2 * np.diff(t)))
    assert integral == pytest.approx(3.0, rel=1e-7)
    assert env.mixing_angle(env.t_end, 3.0) == pytest.approx(1.5, abs=1e-15)
    assert env.mixing_angle(env.t_start - 1, 3.0) == 0.0
    values = [env.mixing_angle(x, 3.0) for x in t[::500]]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_physical_pulse_area_roundtrip():
    pp = PhysicalPulse.for_area(PI, detuning=50.0)
    assert pp.area == pytest.approx(PI, rel=1e-14)
    assert pp.peak_rabi_pump == pp.peak_rabi_stokes
    pulse = pp.to_pulse(E10)
    assert pulse.area == pytest.approx(PI, rel=1e-14)
    t = 0.3
    assert pp.effective_rabi(t) == pytest.approx(pp.envelope.rabi(t, pp.area), rel=1e-12)


def test_physical_pulse_requires_detuning():
    with pytest.raises(InvalidSpecError):
        PhysicalPulse(1.0, 1.0, 0.0)
    with pytest.raises(InvalidSpecError):
        PhysicalPulse(1.0, 1.0, -5.0).to_pulse(E10)


def test_symmetric_hamiltonians_vanish_without_drive():
    env = EnvelopeSpec()
    h = build_hv_symmetric(Pulse(PI, E10, 0.3), env)
    assert np.all(h(env.t_end + 1.0) == 0)
    ht = build_ht_symmetric(Pulse(PI, E10, 0.3), 0.0, env)
    assert np.all(ht(0.0) == 0)


def test_hv_symmetric_structure():
    h = build_hv_symmetric(Pulse(PI, GeometryVector(1.0, 0.0), 0.0))(0.0)
    assert h[0, 2] == 0 and h[2, 0] == 0
    assert h[0, 0] == h[1, 1] == h[2, 2]
    np.testing.assert_allclose(h, h.conj().T, atol=1e-14)


def test_ht_matches_two_photon_hamiltonian_for_equal_fields():
    pp = PhysicalPulse.for_area(2 * PI, detuning=40.0, phase=0.7)
    h_two = build_two_photon_hamiltonian(pp.pump_rabi, pp.stokes_rabi, pp.detuning, pp.phase)
    h_sym = build_ht_symmetric(pp.to_pulse(GeometryVector(1.0, 0.0)), 1.0, pp.envelope)
    for t in (-1.3, 0.0, 0.8):
        np.testing.assert_allclose(h_two(t), h_sym(t), rtol=1e-12, atol=1e-14)


def test_general_hamiltonian_reduces_to_symmetric():
    env = EnvelopeSpec()
    pulse = Pulse(PI, E10, 1.1)

    def rabi(t):
        return env.rabi(t, pulse.area)

    # the symmetric couplings are pump * Stokes products of equal factors
    fa, fb = math.sqrt(E10.a_tilde), math.sqrt(E10.b_tilde)
    hg = build_hv_general(GeneralVHamiltonian(fa, fa, fb, fb, rabi, rabi, rabi, pulse.phase))
    hs = build_hv_symmetric(pulse, env)
    for t in (-2.0, 0.0, 0.5):
        diff = hg(t) - hs(t)
        # the two differ only by a common diagonal shift
        np.testing.assert_allclose(diff, diff[0, 0] * np.eye(3), atol=1e-14)
        assert diff[1, 1] == pytest.approx(diff[0, 0], abs=1e-14)


def test_general_hamiltonian_zero_factors_and_hermiticity():
    rng = np.random.default_rng(0)
    zero = GeneralVHamiltonian(0, 0, 0, 0, math.cos, math.sin, math.exp, 0.4)
    assert np.all(build_hv_general(zero)(0.3) == 0)
    for _ in range(50):
        f = rng.normal(size=4)
        cfg = GeneralVHamiltonian(*f, math.cos, math.sin, math.exp, rng.uniform(0, 2 * PI))
        h = build_hv_general(cfg)(rng.uniform(-1, 1))
        assert np.max(np.abs(h - h.conj().T)) < 1e-14


def test_integrate_zero_hamiltonian():
    psi0 = np.array([0.6, 0.8j])
    out = integrate_tdse(lambda t: np.zeros((2, 2)), psi0, 0.0, 1.0, 0.01)
    np.testing.assert_array_equal(out, psi0)


def test_integrate_rejects_bad_input():
    with pytest.raises(ValueError):
        integrate_tdse(lambda t: np.zeros((2, 2)), [1.0, 1.0], 0.0, 1.0, 0.1)
    with pytest.raises(ValueError):
        integrate_tdse(lambda t: np.zeros((2, 2)), [1.0, 0.0], 0.0, 1.0, 0.0)
    with pytest.raises(NumericalError):
        integrate_tdse(lambda t: np.full((2, 2), np.nan), [1.0, 0.0], 0.0, 1.0, 0.1)


def test_integrated_v_pi_pulse_prepares_entangled_state():
    env = EnvelopeSpec()
    h = build_hv_symmetric(Pulse(PI, E10), env)
    psi = integrate_tdse(h, [1, 0, 0], env.t_start, env.t_end, (env.t_end - env.t_start) / 4000)
    np.testing.assert_allclose(psi, [0, -E10.a_tilde, -E10.b_tilde], atol=1e-8)
    assert abs(np.linalg.norm(psi) - 1) < 1e-8


@pytest.mark.parametrize("area", [PI / 3, PI, 2 * PI, 3.7 * PI])
def test_integrated_propagators_match_closed_forms(area):
    pulse = Pulse(area, E10, 0.9)
    np.testing.assert_allclose(propagate_pulse(build_hv_symmetric(pulse), 3), uv_step(pulse),
                               atol=1e-8)
    for alpha in (1.0, -0.45, 0.2):
        np.testing.assert_allclose(propagate_pulse(build_ht_symmetric(pulse, alpha), 2),
                                   ut_step(pulse, alpha), atol=1e-8)


def test_two_level_pi_pulse_from_ground():
    pulse = Pulse(PI, GeometryVector(1.0, 0.0))
    u = propagate_pulse(build_ht_symmetric(pulse, 1.0), 2)
    np.testing.assert_allclose(u[:, 0], ut_step(pulse, 1.0)[:, 0], atol=1e-8)


def test_envelope_width_does_not_matter():
    pulse = Pulse(2.3 * PI, E10, 0.4)
    narrow = propagate_pulse(build_hv_symmetric(pulse, EnvelopeSpec(width=0.5)), 3,
                             EnvelopeSpec(width=0.5))
    wide = propagate_pulse(build_hv_symmetric(pulse, EnvelopeSpec(width=3.0, center=2.0)), 3,
                           EnvelopeSpec(width=3.0, center=2.0))
    np.testing.assert_allclose(narrow, wide, atol=1e-8)


def test_dark_state_under_integration():
    env = EnvelopeSpec()
    dark = np.array([0, E10.a_tilde, E10.b_tilde], dtype=complex)
    pulse = Pulse(1.7 * PI, E10.orthogonal(), 0.5)
    out = propagate_pulse(build_hv_symmetric(pulse, env), 3, env) @ dark
    np.testing.assert_allclose(out, cmath.exp(0.5j * pulse.area) * dark, atol=1e-8)


def test_single_photon_steps():
    u = single_photon_step(PI, 1.0)
    assert u[1, 0] == pytest.approx(1j, abs=1e-15)
    u = single_photon_step(2 * PI, 1.0)
    assert u[0, 0] == pytest.approx(-1, abs=1e-15)
    v = single_photon_step(PI, E10, 0.3)
    assert v.shape == (3, 3)
    np.testing.assert_allclose(v, uv_step(Pulse(PI, E10, 0.3)) * cmath.exp(-0.5j * PI), atol=1e-15)


def test_single_photon_integration_matches_closed_form():
    pulse = Pulse(1.3 * PI, E10, 2.0)
    np.testing.assert_allclose(propagate_pulse(build_hv_symmetric(pulse, stark=False), 3),
                               single_photon_step(pulse.area, E10, pulse.phase), atol=1e-8)


def test_single_photon_jp_gives_cminus():
    pulses = build_sequence(ProtocolSpec(Scheme.JP, 3, 0.0, 2 * PI, 2 * PI))
    assert compose_gate(pulses, stark=False).allclose(GateDiagonal(1, -1, -1, -1))

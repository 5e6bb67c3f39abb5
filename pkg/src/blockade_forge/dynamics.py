"""Time-dependent effective Hamiltonians and a fixed-step Schroedinger integrator.

The closed-form propagators only depend on pulse areas.  This module
builds the underlying time-dependent Hamiltonians for a smooth pulse
envelope and integrates them numerically, which gives an independent
check of those closed forms.  Units have hbar = 1 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .propagators import ut_step, uv_step
from .protocol import GeometryVector, InvalidSpecError, Pulse

HamiltonianFn = Callable[[float], np.ndarray]

DEFAULT_STEPS = 4000


class NumericalError(RuntimeError):
    """Raised when an integration meets non-finite values."""


@dataclass(frozen=True)
class EnvelopeSpec:
    """Truncated Gaussian pulse envelope.

    Parameters
    ----------
    center : float
        Time of the peak.
    width : float
        Gaussian standard deviation ``sigma``.
    truncation : float
        Half-width of the time window in units of ``sigma`` (at least 4).
    shape : str
        Only ``"gaussian"`` is supported.
    """

    center: float = 0.0
    width: float = 1.0
    truncation: float = 4.0
    shape: str = "gaussian"

    def __post_init__(self):
        if self.shape != "gaussian":
            raise InvalidSpecError(f"unsupported envelope shape {self.shape!r}")
        if not (math.isfinite(self.width) and self.width > 0):
            raise InvalidSpecError(f"envelope width must be > 0, got {self.width!r}")
        if not self.truncation >= 4.0:
            raise InvalidSpecError(f"truncation must be >= 4 widths, got {self.truncation!r}")
        if not math.isfinite(self.center):
            raise InvalidSpecError("envelope center must be finite")

    @property
    def t_start(self) -> float:
        return self.center - self.truncation * self.width

    @property
    def t_end(self) -> float:
        return self.center + self.truncation * self.width

    def profile(self, t) -> np.ndarray:
        """Unit-peak Gaussian, zero outside the truncation window."""
        x = (np.asarray(t, dtype=float) - self.center) / self.width
        return np.where(np.abs(x) <= self.truncation, np.exp(-0.5 * x * x), 0.0)

    def integral(self) -> float:
        """Time integral of :meth:`profile` over the window."""
        return self.width * math.sqrt(2.0 * math.pi) * math.erf(self.truncation / math.sqrt(2.0))

    def rabi(self, t, area: float) -> np.ndarray:
        """Effective Rabi frequency whose integral over the window is ``area``."""
        return area * self.profile(t) / self.integral()

    def mixing_angle(self, t: float, area: float) -> float:
        """Half the area accumulated up to time ``t``; reaches ``area / 2`` at the end."""
        x = (t - self.center) / self.width
        x = min(max(x, -self.truncation), self.truncation)
        edge = math.erf(self.truncation / math.sqrt(2.0))
        frac = (math.erf(x / math.sqrt(2.0)) + edge) / (2.0 * edge)
        return 0.5 * area * frac


@dataclass(frozen=True)
class PhysicalPulse:
    """Pump/Stokes pulse pair described by physical parameters.

    Both fields share the envelope shape ``exp(-(t - t0)^2 / (4 sigma^2))``,
    so their product, and with it the effective Rabi frequency
    ``pump * stokes / (2 * detuning)``, is the Gaussian of ``envelope``.
    """

    peak_rabi_pump: float
    peak_rabi_stokes: float
    detuning: float
    envelope: EnvelopeSpec = EnvelopeSpec()
    phase: float = 0.0

    def __post_init__(self):
        if self.detuning == 0 or not math.isfinite(self.detuning):
            raise InvalidSpecError("detuning must be finite and non-zero")
        for name in ("peak_rabi_pump", "peak_rabi_stokes", "phase"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidSpecError(f"{name} must be finite")

    @property
    def peak_effective_rabi(self) -> float:
        return self.peak_rabi_pump * self.peak_rabi_stokes / (2.0 * self.detuning)

    @property
    def area(self) -> float:
        return self.peak_effective_rabi * self.envelope.integral()

    def pump_rabi(self, t) -> np.ndarray:
        return self.peak_rabi_pump * np.sqrt(self.envelope.profile(t))

    def stokes_rabi(self, t) -> np.ndarray:
        return self.peak_rabi_stokes * np.sqrt(self.envelope.profile(t))

    def effective_rabi(self, t) -> np.ndarray:
        return self.pump_rabi(t) * self.stokes_rabi(t) / (2.0 * self.detuning)

    def to_pulse(self, geometry: GeometryVector) -> Pulse:
        area = self.area
        if area < 0:
            raise InvalidSpecError(
                f"effective area {area!r} is negative; flip the detuning sign or a field sign")
        return Pulse(area, geometry, self.phase)

    @classmethod
    def for_area(cls, area: float, detuning: float, envelope: EnvelopeSpec | None = None,
                 phase: float = 0.0) -> "PhysicalPulse":
        """Equal pump and Stokes peaks giving effective area ``area``."""
        envelope = envelope or EnvelopeSpec()
        peak_eff = area / envelope.integral()
        if peak_eff * detuning < 0:
            raise InvalidSpecError("area and detuning must have the same sign")
        rabi = math.sqrt(2.0 * detuning * peak_eff)
        return cls(rabi, rabi, detuning, envelope, phase)


def build_two_photon_hamiltonian(pump_rabi: Callable, stokes_rabi: Callable, detuning: float,
                                 phase: float = 0.0) -> HamiltonianFn:
    """Two-level effective Hamiltonian on ``{|1>, |r>}`` after eliminating the intermediate level.

    The diagonal carries the Stark shifts ``pump^2 / (2 detuning)`` and
    ``stokes^2 / (2 detuning)``, the coupling ``pump * stokes / (2 detuning)``,
    all times ``-1/2``.
    """
    if detuning == 0:
        raise InvalidSpecError("detuning must be non-zero")
    e = complex(math.cos(phase), math.sin(phase))

    def h(t: float) -> np.ndarray:
        p = float(pump_rabi(t))
        s = float(stokes_rabi(t))
        k = -0.5 / (2.0 * detuning)
        return k * np.array([[p * p, p * s * e], [p * s * e.conjugate(), s * s]], dtype=complex)

    return h


def _v_generator(a: float, b: float, phase: float, stark: bool) -> np.ndarray:
    e = complex(math.cos(phase), math.sin(phase))
    d = 1.0 if stark else 0.0
    return np.array([[d, a * e, b * e],
                     [a * e.conjugate(), d, 0.0],
                     [b * e.conjugate(), 0.0, d]], dtype=complex)


def _t_generator(alpha: float, phase: float, stark: bool) -> np.ndarray:
    e = complex(math.cos(phase), math.sin(phase))
    d = abs(alpha) if stark else 0.0
    return np.array([[d, alpha * e], [alpha * e.conjugate(), d]], dtype=complex)


def build_hv_symmetric(pulse: Pulse, envelope: EnvelopeSpec | None = None,
                       stark: bool = True) -> HamiltonianFn:
    """Time-dependent 3x3 Hamiltonian of one pulse on ``{|11>, |r1>, |1r>}``.

    ``-rabi(t)/2`` times a constant matrix with unit diagonal and couplings
    ``a_tilde e^{i phase}``, ``b_tilde e^{i phase}`` from ``|11>``.  With
    ``stark=False`` the diagonal is dropped (single-photon driving).
    """
    envelope = envelope or EnvelopeSpec()
    gen = _v_generator(pulse.geometry.a_tilde, pulse.geometry.b_tilde, pulse.phase, stark)
    area = pulse.area

    def h(t: float) -> np.ndarray:
        return (-0.5 * float(envelope.rabi(t, area))) * gen

    return h


def build_ht_symmetric(pulse: Pulse, alpha: float, envelope: EnvelopeSpec | None = None,
                       stark: bool = True) -> HamiltonianFn:
    """Time-dependent 2x2 Hamiltonian of one pulse on ``{|t>, |Rydberg>}``.

    Diagonal ``|alpha|``, coupling ``alpha e^{i phase}``, scaled by
    ``-rabi(t)/2``.
    """
    envelope = envelope or EnvelopeSpec()
    gen = _t_generator(alpha, pulse.phase, stark)
    area = pulse.area

    def h(t: float) -> np.ndarray:
        return (-0.5 * float(envelope.rabi(t, area))) * gen

    return h


@dataclass(frozen=True)
class GeneralVHamiltonian:
    """Unsymmetrised three-level Hamiltonian with separate pump and Stokes factors.

    ``rabi_pp``, ``rabi_ps`` and ``rabi_ss`` are the effective two-photon
    Rabi frequencies (functions of time) built from pump-pump, pump-Stokes
    and Stokes-Stokes products.
    """

    a_pump: float
    a_stokes: float
    b_pump: float
    b_stokes: float
    rabi_pp: Callable
    rabi_ps: Callable
    rabi_ss: Callable
    phase: float = 0.0

    def __post_init__(self):
        for name in ("a_pump", "a_stokes", "b_pump", "b_stokes", "phase"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidSpecError(f"{name} must be finite")


def build_hv_general(cfg: GeneralVHamiltonian) -> HamiltonianFn:
    """Time-dependent 3x3 Hamiltonian on ``{|11>, |r1>, |1r>}`` for arbitrary factors.

    Each Rydberg state picks up Stark shifts from both qubits; the two
    singly excited states are not coupled to each other.
    """
    ap, as_, bp, bs = cfg.a_pump, cfg.a_stokes, cfg.b_pump, cfg.b_stokes
    e = complex(math.cos(cfg.phase), math.sin(cfg.phase))

    def h(t: float) -> np.ndarray:
        pp = float(cfg.rabi_pp(t))
        ps = float(cfg.rabi_ps(t))
        ss = float(cfg.rabi_ss(t))
        ca = ap * as_ * ps * e
        cb = bp * bs * ps * e
        m = np.array([
            [(ap * ap + bp * bp) * pp, ca, cb],
            [ca.conjugate(), bp * bp * pp + as_ * as_ * ss, 0.0],
            [cb.conjugate(), 0.0, ap * ap * pp + bs * bs * ss],
        ], dtype=complex)
        return -0.5 * m

    return h


def integrate_tdse(h: HamiltonianFn, psi0, t0: float, t1: float, step: float) -> np.ndarray:
    """Integrate ``i d psi/dt = H(t) psi`` with classical fixed-step RK4.

    ``psi0`` may be a state vector or a matrix whose columns are states
    (pass the identity to obtain the propagator).  Each column must be
    normalised.  The step is shrunk slightly so that it divides
    ``t1 - t0`` exactly.

    Raises
    ------
    ValueError
        For a non-positive step or unnormalised input.
    NumericalError
        If the Hamiltonian or the state becomes non-finite.
    """
    if not step > 0:
        raise ValueError(f"step must be > 0, got {step!r}")
    psi = np.array(psi0, dtype=complex)
    norms = np.linalg.norm(psi, axis=0)
    if np.any(np.abs(norms - 1.0) > 1e-10):
        raise ValueError("initial state must be normalised")
    if t1 == t0:
        return psi
    n = max(1, math.ceil(abs(t1 - t0) / step - 1e-9))
    dt = (t1 - t0) / n

    def rhs(t, y):
        m = h(t)
        if not np.all(np.isfinite(m)):
            raise NumericalError(f"non-finite Hamiltonian entry at t={t!r}")
        return -1j * (m @ y)

    t = t0
    for i in range(n):
        k1 = rhs(t, psi)
        k2 = rhs(t + 0.5 * dt, psi + 0.5 * dt * k1)
        k3 = rhs(t + 0.5 * dt, psi + 0.5 * dt * k2)
        k4 = rhs(t + dt, psi + dt * k3)
        psi = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = t0 + (i + 1) * dt
    if not np.all(np.isfinite(psi)):
        raise NumericalError("state became non-finite during integration")
    return psi


def propagate_pulse(h: HamiltonianFn, dim: int, envelope: EnvelopeSpec | None = None,
                    steps: int = DEFAULT_STEPS) -> np.ndarray:
    """Numerical end-of-pulse propagator of ``h`` over the envelope window."""
    envelope = envelope or EnvelopeSpec()
    span = envelope.t_end - envelope.t_start
    return integrate_tdse(h, np.eye(dim, dtype=complex), envelope.t_start, envelope.t_end,
                          span / steps)


def propagate_scaled_batch(generators: np.ndarray, areas: np.ndarray,
                           envelope: EnvelopeSpec | None = None,
                           steps: int = DEFAULT_STEPS) -> np.ndarray:
    """RK4 propagators for many Hamiltonians of the form ``-rabi(t)/2 * G``.

    ``generators`` has shape ``(N, d, d)`` and ``areas`` shape ``(N,)``.
    All systems share the envelope, so the whole batch is stepped at once.
    Returns the ``(N, d, d)`` end-of-pulse propagators.
    """
    envelope = envelope or EnvelopeSpec()
    gens = np.asarray(generators, dtype=complex)
    areas = np.asarray(areas, dtype=float)
    if not (np.all(np.isfinite(gens)) and np.all(np.isfinite(areas))):
        raise NumericalError("non-finite generator or area")
    n_sys, dim, _ = gens.shape
    # i dU/dt = f(t) * scale_k * G_k U with f the unit-area envelope
    a = -1j * (-0.5 * areas)[:, None, None] * gens
    u = np.broadcast_to(np.eye(dim, dtype=complex), (n_sys, dim, dim)).copy()
    t0 = envelope.t_start
    dt = (envelope.t_end - t0) / steps
    for i in range(steps):
        t = t0 + i * dt
        f0 = float(envelope.rabi(t, 1.0))
        fm = float(envelope.rabi(t + 0.5 * dt, 1.0))
        f1 = float(envelope.rabi(t + dt, 1.0))
        k1 = f0 * (a @ u)
        k2 = fm * (a @ (u + 0.5 * dt * k1))
        k3 = fm * (a @ (u + 0.5 * dt * k2))
        k4 = f1 * (a @ (u + dt * k3))
        u = u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(u)):
        raise NumericalError("propagator became non-finite during integration")
    return u


def v_generator(geometry: GeometryVector, phase: float, stark: bool = True) -> np.ndarray:
    """Constant matrix of the three-level Hamiltonian (multiply by ``-rabi/2``)."""
    return _v_generator(geometry.a_tilde, geometry.b_tilde, phase, stark)


def t_generator(alpha: float, phase: float, stark: bool = True) -> np.ndarray:
    """Constant matrix of the two-level Hamiltonian (multiply by ``-rabi/2``)."""
    return _t_generator(alpha, phase, stark)


def single_photon_step(area: float, alpha: float | GeometryVector, phase: float = 0.0) -> np.ndarray:
    """End-of-pulse propagator for resonant single-photon driving.

    A real ``alpha`` gives the 2x2 propagator of a two-level system with
    that coupling factor; a :class:`GeometryVector` gives the 3x3
    propagator on ``{|11>, |r1>, |1r>}``.  No Stark phase appears.
    """
    if isinstance(alpha, GeometryVector):
        return uv_step(Pulse(area, alpha, phase), stark=False)
    return ut_step(Pulse(area, GeometryVector(1.0, 0.0), phase), float(alpha), stark=False)

"""End-of-pulse propagators and their composition into the gate diagonal.

Basis conventions
-----------------
* V system (initial state ``|11>``): ordered basis ``{|11>, |r1>, |1r>}``.
* Two-level systems (``|10>`` or ``|01>``): ``{|t>, |Rydberg>}``; the
  coupling factor ``alpha`` is ``a_tilde`` for qubit A (``|10>``) and
  ``b_tilde`` for qubit B (``|01>``).

Pulses act sequentially: the product is written with pulse 1 rightmost.

The two-photon (``stark=True``) propagators carry the AC Stark-shift
phase.  In the V system every diagonal element of the Hamiltonian is the
full effective Rabi frequency, giving the prefactor ``exp(i S/2)``.  In a
two-level system the diagonal is ``|alpha|`` times it, so the prefactor
is ``exp(i |alpha| S/2)``; the coupling rotation uses the signed
``alpha``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .protocol import GeometryVector, Pulse, Scheme

_LEAK_TOL = 1e-12


@dataclass(frozen=True)
class GateDiagonal:
    """Final amplitudes ``<q|U|q>`` on the four computational states.

    ``|00>`` is decoupled from the light, so ``u00`` is pinned to 1.
    The other entries may have modulus below one when population is
    left in Rydberg states.
    """

    u00: complex
    u01: complex
    u10: complex
    u11: complex

    def __post_init__(self):
        if self.u00 != 1:
            raise ValueError(f"u00 must be exactly 1, got {self.u00!r}")
        object.__setattr__(self, "u00", 1.0 + 0.0j)
        for name in ("u01", "u10", "u11"):
            value = complex(getattr(self, name))
            if not cmath.isfinite(value):
                raise ValueError(f"{name} is not finite")
            if abs(value) > 1.0 + _LEAK_TOL:
                raise ValueError(f"|{name}| = {abs(value)!r} exceeds 1")
            object.__setattr__(self, name, value)

    @classmethod
    def from_amplitudes(cls, u01: complex, u10: complex, u11: complex) -> "GateDiagonal":
        return cls(1.0, u01, u10, u11)

    def as_array(self) -> np.ndarray:
        return np.array([self.u00, self.u01, self.u10, self.u11], dtype=complex)

    def leakage(self) -> np.ndarray:
        """Population ``1 - |u_q|^2`` left outside each computational state."""
        return 1.0 - np.abs(self.as_array()) ** 2

    def allclose(self, other: "GateDiagonal", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.as_array(), other.as_array(), rtol=0.0, atol=atol))


def uv_step(pulse: Pulse, stark: bool = True) -> np.ndarray:
    """3x3 propagator of one pulse on ``{|11>, |r1>, |1r>}``."""
    half = pulse.area / 2.0
    c, s = math.cos(half), math.sin(half)
    a, b = pulse.geometry.a_tilde, pulse.geometry.b_tilde
    e = cmath.exp(1j * pulse.phase)
    ec = e.conjugate()
    m = np.array([
        [c, 1j * e * a * s, 1j * e * b * s],
        [1j * ec * a * s, a * a * c + b * b, a * b * (c - 1.0)],
        [1j * ec * b * s, a * b * (c - 1.0), b * b * c + a * a],
    ], dtype=complex)
    if stark:
        m *= cmath.exp(1j * half)
    return m


def ut_step(pulse: Pulse, alpha: float, stark: bool = True) -> np.ndarray:
    """2x2 propagator of one pulse on ``{|t>, |Rydberg>}`` with coupling ``alpha``."""
    if abs(alpha) > 1.0 + 1e-12:
        raise ValueError(f"|alpha| must be <= 1, got {alpha!r}")
    theta = alpha * pulse.area / 2.0
    c, s = math.cos(theta), math.sin(theta)
    e = cmath.exp(1j * pulse.phase)
    m = np.array([[c, 1j * e * s], [1j * e.conjugate() * s, c]], dtype=complex)
    if stark:
        m *= cmath.exp(1j * abs(theta))
    return m


def compose_gate(pulses: Sequence[Pulse], stark: bool = True) -> GateDiagonal:
    """Gate diagonal of a pulse sequence via the explicit matrix product."""
    pulses = list(pulses)
    if not pulses:
        raise ValueError("cannot compose an empty pulse sequence")
    uv = np.eye(3, dtype=complex)
    ua = np.eye(2, dtype=complex)
    ub = np.eye(2, dtype=complex)
    for p in pulses:
        uv = uv_step(p, stark) @ uv
        ua = ut_step(p, p.geometry.a_tilde, stark) @ ua
        ub = ut_step(p, p.geometry.b_tilde, stark) @ ub
    return GateDiagonal(1.0, ub[0, 0], ua[0, 0], uv[0, 0])


def u11_three_pulse_closed(s1: float, s2: float, s3: float,
                           e1: GeometryVector, e2: GeometryVector, e3: GeometryVector,
                           phi1: float, phi2: float, phi3: float) -> complex:
    """``<11|U3 U2 U1|11>`` for three arbitrary pulses, in closed form."""
    c1, c2, c3 = (math.cos(x / 2) for x in (s1, s2, s3))
    sn1, sn2, sn3 = (math.sin(x / 2) for x in (s1, s2, s3))
    d21, d32, d31 = e2.dot(e1), e3.dot(e2), e3.dot(e1)
    ph21 = cmath.exp(1j * (phi2 - phi1))
    ph32 = cmath.exp(1j * (phi3 - phi2))
    ph31 = cmath.exp(1j * (phi3 - phi1))
    bracket = (c3 * c2 * c1
               - ph21 * d21 * c3 * sn2 * sn1
               - ph32 * d32 * sn3 * sn2 * c1
               - ph31 * d32 * d21 * sn1 * c2 * sn3
               - ph31 * (d31 - d32 * d21) * sn1 * sn3)
    return cmath.exp(0.5j * (s1 + s2 + s3)) * bracket


def u11_orthogonal_closed(s1: float, s2: float, s3: float,
                          phi1: float, phi3: float, sign: int = 1) -> complex:
    """Three-pulse ``U^V_11`` when ``e2`` is orthogonal to ``e1`` and ``e3 = sign * e1``."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    bracket = (math.cos(s3 / 2) * math.cos(s2 / 2) * math.cos(s1 / 2)
               - sign * cmath.exp(1j * (phi3 - phi1)) * math.sin(s3 / 2) * math.sin(s1 / 2))
    return cmath.exp(0.5j * (s1 + s2 + s3)) * bracket


def ut11_three_pulse_closed(s1: float, s2: float, s3: float,
                            alpha1: float, alpha2: float, alpha3: float,
                            phi1: float, phi2: float, phi3: float) -> complex:
    """``<t|U3 U2 U1|t>`` for a two-level system, in closed form."""
    th = [alpha1 * s1 / 2, alpha2 * s2 / 2, alpha3 * s3 / 2]
    c1, c2, c3 = (math.cos(t) for t in th)
    sn1, sn2, sn3 = (math.sin(t) for t in th)
    bracket = (c3 * c2 * c1
               - cmath.exp(1j * (phi3 - phi2)) * sn3 * sn2 * c1
               - cmath.exp(1j * (phi3 - phi1)) * sn3 * c2 * sn1
               - cmath.exp(1j * (phi2 - phi1)) * c3 * sn2 * sn1)
    return cmath.exp(1j * sum(abs(t) for t in th)) * bracket


def two_pulse_closed(s1: float, s2: float, phi1: float, phi2: float,
                     scheme: Scheme | str, alpha1: float, alpha2: float,
                     sign: int = 1) -> tuple[complex, complex]:
    """``(U^V_11, U^T_11)`` for a two-pulse SOP or SPP sequence.

    For SPP, ``sign=+1`` means ``e2 = e1`` and ``sign=-1`` means
    ``e2 = -e1``.  ``sign`` is ignored for SOP, where the two geometry
    vectors are orthogonal.
    """
    scheme = Scheme.parse(scheme)
    if scheme is Scheme.JP:
        raise ValueError("two_pulse_closed supports only the SOP and SPP schemes")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    dphi = cmath.exp(1j * (phi2 - phi1))
    stark_v = cmath.exp(0.5j * (s1 + s2))
    c1, c2 = math.cos(s1 / 2), math.cos(s2 / 2)
    if scheme is Scheme.SOP:
        uv = stark_v * c1 * c2
    else:
        uv = stark_v * (c2 * c1 - sign * dphi * math.sin(s2 / 2) * math.sin(s1 / 2))
    t1, t2 = alpha1 * s1 / 2, alpha2 * s2 / 2
    ut = cmath.exp(1j * (abs(t1) + abs(t2))) * (
        math.cos(t1) * math.cos(t2) - dphi * math.sin(t1) * math.sin(t2))
    return uv, ut

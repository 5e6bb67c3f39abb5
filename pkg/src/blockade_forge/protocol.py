"""Pulse-sequence domain types and scheme constructors.

A protocol is described at a high level by its scheme (JP, SOP or SPP),
the number of pulses ``M``, one overlap angle ``beta`` and the summed
areas of the odd- and even-numbered pulses.  :func:`build_sequence`
expands that description into concrete :class:`Pulse` objects.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Sequence

TWO_PI = 2.0 * math.pi
_NORM_TOL = 1e-12


class InvalidSpecError(ValueError):
    """Raised when a protocol or pulse description violates its invariants."""


def wrap_phase(phase: float) -> float:
    """Map an angle onto ``[0, 2*pi)``."""
    wrapped = math.fmod(phase, TWO_PI)
    if wrapped < 0.0:
        wrapped += TWO_PI
    # fmod of a tiny negative number can round up to exactly 2*pi
    if wrapped >= TWO_PI:
        wrapped = 0.0
    return wrapped


@dataclass(frozen=True)
class GeometryVector:
    """Local field amplitudes ``(a_tilde, b_tilde)`` of one pulse at qubits A and B."""

    a_tilde: float
    b_tilde: float

    def __post_init__(self):
        a, b = float(self.a_tilde), float(self.b_tilde)
        if not (math.isfinite(a) and math.isfinite(b)):
            raise InvalidSpecError(f"non-finite geometry vector ({a}, {b})")
        if abs(a * a + b * b - 1.0) > _NORM_TOL:
            raise InvalidSpecError(
                f"geometry vector ({a}, {b}) is not unit norm: |e|^2 = {a * a + b * b!r}")
        object.__setattr__(self, "a_tilde", a)
        object.__setattr__(self, "b_tilde", b)

    @classmethod
    def from_angle(cls, beta: float) -> "GeometryVector":
        return cls(math.cos(beta), math.sin(beta))

    @property
    def beta(self) -> float:
        """Overlap angle ``arctan(b_tilde / a_tilde)``."""
        if self.a_tilde == 0.0:
            return math.copysign(math.pi / 2, self.b_tilde)
        return math.atan(self.b_tilde / self.a_tilde)

    def dot(self, other: "GeometryVector") -> float:
        return self.a_tilde * other.a_tilde + self.b_tilde * other.b_tilde

    def orthogonal(self) -> "GeometryVector":
        """The vector rotated by +90 degrees, ``(-b_tilde, a_tilde)``."""
        return GeometryVector(-self.b_tilde, self.a_tilde)

    def __neg__(self) -> "GeometryVector":
        return GeometryVector(-self.a_tilde, -self.b_tilde)


@dataclass(frozen=True)
class Pulse:
    """One effective two-photon pulse.

    Parameters
    ----------
    area : float
        Effective two-photon pulse area in radians (non-negative).
    geometry : GeometryVector
        Geometrical factors of the pulse at the two qubits.
    phase : float
        Relative Stokes-pump optical phase; stored wrapped to ``[0, 2*pi)``.
    """

    area: float
    geometry: GeometryVector
    phase: float = 0.0

    def __post_init__(self):
        area = float(self.area)
        if not math.isfinite(area) or area < 0.0:
            raise InvalidSpecError(f"pulse area must be finite and >= 0, got {self.area!r}")
        if not math.isfinite(self.phase):
            raise InvalidSpecError(f"non-finite pulse phase {self.phase!r}")
        object.__setattr__(self, "area", area)
        object.__setattr__(self, "phase", wrap_phase(float(self.phase)))


class Scheme(enum.Enum):
    JP = "jp"
    SOP = "sop"
    SPP = "spp"

    @classmethod
    def parse(cls, value: "str | Scheme") -> "Scheme":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidSpecError(
                f"unknown scheme {value!r}; expected one of jp, sop, spp") from None


@dataclass(frozen=True)
class ProtocolSpec:
    """High-level description of a symmetric pulse sequence.

    All odd-numbered pulses share one geometry vector and one area
    (``s_odd`` split evenly), likewise the even-numbered pulses.  ``sign``
    only matters for SOP: ``-1`` flips every other odd pulse, giving
    ``e_3 = -e_1``.
    """

    scheme: Scheme
    m_pulses: int
    beta: float
    s_odd: float
    s_even: float
    phases: tuple[float, ...] | None = None
    sign: int = 1

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        if int(self.m_pulses) != self.m_pulses or self.m_pulses < 1:
            raise InvalidSpecError(f"m_pulses must be a positive integer, got {self.m_pulses!r}")
        object.__setattr__(self, "m_pulses", int(self.m_pulses))
        for name in ("beta", "s_odd", "s_even"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidSpecError(f"{name} must be finite")
        if self.s_odd < 0 or self.s_even < 0:
            raise InvalidSpecError(
                f"summed areas must be >= 0, got s_odd={self.s_odd}, s_even={self.s_even}")
        if self.m_pulses == 1 and self.s_even > 0:
            raise InvalidSpecError("a single-pulse protocol has no even pulses; s_even must be 0")
        if self.scheme is Scheme.JP and self.beta != 0.0:
            raise InvalidSpecError(f"JP addresses the qubits independently; beta must be 0, got {self.beta}")
        if self.sign not in (1, -1):
            raise InvalidSpecError(f"sign must be +1 or -1, got {self.sign!r}")
        if self.phases is None:
            phases = (0.0,) * self.m_pulses
        else:
            phases = tuple(float(p) for p in self.phases)
        if len(phases) != self.m_pulses:
            raise InvalidSpecError(f"expected {self.m_pulses} phases, got {len(phases)}")
        if not all(math.isfinite(p) for p in phases):
            raise InvalidSpecError("phases must be finite")
        object.__setattr__(self, "phases", tuple(wrap_phase(p) for p in phases))

    @property
    def n_odd(self) -> int:
        return (self.m_pulses + 1) // 2

    @property
    def n_even(self) -> int:
        return self.m_pulses // 2

    def with_phases(self, phases: Sequence[float]) -> "ProtocolSpec":
        return replace(self, phases=tuple(phases))

    def with_areas(self, s_odd: float, s_even: float) -> "ProtocolSpec":
        return replace(self, s_odd=s_odd, s_even=s_even)

    def geometries(self) -> list[GeometryVector]:
        odd = GeometryVector.from_angle(self.beta)
        if self.scheme is Scheme.SPP:
            even = odd
        else:
            even = odd.orthogonal()
        out = []
        for k in range(self.m_pulses):
            if k % 2 == 1:
                out.append(even)
            elif self.scheme is Scheme.SOP and self.sign < 0 and (k // 2) % 2 == 1:
                out.append(-odd)
            else:
                out.append(odd)
        return out

    def areas(self) -> list[float]:
        odd_area = self.s_odd / self.n_odd
        even_area = self.s_even / self.n_even if self.n_even else 0.0
        return [odd_area if k % 2 == 0 else even_area for k in range(self.m_pulses)]


def build_sequence(spec: ProtocolSpec) -> list[Pulse]:
    """Expand a protocol description into its ``M`` pulses (in time order)."""
    return [Pulse(area, geom, phase)
            for area, geom, phase in zip(spec.areas(), spec.geometries(), spec.phases)]


def beta_from_b_squared(b_squared: float) -> float:
    """Overlap angle for a unit geometry vector with ``b_tilde**2 = b_squared``."""
    if not (0.0 <= b_squared <= 1.0):
        raise ValueError(f"b_squared must lie in [0, 1], got {b_squared!r}")
    if b_squared == 1.0:
        return math.pi / 2
    return math.atan(math.sqrt(b_squared) / math.sqrt(1.0 - b_squared))

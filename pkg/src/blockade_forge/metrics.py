"""Target phase gates, gate fidelity and entangling power."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .propagators import GateDiagonal

METRICS = ("trace", "average")


@dataclass(frozen=True)
class TargetGate:
    """Diagonal two-qubit phase gate ``diag(d00, d01, d10, d11)``."""

    d00: complex
    d01: complex
    d10: complex
    d11: complex

    def __post_init__(self):
        for name in ("d00", "d01", "d10", "d11"):
            value = complex(getattr(self, name))
            if abs(abs(value) - 1.0) > 1e-12:
                raise ValueError(f"target entry {name}={value!r} is not unit modulus")
            object.__setattr__(self, name, value)

    def as_array(self) -> np.ndarray:
        return np.array([self.d00, self.d01, self.d10, self.d11], dtype=complex)

    def rotated(self, chi: float) -> "TargetGate":
        ph = cmath.exp(1j * chi)
        return TargetGate(*(ph * d for d in self.as_array()))


def target_cplus() -> TargetGate:
    """``diag(1, 1, 1, -1)``: the gate two-photon JP produces natively."""
    return TargetGate(1, 1, 1, -1)


def target_cminus() -> TargetGate:
    """``diag(1, -1, -1, -1)``: the single-photon JP gate."""
    return TargetGate(1, -1, -1, -1)


def target_cphase(theta01: float, theta10: float, theta11: float) -> TargetGate:
    """General diagonal phase gate ``diag(1, e^{i theta01}, e^{i theta10}, e^{i theta11})``."""
    return TargetGate(1, cmath.exp(1j * theta01), cmath.exp(1j * theta10), cmath.exp(1j * theta11))


def _entries(gate) -> np.ndarray:
    if isinstance(gate, (GateDiagonal, TargetGate)):
        return gate.as_array()
    arr = np.asarray(gate, dtype=complex)
    if arr.shape != (4,):
        raise ValueError(f"expected four diagonal entries, got shape {arr.shape}")
    return arr


def fidelity(gate, target: TargetGate, metric: str = "trace") -> float:
    """Gate fidelity of a diagonal gate against a diagonal target.

    ``metric="trace"`` (default) is ``|Tr(T^dag U)|^2 / 16``.  No local
    phase corrections are applied, so C+ and C- are distinct targets.
    ``metric="average"`` is the average gate fidelity
    ``(|Tr(T^dag U)|^2 + Tr(U^dag U)) / 20``, which also accounts for
    leakage out of the computational subspace.

    ``gate`` may be a :class:`GateDiagonal` or any four complex entries;
    the latter form is used to check phase-rotation invariance.
    """
    u = _entries(gate)
    d = target.as_array()
    tr = np.vdot(d, u)
    tr2 = abs(tr) ** 2
    if metric == "trace":
        return float(tr2 / 16.0)
    if metric == "average":
        return float((tr2 + np.vdot(u, u).real) / 20.0)
    raise ValueError(f"unknown fidelity metric {metric!r}; expected one of {METRICS}")


@dataclass(frozen=True)
class EntanglingPower:
    """Entangling power together with the leakage flags of the input gate.

    ``approximate`` is set when some ``|u_q| < 0.999`` (the diagonal is not
    quite unitary), ``leakage_warning`` when some ``|u_q| < 0.9``.
    """

    value: float
    approximate: bool = False
    leakage_warning: bool = False

    def __float__(self) -> float:
        return self.value


def entangling_power(gate: GateDiagonal, normalized: bool = False) -> EntanglingPower:
    """Entangling power of a diagonal two-qubit gate.

    Only the local invariant ``theta00 - theta01 - theta10 + theta11`` of the
    diagonal phases enters, ``(2/9) sin^2(invariant / 2)``.  The CZ class
    reaches the maximum 2/9; ``normalized=True`` rescales it to 1.
    """
    u = _entries(gate)
    moduli = np.abs(u)
    theta = np.angle(u)
    invariant = theta[0] - theta[1] - theta[2] + theta[3]
    value = math.sin(invariant / 2.0) ** 2
    if not normalized:
        value *= 2.0 / 9.0
    return EntanglingPower(
        value=value,
        approximate=bool(np.any(moduli < 0.999)),
        leakage_warning=bool(np.any(moduli < 0.9)),
    )

"""Multi-start Nelder-Mead maximisation of gate fidelity over pulse phases."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels
from .metrics import TargetGate
from .protocol import TWO_PI, ProtocolSpec, build_sequence, wrap_phase

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class SimplexOptions:
    """Settings for the simplex search and its restarts.

    ``tolerance`` bounds the spread of objective values over the simplex
    vertices.  ``initial_step`` is the edge length (radians) of the initial
    simplex around each starting point.
    """

    max_iterations: int = 2000
    tolerance: float = 1e-10
    restarts: int = 20
    seed: int = 0
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5
    initial_step: float = 0.5

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if int(self.restarts) != self.restarts or self.restarts < 1:
            raise ValueError("restarts must be an integer >= 1")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 0:
            raise ValueError("max_iterations must be a non-negative integer")
        if not self.reflection > 0:
            raise ValueError("reflection coefficient must be > 0")
        if not self.expansion > max(1.0, self.reflection):
            raise ValueError("expansion coefficient must exceed 1 and the reflection coefficient")
        if not 0 < self.contraction < 1:
            raise ValueError("contraction coefficient must lie in (0, 1)")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink coefficient must lie in (0, 1)")
        if not self.initial_step > 0:
            raise ValueError("initial_step must be > 0")

    def kernel_args(self) -> tuple:
        return (float(self.initial_step), int(self.max_iterations), float(self.tolerance),
                float(self.reflection), float(self.expansion), float(self.contraction),
                float(self.shrink))


@dataclass(frozen=True)
class SimplexResult:
    x: np.ndarray
    fun: float
    evaluations: int
    iterations: int
    converged: bool


@dataclass(frozen=True)
class OptResult:
    """Outcome of :func:`optimize_phases`; phases are wrapped to ``[0, 2*pi)``."""

    best_phases: tuple[float, ...]
    best_fidelity: float
    evaluations: int
    restarts_used: int
    spec: ProtocolSpec | None = field(default=None, compare=False)


def nelder_mead(objective: Callable[[np.ndarray], float], x0,
                opts: SimplexOptions | None = None) -> SimplexResult:
    """Minimise ``objective`` with the Nelder-Mead simplex method.

    Only ``initial_step``, ``max_iterations``, ``tolerance`` and the four
    coefficients of ``opts`` are used.  A candidate whose objective value is
    not finite is treated as ``+inf``.  The update rules match the compiled
    phase optimiser operation for operation.
    """
    opts = opts or SimplexOptions()
    x0 = np.array(x0, dtype=float).ravel()
    if not np.all(np.isfinite(x0)):
        raise ValueError("initial point must be finite")
    n = x0.size
    alpha, gamma, rho, sigma = opts.reflection, opts.expansion, opts.contraction, opts.shrink
    nfev = 0

    def f(x):
        nonlocal nfev
        nfev += 1
        try:
            value = float(objective(x.copy()))
        except (FloatingPointError, OverflowError, ZeroDivisionError):
            return math.inf
        return value if math.isfinite(value) else math.inf

    sim = np.repeat(x0[None, :], n + 1, axis=0)
    for i in range(1, n + 1):
        sim[i, i - 1] += opts.initial_step
    fs = np.array([f(v) for v in sim])

    it = 0
    converged = False
    while True:
        order = np.argsort(fs, kind="stable")
        sim, fs = sim[order], fs[order]
        spread = fs[n] - fs[0]
        if spread < opts.tolerance or (math.isinf(fs[0]) and math.isinf(fs[n])):
            converged = bool(spread < opts.tolerance)
            break
        if it >= opts.max_iterations:
            break
        it += 1

        cen = np.zeros(n)
        for i in range(n):
            cen += sim[i]
        cen /= n

        xr = cen + alpha * (cen - sim[n])
        fr = f(xr)
        if fr < fs[0]:
            xe = cen + gamma * (xr - cen)
            fe = f(xe)
            if fe < fr:
                sim[n], fs[n] = xe, fe
            else:
                sim[n], fs[n] = xr, fr
        elif fr < fs[n - 1]:
            sim[n], fs[n] = xr, fr
        else:
            if fr < fs[n]:
                xc = cen + rho * (xr - cen)
            else:
                xc = cen + rho * (sim[n] - cen)
            fc = f(xc)
            if fc < min(fr, fs[n]):
                sim[n], fs[n] = xc, fc
            else:
                for i in range(1, n + 1):
                    sim[i] = sim[0] + sigma * (sim[i] - sim[0])
                    fs[i] = f(sim[i])

    return SimplexResult(x=sim[0].copy(), fun=float(fs[0]), evaluations=nfev,
                         iterations=it, converged=converged)


def sequence_arrays(spec: ProtocolSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """``(areas, a_tilde, b_tilde, phases)`` arrays of the pulses of ``spec``."""
    pulses = build_sequence(spec)
    areas = np.array([p.area for p in pulses])
    ga = np.array([p.geometry.a_tilde for p in pulses])
    gb = np.array([p.geometry.b_tilde for p in pulses])
    phases = np.array([p.phase for p in pulses])
    return areas, ga, gb, phases


def target_array(target: TargetGate) -> np.ndarray:
    """Target entries ``(d01, d10, d11)`` relative to ``d00``, as the kernels expect."""
    d = target.as_array()
    return d[1:] / d[0]


def metric_code(metric: str) -> int:
    if metric == "trace":
        return _kernels.METRIC_TRACE
    if metric == "average":
        return _kernels.METRIC_AVERAGE
    raise ValueError(f"unknown fidelity metric {metric!r}")


def point_seed(seed: int, row: int, col: int, *extra: int) -> int:
    """Deterministic 64-bit seed for grid point ``(row, col)`` of a scan.

    ``extra`` integers further separate seed streams (refinement levels).
    """
    ss = np.random.SeedSequence([seed & _SEED_MASK, row, col, *extra])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def restart_points(seed: int, restarts: int, n_free: int) -> np.ndarray:
    """Starting phases, one row per restart, uniform on ``[0, 2*pi)``.

    Row ``r`` depends only on ``seed`` and ``r``, so a longer run extends a
    shorter one.
    """
    rng = np.random.default_rng(seed & _SEED_MASK)
    return rng.uniform(0.0, TWO_PI, size=(restarts, n_free))


def optimize_phases(spec: ProtocolSpec, target: TargetGate, opts: SimplexOptions | None = None,
                    metric: str = "trace", stark: bool = True) -> OptResult:
    """Maximise the fidelity of ``spec`` against ``target`` over its pulse phases.

    Areas and geometry stay fixed.  Only phase differences matter, so phase
    1 is pinned to zero and the other ``M - 1`` phases are searched from
    ``opts.restarts`` random starting points.
    """
    opts = opts or SimplexOptions()
    areas, ga, gb, _ = sequence_arrays(spec)
    tgt = target_array(target)
    code = metric_code(metric)
    starts = restart_points(opts.seed, opts.restarts, spec.m_pulses - 1)
    x, _, nfev = _kernels.optimize_sequence_phases(
        areas, ga, gb, tgt, stark, code, starts, *opts.kernel_args())
    phases = np.array([wrap_phase(p) for p in x])
    best = float(_kernels.sequence_fidelity(areas, ga, gb, phases, tgt, stark, code))
    return OptResult(best_phases=tuple(float(p) for p in phases), best_fidelity=best,
                     evaluations=int(nfev), restarts_used=opts.restarts,
                     spec=spec.with_phases(phases))

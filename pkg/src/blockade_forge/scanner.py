"""Fidelity maps over the summed odd/even pulse areas.

Grid coordinates are integer multiples of the grid step, so a point is
identified by its lattice indices ``(s_even / step, s_odd / step)``.  The
per-point optimiser seed is derived from the global seed and those
indices, which makes every point independent of the grid extent, the
evaluation order and the number of worker threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .metrics import TargetGate
from .optimizer import (SimplexOptions, metric_code, point_seed, restart_points,
                        sequence_arrays, target_array)
from .propagators import GateDiagonal
from .protocol import InvalidSpecError, ProtocolSpec, wrap_phase

THREADS_ENV = "BLOCKADE_FORGE_THREADS"
_LATTICE_TOL = 1e-6
# refinement sub-grids are a quarter of the map step
REFINE_FACTOR = 4


class GridPointError(InvalidSpecError):
    """Invalid protocol at one grid point; carries the point's coordinates."""

    def __init__(self, message: str, row: int, col: int, s_odd: float, s_even: float):
        super().__init__(f"grid point row={row} col={col} "
                         f"(s_odd={s_odd / math.pi:.6g}pi, s_even={s_even / math.pi:.6g}pi): {message}")
        self.row = row
        self.col = col
        self.s_odd = s_odd
        self.s_even = s_even


def default_threads() -> int:
    """Worker count from ``BLOCKADE_FORGE_THREADS``, else the CPU count."""
    value = os.environ.get(THREADS_ENV)
    if value:
        try:
            n = int(value)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {value!r}") from None
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {value!r}")
        return n
    return os.cpu_count() or 1


def _lattice_index(value: float, step: float, name: str) -> int:
    ratio = value / step
    k = round(ratio)
    if abs(ratio - k) > _LATTICE_TOL * max(1.0, abs(ratio)):
        raise InvalidSpecError(f"{name}={value!r} is not a multiple of the grid step {step!r}")
    return int(k)


@dataclass(frozen=True)
class GridSpec:
    """Rectangular grid of summed areas (radians).

    ``fixed_phases=None`` optimises the phases at every point; otherwise
    the given phases are used everywhere.  Bounds must be multiples of
    ``step``; ``min == max`` gives a single row or column.
    """

    s_odd_min: float
    s_odd_max: float
    s_even_min: float
    s_even_max: float
    step: float
    fixed_phases: tuple[float, ...] | None = None

    def __post_init__(self):
        if not (math.isfinite(self.step) and self.step > 0):
            raise InvalidSpecError(f"grid step must be > 0, got {self.step!r}")
        for lo, hi, axis in ((self.s_odd_min, self.s_odd_max, "s_odd"),
                             (self.s_even_min, self.s_even_max, "s_even")):
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise InvalidSpecError(f"{axis} bounds must be finite")
            if lo < 0:
                raise InvalidSpecError(f"{axis}_min must be >= 0, got {lo!r}")
            if hi < lo:
                raise InvalidSpecError(f"{axis}_max must be >= {axis}_min")
            _lattice_index(lo, self.step, f"{axis}_min")
            _lattice_index(hi, self.step, f"{axis}_max")
        if self.fixed_phases is not None:
            object.__setattr__(self, "fixed_phases", tuple(float(p) for p in self.fixed_phases))

    @property
    def optimized(self) -> bool:
        return self.fixed_phases is None

    def odd_indices(self) -> range:
        return range(_lattice_index(self.s_odd_min, self.step, "s_odd_min"),
                     _lattice_index(self.s_odd_max, self.step, "s_odd_max") + 1)

    def even_indices(self) -> range:
        return range(_lattice_index(self.s_even_min, self.step, "s_even_min"),
                     _lattice_index(self.s_even_max, self.step, "s_even_max") + 1)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.even_indices()), len(self.odd_indices())

    def s_odd_values(self) -> np.ndarray:
        return np.array([k * self.step for k in self.odd_indices()])

    def s_even_values(self) -> np.ndarray:
        return np.array([k * self.step for k in self.even_indices()])


@dataclass(frozen=True)
class MapPoint:
    """One evaluated grid point: areas, best phases, gate and fidelity."""

    s_odd: float
    s_even: float
    fidelity: float
    phases: tuple[float, ...]
    gate: GateDiagonal


@dataclass(frozen=True)
class FidelityMap:
    """Row-major fidelity map; rows follow ``s_even``, columns ``s_odd``."""

    grid: GridSpec
    points: tuple[MapPoint, ...]
    protocol: ProtocolSpec
    target: TargetGate
    options: SimplexOptions
    metric: str = "trace"
    stark: bool = True

    def __post_init__(self):
        rows, cols = self.grid.shape
        if len(self.points) != rows * cols:
            raise ValueError(f"expected {rows * cols} points, got {len(self.points)}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.grid.shape

    def point(self, row: int, col: int) -> MapPoint:
        rows, cols = self.shape
        if not (0 <= row < rows and 0 <= col < cols):
            raise IndexError(f"({row}, {col}) outside a {rows}x{cols} map")
        return self.points[row * cols + col]

    def fidelities(self) -> np.ndarray:
        return np.array([p.fidelity for p in self.points]).reshape(self.shape)


@dataclass(frozen=True)
class _Evaluator:
    """Everything needed to evaluate one point, shared read-only by workers."""

    template: ProtocolSpec
    ga: np.ndarray
    gb: np.ndarray
    target: np.ndarray
    metric: int
    stark: bool
    options: SimplexOptions
    fixed_phases: np.ndarray | None

    def __call__(self, s_odd: float, s_even: float, seed_key: tuple[int, ...],
                 where: tuple[int, int]) -> MapPoint:
        try:
            spec = self.template.with_areas(s_odd, s_even)
        except InvalidSpecError as exc:
            raise GridPointError(str(exc), where[0], where[1], s_odd, s_even) from exc
        areas = np.array(spec.areas())
        if self.fixed_phases is None:
            seed = point_seed(self.options.seed, *seed_key)
            starts = restart_points(seed, self.options.restarts, spec.m_pulses - 1)
            x, _, _ = _kernels.optimize_sequence_phases(
                areas, self.ga, self.gb, self.target, self.stark, self.metric, starts,
                *self.options.kernel_args())
            phases = np.array([wrap_phase(p) for p in x])
        else:
            phases = self.fixed_phases
        u01, u10, u11 = _kernels.gate_amplitudes(areas, self.ga, self.gb, phases, self.stark)
        fid = _kernels.diagonal_fidelity(u01, u10, u11, self.target, self.metric)
        return MapPoint(float(s_odd), float(s_even), float(fid),
                        tuple(float(p) for p in phases),
                        GateDiagonal.from_amplitudes(u01, u10, u11))


def _make_evaluator(template: ProtocolSpec, target: TargetGate, opts: SimplexOptions,
                    fixed_phases, metric: str, stark: bool) -> _Evaluator:
    _, ga, gb, _ = sequence_arrays(template)
    fixed = None
    if fixed_phases is not None:
        if len(fixed_phases) != template.m_pulses:
            raise InvalidSpecError(
                f"expected {template.m_pulses} fixed phases, got {len(fixed_phases)}")
        fixed = np.array([wrap_phase(float(p)) for p in fixed_phases])
    return _Evaluator(template, ga, gb, target_array(target), metric_code(metric), bool(stark),
                      opts, fixed)


def _run(tasks: Sequence, fn, threads: int) -> list:
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


def scan(spec_template: ProtocolSpec, target: TargetGate, grid: GridSpec,
         opts: SimplexOptions | None = None, metric: str = "trace", stark: bool = True,
         threads: int | None = None) -> FidelityMap:
    """Evaluate the fidelity at every grid point.

    The areas of ``spec_template`` are replaced point by point; its scheme,
    pulse count, overlap angle and sign are kept.  In optimised mode the
    phases at point ``(s_odd, s_even)`` are found by the same multi-start
    search as :func:`~blockade_forge.optimizer.optimize_phases`, seeded with
    ``point_seed(opts.seed, s_even / step, s_odd / step)``.

    Raises
    ------
    GridPointError
        If the protocol is invalid at some grid point.
    """
    opts = opts or SimplexOptions()
    threads = default_threads() if threads is None else int(threads)
    if threads < 1:
        raise ValueError("threads must be >= 1")
    ev = _make_evaluator(spec_template, target, opts, grid.fixed_phases, metric, stark)
    step = grid.step
    rows = list(grid.even_indices())
    cols = list(grid.odd_indices())

    def do_row(r):
        ke = rows[r]
        return [ev(ko * step, ke * step, (ke, ko), (r, c)) for c, ko in enumerate(cols)]

    per_row = _run(range(len(rows)), do_row, threads)
    points = tuple(p for row in per_row for p in row)
    return FidelityMap(grid, points, spec_template, target, opts, metric, bool(stark))


# fidelities closer than this count as ties in map_max
TIE_TOLERANCE = 1e-12


def _rank_key(p: MapPoint):
    return (-p.fidelity, p.s_odd + p.s_even, p.s_odd)


def _best(points: Sequence[MapPoint], tie_tol: float) -> MapPoint:
    top = max(p.fidelity for p in points)
    tied = [p for p in points if p.fidelity >= top - tie_tol]
    return min(tied, key=lambda p: (p.s_odd + p.s_even, p.s_odd))


def map_max(fmap: FidelityMap, tie_tol: float = TIE_TOLERANCE) -> MapPoint:
    """Best point of the map.

    Fidelities within ``tie_tol`` of the maximum count as ties; among
    those the smallest total area wins, then the smallest ``s_odd``.
    """
    if not fmap.points:
        raise ValueError("empty fidelity map")
    return _best(fmap.points, tie_tol)


def top_points(fmap: FidelityMap, count: int) -> list[MapPoint]:
    """The ``count`` highest-fidelity points, best first."""
    return sorted(fmap.points, key=_rank_key)[:count]


def refine_max(fmap: FidelityMap, radius: float, opts: SimplexOptions | None = None,
               candidates: int = 1, threads: int | None = None) -> MapPoint:
    """Re-optimise on a finer sub-grid around the best map points.

    A sub-grid with a quarter of the map step and half-width ``radius``
    (clipped to the map bounds) is laid around each of the ``candidates``
    best points.  The original points are kept as candidates, so the
    result is never worse than :func:`map_max`.  ``opts`` defaults to the
    options the map was scanned with.
    """
    grid = fmap.grid
    if radius < grid.step * (1 - 1e-12):
        raise ValueError(f"radius must be >= the grid step ({grid.step!r}), got {radius!r}")
    if candidates < 1:
        raise ValueError("candidates must be >= 1")
    opts = opts or fmap.options
    threads = default_threads() if threads is None else int(threads)
    ev = _make_evaluator(fmap.protocol, fmap.target, opts, grid.fixed_phases,
                         fmap.metric, fmap.stark)

    fine = grid.step / REFINE_FACTOR
    reach = int(math.floor(radius / fine + 1e-9))
    odd_lo, odd_hi = grid.odd_indices()[0] * REFINE_FACTOR, grid.odd_indices()[-1] * REFINE_FACTOR
    even_lo, even_hi = grid.even_indices()[0] * REFINE_FACTOR, grid.even_indices()[-1] * REFINE_FACTOR

    centres = top_points(fmap, candidates)
    coarse = {(round(p.s_even / grid.step) * REFINE_FACTOR,
                round(p.s_odd / grid.step) * REFINE_FACTOR) for p in fmap.points}
    wanted: set[tuple[int, int]] = set()
    for p in centres:
        ce = round(p.s_even / grid.step) * REFINE_FACTOR
        co = round(p.s_odd / grid.step) * REFINE_FACTOR
        for je in range(max(even_lo, ce - reach), min(even_hi, ce + reach) + 1):
            for jo in range(max(odd_lo, co - reach), min(odd_hi, co + reach) + 1):
                if (je, jo) not in coarse:
                    wanted.add((je, jo))
    tasks = sorted(wanted)

    def do(task):
        je, jo = task
        return ev(jo * fine, je * fine, (je, jo, REFINE_FACTOR), (je, jo))

    refined = _run(tasks, do, threads)
    return _best([map_max(fmap)] + refined, TIE_TOLERANCE)


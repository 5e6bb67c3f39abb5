"""Compiled inner loops: gate amplitudes, fidelity and the simplex search.

Everything here works on plain arrays so it can be compiled with numba
(``nogil=True`` lets scans run on several threads).  The gate amplitude
kernel propagates the three relevant basis vectors with the same
closed-form step matrices as :mod:`blockade_forge.propagators`; the test
suite checks both routes against each other.
"""

from __future__ import annotations

import math

import numba
import numpy as np

_jit = numba.njit(cache=True, nogil=True)

METRIC_TRACE = 0
METRIC_AVERAGE = 1


@_jit
def gate_amplitudes(areas, ga, gb, phases, stark):
    """Return ``(u01, u10, u11)`` for a pulse sequence given as arrays."""
    v0 = 1.0 + 0.0j
    v1 = 0.0 + 0.0j
    v2 = 0.0 + 0.0j
    a0 = 1.0 + 0.0j
    a1 = 0.0 + 0.0j
    b0 = 1.0 + 0.0j
    b1 = 0.0 + 0.0j
    for k in range(areas.shape[0]):
        half = 0.5 * areas[k]
        a = ga[k]
        b = gb[k]
        e = complex(math.cos(phases[k]), math.sin(phases[k]))
        ec = e.conjugate()
        c = math.cos(half)
        s = math.sin(half)
        n0 = c * v0 + 1j * s * e * (a * v1 + b * v2)
        n1 = 1j * s * a * ec * v0 + (a * a * c + b * b) * v1 + a * b * (c - 1.0) * v2
        n2 = 1j * s * b * ec * v0 + a * b * (c - 1.0) * v1 + (b * b * c + a * a) * v2
        if stark:
            pre = complex(math.cos(half), math.sin(half))
            n0 *= pre
            n1 *= pre
            n2 *= pre
        v0 = n0
        v1 = n1
        v2 = n2

        th = a * half
        ct = math.cos(th)
        st = math.sin(th)
        m0 = ct * a0 + 1j * st * e * a1
        m1 = 1j * st * ec * a0 + ct * a1
        if stark:
            pre = complex(math.cos(abs(th)), math.sin(abs(th)))
            m0 *= pre
            m1 *= pre
        a0 = m0
        a1 = m1

        th = b * half
        ct = math.cos(th)
        st = math.sin(th)
        m0 = ct * b0 + 1j * st * e * b1
        m1 = 1j * st * ec * b0 + ct * b1
        if stark:
            pre = complex(math.cos(abs(th)), math.sin(abs(th)))
            m0 *= pre
            m1 *= pre
        b0 = m0
        b1 = m1
    return b0, a0, v0


@_jit
def diagonal_fidelity(u01, u10, u11, target, metric):
    """Fidelity of ``diag(1, u01, u10, u11)`` against ``diag(1, *target)``."""
    z = 1.0 + target[0].conjugate() * u01 + target[1].conjugate() * u10 \
        + target[2].conjugate() * u11
    tr2 = z.real * z.real + z.imag * z.imag
    if metric == METRIC_TRACE:
        return tr2 / 16.0
    norm = 1.0 + abs(u01) ** 2 + abs(u10) ** 2 + abs(u11) ** 2
    return (tr2 + norm) / 20.0


@_jit
def sequence_fidelity(areas, ga, gb, phases, target, stark, metric):
    u01, u10, u11 = gate_amplitudes(areas, ga, gb, phases, stark)
    return diagonal_fidelity(u01, u10, u11, target, metric)


@_jit
def phase_objective(x, args):
    """Negated fidelity with the first phase pinned to zero."""
    areas, ga, gb, target, stark, metric, buf = args
    buf[0] = 0.0
    for i in range(x.shape[0]):
        buf[i + 1] = x[i]
    return -sequence_fidelity(areas, ga, gb, buf, target, stark, metric)


@_jit
def nelder_mead_phases(args, x0, step, max_iter, tol, alpha, gamma, rho, sigma):
    """Compiled Nelder-Mead on :func:`phase_objective`.

    Follows exactly the update rules of
    :func:`blockade_forge.optimizer.nelder_mead`, so both give the same
    trajectory on the same objective.  Returns ``(x_best, f_best,
    n_evaluations, n_iterations, converged)``.
    """
    n = x0.shape[0]
    sim = np.empty((n + 1, n))
    fs = np.empty(n + 1)
    nfev = 0
    for i in range(n + 1):
        for j in range(n):
            sim[i, j] = x0[j]
        if i > 0:
            sim[i, i - 1] += step
        f = phase_objective(sim[i], args)
        nfev += 1
        fs[i] = f if math.isfinite(f) else np.inf

    xr = np.empty(n)
    xe = np.empty(n)
    xc = np.empty(n)
    cen = np.empty(n)
    row = np.empty(n)
    it = 0
    converged = False
    while True:
        # stable insertion sort, best vertex first
        for i in range(1, n + 1):
            fi = fs[i]
            for j in range(n):
                row[j] = sim[i, j]
            k = i - 1
            while k >= 0 and fs[k] > fi:
                fs[k + 1] = fs[k]
                for j in range(n):
                    sim[k + 1, j] = sim[k, j]
                k -= 1
            fs[k + 1] = fi
            for j in range(n):
                sim[k + 1, j] = row[j]

        spread = fs[n] - fs[0]
        if spread < tol or (math.isinf(fs[0]) and math.isinf(fs[n])):
            converged = spread < tol
            break
        if it >= max_iter:
            break
        it += 1

        for j in range(n):
            acc = 0.0
            for i in range(n):
                acc += sim[i, j]
            cen[j] = acc / n

        for j in range(n):
            xr[j] = cen[j] + alpha * (cen[j] - sim[n, j])
        fr = phase_objective(xr, args)
        nfev += 1
        if not math.isfinite(fr):
            fr = np.inf

        if fr < fs[0]:
            for j in range(n):
                xe[j] = cen[j] + gamma * (xr[j] - cen[j])
            fe = phase_objective(xe, args)
            nfev += 1
            if not math.isfinite(fe):
                fe = np.inf
            if fe < fr:
                for j in range(n):
                    sim[n, j] = xe[j]
                fs[n] = fe
            else:
                for j in range(n):
                    sim[n, j] = xr[j]
                fs[n] = fr
        elif fr < fs[n - 1]:
            for j in range(n):
                sim[n, j] = xr[j]
            fs[n] = fr
        else:
            if fr < fs[n]:
                for j in range(n):
                    xc[j] = cen[j] + rho * (xr[j] - cen[j])
            else:
                for j in range(n):
                    xc[j] = cen[j] + rho * (sim[n, j] - cen[j])
            fc = phase_objective(xc, args)
            nfev += 1
            if not math.isfinite(fc):
                fc = np.inf
            if fc < min(fr, fs[n]):
                for j in range(n):
                    sim[n, j] = xc[j]
                fs[n] = fc
            else:
                for i in range(1, n + 1):
                    for j in range(n):
                        sim[i, j] = sim[0, j] + sigma * (sim[i, j] - sim[0, j])
                    f = phase_objective(sim[i], args)
                    nfev += 1
                    fs[i] = f if math.isfinite(f) else np.inf

    best = np.empty(n)
    for j in range(n):
        best[j] = sim[0, j]
    return best, fs[0], nfev, it, converged


@_jit
def optimize_sequence_phases(areas, ga, gb, target, stark, metric, starts,
                             step, max_iter, tol, alpha, gamma, rho, sigma):
    """Multi-start phase optimisation for one pulse sequence.

    ``starts`` holds one starting point (phases 2..M) per row.  Returns the
    best phase vector (phase 1 pinned to zero, unwrapped), its fidelity and
    the total number of objective evaluations.
    """
    m = areas.shape[0]
    buf = np.zeros(m)
    args = (areas, ga, gb, target, stark, metric, buf)
    best_x = np.zeros(m)
    best_f = -1.0
    total = 0
    for r in range(starts.shape[0]):
        x, f, nfev, nit, conv = nelder_mead_phases(
            args, starts[r], step, max_iter, tol, alpha, gamma, rho, sigma)
        total += nfev
        fid = -f
        if fid > best_f:
            best_f = fid
            best_x[0] = 0.0
            for j in range(m - 1):
                best_x[j + 1] = x[j]
    return best_x, best_f, total


@_jit
def fixed_phase_fidelities(areas, ga, gb, phases, target, stark, metric):
    """Fidelity for a batch of sequences; ``areas`` has one row per sequence."""
    out = np.empty(areas.shape[0])
    for i in range(areas.shape[0]):
        out[i] = sequence_fidelity(areas[i], ga, gb, phases, target, stark, metric)
    return out

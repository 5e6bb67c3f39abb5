"""CSV and PGM serialisation of fidelity maps.

Angles and areas are written in units of pi.  The CSV opens with ``#``
comment lines holding the format version and everything needed to
re-evaluate a row: scheme, pulse count, overlap angle, sign, target,
metric and driving mode.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .metrics import TargetGate, fidelity
from .propagators import compose_gate
from .protocol import ProtocolSpec, Scheme, build_sequence
from .scanner import FidelityMap, MapPoint

FORMAT_NAME = "blockade-forge-map"
FORMAT_VERSION = 1


def _num(x: float) -> str:
    return repr(float(x))


def csv_columns(m_pulses: int) -> list[str]:
    cols = ["s_odd_pi", "s_even_pi", "fidelity"]
    cols += [f"phi_{k}_pi" for k in range(1, m_pulses + 1)]
    cols += ["u01_re", "u01_im", "u10_re", "u10_im", "u11_re", "u11_im"]
    return cols


def _target_text(target: TargetGate) -> str:
    return ";".join(f"{_num(d.real)},{_num(d.imag)}" for d in target.as_array())


def _parse_target(text: str) -> TargetGate:
    entries = []
    for pair in text.split(";"):
        re_, im_ = pair.split(",")
        entries.append(complex(float(re_), float(im_)))
    return TargetGate(*entries)


def write_map_csv(path, fmap: FidelityMap) -> None:
    """Write one row per grid point, row-major (``s_even`` outer, ``s_odd`` inner)."""
    spec = fmap.protocol
    meta = {
        "format": f"{FORMAT_NAME} v{FORMAT_VERSION}",
        "scheme": spec.scheme.value,
        "pulses": str(spec.m_pulses),
        "beta_pi": _num(spec.beta / math.pi),
        "sign": str(spec.sign),
        "target": _target_text(fmap.target),
        "metric": fmap.metric,
        "mode": "two-photon" if fmap.stark else "single-photon",
        "step_pi": _num(fmap.grid.step / math.pi),
        "phase_mode": "optimized" if fmap.grid.optimized else "fixed",
        "seed": str(fmap.options.seed),
        "restarts": str(fmap.options.restarts),
    }
    with open(path, "w", newline="") as fh:
        for key, value in meta.items():
            fh.write(f"# {key}={value}\n")
        writer = csv.writer(fh)
        writer.writerow(csv_columns(spec.m_pulses))
        for p in fmap.points:
            writer.writerow(_point_row(p))


def _point_row(p: MapPoint) -> list[str]:
    g = p.gate
    row = [_num(p.s_odd / math.pi), _num(p.s_even / math.pi), _num(p.fidelity)]
    row += [_num(phi / math.pi) for phi in p.phases]
    for u in (g.u01, g.u10, g.u11):
        row += [_num(u.real), _num(u.imag)]
    return row


@dataclass(frozen=True)
class MapCsv:
    """Parsed CSV: metadata dictionary and one dict of floats per row."""

    meta: dict
    rows: list

    @property
    def version(self) -> int:
        name, _, version = self.meta.get("format", "").partition(" v")
        if name != FORMAT_NAME:
            raise ValueError(f"not a {FORMAT_NAME} file")
        return int(version)

    def protocol(self) -> ProtocolSpec:
        m = self.meta
        scheme = Scheme.parse(m["scheme"])
        beta = float(m["beta_pi"]) * math.pi
        n = int(m["pulses"])
        return ProtocolSpec(scheme, n, beta, 0.0, 0.0, sign=int(m["sign"]))

    def target(self) -> TargetGate:
        return _parse_target(self.meta["target"])


def read_map_csv(path) -> MapCsv:
    meta = {}
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key] = value
        elif line.strip():
            body.append(line)
    reader = csv.DictReader(body)
    rows = [{k: float(v) for k, v in r.items()} for r in reader]
    out = MapCsv(meta, rows)
    if out.version != FORMAT_VERSION:
        raise ValueError(f"unsupported map format version {out.version}")
    return out


def reevaluate_row(data: MapCsv, row: dict) -> float:
    """Recompute the fidelity of one CSV row from its areas and phases."""
    spec = data.protocol()
    phases = [row[f"phi_{k}_pi"] * math.pi for k in range(1, spec.m_pulses + 1)]
    spec = spec.with_areas(row["s_odd_pi"] * math.pi, row["s_even_pi"] * math.pi)
    spec = spec.with_phases(phases)
    gate = compose_gate(build_sequence(spec), data.meta["mode"] == "two-photon")
    return fidelity(gate, data.target(), data.meta["metric"])


def pgm_levels(fmap: FidelityMap) -> np.ndarray:
    """Fidelities mapped linearly onto 0..255; row 0 is the lowest ``s_even``."""
    f = np.clip(fmap.fidelities(), 0.0, 1.0)
    return np.rint(f * 255.0).astype(int)


def write_pgm(path, fmap: FidelityMap) -> None:
    """Plain-text (P2) greyscale raster of the map, maxval 255."""
    levels = pgm_levels(fmap)
    rows, cols = levels.shape
    lines = ["P2", "# fidelity map: rows follow s_even upwards from the first line",
             f"{cols} {rows}", "255"]
    lines += [" ".join(str(v) for v in row) for row in levels]
    Path(path).write_text("\n".join(lines) + "\n")

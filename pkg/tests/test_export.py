from __future__ import annotations

import math

import numpy as np
import pytest

from blockade_forge.export import (pgm_levels, read_map_csv, reevaluate_row, write_map_csv,
                                   write_pgm)
from blockade_forge.metrics import target_cminus, target_cphase
from blockade_forge.optimizer import SimplexOptions
from blockade_forge.protocol import ProtocolSpec, Scheme, beta_from_b_squared
from blockade_forge.scanner import GridSpec, scan

PI = math.pi


@pytest.fixture(scope="module")
def small_map():
    spec = ProtocolSpec(Scheme.SOP, 3, beta_from_b_squared(0.1), 0.0, 0.0, sign=-1)
    grid = GridSpec(PI, 3 * PI, 0.5 * PI, 2 * PI, 0.5 * PI)
    return scan(spec, target_cminus(), grid, SimplexOptions(restarts=2, seed=7), threads=1)


def test_csv_roundtrip_reevaluates(tmp_path, small_map):
    path = tmp_path / "map.csv"
    write_map_csv(path, small_map)
    data = read_map_csv(path)
    assert data.version == 1
    assert data.meta["scheme"] == "sop" and data.meta["sign"] == "-1"
    assert len(data.rows) == len(small_map.points)
    for row, p in zip(data.rows, small_map.points):
        assert row["s_odd_pi"] * PI == pytest.approx(p.s_odd, abs=1e-12)
        assert row["fidelity"] == p.fidelity
        assert abs(reevaluate_row(data, row) - row["fidelity"]) < 1e-9
        assert complex(row["u11_re"], row["u11_im"]) == p.gate.u11


def test_csv_roundtrips_general_target(tmp_path, small_map):
    from dataclasses import replace
    target = target_cphase(0.3, -1.2, 2.9)
    path = tmp_path / "m.csv"
    write_map_csv(path, replace(small_map, target=target))
    assert read_map_csv(path).target() == target


def test_csv_rejects_foreign_file(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("# format=something-else v1\na,b\n1,2\n")
    with pytest.raises(ValueError):
        read_map_csv(path)


def test_pgm_layout(tmp_path, small_map):
    path = tmp_path / "map.pgm"
    write_pgm(path, small_map)
    tokens = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    assert tokens[0] == "P2"
    rows, cols = small_map.shape
    assert tokens[1] == f"{cols} {rows}"
    assert tokens[2] == "255"
    body = np.array([[int(v) for v in ln.split()] for ln in tokens[3:]])
    np.testing.assert_array_equal(body, pgm_levels(small_map))
    f = small_map.fidelities()
    assert body[0, 0] == round(f[0, 0] * 255)
    assert body.min() >= 0 and body.max() <= 255

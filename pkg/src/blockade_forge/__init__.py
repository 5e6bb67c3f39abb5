"""Two-photon Rydberg-blockade phase gates.

Closed-form pulse propagators, phase optimisation and fidelity maps for
pulse sequences acting on two qubits under a strong dipole blockade.
"""

from .metrics import (EntanglingPower, TargetGate, entangling_power, fidelity, target_cminus,
                      target_cphase, target_cplus)
from .optimizer import OptResult, SimplexOptions, nelder_mead, optimize_phases, point_seed
from .propagators import (GateDiagonal, compose_gate, two_pulse_closed, u11_orthogonal_closed,
                          u11_three_pulse_closed, ut11_three_pulse_closed, ut_step, uv_step)
from .protocol import (GeometryVector, InvalidSpecError, ProtocolSpec, Pulse, Scheme,
                       beta_from_b_squared, build_sequence)
from .scanner import FidelityMap, GridSpec, MapPoint, map_max, refine_max, scan

__version__ = "0.1.0"

__all__ = [
    "EntanglingPower", "FidelityMap", "GateDiagonal", "GeometryVector", "GridSpec",
    "InvalidSpecError", "MapPoint", "OptResult", "ProtocolSpec", "Pulse", "Scheme",
    "SimplexOptions", "TargetGate", "beta_from_b_squared", "build_sequence", "compose_gate",
    "entangling_power", "fidelity", "map_max", "nelder_mead", "optimize_phases", "point_seed",
    "refine_max", "scan", "target_cminus", "target_cphase", "target_cplus", "two_pulse_closed",
    "u11_orthogonal_closed", "u11_three_pulse_closed", "ut11_three_pulse_closed", "ut_step",
    "uv_step",
]

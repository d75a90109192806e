"""Electric field from the 1-D Poisson constraint E_x = (rho - 2*delta) - b.

On the truncated domain the field is anchored at the left edge with the
far-field datum e_minus and recovered by a running integral, so no linear
solve is involved.  The a-priori sup bound

    |E| <= |e_minus| + int (rho0 - 2*delta) dx + int |b| dx

travels with the field for monitoring.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (DeviceProfile, GasModel, Grid1D, HydroState,
                    cumulative_integral, total_integral)


@dataclass(frozen=True)
class ElectricField:
    e_vals: np.ndarray
    e_minus: float
    sup_bound: float


def solve_field(state: HydroState, profile: DeviceProfile, model: GasModel,
                grid: Grid1D) -> ElectricField:
    """Integrate the charge imbalance left to right from the field datum."""
    source = state.excess(model) - profile.b_vals
    e_vals = profile.e_minus + cumulative_integral(source, grid.dx)
    return ElectricField(e_vals=e_vals, e_minus=profile.e_minus,
                         sup_bound=field_bound(state, profile, model, grid))


def field_bound(state: HydroState, profile: DeviceProfile, model: GasModel,
                grid: Grid1D) -> float:
    """Sup-norm bound on E built from the state's excess mass and the doping."""
    excess_mass = total_integral(state.excess(model), grid.dx)
    doping_mass = total_integral(np.abs(profile.b_vals), grid.dx)
    return abs(profile.e_minus) + excess_mass + doping_mass

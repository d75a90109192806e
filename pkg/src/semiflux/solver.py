"""Viscous finite-volume solver for the offset-vacuum Euler-Poisson system.

State is (rho, m) on a uniform grid, evolved by

    rho_t + ((rho - 2*delta) u)_x            = eps * rho_xx
    m_t   + (rho u^2 - delta u^2 + P1)_x     = eps * m_xx + S(rho, m, E)

with S either rho*E - a(x) m / tau (full-density coupling) or the
excess-density variant (rho - 2*delta) (E - a(x) u / tau).  Fluxes use a
local Lax-Friedrichs interface dissipation with the exact characteristic
speeds, the artificial viscosity is a centered second difference, and the
stiff damping is applied pointwise through its exact exponential factor so
the update stays stable for tau much smaller than dt.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .field import solve_field
from .model import (RHO_FLOOR_SLACK, Boundary, ConfigurationError,
                    DeviceProfile, GasModel, Grid1D, HydroState)


class FluxScheme(enum.Enum):
    # Both names denote the same interface dissipation: half the jump times
    # the largest characteristic speed on either side of the face.
    LOCAL_LAX_FRIEDRICHS = "llf"
    RUSANOV = "rusanov"


class SourceVariant(enum.Enum):
    FULL_DENSITY = "full-density"       # rho*E - a*m/tau
    EXCESS_DENSITY = "excess-density"   # (rho-2*delta)*E - a*(rho-2*delta)*u/tau


class IntegrationError(RuntimeError):
    """Non-finite values appeared; carries the last valid state."""

    def __init__(self, message: str, state: HydroState, time: float):
        super().__init__(message)
        self.state = state
        self.time = time


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float = 1e-3
    tau: float = 1.0
    cfl: float = 0.45
    t_end: float = 1.0
    source_variant: SourceVariant = SourceVariant.FULL_DENSITY
    flux_scheme: FluxScheme = FluxScheme.LOCAL_LAX_FRIEDRICHS
    smoothing_width: float = 0.0
    include_field: bool = True

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise ConfigurationError("epsilon must be positive")
        if not self.tau > 0.0:
            raise ConfigurationError("tau must be positive")
        if not 0.0 < self.cfl <= 0.9:
            raise ConfigurationError("cfl must lie in (0, 0.9]")
        if self.t_end < 0.0:
            raise ConfigurationError("t_end must be non-negative")
        if self.smoothing_width < 0.0:
            raise ConfigurationError("smoothing_width must be non-negative")


@dataclass(frozen=True)
class StepReport:
    dt_used: float
    max_wave_speed: float
    post_step_min_rho: float
    source_solve_iterations: int = 1


def gaussian_kernel(width: float, dx: float) -> np.ndarray:
    """Discrete Gaussian of standard deviation `width`, normalized to sum 1."""
    half = max(int(math.ceil(4.0 * width / dx)), 1)
    xs = np.arange(-half, half + 1) * dx
    k = np.exp(-0.5 * (xs / width) ** 2)
    return k / k.sum()


def prepare_initial(raw_rho, raw_u, model: GasModel, cfg: SolverConfig,
                    grid: Grid1D) -> HydroState:
    """Offset and mollify raw initial data.

    The raw density is the excess over vacuum (must be >= 0 and decay before
    the domain edges); both it and the velocity are smoothed with a discrete
    Gaussian, then the vacuum offset is added so the far field is exactly
    2*delta.  Zero smoothing width skips the convolution.
    """
    raw_rho = np.asarray(raw_rho, dtype=float)
    raw_u = np.asarray(raw_u, dtype=float)
    if raw_rho.shape != (grid.n_cells,) or raw_u.shape != (grid.n_cells,):
        raise ConfigurationError("raw initial data must match the grid")
    if np.any(raw_rho < 0.0):
        raise ValueError("raw excess density must be non-negative")
    if cfg.smoothing_width > 0.0:
        k = gaussian_kernel(cfg.smoothing_width, grid.dx)
        sm_rho = np.convolve(raw_rho, k, mode="same")
        sm_u = np.convolve(raw_u, k, mode="same")
    else:
        sm_rho, sm_u = raw_rho, raw_u
    rho = sm_rho + model.rho_floor
    return HydroState(rho=rho, mom=rho * sm_u, time=0.0)


def flux(model: GasModel, rho, mom):
    """Physical flux of the offset system: ((rho-2d) u, m u - delta u^2 + P1)."""
    rho = np.asarray(rho, dtype=float)
    mom = np.asarray(mom, dtype=float)
    u = mom / rho
    f1 = (rho - model.rho_floor) * u
    f2 = mom * u - model.delta * u * u + model.perturbed_pressure(rho)
    return f1, f2


def _extend(arr: np.ndarray, boundary: Boundary) -> np.ndarray:
    if boundary is Boundary.PERIODIC:
        return np.concatenate(([arr[-1]], arr, [arr[0]]))
    return np.concatenate(([arr[0]], arr, [arr[-1]]))


def stable_dt(state: HydroState, model: GasModel, cfg: SolverConfig,
              grid: Grid1D) -> float:
    """cfl / (max|lambda|/dx + 2 eps/dx^2): one budget shared by advection and
    viscosity, so the explicit update stays a convex combination."""
    u = state.mom / state.rho
    speed = np.abs(u) + (state.rho - model.rho_floor) / state.rho \
        * model.sound_speed(state.rho)
    return cfg.cfl / (float(np.max(speed)) / grid.dx
                      + 2.0 * cfg.epsilon / grid.dx ** 2)


def step(state: HydroState, profile: DeviceProfile, model: GasModel,
         cfg: SolverConfig, grid: Grid1D, dt_limit: float | None = None,
         new_time: float | None = None):
    """One explicit flux/viscosity update followed by the exact damping decay.

    Returns (new_state, StepReport).  dt_limit caps the stable step (to land
    on output instants); new_time, when given, is assigned verbatim so record
    times are hit exactly.
    """
    rho, mom = state.rho, state.mom
    dx = grid.dx

    floor = model.rho_floor - RHO_FLOOR_SLACK * model.delta
    if float(np.min(rho)) < floor:
        raise IntegrationError("density fell below the vacuum offset",
                               state, state.time)
    u = mom / rho
    speed = np.abs(u) + (rho - model.rho_floor) / rho * model.sound_speed(rho)
    max_speed = float(np.max(speed))
    dt = cfg.cfl / (max_speed / dx + 2.0 * cfg.epsilon / dx ** 2)
    if dt_limit is not None:
        dt = min(dt, dt_limit)

    rho_e = _extend(rho, grid.boundary)
    mom_e = _extend(mom, grid.boundary)
    u_e = mom_e / rho_e
    speed_e = _extend(speed, grid.boundary)

    f1_e = (rho_e - model.rho_floor) * u_e
    f2_e = mom_e * u_e - model.delta * u_e * u_e + model.perturbed_pressure(rho_e)

    alpha = np.maximum(speed_e[:-1], speed_e[1:])
    flux1 = 0.5 * (f1_e[:-1] + f1_e[1:]) - 0.5 * alpha * (rho_e[1:] - rho_e[:-1])
    flux2 = 0.5 * (f2_e[:-1] + f2_e[1:]) - 0.5 * alpha * (mom_e[1:] - mom_e[:-1])

    visc_rho = cfg.epsilon * (rho_e[2:] - 2.0 * rho + rho_e[:-2]) / dx ** 2
    visc_mom = cfg.epsilon * (mom_e[2:] - 2.0 * mom + mom_e[:-2]) / dx ** 2

    rho_new = rho - (dt / dx) * (flux1[1:] - flux1[:-1]) + dt * visc_rho
    mom_star = mom - (dt / dx) * (flux2[1:] - flux2[:-1]) + dt * visc_mom

    if cfg.include_field:
        e_vals = solve_field(state, profile, model, grid).e_vals
        if cfg.source_variant is SourceVariant.FULL_DENSITY:
            mom_star = mom_star + dt * rho * e_vals
        else:
            mom_star = mom_star + dt * (rho - model.rho_floor) * e_vals

    if cfg.source_variant is SourceVariant.FULL_DENSITY:
        rate = profile.a_vals / cfg.tau
    else:
        rate = profile.a_vals * (rho_new - model.rho_floor) / rho_new / cfg.tau
    mom_new = mom_star * np.exp(-rate * dt)

    if not (np.all(np.isfinite(rho_new)) and np.all(np.isfinite(mom_new))):
        raise IntegrationError("non-finite state", state, state.time)

    t_new = new_time if new_time is not None else state.time + dt
    report = StepReport(dt_used=dt, max_wave_speed=max_speed,
                        post_step_min_rho=float(np.min(rho_new)))
    return HydroState(rho=rho_new, mom=mom_new, time=t_new), report


@dataclass
class Snapshot:
    step: int
    time: float
    rho: np.ndarray
    mom: np.ndarray
    e_vals: np.ndarray


@dataclass
class Trajectory:
    """Recorded history of one run: snapshots plus step-level diagnostics."""

    grid: Grid1D
    model: GasModel
    snapshots: list = field(default_factory=list)
    dts: list = field(default_factory=list)
    n_steps: int = 0
    min_rho_ever: float = math.inf
    completed: bool = True
    failure_time: float | None = None

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])

    def state_at(self, index: int) -> HydroState:
        s = self.snapshots[index]
        return HydroState(rho=s.rho, mom=s.mom, time=s.time)


def _record(traj: Trajectory, state: HydroState, profile: DeviceProfile,
            model: GasModel, cfg: SolverConfig, grid: Grid1D, step_idx: int):
    if cfg.include_field:
        e_vals = solve_field(state, profile, model, grid).e_vals
    else:
        e_vals = np.zeros_like(state.rho)
    traj.snapshots.append(Snapshot(step=step_idx, time=state.time,
                                   rho=state.rho.copy(), mom=state.mom.copy(),
                                   e_vals=e_vals))


def run(initial: HydroState, profile: DeviceProfile, model: GasModel,
        cfg: SolverConfig, grid: Grid1D, record_every: int = 50,
        record_times=None, max_steps: int = 10 ** 7,
        raise_on_failure: bool = False) -> Trajectory:
    """March to cfg.t_end, recording every `record_every` steps or exactly at
    the sorted instants `record_times` (the step is clamped to land on them).
    The initial and final states are always recorded.
    """
    if record_every < 1:
        raise ConfigurationError("record_every must be >= 1")
    rec_times = None
    if record_times is not None:
        rec_times = [float(t) for t in record_times if 0.0 < t <= cfg.t_end]
        if sorted(rec_times) != rec_times:
            raise ConfigurationError("record_times must be sorted")

    traj = Trajectory(grid=grid, model=model)
    state = initial
    traj.min_rho_ever = float(np.min(state.rho))
    _record(traj, state, profile, model, cfg, grid, 0)

    tiny = 1e-12 * max(cfg.t_end, 1.0)
    next_rec = 0
    k = 0
    while state.time < cfg.t_end - tiny and k < max_steps:
        targets = [cfg.t_end]
        if rec_times is not None and next_rec < len(rec_times):
            targets.append(rec_times[next_rec])
        target = min(t for t in targets if t > state.time + tiny)
        dt_limit = target - state.time
        try:
            trial_dt = stable_dt(state, model, cfg, grid)
            hit = trial_dt >= dt_limit
            state, rep = step(state, profile, model, cfg, grid,
                              dt_limit=dt_limit,
                              new_time=target if hit else None)
        except IntegrationError as err:
            traj.completed = False
            traj.failure_time = err.time
            if raise_on_failure:
                raise
            break
        k += 1
        traj.n_steps = k
        traj.dts.append(rep.dt_used)
        traj.min_rho_ever = min(traj.min_rho_ever, rep.post_step_min_rho)

        due = False
        if rec_times is not None:
            if next_rec < len(rec_times) and state.time >= rec_times[next_rec] - tiny:
                next_rec += 1
                due = True
        elif k % record_every == 0:
            due = True
        if state.time >= cfg.t_end - tiny:
            due = True
        if due:
            _record(traj, state, profile, model, cfg, grid, k)
    return traj

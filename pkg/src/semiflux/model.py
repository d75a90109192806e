"""Gas law, grid, state, and device-profile primitives.

The gas is isentropic, P(rho) = rho**gamma / gamma (or the plain rho**gamma
normalization), and the vacuum is offset to rho = 2*delta: admissible states
keep rho >= 2*delta so the velocity u = m/rho never degenerates.  The offset
also perturbs the pressure,

    P1(rho, delta) = int_{2*delta}^{rho} ((t - 2*delta)/t) * P'(t) dt,

which is the momentum-flux potential actually advected by the regularized
system.  Everything here is plain numpy on a uniform cell-centered grid.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

# Admissible states may undershoot the vacuum offset by this fraction of delta
# (floating-point slack, not physics).
RHO_FLOOR_SLACK = 1e-12


class ConfigurationError(ValueError):
    """Raised when model, grid, or solver settings are inconsistent."""


class PressureConvention(enum.Enum):
    ONE_OVER_GAMMA = "one-over-gamma"   # P(rho) = rho**gamma / gamma
    PLAIN = "plain"                     # P(rho) = rho**gamma


class Boundary(enum.Enum):
    OUTFLOW = "outflow"
    PERIODIC = "periodic"


def _powm1_over(x, e):
    """(x**e - 1) / e, stable as e -> 0 (limit log(x))."""
    x = np.asarray(x, dtype=float)
    if e == 0.0:
        return np.log(x)
    return np.expm1(e * np.log(x)) / e


@dataclass(frozen=True)
class GasModel:
    """Isentropic pressure law plus the vacuum offset delta."""

    gamma: float
    delta: float
    convention: PressureConvention = PressureConvention.ONE_OVER_GAMMA

    def __post_init__(self):
        if not self.gamma >= 1.0:
            raise ConfigurationError(f"gamma must be >= 1, got {self.gamma}")
        if not self.delta > 0.0:
            raise ConfigurationError(f"delta must be > 0, got {self.delta}")

    @property
    def rho_floor(self) -> float:
        return 2.0 * self.delta

    @property
    def theta(self) -> float:
        return 0.5 * (self.gamma - 1.0)

    @property
    def _pref(self) -> float:
        # multiplier turning rho**gamma into P(rho)
        if self.convention is PressureConvention.ONE_OVER_GAMMA:
            return 1.0 / self.gamma
        return 1.0

    def pressure(self, rho):
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < 0.0):
            raise ValueError(f"negative density: min rho = {np.min(rho)!r}")
        return self._pref * rho ** self.gamma

    def dpressure(self, rho):
        """P'(rho); equals rho**(gamma-1) under the 1/gamma normalization."""
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < 0.0):
            raise ValueError(f"negative density: min rho = {np.min(rho)!r}")
        if self.gamma == 1.0:
            return np.ones_like(rho)
        if self.convention is PressureConvention.ONE_OVER_GAMMA:
            return rho ** (self.gamma - 1.0)
        return self.gamma * rho ** (self.gamma - 1.0)

    def sound_speed(self, rho):
        return np.sqrt(self.dpressure(rho))

    def _check_admissible(self, rho):
        rho = np.asarray(rho, dtype=float)
        floor = self.rho_floor - RHO_FLOOR_SLACK * self.delta
        if np.any(rho < floor):
            raise ValueError(
                f"density below vacuum offset: min rho = {np.min(rho)!r} "
                f"< 2*delta = {self.rho_floor!r}"
            )
        return rho

    def perturbed_pressure(self, rho):
        """P1(rho, delta), closed form for every gamma >= 1.

        For gamma > 1 the antiderivative is P(t) - 2*delta*int P'(t)/t dt with
        the power integral evaluated through expm1 so nothing blows up as
        gamma -> 1; at gamma = 1 it degenerates to rho - 2*delta*log(rho).
        """
        rho = self._check_admissible(rho)
        d2 = self.rho_floor
        g = self.gamma
        if g == 1.0:
            val = (rho - d2 * np.log(rho)) - (d2 - d2 * np.log(d2))
        else:
            # int_{2d}^{rho} P'(t)/t dt, conditioned for gamma near 1
            tail = _powm1_over(rho, g - 1.0) - _powm1_over(d2, g - 1.0)
            if self.convention is PressureConvention.PLAIN:
                tail = g * tail
            val = (self.pressure(rho) - self.pressure(d2)) - d2 * tail
        return val if val.shape else float(val)

    def eigenvalues(self, rho, mom):
        """Characteristic speeds u -/+ ((rho - 2*delta)/rho) * sqrt(P'(rho))."""
        rho = self._check_admissible(rho)
        mom = np.asarray(mom, dtype=float)
        u = mom / rho
        spread = (rho - self.rho_floor) / rho * self.sound_speed(rho)
        lam1, lam2 = u - spread, u + spread
        if lam1.shape:
            return lam1, lam2
        return float(lam1), float(lam2)

    def max_wave_speed(self, rho, mom):
        lam1, lam2 = self.eigenvalues(rho, mom)
        return np.maximum(np.abs(lam1), np.abs(lam2))

    def canonical_lower_ref(self) -> float:
        """Lower limit of the sound integral: 2*delta for gamma >= 3, zero for
        1 < gamma < 3, and 1 for the isothermal log form."""
        if self.gamma == 1.0:
            return 1.0
        if self.gamma >= 3.0:
            return self.rho_floor
        return 0.0

    def sound_integral(self, rho):
        """int_l^rho sqrt(P'(s))/s ds with the canonical lower limit l."""
        rho = np.asarray(rho, dtype=float)
        coef = math.sqrt(self.gamma) if self.convention is PressureConvention.PLAIN else 1.0
        th = self.theta
        if self.gamma == 1.0:
            return coef * np.log(rho)
        if self.gamma >= 3.0:
            return coef * (rho ** th - self.rho_floor ** th) / th
        return coef * rho ** th / th

    def riemann_invariants(self, rho, mom, lower_ref: float | None = None):
        """z = sound_integral(rho) - u and w = sound_integral(rho) + u.

        The lower limit is fixed by gamma; passing a mismatched one is a
        configuration error rather than a silent reinterpretation.
        """
        if lower_ref is not None and lower_ref != self.canonical_lower_ref():
            raise ConfigurationError(
                f"lower_ref {lower_ref!r} incompatible with gamma={self.gamma}: "
                f"expected {self.canonical_lower_ref()!r}"
            )
        rho = self._check_admissible(rho)
        mom = np.asarray(mom, dtype=float)
        u = mom / rho
        s = self.sound_integral(rho)
        z, w = s - u, s + u
        if z.shape:
            return z, w
        return float(z), float(w)


@dataclass(frozen=True)
class Grid1D:
    """Uniform cell-centered grid on [x_min, x_max]."""

    x_min: float
    x_max: float
    n_cells: int
    boundary: Boundary = Boundary.OUTFLOW

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ConfigurationError("x_max must exceed x_min")
        if self.n_cells < 8:
            raise ConfigurationError(f"need at least 8 cells, got {self.n_cells}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def faces(self) -> np.ndarray:
        return self.x_min + np.arange(self.n_cells + 1) * self.dx


def cumulative_integral(vals: np.ndarray, dx: float) -> np.ndarray:
    """Running integral from the left domain edge to each cell center.

    Cell-centered data: full weight on cells already passed, half weight on
    the current one (midpoint rule up to the center of cell i).
    """
    vals = np.asarray(vals, dtype=float)
    return dx * (np.cumsum(vals) - 0.5 * vals)


def total_integral(vals: np.ndarray, dx: float) -> float:
    return float(dx * np.sum(np.asarray(vals, dtype=float)))


@dataclass
class HydroState:
    """Cell-centered (rho, m) pair at one instant."""

    rho: np.ndarray
    mom: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        self.mom = np.asarray(self.mom, dtype=float)
        if self.rho.shape != self.mom.shape:
            raise ConfigurationError("rho and mom must share a shape")

    @property
    def velocity(self) -> np.ndarray:
        return self.mom / self.rho

    def excess(self, model: GasModel) -> np.ndarray:
        return self.rho - model.rho_floor


@dataclass(frozen=True)
class ProfileCheck:
    """Outcome of the time-uniform-bound hypothesis checks on a profile."""

    ok: bool
    first_failure: str | None
    conditions: dict = field(default_factory=dict)


def validate_uniform_hypotheses(a_vals, b_vals, e_minus, grid: Grid1D) -> ProfileCheck:
    """Check the damping/doping conditions under which sup-norm bounds stay
    uniform in time: a positive and non-increasing, doping non-negative with
    total charge below the far-field datum (waived when the doping is
    everywhere non-positive), and the derived C profile non-decreasing.
    """
    a = np.asarray(a_vals, dtype=float)
    b = np.asarray(b_vals, dtype=float)
    dx = grid.dx
    tol_a = 1e-10 * max(1.0, float(np.max(np.abs(a))))

    conditions: dict[str, bool] = {}
    first = None

    def record(name: str, ok: bool):
        nonlocal first
        conditions[name] = bool(ok)
        if not ok and first is None:
            first = name

    b_nonneg = bool(np.all(b >= 0.0))
    b_nonpos = bool(np.all(b <= 0.0))
    total_b = total_integral(b, dx)
    if b_nonpos:
        record("doping sign", True)
        record("total doping below field datum", True)  # waived
    else:
        record("doping sign", b_nonneg)
        record("total doping below field datum", total_b < e_minus)

    a_min = float(np.min(a))
    record("damping positive", a_min > 0.0)
    record("damping non-increasing", bool(np.all(np.gradient(a, dx) <= tol_a)))

    c = derived_c_profile(a, b, e_minus, dx)
    tol_c = 1e-10 * max(1.0, float(np.max(np.abs(c))))
    record("C non-decreasing", bool(np.all(np.gradient(c, dx) >= -tol_c)))

    return ProfileCheck(ok=(first is None), first_failure=first, conditions=conditions)


def derived_c_profile(a_vals, b_vals, e_minus, dx: float) -> np.ndarray:
    """C(x) = (e_minus - int_{left}^x b) / a(x)."""
    return (e_minus - cumulative_integral(b_vals, dx)) / np.asarray(a_vals, dtype=float)


@dataclass(frozen=True)
class DeviceProfile:
    """Damping coefficient a(x), doping b(x), far-field datum, and the derived
    C profile with its hypothesis check."""

    a_vals: np.ndarray
    b_vals: np.ndarray
    e_minus: float
    c_vals: np.ndarray
    uniform_ok: bool
    check: ProfileCheck

    @classmethod
    def build(cls, grid: Grid1D, a_vals, b_vals, e_minus: float) -> "DeviceProfile":
        a = np.asarray(a_vals, dtype=float)
        b = np.asarray(b_vals, dtype=float)
        if a.shape != (grid.n_cells,) or b.shape != (grid.n_cells,):
            raise ConfigurationError("profile arrays must match the grid")
        if np.any(a < 0.0):
            raise ValueError("damping coefficient must be non-negative")
        check = validate_uniform_hypotheses(a, b, e_minus, grid)
        c = derived_c_profile(a, b, e_minus, grid.dx)
        return cls(a_vals=a, b_vals=b, e_minus=float(e_minus), c_vals=c,
                   uniform_ok=check.ok, check=check)

    @classmethod
    def uniform(cls, grid: Grid1D, a: float = 1.0, b: float = 0.0,
                e_minus: float = 0.0) -> "DeviceProfile":
        n = grid.n_cells
        return cls.build(grid, np.full(n, float(a)), np.full(n, float(b)), e_minus)


@dataclass(frozen=True)
class AuxFields:
    """Comparison fields entering the invariant-region argument."""

    cumulative_charge: np.ndarray   # int_left^x (rho - 2*delta)
    a_field: np.ndarray             # cumulative_charge / a + C
    b_field: np.ndarray             # -(a'/a^2) * cumulative_charge


def build_aux_fields(state: HydroState, profile: DeviceProfile,
                     model: GasModel, grid: Grid1D) -> AuxFields:
    charge = cumulative_integral(state.excess(model), grid.dx)
    a = profile.a_vals
    a_prime = np.gradient(a, grid.dx)
    return AuxFields(
        cumulative_charge=charge,
        a_field=charge / a + profile.c_vals,
        b_field=-(a_prime / a ** 2) * charge,
    )

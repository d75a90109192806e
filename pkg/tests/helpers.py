"""Shared oracles for the test suite.

The quadrature oracles deliberately avoid the closed forms in the package:
they integrate the defining integrands with scipy's adaptive routines so a
bug in the closed form cannot hide in its own test.
"""

import numpy as np
from scipy.integrate import quad

from semiflux.model import GasModel, PressureConvention


def p1_quadrature(gamma: float, delta: float, rho: float,
                  convention: PressureConvention) -> float:
    """Adaptive quadrature of the perturbed-pressure integrand
    (t - 2*delta)/t * P'(t) over [2*delta, rho]."""
    model = GasModel(gamma=gamma, delta=delta, convention=convention)
    lo = 2.0 * delta

    def integrand(t):
        return (t - lo) / t * float(model.dpressure(t))

    val, err = quad(integrand, lo, rho, epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def sound_integral_quadrature(model: GasModel, rho: float) -> float:
    """Adaptive quadrature of sqrt(P'(s))/s from the gamma-dependent lower
    reference to rho.  The 1 < gamma < 3 case has an integrable endpoint
    singularity at 0 which quad handles adaptively."""
    lo = model.canonical_lower_ref()

    def integrand(s):
        return float(np.sqrt(model.dpressure(s))) / s

    val, err = quad(integrand, lo, rho, epsabs=1e-12, epsrel=1e-11, limit=400)
    return val


def l1_gap(x_coarse, v_coarse, x_fine, v_fine) -> float:
    """L1 distance between two cell-center profiles, the finer one
    interpolated onto the coarse centers."""
    x_coarse = np.asarray(x_coarse, dtype=float)
    on_coarse = np.interp(x_coarse, np.asarray(x_fine, dtype=float),
                          np.asarray(v_fine, dtype=float))
    dx = x_coarse[1] - x_coarse[0]
    return float(dx * np.sum(np.abs(np.asarray(v_coarse) - on_coarse)))

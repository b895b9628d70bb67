"""Vorticity evolution for two-phase irrotational flow under gravity.

With A the density contrast (Atwood number), V the mean sheet velocity and
T = dz/dalpha, the sheet strength evolves as

    d(omega)/dt = -d/dalpha [ A |V|^2 - (A/4) omega^2 / |T|^2
                              + 2 A c (V . T) - c omega
                              - 2 gamma kappa / (rho_+ + rho_-)
                              - 2 A g z2 ]
                  + 2 A d/dt [ V . T ].

The last term contains the time derivative being solved for, so each
evaluation resolves it by fixed-point iteration: the state is advanced by a
virtual step dt_probe with the current rate guess, V . T is re-evaluated
there, and the forward difference feeds back until the rate stops changing.
The probe difference carries an O(dt_probe) bias, which is the price of
keeping the implicit term purely evaluative.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, ValidationError
from .geometry import (
    FloatArray,
    InterfaceCurve,
    Model,
    PhysicalParams,
    curvature,
    fd_derivative,
)
from .kernels import VorticityStrength, pv_all_nodes

logger = logging.getLogger(__name__)

IMPLICIT_TOL = 1e-10
MAX_IMPLICIT_ITER = 50


@dataclass(frozen=True)
class WaveState:
    """Curve, sheet strength and time for the wave system."""

    curve: InterfaceCurve
    omega: VorticityStrength
    t: float = 0.0

    def __post_init__(self) -> None:
        if self.curve.grid != self.omega.grid:
            raise ValidationError("curve and omega must share the same grid")


def _require_waves(params: PhysicalParams) -> None:
    if params.model is not Model.WATER_WAVES:
        raise ValidationError("operation requires water-wave physics")


def _tangential(curve: InterfaceCurve, c: FloatArray | None) -> FloatArray:
    if c is None:
        return np.zeros(curve.grid.node_count)
    c = np.asarray(c, dtype=np.float64)
    if c.shape != (curve.grid.node_count,):
        raise ValidationError("tangential speed must be sampled on the grid")
    return c


def bracket_term(state: WaveState, params: PhysicalParams, c: FloatArray | None = None) -> FloatArray:
    """The quantity differentiated in the transport part of the omega equation."""
    _require_waves(params)
    curve, omega = state.curve, state.omega
    c_arr = _tangential(curve, c)
    a = params.atwood
    u, v = pv_all_nodes(curve, omega)
    d1x, d1y = curve.d1
    v_dot_t = u * d1x + v * d1y
    rho_total = params.rho_plus + params.rho_minus
    bracket = (
        a * (u * u + v * v)
        - 0.25 * a * omega.omega**2 / curve.speed_squared
        + 2.0 * a * c_arr * v_dot_t
        - c_arr * omega.omega
        - 2.0 * a * params.g * curve.z2
    )
    if params.gamma != 0.0:
        bracket = bracket - 2.0 * params.gamma * curvature(curve) / rho_total
    return bracket


def _v_dot_t(curve: InterfaceCurve, omega: VorticityStrength) -> FloatArray:
    u, v = pv_all_nodes(curve, omega)
    d1x, d1y = curve.d1
    return u * d1x + v * d1y


def omega_rhs(
    state: WaveState,
    params: PhysicalParams,
    c: FloatArray | None = None,
    dt_probe: float = 1e-3,
    tol: float = IMPLICIT_TOL,
    max_iter: int = MAX_IMPLICIT_ITER,
) -> FloatArray:
    """Time derivative of the sheet strength, implicit term resolved.

    ``dt_probe`` is the virtual step used to difference V . T along the flow;
    callers inside a time integrator should pass their own step size.
    """
    _require_waves(params)
    if dt_probe <= 0.0:
        raise ValidationError(f"dt_probe must be positive, got {dt_probe}")
    curve, omega = state.curve, state.omega
    c_arr = _tangential(curve, c)
    a = params.atwood
    h = curve.grid.spacing

    explicit = -fd_derivative(bracket_term(state, params, c), h, 1, edge_value=0.0)
    if a == 0.0:
        return explicit

    u, v = pv_all_nodes(curve, omega)
    d1x, d1y = curve.d1
    b0 = u * d1x + v * d1y
    zdot1 = u + c_arr * d1x
    zdot2 = v + c_arr * d1y
    probe_curve = InterfaceCurve(
        curve.grid, curve.z1 + dt_probe * zdot1, curve.z2 + dt_probe * zdot2, validate=False
    )
    probe_curve.require_resolved()

    rate = explicit
    diff = np.inf
    for iteration in range(1, max_iter + 1):
        probe_omega = VorticityStrength(
            curve.grid, omega.omega + dt_probe * rate, validate=False
        )
        b_probe = _v_dot_t(probe_curve, probe_omega)
        new_rate = explicit + 2.0 * a * (b_probe - b0) / dt_probe
        diff = float(np.max(np.abs(new_rate - rate)))
        rate = new_rate
        if diff <= tol:
            logger.debug("implicit omega rate converged in %d iterations", iteration)
            return rate
    raise NoConvergence(max_iter, diff, what="implicit omega-rate iteration")

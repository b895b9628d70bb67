"""Vorticity closure for porous-medium (Darcy) flow.

Dotting the Darcy law with the tangent on both sides of the interface and
using the one-sided velocity limits gives the linear relation

    (mu_+ + mu_-)/2 * omega
        = gamma * d(kappa)/dalpha + (rho_+ - rho_-) g * d(z2)/dalpha
          + (mu_+ - mu_-) * (V(z, omega) . dz/dalpha),

where V is the mean (principal-value) sheet velocity.  With equal viscosities
the nonlocal term drops and omega is explicit; otherwise the relation is a
second-kind integral equation solved here by Picard iteration, whose natural
contraction factor is |mu_+ - mu_-| / (mu_+ + mu_-) times the norm of the
velocity operator.

The interior mask keeps omega exactly zero on the decay bands, consistent with
the truncated-domain far-field closure; residuals are reported against this
masked discrete equation.
"""

from __future__ import annotations

import logging

import numpy as np

from .errors import NoConvergence, ValidationError
from .geometry import (
    FloatArray,
    InterfaceCurve,
    Model,
    PhysicalParams,
    curvature,
    far_field_mask,
    fd_derivative,
)
from .kernels import VorticityStrength, pv_all_nodes

logger = logging.getLogger(__name__)

PICARD_TOL = 1e-10
PICARD_MAX_ITER = 200


def _require_muskat(params: PhysicalParams) -> None:
    if params.model is not Model.MUSKAT:
        raise ValidationError("operation requires Muskat physics")


def vorticity_rhs(curve: InterfaceCurve, params: PhysicalParams) -> FloatArray:
    """Driving term gamma * d(kappa) + [rho] g * d(z2), nodewise.

    With gamma > 0 the curvature samples are differentiated by the same
    fourth-order stencil used everywhere else, so the curve needs four
    discrete derivatives' worth of smoothness.
    """
    _require_muskat(params)
    _, d1z2 = curve.d1
    rhs = params.density_jump * params.g * d1z2
    if params.gamma > 0.0:
        kap = curvature(curve)
        rhs = rhs + params.gamma * fd_derivative(kap, curve.grid.spacing, 1, edge_value=0.0)
    else:
        curve.require_resolved()
    return rhs


def solve_vorticity_equal(curve: InterfaceCurve, params: PhysicalParams) -> VorticityStrength:
    """Closed-form strength mu * omega = rhs for equal viscosities."""
    _require_muskat(params)
    if abs(params.viscosity_jump) > 1e-14 * params.viscosity_mean:
        raise ValidationError(
            f"equal-viscosity solve requires mu_plus == mu_minus, got "
            f"{params.mu_plus} and {params.mu_minus}"
        )
    rhs = vorticity_rhs(curve, params)
    return VorticityStrength(curve.grid, rhs / params.mu_plus)


def _picard_map(
    curve: InterfaceCurve,
    params: PhysicalParams,
    rhs: FloatArray,
    mask: FloatArray,
    omega_arr: FloatArray,
) -> FloatArray:
    trial = VorticityStrength(curve.grid, omega_arr, validate=False)
    u, v = pv_all_nodes(curve, trial)
    d1x, d1y = curve.d1
    v_dot_t = u * d1x + v * d1y
    return mask * (rhs + params.viscosity_jump * v_dot_t) / params.viscosity_mean


def solve_vorticity_general(
    curve: InterfaceCurve,
    params: PhysicalParams,
    tol: float = PICARD_TOL,
    max_iter: int = PICARD_MAX_ITER,
) -> VorticityStrength:
    """Picard solve of the viscosity-contrast integral equation.

    Starts from the equal-viscosity formula with the mean viscosity and
    iterates the fixed-point map until successive sup-norm change <= tol.
    Raises NoConvergence when the budget runs out, which signals an
    under-resolved or extreme-contrast configuration rather than a bug.
    The iteration count is attached to the result as ``.iterations``.
    """
    _require_muskat(params)
    if tol <= 0.0:
        raise ValidationError(f"tolerance must be positive, got {tol}")
    rhs = vorticity_rhs(curve, params)
    mask = far_field_mask(curve.grid)
    omega_arr = mask * rhs / params.viscosity_mean
    if params.viscosity_jump == 0.0:
        result = VorticityStrength(curve.grid, omega_arr)
        result.iterations = 0
        return result
    diff = np.inf
    for iteration in range(1, max_iter + 1):
        new = _picard_map(curve, params, rhs, mask, omega_arr)
        diff = float(np.max(np.abs(new - omega_arr)))
        omega_arr = new
        if diff <= tol:
            result = VorticityStrength(curve.grid, omega_arr)
            result.iterations = iteration
            if logger.isEnabledFor(logging.DEBUG):
                logger.debug(
                    "picard converged in %d iterations (last update %.3e, residual %.3e)",
                    iteration,
                    diff,
                    vorticity_residual(curve, params, result),
                )
            return result
    raise NoConvergence(max_iter, diff, what="viscosity-contrast Picard iteration")


def vorticity_residual(
    curve: InterfaceCurve, params: PhysicalParams, omega: VorticityStrength
) -> float:
    """Sup-norm residual of the masked discrete closure at the given omega."""
    _require_muskat(params)
    rhs = vorticity_rhs(curve, params)
    mask = far_field_mask(curve.grid)
    mapped = _picard_map(curve, params, rhs, mask, omega.omega)
    return float(np.max(np.abs(omega.omega - mapped)))

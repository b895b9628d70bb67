"""Half-plane velocity kernel with mirror term and its boundary limits.

The velocity induced by a vortex sheet of strength omega on the curve is

    u(p) = (1/2pi) int [ K(p, z(s)) - K(p, zbar(s)) ] omega(s) ds,

with K(p, q) = (p - q)^perp / |p - q|^2, (a, b)^perp = (-b, a), and
zbar(s) = (z1(s), -z2(s)) the reflection of the source across the bottom.
The mirror term makes the vertical velocity vanish identically on y = 0.

On the curve itself the first kernel is Cauchy-singular.  The principal value
is computed by the punctured trapezoid rule (the singular node is omitted, so
the odd 1/u part cancels by symmetry) plus the analytic diagonal limit of the
kernel's regular part; without that limit term the omitted node costs one full
order of accuracy.  The rule is second order on C^2 data; beyond the grid the
integrand is dropped, which the far-field decay of omega justifies.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import TooCloseToCurve, ValidationError
from .geometry import DECAY_TOL, FloatArray, Grid, InterfaceCurve, fd_derivative

TWO_PI = 2.0 * np.pi

# Off-curve evaluation is refused inside this many grid cells of the curve
# (scaled by max |dz/dalpha|); inside the collar the quadrature is silently
# inaccurate, so callers must switch to the one-sided limits.
NEAR_FIELD_CELLS = 3.0


class Velocity2(NamedTuple):
    """Planar velocity sample."""

    u: float
    v: float


@dataclass(eq=False)
class VorticityStrength:
    """Sampled sheet strength omega(alpha_j); decays to zero on the edge bands."""

    grid: Grid
    omega: FloatArray
    validate: bool = True

    def __post_init__(self) -> None:
        om = np.ascontiguousarray(self.omega, dtype=np.float64)
        if om.shape != (self.grid.node_count,):
            raise ValidationError(
                f"omega must have shape ({self.grid.node_count},), got {om.shape}"
            )
        om.flags.writeable = False
        object.__setattr__(self, "omega", om)
        if self.validate:
            if not np.all(np.isfinite(om)):
                raise ValidationError("omega samples must be finite")
            band = self.grid.band_mask
            worst = float(np.max(np.abs(om[band]))) if om[band].size else 0.0
            if worst > DECAY_TOL:
                raise ValidationError(
                    f"omega must decay on the edge bands (|omega| = {worst:.3e} "
                    f"> {DECAY_TOL:.1e})"
                )

    @cached_property
    def d1(self) -> FloatArray:
        return fd_derivative(self.omega, self.grid.spacing, 1, edge_value=0.0)


def image_point(p) -> tuple[float, float]:
    """Reflection across the bottom: (x, y) -> (x, -y)."""
    x, y = float(p[0]), float(p[1])
    return (x, -y)


def near_field_tol(curve: InterfaceCurve) -> float:
    """Radius of the collar inside which off-curve evaluation is refused."""
    return NEAR_FIELD_CELLS * curve.grid.spacing * float(np.sqrt(np.max(curve.speed_squared)))


def _require_shared_grid(curve: InterfaceCurve, omega: VorticityStrength) -> None:
    if curve.grid != omega.grid:
        raise ValidationError("curve and omega must share the same grid")


def velocity_at_point(curve: InterfaceCurve, omega: VorticityStrength, p) -> Velocity2:
    """Velocity at a point strictly off the curve (trapezoid quadrature).

    Raises TooCloseToCurve inside the near-field collar, where the caller
    must use plemelj_velocity instead.
    """
    _require_shared_grid(curve, omega)
    x, y = float(p[0]), float(p[1])
    dx = x - curve.z1
    dy = y - curve.z2
    dist = float(np.min(np.hypot(dx, dy)))
    tol = near_field_tol(curve)
    if dist < tol:
        raise TooCloseToCurve(dist, tol)
    r2 = dx * dx + dy * dy
    dy_im = y + curve.z2
    r2_im = dx * dx + dy_im * dy_im
    w = curve.grid.trapezoid_weights * omega.omega
    u = float(np.dot(w, -dy / r2 - (-dy_im / r2_im))) / TWO_PI
    v = float(np.dot(w, dx / r2 - dx / r2_im)) / TWO_PI
    return Velocity2(u, v)


def _diagonal_limits(curve: InterfaceCurve, omega: VorticityStrength) -> tuple[FloatArray, FloatArray]:
    """Regular part of K(z(alpha), z(s)) * omega(s) as s -> alpha, nodewise.

    With u = alpha - s the singular kernel expands as

        K1 * omega = omega * dz^perp / (Q0 u) + R + O(u),
        R = ( -omega' * dz^perp + omega * (dz^perp * Q1/Q0 - d2z^perp / 2) ) / Q0,

    where Q0 = |dz|^2 and Q1 = dz . d2z.  R is the value the punctured
    trapezoid rule must insert at the omitted node.
    """
    d1x, d1y = curve.d1
    d2x, d2y = curve.d2
    q0 = curve.speed_squared
    q1 = d1x * d2x + d1y * d2y
    om = omega.omega
    dom = omega.d1
    # perp of (a, b) is (-b, a)
    ru = (-dom * (-d1y) + om * ((-d1y) * q1 / q0 - 0.5 * (-d2y))) / q0
    rv = (-dom * d1x + om * (d1x * q1 / q0 - 0.5 * d2x)) / q0
    return ru, rv


def _pv_components(
    curve: InterfaceCurve, omega: VorticityStrength, j: int
) -> tuple[float, float]:
    """Principal-value velocity integral (times 2pi) at node j."""
    z1, z2 = curve.z1, curve.z2
    dx = z1[j] - z1
    dy = z2[j] - z2
    r2 = dx * dx + dy * dy
    r2[j] = 1.0  # dummy; node j is omitted from the singular sum
    sy = z2[j] + z2
    r2_im = dx * dx + sy * sy
    w = curve.grid.trapezoid_weights
    wom = w * omega.omega
    ku = -dy / r2
    kv = dx / r2
    ku[j] = 0.0
    kv[j] = 0.0
    ru, rv = _diagonal_limits(curve, omega)
    u = float(np.dot(wom, ku) + w[j] * ru[j] - np.dot(wom, -sy / r2_im))
    v = float(np.dot(wom, kv) + w[j] * rv[j] - np.dot(wom, dx / r2_im))
    return u, v


def pv_boundary_integral(curve: InterfaceCurve, omega: VorticityStrength, j: int) -> Velocity2:
    """Mean (principal-value) velocity on the curve at node j."""
    _require_shared_grid(curve, omega)
    curve.require_resolved()
    if not 0 <= j < curve.grid.node_count:
        raise IndexError(f"node index {j} out of range")
    u, v = _pv_components(curve, omega, j)
    return Velocity2(u / TWO_PI, v / TWO_PI)


def pv_all_nodes(curve: InterfaceCurve, omega: VorticityStrength) -> tuple[FloatArray, FloatArray]:
    """Principal-value velocity at every node (vectorized over targets).

    Builds O(N^2) difference matrices; intended for the evolution grids
    (N up to a few thousand), not for one-off evaluations on fine grids.
    """
    _require_shared_grid(curve, omega)
    curve.require_resolved()
    z1, z2 = curve.z1, curve.z2
    n = z1.size
    dx = z1[:, None] - z1[None, :]
    dy = z2[:, None] - z2[None, :]
    r2 = dx * dx + dy * dy
    np.fill_diagonal(r2, 1.0)
    sy = z2[:, None] + z2[None, :]
    r2_im = dx * dx + sy * sy
    wom = curve.grid.trapezoid_weights * omega.omega
    ku = -dy / r2
    kv = dx / r2
    np.fill_diagonal(ku, 0.0)
    np.fill_diagonal(kv, 0.0)
    ru, rv = _diagonal_limits(curve, omega)
    w_diag = curve.grid.trapezoid_weights
    u = (ku @ wom + w_diag * ru - (-sy / r2_im) @ wom) / TWO_PI
    v = (kv @ wom + w_diag * rv - (dx / r2_im) @ wom) / TWO_PI
    return u, v


def plemelj_velocity(
    curve: InterfaceCurve, omega: VorticityStrength, j: int, side: str
) -> Velocity2:
    """One-sided velocity limit at node j: pv -/+ (omega/2) dz/|dz|^2.

    side='plus' is the limit from above the interface, side='minus' from the
    strip below; their difference is the tangential jump -omega dz/|dz|^2.
    """
    if side not in ("plus", "minus"):
        raise ValueError(f"side must be 'plus' or 'minus', got {side!r}")
    mean = pv_boundary_integral(curve, omega, j)
    d1x, d1y = curve.d1
    q0 = curve.speed_squared[j]
    half_jump_u = 0.5 * omega.omega[j] * d1x[j] / q0
    half_jump_v = 0.5 * omega.omega[j] * d1y[j] / q0
    sign = -1.0 if side == "plus" else 1.0
    return Velocity2(mean.u + sign * half_jump_u, mean.v + sign * half_jump_v)

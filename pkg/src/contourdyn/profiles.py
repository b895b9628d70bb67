"""Initial-data families: windowed perturbations of the flat interface.

Every profile is compactly supported inside the grid window so the far-field
flatness invariant holds exactly at the decay bands.  The window is an
infinitely smooth plateau bump (exact 1 on a central plateau, exact 0 outside),
so windowing never limits the order of the finite-difference stencils.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .geometry import FloatArray, Grid, InterfaceCurve
from .kernels import VorticityStrength

PROFILES = ("flat", "cosine", "pinch", "monotone")
OMEGA_PROFILES = ("zero", "gaussian")


def _smooth_step(s: FloatArray) -> FloatArray:
    """C-infinity step: 0 at s <= 0, 1 at s >= 1."""
    s = np.clip(s, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        f = np.where(s > 0.0, np.exp(-1.0 / np.maximum(s, 1e-300)), 0.0)
        g = np.where(s < 1.0, np.exp(-1.0 / np.maximum(1.0 - s, 1e-300)), 0.0)
    return f / (f + g)


def plateau_window(x: FloatArray, flat_half: float, ramp: float) -> FloatArray:
    """Smooth even window: 1 on |x| <= flat_half, 0 on |x| >= flat_half + ramp."""
    if flat_half < 0.0 or ramp <= 0.0:
        raise ValidationError("window needs flat_half >= 0 and ramp > 0")
    return _smooth_step((flat_half + ramp - np.abs(x)) / ramp)


@dataclass(frozen=True)
class InitialSpec:
    """Declarative description of the initial curve and sheet strength."""

    profile: str = "flat"
    amplitude: float = 0.0
    window_flat: float = 6.0
    window_ramp: float = 6.0
    delta: float = 0.1
    z1_wiggle: float = 0.0
    omega_profile: str = "zero"
    omega_amplitude: float = 0.0
    omega_center: float = 0.0
    omega_sigma: float = 1.0

    def __post_init__(self) -> None:
        if self.profile not in PROFILES:
            raise ValidationError(f"unknown profile {self.profile!r}; choose from {PROFILES}")
        if self.omega_profile not in OMEGA_PROFILES:
            raise ValidationError(
                f"unknown omega profile {self.omega_profile!r}; choose from {OMEGA_PROFILES}"
            )
        if self.profile == "pinch" and not 0.0 < self.delta < 1.0:
            raise ValidationError(f"pinch depth must lie in (0, 1), got {self.delta}")
        if self.omega_sigma <= 0.0:
            raise ValidationError("omega_sigma must be positive")


def _window_or_fail(spec: InitialSpec, grid: Grid) -> FloatArray:
    support = spec.window_flat + spec.window_ramp
    usable = grid.half_width - (grid.spacing * (min(8, grid.node_count // 2) + 1))
    if support >= usable:
        raise ValidationError(
            f"window support {support:.3g} reaches the decay band of the grid "
            f"(usable half-width {usable:.3g}); widen the grid or narrow the window"
        )
    return plateau_window(grid.alpha, spec.window_flat, spec.window_ramp)


def build_initial(spec: InitialSpec, grid: Grid) -> tuple[InterfaceCurve, VorticityStrength]:
    """Construct the initial curve and sheet strength described by ``spec``."""
    alpha = grid.alpha
    z1 = alpha.copy()
    if spec.profile == "flat":
        z2 = np.ones_like(alpha)
    elif spec.profile == "cosine":
        w = _window_or_fail(spec, grid)
        z2 = 1.0 + spec.amplitude * np.cos(alpha) * w
    elif spec.profile == "pinch":
        w = plateau_window(alpha, 0.0, max(spec.window_ramp, grid.spacing * 4))
        if spec.window_flat + spec.window_ramp >= grid.half_width:
            raise ValidationError("pinch window reaches the grid boundary")
        z2 = 1.0 - (1.0 - spec.delta) * w
    elif spec.profile == "monotone":
        w = _window_or_fail(spec, grid)
        z2 = 1.0 + spec.amplitude * np.cos(alpha) * w
        z1 = alpha + spec.z1_wiggle * np.sin(alpha) * w
    else:  # pragma: no cover - guarded by InitialSpec
        raise ValidationError(f"unhandled profile {spec.profile!r}")

    if np.any(z2 <= 0.0):
        raise ValidationError(
            f"profile {spec.profile!r} with amplitude {spec.amplitude} dips below the bottom"
        )
    curve = InterfaceCurve(grid, z1, z2)
    if spec.profile == "monotone":
        d1x, _ = curve.d1
        if float(np.min(d1x)) < 0.0:
            raise ValidationError(
                f"monotone profile violated: min d(z1)/dalpha = {float(np.min(d1x)):.3e}"
            )

    if spec.omega_profile == "zero" or spec.omega_amplitude == 0.0:
        omega_arr = np.zeros_like(alpha)
    else:
        omega_arr = spec.omega_amplitude * np.exp(
            -((alpha - spec.omega_center) ** 2) / (2.0 * spec.omega_sigma**2)
        )
        band = grid.band_mask
        worst = float(np.max(np.abs(omega_arr[band])))
        if worst > 1e-10:
            raise ValidationError(
                f"omega profile does not decay inside the grid window (band value {worst:.3e})"
            )
        omega_arr = np.where(band, 0.0, omega_arr)
    return curve, VorticityStrength(grid, omega_arr)

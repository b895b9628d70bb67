"""Diagnostics for the no-touching continuation criteria.

This module turns the continuation theory into checkable numbers:

* the minimum-depth rate dm/dt = J / (2 pi), where J is the vertical-velocity
  quadrature evaluated at the refined depth minimum, split exactly into the
  near band |s - alpha*| < m, the middle band m <= |s - alpha*| < 1 and the
  far band |s - alpha*| >= 1;
* the ratio |J| / (m log(1/m)) whose boundedness is the desk-scale form of
  the depth estimate;
* the pair of flux integrals I and I-tilde whose difference equals pi for
  every admissible curve (a closed-contour identity), used as a global
  correctness check of the quadrature machinery;
* a double-exponential lower-bound fit m(t) >= exp(-C exp(C t));
* a continuation report collecting every hypothesis quantity.

J is evaluated at an off-grid point, so its Cauchy singularity is subtracted
analytically: the model singularity C/u integrates to an exact logarithm over
the truncated interval (assigned to the far band) and the remainder is smooth
enough for the trapezoid rule.  I and I-tilde are evaluated at a grid node with
the punctured rule plus diagonal limits, and carry analytic flat-state tail
corrections; the I-tilde tail is a Poisson integral that decays only like
1/distance and must not be dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import FitFailure, OutOfRegime, ValidationError
from .geometry import (
    DECAY_TOL,
    FloatArray,
    InterfaceCurve,
    PhysicalParams,
    chord_arc_constant,
    holder_norms,
    min_depth,
)
from .kernels import VorticityStrength

TWO_PI = 2.0 * np.pi

# Nodes closer to the evaluation point than this fraction of a cell switch to
# the analytic limit of the desingularized integrand.
_LIMIT_SWITCH = 1e-3


@dataclass(frozen=True)
class DepthDiagnostics:
    """Per-state depth diagnostics; the CSV stream serializes these fields."""

    t: float
    m: float
    alpha_star: float
    dmdt: float
    J: float
    J_m: float
    J_1: float
    J_inf: float
    chord_arc: float
    c2_norm: float
    omega_c1_norm: float
    tail_bound: float
    tie_count: int = 1
    argmin_index: int = 0


@dataclass(frozen=True)
class BoundFit:
    """Fitted double-exponential lower bound m(t) >= exp(-C exp(C t))."""

    C_fit: float
    residual: float
    window: tuple[float, float]
    certified: bool
    fit_slack: float


def _quad_interp(values: FloatArray, grid_alpha: FloatArray, h: float, jc: int, at: float) -> float:
    """Quadratic (three-point Lagrange) interpolation around node jc."""
    x = at - grid_alpha[jc]
    wm = x * (x - h) / (2.0 * h * h)
    w0 = (h * h - x * x) / (h * h)
    wp = x * (x + h) / (2.0 * h * h)
    return float(wm * values[jc - 1] + w0 * values[jc] + wp * values[jc + 1])


def depth_rate(
    curve: InterfaceCurve,
    omega: VorticityStrength,
    t: float = 0.0,
    alpha_star: float | None = None,
) -> tuple[float, DepthDiagnostics]:
    """Minimum-depth rate and its band decomposition.

    The quadrature runs at the refined argmin (or at ``alpha_star`` when
    given); curve and omega values there come from parabolic interpolation.
    The exact partition J = J_m + J_1 + J_inf is preserved by assigning the
    analytic logarithm of the subtracted singularity to the far band, where
    the symmetric inner bands contribute zero by parity.
    """
    if curve.grid != omega.grid:
        raise ValidationError("curve and omega must share the same grid")
    curve.require_resolved()
    grid = curve.grid
    alpha = grid.alpha
    h = grid.spacing
    md = min_depth(curve)
    m = md.m
    a_star = md.alpha_star if alpha_star is None else float(alpha_star)
    jc = int(np.clip(round((a_star + grid.half_width) / h), 1, grid.node_count - 2))

    d1x, d1y = curve.d1
    d2x, d2y = curve.d2
    z1s = _quad_interp(curve.z1, alpha, h, jc, a_star)
    z2s = _quad_interp(curve.z2, alpha, h, jc, a_star)
    d1xs = _quad_interp(d1x, alpha, h, jc, a_star)
    d1ys = _quad_interp(d1y, alpha, h, jc, a_star)
    d2xs = _quad_interp(d2x, alpha, h, jc, a_star)
    d2ys = _quad_interp(d2y, alpha, h, jc, a_star)
    oms = _quad_interp(omega.omega, alpha, h, jc, a_star)
    doms = _quad_interp(omega.d1, alpha, h, jc, a_star)

    u = a_star - alpha
    dz1 = z1s - curve.z1
    dz2 = z2s - curve.z2
    sz2 = z2s + curve.z2
    p = (dz1 * dz1 + dz2 * dz2) * (dz1 * dz1 + sz2 * sz2)

    # Combined kernel: 1/|dz|^2 - 1/|dz_mirror|^2 = 4 z2* z2(s) / P, exact
    # algebra that avoids cancellation when the depth is small.
    small = np.abs(u) < _LIMIT_SWITCH * h
    u_safe = np.where(small, 1.0, u)
    p_safe = np.where(small, 1.0, p)
    integrand = 4.0 * dz1 * z2s * curve.z2 * omega.omega / p_safe

    q0 = d1xs * d1xs + d1ys * d1ys
    sing_coeff = d1xs * oms / q0
    desing = integrand - sing_coeff / u_safe

    if np.any(small):
        # Analytic limit of the desingularized integrand as s -> alpha*.
        q1 = d1xs * d2xs + d1ys * d2ys
        r0 = 4.0 * z2s * z2s
        r1 = -4.0 * z2s * d1ys
        n1 = 4.0 * z2s * z2s * d1xs * oms
        n2 = 4.0 * z2s * (-0.5 * d2xs * z2s * oms - d1xs * d1ys * oms - d1xs * z2s * doms)
        limit = (n2 - sing_coeff * (q0 * r1 - q1 * r0)) / (q0 * r0)
        desing = np.where(small, limit, desing)

    contrib = grid.trapezoid_weights * desing

    m_eff = min(m, 1.0)
    au = np.abs(u)
    near = au < m_eff
    mid = (au >= m_eff) & (au < 1.0)
    far = au >= 1.0
    j_near = float(np.sum(contrib[near]))
    j_mid = float(np.sum(contrib[mid]))
    j_far = float(np.sum(contrib[far]))

    # Exact principal value of the subtracted C/u over the covered interval
    # [-L, L-h]; by parity the symmetric inner bands contribute nothing, so
    # the whole logarithm belongs to the far band.
    d_minus = a_star + grid.half_width
    d_plus = grid.half_width - h - a_star
    floor = 0.5 * h
    if abs(sing_coeff) > 0.0:
        j_far += sing_coeff * float(np.log(max(d_minus, floor) / max(d_plus, floor)))

    j_total = j_near + j_mid + j_far
    dmdt = j_total / TWO_PI

    c0, c1, c2 = holder_norms(curve)
    om_c0 = float(np.max(np.abs(omega.omega)))
    om_c1 = max(om_c0, float(np.max(np.abs(omega.d1))))
    chord = chord_arc_constant(curve)

    band = grid.band_mask
    om_edge = max(float(np.max(np.abs(omega.omega[band]))), DECAY_TOL)
    z1_c1 = float(np.max(np.abs(d1x)))
    z2_max = float(np.max(curve.z2))
    tail = (
        2.0
        * m
        * z2_max
        * z1_c1
        * om_edge
        * chord**4
        * (1.0 / max(d_minus, floor) ** 2 + 1.0 / max(d_plus, floor) ** 2)
    )

    diag = DepthDiagnostics(
        t=float(t),
        m=m,
        alpha_star=a_star,
        dmdt=dmdt,
        J=j_total,
        J_m=j_near,
        J_1=j_mid,
        J_inf=j_far,
        chord_arc=chord,
        c2_norm=max(c0, c1, c2),
        omega_c1_norm=om_c1,
        tail_bound=tail,
        tie_count=md.tie_count,
        argmin_index=md.index,
    )
    return dmdt, diag


def log_bound_ratio(diag: DepthDiagnostics) -> float:
    """|J| / (m log(1/m)); defined only for m < 1/e."""
    if not 0.0 < diag.m < 1.0 / np.e:
        raise OutOfRegime(
            f"bound ratio needs 0 < m < 1/e, got m = {diag.m:.6g} (not applicable)"
        )
    return abs(diag.J) / (diag.m * np.log(1.0 / diag.m))


def _node_evaluation_pieces(curve: InterfaceCurve, j_star: int):
    curve.require_resolved()
    grid = curve.grid
    if not 0 <= j_star < grid.node_count:
        raise IndexError(f"node index {j_star} out of range")
    z1, z2 = curve.z1, curve.z2
    dz1 = z1[j_star] - z1
    dz2 = z2[j_star] - z2
    r2 = dz1 * dz1 + dz2 * dz2
    r2[j_star] = 1.0
    sz2 = z2[j_star] + z2
    r2_im = dz1 * dz1 + sz2 * sz2
    return dz1, dz2, sz2, r2, r2_im


def _flat_tail(a: float, x: float, s_left: float, s_right: float) -> float:
    """Exact integral of a / ((s - x)^2 + a^2) over (-inf, s_left] + [s_right, inf)."""
    if a == 0.0:
        return 0.0
    return float(
        np.sign(a) * np.pi
        - np.arctan((s_right - x) / a)
        + np.arctan((s_left - x) / a)
    )


def identity_I(curve: InterfaceCurve, j_star: int) -> float:
    """Flux integral of d(z2)/ds against the vertical kernel at node j_star."""
    dz1, _, _, r2, r2_im = _node_evaluation_pieces(curve, j_star)
    d1x, d1y = curve.d1
    d2x, d2y = curve.d2
    f_sing = d1y * dz1 / r2
    f_sing[j_star] = 0.0
    q0 = curve.speed_squared[j_star]
    q1 = d1x[j_star] * d2x[j_star] + d1y[j_star] * d2y[j_star]
    diag = (
        -d2y[j_star] * d1x[j_star]
        - 0.5 * d1y[j_star] * d2x[j_star]
        + d1y[j_star] * d1x[j_star] * q1 / q0
    ) / q0
    w = curve.grid.trapezoid_weights
    grid_part = float(np.dot(w, f_sing - d1y * dz1 / r2_im)) + w[j_star] * diag
    # d(z2)/ds vanishes identically on the flat far field: no tail.
    return grid_part


def identity_Itilde(curve: InterfaceCurve, j_star: int) -> float:
    """Flux integral of d(z1)/ds against the depth kernels at node j_star.

    Includes the analytic Poisson tails of the exactly-flat far field; their
    1/distance decay dominates the truncation error if dropped.
    """
    dz1, dz2, sz2, r2, r2_im = _node_evaluation_pieces(curve, j_star)
    d1x, d1y = curve.d1
    d2x, d2y = curve.d2
    f_sing = d1x * dz2 / r2
    f_sing[j_star] = 0.0
    q0 = curve.speed_squared[j_star]
    q1 = d1x[j_star] * d2x[j_star] + d1y[j_star] * d2y[j_star]
    diag = (
        -d2x[j_star] * d1y[j_star]
        - 0.5 * d1x[j_star] * d2y[j_star]
        + d1x[j_star] * d1y[j_star] * q1 / q0
    ) / q0
    w = curve.grid.trapezoid_weights
    grid_part = float(np.dot(w, f_sing + d1x * sz2 / r2_im)) + w[j_star] * diag
    alpha = curve.grid.alpha
    x = float(curve.z1[j_star])
    z2s = float(curve.z2[j_star])
    tail = _flat_tail(z2s - 1.0, x, float(alpha[0]), float(alpha[-1])) + _flat_tail(
        z2s + 1.0, x, float(alpha[0]), float(alpha[-1])
    )
    return grid_part + tail


def identity_defect(curve: InterfaceCurve, j_star: int | None = None) -> tuple[float, float, float]:
    """(I, I-tilde, |I-tilde - I - pi|) at the argmin node by default."""
    if j_star is None:
        j_star = min_depth(curve).index
    value_i = identity_I(curve, j_star)
    value_it = identity_Itilde(curve, j_star)
    return value_i, value_it, abs(value_it - value_i - np.pi)


def _loglog(m: FloatArray) -> FloatArray:
    return np.log(np.log(1.0 / m))


def fit_double_exponential(
    t: FloatArray, m: FloatArray, fit_slack: float = 1e-2
) -> BoundFit:
    """Fit m(t) >= exp(-C exp(C t)) with a single constant C.

    A one-dimensional least-squares fit of log log(1/m) against C t + log C
    gives the growth rate; if the fitted bound fails to lie below the samples
    (within ``fit_slack``), C is raised to the smallest certifying value, so
    the returned fit always certifies the series when one exists.
    """
    t = np.asarray(t, dtype=np.float64)
    m = np.asarray(m, dtype=np.float64)
    if t.shape != m.shape or t.ndim != 1:
        raise FitFailure("t and m must be one-dimensional arrays of equal length")
    if t.size < 4:
        raise FitFailure(f"need at least 4 samples, got {t.size}")
    if np.any(~np.isfinite(t)) or np.any(~np.isfinite(m)):
        raise FitFailure("samples must be finite")
    if np.any(np.diff(t) <= 0.0):
        raise FitFailure("times must be strictly increasing")
    if np.any(m <= 0.0) or np.any(m >= 1.0):
        raise FitFailure("depth samples must lie strictly inside (0, 1)")
    if not 0.0 <= fit_slack < 1.0:
        raise FitFailure(f"fit_slack must be in [0, 1), got {fit_slack}")

    y = _loglog(m)

    def objective(c: float) -> float:
        r = y - c * t - np.log(c)
        return float(np.dot(r, r))

    slope = max((y[-1] - y[0]) / (t[-1] - t[0]), 0.0)
    c_hi = max(10.0, 4.0 * slope, 2.0 * float(np.exp(np.max(y))))
    res = minimize_scalar(objective, bounds=(1e-8, c_hi), method="bounded",
                          options={"xatol": 1e-12})
    c_lsq = float(res.x)

    # Smallest C whose bound stays below every sample with the given slack.
    q = np.log((1.0 - fit_slack) / m)
    active = q > 0.0

    def gap(c: float) -> float:
        if not np.any(active):
            return 1.0
        return float(np.min(c * t[active] + np.log(c) - np.log(q[active])))

    c_cert = 1e-8
    if np.any(active) and gap(c_cert) < 0.0:
        hi = max(c_hi, 1.0)
        while gap(hi) < 0.0:
            hi *= 2.0
            if hi > 1e12:
                raise FitFailure("no certifying constant below 1e12")
        c_cert = float(brentq(gap, 1e-8, hi, xtol=1e-14, rtol=1e-14))

    c_fit = max(c_lsq, c_cert)
    if c_fit <= 0.0:
        raise FitFailure("fit produced a non-positive constant")
    resid = float(np.sqrt(objective(c_fit) / t.size))
    certified = gap(c_fit) >= -1e-12
    return BoundFit(
        C_fit=c_fit,
        residual=resid,
        window=(float(t[0]), float(t[-1])),
        certified=bool(certified),
        fit_slack=float(fit_slack),
    )


@dataclass(frozen=True)
class ContinuationReport:
    """Hypothesis quantities of the continuation criteria plus cap verdicts."""

    t: float
    m: float
    alpha_star: float
    chord_arc: float
    curve_c0: float
    curve_c1: float
    curve_c2: float
    omega_c0: float
    omega_c1: float
    bound_ratio: float | None
    exceeded: tuple[str, ...]
    verdict: str


def continuation_report(
    curve: InterfaceCurve,
    omega: VorticityStrength,
    params: PhysicalParams,
    t: float = 0.0,
    norm_cap: float = 1e3,
    chord_arc_cap: float = 1e3,
) -> ContinuationReport:
    """Collect every continuation-hypothesis quantity and flag exceeded caps."""
    _ = params  # physics currently informs no extra hypothesis quantity
    c0, c1, c2 = holder_norms(curve)
    om_c0 = float(np.max(np.abs(omega.omega)))
    om_c1 = max(om_c0, float(np.max(np.abs(omega.d1))))
    chord = chord_arc_constant(curve)
    md = min_depth(curve)
    _, diag = depth_rate(curve, omega, t=t)
    try:
        ratio: float | None = log_bound_ratio(diag)
    except OutOfRegime:
        ratio = None
    exceeded = []
    if max(c0, c1, c2) > norm_cap:
        exceeded.append("curve_c2")
    if om_c1 > norm_cap:
        exceeded.append("omega_c1")
    if chord > chord_arc_cap:
        exceeded.append("chord_arc")
    verdict = "criteria satisfied" if not exceeded else "exceeded: " + ", ".join(exceeded)
    return ContinuationReport(
        t=float(t),
        m=md.m,
        alpha_star=md.alpha_star,
        chord_arc=chord,
        curve_c0=c0,
        curve_c1=c1,
        curve_c2=c2,
        omega_c0=om_c0,
        omega_c1=om_c1,
        bound_ratio=ratio,
        exceeded=tuple(exceeded),
        verdict=verdict,
    )

"""Evans function of the linearization about a computed front.

The eigenvalue problem is written as W_x = A(x, lam) W with W = (v, v_x) and

    A = [[0, 1], [(tau lam^2 + lam b(x) - a(x)) / s2, -c (b(x) + 2 tau lam) / s2]],

s2 = 1 - c^2 tau, a = c d/dx g(U) + f'(U), b = g(U).  The solution decaying at
-inf (growing mode mu2 of A_-) is integrated from -L to 0 and the one decaying
at +inf (mode mu1 of A_+) from L back to 0, each with the factor exp(mu x)
removed.  D(lam) is the determinant of the two at x = 0.

Integration is classical RK4 with step 2 dx on the profile grid, so the
midpoint stage uses the grid node in between and no interpolation of the
coefficients is needed.  All lam values of a batch are integrated together.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy.integrate import cumulative_simpson, simpson
from scipy.interpolate import CubicSpline

from .errors import ContourError, DomainError, NumericalError, ResolutionError
from .profile import FrontProfile, fd_derivatives
from .spectrum import AsymptoticSpectralData, asymptotic_matrix, spatial_eigenvalues, spectral_gap

MAX_SAMPLES = 2 ** 14
ZERO_FLOOR = 1e-10
STEP_LIMIT = 0.5 * math.pi


@dataclass(frozen=True)
class CoefficientFields:
    x: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: float
    tau: float
    data: AsymptoticSpectralData

    @property
    def s2(self) -> float:
        return 1.0 - self.c * self.c * self.tau

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def L(self) -> float:
        return float(self.x[-1])

    def at(self, x) -> tuple:
        """(a, b) at arbitrary points by cubic interpolation of the grid samples."""
        x = np.asarray(x, dtype=float)
        if np.any(np.abs(x) > self.L * (1 + 1e-12)):
            raise DomainError("x outside the profile grid")
        return CubicSpline(self.x, self.a)(x), CubicSpline(self.x, self.b)(x)


def coefficient_fields(model, front: FrontProfile) -> CoefficientFields:
    U, Ux = front.U, front.U_x
    c, tau = front.c_star, front.tau
    b = np.asarray(model.g(U), dtype=float) * np.ones_like(U)
    dg = np.asarray(model.dg(U), dtype=float) * np.ones_like(U)
    a = c * dg * Ux + model.df(U)
    if np.min(b) < model.delta0:
        raise NumericalError("damping falls below delta0 on the front")
    data = AsymptoticSpectralData(float(model.df(0.0)), float(model.df(1.0)),
                                  float(model.g(0.0)), float(model.g(1.0)), c, tau)
    return CoefficientFields(front.xi, a, b, c, tau, data)


def _matrix(a, b, c, tau, s2, lam):
    return np.array([[0.0, 1.0],
                     [(tau * lam * lam + lam * b - a) / s2, -c * (b + 2.0 * tau * lam) / s2]],
                    dtype=complex)


def coefficient_matrix(fields: CoefficientFields, x: float, lam) -> np.ndarray:
    a, b = fields.at(x)
    return _matrix(float(a), float(b), fields.c, fields.tau, fields.s2, complex(lam))


def matrix_parts(fields: CoefficientFields, x: float) -> tuple:
    """(A0, A1, A2) with A(x, lam) = A0 + lam A1 + lam^2 A2."""
    a, b = (float(v) for v in fields.at(x))
    c, tau, s2 = fields.c, fields.tau, fields.s2
    A0 = np.array([[0.0, 1.0], [-a / s2, -c * b / s2]])
    A1 = np.array([[0.0, 0.0], [b / s2, -2.0 * c * tau / s2]])
    A2 = np.array([[0.0, 0.0], [tau / s2, 0.0]])
    return A0, A1, A2


def _mode(fields, side, lam):
    """Rate and eigenvector (1, mu) of the decaying mode at one end."""
    mu1, mu2 = spatial_eigenvalues(fields.data, side, lam)
    mu = mu2 if side == "minus" else mu1
    return mu


def _rk4(fields, lam, side, keep=False):
    """Integrate the rescaled system for a batch of lam; returns Y at x = 0 (and the path)."""
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    n = (len(fields.x) - 1) // 2
    if n % 2:
        raise DomainError("profile grid needs an even number of intervals per side")
    mu = _mode(fields, side, lam)
    c, tau, s2 = fields.c, fields.tau, fields.s2
    a, b = fields.a, fields.b
    base = tau * lam * lam
    drift = -c * 2.0 * tau * lam / s2
    y1 = np.ones_like(lam)
    y2 = mu.copy()
    if side == "minus":
        idx = range(0, n, 2)
        h = 2.0 * fields.dx
        sgn = 1
    else:
        idx = range(2 * n, n, -2)
        h = -2.0 * fields.dx
        sgn = -1

    def coef(k):
        p = (base + lam * b[k] - a[k]) / s2
        q = drift - c * b[k] / s2 - mu
        return p, q

    path = [(y1.copy(), y2.copy())] if keep else None
    for k in idx:
        p0, q0 = coef(k)
        pm, qm = coef(k + sgn)
        p1, q1 = coef(k + 2 * sgn)
        k1a = y2 - mu * y1
        k1b = p0 * y1 + q0 * y2
        ta, tb = y1 + 0.5 * h * k1a, y2 + 0.5 * h * k1b
        k2a = tb - mu * ta
        k2b = pm * ta + qm * tb
        ta, tb = y1 + 0.5 * h * k2a, y2 + 0.5 * h * k2b
        k3a = tb - mu * ta
        k3b = pm * ta + qm * tb
        ta, tb = y1 + h * k3a, y2 + h * k3b
        k4a = tb - mu * ta
        k4b = p1 * ta + q1 * tb
        y1 = y1 + h / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a)
        y2 = y2 + h / 6.0 * (k1b + 2 * k2b + 2 * k3b + k4b)
        if keep:
            path.append((y1.copy(), y2.copy()))
        if not (np.all(np.isfinite(y1)) and np.all(np.isfinite(y2))):
            raise NumericalError("decaying solution overflowed; increase L or shrink the contour")
    return y1, y2, mu, path


def decaying_solution(fields: CoefficientFields, side: str, lam: complex):
    """Rescaled decaying solution on [-L, 0] (minus) or [0, L] (plus).

    Returns (x, Y, mu): Y[k] = exp(-mu x_k) W(x_k) with W(-+L) = (1, mu).
    """
    y1, y2, mu, path = _rk4(fields, [lam], side, keep=True)
    Y = np.array([[p[0][0], p[1][0]] for p in path])
    n = (len(fields.x) - 1) // 2
    if side == "minus":
        x = fields.x[0:n + 1:2]
    else:
        x = fields.x[2 * n:n - 1:-2]
    return x, Y, complex(mu[0])


def evans(fields: CoefficientFields, lam, return_scale: bool = False):
    """D(lam) = det[W-(0), W+(0)] for scalar or array lam."""
    y1m, y2m, _, _ = _rk4(fields, lam, "minus")
    y1p, y2p, _, _ = _rk4(fields, lam, "plus")
    D = y1m * y2p - y2m * y1p
    scale = np.hypot(np.abs(y1m), np.abs(y2m)) * np.hypot(np.abs(y1p), np.abs(y2p))
    if np.ndim(lam) == 0:
        D, scale = complex(D[0]), float(scale[0])
    if return_scale:
        return D, scale
    return D


@dataclass
class Contour:
    """Closed contour lam(s), s in [0, 1), with an initial sample count."""

    param: Callable
    n0: int = 256
    label: str = ""
    vertices: list = field(default_factory=list)


def circle_contour(center: complex, radius: float, n0: int = 64) -> Contour:
    def param(s):
        return center + radius * np.exp(2j * np.pi * np.asarray(s))
    return Contour(param, n0, f"circle({center}, {radius})", [center])


def polygon_contour(vertices, n0: int = 256) -> Contour:
    """Counterclockwise closed polygon through the given vertices, arc-length parametrized."""
    v = np.asarray(list(vertices) + [vertices[0]], dtype=complex)
    seg = np.abs(np.diff(v))
    cum = np.concatenate([[0.0], np.cumsum(seg)]) / np.sum(seg)

    def param(s):
        s = np.mod(np.asarray(s, dtype=float), 1.0)
        k = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(seg) - 1)
        t = (s - cum[k]) / (cum[k + 1] - cum[k])
        return v[k] + t * (v[k + 1] - v[k])
    return Contour(param, n0, "polygon", list(vertices))


def rectangle_contour(re_min: float, re_max: float, im_max: float, n0: int = 256) -> Contour:
    c = polygon_contour([complex(re_min, -im_max), complex(re_max, -im_max),
                         complex(re_max, im_max), complex(re_min, im_max)], n0)
    c.label = f"rectangle[{re_min:g},{re_max:g}]x[-{im_max:g}i,{im_max:g}i]"
    return c


@dataclass(frozen=True)
class WindingResult:
    winding: int
    raw: float
    s: np.ndarray
    lam: np.ndarray
    D: np.ndarray
    min_abs: float
    max_step: float


def winding_number(fields: Union[CoefficientFields, Callable], contour: Contour,
                   zero_floor: float = ZERO_FLOOR, max_samples: int = MAX_SAMPLES) -> WindingResult:
    """Number of zeros enclosed by the contour, by the argument principle.

    Intervals whose argument increment reaches pi/2 are bisected until every
    step is below pi/2; ``fields`` may also be any vectorized callable.
    """
    func = fields if callable(fields) else (lambda z: evans(fields, z))
    s = np.linspace(0.0, 1.0, contour.n0, endpoint=False)
    lam = contour.param(s)
    D = np.asarray(func(lam), dtype=complex)
    while True:
        absD = np.abs(D)
        if not np.all(absD > zero_floor * float(np.median(absD))):
            k = int(np.argmin(absD))
            raise ContourError(f"|D| = {absD[k]:.3e} at lambda = {lam[k]:.6g}; the contour passes through a zero")
        nxt = np.roll(D, -1)
        steps = np.angle(nxt / D)
        bad = np.flatnonzero(np.abs(steps) >= STEP_LIMIT)
        if bad.size == 0:
            break
        if len(s) + bad.size > max_samples:
            raise ResolutionError(f"argument steps still >= pi/2 after {len(s)} samples")
        s_next = np.append(s[1:], 1.0)
        mid = 0.5 * (s[bad] + s_next[bad])
        new_lam = contour.param(mid)
        new_D = np.asarray(func(new_lam), dtype=complex)
        s = np.concatenate([s, mid])
        lam = np.concatenate([lam, new_lam])
        D = np.concatenate([D, new_D])
        order = np.argsort(s)
        s, lam, D = s[order], lam[order], D[order]
    min_abs = float(np.min(absD))
    raw = float(np.sum(steps)) / (2.0 * np.pi)
    w = int(round(raw))
    if abs(raw - w) > 1e-6:
        raise ResolutionError(f"winding {raw} is not an integer")
    return WindingResult(w, raw, s, lam, D, min_abs, float(np.max(np.abs(steps))))


def default_rectangle(fields: CoefficientFields) -> tuple[float, float, float]:
    """(left, R, M) of the default stability rectangle."""
    d = fields.data
    scale = max(abs(d.a_minus), abs(d.a_plus), d.b_minus ** 2, d.b_plus ** 2,
                1.0 / d.tau if d.tau > 0 else 0.0)
    R = 1.0 + 10.0 * scale
    chi0 = spectral_gap(d).chi0
    return -0.5 * chi0, R, R


@dataclass(frozen=True)
class PointGap:
    chi0: float
    point_gap: float
    extra_zeros: int
    left_edge: float

    @property
    def chi(self) -> float:
        return min(self.chi0, self.point_gap)


def point_gap(fields: CoefficientFields, radius: float = 0.05, depth: float = 0.9,
              bisections: int = 6) -> PointGap:
    """Empirical distance from the axis of point spectrum other than 0.

    Zeros of D in [-depth*chi0, R] x [-iR, iR] outside the disk |lam| < radius
    are counted.  With none, the point gap is reported as chi0 (nothing closer
    was found); otherwise the left edge is bisected toward 0 to locate the
    rightmost extra zero.
    """
    chi0 = spectral_gap(fields.data).chi0
    _, R, M = default_rectangle(fields)
    disk = winding_number(fields, circle_contour(0.0, radius)).winding

    def extra(edge):
        return winding_number(fields, rectangle_contour(edge, R, M)).winding - disk

    left = -depth * chi0
    if left > -radius:
        raise DomainError("disk around 0 does not fit inside the stability rectangle")
    n_extra = extra(left)
    if n_extra == 0:
        return PointGap(chi0, chi0, 0, left)
    lo, hi = left, -radius       # extra(lo) > 0; find largest edge that still has zeros
    if extra(hi) > 0:
        return PointGap(chi0, radius, n_extra, left)
    for _ in range(bisections):
        mid = 0.5 * (lo + hi)
        if extra(mid) > 0:
            lo = mid
        else:
            hi = mid
    return PointGap(chi0, -hi, n_extra, left)   # conservative end of the bracket


def melnikov_gamma(fields: CoefficientFields, front: FrontProfile) -> float:
    """(1 - c^2 tau)^-2 int b U_x^2 / h^2 dx with h = exp(theta), theta' = -c b / (2 s2)."""
    x, b = fields.x, fields.b
    s2 = fields.s2
    n = (len(x) - 1) // 2
    theta = cumulative_simpson(-fields.c * b / (2.0 * s2), x=x, initial=0.0)
    theta -= theta[n]
    integrand = b * front.U_x ** 2 * np.exp(-2.0 * theta)
    gamma = simpson(integrand, x=x) / (s2 * s2)
    if not gamma > 0.0:
        raise NumericalError(f"Melnikov integral is not positive ({gamma})")
    return float(gamma)


def evans_derivative_at_zero(fields: CoefficientFields, h: float = 1e-4) -> float:
    """Central finite difference of D along the real axis at 0."""
    D = evans(fields, np.array([h, -h], dtype=complex))
    return float(((D[0] - D[1]) / (2.0 * h)).real)


def melnikov_prediction(fields: CoefficientFields, front: FrontProfile, gamma: float) -> float:
    """D'(0) predicted from Gamma: -k_minus k_plus Gamma, k = W(0; 0)[0] / U_x(0).

    At lam = 0 both decaying solutions are multiples k of (U_x, U_xx); with the
    determinant convention used here D'(0) equals -k_minus k_plus Gamma.
    """
    y1m, _, _, _ = _rk4(fields, [0.0], "minus")
    y1p, _, _, _ = _rk4(fields, [0.0], "plus")
    n = (len(fields.x) - 1) // 2
    ux0 = front.U_x[n]
    return float((-(y1m[0] / ux0) * (y1p[0] / ux0) * gamma).real)


def third_derivative(model, front: FrontProfile) -> np.ndarray:
    """U_xxx from differentiating the profile equation."""
    U, Ux, Uxx = front.U, front.U_x, front.U_xx
    c = front.c_star
    g = np.asarray(model.g(U), dtype=float) * np.ones_like(U)
    dg = np.asarray(model.dg(U), dtype=float) * np.ones_like(U)
    s2 = 1.0 - c * c * front.tau
    return -(c * dg * Ux * Ux + c * g * Uxx + model.df(U) * Ux) / s2


def translation_eigenvalue_residual(fields: CoefficientFields, front: FrontProfile) -> float:
    """max |Phi_x - A(x, 0) Phi| for Phi = (U_x, U_xx), Phi_x by finite differences."""
    Ux, Uxx = front.U_x, front.U_xx
    d1 = fd_derivatives(Ux, front.dx)[0]
    d2 = fd_derivatives(Uxx, front.dx)[0]
    s2 = fields.s2
    r1 = d1 - Uxx
    r2 = d2 - (-fields.a * Ux - fields.c * fields.b * Uxx) / s2
    return float(np.max(np.hypot(r1, r2)))


def companion_equivalence_check(fields: CoefficientFields, lam: complex, v,
                                v_x=None, v_xx=None) -> tuple[float, float]:
    """Residuals of the companion form and of the first-order system for a trial v.

    The companion pair is (v1, v2) = (v, lam v - c v_x).  The first component
    of each residual vanishes identically; the second components differ by the
    factor (1 - c^2 tau) / tau.  Returns (companion, system) max-norms.
    """
    tau, c, s2 = fields.tau, fields.c, fields.s2
    if tau <= 0.0:
        raise DomainError("the companion operator needs tau > 0")
    v = np.asarray(v, dtype=complex)
    h = fields.dx
    if v_x is None:
        v_x = fd_derivatives(v, h)[0]
    if v_xx is None:
        v_xx = fd_derivatives(v_x, h)[0]
    a, b = fields.a, fields.b
    lam = complex(lam)
    v1 = v
    v2 = lam * v - c * v_x
    v2_x = lam * v_x - c * v_xx
    # lam (v1, v2) - L (v1, v2)
    comp1 = lam * v1 - (c * v_x + v2)
    comp2 = lam * v2 - ((v_xx + a * v1) / tau + c * v2_x - b * v2 / tau)
    sys2 = v_xx - ((tau * lam * lam + lam * b - a) * v - c * (b + 2 * tau * lam) * v_x) / s2
    comp = float(np.max(np.hypot(np.abs(comp1), np.abs(comp2))))
    return comp, float(np.max(np.abs(sys2)))


def asymptotic_convergence(fields: CoefficientFields, lam: complex, tail: float = 0.5):
    """Fitted rates nu with |A(x, lam) - A_+-(lam)| ~ C exp(-nu |x|) on the outer tails.

    The fit uses the part of each half-line beyond ``tail`` * L where the
    deviation is above rounding level.
    """
    lam = complex(lam)
    rates = {}
    for side, sel in (("minus", fields.x < -tail * fields.L), ("plus", fields.x > tail * fields.L)):
        Alim = asymptotic_matrix(fields.data, side, lam)
        p = (fields.tau * lam * lam + lam * fields.b[sel] - fields.a[sel]) / fields.s2
        q = -fields.c * (fields.b[sel] + 2 * fields.tau * lam) / fields.s2
        dev = np.hypot(np.abs(p - Alim[1, 0]), np.abs(q - Alim[1, 1]))
        ok = dev > 1e-13
        x = np.abs(fields.x[sel][ok])
        rates[side] = float(-np.polyfit(x, np.log(dev[ok]), 1)[0]) if ok.sum() > 2 else math.inf
    return rates


@dataclass(frozen=True)
class EvansReport:
    contour: str
    lam: np.ndarray
    D: np.ndarray
    winding: int
    min_abs_on_contour: float
    melnikov_gamma: float

    def to_dict(self) -> dict:
        return {"contour": self.contour, "winding": self.winding,
                "min_abs_on_contour": self.min_abs_on_contour,
                "melnikov_gamma": self.melnikov_gamma,
                "samples": [{"re_lambda": float(l.real), "im_lambda": float(l.imag),
                             "re_D": float(d.real), "im_D": float(d.imag)}
                            for l, d in zip(self.lam, self.D)]}


def evans_report(fields: CoefficientFields, front: FrontProfile, contour: Contour,
                 gamma: Optional[float] = None, zero_floor: float = ZERO_FLOOR) -> EvansReport:
    res = winding_number(fields, contour, zero_floor)
    if gamma is None:
        gamma = melnikov_gamma(fields, front)
    return EvansReport(contour.label, res.lam, res.D, res.winding, res.min_abs, gamma)

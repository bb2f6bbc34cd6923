"""Monotone front construction by shooting on the normalized profile ODE.

With gamma = c / sqrt(1 - c^2 tau) and eta = xi / sqrt(1 - c^2 tau) the front
V(eta) solves V'' + gamma g(V) V' + f(V) = 0.  In the phase plane the
trajectory is a graph W = omega(V) satisfying

    d omega / dV = -f(V) / omega - gamma g(V).

The unstable manifold of (0, 0) and the stable manifold of (1, 0) are traced
up to V = alpha; gamma* is the root of the mismatch h = W1 - W0.

Both traces are integrated in logarithmic variables, t = log V with
w = omega / V near zero and t = -log(1 - V) with z = omega / (1 - V) near one.
This removes the 0/0 quotient at the saddles (w and z tend to the eigenvalue
magnitudes) and keeps the integration non-stiff.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.integrate import ode
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .errors import AdmissibilityError, BracketError, DomainError, NumericalError
from .model import ModelSpec, require_valid

UNSTABLE = "unstable-from-zero"
STABLE = "stable-from-one"

EPSILON = 1e-8
RTOL = 1e-10
ATOL = 1e-13
GAMMA_XTOL = 1e-10
MIDDLE_FLOOR = 1e-4    # w or z below this: the trace is falling into the node (alpha, 0)
GAMMA_MAX = 1e3
DEFAULT_DX = 0.005
TAIL_DECADES = 12.0


def _scalar_terms(model: ModelSpec):
    """Plain-float versions of f and g for the inner integration loop."""
    r, tau = model.reaction, model.tau
    if r.kind == "cubic":
        k, a = r.kappa, r.alpha

        def f(u):
            return k * u * (1.0 - u) * (u - a)

        def df(u):
            return k * (-3.0 * u * u + 2.0 * (1.0 + a) * u - a)
    else:
        def f(u):
            return float(r.f(u))

        df = None
    kind = model.damping.kind
    if kind == "constant-one":
        def g(u):
            return 1.0
    elif kind == "cattaneo-maxwell" and df is not None:
        def g(u):
            return 1.0 - tau * df(u)
    else:
        def g(u):
            return float(model.g(u))
    return f, g


def saddle_rates(model: ModelSpec, gamma: float) -> tuple[float, float]:
    """Eigenvalue mu0+ at (0, 0) and |mu1-| at (1, 0) of the normalized ODE."""
    g0, g1 = float(model.g(0.0)), float(model.g(1.0))
    a0, a1 = float(model.df(0.0)), float(model.df(1.0))
    mu0 = 0.5 * (math.sqrt((gamma * g0) ** 2 - 4.0 * a0) - gamma * g0)
    mu1 = 0.5 * (math.sqrt((gamma * g1) ** 2 - 4.0 * a1) + gamma * g1)
    return mu0, mu1


@dataclass(frozen=True)
class ManifoldTrace:
    gamma: float
    side: str
    terminal_W: float
    V: np.ndarray
    omega: np.ndarray
    eta: np.ndarray          # eta - eta(alpha); only meaningful when the trace reaches alpha
    slope: np.ndarray        # d omega / dV along the path
    epsilon: float
    connects_to_middle: bool = False


def _run(rhs, t0, t1, y0, max_step=None, record=False):
    """Integrate a trace; returns (reached_alpha, final w or z, recorded samples).

    Recorded traces use DOP853 with a per-step callback.  Unrecorded traces
    (the shooting mismatch) use LSODA, because traces that fall into the node
    (alpha, 0) become stiff and would stall an explicit method.
    """
    if not record:
        r = ode(lambda t, y: rhs(t, y)[:1]).set_integrator(
            "lsoda", rtol=RTOL, atol=ATOL, nsteps=100000)
        r.set_initial_value(y0[:1], t0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            r.integrate(t1)
        w = float(r.y[0])
        if r.successful() and w >= MIDDLE_FLOOR:
            return True, w, None
        if w < 10 * MIDDLE_FLOOR:
            return False, 0.0, None
        raise NumericalError(f"manifold integration failed at t={r.t:.6g} before reaching alpha")

    samples = []

    def solout(t, y):
        samples.append((t, y[0], y[1]))
        return -1 if y[0] < MIDDLE_FLOOR else 0

    opts = dict(rtol=RTOL, atol=ATOL, nsteps=200000)
    if max_step is not None:
        opts["max_step"] = max_step
    r = ode(rhs).set_integrator("dop853", **opts)
    r.set_solout(solout)
    r.set_initial_value(y0, t0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        r.integrate(t1)
    w = float(r.y[0])
    reached = r.t == t1 and w >= MIDDLE_FLOOR
    if not reached and w >= 10 * MIDDLE_FLOOR:
        raise NumericalError(f"manifold integration stopped at t={r.t:.6g} before reaching alpha")
    return reached, w, np.array(samples)


def trace_manifold(model: ModelSpec, gamma: float, side: str, epsilon: float = EPSILON,
                   record: bool = True, max_step: Optional[float] = None,
                   _checked: bool = False) -> ManifoldTrace:
    """Trace one saddle manifold from an epsilon offset up to V = alpha."""
    if not 1e-10 < epsilon < 1e-3:
        raise DomainError(f"epsilon must lie in (1e-10, 1e-3), got {epsilon}")
    if side not in (UNSTABLE, STABLE):
        raise DomainError(f"unknown side {side!r}")
    if not _checked:
        require_valid(model)
    f, g = _scalar_terms(model)
    alpha = model.alpha
    mu0, mu1 = saddle_rates(model, gamma)

    if side == UNSTABLE:
        def rhs(t, y):
            v = math.exp(t)
            w = y[0]
            return [-f(v) / (v * w) - gamma * g(v) - w, 1.0 / w]

        reached, wend, s = _run(rhs, math.log(epsilon), math.log(alpha), [mu0, 0.0],
                                max_step, record)
        terminal = alpha * wend if reached else 0.0
        if record:
            V = np.exp(s[:, 0])
            omega = V * s[:, 1]
    else:
        def rhs(t, y):
            q = math.exp(-t)
            z = y[0]
            return [z - f(1.0 - q) / (q * z) - gamma * g(1.0 - q), 1.0 / z]

        reached, zend, s = _run(rhs, -math.log(epsilon), -math.log(1.0 - alpha), [mu1, 0.0],
                                max_step, record)
        terminal = (1.0 - alpha) * zend if reached else 0.0
        if record:
            V = 1.0 - np.exp(-s[:, 0])
            omega = (1.0 - V) * s[:, 1]
    if record:
        eta = s[:, 2] - s[-1, 2]
        fv = np.asarray(model.f(V), dtype=float)
        gv = np.asarray(model.g(V), dtype=float) * np.ones_like(V)
        slope = -fv / omega - gamma * gv
    else:
        V = omega = eta = slope = np.empty(0)
    return ManifoldTrace(float(gamma), side, float(terminal), V, omega, eta, slope,
                         epsilon, not reached)


def shooting_mismatch(model: ModelSpec, gamma: float, epsilon: float = EPSILON) -> float:
    """h(gamma) = W1(gamma) - W0(gamma); nondecreasing in gamma."""
    w1 = trace_manifold(model, gamma, STABLE, epsilon, record=False, _checked=True).terminal_W
    w0 = trace_manifold(model, gamma, UNSTABLE, epsilon, record=False, _checked=True).terminal_W
    return w1 - w0


def find_gamma_star(model: ModelSpec, epsilon: float = EPSILON,
                    gamma_max: float = GAMMA_MAX) -> float:
    """Unique gamma with W0(gamma) = W1(gamma).

    The bracket starts at [-2, 2] * max(1, sqrt(2 / kappa)) and doubles until
    h changes sign; the root is then refined with Brent's method.
    """
    require_valid(model)
    kappa = model.reaction.kappa
    scale = max(1.0, math.sqrt(2.0 / kappa)) if math.isfinite(kappa) else 1.0
    lo, hi = -2.0 * scale, 2.0 * scale
    h_lo = shooting_mismatch(model, lo, epsilon)
    h_hi = shooting_mismatch(model, hi, epsilon)
    while h_lo > 0.0 or h_hi < 0.0:
        if max(-lo, hi) > gamma_max:
            raise BracketError(f"no sign change of the shooting mismatch for |gamma| <= {gamma_max}")
        if h_lo > 0.0:
            lo, hi, h_hi = 2.0 * lo, lo, h_lo
            h_lo = shooting_mismatch(model, lo, epsilon)
        else:
            lo, hi, h_lo = hi, 2.0 * hi, h_hi
            h_hi = shooting_mismatch(model, hi, epsilon)
    if h_lo == 0.0:
        return lo
    if h_hi == 0.0:
        return hi
    return brentq(lambda gm: shooting_mismatch(model, gm, epsilon), lo, hi,
                  xtol=GAMMA_XTOL, rtol=4 * np.finfo(float).eps, maxiter=200)


def speed_from_gamma(gamma: float, tau: float) -> float:
    if tau < 0:
        raise DomainError("tau must be nonnegative")
    return gamma / math.sqrt(1.0 + tau * gamma * gamma)


def gamma_from_speed(c: float, tau: float) -> float:
    return c / math.sqrt(1.0 - c * c * tau)


def decay_rate_formula(a: float, b: float, c: float, tau: float) -> tuple[float, float]:
    """(mu2, mu1) at a rest point with f' = a < 0 and g = b; mu2 > 0 > mu1."""
    s2 = 1.0 - c * c * tau
    half = -0.5 * c * b / s2
    root = 0.5 * math.sqrt(c * c * b * b / (s2 * s2) + 4.0 * abs(a) / s2)
    return half + root, half - root


@dataclass(frozen=True)
class FrontProfile:
    gamma_star: float
    c_star: float
    tau: float
    xi: np.ndarray
    U: np.ndarray
    U_x: np.ndarray
    U_xx: np.ndarray
    eta_minus: float
    eta_plus: float
    L: float
    alpha: float
    traces: tuple = field(default=(), repr=False, compare=False)

    @property
    def dx(self) -> float:
        return float(self.xi[1] - self.xi[0])

    @property
    def stretch(self) -> float:
        """sqrt(1 - c^2 tau), the factor relating d/d eta and d/d xi."""
        return math.sqrt(1.0 - self.c_star ** 2 * self.tau)

    def shifted(self, xi0: float) -> "FrontProfile":
        """Same front re-pinned so that U(xi0) = alpha."""
        return replace(self, xi=self.xi + xi0)

    def as_candidate(self) -> "Candidate":
        s = self.stretch
        return Candidate(self.xi / s, self.U, s * self.U_x, s * s * self.U_xx)


class _SideMap:
    """Monotone map eta -> log-coordinate along one traced manifold."""

    def __init__(self, trace: ManifoldTrace, model: ModelSpec):
        self.side = trace.side
        eta = trace.eta
        if trace.side == UNSTABLE:
            t = np.log(trace.V)
            rate = trace.omega / trace.V
        else:
            t = -np.log(1.0 - trace.V)
            rate = trace.omega / (1.0 - trace.V)
        if trace.side == STABLE:
            eta, t, rate = eta[::-1], t[::-1], rate[::-1]
        # dt/deta = rate along the trace
        self.eta = eta
        self.spline = CubicHermiteSpline(eta, t, rate)
        self.t_end = t[0] if trace.side == UNSTABLE else t[-1]
        self.rate_end = rate[0] if trace.side == UNSTABLE else rate[-1]
        self.eta_end = eta[0] if trace.side == UNSTABLE else eta[-1]

    def values(self, eta):
        eta = np.asarray(eta, dtype=float)
        if self.side == UNSTABLE:
            inside = eta >= self.eta_end
        else:
            inside = eta <= self.eta_end
        t = np.empty_like(eta)
        t[inside] = self.spline(eta[inside])
        # linear saddle regime beyond the traced range
        out = ~inside
        if self.side == UNSTABLE:
            t[out] = self.t_end + self.rate_end * (eta[out] - self.eta_end)
            return np.exp(t)
        t[out] = self.t_end + self.rate_end * (eta[out] - self.eta_end)
        return -np.expm1(-t)


def reconstruct_profile(model: ModelSpec, gamma_star: float, L: Optional[float] = None,
                        dx: float = DEFAULT_DX, epsilon: float = EPSILON) -> FrontProfile:
    """Sample the front on a uniform xi grid of half-length L with U(0) = alpha."""
    require_valid(model)
    tau = model.tau
    c = speed_from_gamma(gamma_star, tau)
    s = math.sqrt(1.0 - c * c * tau)
    a_m, a_p = float(model.df(0.0)), float(model.df(1.0))
    b_m, b_p = float(model.g(0.0)), float(model.g(1.0))
    eta_m = decay_rate_formula(a_m, b_m, c, tau)[0]
    eta_p = -decay_rate_formula(a_p, b_p, c, tau)[1]
    if L is None:
        L = TAIL_DECADES / min(eta_m, eta_p)
    L_max = 600.0 / max(eta_m, eta_p)
    if L > L_max:
        warnings.warn(f"requested L={L:g} underflows the front tail; truncated to {L_max:g}")
        L = L_max
    if not dx > 0:
        raise DomainError("dx must be positive")
    n = int(math.ceil(L / dx))
    n += n % 2          # even interval count per side for the 2 dx Evans steps
    L = n * dx
    xi = dx * np.arange(-n, n + 1)

    step = 0.02
    lower = trace_manifold(model, gamma_star, UNSTABLE, epsilon, max_step=step, _checked=True)
    upper = trace_manifold(model, gamma_star, STABLE, epsilon, max_step=step, _checked=True)
    if lower.connects_to_middle or upper.connects_to_middle:
        raise NumericalError("manifold at gamma* falls into the middle root; gamma* is not a front speed")
    maps = (_SideMap(lower, model), _SideMap(upper, model))

    U = np.empty_like(xi)
    left = xi < 0
    U[left] = maps[0].values(xi[left] / s)
    U[~left] = maps[1].values(xi[~left] / s)
    U[n] = model.alpha

    omega = _omega_on_grid(model, gamma_star, U, left, lower, upper)
    U_x = omega / s
    g = np.asarray(model.g(U), dtype=float) * np.ones_like(U)
    U_xx = -(c * g * U_x + model.f(U)) / (s * s)
    return FrontProfile(gamma_star, c, tau, xi, U, U_x, U_xx, eta_m, eta_p, L,
                        model.alpha, (lower, upper))


def _omega_on_grid(model, gamma, U, left, lower, upper):
    """omega(U) from the traces, interpolated in the log coordinate."""
    out = np.empty_like(U)
    for mask, tr in ((left, lower), (~left, upper)):
        u = U[mask]
        if tr.side == UNSTABLE:
            t_tr = np.log(tr.V)
            r_tr = tr.omega / tr.V
            t = np.log(u)
            spline = CubicHermiteSpline(t_tr, r_tr, tr.slope - r_tr)
            r = np.where(t < t_tr[0], r_tr[0], spline(np.clip(t, t_tr[0], t_tr[-1])))
            out[mask] = u * r
        else:
            t_tr = -np.log(1.0 - tr.V)
            r_tr = tr.omega / (1.0 - tr.V)
            order = np.argsort(t_tr)
            t_tr, r_tr2 = t_tr[order], r_tr[order]
            V = tr.V[order]
            # dz/dt = z + d omega/dV
            dz = r_tr2 + tr.slope[order]
            spline = CubicHermiteSpline(t_tr, r_tr2, dz)
            q = 1.0 - u
            t = -np.log(np.maximum(q, 1e-300))
            r = np.where(t > t_tr[-1], r_tr2[-1], spline(np.clip(t, t_tr[0], t_tr[-1])))
            out[mask] = q * r
    return out


def decay_rates(model: ModelSpec, front: FrontProfile) -> tuple[float, float]:
    """(eta_minus, eta_plus): growth rate of U at -inf and decay rate of 1 - U at +inf."""
    c, tau = front.c_star, front.tau
    mu2 = decay_rate_formula(float(model.df(0.0)), float(model.g(0.0)), c, tau)[0]
    mu1 = decay_rate_formula(float(model.df(1.0)), float(model.g(1.0)), c, tau)[1]
    return mu2, -mu1


def fd_derivatives(y: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Fourth-order finite-difference first and second derivatives on a uniform grid."""
    y = np.asarray(y)
    d1 = np.empty_like(y)
    d2 = np.empty_like(y)
    d1[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)
    d2[2:-2] = (-y[:-4] + 16 * y[1:-3] - 30 * y[2:-2] + 16 * y[3:-1] - y[4:]) / (12 * h * h)
    # one-sided stencils on six nodes for the two points next to each end
    n = len(y)
    for k, start in ((0, 0), (1, 0), (n - 2, n - 6), (n - 1, n - 6)):
        vals = y[start:start + 6]
        d1[k] = _onesided(vals, h, 1, k - start)
        d2[k] = _onesided(vals, h, 2, k - start)
    return d1, d2


def _onesided(vals, h, order, pos):
    nodes = np.arange(len(vals), dtype=float) - pos
    A = np.vander(nodes, increasing=True).T
    rhs = np.zeros(len(vals))
    rhs[order] = math.factorial(order)
    w = np.linalg.solve(A, rhs)
    return w @ vals / h ** order


def profile_residual(model: ModelSpec, front: FrontProfile, use_samples: bool = True) -> np.ndarray:
    """Pointwise residual (1 - c^2 tau) U_xx + c g(U) U_x + f(U).

    With ``use_samples`` U_xx is the finite-difference derivative of the sampled
    U_x, so the residual measures how well the sampled slope solves the ODE.
    Otherwise the stored U_xx is used and the residual is rounding only.
    """
    ux = front.U_x
    if use_samples:
        uxx = fd_derivatives(ux, front.dx)[0]
    else:
        uxx = front.U_xx
    c, tau = front.c_star, front.tau
    g = np.asarray(model.g(front.U), dtype=float) * np.ones_like(front.U)
    return (1.0 - c * c * tau) * uxx + c * g * ux + model.f(front.U)


def slope_consistency(front: FrontProfile) -> float:
    """Max difference between the finite-difference slope of U and the stored U_x."""
    return float(np.max(np.abs(fd_derivatives(front.U, front.dx)[0] - front.U_x)))


def compute_front(model: ModelSpec, L: Optional[float] = None, dx: float = DEFAULT_DX,
                  epsilon: float = EPSILON) -> FrontProfile:
    """find_gamma_star followed by reconstruct_profile."""
    gamma = find_gamma_star(model, epsilon)
    return reconstruct_profile(model, gamma, L, dx, epsilon)


@dataclass(frozen=True)
class Candidate:
    """Sampled trial function W(eta) for the min-max speed bracket."""

    x: np.ndarray
    W: np.ndarray
    W_x: Optional[np.ndarray] = None
    W_xx: Optional[np.ndarray] = None


def minmax_ratio(model: ModelSpec, candidate: Candidate) -> np.ndarray:
    """-(W'' + f(W)) / (g(W) W') along the candidate."""
    x = np.asarray(candidate.x, dtype=float)
    W = np.asarray(candidate.W, dtype=float)
    if candidate.W_x is None or candidate.W_xx is None:
        h = np.diff(x)
        if not np.allclose(h, h[0], rtol=1e-9, atol=0):
            raise DomainError("finite-difference derivatives need a uniform grid")
        W_x, W_xx = fd_derivatives(W, h[0])
    else:
        W_x = np.asarray(candidate.W_x, dtype=float)
        W_xx = np.asarray(candidate.W_xx, dtype=float)
    if np.any(W_x <= 0.0):
        k = int(np.argmin(W_x))
        raise AdmissibilityError(f"candidate is not strictly increasing near x={x[k]:.6g}")
    if np.any((W <= 0.0) | (W >= 1.0)):
        raise AdmissibilityError("candidate values must lie in (0, 1)")
    g = np.asarray(model.g(W), dtype=float) * np.ones_like(W)
    return -(W_xx + model.f(W)) / (g * W_x)


def minmax_bracket(model: ModelSpec, candidate: Candidate) -> tuple[float, float]:
    """(inf, sup) of the min-max ratio; gamma* lies between them."""
    ratio = minmax_ratio(model, candidate)
    return float(np.min(ratio)), float(np.max(ratio))


def logistic_candidate(alpha: float, rate: float, x: np.ndarray) -> Candidate:
    """W(x) = 1 / (1 + ((1 - alpha) / alpha) exp(-rate x)) with exact derivatives."""
    W = 1.0 / (1.0 + (1.0 - alpha) / alpha * np.exp(-rate * x))
    W_x = rate * W * (1.0 - W)
    W_xx = rate * W_x * (1.0 - 2.0 * W)
    return Candidate(x, W, W_x, W_xx)


def tail_log_slope(front: FrontProfile, side: str, decade: float = 1.0) -> float:
    """Fitted exponential rate of U (minus side) or 1 - U (plus side) over the outer tail.

    The fit uses the last ``decade`` of the grid's decay, i.e. the outermost
    points where the deviation falls by a further factor of ten.
    """
    if side == "minus":
        y, x = front.U, front.xi
        mask = y <= y[0] * 10.0 ** decade
    else:
        y, x = 1.0 - front.U, front.xi
        mask = y <= y[-1] * 10.0 ** decade
    mask &= (y > 0)
    slope = np.polyfit(x[mask], np.log(y[mask]), 1)[0]
    return float(abs(slope))

"""Resolvent checks for the damped operator about a stationary front (c = 0).

For (phi, psi) the system

    lam u - v = phi,    tau lam v - u_xx + tau u + b(x) v = psi

reduces, after v = lam u - phi, to the scalar problem

    (tau lam^2 + b lam + tau) u - u_xx = psi + (tau lam + b) phi,

solved with second-order central differences and homogeneous Dirichlet
conditions at +-L.  Derivatives of grid functions are forward differences over
the N + 1 cells (including the boundary zeros), so that the discrete
summation-by-parts identity behind the dissipativity check is exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import LinAlgError, solve_banded

from .errors import DomainError, NumericalError

THETA0 = 0.5
KERNEL_SIGMA = 1.5
NODE_SPACING = 0.5
COND_MAX = 1e8
SPEED_TOL = 1e-8


@dataclass(frozen=True)
class ResolventGrid:
    """Interior nodes of a uniform grid on [-L, L] with Dirichlet ends."""

    L: float
    n: int          # number of cells; n - 1 interior nodes
    b: np.ndarray   # damping on the interior nodes
    tau: float

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def x(self) -> np.ndarray:
        return -self.L + self.h * np.arange(1, self.n)

    @property
    def b0(self) -> float:
        return float(np.min(self.b))

    @property
    def b1(self) -> float:
        return float(np.max(self.b))


def stationary_grid(model, front, n: int, L: Optional[float] = None) -> ResolventGrid:
    """Damping of a stationary front sampled on an n-cell grid."""
    if abs(front.c_star) > SPEED_TOL:
        raise DomainError(f"resolvent checks need a stationary front, got c = {front.c_star:.3g}")
    if model.tau <= 0.0:
        raise DomainError("the resolvent system needs tau > 0")
    L = front.L if L is None else L
    if L > front.L:
        raise DomainError("grid half-length exceeds the profile domain")
    x = -L + 2.0 * L / n * np.arange(1, n)
    U = CubicSpline(front.xi, front.U)(x)
    b = np.asarray(model.g(U), dtype=float) * np.ones_like(U)
    if np.min(b) <= 0:
        raise DomainError("damping must be positive")
    return ResolventGrid(L, n, b, model.tau)


def ddx(w: np.ndarray, h: float) -> np.ndarray:
    """Forward differences of an interior grid function padded with the Dirichlet zeros."""
    p = np.concatenate([[0.0], w, [0.0]])
    return np.diff(p) / h


def l2(w: np.ndarray, h: float) -> float:
    return float(math.sqrt(h * np.sum(np.abs(w) ** 2)))


def x_norm(u, v, h: float, tau: float) -> float:
    """(|u|^2 + |u_x|^2 / tau + |v|^2)^(1/2)."""
    return math.sqrt(l2(u, h) ** 2 + l2(ddx(u, h), h) ** 2 / tau + l2(v, h) ** 2)


def _bands(grid: ResolventGrid, lam: complex):
    h2 = grid.h ** 2
    m = grid.n - 1
    diag = grid.tau * lam * lam + grid.b * lam + grid.tau + 2.0 / h2
    ab = np.zeros((3, m), dtype=complex)
    ab[0, 1:] = -1.0 / h2
    ab[1] = diag
    ab[2, :-1] = -1.0 / h2
    return ab


def apply_operator(grid: ResolventGrid, lam: complex, u: np.ndarray) -> np.ndarray:
    """(tau lam^2 + b lam + tau) u - D+D- u on the interior nodes."""
    p = np.concatenate([[0.0], u, [0.0]])
    uxx = (p[2:] - 2 * p[1:-1] + p[:-2]) / grid.h ** 2
    return (grid.tau * lam * lam + grid.b * lam + grid.tau) * u - uxx


def solve_resolvent(grid: ResolventGrid, lam: complex, phi, psi):
    """(u, v) solving the discretized resolvent system."""
    lam = complex(lam)
    phi = np.asarray(phi, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    rhs = psi + (grid.tau * lam + grid.b) * phi
    if not np.any(rhs):
        z = np.zeros_like(rhs)
        return z, z.copy()
    ab = _bands(grid, lam)
    try:
        u = solve_banded((1, 1), ab, rhs, check_finite=True)
    except LinAlgError as exc:
        raise NumericalError(f"resolvent system singular at lambda={lam}: in or near the spectrum") from exc
    v = lam * u - phi
    r1 = np.max(np.abs(lam * u - v - phi))
    r2 = np.max(np.abs(apply_operator(grid, lam, u) - rhs))
    scale = max(np.max(np.abs(rhs)), np.max(np.abs(phi)), 1e-300)
    if max(r1, r2) > 1e-10 * scale * max(1.0, abs(lam) ** 2 * grid.tau):
        raise NumericalError(f"resolvent residual {max(r1, r2):.3e} too large at lambda={lam}")
    return u, v


def dissipativity_defect(grid: ResolventGrid, u: np.ndarray, v: np.ndarray) -> tuple[float, float]:
    """(Re <w, L0 w>_X, -tau^-1 <v, b v>) for w = (u, v) on the grid."""
    h, tau = grid.h, grid.tau
    p = np.concatenate([[0.0], u, [0.0]])
    uxx = (p[2:] - 2 * p[1:-1] + p[:-2]) / h ** 2
    Lu = v
    Lv = uxx / tau - u - grid.b * v / tau
    form = (h * np.vdot(u, Lu) + h * np.vdot(ddx(u, h), ddx(Lu, h)) / tau + h * np.vdot(v, Lv)).real
    target = -h * np.real(np.vdot(v, grid.b * v)) / tau
    return float(form), float(target)


def smooth_noise(rng: np.random.Generator, x: np.ndarray, L: float, complex_valued: bool = False,
                 sigma: float = KERNEL_SIGMA, spacing: float = NODE_SPACING) -> np.ndarray:
    """Gaussian coefficients on fixed physical nodes in [-L/2, L/2] times Gaussian bumps.

    The node set does not depend on the grid, so the same generator state
    gives the same continuum function on every refinement.
    """
    nodes = np.arange(-0.5 * L, 0.5 * L + 1e-12, spacing)
    coef = rng.standard_normal(nodes.size)
    if complex_valued:
        coef = coef + 1j * rng.standard_normal(nodes.size)
    kern = np.exp(-0.5 * ((x[:, None] - nodes[None, :]) / sigma) ** 2)
    return kern @ coef


@dataclass(frozen=True)
class ResolventRecord:
    lam: complex
    ratio_vuprime: float
    ratio_uell2: float
    norms: dict

    def to_dict(self) -> dict:
        return {"re_lambda": self.lam.real, "im_lambda": self.lam.imag,
                "ratio_vuprime": self.ratio_vuprime, "ratio_uell2": self.ratio_uell2}


@dataclass(frozen=True)
class ResolventReport:
    records: tuple
    M: float
    theta0: float
    seed: int
    trials: int
    decay_slope: float           # log-log slope of ratio_uell2 on the large real samples
    halving: tuple = field(default=())   # ratio(2 lam) / ratio(lam) on the large real samples
    vuprime_max: float = math.nan
    uell2_max: float = math.nan

    def to_list(self) -> list:
        return [r.to_dict() for r in self.records]


def fit_M(grid: ResolventGrid, lam_scan: Sequence[float] = tuple(np.linspace(0.0, 20.0, 81)),
          cond_max: float = COND_MAX) -> float:
    """Smallest scanned real lam from which every later sample is well conditioned.

    The condition number is estimated with Gershgorin bounds for the
    symmetric tridiagonal matrix; on real lam >= 0 it is positive definite.
    """
    h2 = grid.h ** 2
    ok = []
    for lam in lam_scan:
        d = grid.tau * lam * lam + grid.b * lam + grid.tau
        lo = np.min(d)                     # smallest eigenvalue bound (D+D- is negative definite)
        hi = np.max(d) + 4.0 / h2
        ok.append(hi / lo <= cond_max)
    ok = np.array(ok)
    for k in range(len(ok)):
        if np.all(ok[k:]):
            return float(lam_scan[k])
    raise NumericalError("no well-conditioned real range found")


def default_samples(M: float, theta0: float = THETA0) -> list:
    """Spectral parameters covering the two regions of the bounds."""
    lams = []
    for re in (0.0, 1.0, 5.0, 10.0, 20.0):
        for im in (theta0, 1.0, 2.0, 5.0, 10.0, 20.0):
            lams += [complex(re, im), complex(re, -im)]
    real = sorted({max(M, 1.0), 5.0, 10.0, 20.0, 40.0, 80.0})
    lams += [complex(r, 0.0) for r in real if r >= max(M, 1.0)]
    return lams


def verify_bounds(grid: ResolventGrid, lam_samples=None, trials: int = 20, seed: int = 0,
                  theta0: float = THETA0) -> ResolventReport:
    """Empirical maxima of the two bound ratios over random smooth right-hand sides."""
    M = fit_M(grid)
    if lam_samples is None:
        lam_samples = default_samples(M, theta0)
    rng = np.random.default_rng(seed)
    x, h = grid.x, grid.h
    rhs = [(smooth_noise(rng, x, grid.L, True), smooth_noise(rng, x, grid.L, True))
           for _ in range(trials)]
    records = []
    for lam in lam_samples:
        lam = complex(lam)
        if lam == 0:
            raise DomainError("lambda = 0 is excluded from the sampling set")
        if lam.real < 0 or (abs(lam.imag) < theta0 and lam.real < M):
            raise DomainError(f"lambda={lam} outside the sampling region")
        rv, ru = 0.0, 0.0
        worst = {}
        for phi, psi in rhs:
            u, v = solve_resolvent(grid, lam, phi, psi)
            n = {"u": l2(u, h), "u_x": l2(ddx(u, h), h), "v": l2(v, h),
                 "phi": l2(phi, h), "phi_x": l2(ddx(phi, h), h), "psi": l2(psi, h)}
            a = (n["v"] + n["u_x"]) / (n["psi"] + n["phi_x"] + n["u"])
            b = n["u"] / (n["phi"] + n["psi"])
            if a > rv:
                rv = a
            if b > ru:
                ru, worst = b, n
        records.append(ResolventRecord(lam, rv, ru, worst))
    big = sorted((r for r in records if r.lam.imag == 0 and r.lam.real >= 10.0),
                 key=lambda r: r.lam.real)
    slope, halving = math.nan, ()
    if len(big) >= 2:
        lr = np.log([r.lam.real for r in big])
        lv = np.log([r.ratio_uell2 for r in big])
        slope = float(np.polyfit(lr, lv, 1)[0])
        halving = tuple(big[k + 1].ratio_uell2 / big[k].ratio_uell2 for k in range(len(big) - 1)
                        if abs(big[k + 1].lam.real - 2 * big[k].lam.real) < 1e-12)
    return ResolventReport(tuple(records), M, theta0, seed, trials, slope, halving,
                           max(r.ratio_vuprime for r in records),
                           max(r.ratio_uell2 for r in records))


def manufactured_error(grid: ResolventGrid, lam: complex, b_func, width: float = 2.0) -> float:
    """Max error of the discrete solution against u* = exp(-(x/width)^2) cos(x).

    phi = sech(x); psi is computed from the continuous equation with the
    damping ``b_func(x)``.  The grid's own b must sample the same function.
    """
    x = grid.x
    lam = complex(lam)
    tau = grid.tau
    e = np.exp(-(x / width) ** 2)
    u = e * np.cos(x)
    # u'' for e(x) cos x
    ex = -2 * x / width ** 2 * e
    exx = (4 * x * x / width ** 4 - 2 / width ** 2) * e
    uxx = exx * np.cos(x) - 2 * ex * np.sin(x) - e * np.cos(x)
    phi = 1.0 / np.cosh(x)
    v = lam * u - phi
    psi = tau * lam * v - uxx + tau * u + b_func(x) * v
    un, vn = solve_resolvent(grid, lam, phi, psi)
    return float(max(np.max(np.abs(un - u)), np.max(np.abs(vn - v))))

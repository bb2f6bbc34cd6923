"""Constant-coefficient spectral objects at the two ends of a front.

At x -> +-inf the linearized operator has coefficients a = f'(U_+-) < 0 and
b = g(U_+-, tau) > 0.  Fourier modes exp(i xi x) give the dispersion relation

    xi^2 - i c xi (b + 2 tau lam) + (1 - c^2 tau)(tau lam^2 + b lam + |a|) = 0,

whose roots lam(xi) bound the essential spectrum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, RegionError, SplittingError

SIDES = ("minus", "plus")
SPLITTING_FLOOR = 1e-8
CASE_TOL = 1e-9
DEFAULT_XI = np.linspace(-50.0, 50.0, 4001)


@dataclass(frozen=True)
class AsymptoticSpectralData:
    a_minus: float
    a_plus: float
    b_minus: float
    b_plus: float
    c: float
    tau: float

    def __post_init__(self):
        if not (self.a_minus < 0 and self.a_plus < 0):
            raise ValueError("endpoint reaction slopes must be negative")
        if not (self.b_minus > 0 and self.b_plus > 0):
            raise ValueError("endpoint damping values must be positive")
        if not self.c * self.c * self.tau < 1.0:
            raise ValueError("subcharacteristic condition c^2 tau < 1 violated")

    def side(self, side: str) -> tuple[float, float]:
        """(|a|, b) at the requested end."""
        if side == "minus":
            return abs(self.a_minus), self.b_minus
        if side == "plus":
            return abs(self.a_plus), self.b_plus
        raise ValueError(f"side must be 'minus' or 'plus', got {side!r}")

    @property
    def s2(self) -> float:
        return 1.0 - self.c * self.c * self.tau


def asymptotic_data(model, front) -> AsymptoticSpectralData:
    return AsymptoticSpectralData(float(model.df(0.0)), float(model.df(1.0)),
                                  float(model.g(0.0)), float(model.g(1.0)),
                                  front.c_star, front.tau)


def asymptotic_matrix(data: AsymptoticSpectralData, side: str, lam) -> np.ndarray:
    """Limit of the first-order system matrix at the requested end."""
    a, b = data.side(side)
    c, tau, s2 = data.c, data.tau, data.s2
    lam = complex(lam)
    return np.array([[0.0, 1.0],
                     [(tau * lam * lam + lam * b + a) / s2, -c * (b + 2.0 * tau * lam) / s2]],
                    dtype=complex)


def _spatial_roots(data, side, lam):
    a, b = data.side(side)
    c, tau, s2 = data.c, data.tau, data.s2
    lam = np.asarray(lam, dtype=complex)
    theta = (c * c * (b + 2.0 * tau * lam) ** 2 + 4.0 * s2 * (tau * lam * lam + b * lam + a)) / (s2 * s2)
    centre = -c * (b + 2.0 * tau * lam) / (2.0 * s2)
    root = 0.5 * np.sqrt(theta)
    return centre - root, centre + root


def spatial_eigenvalues(data: AsymptoticSpectralData, side: str, lam):
    """(mu1, mu2) with Re mu1 < 0 < Re mu2 for lam in the region right of -chi0.

    Inside that region the principal square root of the discriminant already
    gives the ordered pair, and it is continuous there because the
    discriminant never crosses the negative real axis.  Works on scalars and
    arrays.
    """
    lam_arr = np.asarray(lam, dtype=complex)
    chi0 = spectral_gap(data).chi0
    if np.any(lam_arr.real <= -chi0):
        raise RegionError(f"lambda must satisfy Re lambda > -chi0 = {-chi0:.6g}")
    mu1, mu2 = _spatial_roots(data, side, lam_arr)
    if np.ndim(lam) == 0:
        return complex(mu1), complex(mu2)
    return mu1, mu2


def continue_branches(mu1: np.ndarray, mu2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Swap root labels where a sample-to-sample jump is a branch flip.

    Used for root pairs sampled along a connected path that may leave the
    region where the principal branch is already continuous.
    """
    m1 = np.array(mu1, dtype=complex)
    m2 = np.array(mu2, dtype=complex)
    for k in range(1, m1.size):
        keep = abs(m1[k] - m1[k - 1]) + abs(m2[k] - m2[k - 1])
        swap = abs(m2[k] - m1[k - 1]) + abs(m1[k] - m2[k - 1])
        if swap < keep:
            m1[k], m2[k] = m2[k], m1[k]
    return m1, m2


@dataclass(frozen=True)
class DispersionCurve:
    side: str
    branch: int
    xi: np.ndarray
    lam: np.ndarray

    @property
    def max_real(self) -> float:
        return float(np.max(self.lam.real))


def dispersion_residual(data: AsymptoticSpectralData, side: str, xi, lam):
    a, b = data.side(side)
    c, tau = data.c, data.tau
    xi = np.asarray(xi, dtype=float)
    lam = np.asarray(lam, dtype=complex)
    return xi * xi - 1j * c * xi * (b + 2 * tau * lam) + data.s2 * (tau * lam * lam + b * lam + a)


def _quadratic_roots(data, side, xi):
    """Roots of the lam-quadratic by the cancellation-free formula."""
    a, b = data.side(side)
    c, tau, s2 = data.c, data.tau, data.s2
    A = s2 * tau
    B = s2 * b - 2j * c * xi * tau
    C = s2 * a + xi * xi - 1j * c * xi * b
    if tau == 0.0:
        return (-C / B,)
    disc = np.sqrt(B * B - 4.0 * A * C + 0j)
    sign = np.where((np.conj(B) * disc).real >= 0.0, 1.0, -1.0)
    q = -0.5 * (B + sign * disc)
    r1, r2 = q / A, C / q
    # label: branch 1 is the root on the positive side of the curve centre
    centre = -b / (2.0 * tau) + 1j * c * xi / s2
    d1 = r1 - centre
    first = (d1.real + d1.imag) >= 0.0
    return np.where(first, r1, r2), np.where(first, r2, r1)


def xi0(data: AsymptoticSpectralData, side: str) -> float:
    """Junction frequency between the two regimes (nan when it does not exist)."""
    a, b = data.side(side)
    if data.tau == 0.0:
        return math.nan
    val = data.s2 ** 2 * (b * b / (4.0 * data.tau) - a)
    return math.sqrt(val) if val >= 0.0 else math.nan


def case_analysis(data: AsymptoticSpectralData, side: str, xi) -> tuple[np.ndarray, np.ndarray]:
    """Curves from the real/imaginary-part analysis, as an independent evaluation.

    For |xi| >= xi0 (or when xi0 does not exist) the real part is -b/2tau and
    the imaginary parts are c xi/(1 - c^2 tau) +- sqrt(Delta1)/2tau; for
    |xi| < xi0 the imaginary part is c xi/(1 - c^2 tau) and the real parts are
    (-b +- sqrt(Delta2))/2tau.  For tau = 0 the single curve is
    -|a|/b + i c xi - xi^2/b.
    """
    a, b = data.side(side)
    c, tau, s2 = data.c, data.tau, data.s2
    xi = np.asarray(xi, dtype=float)
    if tau == 0.0:
        lam = -a / b + 1j * c * xi - xi * xi / b
        return lam, lam
    beta0 = c * xi / s2
    delta1 = 4 * c * c * tau * tau * xi * xi / s2 ** 2 - 4 * tau * (-a + b * b / (4 * tau) - xi * xi / s2)
    delta2 = b * b - 4 * tau * (a + xi * xi / s2 ** 2)
    x0 = xi0(data, side)
    inner = np.abs(xi) < x0 if not math.isnan(x0) else np.zeros(xi.shape, bool)
    r1 = np.empty(xi.shape, complex)
    r2 = np.empty(xi.shape, complex)
    sq1 = np.sqrt(np.maximum(delta1, 0.0)) / (2 * tau)
    sq2 = np.sqrt(np.maximum(delta2, 0.0)) / (2 * tau)
    outer = ~inner
    r1[outer] = -b / (2 * tau) + 1j * (beta0[outer] + sq1[outer])
    r2[outer] = -b / (2 * tau) + 1j * (beta0[outer] - sq1[outer])
    # (-b + sqrt(Delta2)) / 2tau rewritten as -2(|a| + xi^2/s^4) / (b + sqrt(Delta2))
    # to avoid cancellation when tau is small
    near = -2.0 * (a + xi * xi / s2 ** 2) / (b + 2 * tau * sq2)
    r1[inner] = near[inner] + 1j * beta0[inner]
    r2[inner] = (-b / (2 * tau) - sq2[inner]) + 1j * beta0[inner]
    return r1, r2


def _match_error(p1, p2, q1, q2, relative=False):
    """Pointwise distance between two unordered root pairs.

    With ``relative`` each root's error is scaled by max(1, |root|).
    """
    s1 = np.maximum(1.0, np.abs(q1)) if relative else 1.0
    s2 = np.maximum(1.0, np.abs(q2)) if relative else 1.0
    direct = np.maximum(np.abs(p1 - q1) / s1, np.abs(p2 - q2) / s2)
    swapped = np.maximum(np.abs(p1 - q2) / s2, np.abs(p2 - q1) / s1)
    return np.minimum(direct, swapped)


def dispersion_curves(data: AsymptoticSpectralData, side: str, xi_grid=None,
                      tol: float = CASE_TOL):
    """Both curves lam_{1,2}(xi) at one end, cross-checked against the case analysis.

    For tau = 0 a single curve is returned.  The agreement tolerance is
    relative to max(1, |lam|).
    """
    xi = DEFAULT_XI if xi_grid is None else np.asarray(xi_grid, dtype=float)
    roots = _quadratic_roots(data, side, xi)
    if data.tau == 0.0:
        oracle = case_analysis(data, side, xi)[0]
        err = np.abs(roots[0] - oracle) / np.maximum(1.0, np.abs(oracle))
    else:
        o1, o2 = case_analysis(data, side, xi)
        err = _match_error(roots[0], roots[1], o1, o2, relative=True)
    if np.max(err) > tol:
        k = int(np.argmax(err))
        raise ConsistencyError(f"quadratic roots and case analysis disagree by {err[k]:.3e} "
                               f"at xi={xi[k]:.6g} ({side})")
    return tuple(DispersionCurve(side, i + 1, xi, r) for i, r in enumerate(roots))


def curve_agreement(data: AsymptoticSpectralData, side: str, xi,
                    relative: bool = False) -> np.ndarray:
    """Pointwise distance between quadratic roots and the case analysis."""
    roots = _quadratic_roots(data, side, np.asarray(xi, float))
    oracle = case_analysis(data, side, xi)
    if data.tau == 0.0:
        scale = np.maximum(1.0, np.abs(oracle[0])) if relative else 1.0
        return np.abs(roots[0] - oracle[0]) / scale
    return _match_error(roots[0], roots[1], oracle[0], oracle[1], relative)


def tau_zero_curve(data: AsymptoticSpectralData, side: str, xi) -> np.ndarray:
    """The single curve of the parabolic limit, -|a|/b + i c xi - xi^2/b."""
    a, b = data.side(side)
    xi = np.asarray(xi, dtype=float)
    return -a / b + 1j * data.c * xi - xi * xi / b


def surviving_branch(data: AsymptoticSpectralData, side: str, xi) -> np.ndarray:
    """The root that stays bounded as tau -> 0 (the other escapes like -b/tau)."""
    roots = _quadratic_roots(data, side, np.asarray(xi, float))
    if data.tau == 0.0:
        return roots[0]
    a, b = data.side(side)
    far = -b / data.tau
    return np.where(np.abs(roots[0] - far) > np.abs(roots[1] - far), roots[0], roots[1])


@dataclass(frozen=True)
class SpectralGap:
    chi0_minus: float
    chi0_plus: float
    regime_minus: str
    regime_plus: str

    @property
    def chi0(self) -> float:
        return min(self.chi0_minus, self.chi0_plus)

    def to_dict(self) -> dict:
        return {"chi0_minus": self.chi0_minus, "chi0_plus": self.chi0_plus, "chi0": self.chi0,
                "regimes": {"minus": self.regime_minus, "plus": self.regime_plus}}


def _gap_one(a: float, b: float, tau: float) -> tuple[float, str]:
    if tau == 0.0:
        return 0.5 * a / b, "tau-zero"
    if b * b >= 4.0 * tau * a:
        # half of b/2tau - sqrt(b^2/4tau^2 - |a|/tau), rationalized against cancellation
        return 0.5 * a / (0.5 * b + math.sqrt(0.25 * b * b - a * tau)), "case-small-tau"
    return b / (4.0 * tau), "case-large-tau"


def spectral_gap(data: AsymptoticSpectralData) -> SpectralGap:
    gm, rm = _gap_one(*data.side("minus"), data.tau)
    gp, rp = _gap_one(*data.side("plus"), data.tau)
    return SpectralGap(gm, gp, rm, rp)


@dataclass(frozen=True)
class SplittingReport:
    min_margin: float
    worst_lambda: complex
    samples: int


def consistent_splitting_check(data: AsymptoticSpectralData, lambda_samples,
                               floor: float = SPLITTING_FLOOR) -> SplittingReport:
    """Check that both ends split into one decaying and one growing mode."""
    lam = np.atleast_1d(np.asarray(lambda_samples, dtype=complex))
    margins = np.full(lam.shape, np.inf)
    for side in SIDES:
        mu1, mu2 = spatial_eigenvalues(data, side, lam)
        if np.any(mu1.real >= 0) or np.any(mu2.real <= 0):
            k = int(np.argmax((mu1.real >= 0) | (mu2.real <= 0)))
            raise SplittingError(f"no hyperbolic splitting at lambda={lam[k]} ({side})")
        margins = np.minimum(margins, np.minimum(-mu1.real, mu2.real))
    k = int(np.argmin(margins))
    if margins[k] <= floor:
        raise SplittingError(f"splitting margin {margins[k]:.3e} below floor at lambda={lam[k]}")
    return SplittingReport(float(margins[k]), complex(lam[k]), lam.size)

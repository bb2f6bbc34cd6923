"""Bistable reaction terms, damping laws and the structural hypothesis checks.

The equation under study is

    tau * u_tt + g(u, tau) * u_t = u_xx + f(u)

with f bistable on [0, 1] (stable roots 0 and 1, unstable root alpha) and
g bounded below by a positive constant.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .errors import ConfigError, DomainError, HypothesisError

ROOT_TOL = 1e-9
DEFAULT_DELTA0 = 1e-6
DEFAULT_GRID = 1000


@dataclass(frozen=True)
class ReactionSpec:
    """Bistable reaction f on [0, 1].

    ``kind="cubic"`` is f(u) = kappa * u (1 - u) (u - alpha).  ``kind="custom-sampled"``
    interpolates user node values of f and f' with a piecewise cubic Hermite
    spline.
    """

    kind: str = "cubic"
    alpha: float = 0.5
    kappa: float = 1.0
    nodes: Optional[tuple] = None
    f_nodes: Optional[tuple] = None
    df_nodes: Optional[tuple] = None
    _spline: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind == "cubic":
            if not 0.0 < self.alpha < 1.0:
                raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
            if not self.kappa > 0.0:
                raise DomainError(f"kappa must be positive, got {self.kappa}")
        elif self.kind == "custom-sampled":
            if self.nodes is None or self.f_nodes is None or self.df_nodes is None:
                raise DomainError("custom-sampled reaction needs nodes, f_nodes and df_nodes")
            x = np.asarray(self.nodes, dtype=float)
            if x[0] != 0.0 or x[-1] != 1.0 or np.any(np.diff(x) <= 0):
                raise DomainError("nodes must increase strictly from 0 to 1")
            spline = CubicHermiteSpline(x, np.asarray(self.f_nodes, float),
                                        np.asarray(self.df_nodes, float))
            object.__setattr__(self, "_spline", spline)
            vals = spline(np.linspace(0.0, 1.0, 2001))
            inner = np.flatnonzero(np.diff(np.sign(vals[1:-1])) != 0)
            if inner.size == 0:
                raise DomainError("custom reaction has no interior root")
            grid = np.linspace(0.0, 1.0, 2001)[1:-1]
            k = inner[len(inner) // 2]
            root = brentq(spline, grid[k], grid[k + 1], xtol=1e-15)
            object.__setattr__(self, "alpha", float(root))
            object.__setattr__(self, "kappa", float("nan"))
        else:
            raise DomainError(f"unknown reaction kind {self.kind!r}")

    def f(self, u):
        if self.kind == "cubic":
            return self.kappa * u * (1.0 - u) * (u - self.alpha)
        return self._spline(u)

    def df(self, u):
        if self.kind == "cubic":
            a = self.alpha
            return self.kappa * (-3.0 * u * u + 2.0 * (1.0 + a) * u - a)
        return self._spline(u, 1)

    def d2f(self, u):
        if self.kind == "cubic":
            return self.kappa * (-6.0 * u + 2.0 * (1.0 + self.alpha))
        return self._spline(u, 2)

    def max_abs_df(self, grid_points: int = DEFAULT_GRID) -> float:
        u = np.linspace(0.0, 1.0, grid_points + 1)
        return float(np.max(np.abs(self.df(u))))

    def to_dict(self) -> dict:
        if self.kind == "cubic":
            return {"kind": "cubic", "alpha": self.alpha, "kappa": self.kappa}
        return {"kind": self.kind, "nodes": list(self.nodes),
                "f_nodes": list(self.f_nodes), "df_nodes": list(self.df_nodes)}


@dataclass(frozen=True)
class DampingSpec:
    """Damping coefficient g(u, tau).

    ``constant-one`` is the nonlinear telegrapher choice g = 1,
    ``cattaneo-maxwell`` is the relaxation law g = 1 - tau f'(u), and ``custom``
    takes callables ``g(u, tau)`` and ``dg(u, tau)`` (derivative in u).
    """

    kind: str = "constant-one"
    g_func: Optional[Callable] = None
    dg_func: Optional[Callable] = None

    def __post_init__(self):
        if self.kind not in ("constant-one", "cattaneo-maxwell", "custom"):
            raise DomainError(f"unknown damping kind {self.kind!r}")
        if self.kind == "custom" and (self.g_func is None or self.dg_func is None):
            raise DomainError("custom damping needs g_func and dg_func")

    def g(self, u, tau: float, reaction: ReactionSpec):
        if self.kind == "constant-one":
            return np.ones_like(u, dtype=float) if isinstance(u, np.ndarray) else 1.0
        if self.kind == "cattaneo-maxwell":
            return 1.0 - tau * reaction.df(u)
        return self.g_func(u, tau)

    def dg(self, u, tau: float, reaction: ReactionSpec):
        if self.kind == "constant-one":
            return np.zeros_like(u, dtype=float) if isinstance(u, np.ndarray) else 0.0
        if self.kind == "cattaneo-maxwell":
            return -tau * reaction.d2f(u)
        return self.dg_func(u, tau)

    def to_dict(self) -> dict:
        if self.kind == "custom":
            raise ConfigError("custom damping cannot be serialized")
        return {"kind": self.kind}


@dataclass(frozen=True)
class ModelSpec:
    """Reaction, damping and relaxation time of one equation instance."""

    reaction: ReactionSpec
    damping: DampingSpec
    tau: float = 0.0
    tau_m: Optional[float] = None
    delta0: float = DEFAULT_DELTA0

    def __post_init__(self):
        if not self.tau >= 0.0:
            raise DomainError(f"tau must be nonnegative, got {self.tau}")
        if not self.delta0 > 0.0:
            raise DomainError("delta0 must be positive")
        if self.tau_m is None:
            if self.damping.kind == "cattaneo-maxwell":
                tau_m = 1.0 / self.reaction.max_abs_df()
            else:
                tau_m = math.inf
            object.__setattr__(self, "tau_m", tau_m)

    @property
    def alpha(self) -> float:
        return self.reaction.alpha

    def f(self, u):
        return self.reaction.f(u)

    def df(self, u):
        return self.reaction.df(u)

    def g(self, u, tau: Optional[float] = None):
        return self.damping.g(u, self.tau if tau is None else tau, self.reaction)

    def dg(self, u, tau: Optional[float] = None):
        return self.damping.dg(u, self.tau if tau is None else tau, self.reaction)

    def with_tau(self, tau: float) -> "ModelSpec":
        return ModelSpec(self.reaction, self.damping, tau, self.tau_m, self.delta0)

    def to_dict(self) -> dict:
        d = {"reaction": self.reaction.to_dict(), "damping": self.damping.to_dict(),
             "tau": self.tau, "delta0": self.delta0}
        if math.isfinite(self.tau_m):
            d["tau_m"] = self.tau_m
        return d


def cubic_model(alpha: float, damping: str = "constant-one", tau: float = 0.0,
                kappa: float = 1.0, **kw) -> ModelSpec:
    """Shorthand for the cubic reaction with one of the built-in damping laws."""
    return ModelSpec(ReactionSpec("cubic", alpha, kappa), DampingSpec(damping), tau, **kw)


_MODEL_KEYS = {"reaction", "damping", "tau", "tau_m", "delta0"}
_REACTION_KEYS = {"kind", "alpha", "kappa", "nodes", "f_nodes", "df_nodes"}
_DAMPING_KEYS = {"kind"}


def _reject_unknown(d: dict, allowed: set, where: str) -> None:
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object")
    extra = sorted(set(d) - allowed)
    if extra:
        raise ConfigError(f"{where}: unknown key {extra[0]!r}")


def model_from_dict(d: dict) -> ModelSpec:
    """Build a model from the JSON document layout (see README)."""
    _reject_unknown(d, _MODEL_KEYS, "model")
    for key in ("reaction", "damping"):
        if key not in d:
            raise ConfigError(f"model: missing key {key!r}")
    r = d["reaction"]
    _reject_unknown(r, _REACTION_KEYS, "model.reaction")
    dm = d["damping"]
    _reject_unknown(dm, _DAMPING_KEYS, "model.damping")
    try:
        kind = r.get("kind", "cubic")
        if kind == "cubic":
            reaction = ReactionSpec("cubic", float(r["alpha"]), float(r.get("kappa", 1.0)))
        else:
            reaction = ReactionSpec(kind, nodes=tuple(r["nodes"]), f_nodes=tuple(r["f_nodes"]),
                                    df_nodes=tuple(r["df_nodes"]))
        damping = DampingSpec(dm.get("kind", "constant-one"))
        if damping.kind == "custom":
            raise ConfigError("model.damping: custom damping is only available from Python")
        return ModelSpec(reaction, damping, float(d.get("tau", 0.0)),
                         tau_m=None if d.get("tau_m") is None else float(d["tau_m"]),
                         delta0=float(d.get("delta0", DEFAULT_DELTA0)))
    except KeyError as exc:
        raise ConfigError(f"model: missing key {exc.args[0]!r}") from None
    except (TypeError, DomainError) as exc:
        raise ConfigError(f"model: {exc}") from None


def load_model(path) -> ModelSpec:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return model_from_dict(doc.get("model", doc))


def eval_potential(model: ModelSpec, u: float) -> float:
    """Double-well potential F(u) = -int_0^u f(v) dv by adaptive quadrature."""
    if not 0.0 <= u <= 1.0:
        raise DomainError(f"u must lie in [0, 1], got {u}")
    if u == 0.0:
        return 0.0
    val, _ = quad(model.f, 0.0, u, epsabs=1e-14, epsrel=1e-13, limit=200)
    return -val


def cubic_potential(alpha: float, kappa: float, u):
    """Closed form of F for the cubic reaction."""
    return -kappa * (-u**4 / 4.0 + (1.0 + alpha) * u**3 / 3.0 - alpha * u**2 / 2.0)


@dataclass(frozen=True)
class Clause:
    name: str
    passed: bool
    worst: float
    witness: Optional[float] = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "worst": float(self.worst),
                "witness": None if self.witness is None else float(self.witness),
                "detail": self.detail}


@dataclass(frozen=True)
class HypothesisReport:
    clauses: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses)

    def clause(self, name: str) -> Clause:
        for c in self.clauses:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "clauses": [c.to_dict() for c in self.clauses]}


def validate_hypotheses(model: ModelSpec, grid_points: int = DEFAULT_GRID) -> HypothesisReport:
    """Check the bistability and damping hypotheses on a dense grid.

    Failures are reported clause by clause together with the worst witness;
    nothing is raised.
    """
    if grid_points < 100:
        raise DomainError("grid_points must be at least 100")
    r = model.reaction
    alpha = r.alpha
    u = np.union1d(np.linspace(0.0, 1.0, grid_points), [0.0, alpha, 1.0])
    clauses = []

    roots = np.array([0.0, alpha, 1.0])
    fr = np.abs(r.f(roots))
    k = int(np.argmax(fr))
    clauses.append(Clause("H1.roots", bool(fr[k] <= ROOT_TOL), float(fr[k]), float(roots[k]),
                          "f(0) = f(alpha) = f(1) = 0"))
    d0, d1, da = float(r.df(0.0)), float(r.df(1.0)), float(r.df(alpha))
    clauses.append(Clause("H1.df0", d0 < 0, d0, 0.0, "f'(0) < 0"))
    clauses.append(Clause("H1.df1", d1 < 0, d1, 1.0, "f'(1) < 0"))
    clauses.append(Clause("H1.dfalpha", da > 0, da, alpha, "f'(alpha) > 0"))

    left = u[(u > 0) & (u < alpha)]
    right = u[(u > alpha) & (u < 1)]
    fl = r.f(left)
    i = int(np.argmax(fl))
    clauses.append(Clause("H1.negative_below_alpha", bool(fl[i] < 0), float(fl[i]),
                          float(left[i]), "f < 0 on (0, alpha)"))
    fr_ = r.f(right)
    j = int(np.argmin(fr_))
    clauses.append(Clause("H1.positive_above_alpha", bool(fr_[j] > 0), float(fr_[j]),
                          float(right[j]), "f > 0 on (alpha, 1)"))

    taus = np.linspace(0.0, model.tau, 11) if model.tau > 0 else np.array([0.0])
    gmin, wit = math.inf, 0.0
    for t in taus:
        gv = np.asarray(model.g(u, t), dtype=float) * np.ones_like(u)
        m = int(np.argmin(gv))
        if gv[m] < gmin:
            gmin, wit = float(gv[m]), float(u[m])
    clauses.append(Clause("H2.positive_damping", gmin >= model.delta0, gmin, wit,
                          f"g(u, tau') >= delta0 = {model.delta0:g} for tau' in [0, tau]"))
    clauses.append(Clause("tau.range", 0.0 <= model.tau < model.tau_m, model.tau, None,
                          f"0 <= tau < tau_m = {model.tau_m:g}"))
    return HypothesisReport(tuple(clauses))


def require_valid(model: ModelSpec) -> HypothesisReport:
    report = validate_hypotheses(model)
    if not report.passed:
        raise HypothesisError(report)
    return report

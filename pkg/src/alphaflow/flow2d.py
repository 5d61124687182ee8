"""Curvature flows on weighted triangulated surfaces, integrated in ``u = ln r``.

Three flows share one driver:

* alpha-flow     ``du_i/dt = s_alpha r_i^alpha - K_i``
* modified flow  ``du_i/dt = Rbar_i r_i^alpha - K_i``  (prescribed alpha-curvature ``Rbar``)
* A-flow         ``du_i/dt = 2 pi chi A_i / sum(A) - K_i``
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from . import area_elements
from .complex_core import WeightedSurface
from .errors import ConfigError, DegenerateTriangle, DualPointOutside, GuardRejectionAtMinStep, QuadratureFailure
from .ode import IntegratorConfig, integrate
from .packing2d import TWO_PI, as_radii, gauss_curvature

_GL_X, _GL_W = np.polynomial.legendre.leggauss(7)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


class Verdict(str, Enum):
    CONVERGED = "Converged"
    MAX_TIME = "MaxTime"
    DIVERGING = "Diverging"
    LEFT_ADMISSIBLE = "LeftAdmissibleRegion"


@dataclass
class FlowConfig:
    alpha: float = 0.0
    t_end: float = 100.0
    tol: float = 1e-10
    max_steps: int = 200_000
    method: str = "RK45"
    h0: float | None = None
    atol: float = 1e-10
    rtol: float = 1e-10
    prescribed: np.ndarray | None = None
    area: object | None = None
    stop_on_converge: bool = True
    track_potential: bool = False
    normalize: bool = True
    diverge_bound: float = 1e3

    def validate(self) -> None:
        if not self.t_end > 0:
            raise ConfigError("t_end must be positive")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if not math.isfinite(self.alpha):
            raise ConfigError("alpha must be finite")

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(
            method=self.method, atol=self.atol, rtol=self.rtol, h0=self.h0, max_steps=self.max_steps
        )


@dataclass
class FlowTrace:
    """Sampled flow solution.

    ``conserved`` is ``sum(u)`` for the surface flows and ``||r||_2^2`` for the
    3-dimensional ones; ``potential`` holds the Ricci potential (surface flows)
    or the Yamabe functional (3-dimensional flows), NaN when not tracked.
    """

    kind: str
    alpha: float
    times: np.ndarray
    radii: np.ndarray
    residual: np.ndarray
    conserved: np.ndarray
    potential: np.ndarray
    verdict: Verdict
    rate: float
    tol: float
    normalization: float = 1.0
    conserved_name: str = "sum_u"
    extra: dict = field(default_factory=dict)

    @property
    def final_radii(self) -> np.ndarray:
        return self.radii[-1]

    @property
    def final_residual(self) -> float:
        return float(self.residual[-1])

    @property
    def conserved_drift(self) -> float:
        return float(np.max(np.abs(self.conserved - self.conserved[0])))

    @property
    def converged(self) -> bool:
        return self.verdict == Verdict.CONVERGED

    def to_csv(self, path) -> None:
        n = self.radii.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [f"r_{i + 1}" for i in range(n)] + ["residual_inf", self.conserved_name, "potential"])
            for k in range(len(self.times)):
                w.writerow(
                    [repr(float(self.times[k]))]
                    + [repr(float(x)) for x in self.radii[k]]
                    + [repr(float(self.residual[k])), repr(float(self.conserved[k])), repr(float(self.potential[k]))]
                )


def check_convergence(trace_or_residuals, tol: float, times=None) -> tuple[Verdict, float]:
    """Verdict and convergence rate of a residual history.

    The rate is the least-squares slope of ``log(residual)`` over the final
    half of the samples, against ``times`` when given (sample index otherwise).
    """
    diverged = False
    if isinstance(trace_or_residuals, FlowTrace):
        res = trace_or_residuals.residual
        times = trace_or_residuals.times if times is None else times
        diverged = trace_or_residuals.verdict in (Verdict.DIVERGING, Verdict.LEFT_ADMISSIBLE)
    else:
        res = np.asarray(trace_or_residuals, dtype=float)
    if res.size == 0:
        raise ValueError("empty residual history")
    x = np.arange(res.size, dtype=float) if times is None else np.asarray(times, dtype=float)
    n = res.size
    if n >= 2:
        start = min(n // 2, n - 2)
        xs = x[start:]
        ys = np.log(np.maximum(res[start:], np.finfo(float).tiny))
        rate = float(np.polyfit(xs, ys, 1)[0]) if np.ptp(xs) > 0 else 0.0
    else:
        rate = 0.0
    if diverged:
        return trace_or_residuals.verdict, rate
    return (Verdict.CONVERGED if res[-1] < tol else Verdict.MAX_TIME), rate


# -- vector fields -----------------------------------------------------------


def alpha_flow_field(surface: WeightedSurface, alpha: float) -> Callable[[np.ndarray], np.ndarray]:
    chi2pi = TWO_PI * surface.euler_characteristic

    def field_u(u):
        r = np.exp(u)
        ra = r**alpha
        return chi2pi / ra.sum() * ra - gauss_curvature(surface, r)

    return field_u


def modified_flow_field(surface: WeightedSurface, alpha: float, prescribed) -> Callable:
    Rbar = np.asarray(prescribed, dtype=float)
    if Rbar.shape != (surface.vertex_count,):
        raise ConfigError("prescribed curvature needs one value per vertex")

    def field_u(u):
        r = np.exp(u)
        return Rbar * r**alpha - gauss_curvature(surface, r)

    return field_u


def a_flow_field(surface: WeightedSurface, selector) -> Callable:
    chi2pi = TWO_PI * surface.euler_characteristic

    def field_u(u):
        r = np.exp(u)
        A = area_elements.evaluate(selector, surface, r)
        return chi2pi / A.sum() * A - gauss_curvature(surface, r)

    return field_u


# -- potential ----------------------------------------------------------------


def _segment_integral(grad, a: np.ndarray, b: np.ndarray, tol: float = 1e-10, max_level: int = 12) -> float:
    """``int_0^1 grad(a + t (b - a)) . (b - a) dt`` by composite 7-point Gauss-Legendre."""
    d = b - a
    if not np.any(d):
        return 0.0

    def composite(panels):
        total = 0.0
        h = 1.0 / panels
        for p in range(panels):
            for x, w in zip(_GL_X, _GL_W):
                total += w * h * float(grad(a + (p + x) * h * d) @ d)
        return total

    prev = composite(1)
    panels = 1
    for _ in range(max_level):
        panels *= 2
        cur = composite(panels)
        if abs(cur - prev) < tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise QuadratureFailure("potential quadrature did not settle")


def potential_gradient(surface: WeightedSurface, alpha: float, prescribed=None) -> Callable:
    """``K - s_alpha r^alpha`` (or ``K - Rbar r^alpha``) as a function of ``u``."""
    f = alpha_flow_field(surface, alpha) if prescribed is None else modified_flow_field(surface, alpha, prescribed)
    return lambda u: -f(u)


def ricci_potential(surface: WeightedSurface, u, u_base, alpha: float, prescribed=None) -> float:
    """Potential ``F(u) = int_{u_base}^{u} sum_i (K_i - s_alpha r_i^alpha) du_i`` on the straight segment."""
    u = np.asarray(u, dtype=float)
    u_base = np.asarray(u_base, dtype=float)
    return _segment_integral(potential_gradient(surface, alpha, prescribed), u_base, u)


def potential_along_path(surface: WeightedSurface, points, alpha: float, prescribed=None) -> float:
    """Same integral along the polyline through ``points`` (first point is the base)."""
    grad = potential_gradient(surface, alpha, prescribed)
    pts = [np.asarray(p, dtype=float) for p in points]
    return sum(_segment_integral(grad, a, b) for a, b in zip(pts[:-1], pts[1:]))


# -- driver -------------------------------------------------------------------


def normalize_product(r) -> tuple[np.ndarray, float]:
    """Scale ``r`` onto ``prod(r) = 1``; returns the scaled radii and the factor."""
    r = as_radii(r)
    c = math.exp(-float(np.mean(np.log(r))))
    return r * c, c


def _run(surface, r0, cfg: FlowConfig, field_u, kind: str, grad_potential=None, normalize=True) -> FlowTrace:
    cfg.validate()
    r0 = as_radii(r0)
    if r0.shape != (surface.vertex_count,):
        raise ConfigError(f"expected {surface.vertex_count} initial radii")
    factor = 1.0
    if normalize and cfg.normalize:
        r0, factor = normalize_product(r0)
    u0 = np.log(r0)

    state = {"diverged": False, "F": 0.0, "u_prev": u0.copy()}
    potentials = [0.0]

    def monitor(t, u, du):
        if cfg.track_potential and grad_potential is not None and t > 0:
            state["F"] += _segment_integral(grad_potential, state["u_prev"], u)
            potentials.append(state["F"])
        state["u_prev"] = u.copy()

    def stop_when(t, u, du):
        if np.max(np.abs(u)) > cfg.diverge_bound:
            state["diverged"] = True
            return True
        return cfg.stop_on_converge and float(np.max(np.abs(du))) < cfg.tol

    icfg = cfg.integrator()
    icfg.monitors = (monitor,)
    # Packing triangles are never degenerate in exact arithmetic; in floating
    # point they become so only at extreme radius ratios, i.e. on a run that
    # is running away; the same holds for a radical center leaving its face.
    icfg.guard_exceptions = (DegenerateTriangle, DualPointOutside)
    stopped_by = None
    try:
        traj = integrate(lambda t, u: field_u(u), u0, cfg.t_end, icfg, stop_when=stop_when)
    except GuardRejectionAtMinStep as exc:
        traj = exc.trajectory
        state["diverged"] = True
        stopped_by = str(exc)

    residual = np.max(np.abs(traj.dydt), axis=1)
    if cfg.track_potential and grad_potential is not None:
        potential = np.array(potentials)
    else:
        potential = np.full(len(traj.t), np.nan)
    trace = FlowTrace(
        kind=kind,
        alpha=float(cfg.alpha),
        times=traj.t,
        radii=np.exp(traj.y),
        residual=residual,
        conserved=traj.y.sum(axis=1),
        potential=potential,
        verdict=Verdict.MAX_TIME,
        rate=0.0,
        tol=cfg.tol,
        normalization=factor,
        extra={"n_accepted": traj.n_accepted, "n_rejected": traj.n_rejected, "n_evals": traj.n_evals},
    )
    if stopped_by is not None:
        trace.extra["stopped_by"] = stopped_by
    verdict, rate = check_convergence(trace, cfg.tol)
    trace.verdict = Verdict.DIVERGING if state["diverged"] else verdict
    trace.rate = rate
    return trace


def integrate_alpha_flow(surface: WeightedSurface, r0, cfg: FlowConfig) -> FlowTrace:
    """Integrate the alpha-flow from ``r0`` (rescaled onto ``prod(r) = 1`` first)."""
    f = alpha_flow_field(surface, cfg.alpha)
    return _run(surface, r0, cfg, f, "alpha", grad_potential=lambda u: -f(u))


def integrate_modified_flow(surface: WeightedSurface, r0, cfg: FlowConfig) -> FlowTrace:
    """Integrate the flow toward the prescribed alpha-curvature ``cfg.prescribed``.

    The initial metric is not rescaled: this flow does not preserve ``prod(r)``
    and its limit, when ``alpha * Rbar <= 0``, is a specific metric rather than
    a scaling class.
    """
    if cfg.prescribed is None:
        raise ConfigError("modified flow needs a prescribed curvature")
    f = modified_flow_field(surface, cfg.alpha, cfg.prescribed)
    return _run(surface, r0, cfg, f, "modified", grad_potential=lambda u: -f(u), normalize=False)


def integrate_a_flow(surface: WeightedSurface, r0, cfg: FlowConfig) -> FlowTrace:
    if cfg.area is None:
        raise ConfigError("A-flow needs an area selector")
    selector = area_elements.parse_selector(cfg.area) if isinstance(cfg.area, str) else cfg.area
    f = a_flow_field(surface, selector)
    return _run(surface, r0, cfg, f, "A")


def constant_curvature_defect(surface: WeightedSurface, r, alpha: float) -> float:
    """``max_i |R_alpha,i - s_alpha|``."""
    r = as_radii(r)
    K = gauss_curvature(surface, r)
    s = TWO_PI * surface.euler_characteristic / float(np.sum(r**alpha))
    return float(np.max(np.abs(K / r**alpha - s)))

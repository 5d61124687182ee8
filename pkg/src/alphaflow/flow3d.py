"""Alpha-order Yamabe functional, flows and stability of sphere packing metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .complex_core import TetComplex
from .errors import (
    AlphaExcluded,
    ConfigError,
    DegenerateTet,
    GuardRejectionAtMinStep,
    InadmissibleMetric,
    LeftAdmissibleRegion,
    NonpositiveRadius,
    NotConstantCurvature,
)
from .flow2d import FlowConfig, FlowTrace, Verdict, check_convergence
from .ode import integrate
from .packing2d import as_radii
from .packing3d import (
    admissible_metric_check,
    cr_curvature,
    curvature_jacobian_r,
    random_admissible_metric,
    require_admissible,
)
from .spectral import complement_basis, jacobi_eigh, lambda1_3d


def _power_sum(r: np.ndarray, alpha: float) -> float:
    return float(np.sum(r ** (alpha + 1.0)))


def yamabe_functional(cx: TetComplex, r, alpha: float) -> float:
    """``Q_alpha = sum(K r) / ||r||_{alpha+1}``; scale invariant."""
    if alpha == -1:
        raise AlphaExcluded("the functional is undefined for alpha = -1")
    r = require_admissible(cx, r)
    S = float(cr_curvature(cx, r) @ r)
    return S / _power_sum(r, alpha) ** (1.0 / (alpha + 1.0))


def s_alpha_3d(cx: TetComplex, r, alpha: float) -> float:
    r = require_admissible(cx, r)
    return float(cr_curvature(cx, r) @ r) / _power_sum(r, alpha)


def gamma_field(cx: TetComplex, r, alpha: float) -> np.ndarray:
    """``s_alpha r^alpha - K``; zero exactly at constant alpha-curvature metrics."""
    r = require_admissible(cx, r)
    K = cr_curvature(cx, r)
    s = float(K @ r) / _power_sum(r, alpha)
    return s * r**alpha - K


def yamabe_gradient(cx: TetComplex, r, alpha: float) -> np.ndarray:
    """``grad_r Q_alpha = (K - s_alpha r^alpha) / ||r||_{alpha+1}``."""
    if alpha == -1:
        raise AlphaExcluded("the functional is undefined for alpha = -1")
    r = as_radii(r)
    norm = _power_sum(r, alpha) ** (1.0 / (alpha + 1.0))
    return -gamma_field(cx, r, alpha) / norm


def dgamma(cx: TetComplex, r, alpha: float, Lam=None) -> np.ndarray:
    """Jacobian of :func:`gamma_field` in ``r``.

    ``-Lambda + alpha s (diag(r^{alpha-1}) - r^a (r^a)^T / P) + r^a (K - s r^a)^T / P``
    with ``P = sum r^{alpha+1}``.  The last term vanishes at fixed points.
    """
    r = require_admissible(cx, r)
    if Lam is None:
        Lam = curvature_jacobian_r(cx, r)
    K = cr_curvature(cx, r)
    P = _power_sum(r, alpha)
    s = float(K @ r) / P
    ra = r**alpha
    return (
        -Lam
        + alpha * s * (np.diag(r ** (alpha - 1.0)) - np.outer(ra, ra) / P)
        + np.outer(ra, K - s * ra) / P
    )


def constant_curvature_defect_3d(cx: TetComplex, r, alpha: float) -> float:
    """``max_i |R_alpha,i - s_alpha|``."""
    r = require_admissible(cx, r)
    K = cr_curvature(cx, r)
    s = float(K @ r) / _power_sum(r, alpha)
    return float(np.max(np.abs(K / r**alpha - s)))


# -- flows ---------------------------------------------------------------------

_GUARD_ERRORS = (InadmissibleMetric, NonpositiveRadius, DegenerateTet)


def _run3d(cx: TetComplex, r0, cfg: FlowConfig, gradient: bool) -> FlowTrace:
    cfg.validate()
    alpha = cfg.alpha
    if gradient and alpha == -1:
        raise AlphaExcluded("the gradient flow is undefined for alpha = -1")
    r0 = as_radii(r0)
    if r0.shape != (cx.vertex_count,):
        raise ConfigError(f"expected {cx.vertex_count} initial radii")
    factor = 1.0
    if cfg.normalize:
        factor = 1.0 / float(np.linalg.norm(r0))
        r0 = r0 * factor
    if not admissible_metric_check(cx, r0)[0]:
        raise InadmissibleMetric("initial metric is not admissible")

    def field_r(t, r):
        K = cr_curvature(cx, r)
        P = _power_sum(r, alpha)
        g = float(K @ r) / P * r**alpha - K
        if gradient:
            g = g / P ** (1.0 / (alpha + 1.0))
        return g

    def guard(t, r):
        return bool(np.all(r > 0)) and admissible_metric_check(cx, r)[0]

    q_alpha = alpha if alpha != -1 else None

    def functional(r):
        return yamabe_functional(cx, r, q_alpha) if q_alpha is not None else math.nan

    icfg = cfg.integrator()
    icfg.guard = guard
    icfg.guard_exceptions = _GUARD_ERRORS
    icfg.max_guard_halvings = 40

    def stop_when(t, r, dr):
        return cfg.stop_on_converge and float(np.max(np.abs(dr))) < cfg.tol

    kind = "gradient3d" if gradient else "alpha3d"
    left = None
    try:
        traj = integrate(field_r, r0, cfg.t_end, icfg, stop_when=stop_when)
    except GuardRejectionAtMinStep as exc:
        traj = exc.trajectory
        left = exc

    trace = FlowTrace(
        kind=kind,
        alpha=float(alpha),
        times=traj.t,
        radii=traj.y.copy(),
        residual=np.max(np.abs(traj.dydt), axis=1),
        conserved=np.sum(traj.y**2, axis=1),
        potential=np.array([functional(r) for r in traj.y]),
        verdict=Verdict.MAX_TIME,
        rate=0.0,
        tol=cfg.tol,
        normalization=factor,
        conserved_name="norm2_sq",
        extra={"n_accepted": traj.n_accepted, "n_rejected": traj.n_rejected, "n_evals": traj.n_evals},
    )
    trace.verdict, trace.rate = check_convergence(trace, cfg.tol)
    if left is not None:
        trace.verdict = Verdict.LEFT_ADMISSIBLE
        raise LeftAdmissibleRegion(
            f"flow cannot continue inside the admissible region past t={left.t:.12g}",
            t=left.t,
            state=left.state,
            trace=trace,
        ) from left
    return trace


def integrate_alpha_flow_3d(cx: TetComplex, r0, cfg: FlowConfig) -> FlowTrace:
    """Integrate ``dr_i/dt = s_alpha r_i^alpha - K_i`` from ``r0`` rescaled to the unit sphere.

    Raises :class:`LeftAdmissibleRegion` (carrying the partial trace) when a
    step cannot stay admissible even after 40 halvings.
    """
    return _run3d(cx, r0, cfg, gradient=False)


def integrate_gradient_flow_3d(cx: TetComplex, r0, cfg: FlowConfig) -> FlowTrace:
    """Negative gradient flow of the alpha-functional, ``dr/dt = (s_alpha r^alpha - K) / ||r||_{alpha+1}``."""
    return _run3d(cx, r0, cfg, gradient=True)


# -- stability -------------------------------------------------------------------


@dataclass
class StabilityReport:
    alpha: float
    lambda1: float
    alpha_s: float
    stable: bool
    minus_dgamma: np.ndarray
    eigenvalues: np.ndarray
    tangent_eigenvalues: np.ndarray
    kernel_residual: float
    curvature_defect: float

    @property
    def verdict(self) -> str:
        return "Stable" if self.stable else "Inconclusive"

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "lambda1": self.lambda1,
            "alpha_s": self.alpha_s,
            "verdict": self.verdict,
            "eigenvalues": self.eigenvalues.tolist(),
            "tangent_eigenvalues": self.tangent_eigenvalues.tolist(),
            "kernel_residual": self.kernel_residual,
            "curvature_defect": self.curvature_defect,
            "minus_dgamma": self.minus_dgamma.tolist(),
        }


def stability_analysis(cx: TetComplex, r_star, alpha: float, curvature_tol: float = 1e-8) -> StabilityReport:
    """Linear stability of a constant alpha-curvature metric under the 3D alpha-flow.

    Stable when the first positive eigenvalue of ``-Delta_alpha`` exceeds
    ``alpha * s_alpha``; then ``-DGamma`` is positive semi-definite of rank
    ``N - 1`` with kernel spanned by ``r_star``.
    """
    r = require_admissible(cx, r_star)
    K = cr_curvature(cx, r)
    P = _power_sum(r, alpha)
    s = float(K @ r) / P
    defect = float(np.max(np.abs(K / r**alpha - s)))
    if defect > curvature_tol * max(1.0, abs(s)):
        raise NotConstantCurvature(f"alpha-curvature varies by {defect:.3e}")

    Lam = curvature_jacobian_r(cx, r)
    lam1 = lambda1_3d(Lam, r, alpha)
    ra = r**alpha
    minus_dg = Lam - alpha * s * (np.diag(r ** (alpha - 1.0)) - np.outer(ra, ra) / P)
    minus_dg = 0.5 * (minus_dg + minus_dg.T)
    eig = jacobi_eigh(minus_dg)[0]
    Q = complement_basis(r)
    tangent = jacobi_eigh(Q.T @ minus_dg @ Q)[0]
    k = r / np.linalg.norm(r)
    return StabilityReport(
        alpha=float(alpha),
        lambda1=lam1,
        alpha_s=alpha * s,
        stable=bool(lam1 > alpha * s),
        minus_dgamma=minus_dg,
        eigenvalues=eig,
        tangent_eigenvalues=tangent,
        kernel_residual=float(np.max(np.abs(minus_dg @ k))),
        curvature_defect=defect,
    )


def yamabe_invariant_estimate(
    cx: TetComplex, alpha: float, starts: int = 8, cfg: FlowConfig | None = None, seed: int = 0
):
    """Upper bound on ``inf Q_alpha`` from multistart gradient-flow runs.

    Start 0 is the equal-radius metric; the rest are random admissible
    metrics from ``numpy.random.default_rng(seed)``.  Returns
    ``(estimate, best_metric, per_start_values)``; failed starts record NaN.
    """
    if not alpha > -1:
        raise AlphaExcluded("the invariant is only defined for alpha > -1")
    if starts < 1:
        raise ConfigError("need at least one start")
    cfg = cfg or FlowConfig()
    cfg = FlowConfig(**{**cfg.__dict__, "alpha": alpha})
    rng = np.random.default_rng(seed)
    best, best_r = math.inf, None
    values = []
    for k in range(starts):
        if k == 0:
            r0 = np.ones(cx.vertex_count)
        else:
            r0 = random_admissible_metric(cx, rng)
        try:
            tr = integrate_gradient_flow_3d(cx, r0, cfg)
        except (LeftAdmissibleRegion, InadmissibleMetric):
            values.append(math.nan)
            continue
        q = float(tr.potential[-1])
        values.append(q)
        if q < best:
            best, best_r = q, tr.final_radii
    return best, best_r, values

"""Explicit Runge-Kutta integration with step guards and accepted-step hooks.

The adaptive method is the Dormand-Prince 4(5) pair, propagating the 5th
order solution (local extrapolation) and using the 4th order embedded
solution for the error estimate.  Steps are controlled by a PI controller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, GuardRejectionAtMinStep, MaxStepsExceeded

Field = Callable[[float, np.ndarray], np.ndarray]

# Dormand & Prince (1980), RK5(4)7M
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass
class IntegratorConfig:
    """Integrator settings.

    ``guard(t, y)`` is consulted on every trial state (stage states included);
    a ``False`` return, or one of ``guard_exceptions`` raised by the field,
    rejects the step and halves it.  ``monitors`` are called as
    ``m(t, y, dydt)`` on each accepted state.
    """

    method: str = "RK45"
    atol: float = 1e-10
    rtol: float = 1e-10
    h0: float | None = None
    h_min: float = 1e-12
    h_max: float = math.inf
    max_steps: int = 200_000
    guard: Callable[[float, np.ndarray], bool] | None = None
    guard_exceptions: tuple = ()
    max_guard_halvings: int = 40
    monitors: Sequence[Callable] = field(default_factory=tuple)
    safety: float = 0.9
    min_factor: float = 0.2
    max_factor: float = 5.0

    def validate(self) -> None:
        if self.method not in ("RK45", "RK4"):
            raise ConfigError(f"unknown method {self.method!r}")
        if not (self.atol > 0 and self.rtol > 0):
            raise ConfigError("tolerances must be positive")
        if not self.h_min > 0:
            raise ConfigError("h_min must be positive")
        if self.method == "RK4" and not (self.h0 and self.h0 > 0):
            raise ConfigError("fixed-step RK4 needs a positive h0")
        if self.max_steps <= 0:
            raise ConfigError("max_steps must be positive")


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray
    dydt: np.ndarray
    stopped: bool
    n_accepted: int
    n_rejected: int
    n_evals: int

    @property
    def t_final(self) -> float:
        return float(self.t[-1])

    @property
    def y_final(self) -> np.ndarray:
        return self.y[-1]


class _Rejected(Exception):
    pass


def _initial_step(f, t0, y0, f0, order, atol, rtol):
    scale = atol + np.abs(y0) * rtol
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = f(t0 + h0, y1)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / (order + 1))
    return min(100 * h0, h1)


def integrate(
    f: Field,
    y0,
    t_end: float,
    cfg: IntegratorConfig | None = None,
    stop_when: Callable[[float, np.ndarray, np.ndarray], bool] | None = None,
    t0: float = 0.0,
) -> Trajectory:
    """Integrate ``dy/dt = f(t, y)`` from ``t0`` to ``t_end``.

    Every accepted state is recorded.  ``stop_when(t, y, dydt)`` ends the run
    early at the first accepted state where it returns true.
    """
    cfg = cfg or IntegratorConfig()
    cfg.validate()
    if not t_end > t0:
        raise ConfigError("t_end must exceed the start time")

    y = np.array(y0, dtype=float)
    guard = cfg.guard
    if guard is not None and not guard(t0, y):
        raise ConfigError("guard rejects the initial state")
    n_evals = 0

    def feval(t, yy):
        nonlocal n_evals
        n_evals += 1
        if cfg.guard_exceptions:
            try:
                return np.asarray(f(t, yy), dtype=float)
            except cfg.guard_exceptions as exc:
                raise _Rejected() from exc
        return np.asarray(f(t, yy), dtype=float)

    def check(t, yy):
        if guard is not None and not guard(t, yy):
            raise _Rejected()

    t = float(t0)
    fy = feval(t, y)
    ts, ys, fs = [t], [y.copy()], [fy.copy()]
    for m in cfg.monitors:
        m(t, y, fy)
    if stop_when is not None and stop_when(t, y, fy):
        return Trajectory(np.array(ts), np.array(ys), np.array(fs), True, 0, 0, n_evals)

    if cfg.method == "RK45":
        h = cfg.h0 if cfg.h0 else _initial_step(feval, t, y, fy, 4, cfg.atol, cfg.rtol)
    else:
        h = cfg.h0
    h = min(h, cfg.h_max)
    err_prev = 1.0
    n_acc = n_rej = 0
    stopped = False
    halvings = 0
    span = t_end - t0

    while t < t_end and not stopped:
        if n_acc + n_rej >= cfg.max_steps:
            raise MaxStepsExceeded(f"no arrival at t={t_end} within {cfg.max_steps} steps", t=t, state=y)
        last = t + h >= t_end - 1e-14 * span
        h_try = t_end - t if last else h
        try:
            if cfg.method == "RK45":
                y_new, f_new, err = _dp_step(feval, check, t, y, fy, h_try, cfg)
            else:
                y_new, f_new = _rk4_step(feval, check, t, y, fy, h_try)
                err = 0.0
        except _Rejected:
            halvings += 1
            n_rej += 1
            h = 0.5 * h_try
            if halvings > cfg.max_guard_halvings or h < cfg.h_min:
                exc = GuardRejectionAtMinStep(
                    f"guard keeps rejecting steps near t={t:.12g}", t=t, state=y.copy()
                )
                exc.trajectory = Trajectory(np.array(ts), np.array(ys), np.array(fs), False, n_acc, n_rej, n_evals)
                raise exc from None
            continue

        if err > 1.0:
            n_rej += 1
            factor = max(cfg.min_factor, cfg.safety * err ** (-0.2))
            h = h_try * min(1.0, factor)
            continue

        halvings = 0
        t = t_end if last else t + h_try
        y, fy = y_new, f_new
        n_acc += 1
        ts.append(t)
        ys.append(y.copy())
        fs.append(fy.copy())
        for m in cfg.monitors:
            m(t, y, fy)
        if stop_when is not None and stop_when(t, y, fy):
            stopped = True

        if cfg.method == "RK45":
            e = max(err, 1e-10)
            factor = cfg.safety * e ** (-0.7 / 5) * err_prev ** (0.4 / 5)
            factor = min(cfg.max_factor, max(cfg.min_factor, factor))
            h = min(h_try * factor, cfg.h_max)
            err_prev = e
        else:
            h = cfg.h0

    return Trajectory(np.array(ts), np.array(ys), np.array(fs), stopped, n_acc, n_rej, n_evals)


def _dp_step(f, check, t, y, f0, h, cfg):
    k = [f0]
    for s in range(1, 7):
        ys = y + h * np.dot(_A[s], k)
        check(t + _C[s] * h, ys)
        k.append(f(t + _C[s] * h, ys))
    # stage 7 is evaluated at the 5th order solution (FSAL)
    y_new = y + h * np.dot(_B5[:6], k[:6])
    err_vec = h * np.dot(_E, k)
    scale = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y_new))
    err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))
    return y_new, k[6], err


def _rk4_step(f, check, t, y, f0, h):
    k1 = f0
    y2 = y + 0.5 * h * k1
    check(t + 0.5 * h, y2)
    k2 = f(t + 0.5 * h, y2)
    y3 = y + 0.5 * h * k2
    check(t + 0.5 * h, y3)
    k3 = f(t + 0.5 * h, y3)
    y4 = y + h * k3
    check(t + h, y4)
    k4 = f(t + h, y4)
    y_new = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    check(t + h, y_new)
    return y_new, f(t + h, y_new)

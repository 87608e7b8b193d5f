"""Explicit time integration: adaptive embedded SSP-RK3(2) and fixed-CFL stepping.

The integrator is the four-stage third-order strong-stability-preserving
Runge-Kutta method (SSP coefficient 2), with second-order embedded weights
for the error estimate:

    c = [0, 1/2, 1, 1/2]
    A = [[.], [1/2], [1/2, 1/2], [1/6, 1/6, 1/6]]
    b = [1/6, 1/6, 1/6, 1/2]      (third order)
    b_hat = [1/4, 1/4, 1/4, 1/4]  (second order)

Step control uses a weighted RMS error norm with absolute/relative
tolerances and a PI controller. Stage evaluations that raise
AdmissibilityError are treated as step rejections; persistent rejection
drives dt below the underflow floor and aborts with the failure origin.
"""

from dataclasses import dataclass

import numpy as np

from esdg1d.errors import AdmissibilityError, IntegrationFailure

SSP_C = np.array([0.0, 0.5, 1.0, 0.5])
SSP_A = [
    np.array([]),
    np.array([0.5]),
    np.array([0.5, 0.5]),
    np.array([1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]),
]
SSP_B = np.array([1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 0.5])
SSP_B_EMBEDDED = np.array([0.25, 0.25, 0.25, 0.25])


@dataclass
class TimeController:
    """Adaptive step-size state: tolerances, PI gains, bounds, counters."""

    abs_tol: float = 1e-8
    rel_tol: float = 1e-6
    safety: float = 0.9
    pi_alpha: float = 0.7 / 3.0
    pi_beta: float = 0.4 / 3.0
    factor_min: float = 0.2
    factor_max: float = 5.0
    dt: float = 0.0
    dt_max: float = np.inf
    err_prev: float = 1.0
    n_accepted: int = 0
    n_rejected: int = 0
    n_inadmissible: int = 0
    _just_rejected: bool = False

    def error_norm(self, u_old, u_new, diff):
        w = self.abs_tol + self.rel_tol * np.maximum(np.abs(u_old), np.abs(u_new))
        return float(np.sqrt(np.mean((diff / w) ** 2)))

    def on_accept(self, err):
        self.n_accepted += 1
        err = max(err, 1e-10)
        factor = self.safety * err**-self.pi_alpha * self.err_prev**self.pi_beta
        # no growth directly after a rejection, standard anti-thrashing cap
        cap = 1.0 if self._just_rejected else self.factor_max
        factor = min(cap, max(self.factor_min, factor))
        self.err_prev = err
        self._just_rejected = False
        self.dt = min(self.dt * factor, self.dt_max)

    def on_reject(self, err):
        self.n_rejected += 1
        self._just_rejected = True
        factor = max(self.factor_min, self.safety * err ** (-1.0 / 3.0))
        self.dt *= min(factor, 0.9)

    def on_inadmissible(self):
        self.n_rejected += 1
        self.n_inadmissible += 1
        self._just_rejected = True
        self.dt *= 0.25


def initial_step_size(rhs, u0, t0, controller):
    """Crude starting step from the size of the initial slope."""
    f0 = rhs(u0, t0)
    w = controller.abs_tol + controller.rel_tol * np.abs(u0)
    d0 = np.sqrt(np.mean((u0 / w) ** 2))
    d1 = np.sqrt(np.mean((f0 / w) ** 2))
    dt = 0.01 * d0 / max(d1, 1e-8)
    return min(max(dt, 1e-10), controller.dt_max)


def ssprk43_step(rhs, u, t, dt, stage_callback=None):
    """One fixed step; returns (u_new, u_embedded)."""
    k = []
    for i in range(4):
        ui = u if i == 0 else u + dt * sum(a * kj for a, kj in zip(SSP_A[i], k))
        ki = rhs(ui, t + SSP_C[i] * dt)
        if stage_callback is not None:
            stage_callback(t + SSP_C[i] * dt, ui, ki)
        k.append(ki)
    u_new = u + dt * sum(b * kj for b, kj in zip(SSP_B, k))
    u_emb = u + dt * sum(b * kj for b, kj in zip(SSP_B_EMBEDDED, k))
    return u_new, u_emb


def step_adaptive(rhs, u, t, controller, admissible=None, stage_callback=None):
    """One attempted adaptive step: (u_next, t_next, dt_next, accepted).

    A rejected attempt returns the inputs unchanged except for a reduced
    controller.dt; callers retry. ``admissible`` optionally screens the
    candidate state before acceptance.
    """
    dt = controller.dt
    try:
        u_new, u_emb = ssprk43_step(rhs, u, t, dt, stage_callback)
    except AdmissibilityError:
        controller.on_inadmissible()
        return u, t, controller.dt, False
    err = controller.error_norm(u, u_new, u_new - u_emb)
    if not np.isfinite(err) or (admissible is not None and not admissible(u_new)):
        controller.on_inadmissible()
        return u, t, controller.dt, False
    if err <= 1.0:
        controller.on_accept(err)
        return u_new, t + dt, controller.dt, True
    controller.on_reject(err)
    return u, t, controller.dt, False


def integrate_adaptive(
    rhs,
    u0,
    t0,
    t_end,
    controller,
    admissible=None,
    stage_callback=None,
    step_callback=None,
    max_steps=1_000_000,
):
    """Drive step_adaptive from t0 to t_end.

    Raises IntegrationFailure on step-size underflow or when the attempt
    budget is exhausted; the failure origin is "admissibility" whenever
    inadmissible states forced rejections along the way.
    """
    u, t = u0, t0
    if controller.dt <= 0.0:
        controller.dt = initial_step_size(rhs, u0, t0, controller)
    dt_floor = 1e-14 * max(abs(t_end - t0), abs(t_end))
    attempts = 0
    while t < t_end:
        controller.dt = min(controller.dt, t_end - t)
        origin = "admissibility" if controller.n_inadmissible > 0 else "tolerance"
        if controller.dt < dt_floor:
            raise IntegrationFailure(
                f"step size underflow at t = {t:.8g} (dt = {controller.dt:.3g})",
                time_reached=t,
                origin=origin,
            )
        if attempts >= max_steps:
            raise IntegrationFailure(
                f"step budget of {max_steps} exhausted at t = {t:.8g}",
                time_reached=t,
                origin=origin if controller.n_inadmissible > 0 else "max_steps",
            )
        u, t, _, accepted = step_adaptive(rhs, u, t, controller, admissible, stage_callback)
        attempts += 1
        if accepted and step_callback is not None:
            step_callback(t, u)
    return u, t


def step_fixed_cfl(rhs, u, t, cfl, h, max_wavespeed, stage_callback=None):
    """One SSPRK43 step with dt = cfl * h / max wavespeed; returns (u_next, t_next)."""
    if cfl <= 0.0:
        raise ValueError(f"cfl must be positive, got {cfl}")
    lam = float(max_wavespeed(u))
    if not np.isfinite(lam) or lam <= 0.0:
        raise AdmissibilityError("wavespeed not finite", time=t)
    dt = cfl * h / lam
    u_new, _ = ssprk43_step(rhs, u, t, dt, stage_callback)
    return u_new, t + dt


def integrate_fixed_cfl(rhs, u0, t0, t_end, cfl, h, max_wavespeed, stage_callback=None, step_callback=None):
    """Drive step_fixed_cfl to exactly t_end (last step clipped)."""
    if cfl <= 0.0:
        raise ValueError(f"cfl must be positive, got {cfl}")
    u, t = u0, t0
    n = 0
    while t < t_end:
        lam = float(max_wavespeed(u))
        if not np.isfinite(lam) or lam <= 0.0:
            raise AdmissibilityError("wavespeed not finite", time=t)
        dt = min(cfl * h / lam, t_end - t)
        u, _ = ssprk43_step(rhs, u, t, dt, stage_callback)
        t = t + dt
        n += 1
        if step_callback is not None:
            step_callback(t, u)
    return u, t, n

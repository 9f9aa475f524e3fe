"""Time integration and the perturbed-energy (Lyapunov) functionals.

The workhorse is an IMEX Crank--Nicolson step: the linear stiff terms
(nu*u_xx, the viscous b*v_xx, and linear damping b*v) are advanced with the
trapezoidal rule, while the source terms (a*u, the monotone nonlinearity,
nonlinear velocity damping, and the feedback) are evaluated explicitly at
the half step.  Eliminating the displacement update leaves one tridiagonal
solve per step.  On the undamped linear wave the scheme reduces to plain
Crank--Nicolson and conserves the discrete energy to round-off, because the
discrete Laplacian is exactly self-adjoint under the trapezoid weights and
the H1 seminorm is its associated quadratic form.

An explicit RK4 stepper is provided for cross-checks; it refuses the
strongly damped family (the viscous term makes the problem parabolic-stiff)
and enforces the wave CFL budget dt <= 0.5*dx/sqrt(nu).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from . import kernels
from .controllers import (
    ControllerSpec,
    FourierModes,
    SubdomainControl,
    VolumeElements,
    controller_energy,
    make_control_operator,
    make_energy_operator,
)
from .grid import BoundaryCondition, Field, Grid1D, State, h1_seminorm, l2_inner
from .models import EnergyRecord, Family, ModelSpec, energy_record

__all__ = [
    "Scheme",
    "StepperConfig",
    "RunResult",
    "step",
    "run",
    "default_dt",
    "lyapunov_volume",
    "lyapunov_eb",
    "EnergyRecord",
]

BLOWUP_LIMIT = 1.0e12


class Scheme(str, enum.Enum):
    IMEX_CN = "imex_cn"
    RK4 = "rk4"


@dataclass(frozen=True)
class StepperConfig:
    """Time-stepping parameters.

    ``record_every`` controls energy-ledger cadence in steps; the initial
    state and the final step are always recorded.
    """

    dt: float
    t_end: float
    scheme: Scheme = Scheme.IMEX_CN
    record_every: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise ValueError(f"dt must be positive and finite, got {self.dt}")
        if not (math.isfinite(self.t_end) and self.t_end >= 0.0):
            raise ValueError(f"t_end must be >= 0, got {self.t_end}")
        if self.t_end > 0.0 and self.dt > self.t_end:
            raise ValueError(f"dt={self.dt} exceeds t_end={self.t_end}")
        if self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every}")
        if not isinstance(self.scheme, Scheme):
            object.__setattr__(self, "scheme", Scheme(self.scheme))


def default_dt(grid: Grid1D) -> float:
    """Desk-scale default: min(0.25*dx, 1e-2)."""
    return min(0.25 * grid.dx, 1.0e-2)


@dataclass
class RunResult:
    """Trajectory summary: energy ledger plus blow-up bookkeeping."""

    records: list[EnergyRecord]
    final_state: State
    blowup_time: Optional[float] = None
    snapshots: Optional[list[State]] = None

    @property
    def blew_up(self) -> bool:
        return self.blowup_time is not None


# ---------------------------------------------------------------------------
# steppers
# ---------------------------------------------------------------------------

def _lap_for(bc: BoundaryCondition):
    if bc is BoundaryCondition.DIRICHLET:
        return kernels.laplacian_dirichlet
    return kernels.laplacian_neumann


class _ImexStepper:
    """One assembled IMEX Crank--Nicolson update u,v -> u,v."""

    def __init__(self, model: ModelSpec, grid: Grid1D, dt: float, ctl: Callable):
        self.model = model
        self.grid = grid
        self.dt = dt
        self.ctl = ctl
        self.lap = _lap_for(grid.bc)
        self.c_lin = model.b if model.family is Family.DAMPED_WAVE else 0.0
        self.beta = model.b if model.family is Family.STRONGLY_DAMPED else 0.0
        kappa = 0.5 * dt * self.beta + 0.25 * dt * dt * model.nu
        inv_dx2 = 1.0 / grid.dx**2
        n = grid.n_nodes
        s = 1.0 + 0.5 * dt * self.c_lin
        self.diag = np.full(n, s + 2.0 * kappa * inv_dx2)
        self.lower = np.full(n, -kappa * inv_dx2)
        self.upper = np.full(n, -kappa * inv_dx2)
        if grid.bc is BoundaryCondition.NEUMANN:
            # reflected ghosts double the off-diagonal coupling at both ends
            self.upper[0] = -2.0 * kappa * inv_dx2
            self.lower[-1] = -2.0 * kappa * inv_dx2

    def _explicit_half(self, u, v, lap_u):
        """Source terms at the predicted half step."""
        mdl = self.model
        dt = self.dt
        u_star = u + 0.5 * dt * v
        if mdl.family is Family.DAMPED_WAVE:
            return u_star, mdl.a * u_star - mdl.nonlinearity.f(u_star) + self.ctl(u_star)
        if mdl.family is Family.NONLINEAR_DAMPING:
            damp = mdl.b * np.abs(v) ** (mdl.m - 2.0) * v
            accel = mdl.nu * lap_u + mdl.a * u - np.abs(u) ** (mdl.p - 2.0) * u - damp + self.ctl(u)
            v_star = v + 0.5 * dt * accel
            g = (
                mdl.a * u_star
                - np.abs(u_star) ** (mdl.p - 2.0) * u_star
                - mdl.b * np.abs(v_star) ** (mdl.m - 2.0) * v_star
                + self.ctl(u_star)
            )
            return u_star, g
        # strongly damped
        return u_star, mdl.a * u_star - np.abs(u_star) ** (mdl.p - 2.0) * u_star + self.ctl(u_star)

    def advance(self, u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        mdl = self.model
        dt = self.dt
        lap_u = self.lap(u, self.grid.dx)
        u_star, g_half = self._explicit_half(u, v, lap_u)
        r_v = v + 0.5 * dt * (mdl.nu * lap_u - self.c_lin * v) + dt * g_half
        if self.beta != 0.0:
            r_v += 0.5 * dt * self.beta * self.lap(v, self.grid.dx)
        rhs = r_v + 0.5 * dt * mdl.nu * self.lap(u_star, self.grid.dx)
        v_new = kernels.thomas_solve(self.lower, self.diag, self.upper, rhs)
        u_new = u_star + 0.5 * dt * v_new
        return u_new, v_new


class _RK4Stepper:
    """Classical explicit RK4 on the first-order system."""

    def __init__(self, model: ModelSpec, grid: Grid1D, dt: float, ctl: Callable):
        if model.family is Family.STRONGLY_DAMPED:
            raise ValueError(
                "explicit RK4 cannot integrate the strongly damped family; use imex_cn"
            )
        budget = 0.5 * grid.dx / math.sqrt(model.nu)
        if dt > budget:
            raise ValueError(
                f"dt={dt:.6g} exceeds the RK4 stability budget 0.5*dx/sqrt(nu)={budget:.6g}"
            )
        self.model = model
        self.grid = grid
        self.dt = dt
        self.ctl = ctl
        self.lap = _lap_for(grid.bc)

    def _accel(self, u, v):
        mdl = self.model
        lap_u = self.lap(u, self.grid.dx)
        if mdl.family is Family.DAMPED_WAVE:
            return mdl.nu * lap_u - mdl.b * v + mdl.a * u - mdl.nonlinearity.f(u) + self.ctl(u)
        damp = mdl.b * np.abs(v) ** (mdl.m - 2.0) * v
        return mdl.nu * lap_u - damp + mdl.a * u - np.abs(u) ** (mdl.p - 2.0) * u + self.ctl(u)

    def advance(self, u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        dt = self.dt
        k1u, k1v = v, self._accel(u, v)
        k2u, k2v = v + 0.5 * dt * k1v, self._accel(u + 0.5 * dt * k1u, v + 0.5 * dt * k1v)
        k3u, k3v = v + 0.5 * dt * k2v, self._accel(u + 0.5 * dt * k2u, v + 0.5 * dt * k2v)
        k4u, k4v = v + dt * k3v, self._accel(u + dt * k3u, v + dt * k3v)
        u_new = u + dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        v_new = v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        return u_new, v_new


def _make_stepper(model: ModelSpec, grid: Grid1D, cfg: StepperConfig, ctl: Callable):
    if cfg.scheme is Scheme.IMEX_CN:
        return _ImexStepper(model, grid, cfg.dt, ctl)
    return _RK4Stepper(model, grid, cfg.dt, ctl)


def step(state: State, model: ModelSpec, ctrl: ControllerSpec, cfg: StepperConfig) -> State:
    """Advance one step of ``cfg.dt`` (convenience wrapper around run's core)."""
    ctl = make_control_operator(ctrl, state.grid)
    stepper = _make_stepper(model, state.grid, cfg, ctl)
    u_new, v_new = stepper.advance(state.u.values, state.v.values)
    return State(Field(state.grid, u_new), Field(state.grid, v_new), state.t + cfg.dt)


# ---------------------------------------------------------------------------
# Lyapunov functionals
# ---------------------------------------------------------------------------

def lyapunov_volume(
    state: State, model: ModelSpec, ctrl: VolumeElements, eps: Optional[float] = None
) -> float:
    """Perturbed energy for the cell-average loop (default eps = b/2).

    Phi_eps = 1/2||v||^2 + nu/2||u_x||^2 + 1/2(eps*b - a)||u||^2
              + int F(u) + 1/2*h*mu*sum(ubar_k^2) + eps*(u, v)

    The sign of the quadratic term follows from requiring the (u, v) cross
    term to cancel in d/dt Phi; with it, Phi obeys
    d/dt Phi + delta0 * Phi <= 0 under the volume gain conditions.
    """
    if not isinstance(ctrl, VolumeElements):
        raise TypeError("lyapunov_volume expects a volume-element controller")
    if eps is None:
        eps = 0.5 * model.b
    u, v = state.u, state.v
    gx = h1_seminorm(u)
    w = state.grid.quad_weights
    potential = float(np.dot(w, model.nonlinearity.F(u.values)))
    return (
        0.5 * l2_inner(v, v)
        + 0.5 * model.nu * gx * gx
        + 0.5 * (eps * model.b - model.a) * l2_inner(u, u)
        + potential
        + controller_energy(ctrl, state)
        + eps * l2_inner(u, v)
    )


def lyapunov_eb(state: State, model: ModelSpec, ctrl: ControllerSpec, variant: str) -> float:
    """Perturbed energies for the spectral and subdomain loops.

    variant
        ``"fourier"``   E_b with cross weight b/2 and quadratic term
                        (b^2/4 - a/2)||u||^2, for modal feedback on the
                        linearly damped wave;
        ``"subdomain"`` same structure with the localized quadratic
                        controller term;
        ``"strong"``    E_eps with eps = b*lam1/2 and stiffened gradient
                        weight (nu + eps*b)/2, for the strongly damped wave.
    """
    u, v = state.u, state.v
    gx = h1_seminorm(u)
    w = state.grid.quad_weights
    potential = float(np.dot(w, model.nonlinearity.F(u.values)))
    ctrl_term = controller_energy(ctrl, state)
    b, a, nu = model.b, model.a, model.nu
    if variant == "fourier":
        if not isinstance(ctrl, FourierModes):
            raise TypeError("fourier variant expects modal feedback")
        return (
            0.5 * l2_inner(v, v)
            + 0.5 * nu * gx * gx
            + (0.25 * b * b - 0.5 * a) * l2_inner(u, u)
            + potential
            + ctrl_term
            + 0.5 * b * l2_inner(u, v)
        )
    if variant == "subdomain":
        if not isinstance(ctrl, SubdomainControl):
            raise TypeError("subdomain variant expects localized feedback")
        return (
            0.5 * l2_inner(v, v)
            + 0.5 * nu * gx * gx
            + (0.25 * b * b - 0.5 * a) * l2_inner(u, u)
            + potential
            + ctrl_term
            + 0.5 * b * l2_inner(u, v)
        )
    if variant == "strong":
        if not isinstance(ctrl, FourierModes):
            raise TypeError("strong variant expects modal feedback")
        lam1 = (np.pi / state.grid.L) ** 2
        eps = 0.5 * b * lam1
        return (
            0.5 * l2_inner(v, v)
            + 0.5 * (nu + eps * b) * gx * gx
            - 0.5 * a * l2_inner(u, u)
            + potential
            + ctrl_term
            + eps * l2_inner(u, v)
        )
    raise ValueError(f"unknown Lyapunov variant {variant!r}")


def _auto_lyapunov(model: ModelSpec, ctrl: ControllerSpec) -> Optional[Callable[[State], float]]:
    if isinstance(ctrl, VolumeElements):
        return lambda st: lyapunov_volume(st, model, ctrl)
    if isinstance(ctrl, FourierModes) and model.family is Family.DAMPED_WAVE:
        return lambda st: lyapunov_eb(st, model, ctrl, "fourier")
    if isinstance(ctrl, FourierModes) and model.family is Family.STRONGLY_DAMPED:
        return lambda st: lyapunov_eb(st, model, ctrl, "strong")
    if isinstance(ctrl, SubdomainControl):
        return lambda st: lyapunov_eb(st, model, ctrl, "subdomain")
    return None


# ---------------------------------------------------------------------------
# trajectory driver
# ---------------------------------------------------------------------------

def run(
    model: ModelSpec,
    ctrl: ControllerSpec,
    u0: Field,
    u1: Field,
    cfg: StepperConfig,
    *,
    lyapunov: str = "auto",
    snapshot_every: Optional[int] = None,
) -> RunResult:
    """Integrate from (u0, u1) to t_end, sampling the energy ledger.

    Blow-up (any nodal magnitude above 1e12, or non-finite values) aborts
    the loop and is reported through ``RunResult.blowup_time``; the records
    collected so far are kept.  Identical inputs produce bit-identical
    trajectories.
    """
    if u0.grid != u1.grid:
        raise ValueError("u0 and u1 live on different grids")
    grid = u0.grid
    if grid.bc is not model.bc:
        raise ValueError(
            f"model is posed with {model.bc.value} boundaries, grid has {grid.bc.value}"
        )
    if lyapunov not in ("auto", "none"):
        raise ValueError("lyapunov must be 'auto' or 'none'")

    ctl = make_control_operator(ctrl, grid)
    energy_op = make_energy_operator(ctrl, grid)
    stepper = _make_stepper(model, grid, cfg, ctl)
    lyap_fn = _auto_lyapunov(model, ctrl) if lyapunov == "auto" else None

    def make_record(u: np.ndarray, v: np.ndarray, t: float) -> EnergyRecord:
        st = State(Field(grid, u), Field(grid, v), t)
        rec = energy_record(st, model, energy_op(u))
        if lyap_fn is not None:
            rec = replace(rec, lyapunov=lyap_fn(st))
        return rec

    u = u0.values.copy()
    v = u1.values.copy()
    records = [make_record(u, v, 0.0)]
    snapshots = None
    if snapshot_every is not None:
        if snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")
        snapshots = [State(Field(grid, u), Field(grid, v), 0.0)]

    n_steps = int(round(cfg.t_end / cfg.dt)) if cfg.t_end > 0.0 else 0
    blowup_time = None
    t = 0.0
    u_prev, v_prev, t_prev = u, v, t
    for k in range(1, n_steps + 1):
        u_prev, v_prev, t_prev = u, v, t
        u, v = stepper.advance(u, v)
        t = k * cfg.dt
        peak = max(np.max(np.abs(u)), np.max(np.abs(v)))
        if not np.isfinite(peak) or peak > BLOWUP_LIMIT:
            blowup_time = t
            break
        if k % cfg.record_every == 0 or k == n_steps:
            records.append(make_record(u, v, t))
        if snapshots is not None and (k % snapshot_every == 0 or k == n_steps):
            snapshots.append(State(Field(grid, u), Field(grid, v), t))

    if blowup_time is not None:
        # the aborting step may hold non-finite values; keep the last good state
        final = State(Field(grid, u_prev), Field(grid, v_prev), t_prev)
    else:
        final = State(Field(grid, u), Field(grid, v), t)
    return RunResult(
        records=records,
        final_state=final,
        blowup_time=blowup_time,
        snapshots=snapshots,
    )

"""Wave-equation families on (0, L) and their energy bookkeeping.

Three families share the first-order form u_t = v, v_t = acceleration:

* ``DAMPED_WAVE``:      v_t = nu*u_xx - b*v + a*u - f(u) + control
* ``NONLINEAR_DAMPING``: v_t = nu*u_xx - b*|v|^(m-2)*v + a*u - |u|^(p-2)*u + control
* ``STRONGLY_DAMPED``:  v_t = nu*u_xx + b*v_xx + a*u - |u|^(p-2)*u + control

The linear ``a*u`` term is destabilizing (it is what the feedback has to
beat); damping and the monotone nonlinearity dissipate.  The power-law
nonlinearity is hard-wired for the second and third family; the first
admits any monotone source term satisfying the sign condition below.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .grid import (
    BoundaryCondition,
    Field,
    State,
    h1_seminorm,
    l2_inner,
    laplacian_apply,
)


class Family(str, enum.Enum):
    DAMPED_WAVE = "damped_wave"
    NONLINEAR_DAMPING = "nonlinear_damping"
    STRONGLY_DAMPED = "strongly_damped"


@dataclass(frozen=True)
class Nonlinearity:
    """Monotone source term f with antiderivative F (F(0) = 0).

    Admissibility (checked by :func:`condition_f_ok` and enforced for
    custom terms): f(s)*s - F(s) >= 0 and f'(s) >= 0 on the sampled range.
    """

    kind: str
    f: Callable[[np.ndarray], np.ndarray]
    F: Callable[[np.ndarray], np.ndarray]
    p: Optional[float] = None

    @staticmethod
    def zero() -> "Nonlinearity":
        return Nonlinearity("zero", lambda u: np.zeros_like(u), lambda u: np.zeros_like(u))

    @staticmethod
    def power_law(p: float) -> "Nonlinearity":
        """f(u) = |u|^(p-2) u with F(u) = |u|^p / p, p >= 2."""
        if p < 2.0:
            raise ValueError(f"power law needs p >= 2, got {p}")

        def f(u: np.ndarray) -> np.ndarray:
            return np.abs(u) ** (p - 2.0) * u

        def F(u: np.ndarray) -> np.ndarray:
            return np.abs(u) ** p / p

        return Nonlinearity("power", f, F, p=p)

    @staticmethod
    def custom(f: Callable, F: Callable) -> "Nonlinearity":
        nl = Nonlinearity("custom", f, F)
        ok, why = condition_f_ok(nl)
        if not ok:
            raise ValueError(f"inadmissible nonlinearity: {why}")
        return nl


def condition_f_ok(
    nl: Nonlinearity, lo: float = -10.0, hi: float = 10.0, samples: int = 10_000
) -> tuple[bool, str]:
    """Sampled admissibility check for a source term.

    Tests f(s)*s - F(s) >= -1e-12 and a finite-difference f'(s) >= -1e-8
    on a uniform grid of ``samples`` points in [lo, hi].
    """
    s = np.linspace(lo, hi, samples)
    fs = np.asarray(nl.f(s), dtype=float)
    Fs = np.asarray(nl.F(s), dtype=float)
    gap = fs * s - Fs
    if np.min(gap) < -1e-12:
        i = int(np.argmin(gap))
        return False, f"f(s)s - F(s) = {gap[i]:.3e} < 0 at s = {s[i]:.4g}"
    slopes = np.diff(fs) / np.diff(s)
    if np.min(slopes) < -1e-8:
        i = int(np.argmin(slopes))
        return False, f"f'(s) ~ {slopes[i]:.3e} < 0 near s = {s[i]:.4g}"
    return True, "ok"


@dataclass(frozen=True)
class ModelSpec:
    """One concrete PDE instance: family + coefficients + boundary type."""

    family: Family
    nu: float
    a: float
    b: float
    bc: BoundaryCondition
    nonlinearity: Nonlinearity
    m: Optional[float] = None  # damping exponent, NONLINEAR_DAMPING only
    p: Optional[float] = None  # power-law exponent where hard-wired

    def __post_init__(self):
        if self.nu <= 0.0:
            raise ValueError(f"diffusion coefficient nu must be > 0, got {self.nu}")
        if self.a < 0.0:
            raise ValueError(f"destabilizing coefficient a must be >= 0, got {self.a}")
        if self.family is Family.DAMPED_WAVE:
            # b = 0 (no damping at all) is a legitimate conservation test case
            # for this family only; the stabilization theory itself needs b > 0.
            if self.b < 0.0:
                raise ValueError(f"damping coefficient b must be >= 0, got {self.b}")
            if self.m is not None:
                raise ValueError("damping exponent m only applies to nonlinear damping")
        else:
            if self.bc is not BoundaryCondition.DIRICHLET:
                raise ValueError(f"{self.family.value} is posed with Dirichlet boundaries")
            if self.nonlinearity.kind != "power" or self.p is None:
                raise ValueError(f"{self.family.value} hard-wires a power-law source")
            if self.p != self.nonlinearity.p:
                raise ValueError("p disagrees with the attached power law")
        if self.family is Family.NONLINEAR_DAMPING:
            if self.b <= 0.0:
                raise ValueError(f"damping coefficient b must be > 0, got {self.b}")
            if self.m is None or self.m <= 2.0:
                raise ValueError(f"nonlinear damping needs exponent m > 2, got {self.m}")
        elif self.family is Family.STRONGLY_DAMPED:
            if self.b <= 0.0:
                raise ValueError(f"damping coefficient b must be > 0, got {self.b}")
            if self.m is not None:
                raise ValueError("damping exponent m only applies to nonlinear damping")


def damped_wave(
    nu: float,
    a: float,
    b: float,
    bc: BoundaryCondition | str,
    nonlinearity: Nonlinearity | None = None,
) -> ModelSpec:
    if isinstance(bc, str):
        bc = BoundaryCondition(bc)
    nl = nonlinearity if nonlinearity is not None else Nonlinearity.zero()
    return ModelSpec(Family.DAMPED_WAVE, nu, a, b, bc, nl, p=nl.p)


def nonlinear_damping_wave(nu: float, a: float, b: float, m: float, p: float) -> ModelSpec:
    return ModelSpec(
        Family.NONLINEAR_DAMPING,
        nu,
        a,
        b,
        BoundaryCondition.DIRICHLET,
        Nonlinearity.power_law(p),
        m=m,
        p=p,
    )


def strongly_damped_wave(nu: float, a: float, b: float, p: float) -> ModelSpec:
    return ModelSpec(
        Family.STRONGLY_DAMPED,
        nu,
        a,
        b,
        BoundaryCondition.DIRICHLET,
        Nonlinearity.power_law(p),
        p=p,
    )


def acceleration(state: State, model: ModelSpec, control: Field) -> Field:
    """Right-hand side of v_t for the model, including the control term."""
    grid = state.grid
    if grid.bc is not model.bc:
        raise ValueError(f"model is posed with {model.bc.value} boundaries, grid has {grid.bc.value}")
    if control.grid != grid:
        raise ValueError("control field lives on a different grid")
    u = state.u.values
    v = state.v.values
    lap_u = laplacian_apply(state.u).values
    if model.family is Family.DAMPED_WAVE:
        acc = model.nu * lap_u - model.b * v + model.a * u - model.nonlinearity.f(u)
    elif model.family is Family.NONLINEAR_DAMPING:
        acc = (
            model.nu * lap_u
            - model.b * np.abs(v) ** (model.m - 2.0) * v
            + model.a * u
            - np.abs(u) ** (model.p - 2.0) * u
        )
    else:
        lap_v = laplacian_apply(state.v).values
        acc = (
            model.nu * lap_u
            + model.b * lap_v
            + model.a * u
            - np.abs(u) ** (model.p - 2.0) * u
        )
    return Field(grid, acc + control.values)


@dataclass(frozen=True)
class EnergyRecord:
    """One sampled row of the energy ledger along a trajectory.

    ``total = kinetic + grad + quadratic + lp + controller`` and
    ``stab_norm = ||v||^2 + ||u_x||^2`` (the quantity the decay
    certificates control).  ``lyapunov`` is filled only when a run attaches a
    perturbed-energy functional.
    """

    t: float
    kinetic: float
    grad: float
    quadratic: float
    lp: float
    controller: float
    total: float
    stab_norm: float
    lyapunov: Optional[float] = None


def energy_record(state: State, model: ModelSpec, controller_term: float = 0.0) -> EnergyRecord:
    """Evaluate the energy ledger for one state.

    ``controller_term`` is the controller's quadratic energy contribution
    (variant-specific; see ``controllers.controller_energy``).
    """
    vn2 = l2_inner(state.v, state.v)
    kin = 0.5 * vn2
    gx = h1_seminorm(state.u)
    grad = 0.5 * model.nu * gx * gx
    quad = -0.5 * model.a * l2_inner(state.u, state.u)
    w = state.grid.quad_weights
    lp = float(np.dot(w, model.nonlinearity.F(state.u.values)))
    stab = vn2 + gx * gx
    total = kin + grad + quad + lp + controller_term
    return EnergyRecord(
        t=state.t,
        kinetic=kin,
        grad=grad,
        quadratic=quad,
        lp=lp,
        controller=controller_term,
        total=total,
        stab_norm=stab,
    )

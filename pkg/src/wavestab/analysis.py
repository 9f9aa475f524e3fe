"""Decay-rate estimation and the random-sample inequality suite.

``fit_exponential`` regresses log stabilization norm against time over a
trimmed window; ``verify_exponential`` compares the fitted rate against a
certified target with a safety factor and additionally checks a pointwise
envelope.  ``verify_polynomial`` tests algebraic decay by watching whether
the running supremum of ``total_energy(t) * t^alpha`` stabilizes.

``run_inequality_suite`` hammers the finite-parameter interpolation and
spectral inequalities with seeded random trigonometric polynomials and
counts violations against a 1.01 discretization slack.  The printed
mean-plus-gradient constant is checked both as printed and in corrected
form, with the linear-ramp counterexample injected deterministically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .controllers import element_layout
from .grid import (
    BoundaryCondition,
    Field,
    Grid1D,
    h1_seminorm,
    l2_norm,
    make_grid,
)
from .models import EnergyRecord
from .spectral import EigenBasis, mode_matrix

STAB_FLOOR = 1.0e-13
SUITE_SLACK = 1.01


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit of log(stab_norm) over a time window."""

    rate: float
    amplitude: float
    r_squared: float
    window: tuple[float, float]
    n_points: int


@dataclass(frozen=True)
class VerifyExponential:
    ok: bool
    fit: DecayFit
    target_rate: float
    rate_ok: bool
    envelope_ok: bool
    envelope_constant: float


@dataclass(frozen=True)
class VerifyPolynomial:
    ok: bool
    sup_ratio: float
    sup_first: float
    sup_last: float
    alpha: float
    window: tuple[float, float]


def _default_window(records: Sequence[EnergyRecord]) -> tuple[float, float]:
    t_end = records[-1].t
    return (0.2 * t_end, 0.9 * t_end)


def fit_exponential(
    records: Sequence[EnergyRecord], window: Optional[tuple[float, float]] = None
) -> DecayFit:
    """Fit stab_norm ~ amplitude * exp(-rate * t) on the window.

    Records with ``stab_norm <= 1e-13`` (double-precision decay floor for a
    squared quantity) are excluded; at least 20 usable records are required.
    """
    if not records:
        raise ValueError("no records to fit")
    win = window if window is not None else _default_window(records)
    if win[0] >= win[1]:
        raise ValueError(f"empty fit window {win}")
    ts, logs = [], []
    for r in records:
        if win[0] <= r.t <= win[1] and r.stab_norm > STAB_FLOOR:
            ts.append(r.t)
            logs.append(math.log(r.stab_norm))
    if len(ts) < 20:
        raise ValueError(
            f"only {len(ts)} usable records in window {win}; need at least 20"
        )
    t = np.asarray(ts)
    y = np.asarray(logs)
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    ss_res = float(np.dot(resid, resid))
    ss_tot = float(np.dot(y - y.mean(), y - y.mean()))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return DecayFit(
        rate=float(-slope),
        amplitude=float(np.exp(intercept)),
        r_squared=r2,
        window=(float(win[0]), float(win[1])),
        n_points=len(ts),
    )


def verify_exponential(
    records: Sequence[EnergyRecord],
    delta_target: float,
    safety: float = 0.8,
    window: Optional[tuple[float, float]] = None,
) -> VerifyExponential:
    """Check exponential decay of stab_norm against a certified rate.

    Passing requires (i) fitted rate >= safety * delta_target, and (ii) the
    envelope ``stab_norm(t) <= C exp(-safety*delta_target*t)`` to hold over
    the window, with C calibrated on the records before the window starts.
    The outcome is monotone in ``safety``: passing at s implies passing at
    any s' < s.
    """
    if delta_target <= 0.0:
        raise ValueError(f"target rate must be positive, got {delta_target}")
    if not 0.0 < safety <= 1.0:
        raise ValueError(f"safety factor must be in (0, 1], got {safety}")
    win = window if window is not None else _default_window(records)
    fit = fit_exponential(records, win)
    target = safety * delta_target
    rate_ok = fit.rate >= target
    head = [r for r in records if r.t <= win[0]]
    const = max(r.stab_norm * math.exp(target * r.t) for r in head) if head else 0.0
    envelope_ok = True
    for r in records:
        if win[0] <= r.t <= win[1] and r.stab_norm > STAB_FLOOR:
            if r.stab_norm > const * math.exp(-target * r.t) * (1.0 + 1e-9):
                envelope_ok = False
                break
    return VerifyExponential(
        ok=bool(rate_ok and envelope_ok),
        fit=fit,
        target_rate=target,
        rate_ok=bool(rate_ok),
        envelope_ok=envelope_ok,
        envelope_constant=const,
    )


def verify_polynomial(
    records: Sequence[EnergyRecord],
    alpha: float,
    window: tuple[float, float],
) -> VerifyPolynomial:
    """Check algebraic decay: does sup total(t) * t^alpha stop growing?

    The window must start at t >= 1 (the compensator t^alpha is
    meaningless near zero).  Passing means the supremum over the window's
    last quarter exceeds the supremum over its first quarter by at most
    10%: if total decays at least like t^{-alpha}, the compensated curve
    is bounded and the two sups agree; a slower law makes it climb.
    """
    if alpha <= 0.0:
        raise ValueError(f"decay exponent must be positive, got {alpha}")
    if window[0] < 1.0:
        raise ValueError(f"window must start at t >= 1, got {window[0]}")
    if window[0] >= window[1]:
        raise ValueError(f"empty window {window}")
    pts = [(r.t, r.total * r.t**alpha) for r in records if window[0] <= r.t <= window[1]]
    if len(pts) < 8:
        raise ValueError(f"only {len(pts)} records in window {window}; need at least 8")
    span = window[1] - window[0]
    first = [v for t, v in pts if t <= window[0] + 0.25 * span]
    last = [v for t, v in pts if t >= window[0] + 0.75 * span]
    if not first or not last:
        raise ValueError("window quarters contain no records; record more densely")
    sup_first = max(first)
    sup_last = max(last)
    if sup_first <= 0.0:
        raise ValueError("compensated energy is not positive on the first quarter")
    ratio = sup_last / sup_first
    return VerifyPolynomial(
        ok=bool(ratio <= 1.1),
        sup_ratio=float(ratio),
        sup_first=float(sup_first),
        sup_last=float(sup_last),
        alpha=alpha,
        window=(float(window[0]), float(window[1])),
    )


# ---------------------------------------------------------------------------
# inequality suite
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InequalityReport:
    """Violation count for one inequality over the random sample set.

    ``worst_ratio`` is the largest observed lhs/rhs (violation iff
    > 1.01); ``empirical_constant`` is, for the mean-plus-gradient pair,
    the smallest gradient coefficient (in units of h^2 ||f'||^2) that
    would cover every sample, and otherwise simply repeats worst_ratio.
    """

    name: str
    samples: int
    violations: int
    worst_ratio: float
    empirical_constant: float


@dataclass(frozen=True)
class SuiteConfig:
    degree: int = 12
    element_counts: tuple[int, ...] = (2, 4, 8)
    mode_counts: tuple[int, ...] = (1, 2, 3, 4, 5, 6)
    slack: float = SUITE_SLACK


class _Tally:
    def __init__(self, name: str):
        self.name = name
        self.samples = 0
        self.violations = 0
        self.worst_ratio = 0.0
        self.empirical = 0.0

    def add(self, lhs: float, rhs: float, slack: float, empirical: Optional[float] = None):
        self.samples += 1
        ratio = lhs / rhs if rhs > 0.0 else math.inf
        if ratio > self.worst_ratio:
            self.worst_ratio = ratio
        if empirical is not None and empirical > self.empirical:
            self.empirical = empirical
        if lhs > slack * rhs:
            self.violations += 1

    def report(self, fallback_empirical: bool = True) -> InequalityReport:
        emp = self.empirical if self.empirical > 0.0 else (
            self.worst_ratio if fallback_empirical else 0.0
        )
        return InequalityReport(
            name=self.name,
            samples=self.samples,
            violations=self.violations,
            worst_ratio=self.worst_ratio,
            empirical_constant=emp,
        )


def _trig_tables(grid: Grid1D, degree: int) -> np.ndarray:
    """Rows: [1, cos(j pi x / L), sin(j pi x / L)] for j = 1..degree."""
    x = grid.nodes
    rows = [np.ones_like(x)]
    for j in range(1, degree + 1):
        rows.append(np.cos(j * np.pi * x / grid.L))
        rows.append(np.sin(j * np.pi * x / grid.L))
    return np.vstack(rows)


def run_inequality_suite(
    seed: int,
    samples: int,
    grid: Optional[Grid1D] = None,
    config: Optional[SuiteConfig] = None,
) -> dict[str, InequalityReport]:
    """Randomized verification of the finite-parameter inequalities.

    Each sample draws a trigonometric polynomial of degree <= config.degree
    with uniform[-1,1] coefficients from a per-sample RNG stream
    (seed + index), plus random element/mode counts and random in-element
    sampling points.  Violations are counted against the 1.01 slack.

    Returns reports keyed by:

    - ``element_mean_approx``: distance to element averages vs h ||f'||
    - ``mean_plus_gradient_printed`` / ``_corrected``: nodal-mean plus
      gradient bound on ||f||^2 with the printed (h/2pi)^2 and corrected
      (h/pi)^2 coefficients; the linear ramp f(x) = x (one element) is
      injected deterministically and falsifies the printed form
    - ``paired_point_differences``: summed squared differences of paired
      in-element point values vs h ||f'||^2
    - ``point_sampling_norm``: ||f||^2 vs 2[h sum f(x_k)^2 + h^2 ||f'||^2]
    - ``spectral_tail``: post-projection residual vs ||f'||^2 / lambda_{N+1}
    - ``poincare``: ||f||^2 vs ||f'||^2 / lambda_1 on the Dirichlet grid
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    cfg = config or SuiteConfig()
    ngrid = grid or make_grid(np.pi, 512, BoundaryCondition.NEUMANN)
    if ngrid.bc is not BoundaryCondition.NEUMANN:
        raise ValueError("suite grid must be Neumann (full trigonometric samples)")
    for N in cfg.element_counts:
        if ngrid.n_cells % N != 0:
            raise ValueError(f"element count {N} must divide n_cells={ngrid.n_cells}")
    dgrid = make_grid(ngrid.L, ngrid.n_cells, BoundaryCondition.DIRICHLET)

    table = _trig_tables(ngrid, cfg.degree)
    basis = EigenBasis(dgrid.L, max(cfg.mode_counts) + cfg.degree)
    W = mode_matrix(basis, dgrid, cfg.degree)
    lam1 = basis.eigenvalue(1)
    layouts = {N: element_layout(ngrid, N) for N in cfg.element_counts}

    tallies = {
        key: _Tally(key)
        for key in (
            "element_mean_approx",
            "mean_plus_gradient_printed",
            "mean_plus_gradient_corrected",
            "paired_point_differences",
            "point_sampling_norm",
            "spectral_tail",
            "poincare",
        )
    }

    def mean_plus_gradient(f: Field, N: int, avg: np.ndarray):
        h = f.grid.L / N
        norm2 = l2_norm(f) ** 2
        means2 = h * float(np.sum((avg @ f.values) ** 2))
        sem2 = h1_seminorm(f) ** 2
        emp = (norm2 - means2) / (h * h * sem2) if sem2 > 1e-12 else None
        tallies["mean_plus_gradient_printed"].add(
            norm2, means2 + (h / (2.0 * np.pi)) ** 2 * sem2, cfg.slack, emp
        )
        tallies["mean_plus_gradient_corrected"].add(
            norm2, means2 + (h / np.pi) ** 2 * sem2, cfg.slack, emp
        )

    for i in range(samples):
        rng = np.random.default_rng([seed, i])
        coeffs = rng.uniform(-1.0, 1.0, table.shape[0])
        f = Field(ngrid, coeffs @ table)
        sem = h1_seminorm(f)
        N = int(cfg.element_counts[rng.integers(len(cfg.element_counts))])
        avg, owner, _ = layouts[N]
        h = ngrid.L / N

        # distance to the piecewise-constant element averages
        interp = (avg @ f.values)[owner]
        tallies["element_mean_approx"].add(
            l2_norm(Field(ngrid, f.values - interp)), h * sem, cfg.slack
        )

        mean_plus_gradient(f, N, avg)

        # paired random points within each element
        lo = np.arange(N) * h
        xk = lo + h * rng.random(N)
        yk = lo + h * rng.random(N)
        fx = np.interp(xk, ngrid.nodes, f.values)
        fy = np.interp(yk, ngrid.nodes, f.values)
        tallies["paired_point_differences"].add(
            float(np.sum((fx - fy) ** 2)), h * sem * sem, cfg.slack
        )
        tallies["point_sampling_norm"].add(
            l2_norm(f) ** 2,
            2.0 * (h * float(np.sum(fx**2)) + h * h * sem * sem),
            cfg.slack,
        )

        # Dirichlet-side spectral bounds
        dcoeffs = rng.uniform(-1.0, 1.0, cfg.degree)
        g = Field(dgrid, dcoeffs @ W)
        gsem2 = h1_seminorm(g) ** 2
        Nq = int(cfg.mode_counts[rng.integers(len(cfg.mode_counts))])
        proj = mode_matrix(basis, dgrid, Nq) * dgrid.quad_weights @ g.values
        resid = g.values - proj @ mode_matrix(basis, dgrid, Nq)
        tallies["spectral_tail"].add(
            l2_norm(Field(dgrid, resid)) ** 2,
            gsem2 / basis.eigenvalue(Nq + 1),
            cfg.slack,
        )
        tallies["poincare"].add(l2_norm(g) ** 2, gsem2 / lam1, cfg.slack)

    # deterministic counterexample: the linear ramp against one element
    ramp = Field(ngrid, ngrid.nodes.copy())
    one = element_layout(ngrid, 1)[0]
    mean_plus_gradient(ramp, 1, one)

    return {key: tally.report() for key, tally in tallies.items()}

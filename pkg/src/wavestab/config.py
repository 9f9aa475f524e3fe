"""Experiment configuration: flat INI files -> validated run ingredients.

Sections: ``[model]`` (family, coefficients, grid), ``[controller]``
(variant and its parameters), ``[initial]`` (named profiles), ``[time]``
(stepper), ``[analysis]`` (fit window and safety factor).  Anything
malformed raises :class:`ConfigError` carrying the section/key context so
the CLI can exit with a usage error.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .controllers import (
    ControllerSpec,
    FourierModes,
    GainReport,
    NoControl,
    Nodal,
    SubdomainControl,
    VolumeElements,
    check_fourier_gains,
    check_nodal_gains,
    check_nonlinear_gains,
    check_strong_fourier_gains,
    check_subdomain_gains,
    check_volume_gains,
    make_control_operator,
)
from .grid import BoundaryCondition, Field, Grid1D, make_grid, sample, zeros
from .integrator import Scheme, StepperConfig, default_dt
from .models import (
    Family,
    ModelSpec,
    Nonlinearity,
    damped_wave,
    nonlinear_damping_wave,
    strongly_damped_wave,
)
from .spectral import Subdomain


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


@dataclass(frozen=True)
class AnalysisOptions:
    safety: float = 0.8
    window_lo_frac: float = 0.2
    window_hi_frac: float = 0.9
    window_lo: Optional[float] = None  # absolute overrides
    window_hi: Optional[float] = None

    def window(self, t_end: float) -> tuple[float, float]:
        lo = self.window_lo if self.window_lo is not None else self.window_lo_frac * t_end
        hi = self.window_hi if self.window_hi is not None else self.window_hi_frac * t_end
        return (lo, hi)


@dataclass(frozen=True)
class ExperimentConfig:
    grid: Grid1D
    model: ModelSpec
    controller: ControllerSpec
    u0: Field
    u1: Field
    stepper: StepperConfig
    analysis: AnalysisOptions
    raw: dict

    @property
    def variant(self) -> str:
        return {
            NoControl: "none",
            VolumeElements: "volume",
            FourierModes: "fourier",
            Nodal: "nodal",
            SubdomainControl: "subdomain",
        }[type(self.controller)]


# ---------------------------------------------------------------------------
# initial profiles
# ---------------------------------------------------------------------------

_PROFILE_CALL = re.compile(r"^(mode|bump|random)\s*\(\s*([^)]*?)\s*\)$")
_PROFILE_SPACE = re.compile(r"^mode\s+(\S+)$")


def parse_profile(text: str) -> tuple[str, tuple[float, ...]]:
    """Parse ``zero``, ``mode K``, ``bump(center,width)``, ``random(seed,degree)``."""
    t = text.strip().lower()
    if t in ("zero", "0"):
        return ("zero", ())
    m = _PROFILE_SPACE.match(t)
    if m:
        t = f"mode({m.group(1)})"
    m = _PROFILE_CALL.match(t)
    if not m:
        raise ConfigError(f"unrecognized profile {text!r}")
    kind = m.group(1)
    try:
        args = tuple(float(s) for s in m.group(2).split(",")) if m.group(2) else ()
    except ValueError:
        raise ConfigError(f"non-numeric arguments in profile {text!r}") from None
    expected = {"mode": 1, "bump": 2, "random": 2}[kind]
    if len(args) != expected:
        raise ConfigError(f"profile {kind!r} takes {expected} argument(s), got {len(args)}")
    return (kind, args)


def build_profile(grid: Grid1D, text: str, amplitude: float = 1.0) -> Field:
    """Realize a named profile on the grid, scaled by ``amplitude``."""
    kind, args = parse_profile(text)
    if kind == "zero" or amplitude == 0.0:
        return zeros(grid)
    if kind == "mode":
        k = int(args[0])
        if k != args[0] or k < (1 if grid.bc is BoundaryCondition.DIRICHLET else 0):
            raise ConfigError(f"invalid mode index {args[0]}")
        if grid.bc is BoundaryCondition.DIRICHLET:
            vals = np.sqrt(2.0 / grid.L) * np.sin(k * np.pi * grid.nodes / grid.L)
        else:
            vals = np.cos(k * np.pi * grid.nodes / grid.L)
        return Field(grid, amplitude * vals)
    if kind == "bump":
        center, width = args
        if width <= 0.0:
            raise ConfigError(f"bump width must be positive, got {width}")
        return sample(grid, lambda x: amplitude * np.exp(-(((x - center) / width) ** 2)))
    # random trigonometric polynomial
    seed, degree = int(args[0]), int(args[1])
    if degree < 1:
        raise ConfigError(f"random profile degree must be >= 1, got {degree}")
    rng = np.random.default_rng([seed, 0])
    x = grid.nodes
    vals = np.zeros_like(x)
    if grid.bc is BoundaryCondition.DIRICHLET:
        for j in range(1, degree + 1):
            vals += rng.uniform(-1.0, 1.0) * np.sin(j * np.pi * x / grid.L)
    else:
        vals += rng.uniform(-1.0, 1.0)
        for j in range(1, degree + 1):
            vals += rng.uniform(-1.0, 1.0) * np.cos(j * np.pi * x / grid.L)
            vals += rng.uniform(-1.0, 1.0) * np.sin(j * np.pi * x / grid.L)
    return Field(grid, amplitude * vals)


# ---------------------------------------------------------------------------
# INI loading
# ---------------------------------------------------------------------------

class _Section:
    """Typed accessors over one INI section with error context."""

    def __init__(self, name: str, proxy):
        self.name = name
        self.proxy = proxy

    def _get(self, key, conv, default, required):
        if key not in self.proxy:
            if required:
                raise ConfigError(f"[{self.name}] missing required key {key!r}")
            return default
        raw = self.proxy[key]
        try:
            return conv(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"[{self.name}] {key} = {raw!r} is not a valid value") from None

    def float(self, key, default=None, required=False):
        return self._get(key, float, default, required)

    def int(self, key, default=None, required=False):
        def conv(s):
            v = float(s)
            if v != int(v):
                raise ValueError
            return int(v)

        return self._get(key, conv, default, required)

    def str(self, key, default=None, required=False):
        return self._get(key, lambda s: s.strip(), default, required)

    def floats(self, key):
        raw = self.str(key)
        if raw is None:
            return None
        try:
            return tuple(float(s) for s in raw.split(","))
        except ValueError:
            raise ConfigError(f"[{self.name}] {key} must be a comma-separated list") from None


def _load_ini(path: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    return parser


def _build_model(sec: _Section) -> tuple[ModelSpec, Grid1D]:
    family = sec.str("family", required=True).lower()
    L = sec.float("l", required=True)
    n_cells = sec.int("n_cells", required=True)
    nu = sec.float("nu", 1.0)
    a = sec.float("a", 0.0)
    b = sec.float("b", required=True)
    try:
        if family == Family.DAMPED_WAVE.value:
            bc = sec.str("bc", "dirichlet").lower()
            nl_kind = sec.str("nonlinearity", "zero").lower()
            if nl_kind == "zero":
                nl = Nonlinearity.zero()
            elif nl_kind == "power":
                nl = Nonlinearity.power_law(sec.float("p", required=True))
            else:
                raise ConfigError(
                    f"[model] nonlinearity must be 'zero' or 'power', got {nl_kind!r}"
                )
            model = damped_wave(nu, a, b, bc, nl)
        elif family == Family.NONLINEAR_DAMPING.value:
            model = nonlinear_damping_wave(
                nu, a, b, sec.float("m", required=True), sec.float("p", required=True)
            )
        elif family == Family.STRONGLY_DAMPED.value:
            model = strongly_damped_wave(nu, a, b, sec.float("p", required=True))
        else:
            raise ConfigError(f"[model] unknown family {family!r}")
        grid = make_grid(L, n_cells, model.bc)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"[model] {exc}") from None
    return model, grid


def _build_controller(sec: _Section, grid: Grid1D) -> ControllerSpec:
    variant = sec.str("variant", "none").lower()
    try:
        if variant == "none":
            return NoControl()
        mu = sec.float("mu", required=True)
        if variant == "volume":
            return VolumeElements(sec.int("n", required=True), mu)
        if variant == "fourier":
            return FourierModes(sec.int("n", required=True), mu)
        if variant == "nodal":
            return Nodal(
                sec.int("n", required=True),
                mu,
                obs_points=sec.floats("obs_points"),
                act_points=sec.floats("act_points"),
            )
        if variant == "subdomain":
            omega = Subdomain(
                sec.float("omega_lo", required=True),
                sec.float("omega_hi", required=True),
                grid.L,
            )
            return SubdomainControl(omega, mu)
        raise ConfigError(f"[controller] unknown variant {variant!r}")
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"[controller] {exc}") from None


def load_config(path: str) -> ExperimentConfig:
    """Parse and validate an experiment INI file."""
    parser = _load_ini(path)
    for required in ("model", "time"):
        if not parser.has_section(required):
            raise ConfigError(f"config is missing the [{required}] section")

    model_sec = _Section("model", parser["model"])
    model, grid = _build_model(model_sec)

    ctrl_sec = _Section(
        "controller", parser["controller"] if parser.has_section("controller") else {}
    )
    controller = _build_controller(ctrl_sec, grid)
    try:
        make_control_operator(controller, grid)  # surfaces bc/alignment problems now
    except ValueError as exc:
        raise ConfigError(f"[controller] {exc}") from None

    init_sec = _Section("initial", parser["initial"] if parser.has_section("initial") else {})
    u0 = build_profile(grid, init_sec.str("u0", "zero"), init_sec.float("u0_amplitude", 1.0))
    u1 = build_profile(grid, init_sec.str("u1", "zero"), init_sec.float("u1_amplitude", 1.0))

    time_sec = _Section("time", parser["time"])
    t_end = time_sec.float("t_end", required=True)
    dt = time_sec.float("dt", default_dt(grid))
    scheme_name = time_sec.str("scheme", "imex_cn").lower()
    try:
        scheme = Scheme(scheme_name)
    except ValueError:
        raise ConfigError(f"[time] unknown scheme {scheme_name!r}") from None
    record_every = time_sec.int("record_every", 0)
    if record_every == 0:
        n_steps = int(round(t_end / dt)) if t_end > 0 else 0
        record_every = max(1, n_steps // 2000)
    try:
        stepper = StepperConfig(dt=dt, t_end=t_end, scheme=scheme, record_every=record_every)
    except ValueError as exc:
        raise ConfigError(f"[time] {exc}") from None

    an_sec = _Section("analysis", parser["analysis"] if parser.has_section("analysis") else {})
    analysis = AnalysisOptions(
        safety=an_sec.float("safety", 0.8),
        window_lo_frac=an_sec.float("window_lo_frac", 0.2),
        window_hi_frac=an_sec.float("window_hi_frac", 0.9),
        window_lo=an_sec.float("window_lo"),
        window_hi=an_sec.float("window_hi"),
    )
    if not 0.0 < analysis.safety <= 1.0:
        raise ConfigError(f"[analysis] safety must be in (0, 1], got {analysis.safety}")

    raw = {s: dict(parser[s]) for s in parser.sections()}
    return ExperimentConfig(
        grid=grid,
        model=model,
        controller=controller,
        u0=u0,
        u1=u1,
        stepper=stepper,
        analysis=analysis,
        raw=raw,
    )


def gain_report_for(cfg: ExperimentConfig) -> Optional[GainReport]:
    """Evaluate the matching printed gain conditions for the configuration."""
    grid, model, ctrl = cfg.grid, cfg.model, cfg.controller
    L = grid.L
    if isinstance(ctrl, VolumeElements):
        return check_volume_gains(L, model.nu, model.a, model.b, ctrl.mu, ctrl.N)
    if isinstance(ctrl, FourierModes):
        if model.family is Family.NONLINEAR_DAMPING:
            return check_nonlinear_gains(L, model.nu, model.a, ctrl.mu, ctrl.N, model.m)
        if model.family is Family.STRONGLY_DAMPED:
            return check_strong_fourier_gains(L, model.nu, model.a, model.b, ctrl.mu, ctrl.N)
        return check_fourier_gains(L, model.nu, model.a, model.b, ctrl.mu, ctrl.N)
    if isinstance(ctrl, Nodal):
        return check_nodal_gains(L, model.nu, model.a, model.b, ctrl.mu, ctrl.N)
    if isinstance(ctrl, SubdomainControl):
        return check_subdomain_gains(L, model.a, model.b, ctrl.mu, ctrl.omega, grid)
    return None

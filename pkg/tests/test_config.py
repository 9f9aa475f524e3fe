"""INI experiment parsing and profile construction."""

import numpy as np
import pytest

from wavestab import BoundaryCondition, Family, FourierModes, Nodal, SubdomainControl, VolumeElements
from wavestab.config import (
    AnalysisOptions,
    ConfigError,
    build_profile,
    gain_report_for,
    load_config,
    parse_profile,
)
from wavestab.grid import make_grid

BASE = """\
[model]
family = damped_wave
nu = 1.0
a = 1.0
b = 2.0
bc = neumann
L = 3.141592653589793
n_cells = 128

[controller]
variant = volume
N = 2
mu = 4.0

[initial]
u0 = bump(1.5707963267948966, 0.5)

[time]
dt = 0.005
t_end = 6.0
"""


def write(tmp_path, text, name="exp.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


class TestParseProfile:
    @pytest.mark.parametrize(
        "text,kind,args",
        [
            ("zero", "zero", ()),
            ("mode 3", "mode", (3.0,)),
            ("mode(2)", "mode", (2.0,)),
            ("bump(0.5, 0.1)", "bump", (0.5, 0.1)),
            ("random(7, 5)", "random", (7.0, 5.0)),
            ("  BUMP( 1.0 ,2.0 ) ", "bump", (1.0, 2.0)),
        ],
    )
    def test_grammar(self, text, kind, args):
        assert parse_profile(text) == (kind, args)

    @pytest.mark.parametrize("bad", ["wiggle(1)", "mode", "bump(1)", "random(1,2,3)", "mode(x)"])
    def test_rejects_malformed(self, bad):
        with pytest.raises(ConfigError):
            parse_profile(bad)


class TestBuildProfile:
    def test_dirichlet_mode_is_normalized_sine(self):
        g = make_grid(np.pi, 128, "dirichlet")
        f = build_profile(g, "mode 1")
        expected = np.sqrt(2 / np.pi) * np.sin(g.nodes)
        np.testing.assert_allclose(f.values, expected, atol=1e-12)

    def test_neumann_mode_zero_is_constant(self):
        g = make_grid(np.pi, 64, "neumann")
        f = build_profile(g, "mode 0", amplitude=2.5)
        np.testing.assert_allclose(f.values, 2.5)

    def test_dirichlet_rejects_mode_zero(self):
        g = make_grid(np.pi, 64, "dirichlet")
        with pytest.raises(ConfigError):
            build_profile(g, "mode 0")

    def test_bump_amplitude(self):
        g = make_grid(1.0, 64, "neumann")
        f = build_profile(g, "bump(0.5, 0.2)", amplitude=3.0)
        k = np.argmin(np.abs(g.nodes - 0.5))
        assert f.values[k] == pytest.approx(3.0, rel=1e-3)

    def test_random_reproducible(self):
        g = make_grid(np.pi, 64, "dirichlet")
        a = build_profile(g, "random(11, 6)")
        b = build_profile(g, "random(11, 6)")
        np.testing.assert_array_equal(a.values, b.values)
        c = build_profile(g, "random(12, 6)")
        assert not np.array_equal(a.values, c.values)

    def test_random_respects_dirichlet_boundary(self):
        g = make_grid(np.pi, 64, "dirichlet")
        f = build_profile(g, "random(3, 8)")
        full = np.concatenate(([0.0], f.values, [0.0]))
        assert abs(full[0]) == 0.0 and abs(full[-1]) == 0.0


class TestLoadConfig:
    def test_round_trip(self, tmp_path):
        cfg = load_config(write(tmp_path, BASE))
        assert cfg.model.family is Family.DAMPED_WAVE
        assert cfg.grid.bc is BoundaryCondition.NEUMANN
        assert isinstance(cfg.controller, VolumeElements)
        assert cfg.controller.mu == 4.0
        assert cfg.stepper.dt == 0.005
        assert cfg.variant == "volume"
        assert cfg.analysis.safety == 0.8  # default

    def test_missing_section(self, tmp_path):
        with pytest.raises(ConfigError, match="time"):
            load_config(write(tmp_path, "[model]\nfamily = damped_wave\n"))

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            load_config("/nonexistent/exp.ini")

    def test_bad_value_reports_key(self, tmp_path):
        text = BASE.replace("nu = 1.0", "nu = fast")
        with pytest.raises(ConfigError, match="nu"):
            load_config(write(tmp_path, text))

    def test_unknown_family(self, tmp_path):
        text = BASE.replace("family = damped_wave", "family = elastic")
        with pytest.raises(ConfigError, match="family"):
            load_config(write(tmp_path, text))

    def test_controller_grid_consistency_checked_at_load(self, tmp_path):
        # volume elements on a Dirichlet model must fail at load time
        text = BASE.replace("bc = neumann", "bc = dirichlet")
        with pytest.raises(ConfigError):
            load_config(write(tmp_path, text))

    def test_divisibility_checked_at_load(self, tmp_path):
        text = BASE.replace("N = 2", "N = 7")
        with pytest.raises(ConfigError):
            load_config(write(tmp_path, text))

    def test_nonlinear_family(self, tmp_path):
        text = """\
[model]
family = nonlinear_damping
nu = 1.0
a = 1.0
b = 1.0
m = 3.0
p = 4.0
L = 3.141592653589793
n_cells = 128

[controller]
variant = fourier
N = 1
mu = 2.0

[time]
t_end = 10.0
"""
        cfg = load_config(write(tmp_path, text))
        assert cfg.model.family is Family.NONLINEAR_DAMPING
        assert isinstance(cfg.controller, FourierModes)
        rep = gain_report_for(cfg)
        assert rep.kind == "polynomial"
        assert rep.satisfied

    def test_subdomain_controller(self, tmp_path):
        text = """\
[model]
family = damped_wave
nu = 1.0
a = 1.0
b = 2.0
bc = dirichlet
L = 1.0
n_cells = 200
nonlinearity = power
p = 4.0

[controller]
variant = subdomain
mu = 35.0
omega_lo = 0.5
omega_hi = 0.9

[time]
t_end = 8.0
"""
        cfg = load_config(write(tmp_path, text))
        assert isinstance(cfg.controller, SubdomainControl)
        assert cfg.controller.omega.lo == 0.5
        rep = gain_report_for(cfg)
        assert rep.variant == "subdomain"

    def test_nodal_with_explicit_points(self, tmp_path):
        text = """\
[model]
family = damped_wave
nu = 1.0
a = 1.0
b = 0.5
bc = dirichlet
L = 3.141592653589793
n_cells = 128

[controller]
variant = nodal
N = 2
mu = 1.0
obs_points = 0.7, 2.2
act_points = 0.8, 2.3

[time]
t_end = 1.0
"""
        cfg = load_config(write(tmp_path, text))
        assert isinstance(cfg.controller, Nodal)
        obs, act = cfg.controller.points(np.pi)
        np.testing.assert_allclose(obs, [0.7, 2.2])
        np.testing.assert_allclose(act, [0.8, 2.3])

    def test_default_dt_and_records(self, tmp_path):
        text = BASE.replace("dt = 0.005\n", "")
        cfg = load_config(write(tmp_path, text))
        # min(0.25 dx, 1e-2) with dx = pi/128
        assert cfg.stepper.dt == pytest.approx(0.25 * np.pi / 128)

    def test_record_every_targets_2000_records(self, tmp_path):
        text = BASE.replace("t_end = 6.0", "t_end = 60.0").replace("dt = 0.005", "dt = 0.005")
        cfg = load_config(write(tmp_path, text))
        n_steps = round(60.0 / 0.005)
        assert cfg.stepper.record_every == max(1, n_steps // 2000)

    def test_bad_scheme(self, tmp_path):
        text = BASE + "scheme = leapfrog\n"
        with pytest.raises(ConfigError, match="scheme"):
            load_config(write(tmp_path, text))

    def test_bad_safety(self, tmp_path):
        text = BASE + "\n[analysis]\nsafety = 1.2\n"
        with pytest.raises(ConfigError, match="safety"):
            load_config(write(tmp_path, text))

    def test_none_controller_has_no_report(self, tmp_path):
        text = BASE.replace("variant = volume", "variant = none")
        cfg = load_config(write(tmp_path, text))
        assert gain_report_for(cfg) is None


def test_analysis_window_fractions_and_overrides():
    opts = AnalysisOptions()
    assert opts.window(10.0) == (2.0, 9.0)
    opts = AnalysisOptions(window_lo=5.0, window_hi=50.0)
    assert opts.window(55.0) == (5.0, 50.0)

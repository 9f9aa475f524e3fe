"""Time stepping: accuracy, conservation, blow-up handling, Lyapunov hooks."""

import math

import numpy as np
import pytest

from wavestab import (
    EigenBasis,
    Field,
    FourierModes,
    NoControl,
    Scheme,
    State,
    StepperConfig,
    VolumeElements,
    damped_wave,
    default_dt,
    l2_norm,
    lyapunov_eb,
    lyapunov_volume,
    make_grid,
    nonlinear_damping_wave,
    run,
    sample,
    step,
    strongly_damped_wave,
    zeros,
)

PI = np.pi


def modal_solution(lam_h, b, t):
    """u(t) for the scalar mode ODE u'' + b u' + lam u = 0, u(0)=1, u'(0)=0."""
    omega = math.sqrt(lam_h - b * b / 4.0)
    return math.exp(-b * t / 2) * (math.cos(omega * t) + b / (2 * omega) * math.sin(omega * t))


def first_mode_state(grid, amplitude=1.0):
    basis = EigenBasis(grid.L, 1)
    return Field(grid, amplitude * basis.sample_mode(1, grid))


def discrete_lambda1(grid):
    return 4.0 / grid.dx**2 * math.sin(PI * grid.dx / (2 * grid.L)) ** 2


class TestStepperConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(dt=0.0, t_end=1.0),
            dict(dt=-0.1, t_end=1.0),
            dict(dt=np.nan, t_end=1.0),
            dict(dt=0.5, t_end=-1.0),
            dict(dt=2.0, t_end=1.0),
            dict(dt=0.1, t_end=1.0, record_every=0),
        ],
    )
    def test_rejects_bad_config(self, kwargs):
        with pytest.raises(ValueError):
            StepperConfig(**kwargs)

    def test_scheme_coercion(self):
        cfg = StepperConfig(dt=0.1, t_end=1.0, scheme="rk4")
        assert cfg.scheme is Scheme.RK4

    def test_default_dt_cap(self):
        g = make_grid(PI, 16, "dirichlet")
        assert default_dt(g) == pytest.approx(1e-2)  # 0.25*dx > 1e-2 here
        g2 = make_grid(PI, 2000, "dirichlet")
        assert default_dt(g2) == pytest.approx(0.25 * g2.dx)


class TestLinearAccuracy:
    def test_modal_closed_form(self):
        g = make_grid(PI, 128, "dirichlet")
        model = damped_wave(1.0, 0.0, 1.0, "dirichlet")
        u0 = first_mode_state(g)
        res = run(model, NoControl(), u0, zeros(g), StepperConfig(dt=1e-3, t_end=1.0))
        expected = modal_solution(discrete_lambda1(g), 1.0, 1.0) * u0.values
        err = np.max(np.abs(res.final_state.u.values - expected))
        assert err < 5e-7  # O(dt^2)

    @pytest.mark.parametrize("scheme", ["imex_cn", "rk4"])
    def test_second_order_convergence(self, scheme):
        # n=64 keeps dt=0.02 inside the RK4 stability budget
        g = make_grid(PI, 64, "dirichlet")
        model = damped_wave(1.0, 0.0, 1.0, "dirichlet")
        u0 = first_mode_state(g)
        lam = discrete_lambda1(g)
        errs = []
        for dt in (0.02, 0.01, 0.005):
            res = run(
                model, NoControl(), u0, zeros(g), StepperConfig(dt=dt, t_end=1.0, scheme=scheme)
            )
            expected = modal_solution(lam, 1.0, 1.0) * u0.values
            errs.append(l2_norm(Field(g, res.final_state.u.values - expected)))
        order = math.log(errs[0] / errs[-1]) / math.log(4)
        lo = 1.8 if scheme == "imex_cn" else 1.8
        assert lo <= order, f"{scheme} observed order {order:.3f} from errors {errs}"
        if scheme == "imex_cn":
            assert order <= 2.2

    def test_halving_dt_quarters_error(self):
        g = make_grid(PI, 128, "dirichlet")
        model = damped_wave(1.0, 0.0, 1.0, "dirichlet")
        u0 = first_mode_state(g)
        lam = discrete_lambda1(g)
        errs = []
        for dt in (0.02, 0.01):
            res = run(model, NoControl(), u0, zeros(g), StepperConfig(dt=dt, t_end=1.0))
            expected = modal_solution(lam, 1.0, 1.0) * u0.values
            errs.append(l2_norm(Field(g, res.final_state.u.values - expected)))
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)


def test_undamped_energy_conserved():
    g = make_grid(PI, 128, "dirichlet")
    model = damped_wave(1.0, 0.0, 0.0, "dirichlet")
    basis = EigenBasis(PI, 3)
    u0 = Field(g, basis.sample_mode(1, g) + 0.5 * basis.sample_mode(3, g))
    res = run(model, NoControl(), u0, zeros(g), StepperConfig(dt=1e-3, t_end=10.0, record_every=500))
    E = [r.total for r in res.records]
    assert abs(E[-1] - E[0]) <= 1e-8 * E[0]
    assert max(abs(e - E[0]) for e in E) <= 1e-8 * E[0]


def test_zero_state_stays_zero():
    g = make_grid(PI, 64, "neumann")
    model = damped_wave(1.0, 1.0, 2.0, "neumann")
    res = run(model, VolumeElements(2, 4.0), zeros(g), zeros(g), StepperConfig(dt=0.01, t_end=1.0))
    assert not res.final_state.u.values.any()
    assert not res.final_state.v.values.any()


def test_t_end_zero_single_record():
    g = make_grid(PI, 64, "dirichlet")
    model = damped_wave(1.0, 0.0, 1.0, "dirichlet")
    u0 = first_mode_state(g, 2.0)
    res = run(model, NoControl(), u0, zeros(g), StepperConfig(dt=0.01, t_end=0.0))
    assert len(res.records) == 1
    np.testing.assert_array_equal(res.final_state.u.values, u0.values)


def test_deterministic_reruns():
    g = make_grid(PI, 96, "neumann")
    model = damped_wave(1.0, 1.0, 2.0, "neumann")
    u0 = sample(g, lambda x: np.exp(-((x - 1.5) / 0.4) ** 2))
    cfg = StepperConfig(dt=0.004, t_end=2.0)
    a = run(model, VolumeElements(2, 4.0), u0, zeros(g), cfg)
    b = run(model, VolumeElements(2, 4.0), u0, zeros(g), cfg)
    assert np.array_equal(a.final_state.u.values, b.final_state.u.values)
    assert np.array_equal(a.final_state.v.values, b.final_state.v.values)
    assert [r.total for r in a.records] == [r.total for r in b.records]


def test_records_thinned_by_record_every():
    g = make_grid(PI, 64, "dirichlet")
    model = damped_wave(1.0, 0.0, 1.0, "dirichlet")
    res = run(
        model,
        NoControl(),
        first_mode_state(g),
        zeros(g),
        StepperConfig(dt=0.01, t_end=1.0, record_every=25),
    )
    # t=0, t=0.25, 0.5, 0.75, 1.0
    assert [round(r.t, 10) for r in res.records] == [0.0, 0.25, 0.5, 0.75, 1.0]


def test_final_partial_interval_recorded():
    g = make_grid(PI, 64, "dirichlet")
    model = damped_wave(1.0, 0.0, 1.0, "dirichlet")
    res = run(
        model,
        NoControl(),
        first_mode_state(g),
        zeros(g),
        StepperConfig(dt=0.01, t_end=1.0, record_every=30),
    )
    assert res.records[-1].t == pytest.approx(1.0)


class TestBlowup:
    def test_unstable_baseline_aborts(self):
        g = make_grid(PI, 64, "dirichlet")
        model = damped_wave(1.0, 50.0, 0.1, "dirichlet")
        u0 = first_mode_state(g, 100.0)
        res = run(model, NoControl(), u0, zeros(g), StepperConfig(dt=0.01, t_end=60.0))
        assert res.blew_up
        assert res.blowup_time is not None and 0 < res.blowup_time < 60.0
        assert len(res.records) > 0
        assert np.all(np.isfinite(res.final_state.u.values))

    def test_constant_mode_growth_flagged(self):
        # Neumann, a=1, mu=0: the constant mode obeys u'' = u - b u' and grows
        g = make_grid(PI, 64, "neumann")
        model = damped_wave(1.0, 1.0, 1.0, "neumann")
        u0 = Field(g, np.ones(g.n_nodes))
        res = run(model, NoControl(), u0, zeros(g), StepperConfig(dt=0.01, t_end=40.0))
        # |quadratic| = (a/2)||u||^2 tracks the growing constant mode
        assert res.blew_up or abs(res.records[-1].quadratic) > 100 * abs(
            res.records[0].quadratic
        )


class TestRK4Guards:
    def test_refuses_strongly_damped(self):
        g = make_grid(PI, 64, "dirichlet")
        model = strongly_damped_wave(1.0, 1.0, 1.0, 4.0)
        with pytest.raises(ValueError, match="RK4"):
            run(
                model,
                NoControl(),
                zeros(g),
                zeros(g),
                StepperConfig(dt=1e-4, t_end=0.01, scheme="rk4"),
            )

    def test_enforces_cfl(self):
        g = make_grid(PI, 256, "dirichlet")
        model = damped_wave(4.0, 0.0, 1.0, "dirichlet")
        limit = 0.5 * g.dx / 2.0
        with pytest.raises(ValueError, match="stability"):
            run(
                model,
                NoControl(),
                zeros(g),
                zeros(g),
                StepperConfig(dt=1.01 * limit, t_end=1.0, scheme="rk4"),
            )

    def test_agrees_with_imex_when_stable(self):
        g = make_grid(PI, 64, "dirichlet")
        model = damped_wave(1.0, 1.0, 2.0, "dirichlet", None)
        u0 = first_mode_state(g)
        cfg_i = StepperConfig(dt=0.002, t_end=1.0)
        cfg_r = StepperConfig(dt=0.002, t_end=1.0, scheme="rk4")
        a = run(model, FourierModes(1, 4.0), u0, zeros(g), cfg_i)
        b = run(model, FourierModes(1, 4.0), u0, zeros(g), cfg_r)
        assert np.max(np.abs(a.final_state.u.values - b.final_state.u.values)) < 1e-6


def test_nonlinear_damping_stable_at_default_dt():
    g = make_grid(PI, 128, "dirichlet")
    model = nonlinear_damping_wave(1.0, 1.0, 1.0, 3.0, 4.0)
    u0 = first_mode_state(g, 2.0)
    res = run(model, FourierModes(1, 2.0), u0, zeros(g), StepperConfig(dt=default_dt(g), t_end=5.0))
    assert not res.blew_up
    assert res.records[-1].total < res.records[0].total


def test_step_advances_single_interval():
    g = make_grid(PI, 64, "dirichlet")
    model = damped_wave(1.0, 0.0, 1.0, "dirichlet")
    st = State(first_mode_state(g), zeros(g), t=0.0)
    out = step(st, model, NoControl(), StepperConfig(dt=0.01, t_end=1.0))
    assert out.t == pytest.approx(0.01)
    assert not np.array_equal(out.u.values, st.u.values)


class TestLyapunov:
    def test_zero_states_vanish(self):
        gn = make_grid(PI, 64, "neumann")
        gd = make_grid(PI, 64, "dirichlet")
        mn = damped_wave(1.0, 1.0, 2.0, "neumann")
        md = damped_wave(1.0, 1.0, 2.0, "dirichlet", None)
        zn = State(zeros(gn), zeros(gn))
        zd = State(zeros(gd), zeros(gd))
        assert lyapunov_volume(zn, mn, VolumeElements(2, 4.0)) == 0.0
        assert lyapunov_eb(zd, md, FourierModes(2, 4.0), "fourier") == 0.0

    def test_unknown_variant_rejected(self):
        gd = make_grid(PI, 64, "dirichlet")
        md = damped_wave(1.0, 1.0, 2.0, "dirichlet", None)
        with pytest.raises(ValueError):
            lyapunov_eb(State(zeros(gd), zeros(gd)), md, FourierModes(2, 4.0), "volume")

    def test_volume_requires_volume_controller(self):
        gn = make_grid(PI, 64, "neumann")
        mn = damped_wave(1.0, 1.0, 2.0, "neumann")
        with pytest.raises(TypeError):
            lyapunov_volume(State(zeros(gn), zeros(gn)), mn, NoControl())

    def test_auto_lyapunov_in_records(self):
        gn = make_grid(PI, 64, "neumann")
        mn = damped_wave(1.0, 1.0, 2.0, "neumann")
        u0 = sample(gn, lambda x: np.exp(-((x - 1.5) / 0.4) ** 2))
        res = run(mn, VolumeElements(2, 4.0), u0, zeros(gn), StepperConfig(dt=0.01, t_end=0.5))
        assert all(r.lyapunov is not None for r in res.records)

    def test_no_lyapunov_for_nodal(self):
        gd = make_grid(PI, 270, "dirichlet")
        md = damped_wave(1.0, 1.0, 0.5, "dirichlet", None)
        from wavestab import Nodal

        u0 = sample(gd, lambda x: np.sin(x))
        res = run(md, Nodal(27, 4.3), u0, zeros(gd), StepperConfig(dt=0.01, t_end=0.2))
        assert all(r.lyapunov is None for r in res.records)


def test_snapshots_optional():
    g = make_grid(PI, 64, "dirichlet")
    model = damped_wave(1.0, 0.0, 1.0, "dirichlet")
    res = run(
        model,
        NoControl(),
        first_mode_state(g),
        zeros(g),
        StepperConfig(dt=0.01, t_end=0.5),
        snapshot_every=25,
    )
    assert res.snapshots is not None and len(res.snapshots) >= 2
    snap = res.snapshots[0]
    assert snap.t == 0.0 and snap.u.values.shape == (g.n_nodes,)


def test_grid_mismatch_rejected():
    g = make_grid(PI, 64, "dirichlet")
    g2 = make_grid(PI, 128, "dirichlet")
    model = damped_wave(1.0, 0.0, 1.0, "dirichlet")
    with pytest.raises(ValueError):
        run(model, NoControl(), zeros(g), zeros(g2), StepperConfig(dt=0.01, t_end=0.1))

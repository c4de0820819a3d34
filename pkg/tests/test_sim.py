import math
import random

import numpy as np
import pytest

from cldkit import corpus, engine, kernels
from cldkit.errors import NumericBlowupError, UnknownPolarityError, UnknownReferenceError
from cldkit.scenario import Drive, Form, Integrator, ScenarioSpec, Shock

import helpers


def spec_for(model, **overrides):
    base = dict(
        name="t",
        horizon=1.0,
        dt=0.1,
        integrator=Integrator.EULER,
        decay={v.id: 0.0 for v in model.variables},
    )
    base.update(overrides)
    return ScenarioSpec(**base)


def run(model, **overrides):
    return engine.integrate(engine.compile(model, spec_for(model, **overrides)))


def test_compile_rejects_unknown_polarity(unsigned):
    with pytest.raises(UnknownPolarityError):
        engine.compile(unsigned, spec_for(unsigned))


def test_compile_rejects_unknown_references(two_cycle):
    bad = [
        {"init": {99: 1.0}},
        {"gains": {(9, 99): 1.0}},
        {"gains": {(10, 9): 1.0, (9, 10): 1.0, (99, 9): 1.0}},
        {"decay": {99: 0.1}},
        {"forms": {99: Form("linear")}},
        {"drives": {99: Drive("constant", 1.0)}},
        {"shocks": (Shock(99, 0.5, "set", 1.0),)},
        {"outputs": (9, 99)},
    ]
    for overrides in bad:
        with pytest.raises(UnknownReferenceError):
            engine.compile(two_cycle, spec_for(two_cycle, **overrides))


def test_single_link_derivative():
    m = helpers.build_model({(1, 2)})
    traj = run(m)
    # dx2/dt = x1 and nothing feeds x1, so x2 grows linearly by dt steps
    assert np.allclose(traj.series(1), 1.0)
    assert np.allclose(traj.series(2), 1.0 + traj.times)


def test_minus_link_with_gain():
    m = helpers.build_model({(5, 9)}, signs={(5, 9): "-"})
    traj = run(m, gains={(5, 9): 2.0})
    # one euler step: x9 = 1 + 0.1 * (-2 * 1)
    assert traj.series(9)[1] == 0.8
    assert traj.series(9)[2] == pytest.approx(0.6, rel=1e-15)


def test_single_variable_decay_step():
    edges = {(1, 2)}  # variable 2 unused; 1 has no inflows
    m = helpers.build_model(edges)
    traj = run(m, gains={(1, 2): 0.0}, decay={1: 0.5, 2: 0.0})
    assert traj.series(1)[1] == 0.95  # exact: 1 - 0.1*0.5


def test_all_plus_ring_strictly_increases():
    ring = {(1, 2), (2, 3), (3, 4), (4, 1)}
    m = helpers.build_model(ring)
    traj = run(m)
    assert traj.values.shape == (11, 4)
    for vid in (1, 2, 3, 4):
        series = traj.series(vid)
        assert np.all(np.diff(series) > 0), vid


def test_canonical_baseline_compiles(canonical):
    spec = corpus.load_scenario("baseline")
    system = engine.compile(canonical, spec)
    assert system.n_steps == 400
    traj = engine.integrate(system)
    assert np.isfinite(traj.values).all()


def test_balancing_cycle_settles(b2_model):
    spec = corpus.load_scenario("b2-settle")
    traj = engine.integrate(engine.compile(b2_model, spec))
    assert np.isfinite(traj.values).all()
    s19 = traj.series(19)
    assert abs(s19[-1] - s19[-2]) < 1e-6


def test_grid_layout():
    m = helpers.build_model({(1, 2)})
    traj = run(m, horizon=0.2, dt=0.1)
    assert traj.times.tolist() == [0.0, 0.1, 0.2]
    # horizon not divisible by dt truncates to the last full step
    traj = run(m, horizon=0.25, dt=0.1)
    assert len(traj.times) == 3


def test_shock_set_and_add():
    m = helpers.build_model({(1, 2)}, signs={(1, 2): "+"})
    traj = run(
        m,
        gains={(1, 2): 0.0},
        shocks=(Shock(1, 0.25, "add", 2.0), Shock(2, 0.5, "set", 7.0)),
    )
    s1, s2 = traj.series(1), traj.series(2)
    # t=0.25 snaps up to index 3 (t=0.3)
    assert s1[2] == 1.0 and s1[3] == 3.0
    assert s2[4] == 1.0 and s2[5] == 7.0


def test_shock_at_zero_replaces_initial_sample():
    m = helpers.build_model({(1, 2)})
    traj = run(m, gains={(1, 2): 0.0}, shocks=(Shock(1, 0.0, "set", 5.0),))
    assert traj.series(1)[0] == 5.0


def test_negative_shock_clamps_to_zero():
    m = helpers.build_model({(1, 2)})
    traj = run(m, gains={(1, 2): 0.0}, shocks=(Shock(1, 0.5, "add", -10.0),))
    assert traj.series(1)[5] == 0.0


def test_clamp_floors_level_at_zero():
    m = helpers.build_model({(1, 2)})
    traj = run(m, gains={(1, 2): 0.0}, drives={1: Drive("constant", -5.0)})
    s1 = traj.series(1)
    assert s1[1] == 0.5
    assert np.all(s1[2:] == 0.0)


def test_saturating_form():
    m = helpers.build_model({(1, 2)})
    traj = run(m, forms={1: Form("sat", 2.0)}, dt=0.5, horizon=0.5)
    # f(1) = 1 / (1 + 1/2) = 2/3; x2 = 1 + 0.5 * 2/3
    assert traj.series(2)[1] == pytest.approx(1 + 0.5 * (2 / 3), rel=1e-15)


def test_ramp_drive_uses_step_start_time():
    m = helpers.build_model({(1, 2)})
    traj = run(m, gains={(1, 2): 0.0}, drives={1: Drive("ramp", 1.0)})
    s1 = traj.series(1)
    # euler: x(k+1) = x(k) + dt * (k * dt)
    expected = [1.0]
    for k in range(10):
        expected.append(expected[-1] + 0.1 * (k * 0.1))
    assert np.allclose(s1, expected, rtol=0, atol=1e-15)


def test_blowup_reports_time_and_variable():
    m = helpers.build_model({(1, 2), (2, 1)})
    with pytest.raises(NumericBlowupError) as exc:
        run(m, gains={(1, 2): 1e200, (2, 1): 1e200}, horizon=10.0, dt=1.0)
    assert exc.value.variable_id in (1, 2)
    assert 0 < exc.value.time <= 10.0


def test_convergence_orders():
    m = helpers.build_model({(1, 2)})

    def err(integrator, dt):
        traj = run(
            m,
            integrator=integrator,
            gains={(1, 2): 0.0},
            decay={1: 0.5, 2: 0.0},
            horizon=2.0,
            dt=dt,
        )
        return abs(traj.series(1)[-1] - math.exp(-0.5 * 2.0))

    euler = [err(Integrator.EULER, dt) for dt in (0.1, 0.05, 0.025)]
    ratios = [euler[i] / euler[i + 1] for i in range(2)]
    assert all(1.0 <= r <= 4.0 for r in ratios), ratios

    rk4 = [err(Integrator.RK4, dt) for dt in (0.1, 0.05, 0.025)]
    ratios = [rk4[i] / rk4[i + 1] for i in range(2)]
    assert all(8.0 <= r <= 32.0 for r in ratios), ratios


def test_jacobian_clean_on_canonical(canonical):
    spec = corpus.load_scenario("baseline")
    system = engine.compile(canonical, spec)
    state = {v.id: 1.0 for v in canonical.variables}
    assert engine.jacobian_sign_check(system, state) == []


def test_jacobian_clean_on_all_bundled_scenarios():
    for name in ("baseline", "cost-cutting", "aip-shock", "automation-ramp", "b2-settle"):
        model = corpus.scenario_model(name)
        system = engine.compile(model, corpus.load_scenario(name))
        state = {v.id: 1.0 for v in model.variables}
        assert engine.jacobian_sign_check(system, state) == [], name


def test_jacobian_minus_partial_is_negative(canonical):
    spec = corpus.load_scenario("baseline")
    system = engine.compile(canonical, spec)
    state = {v.id: float(1 + (v.id % 3)) for v in canonical.variables}
    mismatches = engine.jacobian_sign_check(system, state)
    assert mismatches == []  # consistency also holds away from all-ones


def test_jacobian_fault_injection(canonical):
    spec = corpus.load_scenario("baseline")
    system = engine.compile(canonical, spec).with_flipped_link(23, 12)
    state = {v.id: 1.0 for v in canonical.variables}
    reported = engine.jacobian_sign_check(system, state)
    assert [(src, dst) for src, dst, _, _ in reported] == [(23, 12)]
    src, dst, symbol, partial = reported[0]
    assert symbol == "-" and partial > 0


def test_jacobian_skips_zero_gain_links(two_cycle):
    spec = spec_for(two_cycle, gains={(9, 10): 0.0, (10, 9): 1.0})
    system = engine.compile(two_cycle, spec)
    assert engine.jacobian_sign_check(system, {9: 1.0, 10: 1.0}) == []


def test_export_csv_shape():
    m = helpers.build_model({(1, 2)})
    traj = run(m, horizon=0.1, dt=0.1, outputs=(1, 2))
    text = engine.export_csv(traj, (1, 2))
    lines = text.splitlines()
    assert len(lines) == 3  # header plus rows for t=0 and t=0.1
    assert lines[0] == "t,1:Variable 1,2:Variable 2"
    assert lines[1] == "0,1,1"


def test_export_csv_empty_outputs():
    m = helpers.build_model({(1, 2)})
    traj = run(m, horizon=0.2, dt=0.1)
    text = engine.export_csv(traj, ())
    assert text.splitlines() == ["t", "0", "0.1", "0.2"]


def test_export_csv_nine_significant_digits():
    m = helpers.build_model({(1, 2)})
    traj = run(m, init={1: 0.123456789123}, gains={(1, 2): 0.0})
    row = engine.export_csv(traj, (1,)).splitlines()[1]
    assert row == "0,0.123456789"


def test_export_csv_unknown_reference():
    m = helpers.build_model({(1, 2)})
    traj = run(m)
    with pytest.raises(UnknownReferenceError):
        engine.export_csv(traj, (7,))


def test_deterministic_csv(canonical):
    spec = corpus.load_scenario("baseline")
    first = engine.export_csv(
        engine.integrate(engine.compile(canonical, spec)), spec.outputs
    )
    second = engine.export_csv(
        engine.integrate(engine.compile(canonical, spec)), spec.outputs
    )
    assert first == second


def test_backends_are_bit_identical(monkeypatch):
    model = corpus.scenario_model("aip-shock")
    spec = corpus.load_scenario("aip-shock")
    system = engine.compile(model, spec)

    monkeypatch.setenv("CLDKIT_NO_NUMBA", "1")
    assert kernels.active_backend() == "numpy"
    numpy_traj = engine.integrate(system)

    monkeypatch.delenv("CLDKIT_NO_NUMBA")
    if kernels.active_backend() != "numba":
        pytest.skip("numba unavailable")
    numba_traj = engine.integrate(system)

    assert numpy_traj.values.tobytes() == numba_traj.values.tobytes()


def test_engine_matches_reference_integrator():
    rng = random.Random(616)
    for _ in range(25):
        edges = helpers.random_digraph(rng, 5, 0.4)
        if not edges:
            continue
        signs = {e: rng.choice("+-") for e in edges}
        model = helpers.build_model(edges, signs=signs)
        ids = [v.id for v in model.variables]
        spec = spec_for(
            model,
            horizon=2.0,
            dt=0.1,
            integrator=rng.choice([Integrator.EULER, Integrator.RK4]),
            init={vid: rng.uniform(0.1, 2.0) for vid in ids},
            gains={e: rng.uniform(0.1, 1.2) for e in edges},
            decay={vid: rng.uniform(0.0, 0.4) for vid in ids},
            forms={vid: Form("sat", rng.uniform(0.5, 3.0)) for vid in ids[::2]},
            drives={ids[0]: Drive(rng.choice(["constant", "ramp"]), rng.uniform(0, 0.5))},
            shocks=(Shock(ids[-1], 1.05, rng.choice(["set", "add"]), 0.7),),
        )
        traj = engine.integrate(engine.compile(model, spec))
        times, series = helpers.reference_integrate(model, spec)
        assert np.allclose(traj.times, times, rtol=0, atol=1e-12)
        for vid in ids:
            assert np.allclose(
                traj.series(vid), series[vid], rtol=1e-9, atol=1e-12
            ), (vid, signs)


def test_trajectory_metadata(two_cycle):
    traj = run(two_cycle, outputs=(9, 10))
    assert traj.var_ids == (9, 10)
    assert traj.names == ("Student job placement", "HEI relative reputation")

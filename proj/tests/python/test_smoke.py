import math

import pytest

import illiquid as il


@pytest.fixture(scope="module")
def unit():
    return il.Intensity.power_blowup(1.0, 1.0, 1.0)


def test_utility_and_bounds():
    u = il.Utility.power(0.5)
    assert u(4.0) == pytest.approx(4.0)
    m = il.Market.constant(1.0, 0.05, 0.2)
    assert il.supersolution(u, m, 0.0, 1.0) == pytest.approx(2 * math.exp(0.03125), rel=1e-14)
    value, pi = il.merton_value(u, m, 0.0, 1.0)
    assert value == pytest.approx(2 * math.exp(0.02), rel=1e-14)
    assert pi == 1.0


def test_intensity(unit):
    assert unit.cumulative(0.5) == pytest.approx(math.log(2.0))
    assert unit.inverse_cumulative(math.log(2.0)) == pytest.approx(0.5)
    assert unit.density(0.0, 0.25) == pytest.approx(1.0)
    assert unit.scaled(4.0).scale == 4.0


def test_solve_martingale(unit):
    solver = il.Solver(il.Market.constant(1.0, 0.0, 0.2), unit, il.Utility.power(0.5), il.SolverConfig())
    sol = solver.solve()
    assert sol.converged
    assert sol.value(0.0, 1.0) == 2.0
    assert set(sol.policy.values) == {0.0}


def test_solve_standard(unit):
    cfg = il.SolverConfig()
    cfg.time_nodes = 40
    solver = il.Solver(il.Market.constant(1.0, 0.05, 0.2), unit, il.Utility.power(0.5), cfg)
    sol = solver.solve()
    v = sol.value(0.0, 1.0)
    assert 2.0 < v <= 2 * math.exp(0.03125)
    assert sol.value.to_csv().startswith("w,t,phi\n")
    value, policy = solver.apply(solver.terminal_value())
    assert value(0.0, 1.0) > 2.0
    assert policy(0.0, 1.0) == pytest.approx(1.0, abs=1e-6)
    assert all(0.0 <= p <= 1.0 for p in sol.policy.values)


def test_simulation_reproducible(unit):
    cfg = il.SimConfig()
    cfg.n_paths = 2000
    cfg.seed = 4
    m = il.Market.constant(1.0, 0.05, 0.2)
    u = il.Utility.power(0.5)
    a = il.simulate_constant(0.5, u, m, unit, cfg)
    b = il.simulate_constant(0.5, u, m, unit, cfg)
    assert a.mean_utility == b.mean_utility
    zero = il.simulate_constant(0.0, u, m, unit, cfg)
    assert zero.mean_utility == 2.0 and zero.std_error == 0.0


def test_sweep_zero_drift(unit):
    cfg = il.SolverConfig()
    cfg.time_nodes = 20
    rows = il.convergence_sweep(il.Utility.power(0.5), il.Market.constant(1.0, 0.0, 0.2), unit, [1.0, 2.0], 1.0, cfg)
    assert [r.abs_gap for r in rows] == [0.0, 0.0]


def test_errors(unit):
    with pytest.raises(il.UnsupportedModel):
        jumps = il.Market(1.0, [0.05], [0.2], jump_rate=1.0, jump_log_mean=-0.1, jump_log_stdev=0.1)
        il.merton_value(il.Utility.power(0.5), jumps, 0.0, 1.0)
    with pytest.raises(il.ConfigError):
        il.run("solve", "/nonexistent.ini")

import numpy as np
import pytest

from evanshock.evolution import (
    BAND, EvolutionError, EvolutionState, Grid1D, NewtonError, advance, banded_to_dense,
    cn_jacobian, cn_residual, fit_translate, manufactured_error, pack, predicted_shift, simulate,
    unpack,
)
from evanshock.model import ShockParams, solve_profile

P = ShockParams(1.4, 0.2)


def _profile_state(params, grid):
    prof = solve_profile(params, max(abs(grid.x_left), grid.x_right) + 1, spacing=grid.dx / 4)
    v = np.asarray(prof(grid.x))
    return EvolutionState(v, v.copy(), 0.0), prof


def _random_candidate(state, rng, scale=1e-2):
    v1, u1 = state.v.copy(), state.u.copy()
    v1[1:-1] += scale * rng.standard_normal(len(v1) - 2)
    u1[1:-1] += scale * rng.standard_normal(len(u1) - 2)
    return v1, u1


def test_grid():
    g = Grid1D.symmetric(10.0, 99, 0.5)
    assert g.dx == pytest.approx(0.2) and g.dt == pytest.approx(0.1)
    assert g.x[0] == -10 and g.x[-1] == pytest.approx(10)
    with pytest.raises(ValueError):
        Grid1D(0, 1, 2, 0.1)


def test_pack_roundtrip():
    s = EvolutionState(np.arange(6.0) + 1, -np.arange(6.0))
    z = pack(s.v, s.u)
    assert list(z[:4]) == [2.0, -1.0, 3.0, -2.0]
    v, u = unpack(z, s)
    assert np.array_equal(v, s.v) and np.array_equal(u, s.u)


def test_constant_state_residual_zero():
    grid = Grid1D.symmetric(5.0, 50, 0.5)
    s = EvolutionState(np.full(52, P.v_plus), np.full(52, 0.3))
    F, G = cn_residual(s, s.v, s.u, P, grid)
    assert np.all(F == 0) and np.all(G == 0)


def test_constant_state_stays():
    grid = Grid1D.symmetric(5.0, 50, 0.5)
    s = EvolutionState(np.full(52, P.v_plus), np.full(52, 0.3))
    for _ in range(10):
        s, info = advance(s, P, grid)
    assert np.max(np.abs(s.v - P.v_plus)) <= 1e-13
    assert np.max(np.abs(s.u - 0.3)) <= 1e-13
    assert info.iterations == 0


@pytest.mark.parametrize("mode", ["lagged", "centered"])
def test_jacobian_vs_finite_differences(mode):
    rng = np.random.default_rng(3)
    grid = Grid1D.symmetric(6.0, 40, 0.5)
    s, _ = _profile_state(P, grid)
    v1, u1 = _random_candidate(s, rng)
    J = banded_to_dense(cn_jacobian(s, v1, u1, P, grid, mode))

    def r(z):
        vv, uu = unpack(z, s)
        F, G = cn_residual(s, vv, uu, P, grid, coefficients=mode)
        out = np.empty(2 * grid.n)
        out[0::2], out[1::2] = F, G
        return out

    z = pack(v1, u1)
    for _ in range(5):
        d = rng.standard_normal(z.size)
        d /= np.linalg.norm(d)
        h = 1e-7
        fd = (r(z + h * d) - r(z - h * d)) / (2 * h)
        assert np.linalg.norm(fd - J @ d) <= 1e-6 * np.linalg.norm(J @ d)


def test_bandwidth():
    grid = Grid1D.symmetric(6.0, 30, 0.5)
    s, _ = _profile_state(P, grid)
    J = banded_to_dense(cn_jacobian(s, s.v, s.u, P, grid))
    nodes = np.arange(J.shape[0]) // 2
    far = np.abs(nodes[:, None] - nodes[None, :]) > 1
    assert np.all(J[far] == 0)
    assert BAND == (3, 3)


def test_jacobian_dominated_by_dt():
    grid = Grid1D(-5.0, 5.0, 30, 1e-9)
    s = EvolutionState(np.full(32, 0.5), np.full(32, 0.1))
    J = banded_to_dense(cn_jacobian(s, s.v, s.u, P, grid))
    assert np.allclose(J * grid.dt, np.eye(J.shape[0]), atol=1e-6)


def test_nonpositive_candidate():
    grid = Grid1D.symmetric(5.0, 20, 0.5)
    s = EvolutionState(np.full(22, 0.5), np.zeros(22))
    bad = s.v.copy()
    bad[5] = -0.1
    with pytest.raises(EvolutionError):
        cn_residual(s, bad, s.u, P, grid)


def test_newton_failure_reported():
    grid = Grid1D.symmetric(5.0, 20, 50.0)
    s, _ = _profile_state(ShockParams(1.4, 1e-3), grid)
    s.u[1:-1] += 0.5
    with pytest.raises(NewtonError, match="dt|v > 0"):
        advance(s, ShockParams(1.4, 1e-3), grid, max_iters=2)


def test_stationary_profile_residual_second_order():
    errs = []
    for n in (199, 399, 799):
        grid = Grid1D.symmetric(10.0, n, 0.5)
        s, _ = _profile_state(P, grid)
        F, G = cn_residual(s, s.v, s.u, P, grid)
        errs.append(max(np.max(np.abs(F)), np.max(np.abs(G))))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 1.9)


@pytest.mark.parametrize("mode", ["lagged", "centered"])
def test_manufactured_order(mode):
    e = [manufactured_error(P, n, coefficients=mode) for n in (79, 159, 319)]
    ratios = [a / b for a, b in zip(e, e[1:])]
    assert all(3.4 <= r <= 4.6 for r in ratios), ratios


def test_unperturbed_drift_small():
    grid = Grid1D.symmetric(15.0, 300, 0.5)
    s, _ = _profile_state(P, grid)
    v0 = s.v.copy()
    for _ in range(20):
        s, info = advance(s, P, grid)
        assert info.iterations <= 5
    drift = np.max(np.abs(s.v - v0)) / (20 * grid.dt)
    assert drift <= 10 * grid.dx**2


def test_fit_translate_recovers_shift():
    prof = solve_profile(P, 30.0)
    x = np.linspace(-20, 20, 801)
    s, res = fit_translate(prof(x - 0.731), x, prof)
    assert s == pytest.approx(0.731, abs=1e-7)
    assert res < 1e-8


STRONG = ShockParams(1.4, 1e-3)


def _small_run(amplitude, component="both"):
    grid = Grid1D.symmetric(30.0, 400, 0.5)
    return simulate(STRONG, grid, 30.0, amplitude=amplitude, width=1.5, component=component,
                    fit_every=5.0), grid


def test_zero_perturbation():
    res, _ = _small_run(0.0)
    assert abs(res.shift) < 1e-8
    assert res.final_residual < 1e-10


def test_translate_and_linear_response():
    a, grid = _small_run(0.02)
    b, _ = _small_run(0.04)
    pred = predicted_shift(STRONG, grid, 0.02, 1.5)
    assert a.shift == pytest.approx(pred, rel=0.01)
    assert b.shift / a.shift == pytest.approx(2.0, rel=0.25)
    assert a.relative_residual < 1e-2
    assert a.residual_history[-1] < a.residual_history[0]


def test_u_only_bump_relaxes_back():
    res, grid = _small_run(0.02, component="u")
    assert abs(res.shift) < 0.01 * abs(predicted_shift(STRONG, grid, 0.02, 1.5))
    assert predicted_shift(STRONG, grid, component="u") == 0.0


def test_snapshots_and_report():
    grid = Grid1D.symmetric(10.0, 100, 0.5)
    res = simulate(P, grid, 1.0, snapshot_times=(0.0, 0.5, 1.0), fit_every=0.5)
    assert sorted(res.snapshots) == [0.0, 0.5, 1.0]
    rep = res.report()
    assert rep["max_newton_iterations"] <= 5
    assert len(rep["times"]) == len(rep["shift_history"]) == 3


def test_bad_component():
    with pytest.raises(ValueError):
        simulate(P, Grid1D.symmetric(10.0, 50, 0.5), 0.1, component="w")

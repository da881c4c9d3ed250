"""ETD time stepping, energy bookkeeping, and the Picard oracle."""

import numpy as np
import pytest

from conslaw.solver import (
    BlowUpError,
    SolverConfig,
    phi1,
    phi2,
    picard_solve,
    solve,
    step,
)
from conslaw.spectral import Field, ModelParams, make_grid, sigma


MODEL = ModelParams(s1=0.25, s2=0.75, theta=2)


def gauss(grid, amp=0.5, width=1.0):
    r2 = sum(x**2 for x in grid.x_mesh)
    return Field(grid, amp * np.exp(-r2 / width**2))


def test_phi_functions_match_series():
    # moderate arguments: direct formulas are well conditioned
    z = np.array([-2.0, -0.5, 0.5, 2.0])
    np.testing.assert_allclose(phi1(z), np.expm1(z) / z, rtol=1e-14)
    np.testing.assert_allclose(phi2(z), (np.exp(z) - 1 - z) / z**2, rtol=1e-13)
    # small arguments: the direct formula for phi2 cancels catastrophically,
    # so compare against the truncated series values
    zs = np.array([-1e-5, 0.0, 1e-5])
    np.testing.assert_allclose(phi1(zs), 1.0 + zs / 2 + zs**2 / 6, rtol=1e-14)
    np.testing.assert_allclose(phi2(zs), 0.5 + zs / 6 + zs**2 / 24, rtol=1e-14)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(MODEL, dt=-0.1, T=1.0)
    with pytest.raises(ValueError):
        SolverConfig(MODEL, dt=0.1, T=0.05)
    with pytest.raises(ValueError):
        SolverConfig(MODEL, dt=0.1, T=1.0, integrator="rk4")
    with pytest.raises(ValueError):
        SolverConfig(MODEL, dt=0.1, T=1.0, record_every=0)


def test_linear_step_is_exact_propagator():
    g = make_grid(1, 256, 50.0)
    u = gauss(g)
    out = step(u, 0.7, MODEL, linear=True)
    expected = np.fft.ifft(np.exp(-0.7 * sigma(g.xi_sq, MODEL.s1)) * np.fft.fft(u.values)).real
    np.testing.assert_allclose(out.values, expected, atol=1e-14)


def test_mean_conservation():
    g = make_grid(1, 256, 50.0)
    cfg = SolverConfig(MODEL, dt=0.05, T=2.0, record_every=5)
    traj = solve(gauss(g), cfg)
    mean = traj.norm_history["mean"]
    np.testing.assert_allclose(mean, mean[0], rtol=1e-12)


def test_etdrk2_second_order():
    # self-convergence of the nonlinear step against a fine reference
    g = make_grid(1, 256, 50.0)
    u0 = gauss(g, amp=0.8)
    T = 0.5

    def final(dt, integrator):
        cfg = SolverConfig(MODEL, dt=dt, T=T, integrator=integrator,
                           record_every=10**6, store_snapshots=True)
        return solve(u0, cfg).snapshots[-1].values

    ref = final(T / 512, "etdrk2")
    e1 = np.max(np.abs(final(T / 16, "etdrk2") - ref))
    e2 = np.max(np.abs(final(T / 32, "etdrk2") - ref))
    assert e1 / e2 == pytest.approx(4.0, rel=0.25)
    # ETD1 is first order
    d1 = np.max(np.abs(final(T / 16, "etd1") - ref))
    d2 = np.max(np.abs(final(T / 32, "etd1") - ref))
    assert d1 / d2 == pytest.approx(2.0, rel=0.25)


def test_blowup_detection():
    g = make_grid(1, 64, 10.0)
    u0 = gauss(g, amp=1e150)
    cfg = SolverConfig(MODEL, dt=0.1, T=1.0)
    with pytest.raises(BlowUpError):
        solve(u0, cfg)


def test_trajectory_recording_and_observer():
    g = make_grid(1, 256, 50.0)
    seen = []

    def obs(t, U):
        seen.append(t)
        return {"extra": float(np.abs(U[0]))}

    cfg = SolverConfig(MODEL, dt=0.1, T=1.0, record_every=2, l_values=(1.0,),
                       store_snapshots=True)
    traj = solve(gauss(g), cfg, observer=obs)
    assert traj.times[0] == 0.0 and traj.times[-1] == pytest.approx(1.0)
    assert len(traj.times) == 6  # t = 0, 0.2, ..., 1.0
    for key in ("L1", "L2", "Linf", "Hs2", "Hdot_s", "mean", "hdot_1", "extra"):
        assert len(traj.norm_history[key]) == 6
    assert len(traj.snapshots) == 6
    assert traj.diss_cumulative[0] == 0.0
    assert np.all(np.diff(traj.diss_cumulative) > 0)
    assert seen == pytest.approx(list(traj.times))


def test_wraparound_detection():
    # strongly advecting small box: mass reaches the boundary shell quickly
    g = make_grid(1, 128, 10.0)
    u0 = gauss(g, amp=0.5)
    cfg = SolverConfig(MODEL, dt=0.05, T=5.0, record_every=1, linear=True)
    traj = solve(u0, cfg)
    assert np.isfinite(traj.t_wrap)
    assert traj.t_wrap <= 5.0


def test_picard_contracts_and_matches_etd():
    g = make_grid(1, 512, 100.0)
    u0 = gauss(g, amp=0.8)
    T0 = 0.1
    res = picard_solve(u0, T0, MODEL, n_nodes=64)
    assert res.converged
    assert all(k < 1 for k in res.factors)
    cfg = SolverConfig(MODEL, dt=T0 / 100, T=T0, record_every=10**6,
                       store_snapshots=True)
    etd = solve(u0, cfg).snapshots[-1]
    assert np.max(np.abs(res.final.values - etd.values)) < 1e-7
    with pytest.raises(ValueError):
        picard_solve(u0, 0.0, MODEL)

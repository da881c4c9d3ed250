"""Acceptance suite: one test per numbered criterion, at the stated
tolerances.  Long runs are shared through module-scoped fixtures; each
criterion shows up as one pass/fail line under pytest -v.
"""

import json
import time

import numpy as np
import pytest

from conslaw.decay import DecayConfig, run_decay_experiment
from conslaw.greens import (
    envelope_sweep,
    greens_hat,
    greens_norms,
    kernel_field,
    make_kernel,
    sweep_stability,
)
from conslaw.norms import (
    check_interpolation,
    check_product_estimate,
    hom_sobolev_norm,
    lp_norm,
    random_band_limited,
    sobolev_norm,
)
from conslaw.solver import SolverConfig, picard_solve, solve
from conslaw.spectral import Field, ModelParams, forward, make_grid, sigma

MODEL = ModelParams(s1=0.25, s2=0.75, theta=2)


def geo_mean(xs):
    return float(np.exp(np.mean(np.log(xs))))


# ---------------------------------------------------------------- shared runs


@pytest.fixture(scope="module")
def linear_1d_run():
    """Linear n=1 long-time run used by criteria 7(a), 8 and 9."""
    cfg = DecayConfig(dim=1, N=4096, L=400.0, model=MODEL, amplitude=0.8,
                      width=1.0, dt=0.05, T=200.0, record_every=10, linear=True,
                      t_min=5.0, l_values=(0.0, 1.0), slope_tol=0.07,
                      experiment_id="linear-1d")
    report, traj = run_decay_experiment(cfg)
    assert report.complete
    return report, traj


@pytest.fixture(scope="module")
def nonlinear_1d_run():
    """Nonlinear n=1 consistency probe used by criteria 7(b) and 9."""
    cfg = DecayConfig(dim=1, N=4096, L=400.0, model=MODEL, amplitude=0.8,
                      width=1.0, dt=0.05, T=200.0, record_every=10, linear=False,
                      t_min=5.0, l_values=(0.0, 1.0), slope_tol=0.07,
                      experiment_id="nonlinear-1d")
    report, traj = run_decay_experiment(cfg)
    assert report.complete
    assert any("consistency probe" in f for f in report.flags)
    return report, traj


# ------------------------------------------------------------------ criteria


def test_criterion_01_heat_kernel_oracle():
    # s1 = 0 reduces the kernel to the heat kernel; the comparison is in the
    # uniform norm relative to the kernel peak on |x| <= L/4 (pointwise
    # relative error is meaningless where the Gaussian underflows)
    t0 = time.time()
    g = make_grid(1, 4096, 200.0)
    t = 1.0
    G = kernel_field(make_kernel(g, t, 0.0)).values
    H = (4 * np.pi * t) ** -0.5 * np.exp(-g.x1d**2 / (4 * t))
    mask = np.abs(g.x1d) <= g.L / 4
    err = np.max(np.abs(G[mask] - H[mask])) / np.max(H)
    assert err < 1e-8
    assert time.time() - t0 < 1.0


def test_criterion_02_semigroup_property():
    g = make_grid(1, 512, 80.0)
    for s1 in (0.0, 0.25, 0.5, 0.75):
        prod = greens_hat(g, 0.3, s1).coeffs * greens_hat(g, 0.7, s1).coeffs
        whole = greens_hat(g, 1.0, s1).coeffs
        assert np.max(np.abs(prod - whole)) < 1e-14


def test_criterion_03_greens_norm_laws():
    t0 = time.time()
    g = make_grid(1, 65536, 200.0)
    ts = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0]
    failures = []
    for s1 in (0.25, 0.5, 0.75):
        l1, grad, l2 = [], [], []
        for t in ts:
            n = greens_norms(make_kernel(g, t, s1))
            l1.append(n["L1"])
            grad.append(n["gradL1"] * np.sqrt(t))
            l2.append(n["L2"] * t**0.25)
        for name, series, bound in (("mass", l1, 1.5), ("grad-mass", grad, 2.0),
                                    ("l2", l2, 2.0)):
            factor = max(series) / min(series)
            if factor >= bound:
                failures.append(f"s1={s1}: {name} factor {factor:.3f} >= {bound}")
    assert time.time() - t0 < 30.0
    assert not failures, "; ".join(failures)


def test_criterion_04_envelope_stability():
    # bounded empirical constant over the sweep: the max ratio must not grow
    # beyond (twice) its initial value; for the high band the ratio collapses
    # because the band decays exponentially faster than the envelope
    g = make_grid(1, 16384, 200.0)
    ts = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]
    for part in ("G1", "G3"):
        stab = sweep_stability(envelope_sweep(g, 0.5, ts, part=part))
        assert all(np.isfinite(r) for r in stab.ratios)
        assert stab.growth_factor < 2.0, f"{part}: growth {stab.growth_factor:.3f}"


def test_criterion_05_energy_identity_order():
    g = make_grid(1, 1024, 100.0)
    r2 = g.x1d**2
    u0 = Field(g, 0.8 * np.exp(-r2))
    residuals = []
    for dt in (0.02, 0.01, 0.005):
        cfg = SolverConfig(MODEL, dt=dt, T=10.0, record_every=10)
        traj = solve(u0, cfg)
        E = traj.norm_history["Hs2"] ** 2
        res = abs(E[-1] + 2 * traj.diss_cumulative[-1] - E[0]) / E[0]
        residuals.append(res)
        assert np.all(np.diff(traj.norm_history["Hs2"]) <= 1e-12 * traj.norm_history["Hs2"][0])
    assert residuals[0] / residuals[1] >= 3.5
    assert residuals[1] / residuals[2] >= 3.5


def test_criterion_06_picard_oracle():
    g = make_grid(1, 1024, 100.0)
    u0 = Field(g, 0.8 * np.exp(-g.x1d**2))
    T0 = 0.1
    res = picard_solve(u0, T0, MODEL, n_nodes=64, tol=1e-8)
    assert res.converged
    assert all(k < 1 for k in res.factors[1:])
    # independent ETD integration to the same time
    cfg = SolverConfig(MODEL, dt=1e-3, T=T0, record_every=10**6, store_snapshots=True)
    etd = solve(u0, cfg).snapshots[-1]
    s = max(MODEL.s2, g.dim / 2.0) + 0.5
    diff = Field(g, res.final.values - etd.values)
    assert float(sobolev_norm(forward(diff), s)) < 1e-6
    # halving T0: the asymptotic contraction factor scales roughly linearly
    res_half = picard_solve(u0, T0 / 2, MODEL, n_nodes=64, tol=1e-8)
    k_full = geo_mean(res.factors[1:])
    k_half = geo_mean(res_half.factors[1:])
    assert 1.5 <= k_full / k_half <= 2.5


def test_criterion_07a_linear_decay_rates(linear_1d_run):
    report, _ = linear_1d_run
    assert report.fits["L2"]["fitted"] == pytest.approx(-0.25, abs=0.03)
    assert report.fits["hdot_1"]["fitted"] == pytest.approx(-0.75, abs=0.05)


def test_criterion_07b_nonlinear_consistency_probe(nonlinear_1d_run):
    report, _ = nonlinear_1d_run
    assert report.fits["L2"]["fitted"] == pytest.approx(-0.25, abs=0.07)
    assert report.fits["hdot_1"]["fitted"] == pytest.approx(-0.75, abs=0.07)


def test_criterion_07c_three_dimensional_rate():
    t0 = time.time()
    model3 = ModelParams(s1=0.25, s2=0.75, theta=2, flux_dir=(1.0, 0.0, 0.0))
    cfg = DecayConfig(dim=3, N=64, L=64.0, model=model3, amplitude=0.5, width=3.0,
                      dt=0.05, T=40.0, record_every=10, linear=False, t_min=3.0,
                      l_values=(), slope_tol=0.12, experiment_id="coarse-3d")
    report, _ = run_decay_experiment(cfg)
    assert report.complete
    assert report.fits["L2"]["fitted"] == pytest.approx(-0.75, abs=0.12)
    assert time.time() - t0 < 600.0


def test_criterion_08_low_frequency_rates(linear_1d_run):
    report, _ = linear_1d_run
    assert report.fits["uL_hdot_0"]["fitted"] == pytest.approx(-0.25, abs=0.07)
    assert report.fits["uL_hdot_1"]["fitted"] == pytest.approx(-0.75, abs=0.07)


def test_criterion_09_l1_stability(linear_1d_run, nonlinear_1d_run):
    for report, _ in (linear_1d_run, nonlinear_1d_run):
        assert report.l1_sup_ratio <= 3.0


def test_criterion_10_inequality_suite():
    g = make_grid(1, 256, 50.0)
    rng = np.random.default_rng(2024)
    s = 2.0
    lo, hi = 1.0, 2.0 ** (s - 1.0)
    interp_viol = equiv_viol = 0
    equiv_ratios, prod_consts = [], []
    for _ in range(1000):
        f = random_band_limited(g, rng)
        F = forward(f)
        if not check_interpolation(F, 0.5, 2.0).ok:
            interp_viol += 1
        r = float(sobolev_norm(F, s)) ** 2 / (
            float(lp_norm(f, 2)) ** 2 + float(hom_sobolev_norm(F, s)) ** 2
        )
        equiv_ratios.append(r)
        if not lo * (1 - 1e-9) <= r <= hi * (1 + 1e-9):
            equiv_viol += 1
        prod_consts.append(check_product_estimate(f, f, 1.0, (2, np.inf, 2, 2, np.inf)).ratio)
    assert interp_viol == 0
    assert equiv_viol == 0
    assert all(np.isfinite(c) and c > 0 for c in prod_consts)
    assert max(prod_consts) / min(prod_consts) < 10.0


def test_criterion_11_determinism(tmp_path):
    from conslaw.cli import main

    cases = [
        ["picard", "--seed", "3", "--set", "grid.N=256", "--set", "grid.L=60"],
        ["verify-lemmas", "--seed", "3", "--set", "grid.N=128",
         "--set", "experiment.n_fields=50"],
        ["decay", "--seed", "3", "--set", "grid.N=512", "--set", "grid.L=200",
         "--set", "solver.T=40", "--set", "solver.dt=0.1",
         "--set", "solver.linear=true", "--set", "experiment.t_min=2",
         "--set", "experiment.slope_tol=0.2"],
    ]
    for args in cases:
        a, b = tmp_path / ("a" + args[0]), tmp_path / ("b" + args[0])
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes(), args[0]
        # reports carry no volatile content
        payload = json.loads((a / "report.json").read_text())
        assert "elapsed_seconds" not in payload

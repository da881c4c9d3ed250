"""Linear-flow kernel: cutoffs, band decomposition, envelope checks."""

import numpy as np
import pytest

from conslaw.greens import (
    algebraic_envelope,
    bump_ramp,
    check_envelope_G1,
    check_envelope_G3,
    decompose,
    envelope_order,
    envelope_sweep,
    greens_hat,
    greens_norms,
    kernel_field,
    make_cutoffs,
    make_kernel,
    sweep_stability,
)
from conslaw.spectral import make_grid


@pytest.fixture
def grid():
    return make_grid(1, 1024, 100.0)


def test_bump_ramp_profile():
    s = np.linspace(-1, 2, 301)
    r = bump_ramp(s)
    assert np.all(r[s <= 0] == 0)
    assert np.all(r[s >= 1] == 1)
    # monotone throughout; the interior is strictly inside (0, 1) except
    # where the profile saturates to machine precision near the endpoints
    mid = (s > 0) & (s < 1)
    assert np.all((r[mid] >= 0) & (r[mid] <= 1))
    assert np.all(np.diff(r[mid]) >= 0)
    core = (s >= 0.1) & (s <= 0.9)
    assert np.all((r[core] > 0) & (r[core] < 1))
    assert np.all(np.diff(r[core]) > 0)
    assert bump_ramp(0.5) == pytest.approx(0.5)


def test_cutoff_partition(grid):
    bank = make_cutoffs(grid, delta=0.5, R=3.0)
    np.testing.assert_allclose(bank.chi1 + bank.chi2 + bank.chi3, 1.0, atol=1e-14)
    r = grid.xi_abs
    assert np.all(bank.chi1[r <= 0.5] == 1)
    assert np.all(bank.chi1[r >= 1.0] == 0)
    assert np.all(bank.chi3[r >= 3.0] == 1)
    assert np.all(bank.chi3[r <= 2.0] == 0)
    assert np.all((bank.chi2 >= -1e-14) & (bank.chi2 <= 1 + 1e-14))


def test_cutoff_validation(grid):
    with pytest.raises(ValueError):
        make_cutoffs(grid, delta=1.5)
    with pytest.raises(ValueError):
        make_cutoffs(grid, R=1.5)
    with pytest.raises(ValueError):
        make_cutoffs(grid, delta=0.9, R=2.5)  # bands collide


def test_greens_hat_basic(grid):
    F = greens_hat(grid, 0.0, 0.5)
    np.testing.assert_allclose(F.coeffs, 1.0)
    F = greens_hat(grid, 2.0, 0.5)
    assert np.all((F.coeffs.real > 0) & (F.coeffs.real <= 1))
    with pytest.raises(ValueError):
        greens_hat(grid, -1.0, 0.5)
    with pytest.raises(ValueError):
        greens_hat(grid, 1.0, -0.5)


def test_kernel_mass(grid):
    # quadrature integral of G equals the symbol at xi = 0, i.e. 1
    ker = make_kernel(grid, 3.0, 0.25)
    G = kernel_field(ker)
    assert np.sum(G.values) * grid.cell_volume == pytest.approx(1.0, rel=1e-12)
    assert ker.nu == pytest.approx(0.75)


def test_decomposition_reconstructs(grid):
    ker = make_kernel(grid, 2.0, 0.5)
    bank = make_cutoffs(grid)
    G1, G2, G3 = decompose(ker, bank)
    total = G1.values + G2.values + G3.values
    np.testing.assert_allclose(total, kernel_field(ker).values, atol=1e-12)
    other = make_cutoffs(make_grid(1, 512, 100.0))
    with pytest.raises(ValueError):
        decompose(ker, other)


def test_envelope_reports(grid):
    ker = make_kernel(grid, 4.0, 0.5)
    bank = make_cutoffs(grid)
    r1 = check_envelope_G1(ker, bank)
    r3 = check_envelope_G3(ker, bank, alpha=1)
    assert r1.part == "G1" and r3.part == "G3"
    assert np.isfinite(r1.ratio) and r1.ratio > 0
    assert np.isfinite(r3.ratio) and r3.ratio >= 0
    assert r1.N_env == envelope_order(1, 0.5) == 2
    with pytest.raises(ValueError):
        check_envelope_G1(make_kernel(grid, 0.5, 0.5), bank)  # t < 1
    with pytest.raises(ValueError):
        check_envelope_G1(ker, bank, alpha=2)
    with pytest.raises(ValueError):
        check_envelope_G3(make_kernel(grid, 4.0, 1.0), bank)  # s1 >= 1


def test_envelope_order_threshold():
    assert envelope_order(1, 0.0) == 2
    assert envelope_order(3, 0.5) == 4
    assert envelope_order(1, 0.75) == 3


def test_algebraic_envelope_shape():
    x = np.array([0.0, 1.0, 10.0])
    e = algebraic_envelope(x, t=0.0, N_env=2)
    np.testing.assert_allclose(e, (1 + x**2) ** -2)
    e_nu = algebraic_envelope(x, t=3.0, N_env=1, nu=0.5)
    np.testing.assert_allclose(e_nu, (1 + np.abs(x) / 4.0) ** -1)


def test_sweep_stability(grid):
    reports = envelope_sweep(grid, 0.5, [1.0, 2.0, 4.0], part="G1")
    stab = sweep_stability(reports)
    assert len(stab.ratios) == 3
    assert stab.growth_factor >= 0
    assert stab.spread_factor >= stab.growth_factor or stab.ratios[0] == max(stab.ratios)


def test_greens_norms_heat_case():
    # s1 = 0 is the heat semigroup: ||G||_L1 = 1, ||G||_L2 = (8 pi t)^(-1/4)
    g = make_grid(1, 4096, 200.0)
    norms = greens_norms(make_kernel(g, 1.0, 0.0))
    assert norms["L1"] == pytest.approx(1.0, rel=1e-8)
    assert norms["L2"] == pytest.approx((8 * np.pi) ** -0.25, rel=1e-8)
    # ||d/dx G||_L1 = 2 * G(0) = (pi t)^(-1/2); the integrand has a kink at
    # the origin, so the quadrature is only second-order accurate there
    assert norms["gradL1"] == pytest.approx(np.pi**-0.5, rel=1e-3)

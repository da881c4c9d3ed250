"""Discrete Lp / Sobolev norms and empirical checks of the inequality toolbox.

All physical norms use the quadrature weight h^n; spectral sums use the
Parseval-matched weight h^n / N^n, so the H^0 norm coincides with L^2 to
rounding.  The inequality checkers return ratio reports rather than booleans:
the classical inequalities assert existence of constants, so the artifact
records empirical constants and flags only violations of the constant-free
statements (interpolation, equivalence brackets).
"""

import math
from dataclasses import dataclass

import numpy as np

from .spectral import Field, SpectralField, forward, inverse, lambda_power


@dataclass(frozen=True)
class NormValue:
    kind: str
    value: float

    def __float__(self) -> float:
        return self.value


def lp_norm(f: Field, p) -> NormValue:
    """(sum |f|^p h^n)^(1/p), or max|f| for p = inf."""
    if p == np.inf or p == math.inf:
        return NormValue("Linf", float(np.max(np.abs(f.values))))
    if p < 1:
        raise ValueError(f"Lp norm requires p >= 1, got {p}")
    val = float(np.sum(np.abs(f.values) ** p) * f.grid.cell_volume) ** (1.0 / p)
    return NormValue(f"L{p}", val)


def sobolev_norm(F: SpectralField, s: float) -> NormValue:
    """Inhomogeneous Sobolev norm from the weight (1+|xi|^2)^s."""
    g = F.grid
    val = np.sum((1.0 + g.xi_sq) ** s * np.abs(F.coeffs) ** 2) * g.spectral_weight
    return NormValue(f"H{s}", float(np.sqrt(val)))


def hom_sobolev_norm(F: SpectralField, s: float) -> NormValue:
    """Homogeneous Sobolev norm from the weight |xi|^(2s); s >= 0 only."""
    if s < 0:
        raise ValueError(f"homogeneous Sobolev norm requires s >= 0, got {s}")
    g = F.grid
    val = np.sum(g.xi_sq**s * np.abs(F.coeffs) ** 2) * g.spectral_weight
    return NormValue(f"Hdot{s}", float(np.sqrt(val)))


@dataclass(frozen=True)
class RatioReport:
    """lhs / rhs of an inequality check; ok means lhs <= rhs up to slack."""

    lhs: float
    rhs: float
    ratio: float
    ok: bool


def check_interpolation(F: SpectralField, r1: float, r2: float, region=None) -> RatioReport:
    """Frequency-domain Hoelder interpolation between derivative orders.

    Compares sum_D (|xi|^r1 |u|)^2 against the r1/r2-interpolated product of
    the order-r2 and order-0 sums over the same frequency region D.  The
    inequality is a theorem; a reported violation is an implementation bug.
    """
    if not (r2 >= r1 > 0):
        raise ValueError(f"need r2 >= r1 > 0, got r1={r1}, r2={r2}")
    g = F.grid
    w = g.spectral_weight
    mag2 = np.abs(F.coeffs) ** 2
    if region is not None:
        mag2 = mag2 * region
    a = r1 / r2
    lhs = float(np.sum(g.xi_sq**r1 * mag2) * w)
    high = float(np.sum(g.xi_sq**r2 * mag2) * w)
    low = float(np.sum(mag2) * w)
    rhs = high**a * low ** (1.0 - a)
    ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else np.inf)
    return RatioReport(lhs, rhs, ratio, lhs <= rhs * (1.0 + 1e-12))


def _inv(p) -> float:
    return 0.0 if p == np.inf else 1.0 / p


def _lp_of_spectral(F: SpectralField, p) -> float:
    if p == 2:
        # cheaper and exact in spectral space
        g = F.grid
        return float(np.sqrt(np.sum(np.abs(F.coeffs) ** 2) * g.spectral_weight))
    return float(lp_norm(inverse(F), p))


def gagliardo_nirenberg_exponent(n: int, j: int, m: int, p, q, r) -> float:
    """Interpolation weight a from the dimensional-balance relation."""
    # 1/p = j/n + a (1/r - m/n) + (1-a)/q
    denom = _inv(r) - m / n - _inv(q)
    if denom == 0:
        raise ValueError("degenerate exponent tuple: a is undetermined")
    a = (_inv(p) - j / n - _inv(q)) / denom
    return a


@dataclass(frozen=True)
class GNReport:
    ratio: float
    a: float


def check_gagliardo_nirenberg(f: Field, j: int, m: int, p, q, r) -> GNReport:
    """Empirical constant of the derivative interpolation inequality.

    Returns ||D^j u||_p / (||D^m u||_r^a ||u||_q^(1-a)) with a fixed by the
    dimensional balance.  Derivatives are realized spectrally as |xi|^j.
    """
    if not (0 <= j <= m):
        raise ValueError(f"need 0 <= j <= m, got j={j}, m={m}")
    n = f.grid.dim
    a = gagliardo_nirenberg_exponent(n, j, m, p, q, r)
    if not (j / m <= a <= 1 if m > 0 else a == 0):
        raise ValueError(f"exponent a={a:.4g} outside [j/m, 1]")
    crit = m - j - (0 if r == np.inf else n / r)
    if a == 1 and crit >= 0 and abs(crit - round(crit)) < 1e-12:
        raise ValueError("endpoint a = 1 excluded when m - j - n/r is a nonnegative integer")
    F = forward(f)
    num = _lp_of_spectral(lambda_power(F, j), p)
    dm = _lp_of_spectral(lambda_power(F, m), r)
    dq = _lp_of_spectral(F, q)
    den = dm**a * dq ** (1.0 - a)
    ratio = num / den if den > 0 else (0.0 if num == 0 else np.inf)
    return GNReport(ratio, a)


def check_product_estimate(g: Field, h: Field, l: float, exponents) -> RatioReport:
    """Empirical constant of the fractional Leibniz product estimate.

    exponents = (r, p1, q1, p2, q2) with 1/r = 1/p1 + 1/q1 = 1/p2 + 1/q2.
    Returns ||Lam^l (g h)||_r divided by the two-term right-hand side; the
    constant is recorded, not asserted.
    """
    r, p1, q1, p2, q2 = exponents
    if l <= 0:
        raise ValueError(f"product estimate requires l > 0, got {l}")
    if abs(_inv(r) - _inv(p1) - _inv(q1)) > 1e-12 or abs(_inv(r) - _inv(p2) - _inv(q2)) > 1e-12:
        raise ValueError("exponents violate 1/r = 1/p1 + 1/q1 = 1/p2 + 1/q2")
    if g.grid is not h.grid and g.grid != h.grid:
        raise ValueError("fields must share a grid")
    prod = Field(g.grid, g.values * h.values)
    lhs = _lp_of_spectral(lambda_power(forward(prod), l), r)
    Fg, Fh = forward(g), forward(h)
    rhs = _lp_of_spectral(Fg, p1) * _lp_of_spectral(lambda_power(Fh, l), q1) + _lp_of_spectral(
        lambda_power(Fg, l), p2
    ) * _lp_of_spectral(Fh, q2)
    ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else np.inf)
    return RatioReport(lhs, rhs, ratio, np.isfinite(ratio))


def random_band_limited(grid, rng, decay_exp=None, band_frac=0.5, amplitude=1.0) -> Field:
    """Seeded real Gaussian field with power-law spectrum, band-limited.

    The spectral amplitude is |xi|^(-decay_exp) (1 at the mean mode), with the
    default decay (n+1)/2 + 1 placing samples in every space the checks need.
    band_frac limits modes to |k_j| <= band_frac * N/2 so pointwise products
    stay resolvable.
    """
    if decay_exp is None:
        decay_exp = (grid.dim + 1) / 2 + 1
    noise = rng.standard_normal(grid.shape)
    F = np.fft.fftn(noise)
    amp = np.where(grid.xi_sq > 0, (grid.xi_sq + (grid.xi_sq == 0)) ** (-decay_exp / 2), 1.0)
    F = F * amp * grid.dealias_mask(band_frac)
    vals = np.fft.ifftn(F).real
    peak = np.max(np.abs(vals))
    if peak > 0:
        vals = vals * (amplitude / peak)
    return Field(grid, vals)

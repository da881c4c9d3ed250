"""Linear-flow kernel: spectral construction, band decomposition, decay checks.

The kernel symbol is exp(-t * sigma(xi)) with sigma = |xi|^2/(1+|xi|^2)^s1.
Three smooth cutoffs split it into a low band (heat-like, algebraic spatial
envelope), a middle band (exponentially small in t) and a high band whose
envelope involves the reduced dissipation order nu = 1 - s1.  Envelope
checks report the empirical constant sup_x |part| / (t^(-power) * envelope)
restricted to |x| <= L/4, away from periodic wraparound.
"""

import math
from dataclasses import dataclass

import numpy as np

from .spectral import Field, Grid, SpectralField, sigma, symbol_to_kernel


def bump_ramp(s):
    """C-infinity ramp: 0 for s <= 0, 1 for s >= 1, strictly increasing between.

    Profile e^(-1/s) / (e^(-1/s) + e^(-1/(1-s))) on (0, 1); fixed once so
    every cutoff in the suite is reproducible.
    """
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    out = np.zeros_like(s)
    inside = (s > 0) & (s < 1)
    si = s[inside]
    a = np.exp(-1.0 / si)
    b = np.exp(-1.0 / (1.0 - si))
    out[inside] = a / (a + b)
    out[s >= 1] = 1.0
    return out


@dataclass(frozen=True)
class CutoffBank:
    """Smooth radial partition chi1 + chi2 + chi3 = 1 on the frequency lattice.

    chi1 covers |xi| <= delta (support up to 2*delta), chi3 covers
    |xi| >= R (support down to R - 1), chi2 is the complement.
    """

    grid: Grid
    delta: float
    R: float
    chi1: np.ndarray
    chi2: np.ndarray
    chi3: np.ndarray


def make_cutoffs(grid: Grid, delta: float = 0.5, R: float = 3.0) -> CutoffBank:
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if not R > 2:
        raise ValueError(f"R must exceed 2, got {R}")
    if not 2 * delta < R - 1:
        raise ValueError(f"bands collide: need 2*delta < R - 1, got delta={delta}, R={R}")
    r = grid.xi_abs
    chi1 = bump_ramp(2.0 - r / delta)
    chi3 = bump_ramp(r - (R - 1.0))
    chi2 = 1.0 - chi1 - chi3
    return CutoffBank(grid, delta, R, chi1, chi2, chi3)


@dataclass(frozen=True)
class GreensKernel:
    grid: Grid
    t: float
    s1: float
    spectral: SpectralField

    @property
    def nu(self) -> float:
        return 1.0 - self.s1


def greens_hat(grid: Grid, t: float, s1: float) -> SpectralField:
    """Kernel symbol exp(-t*sigma) on the lattice: real, positive, radial."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if s1 < 0:
        raise ValueError(f"s1 must be >= 0, got {s1}")
    return SpectralField(grid, np.exp(-t * sigma(grid.xi_sq, s1)))


def make_kernel(grid: Grid, t: float, s1: float) -> GreensKernel:
    return GreensKernel(grid, t, s1, greens_hat(grid, t, s1))


def kernel_field(kernel: GreensKernel) -> Field:
    """Physical-space kernel on the centered coordinate lattice."""
    return symbol_to_kernel(kernel.grid, kernel.spectral.coeffs.real)


def decompose(kernel: GreensKernel, bank: CutoffBank):
    """Band parts G1, G2, G3 as physical fields; their sum reconstructs G."""
    if bank.grid != kernel.grid:
        raise ValueError("cutoff bank and kernel live on different grids")
    sym = kernel.spectral.coeffs.real
    return tuple(
        symbol_to_kernel(kernel.grid, chi * sym) for chi in (bank.chi1, bank.chi2, bank.chi3)
    )


def algebraic_envelope(xabs, t: float, N_env: int, nu: float = 1.0):
    """Spatial profile (1 + |x|^(2 nu) / (1 + t))^(-N); nu = 1 is the low-band form."""
    return (1.0 + np.abs(xabs) ** (2.0 * nu) / (1.0 + t)) ** (-N_env)


def envelope_order(dim: int, s1: float) -> int:
    """Default envelope order, one above the integrability threshold."""
    return int(math.ceil(dim / (2.0 * (1.0 - s1)))) + 1


@dataclass(frozen=True)
class EnvelopeReport:
    part: str
    t: float
    alpha: int
    N_env: int
    ratio: float


def _part_field(kernel: GreensKernel, chi: np.ndarray, alpha: int) -> Field:
    sym = chi * kernel.spectral.coeffs
    if alpha == 1:
        sym = sym * 1j * kernel.grid.xi_mesh[0]
    return symbol_to_kernel(kernel.grid, sym)


def _envelope_ratio(kernel, chi, alpha, N_env, power, nu):
    g = kernel.grid
    part = _part_field(kernel, chi, alpha)
    mask = g.radius <= g.L / 4
    env = algebraic_envelope(g.radius, kernel.t, N_env, nu)
    ratio = np.max(np.abs(part.values)[mask] * kernel.t**power / env[mask])
    return float(ratio)


def check_envelope_G1(kernel: GreensKernel, bank: CutoffBank, N_env=None, alpha=0) -> EnvelopeReport:
    """Empirical constant of the low-band pointwise bound at time t.

    Bound shape: |D^alpha G1| <= c t^(-(n+alpha)/2) (1+|x|^2/(1+t))^(-N).
    Contract over a t-sweep: finite, with no growth beyond the initial value.
    """
    if kernel.t < 1:
        raise ValueError("envelope checks require t >= 1")
    if alpha not in (0, 1):
        raise ValueError("alpha must be 0 or 1 (single derivative)")
    n = kernel.grid.dim
    if N_env is None:
        N_env = envelope_order(n, kernel.s1)
    power = (n + alpha) / 2.0
    ratio = _envelope_ratio(kernel, bank.chi1, alpha, N_env, power, 1.0)
    return EnvelopeReport("G1", kernel.t, alpha, N_env, ratio)


def check_envelope_G3(kernel: GreensKernel, bank: CutoffBank, N_env=None, alpha=0) -> EnvelopeReport:
    """Empirical constant of the high-band pointwise bound at time t.

    Bound shape: |D^alpha G3| <= c t^(-(n+alpha)/(2 nu)) (1+|x|^(2 nu)/(1+t))^(-N)
    with nu = 1 - s1; only defined in the regularity-gain regime s1 < 1.
    """
    if kernel.t < 1:
        raise ValueError("envelope checks require t >= 1")
    if alpha not in (0, 1):
        raise ValueError("alpha must be 0 or 1 (single derivative)")
    nu = kernel.nu
    if nu <= 0:
        raise ValueError(f"high-band envelope needs s1 < 1, got s1={kernel.s1}")
    n = kernel.grid.dim
    if N_env is None:
        N_env = envelope_order(n, kernel.s1)
    power = (n + alpha) / (2.0 * nu)
    ratio = _envelope_ratio(kernel, bank.chi3, alpha, N_env, power, nu)
    return EnvelopeReport("G3", kernel.t, alpha, N_env, ratio)


@dataclass(frozen=True)
class SweepStability:
    """Stability statistics of an envelope-ratio sweep.

    growth_factor = max ratio / first ratio: the operative boundedness check
    (the empirical constant must not grow along the sweep).  spread_factor =
    max/min is recorded for reference; for the high band it grows without
    bound because the band decays exponentially while the envelope is only
    algebraic.
    """

    ratios: tuple
    growth_factor: float
    spread_factor: float


def sweep_stability(reports) -> SweepStability:
    ratios = tuple(r.ratio for r in reports)
    if not ratios or ratios[0] == 0:
        return SweepStability(ratios, np.inf, np.inf)
    lo = min(ratios)
    return SweepStability(
        ratios, max(ratios) / ratios[0], max(ratios) / lo if lo > 0 else np.inf
    )


def envelope_sweep(grid, s1, ts, part="G1", alpha=0, delta=0.5, R=3.0, N_env=None):
    bank = make_cutoffs(grid, delta, R)
    check = check_envelope_G1 if part == "G1" else check_envelope_G3
    return [check(make_kernel(grid, t, s1), bank, N_env=N_env, alpha=alpha) for t in ts]


def greens_norms(kernel: GreensKernel) -> dict:
    """L1 mass of G, L1 mass of |grad G|, and the L2 norm, all discrete."""
    g = kernel.grid
    G = kernel_field(kernel)
    hv = g.cell_volume
    grad_sq = np.zeros(g.shape)
    for ax in range(g.dim):
        d = symbol_to_kernel(g, 1j * g.xi_mesh[ax] * kernel.spectral.coeffs)
        grad_sq += d.values**2
    return {
        "L1": float(np.sum(np.abs(G.values)) * hv),
        "gradL1": float(np.sum(np.sqrt(grad_sq)) * hv),
        "L2": float(np.sqrt(np.sum(G.values**2) * hv)),
    }

"""Periodic-box discretization and Fourier-multiplier machinery.

The box is [-L/2, L/2)^n sampled on a uniform lattice of N points per
dimension.  Fourier coefficients follow the numpy FFT layout: the forward
transform is a plain (unnormalized) FFT of the sample array, the inverse
carries the 1/N^n factor.  Physical quadrature uses the cell volume h^n,
so the Parseval-matched spectral weight is h^n / N^n.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

DEALIAS_DEFAULT = 2.0 / 3.0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic lattice on [-L/2, L/2)^dim with its frequency lattice."""

    dim: int
    N: int
    L: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.N % 2 != 0 or self.N < 8:
            raise ValueError(f"N must be even and >= 8, got {self.N}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")

    @property
    def h(self) -> float:
        return self.L / self.N

    @property
    def shape(self):
        return (self.N,) * self.dim

    @property
    def npoints(self) -> int:
        return self.N**self.dim

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    @property
    def spectral_weight(self) -> float:
        """Weight making sum(|F_k|^2 * w) equal the physical L2 sum."""
        return self.h**self.dim / self.N**self.dim

    @cached_property
    def x1d(self) -> np.ndarray:
        """Coordinates along one axis, x_j = -L/2 + j h."""
        return -self.L / 2 + self.h * np.arange(self.N)

    @cached_property
    def x_mesh(self):
        """Broadcastable coordinate arrays, index-aligned with Field.values."""
        return np.meshgrid(*([self.x1d] * self.dim), indexing="ij", sparse=True)

    @cached_property
    def radius(self) -> np.ndarray:
        """|x| on the lattice (natural, centered ordering)."""
        r2 = sum(x**2 for x in self.x_mesh)
        return np.sqrt(r2)

    @cached_property
    def xi1d(self) -> np.ndarray:
        """Frequencies 2*pi*k/L along one axis in FFT order."""
        return 2 * np.pi * np.fft.fftfreq(self.N, d=self.h)

    @cached_property
    def xi_mesh(self):
        return np.meshgrid(*([self.xi1d] * self.dim), indexing="ij", sparse=True)

    @cached_property
    def xi_sq(self) -> np.ndarray:
        return sum(x**2 for x in self.xi_mesh) + np.zeros(self.shape)

    @cached_property
    def xi_abs(self) -> np.ndarray:
        return np.sqrt(self.xi_sq)

    @cached_property
    def k_int(self):
        """Integer mode numbers per axis (broadcastable), for dealias masks."""
        k = np.rint(np.fft.fftfreq(self.N) * self.N).astype(int)
        return np.meshgrid(*([k] * self.dim), indexing="ij", sparse=True)

    def dealias_mask(self, rule: float = DEALIAS_DEFAULT) -> np.ndarray:
        if not 0 < rule <= 1:
            raise ValueError(f"dealias rule must lie in (0, 1], got {rule}")
        cut = rule * self.N / 2
        mask = np.ones(self.shape, dtype=bool)
        for k in self.k_int:
            mask &= np.abs(k) <= cut
        return mask


def make_grid(dim: int, N: int, L: float) -> Grid:
    """Build a periodic grid; rejects odd N, N < 8, nonpositive L, dim not in 1..3."""
    return Grid(dim=dim, N=int(N), L=float(L))


@dataclass(frozen=True)
class Field:
    """Real-space samples of a scalar function on a Grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    def fft(self) -> "SpectralField":
        return forward(self)


@dataclass(frozen=True)
class SpectralField:
    """Complex Fourier coefficients of a scalar function, FFT layout."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != self.grid.shape:
            raise ValueError(
                f"coefficient shape {self.coeffs.shape} does not match grid {self.grid.shape}"
            )

    def ifft(self) -> Field:
        return inverse(self)


@dataclass(frozen=True)
class ModelParams:
    """Model parameters: dissipation order s1, flux smoothing s2, power theta,
    and the unit flux direction b (the nonlinear flux is u^(theta+1) * b)."""

    s1: float
    s2: float
    theta: int
    flux_dir: tuple = (1.0,)

    def __post_init__(self):
        if self.s1 < 0:
            raise ValueError(f"s1 must be >= 0, got {self.s1}")
        if not (isinstance(self.theta, (int, np.integer)) and self.theta >= 1):
            raise ValueError(f"theta must be a positive integer, got {self.theta}")
        b = np.asarray(self.flux_dir, dtype=float)
        nb = np.linalg.norm(b)
        if nb == 0:
            raise ValueError("flux direction must be nonzero")
        object.__setattr__(self, "flux_dir", tuple(b / nb))

    def b(self, dim: int) -> np.ndarray:
        b = np.asarray(self.flux_dir, dtype=float)
        if b.size != dim:
            raise ValueError(f"flux direction has {b.size} components, grid has {dim}")
        return b

    def theta_max(self, dim: int) -> float:
        """Largest admissible power for the decay theory in dimension dim."""
        if dim <= 2 * self.s2:
            return np.inf
        return 2.0 * (1.0 + 2.0 * (self.s2 - self.s1)) / (dim - 2.0 * self.s2)

    def hypothesis_violations(self, dim: int, decay: bool = False) -> list:
        """Names of decay-theory hypotheses this parameter set violates.

        Violations do not prevent running; they downgrade runs to exploratory.
        """
        out = []
        if not self.s2 > self.s1:
            out.append(f"s2 > s1 (have s2={self.s2}, s1={self.s1})")
        if self.theta > self.theta_max(dim):
            out.append(
                f"theta <= theta_max (have theta={self.theta}, "
                f"theta_max={self.theta_max(dim):.4g})"
            )
        if decay and not self.s1 < 1:
            out.append(f"0 <= s1 < 1 for decay runs (have s1={self.s1})")
        return out


def forward(f: Field) -> SpectralField:
    return SpectralField(f.grid, np.fft.fftn(f.values))


def inverse(F: SpectralField) -> Field:
    return Field(F.grid, np.fft.ifftn(F.coeffs).real)


def sigma(xi_sq, s1: float):
    """Dissipation symbol |xi|^2 / (1 + |xi|^2)^s1, evaluated stably.

    Behaves like |xi|^2 at low frequency and |xi|^(2-2*s1) at high
    frequency; strictly increasing in |xi|^2 for s1 < 1.
    """
    xi_sq = np.asarray(xi_sq, dtype=float)
    if np.any(xi_sq < 0):
        raise ValueError("xi_sq must be nonnegative")
    return xi_sq * (1.0 + xi_sq) ** (-s1)


def bessel(xi_sq, s: float):
    """Smoothing symbol (1 + |xi|^2)^(-s)."""
    xi_sq = np.asarray(xi_sq, dtype=float)
    if np.any(xi_sq < 0):
        raise ValueError("xi_sq must be nonnegative")
    return (1.0 + xi_sq) ** (-s)


def _eval_symbol(grid: Grid, m) -> np.ndarray:
    """Evaluate a symbol on the frequency lattice.

    `m` is either an array already on the lattice or a callable taking the
    broadcastable frequency mesh arrays (one per dimension).
    """
    if callable(m):
        sym = m(*grid.xi_mesh)
    else:
        sym = m
    sym = np.asarray(sym) + np.zeros(grid.shape)
    if not np.all(np.isfinite(sym)):
        raise ValueError("symbol is not finite on the frequency lattice")
    return sym


def apply_multiplier(F: SpectralField, m) -> SpectralField:
    """Pointwise scaling of the coefficients by a symbol m(xi)."""
    sym = _eval_symbol(F.grid, m)
    return SpectralField(F.grid, F.coeffs * sym)


def lambda_power(F: SpectralField, l: float) -> SpectralField:
    """Homogeneous derivative of fractional order: coefficients times |xi|^l.

    The l = 0 case is the identity (the mean is kept); for l > 0 the mean
    mode is annihilated.  Negative orders are singular at xi = 0 and rejected.
    """
    if l < 0:
        raise ValueError(f"lambda_power requires l >= 0, got {l}")
    if l == 0:
        return F
    return SpectralField(F.grid, F.coeffs * F.grid.xi_abs**l)


def dealias(F: SpectralField, rule: float = DEALIAS_DEFAULT) -> SpectralField:
    """Zero every coefficient with an axis mode number above rule * N/2."""
    if rule == 1.0:
        return F
    return SpectralField(F.grid, F.coeffs * F.grid.dealias_mask(rule))


def strict_dealias_rule(theta: int) -> float:
    """Retained-band fraction making u^(theta+1) exactly alias-free."""
    return 2.0 / (theta + 2.0)


def symbol_to_kernel(grid: Grid, symbol: np.ndarray) -> Field:
    """Physical-space convolution kernel of a Fourier multiplier.

    Returns samples of (2*pi-free convention) (1/L^n) * sum_k m(xi_k)
    exp(i xi_k . x) on the centered coordinate lattice, i.e. the function
    whose discrete convolution with quadrature weight h^n realizes the
    multiplier.
    """
    vals = np.fft.fftshift(np.fft.ifftn(symbol)).real / grid.cell_volume
    return Field(grid, vals)

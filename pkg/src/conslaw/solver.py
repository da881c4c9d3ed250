"""Time integration of the nonlinear problem by exponential time differencing,
plus the successive-linearization (Picard) iteration used as an independent
local-existence oracle.

The linear part is advanced by its exact propagator exp(-dt*sigma); only the
nonlinear flux term is approximated, through the phi-functions.  Stability is
therefore unconditional for the linear flow and dt is limited purely by
nonlinear accuracy.
"""

import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np

from .spectral import (
    DEALIAS_DEFAULT,
    Field,
    Grid,
    ModelParams,
    SpectralField,
    bessel,
    sigma,
)

INTEGRATORS = ("etd1", "etdrk2")


class BlowUpError(RuntimeError):
    """Nonlinear overflow / NaN during integration; carries the failure time."""

    def __init__(self, t, msg="solution blew up"):
        super().__init__(f"{msg} at t={t:.6g}")
        self.t = t


def phi1(z: np.ndarray) -> np.ndarray:
    """(e^z - 1)/z, by Taylor series below |z| = 1e-4 to avoid cancellation."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = np.abs(z) < 1e-4
    zs = z[small]
    out[small] = 1.0 + zs / 2 + zs**2 / 6 + zs**3 / 24
    zb = z[~small]
    out[~small] = np.expm1(zb) / zb
    return out


def phi2(z: np.ndarray) -> np.ndarray:
    """(e^z - 1 - z)/z^2 with the same series safeguard."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = np.abs(z) < 1e-3
    zs = z[small]
    out[small] = 0.5 + zs / 6 + zs**2 / 24 + zs**3 / 120
    zb = z[~small]
    out[~small] = (np.exp(zb) - 1.0 - zb) / zb**2
    return out


@dataclass(frozen=True)
class SolverConfig:
    model: ModelParams
    dt: float
    T: float
    integrator: str = "etdrk2"
    dealias_rule: float = DEALIAS_DEFAULT
    record_every: int = 10
    linear: bool = False  # disable the flux term entirely
    l_values: tuple = ()
    s_norm: float = None  # order for the recorded homogeneous norm; default s2
    store_snapshots: bool = False

    def __post_init__(self):
        if self.dt <= 0 or self.T < self.dt:
            raise ValueError("need dt > 0 and T >= dt")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"unknown integrator {self.integrator!r}")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass
class Trajectory:
    grid: Grid
    model: ModelParams
    times: np.ndarray
    norm_history: dict
    diss_cumulative: np.ndarray  # trapezoid integral of the dissipation functional
    snapshots: list = None
    warnings: list = dc_field(default_factory=list)
    t_wrap: float = np.inf


class Stepper:
    """Caches per-(grid, model, dt) multiplier arrays for the ETD schemes."""

    def __init__(self, grid: Grid, model: ModelParams, dt: float,
                 dealias_rule=DEALIAS_DEFAULT, linear=False, integrator="etdrk2"):
        self.grid = grid
        self.model = model
        self.dt = dt
        self.linear = linear
        self.integrator = integrator
        self.sigma = sigma(grid.xi_sq, model.s1)
        self.propagator = np.exp(-dt * self.sigma)
        z = -dt * self.sigma
        self.dt_phi1 = dt * phi1(z)
        self.dt_phi2 = dt * phi2(z)
        b = model.b(grid.dim)
        xi_dot_b = sum(bi * xm for bi, xm in zip(b, grid.xi_mesh))
        self.flux_symbol = -1j * xi_dot_b * bessel(grid.xi_sq, model.s2)
        self.mask = grid.dealias_mask(dealias_rule)

    def nonlinear(self, U: np.ndarray, t: float = 0.0) -> np.ndarray:
        """Spectral right-hand side of the flux term from spectral state U."""
        if self.linear:
            return np.zeros_like(U)
        u = np.fft.ifftn(U).real
        with np.errstate(over="raise", invalid="raise"):
            try:
                w = u ** (self.model.theta + 1)
            except FloatingPointError:
                raise BlowUpError(t, "overflow forming the nonlinear flux")
        if not np.all(np.isfinite(w)):
            raise BlowUpError(t, "overflow forming the nonlinear flux")
        return self.flux_symbol * np.fft.fftn(w) * self.mask

    def step(self, U: np.ndarray, t: float = 0.0) -> np.ndarray:
        if self.linear:
            return self.propagator * U
        N1 = self.nonlinear(U, t)
        Ua = self.propagator * U + self.dt_phi1 * N1
        if self.integrator == "etd1":
            out = Ua
        else:
            N2 = self.nonlinear(Ua, t + self.dt)
            out = Ua + self.dt_phi2 * (N2 - N1)
        if not np.all(np.isfinite(out)):
            raise BlowUpError(t + self.dt)
        return out


def nonlinear_rhs(u: Field, model: ModelParams, dealias_rule=DEALIAS_DEFAULT) -> SpectralField:
    """Spectral coefficients of the smoothed flux divergence -div K_s2 (u^(theta+1) b)."""
    st = Stepper(u.grid, model, dt=1.0, dealias_rule=dealias_rule)
    return SpectralField(u.grid, st.nonlinear(np.fft.fftn(u.values)))


def step(u: Field, dt: float, model: ModelParams, integrator="etdrk2",
         dealias_rule=DEALIAS_DEFAULT, linear=False) -> Field:
    """One ETD step; with the flux disabled this is the exact linear propagator."""
    st = Stepper(u.grid, model, dt, dealias_rule, linear, integrator)
    return Field(u.grid, np.fft.ifftn(st.step(np.fft.fftn(u.values))).real)


WRAP_THRESHOLD = 1e-6  # boundary-shell amplitude, relative to the global peak
TAIL_THRESHOLD = 1e-6  # spectral-tail amplitude triggering a resolution warning


def _shell_mask(grid: Grid) -> np.ndarray:
    mask = np.zeros(grid.shape, dtype=bool)
    for x in grid.x_mesh:
        mask |= np.broadcast_to(np.abs(x) >= 0.45 * grid.L, grid.shape)
    return mask


def _tail_mask(grid: Grid, rule: float) -> np.ndarray:
    # inner edge of the dealias cut: where resolution is about to run out
    cut = rule * grid.N / 2
    mask = np.zeros(grid.shape, dtype=bool)
    for k in grid.k_int:
        mask |= np.broadcast_to((np.abs(k) >= 0.85 * cut) & (np.abs(k) <= cut), grid.shape)
    return mask


def solve(u0: Field, config: SolverConfig, observer=None) -> Trajectory:
    """Integrate from u0 to T, recording norms every record_every steps.

    The history tracks L1, L2, Linf, the H^s2 norm, the homogeneous norm of
    order s_norm, the mean, and |Lam^l u|_L2 for each configured l.  The
    dissipation functional is accumulated by per-step trapezoid so the energy
    identity can be checked at integrator accuracy.  observer(t, U) may
    return a dict of extra scalars merged into the history.
    """
    grid = u0.grid
    model = config.model
    st = Stepper(grid, model, config.dt, config.dealias_rule, config.linear,
                 config.integrator)
    s_norm = config.s_norm if config.s_norm is not None else model.s2

    w = grid.spectral_weight
    hs2_w = (1.0 + grid.xi_sq) ** model.s2
    hdot_w = grid.xi_sq**s_norm
    diss_w = (1.0 + grid.xi_sq) ** (model.s2 - model.s1) * grid.xi_sq
    l_weights = {l: grid.xi_sq**l for l in config.l_values}
    shell = _shell_mask(grid)
    tail = _tail_mask(grid, config.dealias_rule)

    traj = Trajectory(grid, model, times=None, norm_history={}, diss_cumulative=None,
                      snapshots=[] if config.store_snapshots else None)
    times, hist, cum = [], {}, []

    def record(t, U, diss_int):
        u = np.fft.ifftn(U).real
        mag2 = np.abs(U) ** 2
        row = {
            "L1": np.sum(np.abs(u)) * grid.cell_volume,
            "L2": np.sqrt(np.sum(mag2) * w),
            "Linf": np.max(np.abs(u)),
            "Hs2": np.sqrt(np.sum(hs2_w * mag2) * w),
            "Hdot_s": np.sqrt(np.sum(hdot_w * mag2) * w),
            "mean": np.sum(u) * grid.cell_volume / grid.L**grid.dim,
        }
        for l, lw in l_weights.items():
            row[f"hdot_{l:g}"] = np.sqrt(np.sum(lw * mag2) * w)
        if observer is not None:
            row.update(observer(t, U))
        if not all(np.isfinite(v) for v in row.values()):
            raise BlowUpError(t, "non-finite norm record")
        peak = row["Linf"]
        if peak > 0 and np.max(np.abs(u[shell])) > WRAP_THRESHOLD * peak:
            if traj.t_wrap == np.inf:
                traj.t_wrap = t
        spec_peak = np.max(np.abs(U))
        if spec_peak > 0 and np.max(np.abs(U[tail])) > TAIL_THRESHOLD * spec_peak:
            msg = f"spectral tail above {TAIL_THRESHOLD:g} of peak at t={t:.4g}"
            if not traj.warnings:
                warnings.warn(msg)
            traj.warnings.append(msg)
        times.append(t)
        for k, v in row.items():
            hist.setdefault(k, []).append(float(v))
        cum.append(diss_int)
        if traj.snapshots is not None:
            traj.snapshots.append(Field(grid, u.copy()))

    U = np.fft.fftn(u0.values)
    diss_int = 0.0
    D_prev = float(np.sum(diss_w * np.abs(U) ** 2) * w)
    record(0.0, U, 0.0)
    n_steps = int(round(config.T / config.dt))
    for i in range(n_steps):
        t = i * config.dt
        U = st.step(U, t)
        D = float(np.sum(diss_w * np.abs(U) ** 2) * w)
        diss_int += 0.5 * config.dt * (D_prev + D)
        D_prev = D
        if (i + 1) % config.record_every == 0 or i + 1 == n_steps:
            record((i + 1) * config.dt, U, diss_int)

    traj.times = np.asarray(times)
    traj.norm_history = {k: np.asarray(v) for k, v in hist.items()}
    traj.diss_cumulative = np.asarray(cum)
    return traj


@dataclass
class PicardResult:
    times: np.ndarray
    distances: list  # sup-in-time H^s distance per iteration
    factors: list  # successive contraction factors k_m = d_m / d_(m-1)
    converged: bool
    final: Field  # fixed-point approximation at the last time node
    spectral_nodes: np.ndarray  # fixed point on all time nodes, spectral


def picard_solve(u0: Field, T0: float, model: ModelParams, max_iter=20, tol=1e-8,
                 n_nodes=64, s_norm=None, dealias_rule=DEALIAS_DEFAULT) -> PicardResult:
    """Successive linearization on [0, T0], starting from the zero function.

    Each iterate solves the linear problem with the previous iterate's flux
    as source, through the exact integral representation: the propagator is
    applied per node and the source integral uses composite trapezoid on the
    n_nodes sub-grid.  Contraction factors above 1 that persist indicate T0
    is too large for the contraction regime.
    """
    if T0 <= 0:
        raise ValueError("T0 must be positive")
    grid = u0.grid
    if s_norm is None:
        s_norm = max(model.s2, grid.dim / 2.0) + 0.5
    st = Stepper(grid, model, dt=T0 / n_nodes, dealias_rule=dealias_rule)
    taus = np.linspace(0.0, T0, n_nodes + 1)
    U0 = np.fft.fftn(u0.values)
    # e^(-tau*sigma) for every node, flattened lattice for broadcasting
    prop = np.exp(-np.multiply.outer(taus, st.sigma))
    linear_part = prop * U0[None]
    hs_w = (1.0 + grid.xi_sq) ** s_norm
    w = grid.spectral_weight

    def hs_dist(A, B):
        return float(np.sqrt(np.sum(hs_w * np.abs(A - B) ** 2) * w))

    dtq = T0 / n_nodes
    current = np.zeros_like(linear_part)
    distances, factors = [], []
    converged = False
    for m in range(max_iter):
        NL = np.array([st.nonlinear(current[i], taus[i]) for i in range(n_nodes + 1)])
        new = linear_part.copy()
        for j in range(1, n_nodes + 1):
            ker = prop[j::-1]  # e^(-(t_j - tau_i) sigma), i = 0..j
            integ = 0.5 * (ker[0] * NL[0] + ker[j] * NL[j])
            if j > 1:
                integ = integ + np.sum(ker[1:j] * NL[1:j], axis=0)
            new[j] = new[j] + dtq * integ
        d = max(hs_dist(new[i], current[i]) for i in range(n_nodes + 1))
        distances.append(d)
        if len(distances) > 1 and distances[-2] > 0:
            factors.append(distances[-1] / distances[-2])
        current = new
        if d < tol:
            converged = True
            break

    final = Field(grid, np.fft.ifftn(current[-1]).real)
    return PicardResult(taus, distances, factors, converged, final, current)

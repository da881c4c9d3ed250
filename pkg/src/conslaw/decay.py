"""Long-time experiments: time-frequency splitting, energy identity checks,
and log-log fitting of norm decay exponents against the expected rates.

Expected rates (regularity-gain regime, s2 > s1, 0 <= s1 < 1):
  |u|_L2            ->  -(n/4)
  |Lam^l u|_L2      ->  -(n/4 + l/2)
  |u|_{H^s2}        ->  -(n/4)
  |Lam^l u_L|_L2    ->  -(n/4 + l/2)   (low-frequency part)
  |u|_L1            ->  bounded (sup ratio against the initial mass)
The dimension hypothesis n > 2 is honored by flagging n in {1, 2} runs as
consistency probes; they still carry the same expected exponents.
"""

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .greens import bump_ramp
from .solver import BlowUpError, SolverConfig, solve
from .spectral import Field, ModelParams, make_grid


def eta_radius(t: float, mu: float) -> float:
    """Shrinking cutoff radius sqrt(mu / (1 + t))."""
    return math.sqrt(mu / (1.0 + t))


def chi_time_symbol(grid, t: float, mu: float) -> np.ndarray:
    """Smooth low-pass symbol: 1 for |xi| <= eta(t), 0 for |xi| >= sqrt(2)*eta(t).

    Built from the shared bump ramp applied to (1+t)|xi|^2/mu, so the
    support shrinks like the self-similar scale of the linear flow.
    """
    z = (1.0 + t) / mu * grid.xi_sq
    return bump_ramp(2.0 - z)


def default_mu(dim: int, s: float) -> float:
    """Smallest compliant integer above the n + 2s threshold."""
    return float(math.ceil(dim + 2.0 * s) + 1)


@dataclass(frozen=True)
class FrequencySplit:
    mu: float
    t: float
    eta: float
    u_low: Field
    u_high: Field


def split(u: Field, t: float, mu: float, s: float = None) -> FrequencySplit:
    """Low/high frequency decomposition at the time-dependent radius eta(t).

    When s is supplied and mu <= n + 2s the split is still performed but the
    caller is warned: the decay bookkeeping needs the larger mu.
    """
    grid = u.grid
    if s is not None and mu <= grid.dim + 2.0 * s:
        import warnings

        warnings.warn(f"mu={mu} does not exceed n + 2s = {grid.dim + 2 * s}; "
                      "proceeding for exploration")
    chi = chi_time_symbol(grid, t, mu)
    U = np.fft.fftn(u.values)
    u_low = Field(grid, np.fft.ifftn(chi * U).real)
    u_high = Field(grid, u.values - u_low.values)
    return FrequencySplit(mu, t, eta_radius(t, mu), u_low, u_high)


def energy_identity_residual(traj, model: ModelParams) -> np.ndarray:
    """Relative defect of the dissipation balance along a trajectory.

    r(t) = | E(t) + 2 * int_0^t D(tau) dtau - E(0) | / E(0), where E is the
    squared H^s2 norm and D the spectral dissipation functional; the time
    integral is the trapezoid accumulation recorded by the solver.
    """
    E = traj.norm_history["Hs2"] ** 2
    E0 = E[0]
    return np.abs(E + 2.0 * traj.diss_cumulative - E0) / E0


@dataclass(frozen=True)
class FitResult:
    slope: float
    stderr: float
    n_samples: int
    window: tuple


def fit_exponent(times, values, window) -> FitResult:
    """Least-squares slope of log(value) against log(1 + t) inside the window.

    Requires at least 8 samples spanning at least one decade in (1 + t);
    windows failing either condition are rejected.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    t_lo, t_hi = window
    m = (times >= t_lo) & (times <= t_hi) & (values > 0)
    if m.sum() < 8:
        raise ValueError(f"fit window {window} holds {m.sum()} samples; need >= 8")
    tw = times[m]
    span = (1.0 + tw.max()) / (1.0 + tw.min())
    if span < 10.0:
        raise ValueError(
            f"fit window {window} spans factor {span:.3g} in (1+t); need a decade"
        )
    x = np.log1p(tw)
    y = np.log(values[m])
    (slope, _), cov = np.polyfit(x, y, 1, cov=True)
    return FitResult(float(slope), float(np.sqrt(cov[0, 0])), int(m.sum()), (t_lo, t_hi))


@dataclass
class DecayConfig:
    dim: int = 1
    N: int = 4096
    L: float = 400.0
    model: ModelParams = None
    amplitude: float = 0.8
    width: float = 1.0
    dt: float = 0.05
    T: float = 200.0
    record_every: int = 10
    linear: bool = False
    t_min: float = 5.0
    s: float = None  # regularity bookkeeping order; default max(s2, n/2) + 0.5
    mu: float = None  # default: smallest integer above n + 2s
    l_values: tuple = (0.0, 1.0)
    slope_tol: float = 0.05
    l1_tol: float = 3.0
    dealias_rule: float = 2.0 / 3.0
    integrator: str = "etdrk2"
    experiment_id: str = "decay"

    def resolved_s(self) -> float:
        if self.s is not None:
            return self.s
        s2 = self.model.s2 if self.model else 0.0
        return max(s2, self.dim / 2.0) + 0.5

    def resolved_mu(self) -> float:
        if self.mu is not None:
            return self.mu
        return default_mu(self.dim, self.resolved_s())


@dataclass
class DecayReport:
    experiment_id: str
    parameters: dict
    window: tuple
    t_wrap: float
    fits: dict  # name -> {expected, fitted, stderr, tol, verdict}
    l1_sup_ratio: float
    l1_tol: float
    l1_verdict: bool
    flags: list = dc_field(default_factory=list)
    complete: bool = True

    @property
    def all_pass(self) -> bool:
        return self.complete and self.l1_verdict and all(
            f["verdict"] for f in self.fits.values()
        )

    def to_dict(self) -> dict:
        return {
            "experiment_id": self.experiment_id,
            "parameters": self.parameters,
            "window": list(self.window),
            "t_wrap": self.t_wrap if np.isfinite(self.t_wrap) else None,
            "fits": self.fits,
            "l1_sup_ratio": self.l1_sup_ratio,
            "l1_tol": self.l1_tol,
            "l1_verdict": self.l1_verdict,
            "flags": self.flags,
            "complete": self.complete,
            "all_pass": self.all_pass,
        }


def gaussian_bump(grid, amplitude: float, width: float) -> Field:
    r2 = sum(x**2 for x in grid.x_mesh)
    return Field(grid, amplitude * np.exp(-r2 / width**2))


def run_decay_experiment(cfg: DecayConfig):
    """Integrate, fit every tracked norm, and return the verdict report.

    Returns (report, trajectory).  Hypothesis violations and the n <= 2
    consistency-probe status are recorded as flags, never as hard errors.
    """
    model = cfg.model
    if model is None:
        raise ValueError("DecayConfig.model is required")
    grid = make_grid(cfg.dim, cfg.N, cfg.L)
    n = cfg.dim
    s_book = cfg.resolved_s()
    mu = cfg.resolved_mu()

    flags = list(model.hypothesis_violations(n, decay=True))
    if flags:
        flags = [f"exploratory: violates {v}" for v in flags]
    if n <= 2:
        flags.append("consistency probe: below the n > 2 decay hypothesis")
    if mu <= n + 2 * s_book:
        flags.append(f"mu={mu} does not exceed n + 2s = {n + 2 * s_book}")

    u0 = gaussian_bump(grid, cfg.amplitude, cfg.width)

    xi_sq = grid.xi_sq
    w = grid.spectral_weight
    l_vals = tuple(cfg.l_values)

    def low_freq_observer(t, U):
        chi = chi_time_symbol(grid, t, mu)
        mag2 = np.abs(chi * U) ** 2
        return {
            f"uL_hdot_{l:g}": float(np.sqrt(np.sum(xi_sq**l * mag2) * w)) for l in l_vals
        }

    scfg = SolverConfig(model=model, dt=cfg.dt, T=cfg.T, integrator=cfg.integrator,
                        dealias_rule=cfg.dealias_rule, record_every=cfg.record_every,
                        linear=cfg.linear, l_values=l_vals, s_norm=s_book)

    params = {
        "dim": n, "N": cfg.N, "L": cfg.L, "s1": model.s1, "s2": model.s2,
        "theta": model.theta, "s": s_book, "mu": mu, "dt": cfg.dt, "T": cfg.T,
        "amplitude": cfg.amplitude, "width": cfg.width, "linear": cfg.linear,
    }

    try:
        traj = solve(u0, scfg, observer=low_freq_observer)
    except BlowUpError as exc:
        report = DecayReport(cfg.experiment_id, params, (cfg.t_min, cfg.T), np.inf,
                             {}, np.nan, cfg.l1_tol, False,
                             flags + [f"blow-up: {exc}"], complete=False)
        return report, None

    times = traj.times
    hist = traj.norm_history
    window = (cfg.t_min, min(cfg.T, traj.t_wrap))

    def admissible(w):
        m = (times >= w[0]) & (times <= w[1])
        if m.sum() < 8:
            return False
        return (1.0 + times[m].max()) / (1.0 + times[m].min()) >= 10.0

    if traj.t_wrap < cfg.T and not admissible(window):
        # the boundary shell lit up early (small box, slowly decaying kernel
        # tails); at the monitor's 1e-6 relative threshold the bulk norms are
        # still trustworthy, so fit the full run and record the caveat
        flags.append(
            f"wraparound monitor tripped at t={traj.t_wrap:.3g}; no admissible "
            f"window below it, fitting over [{cfg.t_min:g}, {cfg.T:g}]"
        )
        window = (cfg.t_min, cfg.T)

    tracked = {"L2": ("L2", -n / 4.0), "Hs2": ("Hs2", -n / 4.0)}
    for l in l_vals:
        tracked[f"hdot_{l:g}"] = (f"hdot_{l:g}", -n / 4.0 - l / 2.0)
        tracked[f"uL_hdot_{l:g}"] = (f"uL_hdot_{l:g}", -n / 4.0 - l / 2.0)

    fits = {}
    complete = True
    for name, (col, expected) in tracked.items():
        try:
            fr = fit_exponent(times, hist[col], window)
        except ValueError as exc:
            fits[name] = {"expected": expected, "fitted": None, "stderr": None,
                          "tol": cfg.slope_tol, "verdict": False, "error": str(exc)}
            complete = False
            continue
        fits[name] = {
            "expected": expected,
            "fitted": fr.slope,
            "stderr": fr.stderr,
            "tol": cfg.slope_tol,
            "verdict": bool(abs(fr.slope - expected) <= cfg.slope_tol),
        }

    l1 = hist["L1"]
    l1_ratio = float(np.max(l1) / l1[0]) if l1[0] > 0 else np.inf
    report = DecayReport(cfg.experiment_id, params, window, traj.t_wrap, fits,
                         l1_ratio, cfg.l1_tol, bool(l1_ratio <= cfg.l1_tol),
                         flags, complete)
    return report, traj

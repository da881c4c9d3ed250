"""Pseudospectral simulation and verification suite for a dissipative
conservation law with nonlocal regularization on a periodic box.

The model is u_t - Lap (I - Lap)^(-s1) u = -div (I - Lap)^(-s2) (u^(theta+1) b)
discretized by Fourier collocation.  Subpackages: spectral (grids and
multipliers), norms (discrete norms and inequality checks), greens (linear
kernel and envelope bounds), solver (ETD time stepping and the Picard
oracle), decay (long-time rate experiments), cli (command-line front end).
"""

__version__ = "1.0.0"

from .spectral import (
    DEALIAS_DEFAULT,
    Field,
    Grid,
    ModelParams,
    SpectralField,
    apply_multiplier,
    bessel,
    dealias,
    forward,
    inverse,
    lambda_power,
    make_grid,
    sigma,
    strict_dealias_rule,
    symbol_to_kernel,
)
from .norms import (
    NormValue,
    RatioReport,
    check_gagliardo_nirenberg,
    check_interpolation,
    check_product_estimate,
    hom_sobolev_norm,
    lp_norm,
    random_band_limited,
    sobolev_norm,
)
from .greens import (
    CutoffBank,
    GreensKernel,
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
from .solver import (
    BlowUpError,
    PicardResult,
    SolverConfig,
    Trajectory,
    nonlinear_rhs,
    picard_solve,
    solve,
    step,
)
from .decay import (
    DecayConfig,
    DecayReport,
    FrequencySplit,
    chi_time_symbol,
    default_mu,
    energy_identity_residual,
    eta_radius,
    fit_exponent,
    gaussian_bump,
    run_decay_experiment,
    split,
)

__all__ = [name for name in dir() if not name.startswith("_")]

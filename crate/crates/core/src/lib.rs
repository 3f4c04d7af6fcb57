//! Stationary scattering of a one-dimensional discrete-time quantum walk
//! through a block of `M` identical coin impurities fed by a monochromatic
//! inflow.
//!
//! Every quantity is available through at least two independent routes:
//! closed Chebyshev forms ([`closed_form`], [`observables`]), a banded linear
//! solve of the truncated evolution ([`truncated`]), and time iteration
//! ([`dynamics`]). [`asymptotics`] holds the large-`M` predictions.
//!
//! Conventions are fixed once: arcs are ordered `(x;L), (x;R)` with
//! `x` ascending, `z = Δ^{1/2} e^{ik} = e^{-iξ}` with the principal square
//! root, and the inflow enters the block at `(0;R)` with unit amplitude.

pub mod asymptotics;
pub mod banded;
pub mod chebyshev;
pub mod closed_form;
pub mod coin;
pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod frequency;
pub mod observables;
pub mod truncated;

pub use num_complex::Complex64 as C64;

pub use asymptotics::{
    asymptotic_energy, critical_outside_coefficient, design_frequency, fit_scaling_order,
    matching_theta_star, AsymptoticCase, AsymptoticDesign, AsymptoticPrediction, ScalingFit,
};
pub use chebyshev::{chebyshev_zeta, ChebyshevCache, ScaledZeta, ZetaTable};
pub use closed_form::{
    kappa, matrix_power, stationary_closed_form, transfer_matrix, Mat2, MatrixPowerResult,
    PowerBranch, TransferMatrix,
};
pub use coin::Coin;
pub use dynamics::{
    generating_function_check, hitting_distribution, hitting_moment_direct, iterate_inflow,
    iterate_inflow_doubling, moment_via_quadrature, Derivative, ExitSide, HittingDistribution,
    IterationReport, MomentEstimate, QuadratureOptions,
};
pub use error::{Error, Result};
pub use frequency::{classify_regime, theta_parameter, Frequency, Regime, RegimeLabel};
pub use observables::{
    boundary_continuity_probe, energy_by_sum, energy_closed_form, is_perfect_transmission,
    scattering_rates, site_probability, BoundaryProbe, EnergyBranch, EnergyResult, ScatterResult,
};
pub use truncated::{solve_stationary_linear, SiteAmplitude, StationaryState, TruncatedOperator};

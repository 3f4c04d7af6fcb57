//! Inflow frequency conventions and the `B_in / ∂B / B_out` regime split.
//!
//! The user-facing parameter is the wavenumber `k` with `ω = e^{ik}`. The
//! stationary equation is written in `z = Δ^{1/2} ω = e^{-iξ}` using the
//! principal branch of `Δ^{1/2}` (see [`Coin::sqrt_delta`]).

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;

use crate::coin::Coin;
use crate::error::{Error, Result};

/// Default half-width of the band `||cos k| - |a|| <= tol` snapped onto `∂B`.
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequency {
    /// Wavenumber reduced to `[0, 2π)`.
    pub k: f64,
    pub omega: C64,
    pub z: C64,
    /// `z = e^{-iξ}`, `ξ` in `[0, 2π)`.
    pub xi: f64,
}

impl Frequency {
    pub fn from_wavenumber(k: f64, coin: &Coin) -> Self {
        let k = reduce_angle(k);
        let omega = C64::from_polar(1.0, k);
        let z = coin.sqrt_delta() * omega;
        Self {
            k,
            omega,
            z,
            xi: reduce_angle(-z.arg()),
        }
    }

    /// Inverse map used by the `ξ`-grid quadrature: `ω = Δ^{-1/2} z`.
    pub fn from_z(z: C64, coin: &Coin) -> Self {
        let z = z / z.norm();
        let omega = z / coin.sqrt_delta();
        Self {
            k: reduce_angle(omega.arg()),
            omega,
            z,
            xi: reduce_angle(-z.arg()),
        }
    }

    /// `(ω + ω^{-1}) / (2|a|) = cos k / |a|`, the Chebyshev argument.
    pub fn chebyshev_argument(&self, coin: &Coin) -> f64 {
        self.omega.re / coin.abs_a
    }
}

fn reduce_angle(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegimeLabel {
    /// `|cos k| < |a|`: oscillatory.
    Inside,
    /// `|cos k| = |a|`: defective transfer matrix.
    Boundary,
    /// `|cos k| > |a|`: exponential.
    Outside,
}

impl RegimeLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeLabel::Inside => "B_in",
            RegimeLabel::Boundary => "dB",
            RegimeLabel::Outside => "B_out",
        }
    }
}

impl std::fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regime {
    pub label: RegimeLabel,
    /// `cos k / |a|`.
    pub x: f64,
    /// `cos θ = x` in `B_in`, `cosh θ = |x|` in `B_out`, zero on `∂B`.
    pub theta: f64,
    /// Roots of `λ² - 2xλ + 1 = 0`, `|λ-| <= |λ+|`.
    pub lambda_plus: C64,
    pub lambda_minus: C64,
    /// Signs of `Re ω` and `Im ω` (a zero part counts as `+1`).
    pub eps_r: f64,
    pub eps_i: f64,
}

fn sign(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

pub fn classify_regime(coin: &Coin, k: f64, boundary_tol: f64) -> Result<Regime> {
    coin.require_transmitting()?;
    let freq = Frequency::from_wavenumber(k, coin);
    let cos_k = freq.omega.re;
    let x = cos_k / coin.abs_a;
    let gap = cos_k.abs() - coin.abs_a;
    let s = sign(x);
    let (label, theta, lp, lm) = if gap.abs() <= boundary_tol {
        (
            RegimeLabel::Boundary,
            0.0,
            C64::new(s, 0.0),
            C64::new(s, 0.0),
        )
    } else if gap < 0.0 {
        let theta = x.acos();
        (
            RegimeLabel::Inside,
            theta,
            C64::from_polar(1.0, theta),
            C64::from_polar(1.0, -theta),
        )
    } else {
        let theta = x.abs().acosh();
        (
            RegimeLabel::Outside,
            theta,
            C64::new(s * theta.exp(), 0.0),
            C64::new(s * (-theta).exp(), 0.0),
        )
    };
    Ok(Regime {
        label,
        x,
        theta,
        lambda_plus: lp,
        lambda_minus: lm,
        eps_r: sign(freq.omega.re),
        eps_i: sign(freq.omega.im),
    })
}

/// `θ` with `sin θ > 0` in `B_in` (so `θ ∈ (0, π)`) and `sinh θ > 0` in `B_out`.
pub fn theta_parameter(regime: &Regime) -> Result<f64> {
    match regime.label {
        RegimeLabel::Boundary => Err(Error::BoundaryRegime),
        _ => Ok(regime.theta),
    }
}

/// `θ / π`; the closest well-defined reading of the `θ(ω)` index.
pub fn theta_over_pi(regime: &Regime) -> Result<f64> {
    theta_parameter(regime).map(|t| t / PI)
}

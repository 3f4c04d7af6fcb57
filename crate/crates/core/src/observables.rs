//! Scattering rates, perfect transmission, site probabilities and the
//! energy `E_M(ω) = Σ_n ‖φ(n)‖²` accumulated on the block.
//!
//! Every closed form below is a ratio of expressions homogeneous in
//! `(ζ'_m, 1)`, evaluated through [`ZetaTable`] so that large blocks in
//! `B_out` stay finite.

use std::f64::consts::PI;

use crate::chebyshev::ZetaTable;
use crate::coin::Coin;
use crate::error::{Error, Result};
use crate::frequency::{classify_regime, Regime, RegimeLabel, DEFAULT_BOUNDARY_TOL};
use crate::truncated::StationaryState;

/// Default tolerance on `1 - T` for calling a frequency perfectly transmitting.
pub const PERFECT_TOL: f64 = 1e-9;

/// Below this `|x² - 1|` the Chebyshev energy formula loses too many digits.
pub const NEAR_BOUNDARY: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterResult {
    pub transmission: f64,
    pub reflection: f64,
    pub perfect: bool,
    pub ell: Option<usize>,
    pub regime: RegimeLabel,
}

fn regime_for(coin: &Coin, k: f64, boundary_tol: f64) -> Result<Regime> {
    classify_regime(coin, k, boundary_tol)
}

fn check_sites(sites: usize) -> Result<()> {
    if sites == 0 {
        Err(Error::EmptyBlock)
    } else {
        Ok(())
    }
}

/// `(|a|² S⁻², |b|² (ζ'_M / S)²)`, the two terms of the rate denominator.
fn rate_terms(coin: &Coin, sites: usize, regime: &Regime) -> Result<(f64, f64)> {
    let (a2, b2) = (coin.abs_a * coin.abs_a, coin.abs_b * coin.abs_b);
    if regime.label == RegimeLabel::Boundary {
        let m = sites as f64;
        return Ok((a2, b2 * m * m));
    }
    let zeta = ZetaTable::new(regime.x, sites)?;
    Ok((a2 * zeta.inv_scale_sq(), b2 * zeta.scaled(sites).powi(2)))
}

/// `T = |a|² / (|a|² + |b|² ζ'²_M)` and `R = |b|² ζ'²_M / (|a|² + |b|² ζ'²_M)`.
pub fn scattering_rates(coin: &Coin, sites: usize, k: f64) -> Result<ScatterResult> {
    check_sites(sites)?;
    coin.require_transmitting()?;
    let regime = regime_for(coin, k, DEFAULT_BOUNDARY_TOL)?;
    if coin.is_transparent() {
        return Ok(ScatterResult {
            transmission: 1.0,
            reflection: 0.0,
            perfect: true,
            ell: None,
            regime: regime.label,
        });
    }
    let (ta, tb) = rate_terms(coin, sites, &regime)?;
    let den = ta + tb;
    let transmission = ta / den;
    let (_, ell) = perfect_from_regime(sites, &regime, PERFECT_TOL);
    Ok(ScatterResult {
        transmission,
        reflection: tb / den,
        perfect: transmission >= 1.0 - PERFECT_TOL,
        ell,
        regime: regime.label,
    })
}

fn perfect_from_regime(sites: usize, regime: &Regime, tol: f64) -> (bool, Option<usize>) {
    if regime.label != RegimeLabel::Inside {
        return (false, None);
    }
    let m = sites as f64;
    let ell = (m * regime.theta / PI).round();
    // ℓ = 0 and ℓ = M sit on ∂B, where the premise fails.
    if ell < 1.0 || ell > m - 1.0 {
        return (false, None);
    }
    if (regime.theta - ell * PI / m).abs() <= tol {
        (true, Some(ell as usize))
    } else {
        (false, None)
    }
}

/// True iff `arccos(cos k / |a|)` lies within `tol` of `ℓπ/M`, `1 <= ℓ <= M-1`.
///
/// Frequencies snapped onto `∂B` (the `ℓ = 0` endpoint) and those in `B_out`
/// never qualify. A transparent coin is reported as perfect with no `ℓ`.
pub fn is_perfect_transmission(
    coin: &Coin,
    sites: usize,
    k: f64,
    tol: f64,
) -> Result<(bool, Option<usize>)> {
    check_sites(sites)?;
    coin.require_transmitting()?;
    if coin.is_transparent() {
        return Ok((true, None));
    }
    let regime = regime_for(coin, k, DEFAULT_BOUNDARY_TOL)?;
    Ok(perfect_from_regime(sites, &regime, tol))
}

/// `‖φ(n)‖²` from the closed form.
pub fn site_probability(coin: &Coin, sites: usize, k: f64, n: usize) -> Result<f64> {
    check_sites(sites)?;
    coin.require_transmitting()?;
    if n >= sites {
        return Err(Error::IndexOutOfRange {
            index: n,
            len: sites,
        });
    }
    let regime = regime_for(coin, k, DEFAULT_BOUNDARY_TOL)?;
    if coin.is_transparent() {
        return Ok(1.0);
    }
    let (a2, b2) = (coin.abs_a * coin.abs_a, coin.abs_b * coin.abs_b);
    if regime.label == RegimeLabel::Boundary {
        let (m, w) = (sites as f64, (sites - n) as f64);
        return Ok((a2 + b2 * (w - 1.0).powi(2) + b2 * w * w) / (a2 + b2 * m * m));
    }
    let zeta = ZetaTable::new(regime.x, sites)?;
    Ok(site_probability_in(&zeta, a2, b2, sites, n))
}

fn site_probability_in(zeta: &ZetaTable, a2: f64, b2: f64, m: usize, n: usize) -> f64 {
    let s2 = zeta.inv_scale_sq();
    (a2 * s2 + b2 * zeta.scaled(m - n - 1).powi(2) + b2 * zeta.scaled(m - n).powi(2))
        / (a2 * s2 + b2 * zeta.scaled(m).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyBranch {
    Generic,
    Boundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyResult {
    pub value: f64,
    pub branch: EnergyBranch,
    pub per_site: Option<Vec<f64>>,
}

/// `E_M(ω)` from the closed forms with default tolerances and no per-site data.
pub fn energy_closed_form(coin: &Coin, sites: usize, k: f64) -> Result<EnergyResult> {
    energy_closed_form_with(coin, sites, k, DEFAULT_BOUNDARY_TOL, false)
}

/// Near `∂B` (`|x² - 1| < NEAR_BOUNDARY`) the per-site sum replaces the
/// Chebyshev formula; both are exact, only their conditioning differs.
pub fn energy_closed_form_with(
    coin: &Coin,
    sites: usize,
    k: f64,
    boundary_tol: f64,
    per_site: bool,
) -> Result<EnergyResult> {
    check_sites(sites)?;
    coin.require_transmitting()?;
    let regime = regime_for(coin, k, boundary_tol)?;
    let m = sites as f64;
    if coin.is_transparent() {
        return Ok(EnergyResult {
            value: m,
            branch: if regime.label == RegimeLabel::Boundary {
                EnergyBranch::Boundary
            } else {
                EnergyBranch::Generic
            },
            per_site: per_site.then(|| vec![1.0; sites]),
        });
    }
    let (a2, b2) = (coin.abs_a * coin.abs_a, coin.abs_b * coin.abs_b);
    if regime.label == RegimeLabel::Boundary {
        let value = m / 3.0 * (3.0 * a2 + b2 + 2.0 * b2 * m * m) / (a2 + b2 * m * m);
        let sites_p = per_site.then(|| {
            (0..sites)
                .map(|n| {
                    let w = (sites - n) as f64;
                    (a2 + b2 * (w - 1.0).powi(2) + b2 * w * w) / (a2 + b2 * m * m)
                })
                .collect()
        });
        return Ok(EnergyResult {
            value,
            branch: EnergyBranch::Boundary,
            per_site: sites_p,
        });
    }
    let x = regime.x;
    let zeta = ZetaTable::new(x, sites + 1)?;
    let probs: Option<Vec<f64>> = (per_site || (x * x - 1.0).abs() < NEAR_BOUNDARY).then(|| {
        (0..sites)
            .map(|n| site_probability_in(&zeta, a2, b2, sites, n))
            .collect()
    });
    let value = match &probs {
        Some(p) if (x * x - 1.0).abs() < NEAR_BOUNDARY => neumaier_sum(p.iter().copied()),
        _ => chebyshev_energy(&zeta, a2, b2, x, sites),
    };
    Ok(EnergyResult {
        value,
        branch: EnergyBranch::Generic,
        per_site: if per_site { probs } else { None },
    })
}

/// `[M|a|² + |b|²/(4(x²-1)) (ζ'²_{M+1} - ζ'²_{M-1} - 4M)] / (|a|² + |b|² ζ'²_M)`
/// on any table covering `M + 1`.
fn chebyshev_energy(zeta: &ZetaTable, a2: f64, b2: f64, x: f64, m: usize) -> f64 {
    let s2 = zeta.inv_scale_sq();
    let mf = m as f64;
    let bracket = zeta.scaled(m + 1).powi(2) - zeta.scaled(m - 1).powi(2) - 4.0 * mf * s2;
    (mf * a2 * s2 + b2 / (4.0 * (x * x - 1.0)) * bracket) / (a2 * s2 + b2 * zeta.scaled(m).powi(2))
}

/// The Chebyshev energy formula evaluated without the near-boundary switch.
/// Fails with [`Error::BoundaryRegime`] on `∂B`, where it is `0/0`.
pub fn energy_chebyshev_formula(coin: &Coin, sites: usize, k: f64) -> Result<f64> {
    check_sites(sites)?;
    coin.require_transmitting()?;
    let regime = regime_for(coin, k, DEFAULT_BOUNDARY_TOL)?;
    if regime.label == RegimeLabel::Boundary {
        return Err(Error::BoundaryRegime);
    }
    let zeta = ZetaTable::new(regime.x, sites + 1)?;
    Ok(chebyshev_energy(
        &zeta,
        coin.abs_a * coin.abs_a,
        coin.abs_b * coin.abs_b,
        regime.x,
        sites,
    ))
}

/// The same energy written with `ζ'_m = sin mθ / sin θ` in `B_in` and
/// `|ζ'_m| = sinh mθ / sinh θ` in `B_out`.
pub fn energy_trigonometric(coin: &Coin, sites: usize, k: f64) -> Result<f64> {
    check_sites(sites)?;
    coin.require_transmitting()?;
    let regime = regime_for(coin, k, DEFAULT_BOUNDARY_TOL)?;
    let (a2, b2) = (coin.abs_a * coin.abs_a, coin.abs_b * coin.abs_b);
    let m = sites as f64;
    let t = regime.theta;
    match regime.label {
        RegimeLabel::Boundary => Err(Error::BoundaryRegime),
        RegimeLabel::Inside => {
            let s2 = t.sin().powi(2);
            let num = m * (a2 * s2 + b2) - b2 * (2.0 * m * t).sin() * t.cos() / (2.0 * t.sin());
            Ok(num / (a2 * s2 + b2 * (m * t).sin().powi(2)))
        }
        RegimeLabel::Outside => {
            // Divide through by sinh²(Mθ) so that large Mθ stays finite.
            let mt = m * t;
            let e = (-2.0 * mt).exp();
            let inv_sh2 = 4.0 * e / (1.0 - e).powi(2);
            let coth_mt = (1.0 + e) / (1.0 - e);
            let sh2 = t.sinh().powi(2);
            let num = m * (a2 * sh2 - b2) * inv_sh2 + b2 * coth_mt * t.cosh() / t.sinh();
            Ok(num / (a2 * sh2 * inv_sh2 + b2))
        }
    }
}

/// `Σ_n ‖φ(n)‖²` with Neumaier compensation.
pub fn energy_by_sum(state: &StationaryState) -> f64 {
    neumaier_sum(state.sites.iter().map(|s| s.norm_sqr()))
}

pub(crate) fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + comp
}

/// Energies approaching the `∂B` wavenumber `k* = arccos|a|` from both sides.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryProbe {
    /// `|a| = 1`: no boundary point in `(0, π/2)`, nothing probed.
    pub degenerate: bool,
    pub k_star: f64,
    pub boundary_energy: f64,
    /// `(distance, |E(k* + d) - E(k*)|)`, `B_in` side.
    pub inside: Vec<(f64, f64)>,
    /// `(distance, |E(k* - d) - E(k*)|)`, `B_out` side.
    pub outside: Vec<(f64, f64)>,
}

/// Distances shrink by a factor of 10 per step, starting at `min(0.1, k*/2, (π/2 - k*)/2)`.
pub fn boundary_continuity_probe(
    coin: &Coin,
    sites: usize,
    approach_steps: usize,
) -> Result<BoundaryProbe> {
    check_sites(sites)?;
    coin.require_transmitting()?;
    if approach_steps < 3 {
        return Err(Error::OutOfRange(format!(
            "approach_steps = {approach_steps}, need at least 3"
        )));
    }
    if coin.is_transparent() {
        return Ok(BoundaryProbe {
            degenerate: true,
            k_star: 0.0,
            boundary_energy: sites as f64,
            inside: Vec::new(),
            outside: Vec::new(),
        });
    }
    let k_star = coin.abs_a.acos();
    let e_star = energy_closed_form(coin, sites, k_star)?.value;
    let d0 = 0.1f64.min(k_star / 2.0).min((PI / 2.0 - k_star) / 2.0);
    let mut inside = Vec::with_capacity(approach_steps);
    let mut outside = Vec::with_capacity(approach_steps);
    for j in 0..approach_steps {
        let d = d0 * 10f64.powi(-(j as i32));
        // snapping is disabled so the probe never lands on ∂B by construction
        let e_in = energy_closed_form_with(coin, sites, k_star + d, 0.0, false)?.value;
        let e_out = energy_closed_form_with(coin, sites, k_star - d, 0.0, false)?.value;
        inside.push((d, (e_in - e_star).abs()));
        outside.push((d, (e_out - e_star).abs()));
    }
    Ok(BoundaryProbe {
        degenerate: false,
        k_star,
        boundary_energy: e_star,
        inside,
        outside,
    })
}

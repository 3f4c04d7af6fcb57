//! Leading-order large-`M` behaviour of the energy and the designed
//! frequencies that realize each scaling regime.
//!
//! "Much smaller than one" means below [`SMALL`], "much larger" means above
//! [`LARGE`]; the crossover in between is reported, never guessed.

use std::f64::consts::PI;

use crate::coin::Coin;
use crate::error::{Error, Result};
use crate::frequency::{classify_regime, RegimeLabel, DEFAULT_BOUNDARY_TOL};

pub const SMALL: f64 = 0.1;
pub const LARGE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AsymptoticCase {
    /// On `∂B`: `(2/3) M`.
    Boundary,
    /// `B_in` with `M sin θ ≪ 1`: `(2/3) M`.
    InsideNearBoundary,
    /// `B_in`, `Mθ' → θ* ∉ ℤπ`: `M (1 - sin 2θ*/(2θ*)) / sin²θ*`.
    InsideCritical,
    /// `B_in`, `Mθ' = θ* + ε` with `θ* ∈ ℤπ`, `εM ≪ 1`: `|b|² M³ / (|a|² θ*²)`.
    InsideResonant,
    /// `B_in`, `θ* ∈ ℤπ`, `εM ≫ 1`: `M / ε²`.
    InsideDetuned,
    /// `B_in`, `M sin θ ≫ 1`, close to a resonance: `M / δ²`.
    InsideNearResonance,
    /// `B_in`, `M sin θ ≫ 1`: `M (|a|² sin²θ + |b|²) / (|a|² sin²θ + |b|² sin²Mθ)`.
    InsideBulk,
    /// `B_out` with `Mθ ≪ 1`: `(2/3) M`.
    OutsideNearBoundary,
    /// `B_out` with `Mθ` of order one: `M f(Mθ)`, see [`critical_outside_coefficient`].
    OutsideCritical,
    /// `B_out` with `Mθ ≫ 1`: `coth θ`.
    OutsideFixed,
}

impl AsymptoticCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            AsymptoticCase::Boundary => "boundary",
            AsymptoticCase::InsideNearBoundary => "in_near_boundary",
            AsymptoticCase::InsideCritical => "in_critical",
            AsymptoticCase::InsideResonant => "in_resonant",
            AsymptoticCase::InsideDetuned => "in_detuned",
            AsymptoticCase::InsideNearResonance => "in_near_resonance",
            AsymptoticCase::InsideBulk => "in_bulk",
            AsymptoticCase::OutsideNearBoundary => "out_near_boundary",
            AsymptoticCase::OutsideCritical => "out_critical",
            AsymptoticCase::OutsideFixed => "out_fixed",
        }
    }

    /// Exponent of `M` in the leading order, when it is a pure power.
    pub fn nominal_order(&self) -> Option<f64> {
        match self {
            AsymptoticCase::InsideResonant => Some(3.0),
            AsymptoticCase::OutsideFixed => Some(0.0),
            AsymptoticCase::InsideDetuned | AsymptoticCase::InsideNearResonance => None,
            _ => Some(1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticPrediction {
    pub value: f64,
    pub case: AsymptoticCase,
}

fn pred(value: f64, case: AsymptoticCase) -> Result<AsymptoticPrediction> {
    Ok(AsymptoticPrediction { value, case })
}

/// `f(θ) = (-1 + sinh 2θ / (2θ)) / sinh²θ = coth θ / θ - 1 / sinh²θ`,
/// decreasing from `2/3` at `0⁺` to `0`.
pub fn critical_outside_coefficient(theta: f64) -> f64 {
    if theta < 1e-3 {
        let t2 = theta * theta;
        return 2.0 / 3.0 - 4.0 * t2 / 45.0 + 4.0 * t2 * t2 / 315.0;
    }
    let sh = theta.sinh();
    1.0 / (theta * theta.tanh()) - 1.0 / (sh * sh)
}

/// `(1 - sin 2t / (2t)) / sin²t`.
fn critical_inside_coefficient(t: f64) -> f64 {
    (1.0 - (2.0 * t).sin() / (2.0 * t)) / t.sin().powi(2)
}

/// The leading-order prediction for `E_M` at wavenumber `k`.
///
/// Fails with [`Error::AmbiguousRegime`] when a resonant design
/// (`θ* ∈ ℤπ`) has `εM` between [`SMALL`] and [`LARGE`]; both adjacent
/// predictions are attached.
pub fn asymptotic_energy(coin: &Coin, sites: usize, k: f64) -> Result<AsymptoticPrediction> {
    if sites == 0 {
        return Err(Error::EmptyBlock);
    }
    let regime = classify_regime(coin, k, DEFAULT_BOUNDARY_TOL)?;
    let m = sites as f64;
    let (a2, b2) = (coin.abs_a * coin.abs_a, coin.abs_b * coin.abs_b);
    let theta = regime.theta;
    match regime.label {
        RegimeLabel::Boundary => pred(2.0 / 3.0 * m, AsymptoticCase::Boundary),
        RegimeLabel::Outside => {
            let s = m * theta;
            if s < SMALL {
                pred(2.0 / 3.0 * m, AsymptoticCase::OutsideNearBoundary)
            } else if s <= LARGE {
                pred(
                    m * critical_outside_coefficient(s),
                    AsymptoticCase::OutsideCritical,
                )
            } else {
                pred(1.0 / theta.tanh(), AsymptoticCase::OutsideFixed)
            }
        }
        RegimeLabel::Inside => {
            let sin = theta.sin();
            let s = m * sin;
            if s < SMALL {
                return pred(2.0 / 3.0 * m, AsymptoticCase::InsideNearBoundary);
            }
            if s <= LARGE {
                let tp = theta.min(PI - theta);
                let mt = m * tp;
                let j = (mt / PI).round();
                let eps = mt - j * PI;
                if j >= 1.0 && eps.abs() < SMALL {
                    let star = j * PI;
                    let cubic = AsymptoticPrediction {
                        value: b2 * m.powi(3) / (a2 * star * star),
                        case: AsymptoticCase::InsideResonant,
                    };
                    let detuned = AsymptoticPrediction {
                        value: m / (eps * eps),
                        case: AsymptoticCase::InsideDetuned,
                    };
                    let em = eps.abs() * m;
                    return if em < SMALL {
                        Ok(cubic)
                    } else if em > LARGE {
                        Ok(detuned)
                    } else {
                        Err(Error::AmbiguousRegime {
                            lower: Box::new(cubic),
                            upper: Box::new(detuned),
                        })
                    };
                }
                return pred(
                    m * critical_inside_coefficient(mt),
                    AsymptoticCase::InsideCritical,
                );
            }
            let mt = m * theta;
            let delta = (mt - (mt / PI).round() * PI).abs();
            if sin < SMALL && delta < SMALL {
                return pred(m / (delta * delta), AsymptoticCase::InsideNearResonance);
            }
            let s2 = sin * sin;
            pred(
                m * (a2 * s2 + b2) / (a2 * s2 + b2 * mt.sin().powi(2)),
                AsymptoticCase::InsideBulk,
            )
        }
    }
}

/// A `B_in` frequency with `Mθ = xπ + M^{-α}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticDesign {
    pub sites: usize,
    pub x: f64,
    pub alpha: f64,
    pub theta: f64,
    pub k: f64,
    /// `min(x, M - x)`.
    pub x_prime: f64,
    /// `x' π`.
    pub theta_star: f64,
    /// `M θ' - θ*` with `θ' = min(θ, π - θ)`.
    pub epsilon: f64,
}

impl AsymptoticDesign {
    /// `x'` is an integer, so `θ* ∈ ℤπ`.
    pub fn is_resonant(&self) -> bool {
        (self.x_prime - self.x_prime.round()).abs() < 1e-12
    }
}

pub fn design_frequency(coin: &Coin, sites: usize, x: f64, alpha: f64) -> Result<AsymptoticDesign> {
    coin.require_transmitting()?;
    if sites == 0 {
        return Err(Error::EmptyBlock);
    }
    if coin.abs_a >= 1.0 {
        return Err(Error::OutOfRange("|a| = 1 leaves B_in empty".into()));
    }
    if alpha < 0.0 {
        return Err(Error::OutOfRange(format!(
            "alpha = {alpha} must be non-negative"
        )));
    }
    let m = sites as f64;
    let theta = (x * PI + m.powf(-alpha)) / m;
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::OutOfRange(format!("theta = {theta} not in (0, π)")));
    }
    let k = (coin.abs_a * theta.cos()).acos();
    let x_prime = x.min(m - x);
    let theta_star = x_prime * PI;
    let epsilon = m * theta.min(PI - theta) - theta_star;
    let label = classify_regime(coin, k, DEFAULT_BOUNDARY_TOL)?.label;
    if label != RegimeLabel::Inside {
        return Err(Error::OutOfRange(format!(
            "designed k = {k} lands in {label}"
        )));
    }
    Ok(AsymptoticDesign {
        sites,
        x,
        alpha,
        theta,
        k,
        x_prime,
        theta_star,
        epsilon,
    })
}

/// Largest `θ` with `2/3 - f(θ) <= tolerance`.
///
/// `f < 2/3` on all of `(0, ∞)`, so the matching equation has no positive
/// root; this is the point where the critical `B_out` coefficient leaves the
/// `∂B` value by `tolerance`. Found by bracket expansion and bisection.
pub fn matching_theta_star(tolerance: f64) -> Result<f64> {
    if !(tolerance > 0.0 && tolerance < 2.0 / 3.0) {
        return Err(Error::OutOfRange(format!(
            "tolerance = {tolerance} not in (0, 2/3)"
        )));
    }
    let gap = |t: f64| 2.0 / 3.0 - critical_outside_coefficient(t) - tolerance;
    let (mut lo, mut hi) = (0.0f64, 1e-3f64);
    while gap(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NoRoot);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(lo)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
}

/// Least-squares slope of `ln E` against `ln M`.
pub fn fit_scaling_order(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 4 {
        return Err(Error::DegenerateInput(format!(
            "{} points, need at least 4",
            points.len()
        )));
    }
    for w in points.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::DegenerateInput(
                "M must be strictly increasing".into(),
            ));
        }
    }
    if points
        .iter()
        .any(|&(m, e)| !(m > 0.0 && e > 0.0 && e.is_finite()))
    {
        return Err(Error::DegenerateInput(
            "M and E must be positive and finite".into(),
        ));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(ScalingFit {
        exponent,
        intercept,
        r_squared,
        points: points.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::energy_closed_form;
    use std::f64::consts::{FRAC_PI_4, SQRT_2};

    #[test]
    fn boundary_prediction() {
        let h = Coin::hadamard();
        let p = asymptotic_energy(&h, 10_000, FRAC_PI_4).unwrap();
        assert_eq!(p.case, AsymptoticCase::Boundary);
        let e = energy_closed_form(&h, 10_000, FRAC_PI_4).unwrap().value;
        assert!((e - p.value).abs() < 1e-3 * p.value);
    }

    #[test]
    fn outside_fixed_limit() {
        let h = Coin::hadamard();
        let p = asymptotic_energy(&h, 100, 0.0).unwrap();
        assert_eq!(p.case, AsymptoticCase::OutsideFixed);
        assert!((p.value - SQRT_2).abs() < 1e-12);
        let e = energy_closed_form(&h, 100, 0.0).unwrap().value;
        assert!((e - SQRT_2).abs() < 1e-6);
    }

    #[test]
    fn resonant_cubic_prediction() {
        let h = Coin::hadamard();
        let d = design_frequency(&h, 64, 1.0, 2.0).unwrap();
        let p = asymptotic_energy(&h, 64, d.k).unwrap();
        assert_eq!(p.case, AsymptoticCase::InsideResonant);
        let e = energy_closed_form(&h, 64, d.k).unwrap().value;
        let ratio = e / p.value;
        assert!((0.5..=2.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn gray_zone_is_reported() {
        let h = Coin::hadamard();
        let d = design_frequency(&h, 64, 1.0, 1.0).unwrap();
        match asymptotic_energy(&h, 64, d.k) {
            Err(Error::AmbiguousRegime { lower, upper }) => {
                assert_eq!(lower.case, AsymptoticCase::InsideResonant);
                assert_eq!(upper.case, AsymptoticCase::InsideDetuned);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn design_instances() {
        let h = Coin::hadamard();
        let d = design_frequency(&h, 100, 1.0, 1.0).unwrap();
        assert!((d.theta - (PI + 0.01) / 100.0).abs() < 1e-15);
        assert_eq!(d.x_prime, 1.0);
        assert!((100.0 * d.theta - (PI + 0.01)).abs() < 1e-12);
        assert!((h.abs_a * d.theta.cos() - d.k.cos()).abs() < 1e-15);
        let d = design_frequency(&h, 100, 99.0, 1.0).unwrap();
        assert_eq!(d.x_prime, 1.0);
        let d = design_frequency(&h, 16, 8.5, 0.0).unwrap();
        assert!(!d.is_resonant());
        assert!((d.epsilon + 1.0).abs() < 1e-12);
        assert!(design_frequency(&h, 4, 4.0, 0.0).is_err());
        assert!(design_frequency(&Coin::identity(), 4, 1.0, 1.0).is_err());
    }

    #[test]
    fn coefficient_limits() {
        assert!((critical_outside_coefficient(1e-8) - 2.0 / 3.0).abs() < 1e-15);
        assert!(critical_outside_coefficient(2.0) < 2.0 / 3.0);
        // the series and the closed form meet smoothly at the switch point
        let (a, b) = (
            critical_outside_coefficient(0.999e-3),
            critical_outside_coefficient(1.001e-3),
        );
        assert!((a - b).abs() < 1e-9);
        assert!((critical_outside_coefficient(800.0) - 1.0 / 800.0).abs() < 1e-12);
    }

    #[test]
    fn matching_point() {
        for &tol in &[1e-2, 1e-3, 1e-6] {
            let t = matching_theta_star(tol).unwrap();
            assert!(t > 0.0);
            assert!((critical_outside_coefficient(t) - 2.0 / 3.0).abs() <= tol * (1.0 + 1e-9));
            assert!((t - (45.0 * tol / 4.0).sqrt()).abs() < 0.05 * t);
        }
        assert!(matching_theta_star(0.0).is_err());
    }

    #[test]
    fn exact_power_laws() {
        let lin: Vec<_> = (1..=6)
            .map(|i| (i as f64 * 10.0, 2.5 * i as f64 * 10.0))
            .collect();
        assert!((fit_scaling_order(&lin).unwrap().exponent - 1.0).abs() < 1e-12);
        let cub: Vec<_> = (1..=6)
            .map(|i| (2f64.powi(i), 0.3 * 2f64.powi(3 * i)))
            .collect();
        let f = fit_scaling_order(&cub).unwrap();
        assert!((f.exponent - 3.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(fit_scaling_order(&[(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)]).is_err());
        assert!(fit_scaling_order(&[(1.0, 1.0), (2.0, 2.0), (2.0, 3.0), (4.0, 1.0)]).is_err());
        assert!(fit_scaling_order(&[(1.0, 1.0), (2.0, -2.0), (3.0, 3.0), (4.0, 1.0)]).is_err());
    }

    #[test]
    fn quarter_power_design_order() {
        let h = Coin::hadamard();
        let pts: Vec<_> = (6..=12)
            .map(|j| {
                let m = 1usize << j;
                let d = design_frequency(&h, m, 1.0, 0.25).unwrap();
                (m as f64, energy_closed_form(&h, m, d.k).unwrap().value)
            })
            .collect();
        let f = fit_scaling_order(&pts).unwrap();
        assert!((f.exponent - 1.5).abs() < 0.15, "{}", f.exponent);
    }
}

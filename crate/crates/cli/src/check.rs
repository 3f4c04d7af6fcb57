//! Cross-route verification suite for one coin over a set of block sizes.

use rayon::prelude::*;

use qwscatter::observables::energy_chebyshev_formula;
use qwscatter::truncated::DENSE_EIGEN_LIMIT;
use qwscatter::{
    boundary_continuity_probe, classify_regime, energy_by_sum, generating_function_check,
    hitting_distribution, hitting_moment_direct, scattering_rates, Coin, Error, ExitSide,
    Frequency, QuadratureOptions, RegimeLabel, TruncatedOperator,
};

use crate::args::Route;
use crate::commands::{adaptive_quadrature, dense_state, route_state, Failure, Outcome};
use crate::output::{num, Csv};

struct Line {
    check: &'static str,
    detail: String,
    value: f64,
    tol: f64,
    skipped: bool,
}

impl Line {
    fn new(check: &'static str, detail: String, value: f64, tol: f64) -> Self {
        Line {
            check,
            detail,
            value,
            tol,
            skipped: false,
        }
    }

    fn skipped(check: &'static str, detail: String) -> Self {
        Line {
            check,
            detail,
            value: f64::NAN,
            tol: f64::NAN,
            skipped: true,
        }
    }

    fn status(&self) -> &'static str {
        if self.skipped {
            "SKIP"
        } else if self.value <= self.tol {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

/// Every check passes when `value <= tol`.
fn checks_for(coin: &Coin, m: usize, ks: &[f64]) -> Result<Vec<Line>, Failure> {
    let mut lines = Vec::new();
    let detail = format!("M={m}");

    let mut route_dev = 0.0f64;
    let mut unit = 0.0f64;
    let mut flux = 0.0f64;
    let mut energy = 0.0f64;
    for &k in ks {
        let closed = route_state(coin, m, k, Route::Closed)?;
        let solved = route_state(coin, m, k, Route::Solve)?;
        let iterated = route_state(coin, m, k, Route::Iterate)?;
        route_dev = route_dev
            .max(closed.max_deviation(&solved))
            .max(closed.max_deviation(&iterated));
        if 2 * m <= DENSE_EIGEN_LIMIT {
            route_dev = route_dev.max(solved.max_deviation(&dense_state(coin, m, k)?));
        }
        let rates = scattering_rates(coin, m, k)?;
        unit = unit.max((rates.transmission + rates.reflection - 1.0).abs());
        flux = flux
            .max((solved.transmitted.norm_sqr() - rates.transmission).abs())
            .max((solved.reflected.norm_sqr() - rates.reflection).abs());
        if classify_regime(coin, k, 0.0)?.label != RegimeLabel::Boundary && !coin.is_transparent() {
            match energy_chebyshev_formula(coin, m, k) {
                Ok(e) => {
                    let s = energy_by_sum(&solved);
                    energy = energy.max((e - s).abs() / s);
                }
                Err(Error::BoundaryRegime) => {}
                Err(e) => return Err(e.into()),
            }
        }
    }
    lines.push(Line::new(
        "route_equivalence",
        detail.clone(),
        route_dev,
        1e-8,
    ));
    lines.push(Line::new("unitarity", detail.clone(), unit, 1e-12));
    lines.push(Line::new("boundary_flux", detail.clone(), flux, 1e-9));
    lines.push(Line::new("energy_identity", detail.clone(), energy, 1e-9));

    if 2 * m <= DENSE_EIGEN_LIMIT {
        let rho = TruncatedOperator::new(*coin, m)?.spectral_radius()?;
        // passes iff rho < 1
        lines.push(Line::new(
            "spectral_radius",
            detail.clone(),
            rho,
            1.0 - f64::EPSILON,
        ));
    }

    let probe = boundary_continuity_probe(coin, m, 13)?;
    if !probe.degenerate {
        let gap = probe
            .inside
            .last()
            .into_iter()
            .chain(probe.outside.last())
            .map(|&(_, g)| g / probe.boundary_energy)
            .fold(0.0, f64::max);
        lines.push(Line::new("boundary_continuity", detail.clone(), gap, 1e-6));
    }

    let Some(horizon) = settled_horizon(coin, m)? else {
        for check in ["generating_function", "hitting_mass", "hitting_moments"] {
            lines.push(Line::skipped(check, detail.clone()));
        }
        return Ok(lines);
    };
    let gf = max_of(
        ks.iter()
            .take(4)
            .map(|&k| {
                generating_function_check(coin, m, &Frequency::from_wavenumber(k, coin), horizon)
            })
            .collect::<Result<Vec<_>, _>>()?,
    );
    lines.push(Line::new("generating_function", detail.clone(), gf, 1e-8));
    let dist = hitting_distribution(coin, m, horizon)?;
    let mass = (dist.absorbed() + dist.tail_bound - 1.0).abs();
    lines.push(Line::new("hitting_mass", detail.clone(), mass, 1e-9));
    let mut moment = 0.0f64;
    for side in [ExitSide::Left, ExitSide::Right] {
        for order in [0, 1] {
            let d = hitting_moment_direct(&dist, side, order, None)?;
            let opts = QuadratureOptions {
                tol: 1e-7,
                ..Default::default()
            };
            let gap = match adaptive_quadrature(coin, m, side, order, 256, opts) {
                Ok((q, _)) => (d.value - q.value).abs() + d.error_bound,
                // the finest grid still moved: report the grid change as the gap
                Err(Error::GridTooCoarse { coarse, fine, .. }) => {
                    (d.value - fine).abs() + (fine - coarse).abs()
                }
                Err(e) => return Err(e.into()),
            };
            moment = moment.max(gap);
        }
    }
    lines.push(Line::new("hitting_moments", detail, moment, 1e-6));
    Ok(lines)
}

/// Smallest power-of-two horizon up to `2^20` with `‖ψ_N‖² <= 1e-18`.
///
/// The series of exit amplitudes converges like `‖ψ_N‖`, not `‖ψ_N‖²`, so
/// the mass left inside must be far below the amplitude tolerance.
fn settled_horizon(coin: &Coin, m: usize) -> Result<Option<usize>, Failure> {
    let mut n = 256usize;
    while n <= 1 << 20 {
        if hitting_distribution(coin, m, n)?.tail_bound <= 1e-18 {
            return Ok(Some(n));
        }
        n *= 2;
    }
    Ok(None)
}

pub fn check(coin: &Coin, sizes: &[usize], ks: &[f64]) -> Result<Outcome, Failure> {
    let per_size: Vec<Result<Vec<Line>, Failure>> =
        sizes.par_iter().map(|&m| checks_for(coin, m, ks)).collect();
    let mut csv = Csv::new("check");
    csv.coin(coin);
    csv.comment(&format!("k_points={}", ks.len()));
    csv.row(&["check", "detail", "value", "tolerance", "status"]);
    let mut passed = true;
    let mut table = Vec::new();
    for lines in per_size {
        for line in lines? {
            let status = line.status();
            passed &= status != "FAIL";
            table.push(format!(
                "{status}  {:<20} {:<8} {:.3e} <= {:.1e}",
                line.check, line.detail, line.value, line.tol
            ));
            csv.row(&[
                line.check.to_string(),
                line.detail,
                num(line.value),
                num(line.tol),
                status.to_string(),
            ]);
        }
    }
    for t in table {
        eprintln!("{t}");
    }
    Ok(Outcome { csv, passed })
}

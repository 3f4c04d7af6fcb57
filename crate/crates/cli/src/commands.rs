//! The subcommands. Each builds its CSV in memory and reports whether the
//! verifications it ran stayed within tolerance.

use std::fmt;

use log::{debug, info, warn};
use rayon::prelude::*;

use qwscatter::dynamics::{dense_stationary, DEFAULT_MAX_STEPS};
use qwscatter::frequency::DEFAULT_BOUNDARY_TOL;
use qwscatter::observables::PERFECT_TOL;
use qwscatter::truncated::DENSE_EIGEN_LIMIT;
use qwscatter::{
    asymptotic_energy, classify_regime, design_frequency, energy_by_sum, energy_closed_form,
    fit_scaling_order, hitting_distribution, hitting_moment_direct, is_perfect_transmission,
    iterate_inflow, iterate_inflow_doubling, moment_via_quadrature, scattering_rates,
    solve_stationary_linear, stationary_closed_form, Coin, Error, ExitSide, Frequency,
    MomentEstimate, QuadratureOptions, StationaryState, TruncatedOperator,
};

use crate::args::{ArgError, FrequencySpec, Route};
use crate::output::{num, Csv};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "invalid arguments: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<ArgError> for Failure {
    fn from(e: ArgError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numerical(e.to_string())
    }
}

pub struct Outcome {
    pub csv: Csv,
    pub passed: bool,
}

/// Tolerance on `|T + R - 1|` checked in every sweep row.
const UNITARITY_TOL: f64 = 1e-12;
/// Step tolerance of the inflow iteration; the state error is about
/// `tol / (1 - ρ)`, so this sits well below the cross-route tolerance.
const ITERATE_STEP_TOL: f64 = 1e-14;

/// The designed frequency for a size, with a design outside `B_in` treated as
/// an input error.
fn design_k(coin: &Coin, m: usize, x: f64, alpha: f64) -> Result<f64, Failure> {
    match design_frequency(coin, m, x, alpha) {
        Ok(d) => Ok(d.k),
        Err(Error::OutOfRange(msg)) => Err(Failure::Usage(msg)),
        Err(e) => Err(e.into()),
    }
}

/// `(M, k)` pairs in M-major order.
fn jobs(coin: &Coin, sizes: &[usize], freqs: &FrequencySpec) -> Result<Vec<(usize, f64)>, Failure> {
    let mut out = Vec::new();
    for &m in sizes {
        match freqs {
            FrequencySpec::Grid(ks) => out.extend(ks.iter().map(|&k| (m, k))),
            FrequencySpec::Design { x, alpha } => out.push((m, design_k(coin, m, *x, *alpha)?)),
        }
    }
    if out.is_empty() {
        return Err(Failure::Usage("nothing to evaluate".into()));
    }
    Ok(out)
}

pub fn route_state(
    coin: &Coin,
    m: usize,
    k: f64,
    route: Route,
) -> Result<StationaryState, Failure> {
    let freq = Frequency::from_wavenumber(k, coin);
    match route {
        Route::Closed => {
            let regime = classify_regime(coin, k, DEFAULT_BOUNDARY_TOL)?;
            Ok(stationary_closed_form(coin, m, &freq, &regime)?)
        }
        Route::Solve => Ok(solve_stationary_linear(coin, m, &freq)?),
        Route::Iterate => {
            let report = iterate_inflow(coin, m, &freq, ITERATE_STEP_TOL, DEFAULT_MAX_STEPS)?;
            if report.converged {
                debug!("iteration converged in {} steps", report.steps);
                return Ok(report.state);
            }
            if 2 * m > DENSE_EIGEN_LIMIT {
                return Err(Error::NotConverged {
                    steps: report.steps,
                    delta: report.final_delta,
                }
                .into());
            }
            info!(
                "stepwise iteration stalled at {} steps (delta {:.3e}); switching to doubling",
                report.steps, report.final_delta
            );
            let doubled =
                iterate_inflow_doubling(coin, m, &freq, ITERATE_STEP_TOL, usize::MAX / 2)?;
            Ok(doubled.into_result()?.state)
        }
    }
}

pub fn stationary(
    coin: &Coin,
    sizes: &[usize],
    freqs: &FrequencySpec,
    routes: &[Route],
    tol: f64,
) -> Result<Outcome, Failure> {
    let pairs = jobs(coin, sizes, freqs)?;
    if pairs.len() != 1 {
        return Err(Failure::Usage(
            "stationary takes a single M and a single k".into(),
        ));
    }
    let (m, k) = pairs[0];
    let regime = classify_regime(coin, k, DEFAULT_BOUNDARY_TOL)?;
    let mut csv = Csv::new("stationary");
    csv.coin(coin);
    csv.comment(&format!(
        "M={m} k={} regime={} tol={}",
        num(k),
        regime.label.as_str(),
        num(tol)
    ));
    csv.row(&["route", "n", "re_R", "im_R", "re_L", "im_L", "norm2"]);
    let mut states = Vec::with_capacity(routes.len());
    for &route in routes {
        let s = route_state(coin, m, k, route)?;
        for (n, site) in s.sites.iter().enumerate() {
            csv.row(&[
                route.as_str().to_string(),
                n.to_string(),
                num(site.right.re),
                num(site.right.im),
                num(site.left.re),
                num(site.left.im),
                num(site.norm_sqr()),
            ]);
        }
        states.push(s);
    }
    let mut passed = true;
    if states.len() > 1 {
        let dev = states[1..]
            .iter()
            .map(|s| states[0].max_deviation(s))
            .fold(0.0, f64::max);
        passed = dev <= tol;
        csv.comment(&format!("max_deviation={}", num(dev)));
        eprintln!("max cross-route deviation {dev:.3e} (tol {tol:.1e})");
    }
    Ok(Outcome { csv, passed })
}

struct SweepRow {
    m: usize,
    k: f64,
    regime: &'static str,
    t: f64,
    r: f64,
    e_closed: f64,
    e_sum: f64,
    perfect: bool,
    ell: Option<usize>,
    asym_pred: f64,
    asym_case: &'static str,
}

fn sweep_row(coin: &Coin, m: usize, k: f64) -> Result<SweepRow, Error> {
    let rates = scattering_rates(coin, m, k)?;
    let e_closed = energy_closed_form(coin, m, k)?.value;
    let e_sum = energy_by_sum(&solve_stationary_linear(
        coin,
        m,
        &Frequency::from_wavenumber(k, coin),
    )?);
    let (perfect, ell) = is_perfect_transmission(coin, m, k, PERFECT_TOL)?;
    let (asym_pred, asym_case) = match asymptotic_energy(coin, m, k) {
        Ok(p) => (p.value, p.case.as_str()),
        Err(Error::AmbiguousRegime { .. }) => (f64::NAN, "ambiguous"),
        Err(e) => {
            debug!("no asymptotic prediction at M={m} k={k}: {e}");
            (f64::NAN, "none")
        }
    };
    Ok(SweepRow {
        m,
        k,
        regime: rates.regime.as_str(),
        t: rates.transmission,
        r: rates.reflection,
        e_closed,
        e_sum,
        perfect,
        ell,
        asym_pred,
        asym_case,
    })
}

pub fn sweep(
    coin: &Coin,
    sizes: &[usize],
    freqs: &FrequencySpec,
    tol: f64,
) -> Result<Outcome, Failure> {
    let pairs = jobs(coin, sizes, freqs)?;
    let rows: Vec<Result<SweepRow, Error>> = pairs
        .par_iter()
        .map(|&(m, k)| sweep_row(coin, m, k))
        .collect();
    let rows: Vec<SweepRow> = rows.into_iter().collect::<Result<_, _>>()?;

    let mut csv = Csv::new("sweep");
    csv.coin(coin);
    match freqs {
        FrequencySpec::Grid(ks) => csv.comment(&format!("k_points={}", ks.len())),
        FrequencySpec::Design { x, alpha } => {
            csv.comment(&format!("design x={} alpha={}", num(*x), num(*alpha)))
        }
    }
    csv.comment(&format!(
        "tol unitarity={} energy_relative={} perfect={}",
        num(UNITARITY_TOL),
        num(tol),
        num(PERFECT_TOL)
    ));
    csv.row(&[
        "M",
        "k",
        "regime",
        "T",
        "R",
        "E_closed",
        "E_sum",
        "perfect",
        "ell",
        "asym_pred",
        "asym_case",
    ]);
    let mut passed = true;
    for row in &rows {
        let unit = (row.t + row.r - 1.0).abs();
        let rel = (row.e_closed - row.e_sum).abs() / row.e_closed.abs().max(f64::MIN_POSITIVE);
        if unit > UNITARITY_TOL || rel > tol {
            warn!(
                "M={} k={}: |T+R-1|={unit:.3e}, energy mismatch {rel:.3e}",
                row.m, row.k
            );
            passed = false;
        }
        csv.row(&[
            row.m.to_string(),
            num(row.k),
            row.regime.to_string(),
            num(row.t),
            num(row.r),
            num(row.e_closed),
            num(row.e_sum),
            row.perfect.to_string(),
            row.ell.map_or_else(String::new, |l| l.to_string()),
            num(row.asym_pred),
            row.asym_case.to_string(),
        ]);
    }
    let single_k = rows.windows(2).all(|w| w[0].m != w[1].m);
    if rows.len() >= 4 && single_k {
        let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.m as f64, r.e_closed)).collect();
        match fit_scaling_order(&points) {
            Ok(fit) => {
                csv.comment(&format!("exponent={}", num(fit.exponent)));
                csv.comment(&format!("r_squared={}", num(fit.r_squared)));
            }
            Err(e) => warn!("no scaling fit: {e}"),
        }
    }
    Ok(Outcome { csv, passed })
}

/// Largest quadrature grid tried before giving up.
const MAX_GRID: usize = 1 << 16;

/// Quadrature starting at `grid` and doubling until consecutive grids agree.
pub fn adaptive_quadrature(
    coin: &Coin,
    m: usize,
    side: ExitSide,
    order: u32,
    grid: usize,
    opts: QuadratureOptions,
) -> Result<(MomentEstimate, usize), Error> {
    let mut n = grid;
    loop {
        match moment_via_quadrature(coin, m, side, order, n, opts) {
            Ok(est) => return Ok((est, n)),
            Err(Error::GridTooCoarse { .. }) if n < MAX_GRID => {
                debug!("quadrature grid {n} too coarse, doubling");
                n *= 2;
            }
            Err(e) => return Err(e),
        }
    }
}

pub struct MomentArgs {
    pub orders: Vec<u32>,
    pub horizon: usize,
    pub grid: usize,
    pub tol: f64,
}

pub fn moments(coin: &Coin, sizes: &[usize], args: &MomentArgs) -> Result<Outcome, Failure> {
    if sizes.len() != 1 {
        return Err(Failure::Usage("moments takes a single M".into()));
    }
    let m = sizes[0];
    if let Some(&bad) = args.orders.iter().find(|&&o| o > 2) {
        return Err(Failure::Usage(format!(
            "moment order {bad} is not supported (m <= 2)"
        )));
    }
    if args.grid < 64 || !args.grid.is_power_of_two() {
        return Err(Failure::Usage(format!(
            "--grid {} must be a power of two >= 64",
            args.grid
        )));
    }
    if args.horizon == 0 {
        return Err(Failure::Usage("--horizon must be positive".into()));
    }
    let dist = hitting_distribution(coin, m, args.horizon)?;
    let mut csv = Csv::new("moments");
    csv.coin(coin);
    csv.comment(&format!(
        "M={m} horizon={} grid={} tol={} absorbed={}",
        args.horizon,
        args.grid,
        num(args.tol),
        num(dist.absorbed())
    ));
    csv.row(&[
        "side",
        "m",
        "direct",
        "quadrature",
        "abs_diff",
        "tail_bound",
    ]);
    let opts = QuadratureOptions {
        tol: args.tol,
        ..QuadratureOptions::default()
    };
    let mut passed = true;
    for side in [ExitSide::Left, ExitSide::Right] {
        for &order in &args.orders {
            let direct = hitting_moment_direct(&dist, side, order, None)?;
            let (quad, used) = adaptive_quadrature(coin, m, side, order, args.grid, opts)?;
            if used != args.grid {
                info!(
                    "{} m={order}: quadrature settled on grid {used}",
                    side.as_str()
                );
            }
            let diff = (direct.value - quad.value).abs();
            if diff > args.tol {
                passed = false;
            }
            csv.row(&[
                side.as_str().to_string(),
                order.to_string(),
                num(direct.value),
                num(quad.value),
                num(diff),
                num(direct.error_bound),
            ]);
        }
    }
    Ok(Outcome { csv, passed })
}

pub fn spectrum(coin: &Coin, sizes: &[usize]) -> Result<Outcome, Failure> {
    if sizes.len() != 1 {
        return Err(Failure::Usage("spectrum takes a single M".into()));
    }
    let m = sizes[0];
    if 2 * m > DENSE_EIGEN_LIMIT {
        return Err(Failure::Usage(format!(
            "spectrum needs M <= {} for the dense eigensolve",
            DENSE_EIGEN_LIMIT / 2
        )));
    }
    let op = TruncatedOperator::new(*coin, m)?;
    let mut ev = op.eigenvalues()?;
    ev.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then(a.arg().total_cmp(&b.arg()))
    });
    let max = ev.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut csv = Csv::new("spectrum");
    csv.coin(coin);
    csv.comment(&format!("M={m}"));
    csv.row(&["index", "re", "im", "modulus"]);
    for (i, l) in ev.iter().enumerate() {
        csv.row(&[i.to_string(), num(l.re), num(l.im), num(l.norm())]);
    }
    csv.comment(&format!("max_modulus={}", num(max)));
    // containment is only claimed for a transmitting coin
    let passed = coin.abs_a == 0.0 || max < 1.0;
    Ok(Outcome { csv, passed })
}

/// Dense reference solve, exposed for `check`.
pub fn dense_state(coin: &Coin, m: usize, k: f64) -> Result<StationaryState, Failure> {
    Ok(dense_stationary(
        coin,
        m,
        Frequency::from_wavenumber(k, coin).z,
    )?)
}

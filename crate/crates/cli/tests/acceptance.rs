//! Acceptance harness: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2, TAU};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qwscatter::frequency::DEFAULT_BOUNDARY_TOL;
use qwscatter::observables::energy_chebyshev_formula;
use qwscatter::{
    boundary_continuity_probe, classify_regime, design_frequency, energy_by_sum,
    energy_closed_form, fit_scaling_order, generating_function_check, hitting_distribution,
    hitting_moment_direct, iterate_inflow, iterate_inflow_doubling, moment_via_quadrature,
    scattering_rates, solve_stationary_linear, stationary_closed_form, Coin, EnergyBranch, Error,
    ExitSide, Frequency, QuadratureOptions, StationaryState, TruncatedOperator, ZetaTable,
};

type Outcome = Result<String, String>;

fn random_coin(rng: &mut ChaCha8Rng) -> Coin {
    let a = rng.random_range(0.1..=0.95);
    Coin::from_params(
        a,
        rng.random_range(0.0..TAU),
        rng.random_range(0.0..TAU),
        rng.random_range(0.0..TAU),
    )
    .expect("parametrized coin is unitary")
}

fn within_time(spent: Duration, limit: Duration, detail: String) -> Outcome {
    if spent < limit {
        Ok(detail)
    } else {
        Err(format!("{detail}; took {spent:.1?}, limit {limit:?}"))
    }
}

fn iterated(coin: &Coin, m: usize, freq: &Frequency) -> Result<StationaryState, Error> {
    let report = iterate_inflow(coin, m, freq, 1e-14, 1_000_000)?;
    if report.converged {
        return Ok(report.state);
    }
    Ok(
        iterate_inflow_doubling(coin, m, freq, 1e-14, usize::MAX / 2)?
            .into_result()?
            .state,
    )
}

fn route_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut count = 0;
    for _ in 0..25 {
        let coin = random_coin(&mut rng);
        for m in [1usize, 2, 3, 8, 32] {
            for _ in 0..8 {
                let k = rng.random_range(0.0..TAU);
                let freq = Frequency::from_wavenumber(k, &coin);
                let regime =
                    classify_regime(&coin, k, DEFAULT_BOUNDARY_TOL).map_err(|e| e.to_string())?;
                let closed =
                    stationary_closed_form(&coin, m, &freq, &regime).map_err(|e| e.to_string())?;
                let solved = solve_stationary_linear(&coin, m, &freq).map_err(|e| e.to_string())?;
                let iter =
                    iterated(&coin, m, &freq).map_err(|e| format!("iterate M={m} k={k}: {e}"))?;
                let dev = closed
                    .max_deviation(&solved)
                    .max(closed.max_deviation(&iter))
                    .max(solved.max_deviation(&iter));
                worst = worst.max(dev);
                count += 1;
            }
        }
    }
    let detail = format!("{count} cases, max componentwise deviation {worst:.2e} (tol 1e-8)");
    if worst > 1e-8 {
        return Err(detail);
    }
    within_time(start.elapsed(), Duration::from_secs(60), detail)
}

fn unitarity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut coins = vec![Coin::hadamard()];
    coins.extend((0..4).map(|_| random_coin(&mut rng)));
    let (mut unit, mut flux) = (0.0f64, 0.0f64);
    for coin in &coins {
        for m in [1usize, 4, 16] {
            for j in 0..1000 {
                let k = TAU * j as f64 / 1000.0;
                let rates = scattering_rates(coin, m, k).map_err(|e| e.to_string())?;
                unit = unit.max((rates.transmission + rates.reflection - 1.0).abs());
                let s = solve_stationary_linear(coin, m, &Frequency::from_wavenumber(k, coin))
                    .map_err(|e| e.to_string())?;
                flux = flux
                    .max((s.transmitted.norm_sqr() - rates.transmission).abs())
                    .max((s.reflected.norm_sqr() - rates.reflection).abs());
            }
        }
    }
    let detail =
        format!("max |T+R-1| {unit:.2e} (tol 1e-12), max flux mismatch {flux:.2e} (tol 1e-9)");
    if unit <= 1e-12 && flux <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Wavenumbers with `arccos(cos k / |a|) = θ`, one per branch.
fn wavenumbers_for_theta(coin: &Coin, theta: f64) -> [f64; 4] {
    let k = (coin.abs_a * theta.cos()).acos();
    [k, -k, TAU - k, PI - k]
}

fn perfect_transmission() -> Outcome {
    let coin = Coin::hadamard();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut min_design = f64::INFINITY;
    let mut max_other = 0.0f64;
    let mut others = 0;
    for m in 2usize..=8 {
        for ell in 1..m {
            for k in wavenumbers_for_theta(&coin, ell as f64 * PI / m as f64) {
                let t = scattering_rates(&coin, m, k)
                    .map_err(|e| e.to_string())?
                    .transmission;
                min_design = min_design.min(t);
            }
        }
        let mut drawn = 0;
        while drawn < 1000 {
            let theta = rng.random_range(0.0..PI);
            let gap = (1..m)
                .map(|l| (theta - l as f64 * PI / m as f64).abs())
                .fold(f64::INFINITY, f64::min);
            // design points are excluded with a margin of 1e-2 in θ
            if gap < 1e-2 {
                continue;
            }
            let k = wavenumbers_for_theta(&coin, theta)[rng.random_range(0..4)];
            let t = scattering_rates(&coin, m, k)
                .map_err(|e| e.to_string())?
                .transmission;
            max_other = max_other.max(t);
            drawn += 1;
        }
        others += drawn;
    }
    let detail = format!(
        "design min T = 1 - {:.2e} (need >= 1 - 1e-9); {others} other B_in points max T = 1 - {:.2e} (need < 1 - 1e-6)",
        1.0 - min_design,
        1.0 - max_other
    );
    if min_design >= 1.0 - 1e-9 && max_other < 1.0 - 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn spectral_containment() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let coin = random_coin(&mut rng);
        let m = if i % 10 == 0 {
            64
        } else {
            rng.random_range(1..=64)
        };
        let op = TruncatedOperator::new(coin, m).map_err(|e| e.to_string())?;
        let rho = op
            .eigenvalues()
            .map_err(|e| e.to_string())?
            .iter()
            .map(|l| l.norm())
            .fold(0.0, f64::max);
        worst = worst.max(rho);
    }
    let detail = format!("50 coins, largest spectral radius {worst:.12}");
    if worst >= 1.0 {
        return Err(detail);
    }
    within_time(start.elapsed(), Duration::from_secs(30), detail)
}

fn boundary_energy_oracle(coin: &Coin, m: usize) -> f64 {
    let (a2, b2) = (coin.abs_a.powi(2), coin.abs_b.powi(2));
    let m = m as f64;
    m / 3.0 * (3.0 * a2 + b2 + 2.0 * b2 * m * m) / (a2 + b2 * m * m)
}

fn energy_identity_and_continuity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut coins = vec![Coin::hadamard()];
    coins.extend((0..5).map(|_| random_coin(&mut rng)));
    let mut identity = 0.0f64;
    for coin in &coins {
        for m in [1usize, 2, 3, 5, 8, 16, 32, 64, 128] {
            for _ in 0..20 {
                let k = rng.random_range(0.0..TAU);
                let formula = match energy_chebyshev_formula(coin, m, k) {
                    Ok(e) => e,
                    Err(Error::BoundaryRegime) => continue,
                    Err(e) => return Err(e.to_string()),
                };
                let state = solve_stationary_linear(coin, m, &Frequency::from_wavenumber(k, coin))
                    .map_err(|e| e.to_string())?;
                let sum = energy_by_sum(&state);
                identity = identity.max((formula - sum).abs() / sum);
            }
        }
    }
    let mut gap = 0.0f64;
    let mut limit_err = 0.0f64;
    for coin in &coins {
        for m in [1usize, 2, 3, 8, 32, 128] {
            let probe = boundary_continuity_probe(coin, m, 13).map_err(|e| e.to_string())?;
            let oracle = boundary_energy_oracle(coin, m);
            limit_err = limit_err.max((probe.boundary_energy - oracle).abs() / oracle);
            for side in [&probe.inside, &probe.outside] {
                let (_, g) = side.last().copied().ok_or("empty probe")?;
                gap = gap.max(g / oracle);
            }
        }
    }
    let detail = format!(
        "formula vs per-site sum {identity:.2e} (tol 1e-9); two-sided gap {gap:.2e} (tol 1e-6); \
         boundary value vs oracle {limit_err:.2e}"
    );
    if identity <= 1e-9 && gap < 1e-6 && limit_err <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn boundary_scaling() -> Outcome {
    let start = Instant::now();
    let coin = Coin::hadamard();
    let m = 10_000;
    let e = energy_closed_form(&coin, m, PI / 4.0).map_err(|e| e.to_string())?;
    let ratio = e.value / m as f64;
    let detail = format!("E/M = {ratio:.9} at M = 10^4, branch {:?}", e.branch);
    if e.branch != EnergyBranch::Boundary || (ratio - 2.0 / 3.0).abs() > 1e-3 {
        return Err(detail);
    }
    within_time(start.elapsed(), Duration::from_secs(5), detail)
}

fn outside_limit() -> Outcome {
    let coin = Coin::hadamard();
    let m = 200;
    let e = energy_closed_form(&coin, m, 0.0)
        .map_err(|e| e.to_string())?
        .value;
    let x = 1.0 / FRAC_1_SQRT_2;
    let scaled = ZetaTable::new(x, m + 1)
        .map_err(|e| e.to_string())?
        .is_scaled();
    let detail = format!(
        "|E - sqrt 2| = {:.2e} (tol 1e-6), log-scaled table used: {scaled}",
        (e - SQRT_2).abs()
    );
    if (e - SQRT_2).abs() < 1e-6 && scaled {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fitted_exponent(coin: &Coin, x: f64, alpha: f64) -> Result<f64, String> {
    let mut points = Vec::new();
    for j in 6..=12 {
        let m = 1usize << j;
        let d = design_frequency(coin, m, x, alpha).map_err(|e| e.to_string())?;
        let e = energy_closed_form(coin, m, d.k)
            .map_err(|e| e.to_string())?
            .value;
        points.push((m as f64, e));
    }
    Ok(fit_scaling_order(&points)
        .map_err(|e| e.to_string())?
        .exponent)
}

fn scaling_orders() -> Outcome {
    let start = Instant::now();
    let coin = Coin::hadamard();
    let cases = [
        ("x'=1 alpha=1", 1.0, 1.0, 3.0),
        ("x'=1 alpha=2", 1.0, 2.0, 3.0),
        ("x'=2 alpha=1.5", 2.0, 1.5, 3.0),
        ("x'=1 alpha=0.25", 1.0, 0.25, 1.5),
        ("x'=0.5 alpha=1", 0.5, 1.0, 1.0),
        ("x'=1.3 alpha=0.5", 1.3, 0.5, 1.0),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (label, x, alpha, want) in cases {
        let got = fitted_exponent(&coin, x, alpha)?;
        ok &= (got - want).abs() <= 0.2;
        parts.push(format!("{label}: {got:.3} (want {want})"));
    }
    let detail = parts.join("; ");
    if !ok {
        return Err(detail);
    }
    within_time(start.elapsed(), Duration::from_secs(120), detail)
}

fn discontinuity_witness() -> Outcome {
    let coin = Coin::hadamard();
    let m = 256;
    let res = design_frequency(&coin, m, 1.0, 2.0).map_err(|e| e.to_string())?;
    let generic = design_frequency(&coin, m, 1.5, 2.0).map_err(|e| e.to_string())?;
    let e_res = energy_closed_form(&coin, m, res.k)
        .map_err(|e| e.to_string())?
        .value;
    let e_gen = energy_closed_form(&coin, m, generic.k)
        .map_err(|e| e.to_string())?
        .value;
    let ratio = e_res / e_gen;
    let detail = format!("E(resonant) / E(neighbor) = {ratio:.1} (need >= M = {m})");
    if ratio >= m as f64 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn hitting_routes() -> Outcome {
    let coin = Coin::hadamard();
    let (mut mass, mut moments, mut gf) = (0.0f64, 0.0f64, 0.0f64);
    for m in [1usize, 2, 3] {
        let dist = hitting_distribution(&coin, m, 4096).map_err(|e| e.to_string())?;
        mass = mass.max((dist.absorbed() - 1.0).abs() - dist.tail_bound);
        for side in [ExitSide::Left, ExitSide::Right] {
            for order in [0u32, 1] {
                let d =
                    hitting_moment_direct(&dist, side, order, None).map_err(|e| e.to_string())?;
                let q =
                    moment_via_quadrature(&coin, m, side, order, 256, QuadratureOptions::default())
                        .map_err(|e| e.to_string())?;
                moments = moments.max((d.value - q.value).abs());
            }
        }
        for k in [0.3, 1.1, 2.0, 3.5, 5.2] {
            let dev =
                generating_function_check(&coin, m, &Frequency::from_wavenumber(k, &coin), 4096)
                    .map_err(|e| e.to_string())?;
            gf = gf.max(dev);
        }
    }
    let mass = mass.max(0.0);
    let detail = format!(
        "mass defect beyond tail {mass:.2e} (tol 1e-9); moment route gap {moments:.2e} (tol 1e-6); \
         generating function deviation {gf:.2e} (tol 1e-8)"
    );
    if mass <= 1e-9 && moments <= 1e-6 && gf <= 1e-8 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_qwscatter");
    let base = [
        "sweep",
        "--coin",
        "hadamard",
        "--M-range",
        "2:64:2",
        "--k-grid",
        "0:2pi:64",
    ];
    let mut outputs = Vec::new();
    for jobs in [None, Some("1"), Some("8")] {
        let mut cmd = Command::new(bin);
        cmd.args(base);
        if let Some(j) = jobs {
            cmd.args(["--jobs", j]);
        }
        let out = cmd.output().map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("sweep exited with {:?}", out.status.code()));
        }
        outputs.push(out.stdout);
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    let detail = format!(
        "3 runs (default, --jobs 1, --jobs 8), {} bytes each",
        outputs[0].len()
    );
    if same && !outputs[0].is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; outputs differ"))
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("route equivalence", route_equivalence),
        ("unitarity", unitarity),
        ("perfect transmission", perfect_transmission),
        ("spectral containment", spectral_containment),
        (
            "energy identity and continuity",
            energy_identity_and_continuity,
        ),
        ("boundary scaling", boundary_scaling),
        ("outside limit", outside_limit),
        ("scaling orders", scaling_orders),
        ("discontinuity witness", discontinuity_witness),
        ("hitting-time routes", hitting_routes),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let spent = start.elapsed();
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{spent:.2?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{spent:.2?}]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

//! Time-domain routes.
//!
//! With the phase-corrected state `φ_n = e^{i(n+1)ξ} Ψ_n` restricted to the
//! block, the inflow recursion is `φ_{n+1} = z⁻¹ (E_M φ_n + δ_(0;R))` from
//! `φ_0 = z⁻¹ δ_(0;R)`, whose limit solves `(z - E_M) φ = δ_(0;R)`.
//!
//! A single walker started at `(0;R)` evolves by `ψ_{n+1} = E_M ψ_n`; the
//! amplitude it sheds through `(-1;L)` and `(M;R)` at step `n + 1` gives the
//! first-hitting sequences. Their generating function in `z⁻¹` is the
//! stationary reflected (transmitted) amplitude, which is what the
//! quadrature route samples on the unit circle.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::coin::Coin;
use crate::error::{Error, Result};
use crate::frequency::Frequency;
use crate::observables::neumaier_sum;
use crate::truncated::{
    left_arc, right_arc, solve_at_z, solve_stationary_linear, source, StationaryState,
    TruncatedOperator, DENSE_EIGEN_LIMIT,
};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_STEPS: usize = 1_000_000;

/// Steps between decay-rate checkpoints in [`iterate_inflow`].
const CHECKPOINT: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport {
    pub state: StationaryState,
    pub steps: usize,
    /// Sup-norm change over the last step (or the last doubling).
    pub final_delta: f64,
    pub converged: bool,
    /// Per-step contraction of the change, fitted over the second half of the run.
    pub decay_rate: Option<f64>,
}

impl IterationReport {
    /// Turns a non-converged report into [`Error::NotConverged`].
    pub fn into_result(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                steps: self.steps,
                delta: self.final_delta,
            })
        }
    }
}

fn sup_norm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn fitted_rate(deltas: &[f64]) -> Option<f64> {
    let n = deltas.len();
    if n < 8 {
        return None;
    }
    let (i, j) = (n / 2, n - 1);
    let (a, b) = (deltas[i], deltas[j]);
    (a > 0.0 && b > 0.0).then(|| (b / a).powf(1.0 / (j - i) as f64))
}

/// Step-by-step iteration of the inflow recursion.
///
/// Stops once the sup-norm change is at most `tol`, or early when the
/// decay-rate fit predicts that `n_max` steps will not suffice. A run that
/// stops without converging still returns its report with `converged = false`.
pub fn iterate_inflow(
    coin: &Coin,
    sites: usize,
    freq: &Frequency,
    tol: f64,
    n_max: usize,
) -> Result<IterationReport> {
    coin.require_transmitting()?;
    if tol <= 0.0 {
        return Err(Error::OutOfRange(format!("tol = {tol} must be positive")));
    }
    let op = TruncatedOperator::new(*coin, sites)?;
    let z_inv = freq.z.inv();
    let rhs = source(op.dim());
    let mut phi: Vec<C64> = rhs.iter().map(|r| r * z_inv).collect();
    let mut next = vec![C64::ZERO; op.dim()];
    let mut deltas = Vec::new();
    let mut delta = f64::INFINITY;
    let mut steps = 0;
    let mut converged = false;
    while steps < n_max {
        op.apply_into(&phi, &mut next)?;
        delta = 0.0;
        for (i, v) in next.iter_mut().enumerate() {
            *v = (*v + rhs[i]) * z_inv;
            delta = delta.max((*v - phi[i]).norm());
        }
        std::mem::swap(&mut phi, &mut next);
        steps += 1;
        deltas.push(delta);
        if delta <= tol {
            converged = true;
            break;
        }
        if steps % CHECKPOINT == 0 && steps >= 2 * CHECKPOINT {
            let r = (delta / deltas[steps - 1 - CHECKPOINT]).powf(1.0 / CHECKPOINT as f64);
            let hopeless = r >= 1.0 || (tol / delta).ln() / r.ln() > (n_max - steps) as f64;
            if hopeless {
                log::debug!("inflow iteration abandoned at step {steps}: rate {r:.6}");
                break;
            }
        }
    }
    Ok(IterationReport {
        state: StationaryState::from_arcs(coin, freq.z, &phi),
        steps,
        final_delta: delta,
        converged,
        decay_rate: fitted_rate(&deltas),
    })
}

/// The same sequence sampled at `n = 2^j - 1` by repeated squaring:
/// with `G = z⁻¹ E_M` and `S_m = Σ_{j<m} G^j z⁻¹ δ = φ_{m-1}`,
/// `S_{2m} = S_m + G^m S_m`. Useful when `1 - ρ(E_M)` is tiny.
pub fn iterate_inflow_doubling(
    coin: &Coin,
    sites: usize,
    freq: &Frequency,
    tol: f64,
    n_max: usize,
) -> Result<IterationReport> {
    coin.require_transmitting()?;
    let op = TruncatedOperator::new(*coin, sites)?;
    if op.dim() > DENSE_EIGEN_LIMIT {
        return Err(Error::SizeOverflow {
            sites,
            limit: DENSE_EIGEN_LIMIT / 2,
        });
    }
    let z_inv = freq.z.inv();
    let mut g_pow = op.to_dense() * z_inv;
    let mut s = DVector::from_vec(source(op.dim())) * z_inv;
    let mut m = 1usize;
    let mut delta = f64::INFINITY;
    let mut deltas = Vec::new();
    let mut converged = false;
    while 2 * m - 1 <= n_max {
        let change = &g_pow * &s;
        delta = sup_norm(change.as_slice());
        s += change;
        m *= 2;
        deltas.push(delta);
        if delta <= tol {
            converged = true;
            break;
        }
        g_pow = &g_pow * &g_pow;
    }
    Ok(IterationReport {
        state: StationaryState::from_arcs(coin, freq.z, s.as_slice()),
        steps: m - 1,
        final_delta: delta,
        converged,
        decay_rate: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExitSide {
    /// Through `(-1;L)`: reflection.
    Left,
    /// Through `(M;R)`: transmission.
    Right,
}

impl ExitSide {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExitSide::Left => "left",
            ExitSide::Right => "right",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HittingDistribution {
    pub horizon: usize,
    /// `gamma[n]`, `n = 0..=N`, with `gamma[0] = 0`.
    pub gamma: Vec<f64>,
    pub tau: Vec<f64>,
    pub left_amplitudes: Vec<C64>,
    pub right_amplitudes: Vec<C64>,
    /// `‖ψ_n‖²`, `n = 0..=N`; the mass still inside the block.
    pub mass: Vec<f64>,
    /// `‖ψ_N‖²`: exactly the probability not yet absorbed.
    pub tail_bound: f64,
    /// `ρ(E_M)` when the dense eigensolve is affordable.
    pub spectral_radius: Option<f64>,
}

impl HittingDistribution {
    pub fn probabilities(&self, side: ExitSide) -> &[f64] {
        match side {
            ExitSide::Left => &self.gamma,
            ExitSide::Right => &self.tau,
        }
    }

    pub fn amplitudes(&self, side: ExitSide) -> &[C64] {
        match side {
            ExitSide::Left => &self.left_amplitudes,
            ExitSide::Right => &self.right_amplitudes,
        }
    }

    pub fn absorbed(&self) -> f64 {
        neumaier_sum(self.gamma.iter().chain(&self.tau).copied())
    }
}

pub fn hitting_distribution(
    coin: &Coin,
    sites: usize,
    horizon: usize,
) -> Result<HittingDistribution> {
    if horizon == 0 {
        return Err(Error::OutOfRange("horizon must be at least 1".into()));
    }
    let op = TruncatedOperator::new(*coin, sites)?;
    let last = sites - 1;
    let mut psi = source(op.dim());
    let mut next = vec![C64::ZERO; op.dim()];
    let mut left = vec![C64::ZERO; horizon + 1];
    let mut right = vec![C64::ZERO; horizon + 1];
    let mut mass = Vec::with_capacity(horizon + 1);
    mass.push(1.0);
    for n in 0..horizon {
        left[n + 1] = coin.a * psi[left_arc(0)] + coin.b * psi[right_arc(0)];
        right[n + 1] = coin.c * psi[left_arc(last)] + coin.d * psi[right_arc(last)];
        op.apply_into(&psi, &mut next)?;
        std::mem::swap(&mut psi, &mut next);
        mass.push(psi.iter().map(|c| c.norm_sqr()).sum());
    }
    let spectral_radius = if coin.abs_a > 0.0 && op.dim() <= DENSE_EIGEN_LIMIT {
        Some(op.spectral_radius()?)
    } else {
        None
    };
    Ok(HittingDistribution {
        horizon,
        gamma: left.iter().map(|c| c.norm_sqr()).collect(),
        tau: right.iter().map(|c| c.norm_sqr()).collect(),
        left_amplitudes: left,
        right_amplitudes: right,
        tail_bound: mass[horizon],
        mass,
        spectral_radius,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub value: f64,
    pub error_bound: f64,
}

/// `Σ_{j>=0} (A + j)^m q^j` for `m <= 2`.
fn weighted_geometric(a: f64, q: f64, m: u32) -> f64 {
    let r = 1.0 - q;
    match m {
        0 => 1.0 / r,
        1 => a / r + q / (r * r),
        _ => a * a / r + 2.0 * a * q / (r * r) + q * (1.0 + q) / (r * r * r),
    }
}

/// `Σ_{n<=N} n^m p_n` with a tail estimate `‖ψ_N‖² Σ_j (N+1+j)^m q^j`, where
/// `q` is the larger of `ρ(E_M)²` and the mass decay observed at the horizon.
///
/// Fails with [`Error::TailTooHeavy`] when the estimate exceeds `requested`.
pub fn hitting_moment_direct(
    dist: &HittingDistribution,
    side: ExitSide,
    m: u32,
    requested: Option<f64>,
) -> Result<MomentEstimate> {
    if m > 2 {
        return Err(Error::UnsupportedMoment(m));
    }
    let p = dist.probabilities(side);
    let value = neumaier_sum(
        p.iter()
            .enumerate()
            .map(|(n, v)| (n as f64).powi(m as i32) * v),
    );
    let n = dist.horizon;
    let tail = dist.tail_bound;
    let error_bound = if tail == 0.0 {
        0.0
    } else {
        let w = (n / 4).clamp(1, 64);
        let earlier = dist.mass[n - w];
        let empirical = if earlier > 0.0 {
            (tail / earlier).powf(1.0 / w as f64)
        } else {
            1.0
        };
        let q = dist
            .spectral_radius
            .map_or(empirical, |r| empirical.max(r * r));
        if q >= 1.0 {
            f64::INFINITY
        } else {
            tail * weighted_geometric((n + 1) as f64, q, m)
        }
    };
    if let Some(req) = requested {
        if error_bound > req {
            return Err(Error::TailTooHeavy {
                bound: error_bound,
                requested: req,
            });
        }
    }
    Ok(MomentEstimate { value, error_bound })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivative {
    /// Multiply Fourier coefficients by `n^m`.
    Spectral,
    /// Second-order central differences; kept for validation.
    CentralDifference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Largest accepted change between grid `N` and `2N`.
    pub tol: f64,
    pub derivative: Derivative,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            derivative: Derivative::Spectral,
        }
    }
}

/// Boundary amplitude on `ξ_j = 2πj/N`, i.e. at `z_j = e^{-iξ_j}`.
fn sample_amplitudes(op: &TruncatedOperator, side: ExitSide, grid: usize) -> Result<Vec<C64>> {
    (0..grid)
        .into_par_iter()
        .map(|j| {
            let z = C64::from_polar(1.0, -TAU * j as f64 / grid as f64);
            let s = solve_at_z(op, z)?;
            Ok(match side {
                ExitSide::Left => s.reflected,
                ExitSide::Right => s.transmitted,
            })
        })
        .collect()
}

fn apply_derivative(samples: &[C64], m: u32, kind: Derivative) -> Vec<C64> {
    let n = samples.len();
    if m == 0 {
        return samples.to_vec();
    }
    match kind {
        Derivative::Spectral => {
            let mut planner = FftPlanner::<f64>::new();
            let mut buf = samples.to_vec();
            planner.plan_fft_forward(n).process(&mut buf);
            for (k, v) in buf.iter_mut().enumerate() {
                let w = if k < n / 2 {
                    k as f64
                } else if k > n / 2 {
                    k as f64 - n as f64
                } else if m % 2 == 1 {
                    0.0
                } else {
                    (n / 2) as f64
                };
                *v *= w.powi(m as i32) / n as f64;
            }
            planner.plan_fft_inverse(n).process(&mut buf);
            buf
        }
        Derivative::CentralDifference => {
            let h = TAU / n as f64;
            (0..n)
                .map(|j| {
                    let (lo, mid, hi) =
                        (samples[(j + n - 1) % n], samples[j], samples[(j + 1) % n]);
                    if m == 1 {
                        -C64::I * (hi - lo) / (2.0 * h)
                    } else {
                        -(hi - 2.0 * mid + lo) / (h * h)
                    }
                })
                .collect()
        }
    }
}

fn trapezoid_moment(samples: &[C64], m: u32, kind: Derivative) -> f64 {
    let d = apply_derivative(samples, m, kind);
    let n = samples.len() as f64;
    neumaier_sum(samples.iter().zip(&d).map(|(r, dr)| (r.conj() * dr).re)) / n
}

/// `Σ_n n^m p_n = (1/2π) ∫ conj(r(ξ)) (-i ∂_ξ)^m r(ξ) dξ`, where `r` is the
/// boundary amplitude of the stationary state at `z = e^{-iξ}`.
///
/// The integral is evaluated on `grid` and `2 grid` points; the finer value is
/// returned with their difference as the error bound.
pub fn moment_via_quadrature(
    coin: &Coin,
    sites: usize,
    side: ExitSide,
    m: u32,
    grid: usize,
    opts: QuadratureOptions,
) -> Result<MomentEstimate> {
    if m > 2 {
        return Err(Error::UnsupportedMoment(m));
    }
    if grid < 64 || !grid.is_power_of_two() {
        return Err(Error::InvalidGrid(grid));
    }
    coin.require_transmitting()?;
    let op = TruncatedOperator::new(*coin, sites)?;
    let fine = sample_amplitudes(&op, side, 2 * grid)?;
    // the coarse grid is every other fine point
    let coarse: Vec<C64> = fine.iter().step_by(2).copied().collect();
    let v_coarse = trapezoid_moment(&coarse, m, opts.derivative);
    let v_fine = trapezoid_moment(&fine, m, opts.derivative);
    let diff = (v_fine - v_coarse).abs();
    if diff > opts.tol {
        return Err(Error::GridTooCoarse {
            coarse: v_coarse,
            fine: v_fine,
            tolerance: opts.tol,
        });
    }
    Ok(MomentEstimate {
        value: v_fine,
        error_bound: diff,
    })
}

/// Largest of `|Σ_{n<=N} g_n z^{-n} - reflected|` and the same for the right exit,
/// where `g_n` are the hitting amplitudes.
///
/// Requires `‖ψ_N‖² <= 1e-10` so that the truncated series has converged.
pub fn generating_function_check(
    coin: &Coin,
    sites: usize,
    freq: &Frequency,
    horizon: usize,
) -> Result<f64> {
    const TAIL_LIMIT: f64 = 1e-10;
    let dist = hitting_distribution(coin, sites, horizon)?;
    if dist.tail_bound > TAIL_LIMIT {
        return Err(Error::TailTooHeavy {
            bound: dist.tail_bound,
            requested: TAIL_LIMIT,
        });
    }
    let state = solve_stationary_linear(coin, sites, freq)?;
    let series = |amps: &[C64]| -> C64 {
        amps.iter()
            .enumerate()
            .map(|(n, g)| g * C64::from_polar(1.0, n as f64 * freq.xi))
            .sum()
    };
    let left = (series(&dist.left_amplitudes) - state.reflected).norm();
    let right = (series(&dist.right_amplitudes) - state.transmitted).norm();
    Ok(left.max(right))
}

/// Dense `(z - E_M)⁻¹ δ_(0;R)`; a reference for small blocks.
pub fn dense_stationary(coin: &Coin, sites: usize, z: C64) -> Result<StationaryState> {
    let op = TruncatedOperator::new(*coin, sites)?;
    let a = DMatrix::identity(op.dim(), op.dim()) * z - op.to_dense();
    let x = a
        .lu()
        .solve(&DVector::from_vec(source(op.dim())))
        .ok_or(Error::SingularSystem { column: 0 })?;
    Ok(StationaryState::from_arcs(coin, z, x.as_slice()))
}

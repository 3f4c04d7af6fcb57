//! Transfer-matrix recursion and the closed-form stationary state.
//!
//! The stationary equation restricted to the block reads
//! `A_z φ(n) + B_z φ(n+1) = 0` for `φ(n) = [φ(n;R), φ(n;L)]ᵀ`, so
//! `φ(n+1) = T φ(n)` with `T = -B_z⁻¹ A_z`.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;

use crate::chebyshev::ZetaTable;
use crate::coin::Coin;
use crate::error::{Error, Result};
use crate::frequency::{Frequency, Regime, RegimeLabel};
use crate::truncated::{SiteAmplitude, StationaryState};

/// Below this `|(T^{M-1})_22|` the boundary condition cannot fix `κ`.
pub const DEGENERATE_BOUNDARY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[C64::ONE, C64::ZERO], [C64::ZERO, C64::ONE]]);

    pub fn new(m00: C64, m01: C64, m10: C64, m11: C64) -> Self {
        Mat2([[m00, m01], [m10, m11]])
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Mat2::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    pub fn det(&self) -> C64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == C64::ZERO {
            return None;
        }
        let m = &self.0;
        Some(Mat2::new(m[1][1], -m[0][1], -m[1][0], m[0][0]).scale(det.inv()))
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + o.scale(C64::new(-1.0, 0.0))
    }
}

/// `(A_z, B_z)` with `A_z = [[0, z], [-d, -c]]` and `B_z = [[-b, -a], [z, 0]]`.
pub fn recursion_blocks(coin: &Coin, z: C64) -> (Mat2, Mat2) {
    let a_z = Mat2::new(C64::ZERO, z, -coin.d, -coin.c);
    let b_z = Mat2::new(-coin.b, -coin.a, z, C64::ZERO);
    (a_z, b_z)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub entries: Mat2,
    pub z: C64,
}

/// `T = (1/(az)) [[Δ|a|², -Δ a b̄], [-Δ ā b, z² + Δ|b|²]]`.
pub fn transfer_matrix(coin: &Coin, freq: &Frequency) -> Result<TransferMatrix> {
    coin.require_transmitting()?;
    let z = freq.z;
    let dl = coin.delta;
    let entries = Mat2::new(
        dl * coin.abs_a * coin.abs_a,
        -dl * coin.a * coin.b.conj(),
        -dl * coin.a.conj() * coin.b,
        z * z + dl * coin.abs_b * coin.abs_b,
    )
    .scale((coin.a * z).inv());
    Ok(TransferMatrix { entries, z })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerBranch {
    /// Single eigenvalue with a nontrivial Jordan block.
    Defective,
    /// Diagonalizable, or a multiple of the identity.
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixPowerResult {
    pub power: Mat2,
    pub branch: PowerBranch,
}

/// `A^n` by the Chebyshev power formula.
///
/// The generic branch uses `ζ_n`, generated by `ζ_{n+1} = tr A ζ_n - det A ζ_{n-1}`,
/// which equals `det^{(n-1)/2} U_{n-1}(tr / (2 det^{1/2}))` for either root
/// and stays valid when `det A = 0`. The defective branch uses
/// `A^n = λ^n I + n λ^{n-1} (A - λ I)`.
pub fn matrix_power(a: &Mat2, n: usize) -> MatrixPowerResult {
    let m = &a.0;
    let (al, be, ga, de) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let scale = a.max_abs();
    let disc = (al - de) * (al - de) + 4.0 * be * ga;
    let lambda = (al + de) * 0.5;
    let scalar = (al - de).norm().max(be.norm()).max(ga.norm()) <= 1e-14 * scale;
    let defective = disc.norm() <= 1e-12 * scale * scale && !scalar && scale > 0.0;
    if n == 0 {
        let branch = if defective {
            PowerBranch::Defective
        } else {
            PowerBranch::Generic
        };
        return MatrixPowerResult {
            power: Mat2::IDENTITY,
            branch,
        };
    }
    if defective {
        let ln1 = lambda.powu(n as u32 - 1);
        let power = Mat2::IDENTITY.scale(ln1 * lambda)
            + (*a - Mat2::IDENTITY.scale(lambda)).scale(ln1 * n as f64);
        return MatrixPowerResult {
            power,
            branch: PowerBranch::Defective,
        };
    }
    let (tr, det) = (a.trace(), a.det());
    let (mut prev, mut cur) = (C64::ZERO, C64::ONE);
    for _ in 1..n {
        let next = tr * cur - det * prev;
        prev = cur;
        cur = next;
    }
    // cur = ζ_n, prev = ζ_{n-1}; ζ_{n+1} = tr ζ_n - det ζ_{n-1}.
    let next = tr * cur - det * prev;
    MatrixPowerResult {
        power: Mat2::new(next - de * cur, be * cur, ga * cur, next - al * cur),
        branch: PowerBranch::Generic,
    }
}

/// `κ = φ(0;L) = -z⁻¹ (T^{M-1})_21 / (T^{M-1})_22`.
pub fn kappa(coin: &Coin, sites: usize, freq: &Frequency) -> Result<C64> {
    if sites == 0 {
        return Err(Error::EmptyBlock);
    }
    let t = transfer_matrix(coin, freq)?;
    let p = matrix_power(&t.entries, sites - 1).power.0;
    if p[1][1].norm() < DEGENERATE_BOUNDARY_TOL {
        return Err(Error::DegenerateBoundary { k: freq.k });
    }
    Ok(-freq.z.inv() * p[1][0] / p[1][1])
}

/// The closed-form stationary state on the block.
///
/// Off `∂B`:
/// `φ(n) = z⁻¹ (αΔ^{-1/2})^{-n} / (ω ζ'_M - |a| ζ'_{M-1}) · [ω ζ'_{M-n} - |a| ζ'_{M-n-1}, ᾱ b ζ'_{M-n-1}]`.
/// On `∂B`, with `λ = ε_R α⁻¹ Δ^{1/2}`:
/// `φ(n) = z⁻¹ λ^n / (ε_R|a| + i ε_I M|b|) · [ε_R|a| + i ε_I |b| (M-n), ε_R ᾱ b (M-n-1)]`.
pub fn stationary_closed_form(
    coin: &Coin,
    sites: usize,
    freq: &Frequency,
    regime: &Regime,
) -> Result<StationaryState> {
    coin.require_transmitting()?;
    if sites == 0 {
        return Err(Error::EmptyBlock);
    }
    let m = sites;
    let z_inv = freq.z.inv();
    let alpha_bar_b = coin.alpha.conj() * coin.b;
    let abs_a = coin.abs_a;
    let mut out = Vec::with_capacity(m);
    if regime.label == RegimeLabel::Boundary {
        let (er, ei) = (regime.eps_r, regime.eps_i);
        let step = coin.sqrt_delta() * coin.alpha.conj() * er;
        let den = C64::new(er * abs_a, ei * m as f64 * coin.abs_b);
        let pre0 = z_inv / den;
        for n in 0..m {
            let pre = pre0 * C64::from_polar(1.0, n as f64 * step.arg());
            let w = (m - n) as f64;
            out.push(SiteAmplitude {
                right: pre * C64::new(er * abs_a, ei * coin.abs_b * w),
                left: pre * alpha_bar_b * er * (w - 1.0),
            });
        }
    } else {
        let zeta = ZetaTable::new(regime.x, m)?;
        let omega = freq.omega;
        let den = omega * zeta.scaled(m) - abs_a * zeta.scaled(m - 1);
        let pre0 = z_inv / den;
        // (αΔ^{-1/2})^{-n} through the principal argument.
        let phase = (coin.alpha / coin.sqrt_delta()).arg();
        for n in 0..m {
            let pre = pre0 * C64::from_polar(1.0, -(n as f64) * phase);
            let lower = zeta.scaled(m - n - 1);
            out.push(SiteAmplitude {
                right: pre * (omega * zeta.scaled(m - n) - abs_a * lower),
                left: pre * alpha_bar_b * lower,
            });
        }
    }
    Ok(StationaryState::from_sites(coin, freq.z, out))
}

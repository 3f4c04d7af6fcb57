//! The truncated evolution `E_M` on the `2M` arcs of the impurity block and
//! the direct solve of `(z I - E_M) φ = δ_(0;R)`.
//!
//! Arc `(x;L)` sits at index `2x`, `(x;R)` at `2x + 1`. A step applies the
//! coin at the source site and moves the `L` part one site left, the `R`
//! part one site right; amplitude leaving `{0, …, M-1}` is dropped.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::banded::BandedMatrix;
use crate::coin::Coin;
use crate::error::{Error, Result};
use crate::frequency::Frequency;

/// Largest block accepted by [`TruncatedOperator::new`].
pub const MAX_SITES: usize = 1 << 22;

/// Largest dimension handed to the dense eigensolver.
pub const DENSE_EIGEN_LIMIT: usize = 2048;

#[inline]
pub fn left_arc(x: usize) -> usize {
    2 * x
}

#[inline]
pub fn right_arc(x: usize) -> usize {
    2 * x + 1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedOperator {
    coin: Coin,
    sites: usize,
}

impl TruncatedOperator {
    pub fn new(coin: Coin, sites: usize) -> Result<Self> {
        if sites == 0 {
            return Err(Error::EmptyBlock);
        }
        if sites > MAX_SITES {
            return Err(Error::SizeOverflow {
                sites,
                limit: MAX_SITES,
            });
        }
        Ok(Self { coin, sites })
    }

    pub fn coin(&self) -> &Coin {
        &self.coin
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        2 * self.sites
    }

    /// `(row, column, value)` for every structurally nonzero entry, row-major.
    pub fn nonzeros(&self) -> Vec<(usize, usize, C64)> {
        let Coin { a, b, c, d, .. } = self.coin;
        let mut out = Vec::with_capacity(4 * self.sites);
        for x in 0..self.sites {
            if x + 1 < self.sites {
                out.push((left_arc(x), left_arc(x + 1), a));
                out.push((left_arc(x), right_arc(x + 1), b));
            }
            if x >= 1 {
                out.push((right_arc(x), left_arc(x - 1), c));
                out.push((right_arc(x), right_arc(x - 1), d));
            }
        }
        out
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        let mut out = vec![C64::ZERO; self.dim()];
        self.apply_into(v, &mut out)?;
        Ok(out)
    }

    /// Matrix-free product `out = E_M v`.
    pub fn apply_into(&self, v: &[C64], out: &mut [C64]) -> Result<()> {
        let n = self.dim();
        for len in [v.len(), out.len()] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: len,
                });
            }
        }
        let Coin { a, b, c, d, .. } = self.coin;
        let m = self.sites;
        for x in 0..m {
            out[left_arc(x)] = if x + 1 < m {
                a * v[left_arc(x + 1)] + b * v[right_arc(x + 1)]
            } else {
                C64::ZERO
            };
            out[right_arc(x)] = if x >= 1 {
                c * v[left_arc(x - 1)] + d * v[right_arc(x - 1)]
            } else {
                C64::ZERO
            };
        }
        Ok(())
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (i, j, v) in self.nonzeros() {
            m[(i, j)] = v;
        }
        m
    }

    /// `z I - E_M` in banded storage (three sub- and three super-diagonals).
    pub fn shifted_banded(&self, z: C64) -> BandedMatrix {
        let mut m = BandedMatrix::zeros(self.dim(), 3, 3);
        for i in 0..self.dim() {
            m.set(i, i, z);
        }
        for (i, j, v) in self.nonzeros() {
            m.set(i, j, -v);
        }
        m
    }

    /// All `2M` eigenvalues from a dense Hessenberg QR iteration.
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        if self.dim() > DENSE_EIGEN_LIMIT {
            return Err(Error::SizeOverflow {
                sites: self.sites,
                limit: DENSE_EIGEN_LIMIT / 2,
            });
        }
        crate::eigen::eigenvalues(self.to_dense())
    }

    /// `max |λ|` over the spectrum: dense eigensolve up to dimension
    /// [`DENSE_EIGEN_LIMIT`], a growth-rate estimate from random starts above.
    pub fn spectral_radius(&self) -> Result<f64> {
        self.coin.require_transmitting()?;
        if self.dim() <= DENSE_EIGEN_LIMIT {
            Ok(self
                .eigenvalues()?
                .iter()
                .map(|l| l.norm())
                .fold(0.0, f64::max))
        } else {
            self.power_estimate(3, 20_000)
        }
    }

    /// Average per-step growth of `‖E^n v‖` over two consecutive windows;
    /// the windows must agree for the estimate to count as converged.
    fn power_estimate(&self, restarts: u64, steps: usize) -> Result<f64> {
        let mut best = 0.0f64;
        for seed in 0..restarts {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut v: Vec<C64> = (0..self.dim())
                .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let mut w = vec![C64::ZERO; self.dim()];
            let mut logs = Vec::with_capacity(steps);
            for _ in 0..steps {
                normalize(&mut v);
                self.apply_into(&v, &mut w)?;
                let g = norm(&w);
                if g == 0.0 {
                    logs.clear();
                    break;
                }
                logs.push(g.ln());
                std::mem::swap(&mut v, &mut w);
            }
            if logs.is_empty() {
                continue;
            }
            let q = logs.len() / 4;
            let mean = |s: &[f64]| (s.iter().sum::<f64>() / s.len() as f64).exp();
            let early = mean(&logs[q..2 * q]);
            let late = mean(&logs[2 * q..]);
            let residual = (early - late).abs();
            if residual > 1e-3 * late.max(1e-300) {
                return Err(Error::ConvergenceFailure { residual });
            }
            best = best.max(late);
        }
        Ok(best)
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [C64]) {
    let n = norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|c| *c /= n);
    }
}

/// Amplitudes on one site, in the transfer-matrix order `[R, L]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteAmplitude {
    pub right: C64,
    pub left: C64,
}

impl SiteAmplitude {
    pub fn norm_sqr(&self) -> f64 {
        self.right.norm_sqr() + self.left.norm_sqr()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryState {
    pub z: C64,
    pub sites: Vec<SiteAmplitude>,
    /// Amplitude leaving through `(-1;L)`: `a φ(0;L) + b φ(0;R)`.
    pub reflected: C64,
    /// Amplitude leaving through `(M;R)`: `c φ(M-1;L) + d φ(M-1;R)`.
    pub transmitted: C64,
}

impl StationaryState {
    pub fn from_sites(coin: &Coin, z: C64, sites: Vec<SiteAmplitude>) -> Self {
        let first = sites[0];
        let last = sites[sites.len() - 1];
        Self {
            z,
            reflected: coin.a * first.left + coin.b * first.right,
            transmitted: coin.c * last.left + coin.d * last.right,
            sites,
        }
    }

    /// Builds a state from an arc vector in `(x;L), (x;R)` order.
    pub fn from_arcs(coin: &Coin, z: C64, arcs: &[C64]) -> Self {
        let sites = arcs
            .chunks_exact(2)
            .map(|p| SiteAmplitude {
                left: p[0],
                right: p[1],
            })
            .collect();
        Self::from_sites(coin, z, sites)
    }

    pub fn to_arcs(&self) -> Vec<C64> {
        self.sites.iter().flat_map(|s| [s.left, s.right]).collect()
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// `κ = φ(0;L)`.
    pub fn kappa(&self) -> C64 {
        self.sites[0].left
    }

    pub fn site_norms(&self) -> Vec<f64> {
        self.sites.iter().map(SiteAmplitude::norm_sqr).collect()
    }

    /// Largest componentwise distance to `other`, boundary amplitudes included.
    pub fn max_deviation(&self, other: &StationaryState) -> f64 {
        if self.len() != other.len() {
            return f64::INFINITY;
        }
        self.sites
            .iter()
            .zip(&other.sites)
            .map(|(p, q)| (p.right - q.right).norm().max((p.left - q.left).norm()))
            .fold(0.0, f64::max)
            .max((self.reflected - other.reflected).norm())
            .max((self.transmitted - other.transmitted).norm())
    }
}

/// The unit source on `(0;R)`.
pub fn source(dim: usize) -> Vec<C64> {
    let mut v = vec![C64::ZERO; dim];
    v[1] = C64::ONE;
    v
}

/// Solves `(z I - E_M) φ = δ_(0;R)` for an arbitrary `z` off the spectrum.
pub fn solve_at_z(op: &TruncatedOperator, z: C64) -> Result<StationaryState> {
    let lu = op.shifted_banded(z).factor()?;
    let mut phi = source(op.dim());
    lu.solve_in_place(&mut phi)?;
    Ok(StationaryState::from_arcs(op.coin(), z, &phi))
}

pub fn solve_stationary_linear(
    coin: &Coin,
    sites: usize,
    freq: &Frequency,
) -> Result<StationaryState> {
    coin.require_transmitting()?;
    let op = TruncatedOperator::new(*coin, sites)?;
    solve_at_z(&op, freq.z)
}

/// `‖(z I - E_M) φ - δ_(0;R)‖₂`.
pub fn residual(op: &TruncatedOperator, state: &StationaryState) -> Result<f64> {
    let phi = state.to_arcs();
    let e_phi = op.apply(&phi)?;
    let rhs = source(op.dim());
    Ok(phi
        .iter()
        .zip(&e_phi)
        .zip(&rhs)
        .map(|((p, e), r)| (state.z * p - e - r).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

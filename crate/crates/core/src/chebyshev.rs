//! Chebyshev polynomials of the second kind at the block's argument
//! `x = cos k / |a|`, stored as `ζ'_m = U_{m-1}(x)`.
//!
//! The plain sequence is produced by the forward three-term recurrence.
//! For `|x| > 1` the values grow like `λ+^m` and overflow once `m θ` nears
//! 700, so [`ScaledZeta`] keeps `log|ζ'_m|` and the sign instead.

use crate::coin::Coin;
use crate::error::{Error, Result};
use crate::frequency::Frequency;

/// Values beyond this magnitude count as overflow.
const OVERFLOW_LIMIT: f64 = 1e300;

#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevCache {
    pub x: f64,
    /// `zeta[m] = U_{m-1}(x)` for `m = 0..=m_max`.
    pub zeta: Vec<f64>,
}

impl ChebyshevCache {
    pub fn new(x: f64, m_max: usize) -> Result<Self> {
        let m_max = m_max.max(1);
        let mut zeta = Vec::with_capacity(m_max + 1);
        zeta.push(0.0);
        zeta.push(1.0);
        for m in 1..m_max {
            let next = 2.0 * x * zeta[m] - zeta[m - 1];
            if !next.is_finite() || next.abs() > OVERFLOW_LIMIT {
                return Err(Error::Overflow { index: m + 1 });
            }
            zeta.push(next);
        }
        Ok(Self { x, zeta })
    }

    #[inline]
    pub fn get(&self, m: usize) -> f64 {
        self.zeta[m]
    }

    pub fn m_max(&self) -> usize {
        self.zeta.len() - 1
    }
}

pub fn chebyshev_zeta(coin: &Coin, k: f64, m_max: usize) -> Result<ChebyshevCache> {
    coin.require_transmitting()?;
    let x = Frequency::from_wavenumber(k, coin).chebyshev_argument(coin);
    ChebyshevCache::new(x, m_max)
}

/// Sign/log-magnitude representation of `ζ'_m` for `|x| >= 1`, where
/// `ζ'_m` has no zeros for `m >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledZeta {
    pub x: f64,
    /// `ln|ζ'_m|`; `-inf` at `m = 0`.
    pub log_abs: Vec<f64>,
    /// `sgn ζ'_m`; zero at `m = 0`.
    pub sign: Vec<f64>,
}

impl ScaledZeta {
    pub fn new(x: f64, m_max: usize) -> Result<Self> {
        if x.abs() < 1.0 {
            return Err(Error::OutOfRange(format!(
                "log-scaled Chebyshev values need |x| >= 1, got {x}"
            )));
        }
        let m_max = m_max.max(1);
        let mut log_abs = Vec::with_capacity(m_max + 1);
        let mut sign = Vec::with_capacity(m_max + 1);
        log_abs.push(f64::NEG_INFINITY);
        sign.push(0.0);
        log_abs.push(0.0);
        sign.push(1.0);
        // ratio r_m = ζ'_m / ζ'_{m-1} obeys r_{m+1} = 2x - 1/r_m and tends to λ+.
        let mut ratio = f64::INFINITY;
        for m in 1..m_max {
            ratio = if m == 1 {
                2.0 * x
            } else {
                2.0 * x - 1.0 / ratio
            };
            log_abs.push(log_abs[m] + ratio.abs().ln());
            sign.push(sign[m] * ratio.signum());
        }
        Ok(Self { x, log_abs, sign })
    }

    /// `ζ'_m / ζ'_n`.
    #[inline]
    pub fn ratio(&self, m: usize, n: usize) -> f64 {
        if self.sign[m] == 0.0 {
            return 0.0;
        }
        self.sign[m] * self.sign[n] * (self.log_abs[m] - self.log_abs[n]).exp()
    }

    /// `ζ'_m` itself; may overflow to infinity.
    pub fn value(&self, m: usize) -> f64 {
        self.sign[m] * self.log_abs[m].exp()
    }
}

/// Both routes to the values used by the closed forms: plain inside the
/// unit interval, log-scaled outside it.
///
/// Every closed form is homogeneous of degree zero in `(ζ', 1)`, so it can be
/// evaluated on `ζ'_m / S` and `1 / S^2` for any scale `S`. Plain tables use
/// `S = 1`; scaled tables use `S = |ζ'_{m_max}|`.
#[derive(Debug, Clone, PartialEq)]
pub enum ZetaTable {
    Plain(ChebyshevCache),
    Scaled(ScaledZeta),
}

impl ZetaTable {
    pub fn new(x: f64, m_max: usize) -> Result<Self> {
        if x.abs() > 1.0 {
            ScaledZeta::new(x, m_max).map(ZetaTable::Scaled)
        } else {
            ChebyshevCache::new(x, m_max).map(ZetaTable::Plain)
        }
    }

    /// `ζ'_m / S`.
    #[inline]
    pub fn scaled(&self, m: usize) -> f64 {
        match self {
            ZetaTable::Plain(c) => c.get(m),
            ZetaTable::Scaled(s) => s.ratio(m, s.log_abs.len() - 1) * s.sign[s.log_abs.len() - 1],
        }
    }

    /// `1 / S^2`.
    pub fn inv_scale_sq(&self) -> f64 {
        match self {
            ZetaTable::Plain(_) => 1.0,
            ZetaTable::Scaled(s) => (-2.0 * s.log_abs[s.log_abs.len() - 1]).exp(),
        }
    }

    pub fn is_scaled(&self) -> bool {
        matches!(self, ZetaTable::Scaled(_))
    }
}

//! The local quantum coin placed on every site of the impurity block.
//!
//! Amplitudes are ordered `[L, R]` when the coin acts on a site:
//! `|L> = [1, 0]`, `|R> = [0, 1]`. Off the block the coin is the identity.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Maximum deviation from unitarity accepted by [`Coin::new`].
pub const UNITARITY_TOL: f64 = 1e-10;

/// A validated 2x2 unitary coin `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coin {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
    /// `ad - bc`.
    pub delta: C64,
    pub abs_a: f64,
    pub abs_b: f64,
    /// `a / |a|`; set to 1 when `a = 0`.
    pub alpha: C64,
    /// `abcd != 0`.
    pub generic: bool,
}

impl Coin {
    /// Validates the entries and derives the cached fields.
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Result<Self> {
        // Columns of a unitary are orthonormal: C^dagger C = I.
        let g00 = a.norm_sqr() + c.norm_sqr() - 1.0;
        let g11 = b.norm_sqr() + d.norm_sqr() - 1.0;
        let g01 = a.conj() * b + c.conj() * d;
        let deviation = g00.abs().max(g11.abs()).max(g01.norm());
        if !deviation.is_finite() || deviation > UNITARITY_TOL {
            return Err(Error::NonUnitary { deviation });
        }
        let abs_a = a.norm();
        let abs_b = b.norm();
        let alpha = if abs_a > 0.0 {
            a / abs_a
        } else {
            C64::new(1.0, 0.0)
        };
        Ok(Self {
            a,
            b,
            c,
            d,
            delta: a * d - b * c,
            abs_a,
            abs_b,
            alpha,
            generic: a != C64::ZERO && b != C64::ZERO && c != C64::ZERO && d != C64::ZERO,
        })
    }

    /// Builds the unitary `[[a, b], [-Δ conj(b), Δ conj(a)]]` with
    /// `a = |a| e^{i phase_a}`, `b = sqrt(1-|a|^2) e^{i phase_b}` and `Δ = e^{i phase_delta}`.
    /// Every element of U(2) has this form.
    pub fn from_params(abs_a: f64, phase_a: f64, phase_b: f64, phase_delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&abs_a) {
            return Err(Error::OutOfRange(format!("|a| = {abs_a} not in [0, 1]")));
        }
        let abs_b = (1.0 - abs_a * abs_a).sqrt();
        let a = C64::from_polar(abs_a, phase_a);
        let b = C64::from_polar(abs_b, phase_b);
        let delta = C64::from_polar(1.0, phase_delta);
        Self::new(a, b, -delta * b.conj(), delta * a.conj())
    }

    pub fn identity() -> Self {
        Self::new(C64::ONE, C64::ZERO, C64::ZERO, C64::ONE).expect("identity is unitary")
    }

    pub fn hadamard() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::new(h, h, h, -h).expect("Hadamard is unitary")
    }

    /// Real rotation `[[cos t, sin t], [-sin t, cos t]]`.
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(
            C64::new(c, 0.0),
            C64::new(s, 0.0),
            C64::new(-s, 0.0),
            C64::new(c, 0.0),
        )
        .expect("rotation is unitary")
    }

    /// Fails with [`Error::ZeroTransmission`] when `a = 0`.
    pub fn require_transmitting(&self) -> Result<()> {
        if self.abs_a == 0.0 {
            Err(Error::ZeroTransmission)
        } else {
            Ok(())
        }
    }

    /// True when `b = 0`: the block is transparent and every closed form reduces to free motion.
    pub fn is_transparent(&self) -> bool {
        self.abs_b == 0.0
    }

    /// Principal square root of `Δ`, argument in `(-π/2, π/2]`.
    pub fn sqrt_delta(&self) -> C64 {
        let mut half = 0.5 * self.delta.arg();
        // arg(Δ) = -π rounds onto the cut; send it to the +π/2 end.
        if half <= -std::f64::consts::FRAC_PI_2 {
            half += std::f64::consts::PI;
        }
        C64::from_polar(self.delta.norm().sqrt(), half)
    }

    pub fn entries(&self) -> [[C64; 2]; 2] {
        [[self.a, self.b], [self.c, self.d]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn identity_fields() {
        let c = Coin::identity();
        assert_eq!(c.delta, C64::ONE);
        assert_eq!(c.abs_a, 1.0);
        assert_eq!(c.abs_b, 0.0);
        assert!(!c.generic);
    }

    #[test]
    fn hadamard_fields() {
        let c = Coin::hadamard();
        assert!((c.delta - C64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((c.abs_a - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((c.abs_b - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(c.generic);
        assert!((c.sqrt_delta() - C64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn wrong_signs_rejected() {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        match Coin::new(h, h, h, h) {
            Err(Error::NonUnitary { deviation }) => assert!(deviation > 0.5),
            other => panic!("expected NonUnitary, got {other:?}"),
        }
    }

    #[test]
    fn zero_transmission_flagged() {
        let c = Coin::new(C64::ZERO, C64::ONE, C64::ONE, C64::ZERO).unwrap();
        assert_eq!(c.require_transmitting(), Err(Error::ZeroTransmission));
    }

    #[test]
    fn sqrt_delta_is_principal() {
        for i in 0..64 {
            let phase = -std::f64::consts::PI + i as f64 * 0.1;
            let c = Coin::from_params(0.6, 0.3, -1.1, phase).unwrap();
            let s = c.sqrt_delta();
            assert!((s * s - c.delta).norm() < 1e-14);
            let arg = s.arg();
            assert!(
                arg > -std::f64::consts::FRAC_PI_2 && arg <= std::f64::consts::FRAC_PI_2 + 1e-15
            );
        }
    }

    #[test]
    fn parametrized_coins_are_unitary() {
        let c = Coin::from_params(0.3, 1.0, 2.0, 3.0).unwrap();
        assert!((c.abs_a.powi(2) + c.abs_b.powi(2) - 1.0).abs() < 1e-12);
        assert!((c.abs_a.powi(2) + c.c.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((c.delta.norm() - 1.0).abs() < 1e-12);
    }
}

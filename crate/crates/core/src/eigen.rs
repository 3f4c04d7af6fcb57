//! Eigenvalues of a dense complex matrix by Hessenberg reduction followed by
//! single-shift QR sweeps with Givens rotations and Wilkinson shifts.

use nalgebra::linalg::Hessenberg;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Sweeps allowed per eigenvalue before giving up.
const SWEEPS_PER_EIGENVALUE: usize = 60;

/// Eigenvalue of `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = (a - d) * 0.5;
    let root = (half * half + b * c).sqrt();
    let (p, q) = (half + root, half - root);
    let den = if p.norm() >= q.norm() { p } else { q };
    if den == C64::ZERO {
        d
    } else {
        d - b * c / den
    }
}

pub fn eigenvalues(m: DMatrix<C64>) -> Result<Vec<C64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = m.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(vec![C64::ZERO; n]);
    }
    let mut h = if n > 2 {
        Hessenberg::new(m).unpack_h()
    } else {
        m
    };
    let mut out = vec![C64::ZERO; n];
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    loop {
        if hi == 0 {
            out[0] = h[(0, 0)];
            break;
        }
        // find the start of the unreduced block ending at `hi`
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if sub <= f64::EPSILON * diag.max(f64::EPSILON * scale) {
                h[(lo, lo - 1)] = C64::ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            out[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > SWEEPS_PER_EIGENVALUE * n {
            return Err(Error::ConvergenceFailure {
                residual: h[(hi, hi - 1)].norm(),
            });
        }
        let mu = if iter % 11 == 10 {
            // exceptional shift to break symmetric stalls
            h[(hi, hi)] + C64::new(h[(hi, hi - 1)].norm(), 0.0) * 0.75
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };
        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        let mut rotations = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (x, y) = (h[(k, k)], h[(k + 1, k)]);
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (c, s) = if r == 0.0 {
                (C64::ONE, C64::ZERO)
            } else {
                (x / r, y / r)
            };
            for j in k..=hi {
                let (p, q) = (h[(k, j)], h[(k + 1, j)]);
                h[(k, j)] = c.conj() * p + s.conj() * q;
                h[(k + 1, j)] = -s * p + c * q;
            }
            rotations.push((c, s));
        }
        for (idx, &(c, s)) in rotations.iter().enumerate() {
            let k = lo + idx;
            for i in lo..=(k + 1).min(hi) {
                let (p, q) = (h[(i, k)], h[(i, k + 1)]);
                h[(i, k)] = p * c + q * s;
                h[(i, k + 1)] = -p * s.conj() + q * c.conj();
            }
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sorted(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap()
                .then(a.im.partial_cmp(&b.im).unwrap())
        });
        v
    }

    #[test]
    fn triangular_spectrum() {
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[
                C64::new(1.0, 1.0),
                C64::new(2.0, 0.0),
                C64::new(0.0, 3.0),
                C64::ZERO,
                C64::new(-2.0, 0.0),
                C64::ONE,
                C64::ZERO,
                C64::ZERO,
                C64::new(0.5, -0.5),
            ],
        );
        let got = sorted(eigenvalues(m).unwrap());
        let want = sorted(vec![
            C64::new(1.0, 1.0),
            C64::new(-2.0, 0.0),
            C64::new(0.5, -0.5),
        ]);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() < 1e-12);
        }
    }

    #[test]
    fn rotation_has_unit_spectrum() {
        let (s, c) = 0.7f64.sin_cos();
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(c, 0.0),
                C64::new(-s, 0.0),
                C64::new(s, 0.0),
                C64::new(c, 0.0),
            ],
        );
        for l in eigenvalues(m).unwrap() {
            assert!((l.norm() - 1.0).abs() < 1e-14);
            assert!((l.re - c).abs() < 1e-14);
        }
    }

    #[test]
    fn trace_and_determinant_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [4usize, 9, 30] {
            let m = DMatrix::from_fn(n, n, |_, _| {
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let ev = eigenvalues(m.clone()).unwrap();
            let tr: C64 = ev.iter().sum();
            assert!((tr - m.trace()).norm() < 1e-10);
            let det: C64 = ev.iter().product();
            assert!((det - m.clone().determinant()).norm() < 1e-8 * det.norm().max(1.0));
            for l in &ev {
                let shifted = &m - DMatrix::identity(n, n) * *l;
                let smin = shifted.singular_values().min();
                assert!(smin < 1e-9, "n={n} sigma_min={smin}");
            }
        }
    }

    #[test]
    fn zero_matrix() {
        assert_eq!(
            eigenvalues(DMatrix::zeros(3, 3)).unwrap(),
            vec![C64::ZERO; 3]
        );
    }
}

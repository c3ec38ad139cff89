//! Entropy kernels. Everything is in bits.

use nalgebra::{Complex, DMatrix};

use crate::{Error, Result};

/// Entropy in bits.
pub type Bits = f64;

/// Inputs this far outside the probability simplex are clamped onto it.
pub const PROBABILITY_CLAMP: f64 = 1e-12;
/// Eigenvalues above `-EIGENVALUE_CLAMP` are treated as zero.
pub const EIGENVALUE_CLAMP: f64 = 1e-10;
/// Largest Hilbert-space dimension accepted by [`von_neumann_entropy`].
pub const MAX_DIM: usize = 16;

#[inline]
fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// `h(p) = -p log p - (1 - p) log(1 - p)`.
pub fn binary_entropy(p: f64) -> Result<Bits> {
    if !(p >= -PROBABILITY_CLAMP && p <= 1.0 + PROBABILITY_CLAMP) {
        return Err(Error::OutOfRange {
            what: "p",
            value: p,
            range: "[0, 1]",
        });
    }
    let p = p.clamp(0.0, 1.0);
    Ok(plogp(p) + plogp(1.0 - p))
}

/// `h((1 + x) / 2)` for a Bloch component `x ∈ [-1, 1]`; even in `x`.
///
/// Rate formulas call this on values that are contractions by construction,
/// so out-of-range inputs are clamped rather than rejected.
#[inline]
pub(crate) fn h_bloch(x: f64) -> Bits {
    debug_assert!(x.abs() <= 1.0 + 1e-9, "Bloch component {x} out of range");
    let x = x.clamp(-1.0, 1.0);
    plogp((1.0 + x) / 2.0) + plogp((1.0 - x) / 2.0)
}

/// Shannon entropy `-Σ q log q`.
pub fn shannon_entropy(q: &[f64]) -> Result<Bits> {
    let sum: f64 = q.iter().sum();
    let min = q.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min >= -PROBABILITY_CLAMP) || !((sum - 1.0).abs() <= 1e-9) {
        return Err(Error::NotNormalized { sum, min });
    }
    Ok(q.iter().map(|&p| plogp(p)).sum())
}

/// Shannon entropy with negatives clamped to zero and no normalization check.
#[inline]
pub(crate) fn shannon_unchecked(q: &[f64]) -> Bits {
    q.iter().map(|&p| plogp(p)).sum()
}

/// Entropy of a spectrum, clamping small negative eigenvalues.
pub(crate) fn spectrum_entropy(eigenvalues: &[f64]) -> Result<Bits> {
    let mut total = 0.0;
    for &l in eigenvalues {
        if l < -EIGENVALUE_CLAMP {
            return Err(Error::NotDensityMatrix(format!("negative eigenvalue {l}")));
        }
        total += plogp(l);
    }
    Ok(total)
}

/// Hermitian eigenvalues of a small complex matrix.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<Complex<f64>>) -> Vec<f64> {
    m.clone().symmetric_eigenvalues().iter().copied().collect()
}

/// Von Neumann entropy `-Tr ρ log ρ` of a density matrix of dimension at
/// most [`MAX_DIM`].
pub fn von_neumann_entropy(rho: &DMatrix<Complex<f64>>) -> Result<Bits> {
    let n = rho.nrows();
    if n != rho.ncols() || n == 0 || n > MAX_DIM {
        return Err(Error::NotDensityMatrix(format!(
            "shape {}x{} not supported",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let asym = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if asym > 1e-10 {
        return Err(Error::NotDensityMatrix(format!("not Hermitian ({asym:e})")));
    }
    let trace = rho.trace();
    if (trace.re - 1.0).abs() > 1e-9 || trace.im.abs() > 1e-9 {
        return Err(Error::NotDensityMatrix(format!("trace {trace}")));
    }
    spectrum_entropy(&hermitian_eigenvalues(rho))
}

/// `h((1 + √x) / 2)`, concave on `[0, 1]`.
pub fn h_sqrt(x: f64) -> Result<Bits> {
    if !(x >= -PROBABILITY_CLAMP && x <= 1.0 + PROBABILITY_CLAMP) {
        return Err(Error::OutOfRange {
            what: "x",
            value: x,
            range: "[0, 1]",
        });
    }
    Ok(h_bloch(x.clamp(0.0, 1.0).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Reference values evaluated at 40 digits with mpmath.
    const H_011: f64 = 0.499_915_958_164_527_995_640_499_6;
    const H_DEPOL: f64 = 0.503_183_731_680_583_799_651_850_6;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.11).unwrap() - H_011).abs() < 1e-15);
        assert_eq!(binary_entropy(-5e-13).unwrap(), 0.0);
        assert!(matches!(binary_entropy(1.1), Err(Error::OutOfRange { .. })));
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn shannon_values() {
        assert_eq!(shannon_entropy(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(shannon_entropy(&[0.25; 4]).unwrap(), 2.0);
        let h = shannon_entropy(&[0.925, 0.025, 0.025, 0.025]).unwrap();
        assert!((h - H_DEPOL).abs() < 1e-15);
        assert!(matches!(
            shannon_entropy(&[0.5, 0.6]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(shannon_entropy(&[1.1, -0.1]).is_err());
    }

    #[test]
    fn von_neumann_basic_states() {
        let mixed = DMatrix::from_diagonal_element(4, 4, c(0.25));
        assert!((von_neumann_entropy(&mixed).unwrap() - 2.0).abs() < 1e-12);

        let psi = [c(0.5), Complex::new(0.0, 0.5), c(-0.5), Complex::new(0.0, -0.5)];
        let pure = DMatrix::from_fn(4, 4, |i, j| psi[i] * psi[j].conj());
        assert!(von_neumann_entropy(&pure).unwrap().abs() < 1e-10);

        let not_hermitian = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.1), c(0.0), c(0.5)]);
        assert!(von_neumann_entropy(&not_hermitian).is_err());
        let bad_trace = DMatrix::from_diagonal_element(2, 2, c(0.7));
        assert!(von_neumann_entropy(&bad_trace).is_err());
        let too_big = DMatrix::from_diagonal_element(17, 17, c(1.0 / 17.0));
        assert!(von_neumann_entropy(&too_big).is_err());
    }

    #[test]
    fn von_neumann_rotated_spectrum_matches_shannon() {
        // U·diag(q)·U† for a fixed unitary U.
        let q = [0.6, 0.25, 0.1, 0.05];
        let s = 0.5f64.sqrt();
        let u = DMatrix::from_row_slice(
            4,
            4,
            &[
                c(s), c(0.0), c(0.0), c(s),
                c(0.0), c(s), Complex::new(0.0, s), c(0.0),
                c(0.0), c(s), Complex::new(0.0, -s), c(0.0),
                c(s), c(0.0), c(0.0), c(-s),
            ],
        );
        let d = DMatrix::from_fn(4, 4, |i, j| if i == j { c(q[i]) } else { c(0.0) });
        let rho = &u * d * u.adjoint();
        let vn = von_neumann_entropy(&rho).unwrap();
        assert!((vn - shannon_entropy(&q).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn h_sqrt_endpoints() {
        assert_eq!(h_sqrt(0.0).unwrap(), 1.0);
        assert_eq!(h_sqrt(1.0).unwrap(), 0.0);
        assert!(h_sqrt(-0.5).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn h_sqrt_midpoint_concave(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let mid = h_sqrt((a + b) / 2.0).unwrap();
            let avg = (h_sqrt(a).unwrap() + h_sqrt(b).unwrap()) / 2.0;
            prop_assert!(mid >= avg - 1e-12);
        }

        #[test]
        fn binary_entropy_symmetric(p in 0.0f64..=1.0) {
            let d = binary_entropy(p).unwrap() - binary_entropy(1.0 - p).unwrap();
            prop_assert!(d.abs() < 1e-14);
            prop_assert!((h_bloch(2.0 * p - 1.0) - h_bloch(1.0 - 2.0 * p)).abs() < 1e-15);
        }
    }
}

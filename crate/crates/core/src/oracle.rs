//! Brute-force reference computations on the Choi state.
//!
//! [`rate_from_choi`] evaluates `H(X|E) - H(X|Y)` for a z-basis key directly
//! from a purification of the Choi state, with no use of Stokes parameters or
//! closed forms.

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::channel::{bell_basis, kron2, paulis, ChoiMatrix, CMat4};
use crate::entropy::{hermitian_eigenvalues, spectrum_entropy, shannon_entropy, EIGENVALUE_CLAMP};
use crate::{Error, Result};

type C64 = Complex<f64>;

/// A pure state on `A ⊗ B ⊗ E` with `dim E = 4`; amplitude index `a·8 + b·4 + e`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState16(pub [C64; 16]);

impl PureState16 {
    pub fn amplitude(&self, a: usize, b: usize, e: usize) -> C64 {
        self.0[a * 8 + b * 4 + e]
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `Tr_E |Ψ⟩⟨Ψ|`.
    pub fn reduced_ab(&self) -> CMat4 {
        CMat4::from_fn(|i, j| {
            (0..4)
                .map(|e| self.0[i * 4 + e] * self.0[j * 4 + e].conj())
                .sum()
        })
    }

    /// Unnormalized state of `E` given that A is found in `|x⟩`.
    fn eve_given(&self, x: usize) -> DMatrix<C64> {
        DMatrix::from_fn(4, 4, |e, f| {
            (0..2)
                .map(|b| self.amplitude(x, b, e) * self.amplitude(x, b, f).conj())
                .sum()
        })
    }
}

/// Purifies `ρ_AB = Σ_k λ_k |v_k⟩⟨v_k|` as `Σ_k √λ_k |v_k⟩|k⟩_E`.
///
/// Eigenvectors are sorted by descending eigenvalue and each is rescaled so
/// its largest-magnitude entry is real and positive, which makes the result
/// deterministic up to degenerate eigenspaces.
pub fn purify_choi(choi: &ChoiMatrix) -> Result<PureState16> {
    let rho = choi.to_dmatrix();
    let asym = choi.hermiticity_error();
    if asym > 1e-10 {
        return Err(Error::NotDensityMatrix(format!("not Hermitian ({asym:e})")));
    }
    let trace = choi.trace();
    if (trace.re - 1.0).abs() > 1e-9 || trace.im.abs() > 1e-9 {
        return Err(Error::NotDensityMatrix(format!("trace {trace}")));
    }
    let eig = SymmetricEigen::new(rho);
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut psi = [C64::new(0.0, 0.0); 16];
    for (k, &i) in order.iter().enumerate() {
        let lambda = eig.eigenvalues[i];
        if lambda < -EIGENVALUE_CLAMP {
            return Err(Error::NotPositive { value: lambda });
        }
        let v = eig.eigenvectors.column(i);
        let mut pivot = 0;
        for r in 1..4 {
            if v[r].norm() > v[pivot].norm() {
                pivot = r;
            }
        }
        let phase = if v[pivot].norm() > 0.0 {
            v[pivot].conj() / v[pivot].norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let w = lambda.max(0.0).sqrt();
        for ab in 0..4 {
            psi[ab * 4 + k] = v[ab] * phase * w;
        }
    }
    Ok(PureState16(psi))
}

/// Classical-quantum state `Σ_x |x⟩⟨x| ⊗ ρ_E^x` with unnormalized blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct CqState {
    pub blocks: [DMatrix<C64>; 2],
}

impl CqState {
    /// Alice measures her qubit of `psi` in the z basis.
    pub fn from_pure(psi: &PureState16) -> Self {
        Self {
            blocks: [psi.eve_given(0), psi.eve_given(1)],
        }
    }

    pub fn probabilities(&self) -> [f64; 2] {
        [self.blocks[0].trace().re, self.blocks[1].trace().re]
    }

    /// `H(X|E) = H(XE) - H(E)`.
    pub fn conditional_entropy(&self) -> Result<f64> {
        let mut joint = hermitian_eigenvalues(&self.blocks[0]);
        joint.extend(hermitian_eigenvalues(&self.blocks[1]));
        let h_xe = spectrum_entropy(&joint)?;
        let h_e = spectrum_entropy(&hermitian_eigenvalues(&(&self.blocks[0] + &self.blocks[1])))?;
        Ok(h_xe - h_e)
    }
}

/// Joint distribution of z-basis outcomes of A and B, `P[x][y] = ⟨xy|ρ|xy⟩`.
pub fn z_statistics(choi: &ChoiMatrix) -> [[f64; 2]; 2] {
    let m = choi.matrix();
    [[m[(0, 0)].re, m[(1, 1)].re], [m[(2, 2)].re, m[(3, 3)].re]]
}

/// `H(X|E) - H(X|Y)` for a key read from Alice's z basis, with Eve holding the
/// purification of the Choi state.
pub fn rate_from_choi(choi: &ChoiMatrix) -> Result<f64> {
    let psi = purify_choi(choi)?;
    let h_xe = CqState::from_pure(&psi).conditional_entropy()?;
    let p = z_statistics(choi);
    let h_xy = shannon_entropy(&[p[0][0], p[0][1], p[1][0], p[1][1]])?;
    let h_y = shannon_entropy(&[p[0][0] + p[1][0], p[0][1] + p[1][1]])?;
    Ok(h_xe - (h_xy - h_y))
}

/// Pauli twirl `¼ Σ_a (σ̄_a ⊗ σ_a) ρ (σ̄_a ⊗ σ_a)†`, which removes every
/// Bell-basis coherence and keeps the Bell weights.
pub fn twirl(choi: &ChoiMatrix) -> ChoiMatrix {
    let p = paulis();
    let mut out = CMat4::zeros();
    for s in &p {
        let u = kron2(&s.map(|z| z.conj()), s);
        out += u * choi.matrix() * u.adjoint();
    }
    ChoiMatrix::from_matrix(out * C64::new(0.25, 0.0))
}

/// Bell-diagonal state with the given weights `(q_i, q_z, q_x, q_y)`.
pub fn bell_diagonal(q: [f64; 4]) -> ChoiMatrix {
    let b = bell_basis();
    let d = CMat4::from_diagonal(&nalgebra::Vector4::from(q.map(|x| C64::new(x, 0.0))));
    ChoiMatrix::from_matrix(b * d * b.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{choi_from_stokes, family, random_unital, Family, QubitChannel};
    use crate::entropy::binary_entropy;
    use crate::linalg::{Mat3, Vec3};
    use crate::rates::{six_state_accurate_rate, six_state_conventional_core, UnitalChannel};

    const DEPOL_09_F: f64 = 0.496_816_268_319_416_200_348_149_4;

    #[test]
    fn purification_reproduces_state() {
        for seed in 0..100 {
            let choi = choi_from_stokes(&random_unital(seed));
            let psi = purify_choi(&choi).unwrap();
            assert!((psi.norm() - 1.0).abs() <= 1e-12);
            let back = psi.reduced_ab();
            assert!((back - choi.matrix()).iter().all(|z| z.norm() <= 1e-12));
        }
    }

    #[test]
    fn purification_is_deterministic() {
        let choi = choi_from_stokes(&random_unital(3));
        assert_eq!(purify_choi(&choi).unwrap(), purify_choi(&choi).unwrap());
    }

    #[test]
    fn identity_and_depolarizing_rates() {
        let id = choi_from_stokes(&QubitChannel::identity());
        assert!((rate_from_choi(&id).unwrap() - 1.0).abs() <= 1e-10);
        let dep = choi_from_stokes(&family(&Family::Depolarizing { qber: 0.05 }).unwrap());
        assert!((rate_from_choi(&dep).unwrap() - DEPOL_09_F).abs() <= 1e-10);
        let full = choi_from_stokes(&QubitChannel::unital(Mat3::zeros()).unwrap());
        assert!((rate_from_choi(&full).unwrap() + 1.0).abs() <= 1e-10);
    }

    #[test]
    fn measure_and_prepare_channel_has_no_key() {
        // Z-basis measure-and-resend: Eve knows X exactly.
        let ch = QubitChannel::unital(Mat3::from_diagonal(&Vec3::new(1.0, 0.0, 0.0))).unwrap();
        assert!(rate_from_choi(&choi_from_stokes(&ch)).unwrap().abs() <= 1e-10);
    }

    #[test]
    fn bit_flip_rate() {
        // Only σ_x errors: bit errors at rate p, no phase errors, so Eve learns nothing.
        let p = 0.1;
        let ch = family(&Family::BitFlip { p }).unwrap();
        let rate = rate_from_choi(&choi_from_stokes(&ch)).unwrap();
        let expected = 1.0 - binary_entropy(p).unwrap();
        assert!((rate - expected).abs() <= 1e-10, "{rate} vs {expected}");
    }

    #[test]
    fn oracle_agrees_with_closed_form() {
        for seed in 0..50 {
            let ch = random_unital(seed);
            let u = UnitalChannel::new(ch).unwrap();
            let oracle = rate_from_choi(&choi_from_stokes(&ch)).unwrap();
            let closed = six_state_accurate_rate(&u).unwrap();
            assert!((oracle - closed).abs() <= 1e-8, "{seed}: {oracle} vs {closed}");
        }
    }

    #[test]
    fn twirled_oracle_is_conventional_rate() {
        for seed in 0..50 {
            let ch = random_unital(seed);
            let t = twirl(&choi_from_stokes(&ch));
            let oracle = rate_from_choi(&t).unwrap();
            let conv = six_state_conventional_core(&ch.gamma()).unwrap();
            assert!((oracle - conv).abs() <= 1e-8);
        }
    }

    #[test]
    fn twirl_properties() {
        for seed in 0..100 {
            let choi = choi_from_stokes(&random_unital(seed));
            let t = twirl(&choi);
            assert!(t.bell_off_diagonal() <= 1e-12);
            let again = twirl(&t);
            assert!((again.matrix() - t.matrix()).iter().all(|z| z.norm() <= 1e-12));
            let (w0, w1) = (choi.bell_weights().as_array(), t.bell_weights().as_array());
            for k in 0..4 {
                assert!((w0[k] - w1[k]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn bell_diagonal_matches_pauli_channel() {
        let e = Vec3::new(0.8, 0.7, 0.6);
        let q = crate::channel::PauliDistribution::from_diagonal(&e).as_array();
        let direct = bell_diagonal(q);
        let via = choi_from_stokes(&QubitChannel::unital(Mat3::from_diagonal(&e)).unwrap());
        assert!((direct.matrix() - via.matrix()).iter().all(|z| z.norm() <= 1e-12));
    }

    #[test]
    fn rejects_invalid_states() {
        let bad = choi_from_stokes(&QubitChannel::unital(Mat3::from_diagonal(&Vec3::new(-0.9, 0.8, 0.7))).unwrap());
        assert!(matches!(rate_from_choi(&bad), Err(Error::NotPositive { .. })));
        let scaled = ChoiMatrix::from_matrix(bad.matrix() * C64::new(2.0, 0.0));
        assert!(matches!(rate_from_choi(&scaled), Err(Error::NotDensityMatrix(_))));
    }
}

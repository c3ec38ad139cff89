//! Fixed-size real linear algebra for the Bloch-sphere picture.
//!
//! All 3-vectors and 3×3 matrices are indexed in `(z, x, y)` order, which is
//! a right-handed cyclic relabeling of `(x, y, z)`: `ẑ × x̂ = ŷ`, `x̂ × ŷ = ẑ`.
//! Plane quantities (2-vectors, 2×2 matrices) are indexed `(z, x)`.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::{Error, Result};

pub type Mat3 = Matrix3<f64>;
pub type Vec3 = Vector3<f64>;
pub type Mat2 = Matrix2<f64>;
pub type Vec2 = Vector2<f64>;

/// Entrywise tolerance for orthogonality and unit determinant.
pub const ROTATION_TOL: f64 = 1e-12;

/// Largest entrywise deviation of `M·Mᵀ` from the identity.
pub fn orthogonality_error3(m: &Mat3) -> f64 {
    (m * m.transpose() - Mat3::identity()).amax()
}

pub fn orthogonality_error2(m: &Mat2) -> f64 {
    (m * m.transpose() - Mat2::identity()).amax()
}

/// A proper rotation of the Bloch sphere, an element of SO(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation3(Mat3);

impl Rotation3 {
    pub fn identity() -> Self {
        Self(Mat3::identity())
    }

    /// Checks `M·Mᵀ = I` and `det M = +1` to [`ROTATION_TOL`].
    pub fn from_matrix(m: Mat3) -> Result<Self> {
        let orthogonality = orthogonality_error3(&m);
        let det = m.determinant();
        if orthogonality > ROTATION_TOL || (det - 1.0).abs() > ROTATION_TOL {
            return Err(Error::NotRotation { orthogonality, det });
        }
        Ok(Self(m))
    }

    pub(crate) fn from_matrix_unchecked(m: Mat3) -> Self {
        Self(m)
    }

    /// Builds the rotation whose rows are `r1`, `r2` and `r1 × r2`.
    /// The two rows must be orthonormal.
    pub(crate) fn from_two_rows(r1: &Vec3, r2: &Vec3) -> Self {
        let r3 = r1.cross(r2);
        Self(Mat3::from_rows(&[
            r1.transpose(),
            r2.transpose(),
            r3.transpose(),
        ]))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.transpose())
    }

    /// Matrix product `self · other`.
    pub fn then(&self, other: &Rotation3) -> Self {
        Self(self.0 * other.0)
    }

    /// Rotation by `theta` about the z axis (first coordinate).
    pub fn about_z(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self(Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c))
    }

    /// Rotation by `theta` about the x axis (second coordinate).
    pub fn about_x(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self(Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c))
    }

    /// Rotation by `theta` about the y axis (third coordinate).
    pub fn about_y(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self(Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
    }

    /// Rotation for the unit quaternion `w + a·ẑ + b·x̂ + c·ŷ`. The input is
    /// normalized first; it must not be zero.
    pub fn from_quaternion(w: f64, a: f64, b: f64, c: f64) -> Self {
        let n = (w * w + a * a + b * b + c * c).sqrt();
        let (w, a, b, c) = (w / n, a / n, b / n, c / n);
        Self(Mat3::new(
            1.0 - 2.0 * (b * b + c * c),
            2.0 * (a * b - w * c),
            2.0 * (a * c + w * b),
            2.0 * (a * b + w * c),
            1.0 - 2.0 * (a * a + c * c),
            2.0 * (b * c - w * a),
            2.0 * (a * c - w * b),
            2.0 * (b * c + w * a),
            1.0 - 2.0 * (a * a + b * b),
        ))
    }

    /// Exponential map: rotation by `|omega|` about the axis `omega / |omega|`.
    pub fn from_rotation_vector(omega: &Vec3) -> Self {
        let theta2 = omega.norm_squared();
        let k = omega.cross_matrix();
        // sin(θ)/θ and (1 - cos θ)/θ², with series near zero.
        let (a, b) = if theta2 < 1e-8 {
            (1.0 - theta2 / 6.0, 0.5 - theta2 / 24.0)
        } else {
            let theta = theta2.sqrt();
            (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
        };
        Self(Mat3::identity() + k * a + k * k * b)
    }

    /// Embeds a plane rotation acting on `(z, x)`, leaving `y` fixed.
    pub fn embed_zx(q: &Rotation2) -> Self {
        let m = q.matrix();
        Self(Mat3::new(
            m[(0, 0)],
            m[(0, 1)],
            0.0,
            m[(1, 0)],
            m[(1, 1)],
            0.0,
            0.0,
            0.0,
            1.0,
        ))
    }

    /// Whether the y basis vector is fixed, i.e. this is a z-x plane rotation.
    pub fn fixes_y(&self, tol: f64) -> bool {
        let m = &self.0;
        (m[(2, 2)] - 1.0).abs() <= tol
            && m[(0, 2)].abs() <= tol
            && m[(1, 2)].abs() <= tol
            && m[(2, 0)].abs() <= tol
            && m[(2, 1)].abs() <= tol
    }
}

/// A proper rotation of the z-x plane, an element of SO(2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation2(Mat2);

impl Rotation2 {
    pub fn identity() -> Self {
        Self(Mat2::identity())
    }

    pub fn from_matrix(m: Mat2) -> Result<Self> {
        let orthogonality = orthogonality_error2(&m);
        let det = m.determinant();
        if orthogonality > ROTATION_TOL || (det - 1.0).abs() > ROTATION_TOL {
            return Err(Error::NotRotation { orthogonality, det });
        }
        Ok(Self(m))
    }

    /// `[[cos θ, -sin θ], [sin θ, cos θ]]`.
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self(Mat2::new(c, -s, s, c))
    }

    /// The rotation whose first row is the unit vector `(a, b)`.
    pub(crate) fn with_first_row(a: f64, b: f64) -> Self {
        Self(Mat2::new(a, b, -b, a))
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn angle(&self) -> f64 {
        self.0[(1, 0)].atan2(self.0[(0, 0)])
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn then(&self, other: &Rotation2) -> Self {
        Self(self.0 * other.0)
    }
}

/// `M = B · diag(e) · A` with `A`, `B` proper rotations and `e` possibly
/// carrying negative entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedSvd3 {
    pub b: Rotation3,
    pub e: Vec3,
    pub a: Rotation3,
}

impl SignedSvd3 {
    pub fn reconstruct(&self) -> Mat3 {
        self.b.matrix() * Mat3::from_diagonal(&self.e) * self.a.matrix()
    }

    /// `diag(e) · A`; its columns are the vectors `Ã_z`, `Ã_x`, `Ã_y`.
    pub fn scaled_a(&self) -> Mat3 {
        Mat3::from_diagonal(&self.e) * self.a.matrix()
    }

    /// Equivalent factorization with `|e_z| ≥ |e_x| ≥ |e_y|`.
    ///
    /// With a signed permutation `P` in SO(3), `B·D·A = (B·Pᵀ)(P·D·Pᵀ)(P·A)`
    /// and `P·D·Pᵀ` is the permuted diagonal, so the signs of `e` are kept.
    pub fn sorted_by_magnitude(&self) -> SignedSvd3 {
        let mut order = [0usize, 1, 2];
        // Stable sort keeps the routine's order among equal magnitudes.
        order.sort_by(|&i, &j| self.e[j].abs().total_cmp(&self.e[i].abs()));
        let mut p = Mat3::zeros();
        for (row, &col) in order.iter().enumerate() {
            p[(row, col)] = 1.0;
        }
        if p.determinant() < 0.0 {
            p.row_mut(2).neg_mut();
        }
        let e = Vec3::new(self.e[order[0]], self.e[order[1]], self.e[order[2]]);
        SignedSvd3 {
            b: Rotation3(self.b.matrix() * p.transpose()),
            e,
            a: Rotation3(p * self.a.matrix()),
        }
    }
}

/// `M = V · diag(d) · U` in the z-x plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedSvd2 {
    pub v: Rotation2,
    pub d: Vec2,
    pub u: Rotation2,
}

impl SignedSvd2 {
    pub fn reconstruct(&self) -> Mat2 {
        self.v.matrix() * Mat2::from_diagonal(&self.d) * self.u.matrix()
    }

    /// `diag(d) · U`; its columns are `Ũ_z` and `Ũ_x`.
    pub fn scaled_u(&self) -> Mat2 {
        Mat2::from_diagonal(&self.d) * self.u.matrix()
    }
}

fn argmin_abs<const N: usize>(values: &[f64; N]) -> usize {
    let mut k = N - 1;
    for i in (0..N).rev() {
        if values[i].abs() < values[k].abs() {
            k = i;
        }
    }
    k
}

/// Signed singular value decomposition of a real 3×3 matrix.
///
/// An ordinary SVD `M = U·Σ·Vᵀ` is computed first. If `det U = -1` the column
/// of `U` belonging to the smallest singular value is negated together with
/// that singular value; likewise for `Vᵀ` and its row. Both factors end up in
/// SO(3) and the determinant sign of `M` is carried by `e`. The order of `e`
/// is the one produced by the SVD routine, except that a diagonal `M`
/// (including zero) factors as `I·M·I`, keeping its axis labels.
pub fn signed_svd3(m: &Mat3) -> SignedSvd3 {
    if *m == Mat3::from_diagonal(&m.diagonal()) {
        return SignedSvd3 {
            b: Rotation3::identity(),
            e: m.diagonal(),
            a: Rotation3::identity(),
        };
    }
    let svd = m.svd(true, true);
    let mut u = svd.u.expect("u requested");
    let mut v_t = svd.v_t.expect("v_t requested");
    let mut e = svd.singular_values;
    let k = argmin_abs(&[e[0], e[1], e[2]]);
    if u.determinant() < 0.0 {
        u.column_mut(k).neg_mut();
        e[k] = -e[k];
    }
    if v_t.determinant() < 0.0 {
        v_t.row_mut(k).neg_mut();
        e[k] = -e[k];
    }
    SignedSvd3 {
        b: Rotation3(u),
        e,
        a: Rotation3(v_t),
    }
}

/// Signed singular value decomposition of a real 2×2 matrix; same
/// canonicalization as [`signed_svd3`].
pub fn signed_svd2(m: &Mat2) -> SignedSvd2 {
    if *m == Mat2::from_diagonal(&m.diagonal()) {
        return SignedSvd2 {
            v: Rotation2::identity(),
            d: m.diagonal(),
            u: Rotation2::identity(),
        };
    }
    let svd = m.svd(true, true);
    let mut v = svd.u.expect("u requested");
    let mut u = svd.v_t.expect("v_t requested");
    let mut d = svd.singular_values;
    let k = argmin_abs(&[d[0], d[1]]);
    if v.determinant() < 0.0 {
        v.column_mut(k).neg_mut();
        d[k] = -d[k];
    }
    if u.determinant() < 0.0 {
        u.row_mut(k).neg_mut();
        d[k] = -d[k];
    }
    SignedSvd2 {
        v: Rotation2(v),
        d,
        u: Rotation2(u),
    }
}

/// Singular values of a 3×3 matrix, largest first.
pub fn singular_values3(m: &Mat3) -> [f64; 3] {
    let mut s: [f64; 3] = m.singular_values().into();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Singular values of a 2×2 matrix, largest first, in closed form.
pub fn singular_values2(m: &Mat2) -> [f64; 2] {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    // σ₁ ± σ₂ are the norms of (a + d, c - b) and (a - d, c + b).
    let p = (a + d).hypot(c - b);
    let q = (a - d).hypot(c + b);
    [(p + q) / 2.0, ((p - q) / 2.0).abs()]
}

/// Z-X-Z Euler rotation `Rz(alpha) · Rx(beta) · Rz(gamma)`, where `Rz` turns
/// about the z axis (x̂ toward ŷ) and `Rx` about the x axis (ŷ toward ẑ).
pub fn rotation3_from_euler(alpha: f64, beta: f64, gamma: f64) -> Rotation3 {
    Rotation3::about_z(alpha)
        .then(&Rotation3::about_x(beta))
        .then(&Rotation3::about_z(gamma))
}

pub fn rotation2_from_angle(theta: f64) -> Rotation2 {
    Rotation2::from_angle(theta)
}

/// Orthonormal pair spanning the same plane as `u` then `v`, by Gram–Schmidt.
/// Vectors shorter than `tol` are replaced by a completion against the
/// standard basis; the flag reports whether that happened.
pub(crate) fn orthonormal_pair(u: &Vec3, v: &Vec3, tol: f64) -> (Vec3, Vec3, bool) {
    let mut degenerate = false;
    let first = if u.norm() >= tol {
        u.normalize()
    } else if v.norm() >= tol {
        degenerate = true;
        completion(&v.normalize())
    } else {
        degenerate = true;
        Vec3::x_axis().into_inner()
    };
    let residual = v - first * first.dot(v);
    let second = if residual.norm() >= tol {
        residual.normalize()
    } else {
        degenerate = true;
        completion(&first)
    };
    (first, second, degenerate)
}

/// A unit vector orthogonal to the unit vector `r`, built from the standard
/// basis vector along which `r` has the smallest component.
pub(crate) fn completion(r: &Vec3) -> Vec3 {
    let mut k = 0;
    for i in 1..3 {
        if r[i].abs() < r[k].abs() {
            k = i;
        }
    }
    let mut c = Vec3::zeros();
    c[k] = 1.0;
    (c - r * r.dot(&c)).normalize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn random_matrix(rng: &mut ChaCha8Rng) -> Mat3 {
        Mat3::from_fn(|_, _| rng.random_range(-1.0..=1.0))
    }

    /// Eigenvalues of a symmetric 3×3 matrix by the trigonometric cubic solution.
    fn symmetric_eigenvalues(s: &Mat3) -> [f64; 3] {
        let p1 = s[(0, 1)].powi(2) + s[(0, 2)].powi(2) + s[(1, 2)].powi(2);
        let q = s.trace() / 3.0;
        let p2 = (s[(0, 0)] - q).powi(2) + (s[(1, 1)] - q).powi(2) + (s[(2, 2)] - q).powi(2)
            + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        if p == 0.0 {
            return [q, q, q];
        }
        let bm = (s - Mat3::identity() * q) / p;
        let r = (bm.determinant() / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let l1 = q + 2.0 * p * phi.cos();
        let l3 = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
        [l1, 3.0 * q - l1 - l3, l3]
    }

    fn assert_rotation(r: &Rotation3) {
        assert!(orthogonality_error3(r.matrix()) <= 1e-12);
        assert!((r.matrix().determinant() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn identity_factorizes_trivially() {
        let f = signed_svd3(&Mat3::identity());
        assert!((f.reconstruct() - Mat3::identity()).amax() <= 1e-12);
        for i in 0..3 {
            assert!((f.e[i].abs() - 1.0).abs() <= 1e-12);
        }
        assert!(f.e.iter().product::<f64>() > 0.0);
    }

    #[test]
    fn diagonal_with_negative_entry() {
        let m = Mat3::from_diagonal(&Vec3::new(-0.9, 0.8, 0.7));
        let f = signed_svd3(&m);
        assert!((f.reconstruct() - m).amax() <= 1e-12);
        assert_rotation(&f.a);
        assert_rotation(&f.b);
        let mut mags: Vec<f64> = f.e.iter().map(|x| x.abs()).collect();
        mags.sort_by(|a, b| b.total_cmp(a));
        assert!((mags[0] - 0.9).abs() <= 1e-12);
        assert!((mags[1] - 0.8).abs() <= 1e-12);
        assert!((mags[2] - 0.7).abs() <= 1e-12);
        // det M < 0 has to show up in the signs of e.
        assert!(f.e.iter().product::<f64>() < 0.0);
        assert_eq!(f.e, Vec3::new(-0.9, 0.8, 0.7));
    }

    #[test]
    fn random_matrices_match_gram_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let m = random_matrix(&mut rng);
            let f = signed_svd3(&m);
            assert!((f.reconstruct() - m).amax() <= 1e-12);
            assert_rotation(&f.a);
            assert_rotation(&f.b);
            let mut sq: Vec<f64> = f.e.iter().map(|x| x * x).collect();
            sq.sort_by(|a, b| b.total_cmp(a));
            let lambda = symmetric_eigenvalues(&(m.transpose() * m));
            for i in 0..3 {
                assert!((sq[i] - lambda[i]).abs() <= 1e-12, "{sq:?} vs {lambda:?}");
            }
        }
    }

    #[test]
    fn svd2_scaled_identity_and_zero() {
        let f = signed_svd2(&Mat2::from_diagonal(&Vec2::new(0.9, 0.9)));
        assert!((f.reconstruct() - Mat2::from_diagonal(&Vec2::new(0.9, 0.9))).amax() <= 1e-12);
        assert!((f.d[0] - 0.9).abs() <= 1e-12 && (f.d[1] - 0.9).abs() <= 1e-12);

        let z = signed_svd2(&Mat2::zeros());
        assert_eq!(z.d, Vec2::zeros());
        assert_eq!(z.u, Rotation2::identity());
        assert_eq!(z.v, Rotation2::identity());
    }

    #[test]
    fn svd2_scaled_quarter_turn() {
        let m = Mat2::new(0.0, 0.9, -0.9, 0.0);
        let f = signed_svd2(&m);
        assert!((f.reconstruct() - m).amax() <= 1e-12);
        assert!((f.d[0] - 0.9).abs() <= 1e-12 && (f.d[1] - 0.9).abs() <= 1e-12);
        let vu = f.v.matrix() * f.u.matrix();
        assert!((vu - m / 0.9).amax() <= 1e-12);
    }

    #[test]
    fn svd2_matches_closed_form_singular_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let m = Mat2::from_fn(|_, _| rng.random_range(-1.0..=1.0));
            let f = signed_svd2(&m);
            assert!((f.reconstruct() - m).amax() <= 1e-12);
            assert!(orthogonality_error2(f.u.matrix()) <= 1e-12);
            assert!((f.v.matrix().determinant() - 1.0).abs() <= 1e-12);
            let mut mags = [f.d[0].abs(), f.d[1].abs()];
            mags.sort_by(|a, b| b.total_cmp(a));
            let s = singular_values2(&m);
            assert!((mags[0] - s[0]).abs() <= 1e-12 && (mags[1] - s[1]).abs() <= 1e-12);
        }
    }

    #[test]
    fn euler_conventions() {
        assert!((rotation3_from_euler(0.0, 0.0, 0.0).matrix() - Mat3::identity()).amax() < 1e-15);
        let r = rotation3_from_euler(PI, 0.0, 0.0);
        assert!((r.matrix() - Mat3::from_diagonal(&Vec3::new(1.0, -1.0, -1.0))).amax() <= 1e-12);
        assert_rotation(&r);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let r = rotation3_from_euler(
                rng.random_range(-10.0..10.0),
                rng.random_range(-10.0..10.0),
                rng.random_range(-10.0..10.0),
            );
            assert_rotation(&r);
        }
    }

    #[test]
    fn plane_rotation_conventions() {
        assert_eq!(rotation2_from_angle(0.0), Rotation2::identity());
        let q = rotation2_from_angle(FRAC_PI_2);
        assert!((q.matrix() - Mat2::new(0.0, -1.0, 1.0, 0.0)).amax() <= 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..500 {
            let q = rotation2_from_angle(rng.random_range(-10.0..10.0));
            assert!(orthogonality_error2(q.matrix()) <= 1e-12);
            assert!(Rotation2::from_matrix(*q.matrix()).is_ok());
            assert!(Rotation3::embed_zx(&q).fixes_y(1e-12));
        }
    }

    #[test]
    fn cross_rows_are_right_handed() {
        // ẑ × x̂ = ŷ in (z, x, y) order.
        let r = Rotation3::from_two_rows(&Vec3::new(1.0, 0.0, 0.0), &Vec3::new(0.0, 1.0, 0.0));
        assert_eq!(*r.matrix(), Mat3::identity());
    }

    #[test]
    fn quaternion_and_exponential_map_are_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let q = Rotation3::from_quaternion(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            assert_rotation(&q);
            let w = Vec3::from_fn(|_, _| rng.random_range(-4.0..4.0));
            let r = Rotation3::from_rotation_vector(&w);
            assert_rotation(&r);
            // The axis is fixed.
            assert!((r.matrix() * w - w).amax() <= 1e-12);
        }
        let tiny = Rotation3::from_rotation_vector(&Vec3::new(1e-9, 0.0, 0.0));
        assert_rotation(&tiny);
        // about_z is the exponential map along ẑ.
        let a = Rotation3::from_rotation_vector(&Vec3::new(0.3, 0.0, 0.0));
        assert!((a.matrix() - Rotation3::about_z(0.3).matrix()).amax() <= 1e-15);
        let b = Rotation3::from_rotation_vector(&Vec3::new(0.0, 0.3, 0.0));
        assert!((b.matrix() - Rotation3::about_x(0.3).matrix()).amax() <= 1e-15);
    }

    #[test]
    fn sorted_factorization_orders_magnitudes() {
        let m = Mat3::from_diagonal(&Vec3::new(0.5, 0.7, 0.9));
        let f = signed_svd3(&m).sorted_by_magnitude();
        assert!((f.reconstruct() - m).amax() <= 1e-12);
        assert!((f.e[0].abs() - 0.9).abs() <= 1e-12);
        assert!((f.e[1].abs() - 0.7).abs() <= 1e-12);
        assert!((f.e[2].abs() - 0.5).abs() <= 1e-12);
        assert_rotation(&f.a);
        assert_rotation(&f.b);
    }

    #[test]
    fn interlacing_of_upper_left_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..1000 {
            let m = random_matrix(&mut rng);
            let s3 = singular_values3(&m);
            let s2 = singular_values2(&m.fixed_view::<2, 2>(0, 0).into_owned());
            assert!(s2[0] <= s3[0] + 1e-12);
            assert!(s2[1] <= s3[1] + 1e-12);
        }
    }

    #[test]
    fn largest_singular_value_is_max_stretch() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..200 {
            let s = Mat2::from_fn(|_, _| rng.random_range(-1.0..=1.0));
            let grid = 20_000;
            let stretch = (0..grid)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / grid as f64;
                    (s * Vec2::new(t.cos(), t.sin())).norm()
                })
                .fold(f64::NEG_INFINITY, f64::max);
            let sv = singular_values2(&s)[0];
            assert!(stretch <= sv + 1e-12);
            // Quadratic flatness at the maximum: grid step 3e-4 gives ~1e-7.
            assert!(sv - stretch <= 1e-6, "{sv} {stretch}");
        }
    }

    #[test]
    fn orthonormal_pair_handles_degenerate_inputs() {
        let (a, b, deg) = orthonormal_pair(&Vec3::new(2.0, 0.0, 0.0), &Vec3::new(1.0, 1.0, 0.0), 1e-12);
        assert!(!deg);
        assert!((a - Vec3::new(1.0, 0.0, 0.0)).amax() < 1e-15);
        assert!((b - Vec3::new(0.0, 1.0, 0.0)).amax() < 1e-15);
        let (a, b, deg) = orthonormal_pair(&Vec3::new(0.0, 0.0, 1.0), &Vec3::new(0.0, 0.0, 2.0), 1e-12);
        assert!(deg);
        assert!(a.dot(&b).abs() < 1e-15 && (b.norm() - 1.0).abs() < 1e-15);
        let (a, b, deg) = orthonormal_pair(&Vec3::zeros(), &Vec3::zeros(), 1e-12);
        assert!(deg);
        assert_rotation(&Rotation3::from_two_rows(&a, &b));
    }
}

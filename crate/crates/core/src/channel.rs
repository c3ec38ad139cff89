//! Qubit channels in Stokes and Choi form.
//!
//! A channel acts on Bloch vectors as `θ ↦ R·θ + t`. Its Choi operator is
//!
//! ```text
//! ρ_AB = (id ⊗ E)(|ψ⟩⟨ψ|)
//!      = ¼ [ I⊗I + Σ_b t_b I⊗σ_b + Σ_{a,b} R_ba σ_aᵀ⊗σ_b ],   |ψ⟩ = (|00⟩ + |11⟩)/√2,
//! ```
//!
//! with the usual Pauli matrices and `σ_yᵀ = -σ_y`. The Bell states are
//! `|ψ_a⟩ = (I ⊗ σ_a)|ψ⟩` for `a ∈ {i, z, x, y}`. For `R = diag(e)`, `t = 0`
//! the Choi operator is Bell-diagonal with weights [`PauliDistribution::from_diagonal`].

use std::fmt;

use nalgebra::{Complex, DMatrix, Matrix2, Matrix4, Vector4};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::entropy::hermitian_eigenvalues;
use crate::linalg::{rotation3_from_euler, signed_svd3, Mat2, Mat3, Rotation3, Vec3};
use crate::{Error, Result};

/// Tolerance on `|t|` below which a channel counts as unital.
pub const UNITAL_TOL: f64 = 1e-12;
/// Bell weights above `-CP_TOL` count as nonnegative.
pub const CP_TOL: f64 = 1e-12;
const ENTRY_TOL: f64 = 1e-12;

type C64 = Complex<f64>;
pub type CMat2 = Matrix2<C64>;
pub type CMat4 = Matrix4<C64>;

/// Basis label, in the fixed `(z, x, y)` index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    Z,
    X,
    Y,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::Z, Axis::X, Axis::Y];

    pub fn index(self) -> usize {
        match self {
            Axis::Z => 0,
            Axis::X => 1,
            Axis::Y => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Axis> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::Z => "z",
            Axis::X => "x",
            Axis::Y => "y",
        }
    }

    pub fn parse(s: &str) -> Option<Axis> {
        match s {
            "z" => Some(Axis::Z),
            "x" => Some(Axis::X),
            "y" => Some(Axis::Y),
            _ => None,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Stokes parameterization `(R, t)` of a qubit channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitChannel {
    r: Mat3,
    t: Vec3,
}

fn check_entry(what: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v.abs() <= 1.0 + ENTRY_TOL {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what,
            value: v,
            range: "[-1, 1]",
        })
    }
}

impl QubitChannel {
    /// Every entry of `R` and `t` must be finite and in `[-1, 1]`.
    pub fn new(r: Mat3, t: Vec3) -> Result<Self> {
        for &v in r.iter() {
            check_entry("R entry", v)?;
        }
        for &v in t.iter() {
            check_entry("t entry", v)?;
        }
        Ok(Self { r, t })
    }

    pub fn unital(r: Mat3) -> Result<Self> {
        Self::new(r, Vec3::zeros())
    }

    pub(crate) fn from_parts_unchecked(r: Mat3, t: Vec3) -> Self {
        Self { r, t }
    }

    pub fn identity() -> Self {
        Self {
            r: Mat3::identity(),
            t: Vec3::zeros(),
        }
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.r
    }

    pub fn vector(&self) -> &Vec3 {
        &self.t
    }

    /// `R_ab` with `a` the output (row) and `b` the input (column) axis.
    pub fn r(&self, a: Axis, b: Axis) -> f64 {
        self.r[(a.index(), b.index())]
    }

    pub fn t(&self, b: Axis) -> f64 {
        self.t[b.index()]
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        self.t.norm() <= tol
    }

    /// Upper-left z-x block `S` of `R`.
    pub fn upper_left(&self) -> Mat2 {
        self.r.fixed_view::<2, 2>(0, 0).into_owned()
    }

    /// `γ = (R_zz, R_xx, R_yy)`, all that conventional six-state estimation sees.
    pub fn gamma(&self) -> Vec3 {
        self.r.diagonal()
    }

    /// `μ = (R_zz, R_xx)`, all that conventional BB84 estimation sees.
    pub fn mu(&self) -> [f64; 2] {
        [self.r[(0, 0)], self.r[(1, 1)]]
    }

    /// `ω = (R_zz, R_zx, R_xz, R_xx, t_z, t_x)`, estimable with z and x bases.
    pub fn omega(&self) -> [f64; 6] {
        let r = &self.r;
        [r[(0, 0)], r[(0, 1)], r[(1, 0)], r[(1, 1)], self.t[0], self.t[1]]
    }

    /// `τ = (R_zy, R_xy, R_yz, R_yx, R_yy, t_y)`, the complement of `ω`.
    pub fn tau(&self) -> [f64; 6] {
        let r = &self.r;
        [r[(0, 2)], r[(1, 2)], r[(2, 0)], r[(2, 1)], r[(2, 2)], self.t[2]]
    }

    /// `κ`: off-diagonal entries of `R` followed by `t`, the complement of `γ`.
    pub fn kappa(&self) -> [f64; 9] {
        let r = &self.r;
        [
            r[(0, 1)],
            r[(0, 2)],
            r[(1, 0)],
            r[(1, 2)],
            r[(2, 0)],
            r[(2, 1)],
            self.t[0],
            self.t[1],
            self.t[2],
        ]
    }

    /// `ν`: everything except `R_zz`, `R_xx`.
    pub fn nu(&self) -> [f64; 10] {
        let r = &self.r;
        [
            r[(0, 1)],
            r[(0, 2)],
            r[(1, 0)],
            r[(1, 2)],
            r[(2, 0)],
            r[(2, 1)],
            r[(2, 2)],
            self.t[0],
            self.t[1],
            self.t[2],
        ]
    }
}

/// Measured output biases `Q_ab0`, `Q_ab1` for sent basis `a` and measured
/// basis `b`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BiasTable {
    q0: [[f64; 3]; 3],
    q1: [[f64; 3]; 3],
    mask: [[bool; 3]; 3],
}

impl BiasTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, a: Axis, b: Axis, q0: f64, q1: f64) -> Result<()> {
        check_entry("Q_ab0", q0)?;
        check_entry("Q_ab1", q1)?;
        let (i, j) = (a.index(), b.index());
        self.q0[i][j] = q0;
        self.q1[i][j] = q1;
        self.mask[i][j] = true;
        Ok(())
    }

    /// `(Q_ab0, Q_ab1)` if the pair was measured.
    pub fn get(&self, a: Axis, b: Axis) -> Option<(f64, f64)> {
        let (i, j) = (a.index(), b.index());
        self.mask[i][j].then(|| (self.q0[i][j], self.q1[i][j]))
    }

    pub fn is_complete(&self) -> bool {
        self.mask.iter().flatten().all(|&m| m)
    }
}

/// Six-state process tomography: `R_ba = (Q_ab0 + Q_ab1)/2` and
/// `t_b = (Q_ab0 - Q_ab1)/2`.
///
/// Each `t_b` is determined once per sent basis `a`; the three estimates are
/// averaged, which is exact for noiseless tables.
pub fn stokes_from_biases(b: &BiasTable) -> Result<QubitChannel> {
    let mut r = Mat3::zeros();
    let mut t = Vec3::zeros();
    for a in Axis::ALL {
        for bb in Axis::ALL {
            let (q0, q1) = b.get(a, bb).ok_or(Error::MissingPair { a, b: bb })?;
            check_entry("Q_ab0", q0)?;
            check_entry("Q_ab1", q1)?;
            r[(bb.index(), a.index())] = (q0 + q1) / 2.0;
            t[bb.index()] += (q0 - q1) / 6.0;
        }
    }
    QubitChannel::new(r, t)
}

/// Inverse of [`stokes_from_biases`]: `Q_ab0 = R_ba + t_b`, `Q_ab1 = R_ba - t_b`.
pub fn biases_from_stokes(c: &QubitChannel) -> BiasTable {
    let mut table = BiasTable::new();
    for a in Axis::ALL {
        for b in Axis::ALL {
            let (i, j) = (a.index(), b.index());
            table.q0[i][j] = c.r[(j, i)] + c.t[j];
            table.q1[i][j] = c.r[(j, i)] - c.t[j];
            table.mask[i][j] = true;
        }
    }
    table
}

/// Bell-diagonal weights `(q_i, q_z, q_x, q_y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliDistribution {
    pub qi: f64,
    pub qz: f64,
    pub qx: f64,
    pub qy: f64,
}

impl PauliDistribution {
    pub const LABELS: [&'static str; 4] = ["i", "z", "x", "y"];

    /// Weights of the Pauli channel `R = diag(e_z, e_x, e_y)`.
    pub fn from_diagonal(e: &Vec3) -> Self {
        let (z, x, y) = (e[0], e[1], e[2]);
        Self {
            qi: (1.0 + z + x + y) / 4.0,
            qz: (1.0 + z - x - y) / 4.0,
            qx: (1.0 - z + x - y) / 4.0,
            qy: (1.0 - z - x + y) / 4.0,
        }
    }

    /// Inverse of [`from_diagonal`](Self::from_diagonal).
    pub fn to_diagonal(&self) -> Vec3 {
        Vec3::new(
            self.qi + self.qz - self.qx - self.qy,
            self.qi - self.qz + self.qx - self.qy,
            self.qi - self.qz - self.qx + self.qy,
        )
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.qi, self.qz, self.qx, self.qy]
    }

    pub fn sum(&self) -> f64 {
        self.as_array().iter().sum()
    }

    /// Most negative (or smallest) weight and its label.
    pub fn min(&self) -> (&'static str, f64) {
        let q = self.as_array();
        let mut k = 0;
        for i in 1..4 {
            if q[i] < q[k] {
                k = i;
            }
        }
        (Self::LABELS[k], q[k])
    }
}

/// The Choi operator of a qubit channel as a 4×4 matrix on `A ⊗ B`, with the
/// first tensor factor (Alice's half) as the more significant index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChoiMatrix(CMat4);

fn c(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

/// Pauli matrices `[σ_i, σ_z, σ_x, σ_y]`.
pub(crate) fn paulis() -> [CMat2; 4] {
    let i = Complex::i();
    [
        CMat2::identity(),
        CMat2::new(c(1.0), c(0.0), c(0.0), c(-1.0)),
        CMat2::new(c(0.0), c(1.0), c(1.0), c(0.0)),
        CMat2::new(c(0.0), -i, i, c(0.0)),
    ]
}

pub(crate) fn kron2(a: &CMat2, b: &CMat2) -> CMat4 {
    CMat4::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}

/// Bell states `(I ⊗ σ_a)|ψ⟩` for `a = i, z, x, y`, as columns.
pub(crate) fn bell_basis() -> CMat4 {
    let s = c(0.5f64.sqrt());
    let psi = Vector4::new(s, c(0.0), c(0.0), s);
    let p = paulis();
    let mut m = CMat4::zeros();
    for (k, sigma) in p.iter().enumerate() {
        let col = kron2(&CMat2::identity(), sigma) * psi;
        m.set_column(k, &col);
    }
    m
}

impl ChoiMatrix {
    pub fn from_matrix(m: CMat4) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &CMat4 {
        &self.0
    }

    pub fn to_dmatrix(&self) -> DMatrix<C64> {
        DMatrix::from_fn(4, 4, |i, j| self.0[(i, j)])
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (self.0 - self.0.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `Tr_A ρ`, Bob's reduced operator; `I/2` for unital channels.
    pub fn partial_trace_a(&self) -> CMat2 {
        CMat2::from_fn(|i, j| self.0[(i, j)] + self.0[(i + 2, j + 2)])
    }

    /// `Tr_B ρ`, always `I/2` for trace-preserving channels.
    pub fn partial_trace_b(&self) -> CMat2 {
        CMat2::from_fn(|i, j| self.0[(2 * i, 2 * j)] + self.0[(2 * i + 1, 2 * j + 1)])
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let mut ev = hermitian_eigenvalues(&self.to_dmatrix());
        ev.sort_by(|a, b| a.total_cmp(b));
        [ev[0], ev[1], ev[2], ev[3]]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// The operator in the Bell basis `(ψ_i, ψ_z, ψ_x, ψ_y)`.
    pub fn in_bell_basis(&self) -> CMat4 {
        let b = bell_basis();
        b.adjoint() * self.0 * b
    }

    /// Diagonal Bell-basis entries `⟨ψ_a|ρ|ψ_a⟩`.
    pub fn bell_weights(&self) -> PauliDistribution {
        let m = self.in_bell_basis();
        PauliDistribution {
            qi: m[(0, 0)].re,
            qz: m[(1, 1)].re,
            qx: m[(2, 2)].re,
            qy: m[(3, 3)].re,
        }
    }

    /// Largest off-diagonal magnitude in the Bell basis.
    pub fn bell_off_diagonal(&self) -> f64 {
        let m = self.in_bell_basis();
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    worst = worst.max(m[(i, j)].norm());
                }
            }
        }
        worst
    }
}

/// Choi operator of `(R, t)` from the Pauli expansion in the module docs.
pub fn choi_from_stokes(ch: &QubitChannel) -> ChoiMatrix {
    let p = paulis();
    let mut rho = kron2(&p[0], &p[0]);
    for b in 0..3 {
        rho += kron2(&p[0], &p[b + 1]) * c(ch.t[b]);
        for a in 0..3 {
            rho += kron2(&p[a + 1].transpose(), &p[b + 1]) * c(ch.r[(b, a)]);
        }
    }
    ChoiMatrix(rho * c(0.25))
}

/// Checks unitality and complete positivity of a channel.
///
/// Rotating a channel on either side is a unitary conjugation of its Choi
/// operator, so a unital `R = B·diag(e)·A` is completely positive exactly when
/// the Pauli channel `diag(e)` is, i.e. when the Bell weights of `e` are
/// nonnegative.
pub fn validate_unital_cp(ch: &QubitChannel, unital_tol: f64) -> Result<PauliDistribution> {
    let norm = ch.t.norm();
    if !(norm <= unital_tol) {
        return Err(Error::NotUnital {
            norm,
            tol: unital_tol,
        });
    }
    let svd = signed_svd3(&ch.r);
    let q = PauliDistribution::from_diagonal(&svd.e);
    let (component, value) = q.min();
    if value < -CP_TOL {
        return Err(Error::NotCompletelyPositive { component, value });
    }
    Ok(q)
}

/// Compensated channel `U_B ∘ E ∘ U_A`: `R' = O_B·R·O_A`, `t' = O_B·t`.
/// A missing rotation is the identity.
pub fn compose(ch: &QubitChannel, oa: Option<&Rotation3>, ob: Option<&Rotation3>) -> QubitChannel {
    let mut r = ch.r;
    let mut t = ch.t;
    if let Some(oa) = oa {
        r *= oa.matrix();
    }
    if let Some(ob) = ob {
        r = ob.matrix() * r;
        t = ob.matrix() * t;
    }
    QubitChannel { r, t }
}

/// Named channel families used as fixtures and sweep targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Identity,
    /// Depolarizing channel with bit error rate `qber`: `R = (1 - 2·qber)·I`.
    Depolarizing { qber: f64 },
    /// σ_z error with probability `p`: `R = diag(1, 1-2p, 1-2p)`.
    PhaseFlip { p: f64 },
    /// σ_x error with probability `p`: `R = diag(1-2p, 1, 1-2p)`.
    BitFlip { p: f64 },
    /// `R = Bob · diag(e(q)) · Alice` with Z-X-Z Euler angles for both sides.
    RotatedPauli {
        q: [f64; 4],
        alice: [f64; 3],
        bob: [f64; 3],
    },
}

fn check_probability(what: &'static str, p: f64, hi: f64, range: &'static str) -> Result<()> {
    if p.is_finite() && (0.0..=hi).contains(&p) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what,
            value: p,
            range,
        })
    }
}

pub fn family(f: &Family) -> Result<QubitChannel> {
    let r = match *f {
        Family::Identity => Mat3::identity(),
        Family::Depolarizing { qber } => {
            // Above 2/3 the identity weight turns negative.
            check_probability("qber", qber, 2.0 / 3.0, "[0, 2/3]")?;
            Mat3::identity() * (1.0 - 2.0 * qber)
        }
        Family::PhaseFlip { p } => {
            check_probability("p", p, 1.0, "[0, 1]")?;
            Mat3::from_diagonal(&Vec3::new(1.0, 1.0 - 2.0 * p, 1.0 - 2.0 * p))
        }
        Family::BitFlip { p } => {
            check_probability("p", p, 1.0, "[0, 1]")?;
            Mat3::from_diagonal(&Vec3::new(1.0 - 2.0 * p, 1.0, 1.0 - 2.0 * p))
        }
        Family::RotatedPauli { q, alice, bob } => {
            for &qk in &q {
                check_probability("q", qk, 1.0, "[0, 1]")?;
            }
            let sum: f64 = q.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::NotNormalized {
                    sum,
                    min: q.iter().copied().fold(f64::INFINITY, f64::min),
                });
            }
            for &angle in alice.iter().chain(bob.iter()) {
                if !angle.is_finite() {
                    return Err(Error::OutOfRange {
                        what: "Euler angle",
                        value: angle,
                        range: "finite",
                    });
                }
            }
            let e = PauliDistribution {
                qi: q[0],
                qz: q[1],
                qx: q[2],
                qy: q[3],
            }
            .to_diagonal();
            let a = rotation3_from_euler(alice[0], alice[1], alice[2]);
            let b = rotation3_from_euler(bob[0], bob[1], bob[2]);
            b.matrix() * Mat3::from_diagonal(&e) * a.matrix()
        }
    };
    Ok(QubitChannel::from_parts_unchecked(r, Vec3::zeros()))
}

/// Uniformly distributed rotation, from a normalized Gaussian quaternion.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Rotation3 {
    loop {
        let w: f64 = rng.sample(StandardNormal);
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        let c: f64 = rng.sample(StandardNormal);
        if w * w + a * a + b * b + c * c > 1e-300 {
            return Rotation3::from_quaternion(w, a, b, c);
        }
    }
}

/// Uniformly distributed point of the probability simplex on four outcomes.
pub fn random_pauli_distribution<R: Rng + ?Sized>(rng: &mut R) -> PauliDistribution {
    let x: [f64; 4] = std::array::from_fn(|_| rng.sample(Exp1));
    let s: f64 = x.iter().sum();
    PauliDistribution {
        qi: x[0] / s,
        qz: x[1] / s,
        qx: x[2] / s,
        qy: x[3] / s,
    }
}

/// Random completely positive unital channel `B·diag(e(q))·A`, with `A`, `B`
/// Haar-random and `q` uniform on the simplex, drawn from `rng`.
pub fn random_unital_with<R: Rng + ?Sized>(rng: &mut R) -> QubitChannel {
    let q = random_pauli_distribution(rng);
    let a = random_rotation(rng);
    let b = random_rotation(rng);
    let r = b.matrix() * Mat3::from_diagonal(&q.to_diagonal()) * a.matrix();
    QubitChannel::from_parts_unchecked(r, Vec3::zeros())
}

/// Deterministic per seed; see [`random_unital_with`].
pub fn random_unital(seed: u64) -> QubitChannel {
    random_unital_with(&mut ChaCha8Rng::seed_from_u64(seed))
}

//! Closed-form key rates and the compensation plans that attain them.
//!
//! Notation: `R = B·diag(e)·A` is the signed SVD of the Stokes matrix, `S` its
//! upper-left z-x block with signed SVD `S = V·diag(d)·U`, `c_z`, `c_x` the
//! first two columns of `R`, and `hb(x) = h((1 + x)/2)`.
//!
//! | rate | value |
//! |------|-------|
//! | `F1 = F2 = F2~` | `1 - H[q(e)]` |
//! | `G1 = G2 = G2~` | `1 - hb(d_z) - hb(d_x)` |
//! | `J2 = J2~` | `1 - hb(e_1) - hb(e_2)`, two largest `|e|` |
//! | `J1` | `1 - hb(s_1) - hb(s_2)`, singular values of `[c_z c_x]` |
//!
//! The conventional one-side rates `F1~`, `G1~`, `J1~` have no closed form and
//! come from [`crate::optimize`].

use std::fmt;

use crate::channel::{compose, PauliDistribution, QubitChannel, CP_TOL, UNITAL_TOL};
use crate::entropy::{h_bloch, shannon_unchecked};
use crate::linalg::{
    orthonormal_pair, signed_svd2, signed_svd3, singular_values2, singular_values3, Mat2, Mat3,
    Rotation2, Rotation3, SignedSvd3, Vec3,
};
use crate::optimize::{tilde_f1, tilde_g1, tilde_j1, SearchConfig};
use crate::{Error, Result};

/// Relative tolerance on column inner products for the orthogonality tests.
pub const ORTHOGONALITY_TOL: f64 = 1e-9;
/// Columns shorter than this are treated as zero when building plans.
const DEGENERACY_TOL: f64 = 1e-14;
/// Slack on singular values when checking the contraction property.
const CONTRACTION_TOL: f64 = 1e-12;

/// A unital channel with its signed SVD and Pauli weights precomputed.
///
/// [`UnitalChannel::new`] insists on complete positivity. [`UnitalChannel::contraction`]
/// accepts any contraction and records whether it is completely positive;
/// only the BB84 rates are defined for such inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitalChannel {
    channel: QubitChannel,
    svd: SignedSvd3,
    pauli: PauliDistribution,
    cp: bool,
}

impl UnitalChannel {
    pub fn new(channel: QubitChannel) -> Result<Self> {
        Self::with_tolerance(channel, UNITAL_TOL)
    }

    pub fn with_tolerance(channel: QubitChannel, unital_tol: f64) -> Result<Self> {
        let u = Self::contraction_with_tolerance(channel, unital_tol)?;
        if !u.cp {
            let (component, value) = u.pauli.min();
            return Err(Error::NotCompletelyPositive { component, value });
        }
        Ok(u)
    }

    pub fn contraction(channel: QubitChannel) -> Result<Self> {
        Self::contraction_with_tolerance(channel, UNITAL_TOL)
    }

    pub fn contraction_with_tolerance(channel: QubitChannel, unital_tol: f64) -> Result<Self> {
        let norm = channel.vector().norm();
        if !(norm <= unital_tol) {
            return Err(Error::NotUnital {
                norm,
                tol: unital_tol,
            });
        }
        let top = singular_values3(channel.matrix())[0];
        if top > 1.0 + CONTRACTION_TOL {
            return Err(Error::NotContraction { value: top });
        }
        Ok(Self::from_channel(channel))
    }

    fn from_channel(channel: QubitChannel) -> Self {
        let svd = signed_svd3(channel.matrix());
        let pauli = PauliDistribution::from_diagonal(&svd.e);
        let cp = pauli.min().1 >= -CP_TOL;
        Self {
            channel,
            svd,
            pauli,
            cp,
        }
    }

    /// The channel after compensation, `R' = O_B·R·O_A`.
    pub fn compensated(&self, oa: Option<&Rotation3>, ob: Option<&Rotation3>) -> Self {
        Self::from_channel(compose(&self.channel, oa, ob))
    }

    pub fn channel(&self) -> &QubitChannel {
        &self.channel
    }

    pub fn matrix(&self) -> &Mat3 {
        self.channel.matrix()
    }

    pub fn upper_left(&self) -> Mat2 {
        self.channel.upper_left()
    }

    pub fn svd(&self) -> &SignedSvd3 {
        &self.svd
    }

    pub fn pauli(&self) -> &PauliDistribution {
        &self.pauli
    }

    pub fn is_cp(&self) -> bool {
        self.cp
    }

    fn require_cp(&self) -> Result<()> {
        if self.cp {
            Ok(())
        } else {
            let (component, value) = self.pauli.min();
            Err(Error::NotCompletelyPositive { component, value })
        }
    }

    fn column(&self, k: usize) -> Vec3 {
        self.matrix().column(k).into_owned()
    }
}

/// Which rotations a plan may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Restriction {
    Full,
    /// Rotations about the y axis only, i.e. within the z-x plane.
    ZxPlane,
}

/// Rotations to apply before (`oa`, Alice) and after (`ob`, Bob) the channel.
/// One-side plans have no `oa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompensationPlan {
    pub oa: Option<Rotation3>,
    pub ob: Rotation3,
    pub restriction: Restriction,
}

impl CompensationPlan {
    pub fn one_side(ob: Rotation3, restriction: Restriction) -> Self {
        Self {
            oa: None,
            ob,
            restriction,
        }
    }

    pub fn two_side(oa: Rotation3, ob: Rotation3, restriction: Restriction) -> Self {
        Self {
            oa: Some(oa),
            ob,
            restriction,
        }
    }

    pub fn apply(&self, c: &QubitChannel) -> QubitChannel {
        compose(c, self.oa.as_ref(), Some(&self.ob))
    }

    pub fn apply_unital(&self, u: &UnitalChannel) -> UnitalChannel {
        u.compensated(self.oa.as_ref(), Some(&self.ob))
    }
}

/// A rate in bits. `raw` may be negative; `clamped` is `max(raw, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateValue {
    pub raw: f64,
    pub clamped: f64,
}

impl RateValue {
    pub fn new(raw: f64) -> Self {
        Self {
            raw,
            clamped: raw.max(0.0),
        }
    }
}

impl fmt::Display for RateValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.raw)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateKind {
    F1,
    F2,
    F1Conv,
    F2Conv,
    G1,
    G2,
    G1Conv,
    G2Conv,
    J1,
    J2,
    J1Conv,
    J2Conv,
}

impl RateKind {
    pub const ALL: [RateKind; 12] = [
        RateKind::F1,
        RateKind::F2,
        RateKind::F1Conv,
        RateKind::F2Conv,
        RateKind::G1,
        RateKind::G2,
        RateKind::G1Conv,
        RateKind::G2Conv,
        RateKind::J1,
        RateKind::J2,
        RateKind::J1Conv,
        RateKind::J2Conv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RateKind::F1 => "f1",
            RateKind::F2 => "f2",
            RateKind::F1Conv => "f1_conv",
            RateKind::F2Conv => "f2_conv",
            RateKind::G1 => "g1",
            RateKind::G2 => "g2",
            RateKind::G1Conv => "g1_conv",
            RateKind::G2Conv => "g2_conv",
            RateKind::J1 => "j1",
            RateKind::J2 => "j2",
            RateKind::J1Conv => "j1_conv",
            RateKind::J2Conv => "j2_conv",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Whether the rate needs a completely positive channel.
    pub fn is_six_state(self) -> bool {
        matches!(
            self,
            RateKind::F1 | RateKind::F2 | RateKind::F1Conv | RateKind::F2Conv
        )
    }
}

impl fmt::Display for RateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Result of a column-orthogonality test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orthogonality {
    pub holds: bool,
    /// Largest `|⟨c_i, c_j⟩| / (|c_i| |c_j|)` over the tested pairs.
    pub max_cosine: f64,
}

fn orthogonality_of(columns: &[Vec3]) -> Orthogonality {
    let mut max_cosine = 0.0f64;
    for i in 0..columns.len() {
        for j in i + 1..columns.len() {
            let denom = columns[i].norm() * columns[j].norm();
            if denom > 0.0 {
                max_cosine = max_cosine.max(columns[i].dot(&columns[j]).abs() / denom);
            }
        }
    }
    Orthogonality {
        holds: max_cosine <= ORTHOGONALITY_TOL,
        max_cosine,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// The channel is a contraction but not completely positive.
    NotCompletelyPositive { component: &'static str, value: f64 },
    /// A plan was built from a vanishing or parallel column pair.
    DegenerateColumns(&'static str),
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::NotCompletelyPositive { component, value } => {
                write!(f, "channel is not completely positive (q_{component} = {value})")
            }
            Warning::DegenerateColumns(what) => write!(f, "degenerate columns in {what} plan"),
        }
    }
}

pub fn pauli_distribution(u: &UnitalChannel) -> PauliDistribution {
    u.pauli
}

/// `1 - H[q(e)]`, shared by every optimized six-state rate except `F1~`.
fn six_state_core(u: &UnitalChannel) -> f64 {
    1.0 - shannon_unchecked(&u.pauli.as_array())
}

/// `1 - H[q(e)] + hb(|c_z|) - hb(R_zz)` given the precomputed first term.
pub(crate) fn six_state_accurate_from(core: f64, r: &Mat3) -> f64 {
    let cz = r.column(0).norm();
    core + h_bloch(cz.min(1.0)) - h_bloch(r[(0, 0)])
}

/// Six-state rate under accurate channel estimation, without compensation.
pub fn six_state_accurate_rate(u: &UnitalChannel) -> Result<f64> {
    u.require_cp()?;
    Ok(six_state_accurate_from(six_state_core(u), u.matrix()))
}

/// `F2`, with the plan `O_A = A⁻¹`, `O_B = B⁻¹` that diagonalizes `R`.
pub fn six_state_f2(u: &UnitalChannel) -> Result<(RateValue, CompensationPlan)> {
    u.require_cp()?;
    let plan = CompensationPlan::two_side(u.svd.a.inverse(), u.svd.b.inverse(), Restriction::Full);
    Ok((RateValue::new(six_state_core(u)), plan))
}

/// Bob-only plan for `F1`: its first row is `c_z / |c_z|`, so the compensated
/// `c_z` lies on the z axis.
pub fn six_state_f1_plan(u: &UnitalChannel) -> CompensationPlan {
    let cz = u.column(0);
    let ob = if cz.norm() < DEGENERACY_TOL {
        Rotation3::identity()
    } else {
        let r1 = cz.normalize();
        let r2 = crate::linalg::completion(&r1);
        Rotation3::from_two_rows(&r1, &r2)
    };
    CompensationPlan::one_side(ob, Restriction::Full)
}

/// `F1`: equal to `F2`, with the plan of [`six_state_f1_plan`].
pub fn six_state_f1(u: &UnitalChannel) -> Result<(RateValue, CompensationPlan)> {
    u.require_cp()?;
    Ok((RateValue::new(six_state_core(u)), six_state_f1_plan(u)))
}

/// Conventional six-state rate `1 - H[q(γ)]` for the diagonal
/// `γ = (R_zz, R_xx, R_yy)`.
pub fn six_state_conventional_core(gamma: &Vec3) -> Result<f64> {
    let q = PauliDistribution::from_diagonal(gamma);
    let (_, min) = q.min();
    if min < -CP_TOL {
        return Err(Error::InfeasibleDiagonal {
            gamma: [gamma[0], gamma[1], gamma[2]],
            value: min,
        });
    }
    Ok(1.0 - shannon_unchecked(&q.as_array()))
}

/// Pairwise orthogonality of all three columns of `R`.
pub fn six_state_orthogonality(u: &UnitalChannel) -> Orthogonality {
    orthogonality_of(&[u.column(0), u.column(1), u.column(2)])
}

/// BB84 rate under accurate estimation, from the z-x block only:
/// `1 - hb(d_z) - hb(d_x) + hb(|(R_zz, R_xz)|) - hb(R_zz)`.
pub fn bb84_accurate_rate(u: &UnitalChannel) -> f64 {
    bb84_accurate_from(u.matrix())
}

pub(crate) fn bb84_accurate_from(r: &Mat3) -> f64 {
    let s = r.fixed_view::<2, 2>(0, 0).into_owned();
    let [d1, d2] = singular_values2(&s);
    let head = r[(0, 0)].hypot(r[(1, 0)]).min(1.0);
    1.0 - h_bloch(d1.min(1.0)) - h_bloch(d2.min(1.0)) + h_bloch(head) - h_bloch(r[(0, 0)])
}

fn bb84_core(d1: f64, d2: f64) -> f64 {
    1.0 - h_bloch(d1.min(1.0)) - h_bloch(d2.min(1.0))
}

/// `G2`, with plane rotations `Q_A = U⁻¹`, `Q_B = V⁻¹` that diagonalize `S`.
pub fn bb84_g2(u: &UnitalChannel) -> (RateValue, CompensationPlan) {
    let svd = signed_svd2(&u.upper_left());
    let plan = CompensationPlan::two_side(
        Rotation3::embed_zx(&svd.u.inverse()),
        Rotation3::embed_zx(&svd.v.inverse()),
        Restriction::ZxPlane,
    );
    (RateValue::new(bb84_core(svd.d[0], svd.d[1])), plan)
}

/// Bob-only plane rotation for `G1`: turns `(R_zz, R_xz)` onto the z axis.
pub fn bb84_g1_plan(u: &UnitalChannel) -> CompensationPlan {
    let (a, b) = (u.matrix()[(0, 0)], u.matrix()[(1, 0)]);
    let n = a.hypot(b);
    let q = if n < DEGENERACY_TOL {
        Rotation2::identity()
    } else {
        Rotation2::with_first_row(a / n, b / n)
    };
    CompensationPlan::one_side(Rotation3::embed_zx(&q), Restriction::ZxPlane)
}

/// `G1`: equal to `G2`, with the plan of [`bb84_g1_plan`].
pub fn bb84_g1(u: &UnitalChannel) -> (RateValue, CompensationPlan) {
    let (value, _) = bb84_g2(u);
    (value, bb84_g1_plan(u))
}

/// Conventional BB84 rate `1 - hb(μ_z) - hb(μ_x)` for `μ = (R_zz, R_xx)`.
pub fn bb84_conventional_core(mu: [f64; 2]) -> f64 {
    bb84_core(mu[0].abs(), mu[1].abs())
}

/// Orthogonality of the two columns of the z-x block `S`.
pub fn bb84_orthogonality(u: &UnitalChannel) -> Orthogonality {
    let s = u.upper_left();
    let col = |k: usize| Vec3::new(s[(0, k)], s[(1, k)], 0.0);
    orthogonality_of(&[col(0), col(1)])
}

/// Orthogonality of `c_z` and `c_x`, the condition for `J1~ = J1`.
pub fn bb84_any_orthogonality(u: &UnitalChannel) -> Orthogonality {
    orthogonality_of(&[u.column(0), u.column(1)])
}

/// `J2` from the magnitude-sorted signed SVD `R = B'·diag(e')·A'`.
///
/// The plan is `O_A = A'ᵀ`, `O_B = F·B'ᵀ`, with `F` a pair of sign flips that
/// makes the compensated `R_zz`, `R_xx` nonnegative.
pub fn bb84_j2(u: &UnitalChannel) -> (RateValue, CompensationPlan) {
    let sorted = u.svd.sorted_by_magnitude();
    let e = sorted.e;
    let sz = if e[0] < 0.0 { -1.0 } else { 1.0 };
    let sx = if e[1] < 0.0 { -1.0 } else { 1.0 };
    let flips = Rotation3::from_matrix_unchecked(Mat3::from_diagonal(&Vec3::new(sz, sx, sz * sx)));
    let plan = CompensationPlan::two_side(
        sorted.a.inverse(),
        flips.then(&sorted.b.inverse()),
        Restriction::Full,
    );
    (RateValue::new(bb84_core(e[0].abs(), e[1].abs())), plan)
}

/// Singular values `(s1*, s2*)` of the 3×2 matrix `[c_z c_x]`, descending.
pub fn s_star(u: &UnitalChannel) -> [f64; 2] {
    // In the orthonormal frame of the column pair the block is triangular.
    let (cz, cx) = (u.column(0), u.column(1));
    let (r1, r2, _) = orthonormal_pair(&cz, &cx, DEGENERACY_TOL);
    let t = Mat2::new(r1.dot(&cz), r1.dot(&cx), r2.dot(&cz), r2.dot(&cx));
    singular_values2(&t)
}

/// `J1 = 1 - hb(s1*) - hb(s2*)`.
///
/// Bob's rotation takes `c_z` onto the z axis and `c_x` into the z-x plane,
/// so the compensated z-x block is triangular with `R'_xz = 0`.
pub fn bb84_j1(u: &UnitalChannel) -> (RateValue, CompensationPlan, [f64; 2], bool) {
    let s = s_star(u);
    let (r1, r2, degenerate) = orthonormal_pair(&u.column(0), &u.column(1), DEGENERACY_TOL);
    let plan = CompensationPlan::one_side(Rotation3::from_two_rows(&r1, &r2), Restriction::Full);
    (RateValue::new(bb84_core(s[0], s[1])), plan, s, degenerate)
}

/// A rate together with the compensation that attains it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEntry {
    pub value: RateValue,
    pub plan: CompensationPlan,
}

/// All twelve optimized rates of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub f1: RateEntry,
    pub f2: RateEntry,
    pub f1_conv: RateEntry,
    pub f2_conv: RateEntry,
    pub g1: RateEntry,
    pub g2: RateEntry,
    pub g1_conv: RateEntry,
    pub g2_conv: RateEntry,
    pub j1: RateEntry,
    pub j2: RateEntry,
    pub j1_conv: RateEntry,
    pub j2_conv: RateEntry,
    pub pauli: PauliDistribution,
    pub signed_singular_values: Vec3,
    pub six_state_orthogonal: Orthogonality,
    pub bb84_orthogonal: Orthogonality,
    pub bb84_any_orthogonal: Orthogonality,
    pub s_star: [f64; 2],
    pub warnings: Vec<Warning>,
}

impl RateReport {
    pub fn get(&self, kind: RateKind) -> &RateEntry {
        match kind {
            RateKind::F1 => &self.f1,
            RateKind::F2 => &self.f2,
            RateKind::F1Conv => &self.f1_conv,
            RateKind::F2Conv => &self.f2_conv,
            RateKind::G1 => &self.g1,
            RateKind::G2 => &self.g2,
            RateKind::G1Conv => &self.g1_conv,
            RateKind::G2Conv => &self.g2_conv,
            RateKind::J1 => &self.j1,
            RateKind::J2 => &self.j2,
            RateKind::J1Conv => &self.j1_conv,
            RateKind::J2Conv => &self.j2_conv,
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (RateKind, &RateEntry)> {
        RateKind::ALL.into_iter().map(move |k| (k, self.get(k)))
    }
}

fn entry(value: RateValue, plan: CompensationPlan) -> RateEntry {
    RateEntry { value, plan }
}

/// Computes every rate. The three conventional one-side rates are searched
/// numerically with `cfg`; the rest are closed forms.
pub fn full_report(u: &UnitalChannel, cfg: &SearchConfig) -> Result<RateReport> {
    cfg.validate()?;
    u.require_cp()?;
    let mut warnings = Vec::new();

    let (f2, f2_plan) = six_state_f2(u)?;
    let (f1, f1_plan) = six_state_f1(u)?;
    let f1_search = tilde_f1(u, cfg)?;

    let (g2, g2_plan) = bb84_g2(u);
    let g1_plan = bb84_g1_plan(u);
    let g1_search = tilde_g1(u, cfg)?;

    let (j2, j2_plan) = bb84_j2(u);
    let (j1, j1_plan, s_star, degenerate) = bb84_j1(u);
    if degenerate {
        warnings.push(Warning::DegenerateColumns("j1"));
    }
    let j1_search = tilde_j1(u, cfg)?;

    Ok(RateReport {
        f1: entry(f1, f1_plan),
        f2: entry(f2, f2_plan),
        f1_conv: entry(
            RateValue::new(f1_search.value),
            CompensationPlan::one_side(f1_search.argmax, Restriction::Full),
        ),
        // Two-side compensation diagonalizes R, after which conventional
        // estimation loses nothing.
        f2_conv: entry(f2, f2_plan),
        g1: entry(g2, g1_plan),
        g2: entry(g2, g2_plan),
        g1_conv: entry(
            RateValue::new(g1_search.value),
            CompensationPlan::one_side(Rotation3::embed_zx(&g1_search.argmax), Restriction::ZxPlane),
        ),
        g2_conv: entry(g2, g2_plan),
        j1: entry(j1, j1_plan),
        j2: entry(j2, j2_plan),
        j1_conv: entry(
            RateValue::new(j1_search.value),
            CompensationPlan::one_side(j1_search.argmax, Restriction::Full),
        ),
        j2_conv: entry(j2, j2_plan),
        pauli: u.pauli,
        signed_singular_values: u.svd.e,
        six_state_orthogonal: six_state_orthogonality(u),
        bb84_orthogonal: bb84_orthogonality(u),
        bb84_any_orthogonal: bb84_any_orthogonality(u),
        s_star,
        warnings,
    })
}

/// BB84 rates only, for channels that are contractions but possibly not
/// completely positive. Six-state fields are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct Bb84Report {
    pub g1: RateEntry,
    pub g2: RateEntry,
    pub j1: RateEntry,
    pub j2: RateEntry,
    pub s_star: [f64; 2],
    pub warnings: Vec<Warning>,
}

pub fn bb84_report(u: &UnitalChannel) -> Bb84Report {
    let mut warnings = Vec::new();
    if !u.cp {
        let (component, value) = u.pauli.min();
        warnings.push(Warning::NotCompletelyPositive { component, value });
    }
    let (g2, g2_plan) = bb84_g2(u);
    let (j2, j2_plan) = bb84_j2(u);
    let (j1, j1_plan, s_star, degenerate) = bb84_j1(u);
    if degenerate {
        warnings.push(Warning::DegenerateColumns("j1"));
    }
    Bb84Report {
        g1: entry(g2, bb84_g1_plan(u)),
        g2: entry(g2, g2_plan),
        j1: entry(j1, j1_plan),
        j2: entry(j2, j2_plan),
        s_star,
        warnings,
    }
}
